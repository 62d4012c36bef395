import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { canSubmitDecision, renderEffects } from "../src/caseview.js";
import { ApiError } from "../src/types.js";
import { addCase, fixtureFetch, makeFixture } from "./fixture.js";

function client(state: ReturnType<typeof makeFixture>, reviewer = "alice") {
  return new ApiClient({ reviewerId: reviewer, baseUrl: "http://gw" },
                       fixtureFetch(state));
}

describe("claim and decide", () => {
  it("claim then release delivers the frozen output and resolves the case", async () => {
    const state = makeFixture();
    const frozen = addCase(state, { frozen_output: "frozen-abc" });
    state.frozen["frozen-abc"] = "MKVLAGEQRI";
    const api = client(state);

    await api.claimCase(frozen.case_id);
    expect(state.cases[0].state).toBe("in_review");

    const effects = await api.decideCase(frozen.case_id, "release_output",
                                         "confirmed vaccine work");
    expect(effects.released_output?.sequence).toBe("MKVLAGEQRI");
    expect(state.cases[0].state).toBe("resolved");

    // the case has left the open queue
    const open = await api.listCases({ state: "open" });
    expect(open).toHaveLength(0);

    const html = renderEffects(effects);
    expect(html).toContain("released to requester");
  });

  it("surfaces a conflict when another reviewer holds the claim", async () => {
    const state = makeFixture();
    const case_ = addCase(state);
    await client(state, "bob").claimCase(case_.case_id);

    const before = state.requests.length;
    await expect(client(state, "alice").claimCase(case_.case_id))
      .rejects.toMatchObject({ code: "conflict" });
    // exactly one request went out: no automatic retry loop
    expect(state.requests.length).toBe(before + 1);
  });

  it("surfaces invalid-state when deciding an already-resolved case", async () => {
    const state = makeFixture();
    const case_ = addCase(state);
    const api = client(state);
    await api.claimCase(case_.case_id);
    await api.decideCase(case_.case_id, "no_action", "done");

    try {
      await api.decideCase(case_.case_id, "deny_output", "again");
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).code).toBe("invalid-state");
    }
  });

  it("every decision round-trips through the decide endpoint with a rationale", async () => {
    const state = makeFixture();
    const case_ = addCase(state);
    const api = client(state);
    await api.claimCase(case_.case_id);
    await api.decideCase(case_.case_id, "revoke_principal", "clear misuse");
    const decideCalls = state.requests.filter((r) =>
      r.path.endsWith("/decide") && r.method === "POST");
    expect(decideCalls).toHaveLength(1);
    const body = decideCalls[0].body as { rationale: string; reviewer_id: string };
    expect(body.rationale.trim().length).toBeGreaterThan(0);
    expect(body.reviewer_id).toBe("alice");
  });

  it("disables submission for an empty rationale, client-side", () => {
    expect(canSubmitDecision("release_output", "")).toBe(false);
    expect(canSubmitDecision("release_output", "   ")).toBe(false);
    expect(canSubmitDecision("release_output", "legit")).toBe(true);
    expect(canSubmitDecision("not-an-action", "legit")).toBe(false);
  });

  it("renders enforcement effects including federation publications", async () => {
    const state = makeFixture();
    const case_ = addCase(state);
    const api = client(state);
    await api.claimCase(case_.case_id);
    const effects = await api.decideCase(case_.case_id, "revoke_principal", "misuse");
    const html = renderEffects(effects);
    expect(html).toContain("principal revoked");
    expect(html).toContain("1 federation record(s) published");
  });
});
