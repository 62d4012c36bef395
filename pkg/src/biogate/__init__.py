"""biogate: three-tier KYC access gateway for hosted biological design models.

Tier I vets who may ask (institutional vouching and exclusion lists),
Tier II screens what comes back (homology and motif flags), Tier III
watches behavior over time. Humans, not rules, take enforcement
actions, and hosts share signed revocations with their peers.
"""

__version__ = "0.1.0"
