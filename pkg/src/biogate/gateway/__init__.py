from .config import GatewayConfig, load_config
from .service import GatewayService, GenerationResponse

__all__ = ["GatewayConfig", "GatewayService", "GenerationResponse", "load_config"]
