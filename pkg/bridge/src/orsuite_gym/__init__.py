"""Classic reset/step adapter for orsuite environments."""
from .bridge import Box, BridgedEnv, Discrete, env_ids, make, spaces, wrap_env

__all__ = [
    "Box",
    "BridgedEnv",
    "Discrete",
    "env_ids",
    "make",
    "spaces",
    "wrap_env",
]

__version__ = "0.1.0"
