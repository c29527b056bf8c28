"""reset/step environment adapter over the gridarena engine.

Pure marshaling: scenarios are parsed by the engine, actions travel as the
engine's wire codes (0-8 or [look, move] pairs), and observations cross the
boundary as flat uint8 buffers plus a shape manifest.  No game logic lives
here, which is what keeps binding-driven runs byte-identical to CLI traces.
"""

__version__ = "0.1.0"

from .env import EnvHandle, GridArenaEnv, make_env, reset, step_env

__all__ = ["EnvHandle", "GridArenaEnv", "make_env", "reset", "step_env", "__version__"]
