"""
Config - runtime defaults from environment variables.

An optional ``.env`` file at the repository root is loaded first; every
setting then has one accessor with a documented default. Run files and the
command line override these values (see ``orchestrator.parser``).
"""

import os
from pathlib import Path
from typing import Any, Dict

try:
    from dotenv import load_dotenv
    env_path = Path(__file__).parent.parent / ".env"
    load_dotenv(dotenv_path=env_path)
except ImportError:
    pass


def get_worker_count() -> int:
    """Worker processes used by sweeps, default 1.

    Configured with FVK_WORKERS.
    """
    return max(1, int(os.getenv("FVK_WORKERS", "1")))


def get_default_penalty() -> float:
    """Interior-penalty parameter α, default 300 (FVK_PENALTY)."""
    return float(os.getenv("FVK_PENALTY", "300"))


def get_default_poisson_ratio() -> float:
    """Poisson ratio ν, default 0.15 (FVK_POISSON)."""
    return float(os.getenv("FVK_POISSON", "0.15"))


def get_output_root() -> Path:
    """Root directory for run outputs, default ``results`` (FVK_OUTPUT_DIR)."""
    return Path(os.getenv("FVK_OUTPUT_DIR", "results"))


def get_log_level() -> str:
    return os.getenv("FVK_LOG_LEVEL", "INFO").upper()


def get_newton_config() -> Dict[str, Any]:
    """
    Newton defaults.

    Returns:
        dict with abs_tol, rel_tol, max_iters, max_halvings read from
        FVK_NEWTON_ABS_TOL, FVK_NEWTON_REL_TOL, FVK_NEWTON_MAX_ITERS and
        FVK_NEWTON_MAX_HALVINGS.
    """
    return {
        "abs_tol": float(os.getenv("FVK_NEWTON_ABS_TOL", "1e-10")),
        "rel_tol": float(os.getenv("FVK_NEWTON_REL_TOL", "1e-9")),
        "max_iters": int(os.getenv("FVK_NEWTON_MAX_ITERS", "50")),
        "max_halvings": int(os.getenv("FVK_NEWTON_MAX_HALVINGS", "20")),
    }
