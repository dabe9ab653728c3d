"""Hot-kernel backend selection: compiled extension if present, else pure Python."""

try:
    from verisim._native import best_split, lpt_makespan

    BACKEND = "native"
except ImportError:
    from verisim._fallback import best_split, lpt_makespan

    BACKEND = "fallback"

__all__ = ["best_split", "lpt_makespan", "BACKEND"]
