"""Exception types shared across the package."""


class MeshError(ValueError):
    """Raised for unreadable, malformed, or degenerate mesh input."""


class SolverError(RuntimeError):
    """Raised when a solver cannot be set up or cannot make progress
    (singular system, failed factorization, reference solver stall)."""
