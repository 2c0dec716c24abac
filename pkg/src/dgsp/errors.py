"""Exception types shared across the toolkit."""


class DgspError(Exception):
    """Base class for toolkit-specific failures."""


class ParseError(DgspError, ValueError):
    """Malformed input file; carries file and line context."""

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class NonDiagonalizableError(DgspError, ValueError):
    """Shift operator is defective or too ill-conditioned for an eigenvector GFT."""

    def __init__(self, vcond):
        self.vcond = vcond
        super().__init__(
            f"eigenvector basis condition number {vcond:.3e} exceeds the "
            "diagonalizability threshold; the shift is defective or nearly so. "
            "Use the learned orthonormal transform (learn_dgft) instead."
        )


class RankDeficientError(DgspError, ValueError):
    """A sampled basis matrix does not have full column rank."""

    def __init__(self, rank, needed):
        self.rank = rank
        self.needed = needed
        super().__init__(
            f"sampled basis has rank {rank}, need {needed}; "
            "the sampling set cannot recover this bandlimited model"
        )


class StabilityError(DgspError, ValueError):
    """A simulated dynamical model is unstable."""

    def __init__(self, radius, what="system"):
        self.radius = radius
        super().__init__(
            f"{what} has spectral radius {radius:.6g} >= 1; simulation diverges"
        )


class InfeasibleError(DgspError, RuntimeError):
    """A convex program has no feasible point; carries the solver's evidence."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class ConfigError(DgspError, ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""
