"""Exception hierarchy shared across the package.

``NoiseAmpError`` is the base for every domain-level failure (unstable
iterations, infeasible tuning caps, oversized lattices, ...).  The CLI maps
these to exit code 3; plain ``ValueError`` / ``TypeError`` remain usage
errors (exit code 2).
"""


class NoiseAmpError(Exception):
    """Base class for domain errors raised by this package."""


class EmptySpectrum(NoiseAmpError):
    """A spectrum must contain at least one eigenvalue."""


class NonPositiveEigenvalue(NoiseAmpError):
    """Eigenvalues of a strongly convex quadratic must be positive."""


class UnstableMode(NoiseAmpError):
    """A single modal recursion has spectral radius >= 1."""

    def __init__(self, lam: float, rho: float):
        self.lam = float(lam)
        self.rho = float(rho)
        super().__init__(
            f"modal recursion at eigenvalue {lam!r} has spectral radius "
            f"{rho!r} >= 1"
        )


class Unstable(NoiseAmpError):
    """The iteration diverges on the given spectrum; carries the worst mode."""

    def __init__(self, lam: float, rho: float):
        self.lam = float(lam)
        self.rho = float(rho)
        super().__init__(
            f"iteration is unstable: eigenvalue {lam!r} gives spectral "
            f"radius {rho!r} >= 1"
        )


class NotContractive(NoiseAmpError):
    """Gradient descent step is not a contraction for the given (m, L, alpha)."""


class ShapeMismatch(NoiseAmpError):
    """Matrix/vector dimensions passed to a solver are inconsistent."""


class DimensionTooSmall(NoiseAmpError):
    """A bound requires a larger problem dimension than supplied."""


class NoGuarantee(NoiseAmpError):
    """No convergence guarantee exists for the requested method/parameters."""


class InfeasibleCap(NoiseAmpError):
    """No step-size/momentum pair satisfies the requested rate cap."""


class KappaTooSmall(NoiseAmpError):
    """A bound only holds above a minimum condition number."""


class SizeOverflow(NoiseAmpError):
    """Requested lattice exceeds the supported network size."""


class NonFinite(NoiseAmpError):
    """A simulated trajectory left the finite range (diverged)."""

    def __init__(self, step: int, message: str = ""):
        self.step = int(step)
        super().__init__(
            message or f"trajectory became non-finite/divergent at step {step}"
        )
