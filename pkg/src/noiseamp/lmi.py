"""Variance certificates for strongly convex problems via small LMIs.

Beyond quadratics, J can no longer be computed exactly, but it can be
bounded: if X >= 0 and multipliers lambda1, lambda2 >= 0 make the linear
matrix inequality below negative semidefinite, then
J <= sigma^2 (n L lambda2 + trace(Bw^T X Bw)).

The LMI couples the state-space model of the method (gradient descent or
Nesterov's method, written around the fixed point) with quadratic
constraints satisfied by the gradient of any m-strongly-convex, L-smooth
function.  Because every block of the LMI is a scalar multiple of the
identity when X is given the structured form [[x1 I, x0 I], [x0 I, x2 I]],
the n-dimensional LMI reduces losslessly to a 3x3 (NA) or 2x2 (GD) matrix
inequality; both the reduced and the full (Kronecker) forms are available.

Closed-form certificates at the standard tunings (alpha = 1/L, and for NA
beta = (sqrt(k)-1)/(sqrt(k)+1)) are provided, together with a derivative-free
coordinate-descent refiner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from .dynamics import Algo
from .errors import NotContractive, ShapeMismatch

PSD_TOL_SCALE = 1e-8


def jacobi_eigenvalues(mat: np.ndarray, tol: float = 1e-13,
                       max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.

    Returns eigenvalues sorted ascending.  Intended for the small matrices
    appearing in the reduced LMIs; accuracy is at machine-precision level
    relative to the matrix norm.
    """
    a = np.asarray(mat, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-10 * max(1.0, np.abs(a).max())):
        raise ShapeMismatch("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    if n == 1:
        return a[0].copy()
    scale = max(1.0, float(np.abs(a).max()))
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.tril(a, -1) ** 2)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                t = math.copysign(1.0, theta) / (
                    abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a = 0.5 * (a + a.T)
    return np.sort(np.diag(a))


@dataclass(frozen=True)
class LmiProblem:
    """Problem data for a variance-certificate LMI."""

    algo: Algo
    m: float
    L: float
    alpha: float
    beta: float = 0.0
    n: int = 1
    reduced: bool = True

    def __post_init__(self):
        if self.algo not in (Algo.GD, Algo.NA):
            raise ValueError("LMI certificates cover GD and NA")
        if not (0.0 < self.m <= self.L):
            raise ValueError("need 0 < m <= L")
        if self.alpha <= 0.0 or not (0.0 <= self.beta < 1.0):
            raise ValueError("need alpha > 0 and beta in [0, 1)")
        if self.n < 1:
            raise ValueError("need n >= 1")

    @property
    def kappa(self) -> float:
        return self.L / self.m


def _scalar_system(p: LmiProblem):
    """Scalar-block (A, Bw, Bu, Cz, Cy) of the method written around x*."""
    am = p.alpha * p.m
    if p.algo == Algo.GD:
        A = np.array([[1.0 - am]])
        Bw = np.array([[1.0]])
        Bu = np.array([[-p.alpha]])
        Cz = np.array([[1.0]])
        Cy = np.array([[1.0]])
    else:
        A = np.array([[0.0, 1.0],
                      [-p.beta * (1.0 - am), (1.0 + p.beta) * (1.0 - am)]])
        Bw = np.array([[0.0], [1.0]])
        Bu = np.array([[0.0], [-p.alpha]])
        Cz = np.array([[1.0, 0.0]])
        Cy = np.array([[-p.beta, 1.0 + p.beta]])
    return A, Bw, Bu, Cz, Cy


def _multiplier_matrix(p: LmiProblem) -> np.ndarray:
    """Scalar-block form of the second (off-by-one) multiplier term for NA."""
    m, L, a, b = p.m, p.L, p.alpha, p.beta
    n1 = np.array([[a * m * b, -a * m * (1.0 + b), -a],
                   [-m * b, m * (1.0 + b), 1.0]])
    n2 = np.array([[-b, b, 0.0],
                   [-m * b, m * (1.0 + b), 1.0]])
    k1 = np.array([[L, 1.0], [1.0, 0.0]])
    k2 = np.array([[-m, 1.0], [1.0, 0.0]])
    return n1.T @ k1 @ n1 + n2.T @ k2 @ n2


@dataclass
class LmiCertificate:
    """Candidate (X, lambda1, lambda2) with its bound and residuals.

    ``bound`` is the certified J bound for sigma = 1 and the problem's n;
    scale by sigma^2 for other noise levels.  ``residual_max_eig`` is the
    largest eigenvalue of the assembled LMI (must be <= psd_tol) and
    ``x_min_eig`` the smallest eigenvalue of X (must be >= -psd_tol).
    """

    x1: float
    x0: float
    x2: float
    lambda1: float
    lambda2: float
    bound: float = math.nan
    residual_max_eig: float = math.nan
    x_min_eig: float = math.nan
    psd_tol: float = math.nan
    valid: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "x1": self.x1, "x0": self.x0, "x2": self.x2,
            "lambda1": self.lambda1, "lambda2": self.lambda2,
            "bound": self.bound,
            "residual_max_eig": self.residual_max_eig,
            "x_min_eig": self.x_min_eig,
            "psd_tol": self.psd_tol,
            "valid": self.valid,
        }


def assemble_lmi(p: LmiProblem, cert: LmiCertificate) -> np.ndarray:
    """Assemble the LMI left-hand side for a candidate certificate.

    Reduced mode returns the 2x2 (GD) or 3x3 (NA) scalar-block matrix; full
    mode returns its Kronecker expansion with identity blocks of size n.
    """
    A, _, Bu, Cz, Cy = _scalar_system(p)
    k = A.shape[0]
    if k == 1:
        X = np.array([[cert.x1]])
    else:
        X = np.array([[cert.x1, cert.x0], [cert.x0, cert.x2]])
    top = A.T @ X @ A - X + Cz.T @ Cz
    cross = A.T @ X @ Bu
    core = np.block([[top, cross], [cross.T, Bu.T @ X @ Bu]])
    span = p.L - p.m
    pi = np.array([[0.0, span], [span, -2.0]])
    sel = np.zeros((2, k + 1))
    sel[0, :k] = Cy[0]
    sel[1, k] = 1.0
    lhs = core + cert.lambda1 * (sel.T @ pi @ sel)
    if p.algo == Algo.NA:
        lhs = lhs + cert.lambda2 * _multiplier_matrix(p)
    lhs = 0.5 * (lhs + lhs.T)
    if p.reduced:
        return lhs
    return np.kron(lhs, np.eye(p.n))


def certified_bound(p: LmiProblem, cert: LmiCertificate) -> float:
    """J bound implied by the candidate for sigma = 1: n (L lam2 + x2-trace)."""
    A, Bw, _, _, _ = _scalar_system(p)
    if A.shape[0] == 1:
        trace_term = cert.x1
    else:
        trace_term = cert.x2  # Bw^T X Bw picks the (2,2) block of X
    return p.n * (p.L * cert.lambda2 + trace_term)


def evaluate_certificate(p: LmiProblem, cert: LmiCertificate) -> LmiCertificate:
    """Fill in bound, residuals and validity of a candidate certificate."""
    lhs = assemble_lmi(p, cert)
    tol = PSD_TOL_SCALE * max(1.0, float(np.abs(lhs).max()))
    res = float(jacobi_eigenvalues(lhs)[-1])
    if p.algo == Algo.GD:
        xmin = cert.x1
    else:
        X = np.array([[cert.x1, cert.x0], [cert.x0, cert.x2]])
        xmin = float(jacobi_eigenvalues(X)[0])
    cert.bound = certified_bound(p, cert)
    cert.residual_max_eig = res
    cert.x_min_eig = xmin
    cert.psd_tol = tol
    cert.valid = (res <= tol and xmin >= -tol
                  and cert.lambda1 >= -tol and cert.lambda2 >= -tol)
    return cert


def contraction_bound_gd(m: float, L: float, alpha: float,
                         sigma: float = 1.0, n: int = 1) -> float:
    """Variance bound n sigma^2 / (1 - eta^2) from the contraction factor.

    eta = max(|1 - alpha m|, |1 - alpha L|) must be < 1, otherwise
    :class:`NotContractive` is raised.  At alpha = 1/L this equals
    n sigma^2 kappa^2 / (2 kappa - 1).
    """
    if not (0.0 < m <= L):
        raise ValueError("need 0 < m <= L")
    eta = max(abs(1.0 - alpha * m), abs(1.0 - alpha * L))
    if eta >= 1.0:
        raise NotContractive(
            f"gradient step with alpha={alpha!r} is not a contraction "
            f"(eta={eta!r})")
    return n * sigma * sigma / (1.0 - eta * eta)


def gd_certificate(m: float, L: float, n: int = 1) -> tuple[LmiProblem, LmiCertificate]:
    """Closed-form certificate for gradient descent at alpha = 1/L.

    X = kappa^2/(2 kappa - 1) I and lambda1 = (1 - alpha m) /
    (m (2 - alpha m)(L - m)) make the LMI residual exactly
    diag(0, -1/(m^2 (2 kappa - 1))), certifying J <= n kappa^2/(2 kappa - 1).
    """
    if not (0.0 < m <= L):
        raise ValueError("need 0 < m <= L")
    alpha = 1.0 / L
    kappa = L / m
    x1 = kappa * kappa / (2.0 * kappa - 1.0)
    if L > m:
        lam1 = (1.0 - alpha * m) / (m * (2.0 - alpha * m) * (L - m))
    else:
        lam1 = 0.0
    p = LmiProblem(algo=Algo.GD, m=m, L=L, alpha=alpha, beta=0.0, n=n)
    cert = LmiCertificate(x1=x1, x0=0.0, x2=0.0, lambda1=lam1, lambda2=0.0)
    return p, evaluate_certificate(p, cert)


def _na_poly(kappa: float) -> dict[str, float]:
    """Polynomial ingredients (in sqrt(kappa)) of the NA certificate."""
    r = math.sqrt(kappa)
    s = 8.0 * kappa ** 2 - 6.0 * kappa ** 1.5 - 2.0 * kappa + 3.0 * r - 1.0
    x1 = (2.0 * kappa ** 3.5 - 8.0 * kappa ** 3 + 11.0 * kappa ** 2.5
          + 5.0 * kappa ** 2 - 14.0 * kappa ** 1.5 + 8.0 * kappa - 2.0 * r) / s
    x0_num = -2.0 * kappa ** 1.5 * (r - 1.0) ** 3 * (r + 1.0)
    x0 = x0_num / s
    x2 = kappa ** 1.5 * (2.0 * kappa ** 2 - 3.0 * kappa + 5.0 * r - 2.0) / s
    bound_num = (4.0 * kappa ** 3.5 - 4.0 * kappa ** 3 - 3.0 * kappa ** 2.5
                 + 9.0 * kappa ** 2 - 4.0 * kappa ** 1.5)
    return {"s": s, "x1": x1, "x0": x0, "x0_num": x0_num, "x2": x2,
            "bound_per_dim": bound_num / s}


def na_certificate(kappa: float, L: float, n: int = 1) -> tuple[LmiProblem, LmiCertificate]:
    """Closed-form certificate for Nesterov's method at the standard tuning.

    Uses alpha = 1/L and beta = (sqrt(k)-1)/(sqrt(k)+1).  The certified
    bound is n (4k^3.5 - 4k^3 - 3k^2.5 + 9k^2 - 4k^1.5) / s(k) with
    s(k) = 8k^2 - 6k^1.5 - 2k + 3 sqrt(k) - 1; it stays within a factor
    4.08 of the best structured-X bound for all kappa.
    """
    if kappa < 1.0:
        raise ValueError("kappa must be >= 1")
    if L <= 0.0:
        raise ValueError("L must be positive")
    r = math.sqrt(kappa)
    alpha = 1.0 / L
    beta = (r - 1.0) / (r + 1.0)
    m = L / kappa
    poly = _na_poly(kappa)
    lam1 = (kappa / L) ** 2 / (2.0 * kappa - 1.0)
    lam2 = -poly["x0_num"] / (L * poly["s"])
    p = LmiProblem(algo=Algo.NA, m=m, L=L, alpha=alpha, beta=beta, n=n)
    cert = LmiCertificate(x1=poly["x1"], x0=poly["x0"], x2=poly["x2"],
                          lambda1=lam1, lambda2=lam2)
    return p, evaluate_certificate(p, cert)


def q_bounds(algo: Algo, kappa: float, n: int) -> float:
    """Reference bound q(kappa) the closed-form certificates are compared to.

    GD: n kappa^2 / (2 kappa - 1); NA: n kappa^2 (2 kappa - 2 sqrt(kappa)
    + 1) / (2 sqrt(kappa) - 1)^3.
    """
    if kappa < 1.0:
        raise ValueError("kappa must be >= 1")
    if algo == Algo.GD:
        return n * kappa * kappa / (2.0 * kappa - 1.0)
    if algo == Algo.NA:
        r = math.sqrt(kappa)
        return (n * kappa * kappa * (2.0 * kappa - 2.0 * r + 1.0)
                / (2.0 * r - 1.0) ** 3)
    raise ValueError("reference bounds cover GD and NA")


def refine_bound(p: LmiProblem, cert: LmiCertificate,
                 budget: int = 2000) -> LmiCertificate:
    """Derivative-free coordinate descent on (x1, x0, x2, lambda1, lambda2).

    Starting from a valid certificate, tries +/- steps in each coordinate,
    keeping only moves that stay valid and lower the certified bound.  Step
    sizes halve after a full pass without improvement.  ``budget`` caps the
    number of LMI evaluations; the returned certificate is always valid and
    never worse than the input.
    """
    base = evaluate_certificate(p, replace(cert))
    if not base.valid:
        raise ValueError("refine_bound needs a valid starting certificate")
    names = ["x1", "lambda1"] if p.algo == Algo.GD else \
        ["x1", "x0", "x2", "lambda1", "lambda2"]
    steps = {k: 0.1 * max(abs(getattr(base, k)), 1.0) for k in names}
    best = base
    evals = 0
    while evals < budget and max(steps.values()) > 1e-14:
        improved = False
        for name in names:
            for sgn in (1.0, -1.0):
                if evals >= budget:
                    break
                trial = replace(best)
                setattr(trial, name, getattr(best, name) + sgn * steps[name])
                trial = evaluate_certificate(p, trial)
                evals += 1
                if trial.valid and trial.bound < best.bound:
                    best = trial
                    improved = True
                    break
        if not improved:
            for name in names:
                steps[name] *= 0.5
    return best
