"""Steady-state noise amplification of first-order methods on quadratics.

The headline quantity is J = lim_t (1/t) sum_k E||x^k - x*||^2, the
steady-state variance of the iterates under additive white noise.  On a
quadratic it splits into a sum of per-mode contributions J_hat(lambda) with
closed forms:

    GD: J_hat = sigma^2 / (alpha lambda (2 - alpha lambda))
    HB: J_hat = sigma^2 (1 + beta)
              / (alpha lambda (1 - beta) (2(1 + beta) - alpha lambda))
    NA: J_hat = sigma^2 (1 + beta(1 - alpha lambda))
              / (alpha lambda (1 - beta(1 - alpha lambda))
                 (2(1 + beta) - (2 beta + 1) alpha lambda))

The module offers three independent evaluation routes (closed form, modal
Lyapunov solve, closed-loop eigenvalue form), the HB/GD ratio identity, the
extreme-mode values used by the NA/GD sandwich, and the spectrum-free
variance bounds at the quadratic-optimal parameter choices.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .dynamics import (Algo, AlgoConfig, INSTABILITY_THRESHOLD,
                       check_stable, companion_coefficients, convergence_rate,
                       modal_spectral_radius, modal_system,
                       solve_modal_lyapunov)
from .errors import DimensionTooSmall, Unstable, UnstableMode
from .spectrum import Spectrum


def modal_variance(cfg: AlgoConfig, lam: float) -> float:
    """Closed-form per-mode steady-state variance J_hat(lambda)."""
    rho = modal_spectral_radius(cfg, lam)
    if rho >= INSTABILITY_THRESHOLD:
        raise UnstableMode(lam, rho)
    return float(_modal_variance_raw(cfg, np.asarray(lam, dtype=float)))


def _modal_variance_raw(cfg: AlgoConfig, lams: np.ndarray) -> np.ndarray:
    """Vectorized J_hat(lambda); assumes stability was already checked."""
    sig2 = cfg.effective_sigma ** 2
    mu = cfg.alpha * lams
    if cfg.algo == Algo.GD:
        return sig2 / (mu * (2.0 - mu))
    beta = cfg.beta
    if cfg.algo == Algo.HB:
        return (sig2 * (1.0 + beta)
                / (mu * (1.0 - beta) * (2.0 * (1.0 + beta) - mu)))
    bm = beta * (1.0 - mu)
    return (sig2 * (1.0 + bm)
            / (mu * (1.0 - bm) * (2.0 * (1.0 + beta) - (2.0 * beta + 1.0) * mu)))


@dataclass(frozen=True)
class VarianceReport:
    """Exact steady-state variance of an algorithm on a spectrum.

    ``j`` sums per-mode iterate variances, ``j_prime`` weights each mode by
    its eigenvalue (objective-suboptimality output), ``z_eigs`` are the
    eigenvalues of the steady-state output covariance (the per-mode values
    sorted descending), and ``rho`` is the convergence rate.
    """

    algo: Algo
    alpha: float
    beta: float
    sigma: float
    rho: float
    j: float
    j_prime: float
    per_mode: np.ndarray        # J_hat(lambda_i), aligned with lambdas
    lambdas: np.ndarray
    z_eigs: np.ndarray          # per-mode variances sorted descending

    def to_dict(self) -> dict[str, Any]:
        return {
            "algo": self.algo.value,
            "alpha": self.alpha,
            "beta": self.beta,
            "sigma": self.sigma,
            "rho": self.rho,
            "J": self.j,
            "J_prime": self.j_prime,
            "per_mode": [
                {"lambda": float(l), "j_hat": float(v)}
                for l, v in zip(self.lambdas, self.per_mode)
            ],
            "z_eigs": [float(v) for v in self.z_eigs],
        }


def variance_amplification(cfg: AlgoConfig, s: Spectrum) -> VarianceReport:
    """Evaluate J, J' and per-mode variances; raises :class:`Unstable`."""
    rho = check_stable(cfg, s)
    per_mode = _modal_variance_raw(cfg, s.values)
    # Modes are accumulated in ascending mode index (descending eigenvalue)
    # with exact compensated summation.
    j = math.fsum(per_mode)
    j_prime = math.fsum(per_mode * s.values)
    return VarianceReport(
        algo=cfg.algo, alpha=cfg.alpha, beta=cfg.beta,
        sigma=cfg.effective_sigma, rho=rho, j=j, j_prime=j_prime,
        per_mode=per_mode, lambdas=s.values.copy(),
        z_eigs=np.sort(per_mode)[::-1].copy(),
    )


def variance_via_lyapunov(cfg: AlgoConfig, s: Spectrum) -> float:
    """J evaluated by solving each modal Lyapunov equation explicitly."""
    check_stable(cfg, s)
    vals = []
    for lam in s.values:
        ms = modal_system(cfg, float(lam))
        p = solve_modal_lyapunov(ms, cfg)
        vals.append(float((ms.c_hat @ p @ ms.c_hat.T)[0, 0]))
    return math.fsum(vals)


def variance_via_eigenvalues(cfg: AlgoConfig, s: Spectrum) -> float:
    """J expressed through the closed-loop eigenvalues of each mode.

    For GD each mode contributes sigma^2 / (1 - l^2) with l = 1 - alpha
    lambda; for HB/NA with companion eigenvalues l, l' the contribution is

        sigma^2 (1 + l l') / ((1 - l l')(1 - l)(1 - l')(1 + l)(1 + l')).
    """
    check_stable(cfg, s)
    sig2 = cfg.effective_sigma ** 2
    vals = []
    for lam in s.values:
        if cfg.algo == Algo.GD:
            l = 1.0 - cfg.alpha * float(lam)
            vals.append(sig2 / (1.0 - l * l))
            continue
        a, b = companion_coefficients(cfg, float(lam))
        disc = cmath.sqrt(b * b + 4.0 * a)
        l1 = 0.5 * (b + disc)
        l2 = 0.5 * (b - disc)
        num = 1.0 + l1 * l2
        den = (1.0 - l1 * l2) * (1.0 - l1) * (1.0 - l2) * (1.0 + l1) * (1.0 + l2)
        vals.append((sig2 * num / den).real)
    return math.fsum(vals)


def hb_gd_ratio(kappa: float) -> float:
    """J_hb / J_gd at the quadratic-optimal tunings of both methods.

    Equals (sqrt(kappa)+1)^4 / (8 sqrt(kappa) (kappa+1)) = 1/(1 - beta^2)
    for the optimal heavy-ball momentum; it is independent of the spectrum.
    """
    if kappa < 1.0:
        raise ValueError("kappa must be >= 1")
    rk = math.sqrt(kappa)
    return (rk + 1.0) ** 4 / (8.0 * rk * (kappa + 1.0))


def extreme_modal_values(algo: Algo, kappa: float) -> dict[str, float]:
    """Per-mode variance at lambda in {m, L, 1/alpha} for sigma = 1.

    GD uses alpha = 2/(L+m) (quadratic-optimal); NA uses alpha = 4/(3L+m),
    beta = (sqrt(3k+1)-2)/(sqrt(3k+1)+2).  Both have J_hat(1/alpha) = 1 and
    attain their extremes over [m, L] at the endpoints.
    """
    if kappa < 1.0:
        raise ValueError("kappa must be >= 1")
    if algo == Algo.GD:
        edge = (kappa + 1.0) ** 2 / (4.0 * kappa)
        return {"j_at_m": edge, "j_at_L": edge, "j_at_inv_alpha": 1.0}
    if algo == Algo.NA:
        kb = 3.0 * kappa + 1.0
        rkb = math.sqrt(kb)
        j_m = kb * kb * (kb - 2.0 * rkb + 2.0) / (32.0 * (rkb - 1.0) ** 3)
        j_l = (9.0 * kb * kb * (kb + 2.0 * rkb - 2.0)
               / (32.0 * (kb - 1.0) * (kb - rkb + 1.0) * (2.0 * rkb - 1.0)))
        return {"j_at_m": j_m, "j_at_L": j_l, "j_at_inv_alpha": 1.0}
    raise ValueError("extreme modal values are available for GD and NA")


def na_gd_ratio_bounds(kappa: float, n: int) -> tuple[float, float]:
    """Sandwich for J_na / J_gd over all spectra with extremes m, L.

    Both methods use their quadratic-optimal tunings.  The ratio of sums is
    bracketed by mixing the per-mode extreme values: the lower bound puts
    n-1 modes at L, the upper bound puts n-1 modes at m.
    """
    if n < 2:
        raise DimensionTooSmall("ratio bounds need n >= 2")
    gd = extreme_modal_values(Algo.GD, kappa)
    na = extreme_modal_values(Algo.NA, kappa)
    lower = ((na["j_at_m"] + (n - 1) * na["j_at_L"])
             / (gd["j_at_m"] + (n - 1) * gd["j_at_L"]))
    upper = ((na["j_at_L"] + (n - 1) * na["j_at_m"])
             / (gd["j_at_L"] + (n - 1) * gd["j_at_m"]))
    return lower, upper


def variance_bounds(algo: Algo, kappa: float, n: int) -> tuple[float, float]:
    """Spectrum-free bounds on J at the quadratic-optimal tuning, sigma = 1.

    Valid for every spectrum with n eigenvalues and extremes m, L = kappa m.
    NA's lower bound requires n >= 2 (it allocates one mode to each extreme).
    """
    if kappa < 1.0:
        raise ValueError("kappa must be >= 1")
    if n < 1:
        raise DimensionTooSmall("need n >= 1")
    if algo == Algo.GD:
        lower = (kappa - 1.0) ** 2 / (2.0 * kappa) + n
        upper = n * (kappa + 1.0) ** 2 / (4.0 * kappa)
        return lower, upper
    if algo == Algo.HB:
        ratio = hb_gd_ratio(kappa)
        rk = math.sqrt(kappa)
        lower = ratio * ((kappa - 1.0) ** 2 / (2.0 * kappa) + n)
        upper = n * (kappa + 1.0) * (rk + 1.0) ** 4 / (32.0 * kappa * rk)
        return lower, upper
    if algo == Algo.NA:
        if n < 2:
            raise DimensionTooSmall("NA bounds need n >= 2")
        kb = 3.0 * kappa + 1.0
        lower = kb ** 1.5 / 32.0 + 9.0 * math.sqrt(kb) / 64.0 + (n - 2)
        upper = (n - 1) * kb ** 1.5 / 8.0 + 9.0 * math.sqrt(kb) / 8.0
        return lower, upper
    raise ValueError(f"unknown algorithm {algo!r}")
