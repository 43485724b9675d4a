"""Eigenvalue spectra of strongly convex quadratic objectives.

A spectrum is the multiset of Hessian eigenvalues 0 < m <= ... <= L.  All
closed-form variance results in this package are sums over these modal
eigenvalues, so the container keeps them sorted (descending, so the first
mode is the largest eigenvalue L) and exposes m, L, kappa = L/m and n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptySpectrum, NonPositiveEigenvalue


@dataclass(frozen=True)
class Spectrum:
    """Sorted multiset of positive Hessian eigenvalues."""

    values: np.ndarray  # sorted descending, values[0] == L, values[-1] == m

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def m(self) -> float:
        return float(self.values[-1])

    @property
    def L(self) -> float:
        return float(self.values[0])

    @property
    def kappa(self) -> float:
        return self.L / self.m

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return self.n


def make_spectrum(values: Iterable[float] | Sequence[float]) -> Spectrum:
    """Validate and sort eigenvalues into a :class:`Spectrum`.

    Raises :class:`EmptySpectrum` for an empty input and
    :class:`NonPositiveEigenvalue` if any eigenvalue is <= 0 or non-finite.
    """
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                     dtype=float)
    if arr.ndim != 1:
        arr = arr.ravel()
    if arr.size == 0:
        raise EmptySpectrum("spectrum must contain at least one eigenvalue")
    if not np.all(np.isfinite(arr)):
        raise NonPositiveEigenvalue("eigenvalues must be finite")
    if np.any(arr <= 0.0):
        bad = float(arr[arr <= 0.0][0])
        raise NonPositiveEigenvalue(f"eigenvalues must be positive, got {bad!r}")
    return Spectrum(values=np.sort(arr)[::-1].copy())


def is_symmetric(s: Spectrum, tol: float | None = None) -> bool:
    """True if the eigenvalue multiset is symmetric about (m + L) / 2.

    Multiplicities count: every eigenvalue must pair with a distinct mirror
    partner.  ``tol`` defaults to ``1e-12 * L``.
    """
    if tol is None:
        tol = 1e-12 * s.L
    vals = s.values  # descending
    center2 = s.m + s.L
    i, j = 0, s.n - 1
    while i <= j:
        if abs(vals[i] + vals[j] - center2) > tol:
            return False
        i += 1
        j -= 1
    return True
