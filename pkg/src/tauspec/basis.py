"""Orthogonal polynomial bases on an arbitrary interval.

Every family is defined by the coefficients of its three term recurrence
on the reference interval [-1, 1],

    x * P_j(x) = alpha_j * P_{j+1}(x) + beta_j * P_j(x) + gamma_j * P_{j-1}(x),

with P_0 = 1 and P_{-1} = 0.  A basis instance pairs a family with a
working interval [a, b]; members are evaluated through the affine change
of variable z = c1*x + c2 that maps [a, b] onto the reference interval.
All evaluation and multiplication routines run on the recurrence itself,
never through conversion to the power basis, so they stay usable at high
degree where the power basis is hopeless.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError, ExtrapolationWarning

__all__ = [
    "CHEBYSHEV",
    "LEGENDRE",
    "BasisSpec",
    "Series",
    "LinearizationTable",
    "register_family",
    "family_names",
    "recurrence_coefficients",
    "evaluate",
    "basis_row",
    "product",
    "linearization_rows_by_recurrence",
]

CHEBYSHEV = "ChebyshevT"
LEGENDRE = "LegendreP"


def _chebyshev_recurrence(j: int) -> tuple[float, float, float]:
    if j == 0:
        return (1.0, 0.0, 0.0)
    return (0.5, 0.0, 0.5)


def _legendre_recurrence(j: int) -> tuple[float, float, float]:
    return ((j + 1.0) / (2 * j + 1.0), 0.0, j / (2 * j + 1.0))


def _chebyshev_linearization_row(i: int, j: int):
    # T_i * T_j = (T_{i+j} + T_{|i-j|}) / 2, halves merged when they meet
    lo, hi = abs(i - j), i + j
    if lo == hi:
        return np.array([lo]), np.array([1.0])
    return np.array([lo, hi]), np.array([0.5, 0.5])


class _Family:
    def __init__(self, name, recurrence, linearization_row=None):
        self.name = name
        self.recurrence = recurrence
        self.linearization_row = linearization_row


_FAMILIES: dict[str, _Family] = {}
_ALIASES: dict[str, str] = {}


def register_family(name: str,
                    recurrence: Callable[[int], tuple[float, float, float]],
                    linearization_row=None,
                    aliases: tuple[str, ...] = ()) -> None:
    """Register an orthogonal family by its recurrence provider.

    ``recurrence(j)`` must return ``(alpha_j, beta_j, gamma_j)`` with
    ``alpha_j != 0`` for every j.  ``linearization_row(i, j)``, when
    given, must return the nonzero positions and values of the expansion
    of P_i * P_j; families without one fall back to the generic
    recurrence in :func:`linearization_rows_by_recurrence`.
    """
    a0, _, _ = recurrence(0)
    if a0 == 0.0:
        raise ConfigurationError(f"family {name!r}: alpha_0 must be nonzero")
    _FAMILIES[name] = _Family(name, recurrence, linearization_row)
    _ALIASES[name.lower()] = name
    for alias in aliases:
        _ALIASES[alias.lower()] = name


register_family(CHEBYSHEV, _chebyshev_recurrence, _chebyshev_linearization_row,
                aliases=("chebyshev", "cheb"))
register_family(LEGENDRE, _legendre_recurrence, aliases=("legendre",))


def resolve_family(name: str) -> str:
    """Map a case-insensitive family name or alias to its canonical name."""
    key = str(name).lower()
    if key not in _ALIASES:
        known = ", ".join(sorted(_FAMILIES))
        raise ConfigurationError(f"unknown basis family {name!r} (known: {known})")
    return _ALIASES[key]


def family_names() -> list[str]:
    return sorted(_FAMILIES)


@dataclass(frozen=True)
class BasisSpec:
    """An orthogonal family attached to a working interval [a, b]."""

    family: str
    domain: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "family", resolve_family(self.family))
        a, b = float(self.domain[0]), float(self.domain[1])
        if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
            raise ConfigurationError(f"domain must satisfy a < b, got [{a}, {b}]")
        object.__setattr__(self, "domain", (a, b))

    @property
    def c1(self) -> float:
        a, b = self.domain
        return 2.0 / (b - a)

    @property
    def c2(self) -> float:
        a, b = self.domain
        return (a + b) / (a - b)


def recurrence_coefficients(basis: BasisSpec, j: int) -> tuple[float, float, float]:
    """Reference-domain recurrence triple (alpha_j, beta_j, gamma_j)."""
    if j < 0:
        raise ValueError(f"recurrence index must be nonnegative, got {j}")
    triple = _FAMILIES[basis.family].recurrence(j)
    if triple[0] == 0.0:
        raise ConfigurationError(f"family {basis.family!r}: alpha_{j} is zero")
    return triple


@dataclass
class Series:
    """A finite expansion sum_i coeffs[i] * P_i in a given basis.

    Coefficients are a 1-D float array, frozen after construction.  Two
    Series take part in arithmetic only when their BasisSpec are equal.
    """

    basis: BasisSpec
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=float, copy=True)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("coefficients must be a nonempty 1-D array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite")
        arr.flags.writeable = False
        self.coeffs = arr

    def __len__(self):
        return self.coeffs.size

    @property
    def degree(self) -> int:
        nz = np.nonzero(self.coeffs)[0]
        return int(nz[-1]) if nz.size else 0

    def __call__(self, xs):
        return evaluate(self, xs)


def _check_same_basis(p: Series, q: Series) -> None:
    if p.basis != q.basis:
        raise ValueError(f"basis mismatch: {p.basis} vs {q.basis}")


def basis_row(basis: BasisSpec, x: float, n: int) -> np.ndarray:
    """Values [P*_0(x), ..., P*_{n-1}(x)] of the shifted members at one point."""
    if n < 1:
        raise ValueError("need at least one basis member")
    row = np.empty(n)
    row[0] = 1.0
    if n == 1:
        return row
    z = basis.c1 * float(x) + basis.c2
    a0, b0, _ = recurrence_coefficients(basis, 0)
    row[1] = (z - b0) / a0
    for i in range(2, n):
        a, b, g = recurrence_coefficients(basis, i - 1)
        row[i] = ((z - b) * row[i - 1] - g * row[i - 2]) / a
    return row


def evaluate(series: Series, xs):
    """Evaluate a Series by the forward three term recursion.

    Accepts a scalar or an array of points and returns values of matching
    shape.  Points outside the basis domain are evaluated anyway but
    raise an ExtrapolationWarning.
    """
    basis = series.basis
    coeffs = series.coeffs
    if coeffs.size == 0:
        raise ValueError("empty coefficient vector")
    x = np.asarray(xs, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    a_dom, b_dom = basis.domain
    slack = 1e-12 * (b_dom - a_dom)
    if x.size and (x.min() < a_dom - slack or x.max() > b_dom + slack):
        warnings.warn(
            f"evaluation points outside [{a_dom}, {b_dom}]",
            ExtrapolationWarning, stacklevel=2)
    z = basis.c1 * x + basis.c2
    p_prev = np.zeros_like(z)
    p_curr = np.ones_like(z)
    total = coeffs[0] * p_curr
    for i in range(1, coeffs.size):
        a, b, g = recurrence_coefficients(basis, i - 1)
        p_next = ((z - b) * p_curr - g * p_prev) / a
        total = total + coeffs[i] * p_next
        p_prev, p_curr = p_curr, p_next
    return float(total[0]) if scalar else total


def _mul_x_dense(recurrence, v: np.ndarray) -> np.ndarray:
    """Coefficients of x * sum v_i P_i, one entry longer than v."""
    n = v.size
    out = np.zeros(n + 1)
    for m in range(n + 1):
        s = 0.0
        if m >= 1:
            s += recurrence(m - 1)[0] * v[m - 1]
        if m < n:
            s += recurrence(m)[1] * v[m]
        if m + 1 < n:
            s += recurrence(m + 1)[2] * v[m + 1]
        out[m] = s
    return out


def linearization_rows_by_recurrence(recurrence, i: int, j: int) -> np.ndarray:
    """Expansion of P_i * P_j obtained from the recurrence alone.

    Returns a dense vector of length i + j + 1.  Works for any family:
    rows climb in i through

        P_{k+1} P_j = ((x - beta_k) P_k P_j - gamma_k P_{k-1} P_j) / alpha_k

    with the product x * (P_k P_j) re-expanded by the same recurrence.
    """
    rows = [np.zeros(j + 1)]
    rows[0][j] = 1.0
    if i == 0:
        out = np.zeros(i + j + 1)
        out[: j + 1] = rows[0]
        return out
    a0, b0, _ = recurrence(0)
    rows.append((_mul_x_dense(recurrence, rows[0]) - b0 * np.append(rows[0], 0.0)) / a0)
    for k in range(1, i):
        a, b, g = recurrence(k)
        prev = rows[k]
        prev2 = np.append(rows[k - 1], [0.0, 0.0])
        nxt = (_mul_x_dense(recurrence, prev) - b * np.append(prev, 0.0) - g * prev2) / a
        rows.append(nxt)
    return rows[i]


class LinearizationTable:
    """Cached access to the coefficients of P_i * P_j = sum_k l(i,j,k) P_k."""

    def __init__(self, family: str):
        self.family = resolve_family(family)
        self._fam = _FAMILIES[self.family]
        self._cache: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}

    def row(self, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Nonzero positions and values of the expansion of P_i * P_j."""
        if i < 0 or j < 0:
            raise ValueError("linearization indices must be nonnegative")
        if i > j:
            i, j = j, i
        key = (i, j)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if self._fam.linearization_row is not None:
            idx, vals = self._fam.linearization_row(i, j)
        else:
            dense = linearization_rows_by_recurrence(self._fam.recurrence, i, j)
            idx = np.nonzero(dense)[0]
            vals = dense[idx]
        idx = np.asarray(idx, dtype=int)
        vals = np.asarray(vals, dtype=float)
        self._cache[key] = (idx, vals)
        return idx, vals

    def coefficient(self, i: int, j: int, k: int) -> float:
        """The single value l(i, j, k); zero outside the stored support."""
        if k < 0:
            return 0.0
        idx, vals = self.row(i, j)
        pos = np.searchsorted(idx, k)
        if pos < idx.size and idx[pos] == k:
            return float(vals[pos])
        return 0.0


_TABLES: dict[str, LinearizationTable] = {}


def linearization_table(family: str) -> LinearizationTable:
    """Shared per-family table so repeated products reuse cached rows."""
    name = resolve_family(family)
    tbl = _TABLES.get(name)
    if tbl is None:
        tbl = _TABLES[name] = LinearizationTable(name)
    return tbl


def product(p: Series, q: Series) -> Series:
    """Product of two Series, computed entirely in the orthogonal basis.

    Both inputs are padded to a common length n + 1 and the result has
    length 2n + 1.  Contributions are symmetrized over (i, j) pairs, so
    product(p, q) and product(q, p) agree bitwise.
    """
    _check_same_basis(p, q)
    n = max(p.coeffs.size, q.coeffs.size) - 1
    a = np.zeros(n + 1)
    a[: p.coeffs.size] = p.coeffs
    b = np.zeros(n + 1)
    b[: q.coeffs.size] = q.coeffs
    table = linearization_table(p.basis.family)
    c = np.zeros(2 * n + 1)
    for j in range(n + 1):
        for i in range(j, n + 1):
            w = a[i] * b[j] + a[j] * b[i]
            if i == j:
                w *= 0.5
            if w == 0.0:
                continue
            idx, vals = table.row(i, j)
            c[idx] += w * vals
    return Series(p.basis, c)
