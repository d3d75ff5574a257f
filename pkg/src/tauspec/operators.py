"""Matrix representations of multiplication, calculus, and integral kernels.

Everything here acts on coefficient vectors of a :class:`~tauspec.basis.Series`.
The multiplication, differentiation, and integration matrices are built
directly from the three term recurrence of the family; the change of
basis to and from powers of x is produced column by column by the same
recurrence.  No matrix is ever obtained by inverting another one.

The calculus matrices live on the reference interval.  Operators for a
problem posed on [a, b] scale them by the interval map: differentiation
picks up a factor c1, integration a factor 1/c1, and coefficient
polynomials of the problem variable act through the recurrence applied
to the shifted multiplication matrix.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .basis import (
    BasisSpec,
    Series,
    basis_row,
    product,
    recurrence_coefficients,
)
from .errors import TruncationWarning

__all__ = [
    "Role",
    "OperatorMatrix",
    "KernelPoly",
    "multiplication_matrix",
    "multiplication_matrix_power",
    "basis_to_power_matrix",
    "power_to_basis_matrix",
    "differentiation_matrix",
    "integration_matrix",
    "polynomial_multiplication_matrix",
    "differential_operator",
    "integral_operator",
    "volterra_operator",
    "fredholm_operator",
    "from_power_series",
    "kernel_from_power",
    "series_derivative",
    "series_antiderivative",
    "volterra_apply",
    "fredholm_apply",
]


class Role(enum.Enum):
    MULTIPLY = "multiply"
    DIFFERENTIATE = "differentiate"
    INTEGRATE = "integrate"
    BASIS_TO_POWER = "basis_to_power"
    POWER_TO_BASIS = "power_to_basis"
    DIFFERENTIAL = "differential"
    INTEGRAL = "integral"
    VOLTERRA = "volterra"
    FREDHOLM = "fredholm"
    COMPOSITE = "composite"


@dataclass
class OperatorMatrix:
    """A dense operator on coefficient vectors, tagged with its role."""

    basis: BasisSpec
    entries: np.ndarray
    role: Role = Role.COMPOSITE

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=float)
        if arr.ndim != 2:
            raise ValueError("operator entries must be a 2-D array")
        self.entries = arr

    @property
    def shape(self):
        return self.entries.shape


@dataclass
class KernelPoly:
    """A bivariate polynomial kernel K(x, t), expanded in the shifted basis.

    ``coeffs[i, j]`` multiplies P_i(x) * P_j(t).
    """

    basis: BasisSpec
    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=float, copy=True)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("kernel coefficients must be a nonempty 2-D array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("kernel coefficients must be finite")
        self.coeffs = arr


def _recurrence_arrays(basis: BasisSpec, n: int):
    """(alpha, beta, gamma) for j = 0..n-1 as arrays."""
    trip = np.array([recurrence_coefficients(basis, j) for j in range(n)])
    return trip[:, 0], trip[:, 1], trip[:, 2]


def _check_size(n: int) -> int:
    n = int(n)
    if n < 1:
        raise ValueError(f"working size must be positive, got {n}")
    return n


def multiplication_matrix(basis: BasisSpec, n: int) -> OperatorMatrix:
    """Tridiagonal matrix of multiplication by x on the reference interval."""
    n = _check_size(n)
    alpha, beta, gamma = _recurrence_arrays(basis, n)
    m = np.zeros((n, n))
    idx = np.arange(n)
    m[idx, idx] = beta
    m[idx[1:], idx[:-1]] = alpha[:-1]
    m[idx[:-1], idx[1:]] = gamma[1:]
    return OperatorMatrix(basis, m, Role.MULTIPLY)


def _mul_x_matrix(alpha, beta, gamma, a: np.ndarray) -> np.ndarray:
    """Rows of the banded product (multiplication matrix) @ a, any width."""
    n = a.shape[0]
    out = beta[:n, None] * a
    out[1:] += alpha[: n - 1, None] * a[:-1]
    out[:-1] += gamma[1:n, None] * a[1:]
    return out


def multiplication_matrix_power(basis: BasisSpec, k: int, n: int) -> OperatorMatrix:
    """k-th power of the multiplication matrix via the banded row update.

    Never forms a dense matrix product; each step combines at most three
    neighbouring rows.
    """
    n = _check_size(n)
    if k < 0:
        raise ValueError("power must be nonnegative")
    alpha, beta, gamma = _recurrence_arrays(basis, n)
    acc = np.eye(n)
    for _ in range(k):
        acc = _mul_x_matrix(alpha, beta, gamma, acc)
    return OperatorMatrix(basis, acc, Role.MULTIPLY)


def basis_to_power_matrix(basis: BasisSpec, n: int) -> OperatorMatrix:
    """Columns hold the power-basis coefficients of each shifted member.

    Column j satisfies P*_j(x) = sum_i V[i, j] x^i on the working
    interval, built by the recurrence with the interval map folded in.
    """
    n = _check_size(n)
    c1, c2 = basis.c1, basis.c2
    v = np.zeros((n, n))
    v[0, 0] = 1.0
    if n == 1:
        return OperatorMatrix(basis, v, Role.BASIS_TO_POWER)
    a0, b0, _ = recurrence_coefficients(basis, 0)
    v[0, 1] = (c2 - b0) / a0
    v[1, 1] = c1 / a0
    for j in range(1, n - 1):
        a, b, g = recurrence_coefficients(basis, j)
        shifted = np.zeros(n)
        shifted[1:] = v[:-1, j]
        v[:, j + 1] = (c1 * shifted + (c2 - b) * v[:, j] - g * v[:, j - 1]) / a
    return OperatorMatrix(basis, v, Role.BASIS_TO_POWER)


def power_to_basis_matrix(basis: BasisSpec, n: int) -> OperatorMatrix:
    """Columns expand the monomials on the working interval in the basis.

    Column j + 1 comes from column j through the multiplication matrix of
    the interval variable, so the inverse change of basis never involves
    a matrix inversion.
    """
    n = _check_size(n)
    c1, c2 = basis.c1, basis.c2
    alpha, beta, gamma = _recurrence_arrays(basis, n)
    alpha_x = alpha / c1
    beta_x = (beta - c2) / c1
    gamma_x = gamma / c1
    w = np.zeros((n, n))
    w[0, 0] = 1.0
    for j in range(n - 1):
        w[:, j + 1] = _mul_x_matrix(alpha_x, beta_x, gamma_x, w[:, j : j + 1])[:, 0]
    return OperatorMatrix(basis, w, Role.POWER_TO_BASIS)


def differentiation_matrix(basis: BasisSpec, n: int) -> OperatorMatrix:
    """Strictly upper triangular matrix of d/dx on the reference interval.

    Column j + 1 follows from differentiating the recurrence:

        P_j + x P'_j = alpha_j P'_{j+1} + beta_j P'_j + gamma_j P'_{j-1}

    which determines each derivative column from the two before it.
    """
    n = _check_size(n)
    alpha, beta, gamma = _recurrence_arrays(basis, n)
    d = np.zeros((n, n))
    if n == 1:
        return OperatorMatrix(basis, d, Role.DIFFERENTIATE)
    d[0, 1] = 1.0 / alpha[0]
    for j in range(1, n - 1):
        col = _mul_x_matrix(alpha, beta, gamma, d[:, j : j + 1])[:, 0]
        col[j] += 1.0
        col -= beta[j] * d[:, j]
        col -= gamma[j] * d[:, j - 1]
        d[:, j + 1] = col / alpha[j]
    return OperatorMatrix(basis, d, Role.DIFFERENTIATE)


def _reference_values_at_zero(basis: BasisSpec, n: int) -> np.ndarray:
    """P_k(0) on the reference interval for k = 0..n-1."""
    vals = np.empty(n)
    vals[0] = 1.0
    if n == 1:
        return vals
    a0, b0, _ = recurrence_coefficients(basis, 0)
    vals[1] = -b0 / a0
    for k in range(2, n):
        a, b, g = recurrence_coefficients(basis, k - 1)
        vals[k] = (-b * vals[k - 1] - g * vals[k - 2]) / a
    return vals


def integration_matrix(basis: BasisSpec, n: int) -> OperatorMatrix:
    """Antiderivative matrix on the reference interval.

    Column j expands the primitive of P_j that vanishes at the reference
    origin.  The top entry of each column is alpha_j / (j + 1); the rest
    follow by back substitution through the requirement that the
    differentiation matrix sends the column back to e_j, and the free
    constant is fixed by the value at zero.  The primitive of the last
    member needs one coefficient beyond the working size; that entry is
    dropped, which is the only truncation in the construction.
    """
    n = _check_size(n)
    # one extra index so the back substitution sees full derivative data
    dn = differentiation_matrix(basis, n + 1).entries
    p_zero = _reference_values_at_zero(basis, n + 1)
    out = np.zeros((n, n))
    for j in range(n):
        a_j = recurrence_coefficients(basis, j)[0]
        col = np.zeros(j + 2)
        col[j + 1] = a_j / (j + 1)
        for i in range(j - 1, -1, -1):
            acc = dn[i, i + 2 : j + 2] @ col[i + 2 :]
            col[i + 1] = -acc / dn[i, i + 1]
        col[0] = -(col[1:] @ p_zero[1 : j + 2])
        keep = min(n, j + 2)
        out[:keep, j] = col[:keep]
    return OperatorMatrix(basis, out, Role.INTEGRATE)


def polynomial_multiplication_matrix(basis: BasisSpec, coeffs, n: int) -> OperatorMatrix:
    """Matrix of multiplication by a polynomial given in the shifted basis.

    ``coeffs`` are the coefficients of the multiplier on the working
    interval.  The matrix is the coefficient-weighted sum of basis
    members evaluated at the multiplication matrix, accumulated through
    the same three term recurrence, truncated to the working size.
    """
    n = _check_size(n)
    p = np.atleast_1d(np.asarray(coeffs, dtype=float))
    if p.ndim != 1 or p.size == 0:
        raise ValueError("coefficient polynomial must be a nonempty 1-D array")
    if p.size > n:
        raise ValueError(
            f"coefficient polynomial has {p.size} coefficients, working size is {n}")
    alpha, beta, gamma = _recurrence_arrays(basis, n)
    eye = np.eye(n)
    acc = p[0] * eye
    if p.size == 1:
        return OperatorMatrix(basis, acc, Role.MULTIPLY)
    prev = eye
    curr = (multiplication_matrix(basis, n).entries - beta[0] * eye) / alpha[0]
    acc = acc + p[1] * curr
    for j in range(1, p.size - 1):
        nxt = _mul_x_matrix(alpha, beta, gamma, curr)
        nxt -= beta[j] * curr
        nxt -= gamma[j] * prev
        nxt /= alpha[j]
        acc = acc + p[j + 1] * nxt
        prev, curr = curr, nxt
    return OperatorMatrix(basis, acc, Role.MULTIPLY)


def _coeff_poly_items(coeff_polys) -> list[tuple[int, np.ndarray]]:
    if isinstance(coeff_polys, Mapping):
        items = [(int(k), np.atleast_1d(np.asarray(v, dtype=float)))
                 for k, v in coeff_polys.items() if v is not None]
    elif isinstance(coeff_polys, Sequence) and not isinstance(coeff_polys, (str, bytes)):
        items = [(k, np.atleast_1d(np.asarray(v, dtype=float)))
                 for k, v in enumerate(coeff_polys) if v is not None]
    else:
        raise TypeError("coefficient polynomials must be a mapping or sequence")
    return sorted(items)


def differential_operator(basis: BasisSpec, coeff_polys, n: int) -> OperatorMatrix:
    """Operator of sum_k p_k(x) d^k/dx^k on the working interval.

    ``coeff_polys`` maps derivative order k >= 0 to the shifted-basis
    coefficients of p_k (a sequence is read as orders 0, 1, ...).
    """
    n = _check_size(n)
    items = _coeff_poly_items(coeff_polys)
    if not items:
        raise ValueError("no coefficient polynomials given")
    if items[0][0] < 0:
        raise ValueError("derivative orders must be nonnegative")
    cn = basis.c1 * differentiation_matrix(basis, n).entries
    acc = np.zeros((n, n))
    power = np.eye(n)
    order = 0
    for k, p in items:
        while order < k:
            power = cn @ power
            order += 1
        acc += polynomial_multiplication_matrix(basis, p, n).entries @ power
    return OperatorMatrix(basis, acc, Role.DIFFERENTIAL)


def integral_operator(basis: BasisSpec, coeff_polys, n: int) -> OperatorMatrix:
    """Operator of sum_l p_l(x) (iterated antiderivative)^l, orders l >= 1."""
    n = _check_size(n)
    items = _coeff_poly_items(coeff_polys)
    if not items:
        raise ValueError("no coefficient polynomials given")
    if items[0][0] < 1:
        raise ValueError("integral orders must be at least 1")
    os = integration_matrix(basis, n).entries / basis.c1
    acc = np.zeros((n, n))
    power = np.eye(n)
    order = 0
    for l, p in items:
        while order < l:
            power = os @ power
            order += 1
        acc += polynomial_multiplication_matrix(basis, p, n).entries @ power
    return OperatorMatrix(basis, acc, Role.INTEGRAL)


def _clipped_kernel(kernel: KernelPoly, n: int) -> np.ndarray:
    k = kernel.coeffs
    if k.shape[0] > n or k.shape[1] > n:
        warnings.warn(
            f"kernel of shape {k.shape} truncated to working size {n}",
            TruncationWarning, stacklevel=3)
        k = k[:n, :n]
    return k


def _basis_member_matrices(basis: BasisSpec, n: int, count: int):
    """Yield P_j evaluated at the multiplication matrix for j = 0..count-1."""
    alpha, beta, gamma = _recurrence_arrays(basis, n)
    eye = np.eye(n)
    prev = None
    curr = eye
    for j in range(count):
        yield curr
        if j == 0:
            nxt = (multiplication_matrix(basis, n).entries - beta[0] * eye) / alpha[0]
        else:
            nxt = _mul_x_matrix(alpha, beta, gamma, curr)
            nxt -= beta[j] * curr
            nxt -= gamma[j] * prev
            nxt /= alpha[j]
        prev, curr = curr, nxt


def volterra_operator(kernel: KernelPoly, lower: float, n: int) -> OperatorMatrix:
    """Operator of y -> integral from ``lower`` to x of K(x, t) y(t) dt.

    Assembled per kernel column: the t dependence acts through basis
    members evaluated at the multiplication matrix, the antiderivative
    supplies the integral, and a rank-one correction subtracts the value
    at the lower limit so the image vanishes there.
    """
    basis = kernel.basis
    n = _check_size(n)
    k = _clipped_kernel(kernel, n)
    nx, nt = k.shape
    os = integration_matrix(basis, n).entries / basis.c1
    row_lo = basis_row(basis, lower, n)
    acc = np.zeros((n, n))
    for j, pj in enumerate(_basis_member_matrices(basis, n, nt)):
        col = np.zeros(n)
        col[:nx] = k[:, j]
        if not col.any():
            continue
        b = polynomial_multiplication_matrix(basis, k[:, j], n).entries
        b = b - np.outer(col, row_lo)
        acc += b @ os @ pj
    return OperatorMatrix(basis, acc, Role.VOLTERRA)


def fredholm_operator(kernel: KernelPoly, n: int) -> OperatorMatrix:
    """Operator of y -> integral over the whole interval of K(x, t) y(t) dt.

    The result of the integral is a polynomial in x of the kernel's x
    degree, so rows beyond that degree are exactly zero.
    """
    basis = kernel.basis
    n = _check_size(n)
    k = _clipped_kernel(kernel, n)
    nx, nt = k.shape
    a_dom, b_dom = basis.domain
    os = integration_matrix(basis, n).entries / basis.c1
    r = (basis_row(basis, b_dom, n) - basis_row(basis, a_dom, n)) @ os
    acc = np.zeros((n, n))
    for j, pj in enumerate(_basis_member_matrices(basis, n, nt)):
        v = r @ pj
        acc[:nx] += np.outer(k[:, j], v)
    return OperatorMatrix(basis, acc, Role.FREDHOLM)


def from_power_series(basis: BasisSpec, power_coeffs) -> np.ndarray:
    """Shifted-basis coefficients of a polynomial given in powers of x."""
    c = np.atleast_1d(np.asarray(power_coeffs, dtype=float))
    if c.ndim != 1 or c.size == 0:
        raise ValueError("power coefficients must be a nonempty 1-D array")
    w = power_to_basis_matrix(basis, c.size).entries
    return w @ c


def kernel_from_power(basis: BasisSpec, power_matrix) -> KernelPoly:
    """Kernel from a power-basis coefficient matrix in (x, t).

    ``power_matrix[p, q]`` multiplies x^p t^q on the working interval.
    """
    kx = np.atleast_2d(np.asarray(power_matrix, dtype=float))
    if kx.size == 0:
        raise ValueError("kernel power matrix must be nonempty")
    wx = power_to_basis_matrix(basis, kx.shape[0]).entries
    wt = power_to_basis_matrix(basis, kx.shape[1]).entries
    return KernelPoly(basis, wx @ kx @ wt.T)


def series_derivative(series: Series) -> Series:
    """Exact derivative of a Series on its working interval."""
    n = series.coeffs.size
    dn = differentiation_matrix(series.basis, n).entries
    return Series(series.basis, series.basis.c1 * (dn @ series.coeffs))


def series_antiderivative(series: Series) -> Series:
    """Exact antiderivative, one coefficient longer than the input.

    The free constant makes the result vanish at the midpoint of the
    working interval; callers that need a definite integral subtract the
    value at their own anchor point.
    """
    n = series.coeffs.size
    om = integration_matrix(series.basis, n + 1).entries
    padded = np.zeros(n + 1)
    padded[:n] = series.coeffs
    return Series(series.basis, (om @ padded) / series.basis.c1)


def volterra_apply(kernel: KernelPoly, lower: float, series: Series) -> Series:
    """Exact image of a Series under the Volterra integral of a kernel.

    Works in expanded coefficient space (no working-size truncation), so
    it is suitable for residual checks against the assembled operator.
    """
    basis = kernel.basis
    k = kernel.coeffs
    nx = k.shape[0]
    from .basis import evaluate

    pieces = []
    for i in range(nx):
        if not k[i, :].any():
            continue
        t_poly = Series(basis, k[i, :])
        integrand = product(t_poly, series)
        g = series_antiderivative(integrand)
        anchored = np.array(g.coeffs)
        anchored[0] -= evaluate(g, lower)
        e_i = np.zeros(i + 1)
        e_i[i] = 1.0
        pieces.append(product(Series(basis, e_i), Series(basis, anchored)))
    if not pieces:
        return Series(basis, np.zeros(1))
    out = np.zeros(max(p.coeffs.size for p in pieces))
    for p in pieces:
        out[: p.coeffs.size] += p.coeffs
    return Series(basis, out)


def fredholm_apply(kernel: KernelPoly, series: Series) -> Series:
    """Exact image of a Series under the Fredholm integral of a kernel."""
    basis = kernel.basis
    k = kernel.coeffs
    nx = k.shape[0]
    a_dom, b_dom = basis.domain
    from .basis import evaluate

    out = np.zeros(nx)
    for i in range(nx):
        if not k[i, :].any():
            continue
        t_poly = Series(basis, k[i, :])
        integrand = product(t_poly, series)
        g = series_antiderivative(integrand)
        out[i] = evaluate(g, b_dom) - evaluate(g, a_dom)
    return Series(basis, out)
