"""Assembly of the square coefficient system and the solution drivers.

The discretization solves each equation exactly on a truncated
coefficient space: the first rows of every equation's coefficient
expansion are kept, rows displaced by the point conditions are dropped,
and the conditions take their place.  With n coefficients per unknown
and one condition row per condition, the system is square by
construction; the mismatch the dropped rows would have absorbed shows up
in the residual report, never in the kept equations.

Nonlinear systems run through Newton's method: each sweep freezes the
current iterate, assembles the linearized system, and solves it with a
dense LU factorization with partial pivoting.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.linalg

from .basis import Series, basis_row, evaluate, product
from .errors import (
    ConvergenceWarning,
    SingularSystemError,
    ValidationError,
)
from . import operators as ops
from .problem import (
    Kind,
    NewtonState,
    ProblemSpec,
    augment_variables,
    check_working_size,
    initial_iterate,
    linearize,
)

__all__ = [
    "TauSystem",
    "TauSolution",
    "ResidualReport",
    "ConvergenceRow",
    "assemble",
    "solve_linear",
    "solve",
    "equation_defects",
    "condition_defects",
    "residual_report",
    "error_vs_exact",
    "convergence_study",
]

RESIDUAL_GRID = 257
PIVOT_FLOOR = 1e3


@dataclass
class TauSystem:
    """The assembled square system: matrix, right-hand side, provenance.

    ``row_map`` records where each row came from: ("condition", i) or
    ("equation", e, k) for the k-th kept coefficient row of equation e.
    ``col_of`` maps each variable to its column slice.
    """

    basis: object
    variables: tuple
    n: int
    matrix: np.ndarray
    rhs: np.ndarray
    row_map: list
    col_of: dict


@dataclass
class ResidualReport:
    """Defects of a candidate solution, measured independently.

    Equation defects are evaluated in exact polynomial arithmetic (no
    working-size truncation) and sampled on the grid; condition defects
    compare each functional against its value.
    """

    grid: np.ndarray
    equation_max: list
    condition_defect: list
    defect_series: list = field(default_factory=list, repr=False)


@dataclass
class TauSolution:
    """Solution of a problem at one working size."""

    spec: ProblemSpec
    n: int
    series: dict
    newton: list
    residual: ResidualReport
    converged: bool
    diagnostics: dict = field(default_factory=dict)

    def __getitem__(self, var: str) -> Series:
        return self.series[var]


def _attribution(spec: ProblemSpec) -> list[int]:
    """Equation index charged for each condition row."""
    out = []
    for cond in spec.conditions:
        var = cond.attach_to if cond.attach_to is not None else cond.terms[0].var
        out.append(spec.var_index(var))
    return out


class _OperatorCache:
    """Per-assembly store of calculus matrices and their powers."""

    def __init__(self, basis, n: int):
        self.basis = basis
        self.n = n
        self._store: dict = {}

    def deriv_power(self, k: int) -> np.ndarray:
        key = ("d", k)
        if key not in self._store:
            if k == 0:
                self._store[key] = np.eye(self.n)
            else:
                cn = self.basis.c1 * ops.differentiation_matrix(self.basis, self.n).entries
                self._store[key] = cn @ self.deriv_power(k - 1)
        return self._store[key]

    def integral_power(self, l: int) -> np.ndarray:
        key = ("i", l)
        if key not in self._store:
            if l == 0:
                self._store[key] = np.eye(self.n)
            else:
                osm = ops.integration_matrix(self.basis, self.n).entries / self.basis.c1
                self._store[key] = osm @ self.integral_power(l - 1)
        return self._store[key]

    def inner_power(self, order: int) -> np.ndarray:
        return self.deriv_power(order) if order >= 0 else self.integral_power(-order)


def _term_matrix(term, cache: _OperatorCache, where: str) -> np.ndarray:
    basis, n = cache.basis, cache.n
    try:
        outer = ops.polynomial_multiplication_matrix(basis, term.coeff, n).entries
    except ValueError as exc:
        raise ValidationError(
            f"{exc}; increase n to fit the coefficient polynomial", where) from None
    if term.kind is Kind.DERIVATIVE:
        core = cache.deriv_power(term.order)
    elif term.kind is Kind.INTEGRAL:
        core = cache.integral_power(term.order)
    elif term.kind is Kind.VOLTERRA:
        core = ops.volterra_operator(term.kernel, term.lower, n).entries
        if term.order:
            core = core @ cache.inner_power(term.order)
    else:
        core = ops.fredholm_operator(term.kernel, n).entries
        if term.order:
            core = core @ cache.inner_power(term.order)
    if len(term.coeff) == 1 and term.coeff[0] == 1.0:
        return core
    return outer @ core


def assemble(spec: ProblemSpec, n: int | None = None) -> TauSystem:
    """Build the square system for a linearized (or linear) spec.

    Rows are stacked as all condition rows first, in document order,
    then for each equation its first n - (conditions charged to it)
    coefficient rows.
    """
    if not spec.is_linear:
        raise ValidationError(
            "spec still contains product terms; linearize it before assembly")
    if n is None:
        n = spec.settings.n
    basis = spec.basis
    m = len(spec.variables)
    col_of = {v: slice(i * n, (i + 1) * n) for i, v in enumerate(spec.variables)}
    charged = _attribution(spec)
    nu_e = [charged.count(e) for e in range(m)]
    for e, nu in enumerate(nu_e):
        if nu > n:
            raise ValidationError(
                f"equation {e} is charged {nu} conditions but only has {n} rows")
    cache = _OperatorCache(basis, n)
    size = m * n
    a = np.zeros((size, size))
    b = np.zeros(size)
    row_map: list = []
    r = 0
    for ci, cond in enumerate(spec.conditions):
        for t in cond.terms:
            row = basis_row(basis, t.point, n) @ cache.deriv_power(t.order)
            a[r, col_of[t.var]] += t.weight * row
        b[r] = cond.value
        row_map.append(("condition", ci))
        r += 1
    for e, eq in enumerate(spec.equations):
        keep = n - nu_e[e]
        blocks: dict = {}
        for ti, term in enumerate(eq.linear):
            mat = _term_matrix(term, cache, f"equations[{e}].terms[{ti}]")
            if term.var in blocks:
                blocks[term.var] = blocks[term.var] + mat
            else:
                blocks[term.var] = mat
        for var, mat in blocks.items():
            a[r : r + keep, col_of[var]] = mat[:keep]
        rhs = np.zeros(keep)
        take = min(keep, len(eq.rhs))
        rhs[:take] = eq.rhs[:take]
        b[r : r + keep] = rhs
        row_map.extend(("equation", e, k) for k in range(keep))
        r += keep
    return TauSystem(basis, spec.variables, n, a, b, row_map, col_of)


def solve_linear(system: TauSystem) -> tuple[np.ndarray, dict]:
    """LU solve with partial pivoting and a pivot-based singularity check."""
    a, b = system.matrix, system.rhs
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    try:
        with warnings.catch_warnings():
            # the pivot check below reports exact singularity itself
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise SingularSystemError(f"factorization failed: {exc}") from None
    pivots = np.abs(np.diag(lu))
    threshold = PIVOT_FLOOR * np.finfo(float).eps * scale
    worst = int(np.argmin(pivots)) if pivots.size else 0
    if pivots.size and pivots[worst] < threshold:
        origin = system.row_map[worst] if worst < len(system.row_map) else None
        raise SingularSystemError(
            f"system numerically singular: pivot {pivots[worst]:.3e} below "
            f"{threshold:.3e} at elimination step {worst} (near row {origin})")
    x = scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
    diagnostics = {
        "pivot_min": float(pivots.min()) if pivots.size else 0.0,
        "pivot_max": float(pivots.max()) if pivots.size else 0.0,
        "matrix_scale": scale,
    }
    return x, diagnostics


def _split(system_vars, n: int, basis, vec: np.ndarray) -> dict:
    return {
        v: Series(basis, vec[i * n : (i + 1) * n])
        for i, v in enumerate(system_vars)
    }


def _apply_linear_term_exact(term, iterate: Mapping) -> Series:
    s = iterate[term.var]
    if term.kind is Kind.DERIVATIVE:
        for _ in range(term.order):
            s = ops.series_derivative(s)
    elif term.kind is Kind.INTEGRAL:
        for _ in range(term.order):
            s = ops.series_antiderivative(s)
    else:
        for _ in range(max(term.order, 0)):
            s = ops.series_derivative(s)
        for _ in range(max(-term.order, 0)):
            s = ops.series_antiderivative(s)
        if term.kind is Kind.VOLTERRA:
            s = ops.volterra_apply(term.kernel, term.lower, s)
        else:
            s = ops.fredholm_apply(term.kernel, s)
    coeff = np.asarray(term.coeff)
    if coeff.size == 1 and coeff[0] == 1.0:
        return s
    return product(Series(s.basis, coeff), s)


def _apply_product_term_exact(term, iterate: Mapping) -> Series:
    acc = None
    for v, o in term.factors:
        s = iterate[v]
        for _ in range(max(o, 0)):
            s = ops.series_derivative(s)
        for _ in range(max(-o, 0)):
            s = ops.series_antiderivative(s)
        acc = s if acc is None else product(acc, s)
    if term.enclosure == "volterra":
        acc = ops.volterra_apply(term.kernel, term.lower, acc)
    elif term.enclosure == "fredholm":
        acc = ops.fredholm_apply(term.kernel, acc)
    return Series(acc.basis, term.weight * acc.coeffs)


def _accumulate(total: np.ndarray | None, s: Series) -> np.ndarray:
    if total is None:
        return np.array(s.coeffs)
    if total.size < s.coeffs.size:
        total = np.concatenate([total, np.zeros(s.coeffs.size - total.size)])
    total[: s.coeffs.size] += s.coeffs
    return total


def equation_defects(spec: ProblemSpec, iterate: Mapping) -> list[Series]:
    """Exact defect (left side minus right side) of each equation.

    All term applications run in expanded coefficient space, so the
    result measures the true equation mismatch of the iterate, including
    everything the working-size assembly truncates.
    """
    out = []
    for eq in spec.equations:
        total = None
        for term in eq.linear:
            total = _accumulate(total, _apply_linear_term_exact(term, iterate))
        for term in eq.products:
            total = _accumulate(total, _apply_product_term_exact(term, iterate))
        rhs = np.asarray(eq.rhs, dtype=float)
        if total is None:
            total = np.zeros(max(rhs.size, 1))
        if total.size < rhs.size:
            total = np.concatenate([total, np.zeros(rhs.size - total.size)])
        total[: rhs.size] -= rhs
        out.append(Series(spec.basis, total))
    return out


def condition_defects(spec: ProblemSpec, iterate: Mapping) -> np.ndarray:
    """|c_i(candidate) - value| for every condition, evaluated directly."""
    out = np.zeros(len(spec.conditions))
    for i, cond in enumerate(spec.conditions):
        acc = 0.0
        for t in cond.terms:
            s = iterate[t.var]
            for _ in range(t.order):
                s = ops.series_derivative(s)
            acc += t.weight * evaluate(s, t.point)
        out[i] = abs(acc - cond.value)
    return out


def _residual_grid(basis, size: int) -> np.ndarray:
    a, b = basis.domain
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    j = np.arange(size)
    return mid - half * np.cos(np.pi * j / (size - 1)) if size > 1 else np.array([mid])


def residual_report(spec: ProblemSpec, iterate: Mapping,
                    grid_size: int = RESIDUAL_GRID) -> ResidualReport:
    """Measure equation and condition defects of a candidate solution."""
    grid = _residual_grid(spec.basis, grid_size)
    defects = equation_defects(spec, iterate)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        eq_max = [float(np.max(np.abs(evaluate(d, grid)))) for d in defects]
    cond = [float(x) for x in condition_defects(spec, iterate)]
    return ResidualReport(grid, eq_max, cond, defects)


def _defect_norm(spec: ProblemSpec, iterate: Mapping) -> float:
    defects = equation_defects(spec, iterate)
    return max(float(np.max(np.abs(d.coeffs))) for d in defects)


def _iterate_norm(iterate: Mapping) -> float:
    return max(float(np.max(np.abs(s.coeffs))) for s in iterate.values())


def _update_norm(new: Mapping, old: Mapping) -> float:
    worst = 0.0
    for v, s in new.items():
        a = s.coeffs
        b = old[v].coeffs if v in old else np.zeros(1)
        width = max(a.size, b.size)
        pa = np.zeros(width)
        pa[: a.size] = a
        pb = np.zeros(width)
        pb[: b.size] = b
        worst = max(worst, float(np.max(np.abs(pa - pb))))
    return worst


def solve(spec: ProblemSpec) -> TauSolution:
    """Solve a problem: augment, then either one linear solve or Newton.

    Linear problems are assembled and solved exactly once.  Nonlinear
    problems iterate from the configured starting iterate until the
    largest coefficient update falls under newton_tol relative to the
    iterate size, or max_iter is reached; running out of sweeps returns
    the best iterate with ``converged`` False rather than raising.
    """
    spec = augment_variables(spec)
    check_working_size(spec)
    n = spec.settings.n
    newton: list[NewtonState] = []
    diagnostics: dict = {}
    if spec.is_linear:
        system = assemble(spec)
        vec, diagnostics = solve_linear(system)
        iterate = _split(spec.variables, n, spec.basis, vec)
        newton.append(NewtonState(1, iterate, 0.0, _defect_norm(spec, iterate)))
        converged = True
    else:
        tol = spec.settings.newton_tol
        iterate = initial_iterate(spec)
        converged = False
        prev_res = np.inf
        for k in range(1, spec.settings.max_iter + 1):
            lin = linearize(spec, iterate)
            system = assemble(lin)
            vec, diagnostics = solve_linear(system)
            candidate = _split(spec.variables, n, spec.basis, vec)
            res = _defect_norm(spec, candidate)
            if spec.settings.damping and res > prev_res:
                for _ in range(6):
                    mixed = {
                        v: Series(spec.basis, 0.5 * (candidate[v].coeffs
                                                     + _padded(iterate[v], n)))
                        for v in spec.variables}
                    mixed_res = _defect_norm(spec, mixed)
                    if mixed_res >= res:
                        break
                    candidate, res = mixed, mixed_res
            update = _update_norm(candidate, iterate)
            newton.append(NewtonState(k, candidate, update, res))
            iterate = candidate
            prev_res = res
            if update <= tol * max(1.0, _iterate_norm(iterate)):
                converged = True
                break
        if not converged:
            warnings.warn(
                f"Newton did not meet tol={tol:g} within "
                f"{spec.settings.max_iter} sweeps (last update {update:.3e})",
                ConvergenceWarning, stacklevel=2)
    report = residual_report(spec, iterate)
    return TauSolution(
        spec=spec, n=n, series=iterate, newton=newton,
        residual=report, converged=converged, diagnostics=diagnostics)


def _padded(s: Series, n: int) -> np.ndarray:
    out = np.zeros(n)
    out[: min(n, s.coeffs.size)] = s.coeffs[:n]
    return out


def error_vs_exact(solution: TauSolution, grid, exact_values) -> dict:
    """Per-variable max absolute error on a grid of points.

    ``exact_values`` is a mapping from variable name to values on the
    grid, or a 2-D array with one row per variable in spec order.
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if isinstance(exact_values, Mapping):
        items = dict(exact_values)
    else:
        arr = np.atleast_2d(np.asarray(exact_values, dtype=float))
        if arr.shape[0] != len(solution.spec.variables):
            raise ValidationError(
                f"exact values: expected {len(solution.spec.variables)} rows, "
                f"got {arr.shape[0]}")
        items = dict(zip(solution.spec.variables, arr))
    out = {}
    for var, vals in items.items():
        if var not in solution.series:
            raise ValidationError(f"unknown variable {var!r}")
        vals = np.atleast_1d(np.asarray(vals, dtype=float))
        if vals.shape != grid.shape:
            raise ValidationError(
                f"exact values for {var!r} have shape {vals.shape}, "
                f"grid has {grid.shape}")
        out[var] = float(np.max(np.abs(evaluate(solution.series[var], grid) - vals)))
    return out


@dataclass
class ConvergenceRow:
    n: int
    error: float
    residual: float
    iterations: int
    seconds: float
    failure: str | None = None


def convergence_study(spec: ProblemSpec, ns: Sequence[int],
                      exact: Mapping | None = None,
                      grid_size: int = 1001) -> list[ConvergenceRow]:
    """Solve the same problem over a sweep of working sizes.

    ``exact`` maps variable names to callables; the error column is the
    max over those variables of the max grid error (uniform grid).  A
    failed size is recorded in its row and the sweep continues.
    """
    a, b = spec.basis.domain
    grid = np.linspace(a, b, grid_size)
    rows = []
    for n in sorted(set(int(n) for n in ns)):
        run_spec = replace(spec, settings=replace(spec.settings, n=n))
        t0 = time.perf_counter()
        try:
            sol = solve(run_spec)
            seconds = time.perf_counter() - t0
            if exact:
                vals = {v: np.asarray(f(grid), dtype=float) for v, f in exact.items()}
                err = max(error_vs_exact(sol, grid, vals).values())
            else:
                err = float("nan")
            residual = max(sol.residual.equation_max) if sol.residual.equation_max else 0.0
            rows.append(ConvergenceRow(
                n, err, residual, len(sol.newton), seconds,
                None if sol.converged else "not converged"))
        except Exception as exc:  # noqa: BLE001  (sweep must go on)
            seconds = time.perf_counter() - t0
            rows.append(ConvergenceRow(
                n, float("nan"), float("nan"), 0, seconds, str(exc)))
    floor = 1e-12
    good = [r for r in rows if r.failure is None]
    for prev, curr in zip(good, good[1:]):
        if prev.residual > floor and curr.residual > 10.0 * prev.residual:
            warnings.warn(
                f"residual grew from {prev.residual:.3e} (n={prev.n}) to "
                f"{curr.residual:.3e} (n={curr.n})",
                ConvergenceWarning, stacklevel=2)
            break
    return rows