"""Problem descriptions: term types, document parsing, and linearization.

A problem is a square system of integro-differential equations with
polynomial data: one equation per unknown, each equation a sum of linear
terms, products of unknowns (possibly under an integral sign), and a
polynomial right-hand side, plus point conditions.  Documents arrive as
JSON-compatible dictionaries; all polynomial data is converted to the
shifted orthogonal basis on load, and kernels are given as power-basis
coefficient matrices in (x, t).

Nonlinear products are handled in two ways that cooperate: a product
marked for augmentation is replaced by a fresh unknown together with a
differential equation for it (the derivative of the product by the chain
rule), and any remaining products are linearized around a frozen iterate
for Newton's method.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .basis import BasisSpec, Series, basis_row, product
from .errors import ValidationError
from . import operators as ops

__all__ = [
    "Kind",
    "LinearTermSpec",
    "ProductTermSpec",
    "ConditionTerm",
    "ConditionSpec",
    "EquationSpec",
    "SolveSettings",
    "ProblemSpec",
    "NewtonState",
    "parse_problem",
    "check_working_size",
    "augment_variables",
    "linearize",
    "initial_iterate",
]

log = logging.getLogger("tauspec")

DERIV_CAP = 8


class Kind(enum.Enum):
    DERIVATIVE = "derivative"
    INTEGRAL = "integral"
    VOLTERRA = "volterra"
    FREDHOLM = "fredholm"


@dataclass(frozen=True)
class LinearTermSpec:
    """One linear term acting on a single unknown.

    ``order`` is the derivative order for DERIVATIVE terms, the iterated
    antiderivative order for INTEGRAL terms, and for the two kernel
    kinds the order applied to the unknown inside the integral (negative
    for antiderivatives).  ``coeff`` multiplies the result from outside,
    as shifted-basis coefficients.
    """

    var: str
    kind: Kind
    order: int = 0
    coeff: tuple = (1.0,)
    kernel: "ops.KernelPoly | None" = None
    lower: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "coeff", tuple(float(c) for c in np.atleast_1d(self.coeff)))
        if self.kind is Kind.DERIVATIVE and self.order < 0:
            raise ValidationError("derivative order must be nonnegative")
        if self.kind is Kind.INTEGRAL and self.order < 1:
            raise ValidationError("integral order must be at least 1")
        if self.kind in (Kind.VOLTERRA, Kind.FREDHOLM) and self.kernel is None:
            raise ValidationError(f"{self.kind.value} term needs a kernel")


@dataclass(frozen=True)
class ProductTermSpec:
    """A scalar-weighted product of unknowns, optionally under an integral.

    ``factors`` is an ordered tuple of (variable, order) pairs, order as
    in LinearTermSpec.  With an enclosure the whole product sits inside
    the integral as a function of t.  ``augment`` asks for the product
    to be replaced by an auxiliary unknown before solving.
    """

    factors: tuple
    weight: float = 1.0
    enclosure: str | None = None
    kernel: "ops.KernelPoly | None" = None
    lower: float | None = None
    augment: bool = False
    augment_name: str | None = None
    augment_initial: tuple | None = None

    def __post_init__(self):
        facs = tuple((str(v), int(o)) for v, o in self.factors)
        if len(facs) < 2:
            raise ValidationError("a product term needs at least two factors")
        object.__setattr__(self, "factors", facs)
        if self.enclosure not in (None, "volterra", "fredholm"):
            raise ValidationError(f"unknown enclosure {self.enclosure!r}")
        if self.enclosure is not None and self.kernel is None:
            raise ValidationError("an enclosed product needs a kernel")
        if self.augment and self.enclosure is None:
            raise ValidationError("augmentation applies to products inside integrals")


@dataclass(frozen=True)
class ConditionTerm:
    var: str
    order: int
    point: float
    weight: float = 1.0


@dataclass(frozen=True)
class ConditionSpec:
    """A functional condition sum_terms w * y_v^(d)(x_c) = value."""

    terms: tuple
    value: float
    attach_to: str | None = None


@dataclass(frozen=True)
class EquationSpec:
    linear: tuple = ()
    products: tuple = ()
    rhs: tuple = (0.0,)

    def __post_init__(self):
        object.__setattr__(self, "rhs", tuple(float(c) for c in np.atleast_1d(self.rhs)))


@dataclass(frozen=True)
class SolveSettings:
    n: int
    newton_tol: float = 1e-14
    max_iter: int = 25
    initial: object = "conditions"
    damping: bool = False
    deriv_cap: int = DERIV_CAP


@dataclass(frozen=True)
class ProblemSpec:
    basis: BasisSpec
    variables: tuple
    equations: tuple
    conditions: tuple
    settings: SolveSettings
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(str(v) for v in self.variables))
        _validate_spec(self)

    @property
    def is_linear(self) -> bool:
        return all(not eq.products for eq in self.equations)

    def var_index(self, name: str) -> int:
        return self.variables.index(name)


@dataclass
class NewtonState:
    """Snapshot of one Newton step: the iterate and how far it moved."""

    iteration: int
    iterate: dict
    update_norm: float
    residual_norm: float


def _rhs_degree(rhs) -> int:
    arr = np.atleast_1d(np.asarray(rhs, dtype=float))
    nz = np.nonzero(arr)[0]
    return int(nz[-1]) if nz.size else 0


def check_working_size(spec: ProblemSpec) -> None:
    """Enforce n >= conditions + max rhs degree for a user-level problem.

    Applied on parse and again after augmentation, but not to the
    linearized systems Newton builds internally, whose right-hand sides
    carry corrections of degree up to n - 1 by construction.
    """
    nu = len(spec.conditions)
    lam = max((_rhs_degree(eq.rhs) for eq in spec.equations), default=0)
    n = spec.settings.n
    if n < nu + lam:
        raise ValidationError(
            f"n={n} is too small: the method needs n >= conditions + max rhs "
            f"degree = {nu} + {lam} = {nu + lam}")


def _validate_spec(spec: ProblemSpec) -> None:
    names = spec.variables
    if len(set(names)) != len(names):
        raise ValidationError("variable names must be unique")
    if len(spec.equations) != len(names):
        raise ValidationError(
            f"system must be square: {len(names)} variables, "
            f"{len(spec.equations)} equations")
    cap = spec.settings.deriv_cap
    for e, eq in enumerate(spec.equations):
        for t, term in enumerate(eq.linear):
            where = f"equations[{e}].terms[{t}]"
            if term.var not in names:
                raise ValidationError(f"unknown variable {term.var!r}", where)
            if term.kind is Kind.DERIVATIVE and term.order > cap:
                raise ValidationError(
                    f"derivative order {term.order} exceeds the cap {cap}", where)
            if abs(term.order) > cap:
                raise ValidationError(
                    f"order {term.order} exceeds the cap {cap}", where)
        for t, term in enumerate(eq.products):
            where = f"equations[{e}].products[{t}]"
            for v, o in term.factors:
                if v not in names:
                    raise ValidationError(f"unknown variable {v!r}", where)
                if abs(o) > cap:
                    raise ValidationError(f"factor order {o} exceeds the cap {cap}", where)
    for c, cond in enumerate(spec.conditions):
        where = f"conditions[{c}]"
        for term in cond.terms:
            if term.var not in names:
                raise ValidationError(f"unknown variable {term.var!r}", where)
            if term.order < 0 or term.order > cap:
                raise ValidationError(f"condition order {term.order} out of range", where)
        if cond.attach_to is not None and cond.attach_to not in names:
            raise ValidationError(f"unknown variable {cond.attach_to!r}", where)
    has_deriv = any(
        term.kind is Kind.DERIVATIVE and term.order >= 1
        for eq in spec.equations for term in eq.linear) or any(
        o >= 1 for eq in spec.equations for p in eq.products for _, o in p.factors)
    if has_deriv and not spec.conditions:
        raise ValidationError(
            "equations involve derivatives but no conditions were given")


# ---------------------------------------------------------------------------
# document parsing


def _doc_get(doc, key, where, required=True, default=None):
    if key in doc:
        return doc[key]
    if required:
        raise ValidationError(f"missing required key {key!r}", where)
    return default


def _parse_poly(node, basis: BasisSpec, where: str) -> tuple:
    """A polynomial document node to shifted-basis coefficients."""
    if isinstance(node, (int, float)):
        return (float(node),)
    if not isinstance(node, Mapping):
        raise ValidationError(
            "polynomial must be a number or {basis, coeffs}", where)
    kind = _doc_get(node, "basis", where)
    coeffs = _doc_get(node, "coeffs", where)
    try:
        arr = np.atleast_1d(np.asarray(coeffs, dtype=float))
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad coefficients: {exc}", where) from None
    if arr.ndim != 1 or arr.size == 0 or not np.all(np.isfinite(arr)):
        raise ValidationError("coefficients must be a nonempty finite list", where)
    if kind == "power":
        return tuple(ops.from_power_series(basis, arr))
    if kind == "orthogonal":
        return tuple(arr)
    raise ValidationError(f"polynomial basis must be 'power' or 'orthogonal', got {kind!r}", where)


def _parse_kernel(node, basis: BasisSpec, where: str):
    """Kernel node {kernel: [[...]], lower?: x0} to (KernelPoly, lower)."""
    if not isinstance(node, Mapping):
        raise ValidationError("kernel spec must be an object", where)
    mat = _doc_get(node, "kernel", where)
    try:
        arr = np.atleast_2d(np.asarray(mat, dtype=float))
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad kernel matrix: {exc}", where) from None
    if arr.size == 0 or not np.all(np.isfinite(arr)):
        raise ValidationError("kernel matrix must be nonempty and finite", where)
    kernel = ops.kernel_from_power(basis, arr)
    lower = node.get("lower")
    if lower is not None:
        lower = float(lower)
        a, b = basis.domain
        if not a <= lower <= b:
            raise ValidationError(
                f"lower limit {lower} outside the domain [{a}, {b}]", where)
    return kernel, lower


def _parse_factor(node, where: str) -> tuple:
    if not isinstance(node, Mapping) or "var" not in node:
        raise ValidationError("factor must be an object with a 'var' key", where)
    order = int(node.get("order", node.get("deriv", 0)))
    return (str(node["var"]), order)


def _parse_term(node, basis: BasisSpec, where: str):
    if not isinstance(node, Mapping):
        raise ValidationError("term must be an object", where)
    if "product" in node:
        pnode = node["product"]
        if not isinstance(pnode, Mapping):
            raise ValidationError("'product' must be an object", where)
        factors = tuple(
            _parse_factor(f, f"{where}.factors[{i}]")
            for i, f in enumerate(_doc_get(pnode, "factors", where)))
        weight = float(pnode.get("weight", 1.0))
        enclosure = kernel = lower = None
        if "volterra" in node:
            enclosure = "volterra"
            kernel, lower = _parse_kernel(node["volterra"], basis, f"{where}.volterra")
            if lower is None:
                lower = basis.domain[0]
        elif "fredholm" in node:
            enclosure = "fredholm"
            kernel, _ = _parse_kernel(node["fredholm"], basis, f"{where}.fredholm")
        init = node.get("augment_initial")
        if init is not None:
            if not isinstance(init, Mapping) or "point" not in init or "value" not in init:
                raise ValidationError(
                    "'augment_initial' must give {point, value}", where)
            init = (float(init["point"]), float(init["value"]))
        return ProductTermSpec(
            factors=factors, weight=weight, enclosure=enclosure,
            kernel=kernel, lower=lower,
            augment=bool(node.get("augment", False)),
            augment_name=node.get("augment_name"),
            augment_initial=init)
    if "var" not in node:
        raise ValidationError("linear term needs a 'var' key", where)
    var = str(node["var"])
    coeff = _parse_poly(node.get("coeff", 1.0), basis, f"{where}.coeff")
    if "volterra" in node:
        kernel, lower = _parse_kernel(node["volterra"], basis, f"{where}.volterra")
        if lower is None:
            lower = basis.domain[0]
        return LinearTermSpec(var, Kind.VOLTERRA, int(node.get("order", 0)),
                              coeff, kernel, lower)
    if "fredholm" in node:
        kernel, _ = _parse_kernel(node["fredholm"], basis, f"{where}.fredholm")
        return LinearTermSpec(var, Kind.FREDHOLM, int(node.get("order", 0)),
                              coeff, kernel)
    if "integral" in node:
        return LinearTermSpec(var, Kind.INTEGRAL, int(node["integral"]), coeff)
    return LinearTermSpec(var, Kind.DERIVATIVE, int(node.get("deriv", 0)), coeff)


def _parse_condition(node, where: str) -> ConditionSpec:
    if not isinstance(node, Mapping):
        raise ValidationError("condition must be an object", where)
    raw = _doc_get(node, "terms", where)
    if not isinstance(raw, Sequence) or not raw:
        raise ValidationError("condition needs a nonempty term list", where)
    terms = []
    for i, t in enumerate(raw):
        tw = f"{where}.terms[{i}]"
        if not isinstance(t, Mapping) or "var" not in t or "point" not in t:
            raise ValidationError("condition term needs 'var' and 'point'", tw)
        terms.append(ConditionTerm(
            var=str(t["var"]), order=int(t.get("deriv", 0)),
            point=float(t["point"]), weight=float(t.get("weight", 1.0))))
    value = float(_doc_get(node, "value", where))
    attach = node.get("attach_to")
    return ConditionSpec(tuple(terms), value, attach)


def _parse_settings(node, where: str, overrides: Mapping) -> SolveSettings:
    node = dict(node or {})
    node.update({k: v for k, v in overrides.items() if v is not None})
    if "n" not in node:
        raise ValidationError("missing working size 'n'", where)
    n = int(node["n"])
    if n < 1:
        raise ValidationError(f"n must be positive, got {n}", where)
    tol = float(node.get("newton_tol", 1e-14))
    if not tol > 0:
        raise ValidationError("newton_tol must be positive", where)
    max_iter = int(node.get("max_iter", 25))
    if max_iter < 1:
        raise ValidationError("max_iter must be at least 1", where)
    initial = node.get("initial", "conditions")
    if isinstance(initial, str):
        if initial not in ("conditions", "zero"):
            raise ValidationError(
                f"initial policy must be 'conditions', 'zero', or coefficients, "
                f"got {initial!r}", where)
    elif isinstance(initial, Sequence):
        initial = tuple(
            tuple(float(c) for c in np.atleast_1d(row)) if isinstance(row, Sequence)
            else float(row)
            for row in initial)
    else:
        raise ValidationError("bad 'initial' entry", where)
    return SolveSettings(
        n=n, newton_tol=tol, max_iter=max_iter, initial=initial,
        damping=bool(node.get("damping", False)),
        deriv_cap=int(node.get("deriv_cap", DERIV_CAP)))


def parse_problem(doc: Mapping, *, n: int | None = None, family: str | None = None,
                  newton_tol: float | None = None, max_iter: int | None = None,
                  initial: object = None) -> ProblemSpec:
    """Build a validated ProblemSpec from a JSON-compatible document.

    Keyword overrides replace the corresponding entries of the document's
    ``solve`` block (and ``family`` its basis family) before conversion,
    so power-basis data is always converted under the final basis.
    """
    if not isinstance(doc, Mapping):
        raise ValidationError("problem document must be an object")
    bnode = _doc_get(doc, "basis", "basis")
    if not isinstance(bnode, Mapping):
        raise ValidationError("'basis' must be an object", "basis")
    fam = family if family is not None else _doc_get(bnode, "family", "basis")
    domain = _doc_get(bnode, "domain", "basis")
    try:
        a, b = float(domain[0]), float(domain[1])
    except (TypeError, ValueError, IndexError):
        raise ValidationError("'domain' must be a pair [a, b]", "basis") from None
    basis = BasisSpec(fam, (a, b))
    variables = _doc_get(doc, "variables", "variables")
    if not isinstance(variables, Sequence) or not variables:
        raise ValidationError("'variables' must be a nonempty list", "variables")
    eq_nodes = _doc_get(doc, "equations", "equations")
    if not isinstance(eq_nodes, Sequence) or not eq_nodes:
        raise ValidationError("'equations' must be a nonempty list", "equations")
    equations = []
    for e, node in enumerate(eq_nodes):
        where = f"equations[{e}]"
        if not isinstance(node, Mapping):
            raise ValidationError("equation must be an object", where)
        terms = _doc_get(node, "terms", where)
        linear, products = [], []
        for t, tnode in enumerate(terms):
            parsed = _parse_term(tnode, basis, f"{where}.terms[{t}]")
            if isinstance(parsed, ProductTermSpec):
                products.append(parsed)
            else:
                linear.append(parsed)
        rhs = _parse_poly(node.get("rhs", 0.0), basis, f"{where}.rhs")
        equations.append(EquationSpec(tuple(linear), tuple(products), rhs))
    cond_nodes = doc.get("conditions", [])
    conditions = tuple(
        _parse_condition(nodec, f"conditions[{c}]")
        for c, nodec in enumerate(cond_nodes))
    settings = _parse_settings(
        doc.get("solve"), "solve",
        {"n": n, "newton_tol": newton_tol, "max_iter": max_iter, "initial": initial})
    spec = ProblemSpec(
        basis=basis, variables=tuple(variables), equations=tuple(equations),
        conditions=conditions, settings=settings, name=doc.get("name"))
    check_working_size(spec)
    return spec


# ---------------------------------------------------------------------------
# augmentation


def _chain_rule_products(factors: tuple) -> list[ProductTermSpec]:
    """Product terms for the derivative of a bare product of unknowns."""
    out = []
    for f in range(len(factors)):
        bumped = tuple(
            (v, o + 1) if g == f else (v, o)
            for g, (v, o) in enumerate(factors))
        out.append(ProductTermSpec(factors=bumped, weight=1.0))
    return out


def _point_values(spec: ProblemSpec) -> dict:
    """(var, order, point) -> value for simple single-term conditions."""
    known = {}
    for cond in spec.conditions:
        if len(cond.terms) != 1:
            continue
        t = cond.terms[0]
        if t.weight == 0.0:
            continue
        known[(t.var, t.order, t.point)] = cond.value / t.weight
    return known


def _aux_initial(term: ProductTermSpec, spec: ProblemSpec, aux: str):
    """Find (point, value) for the auxiliary unknown."""
    if term.augment_initial is not None:
        return term.augment_initial
    known = _point_values(spec)
    points = []
    for (v, o, x), _ in known.items():
        if x not in points:
            points.append(x)
    for x in points:
        vals = []
        for v, o in term.factors:
            val = known.get((v, o, x))
            if val is None:
                break
            vals.append(val)
        else:
            return (x, float(np.prod(vals)))
    raise ValidationError(
        f"cannot determine the initial value of auxiliary variable {aux!r} "
        f"from the given conditions; supply 'augment_initial'")


def augment_variables(spec: ProblemSpec) -> ProblemSpec:
    """Replace products marked for augmentation by auxiliary unknowns.

    Each marked product inside an integral becomes a linear kernel term
    on a new unknown w = product(factors); the system grows by the
    defining equation w' = (chain rule) and a point condition for w
    derived from the original conditions.  Without marked products the
    spec is returned unchanged.
    """
    if not any(t.augment for eq in spec.equations for t in eq.products):
        return spec
    variables = list(spec.variables)
    equations = [[list(eq.linear), list(eq.products), eq.rhs] for eq in spec.equations]
    conditions = list(spec.conditions)
    new_equations = []
    counter = 0
    for e, eq in enumerate(spec.equations):
        for term in eq.products:
            if not term.augment:
                continue
            aux = term.augment_name or f"aux{counter}"
            counter += 1
            if aux in variables:
                raise ValidationError(
                    f"auxiliary variable name {aux!r} collides with an existing one")
            point, value = _aux_initial(term, spec, aux)
            variables.append(aux)
            equations[e][1].remove(term)
            kind = Kind.VOLTERRA if term.enclosure == "volterra" else Kind.FREDHOLM
            equations[e][0].append(LinearTermSpec(
                var=aux, kind=kind, order=0, coeff=(term.weight,),
                kernel=term.kernel, lower=term.lower))
            defining = [ProductTermSpec(factors=p.factors, weight=-1.0)
                        for p in _chain_rule_products(term.factors)]
            new_equations.append(EquationSpec(
                linear=(LinearTermSpec(var=aux, kind=Kind.DERIVATIVE, order=1),),
                products=tuple(defining),
                rhs=(0.0,)))
            conditions.append(ConditionSpec(
                terms=(ConditionTerm(var=aux, order=0, point=point),),
                value=value, attach_to=aux))
    equations = [EquationSpec(tuple(lin), tuple(prod), rhs)
                 for lin, prod, rhs in equations]
    return replace(
        spec,
        variables=tuple(variables),
        equations=tuple(equations) + tuple(new_equations),
        conditions=tuple(conditions))


# ---------------------------------------------------------------------------
# linearization around a frozen iterate


def _apply_order(s: Series, order: int) -> Series:
    for _ in range(order):
        s = ops.series_derivative(s)
    for _ in range(-order):
        s = ops.series_antiderivative(s)
    return s


def _truncated(coeffs: np.ndarray, n: int, what: str) -> np.ndarray:
    if coeffs.size <= n:
        return coeffs
    dropped = float(np.max(np.abs(coeffs[n:])))
    if dropped > 0.0:
        log.debug("%s truncated to %d coefficients (dropped mass %.3e)", what, n, dropped)
    return coeffs[:n]


def _frozen_product(series_list: list[Series], n: int) -> Series:
    acc = series_list[0]
    for s in series_list[1:]:
        acc = product(acc, s)
        acc = Series(acc.basis, _truncated(acc.coeffs, n, "frozen product"))
    return acc


def _kernel_times_t_poly(kernel: "ops.KernelPoly", phi: Series, n: int) -> "ops.KernelPoly":
    """New kernel K(x, t) * phi(t), t rows multiplied in the basis."""
    k = kernel.coeffs
    nt_new = min(k.shape[1] + phi.coeffs.size - 1, n)
    out = np.zeros((k.shape[0], nt_new))
    for r in range(k.shape[0]):
        if not k[r, :].any():
            continue
        row = product(Series(kernel.basis, k[r, :]), phi).coeffs
        out[r, :] += _truncated(row, nt_new, "kernel row")
    return ops.KernelPoly(kernel.basis, out)


def linearize(spec: ProblemSpec, iterate: Mapping) -> ProblemSpec:
    """Freeze a Newton iterate: replace each product by its linear model.

    A product u_1 ... u_p becomes sum_i (prod_{j != i} u_j at the
    iterate) * u_i, and (p - 1) times the fully frozen product moves to
    the right-hand side.  Products under an integral keep their kernel,
    with the frozen factors folded into its t dependence.  A spec with
    no products is returned unchanged.
    """
    if spec.is_linear:
        return spec
    n = spec.settings.n
    equations = []
    for eq in spec.equations:
        linear = list(eq.linear)
        rhs = np.zeros(max(len(eq.rhs), n))
        rhs[: len(eq.rhs)] = eq.rhs
        for term in eq.products:
            frozen = [
                _apply_order(iterate[v], o) for v, o in term.factors]
            p = len(term.factors)
            for i, (v, o) in enumerate(term.factors):
                others = [frozen[j] for j in range(p) if j != i]
                phi = _frozen_product(others, n)
                if term.enclosure is None:
                    coeff = tuple(term.weight * phi.coeffs)
                    kind = Kind.DERIVATIVE if o >= 0 else Kind.INTEGRAL
                    linear.append(LinearTermSpec(
                        var=v, kind=kind, order=abs(o), coeff=coeff))
                else:
                    new_kernel = _kernel_times_t_poly(term.kernel, phi, n)
                    kind = Kind.VOLTERRA if term.enclosure == "volterra" else Kind.FREDHOLM
                    linear.append(LinearTermSpec(
                        var=v, kind=kind, order=o, coeff=(term.weight,),
                        kernel=new_kernel, lower=term.lower))
            whole = _frozen_product(frozen, n)
            if term.enclosure == "volterra":
                moved = ops.volterra_apply(term.kernel, term.lower, whole)
            elif term.enclosure == "fredholm":
                moved = ops.fredholm_apply(term.kernel, whole)
            else:
                moved = whole
            corr = term.weight * (p - 1) * moved.coeffs
            corr = _truncated(corr, rhs.size, "rhs correction")
            rhs[: corr.size] += corr
        equations.append(EquationSpec(tuple(linear), (), tuple(rhs)))
    return replace(spec, equations=tuple(equations))


# ---------------------------------------------------------------------------
# initial iterate


def _single_var_conditions(spec: ProblemSpec, var: str) -> list[ConditionSpec]:
    out = []
    for cond in spec.conditions:
        if cond.terms and all(t.var == var for t in cond.terms):
            out.append(cond)
    return out


def initial_iterate(spec: ProblemSpec, policy=None) -> dict:
    """Starting iterate for Newton's method.

    'conditions' (the default) gives each unknown the lowest degree
    polynomial meeting that unknown's own point conditions, falling back
    to least squares with a warning when they conflict.  'zero' gives
    zero polynomials.  Explicit coefficient rows are used as given, one
    row per unknown in order.
    """
    if policy is None:
        policy = spec.settings.initial
    basis = spec.basis
    if not isinstance(policy, str):
        rows = list(policy)
        if rows and not isinstance(rows[0], (tuple, list, np.ndarray)):
            rows = [rows]
        if len(rows) != len(spec.variables):
            raise ValidationError(
                f"initial coefficients: expected {len(spec.variables)} rows, "
                f"got {len(rows)}")
        return {v: Series(basis, np.atleast_1d(np.asarray(row, dtype=float)))
                for v, row in zip(spec.variables, rows)}
    if policy == "zero":
        return {v: Series(basis, np.zeros(1)) for v in spec.variables}
    if policy != "conditions":
        raise ValidationError(f"unknown initial policy {policy!r}")
    out = {}
    for v in spec.variables:
        conds = _single_var_conditions(spec, v)
        q = len(conds)
        if q == 0:
            out[v] = Series(basis, np.zeros(1))
            continue
        rows = np.zeros((q, q))
        vals = np.zeros(q)
        dmat = ops.differentiation_matrix(basis, q).entries * basis.c1
        for r, cond in enumerate(conds):
            for t in cond.terms:
                row = basis_row(basis, t.point, q)
                mat = np.eye(q)
                for _ in range(t.order):
                    mat = dmat @ mat
                rows[r] += t.weight * (row @ mat)
            vals[r] = cond.value
        try:
            coeffs = np.linalg.solve(rows, vals)
        except np.linalg.LinAlgError:
            warnings.warn(
                f"conditions for {v!r} conflict; least-squares initial guess",
                UserWarning, stacklevel=2)
            coeffs = np.linalg.lstsq(rows, vals, rcond=None)[0]
        out[v] = Series(basis, coeffs)
    return out
