"""Document parsing, validation, augmentation, and linearization."""

import numpy as np
import numpy.testing as npt
import pytest

import tauspec as ts
from tauspec.problem import Kind


def _doc(**override):
    doc = {
        "basis": {"family": "ChebyshevT", "domain": [0.0, 1.0]},
        "variables": ["y"],
        "equations": [{
            "terms": [{"var": "y", "deriv": 1}, {"var": "y", "coeff": -1.0}],
            "rhs": 0.0,
        }],
        "conditions": [{"terms": [{"var": "y", "point": 0.0}], "value": 1.0}],
        "solve": {"n": 8},
    }
    doc.update(override)
    return doc


def test_parse_happy_path():
    spec = ts.parse_problem(_doc())
    assert spec.variables == ("y",)
    assert spec.is_linear
    assert len(spec.equations) == 1
    eq = spec.equations[0]
    assert eq.linear[0].kind is Kind.DERIVATIVE and eq.linear[0].order == 1
    assert eq.linear[1].coeff == (-1.0,)
    assert spec.conditions[0].value == 1.0
    assert spec.settings.n == 8


def test_parse_overrides():
    spec = ts.parse_problem(_doc(), n=12, family="legendre",
                            newton_tol=1e-10, max_iter=3, initial="zero")
    assert spec.settings.n == 12
    assert spec.basis.family == ts.LEGENDRE
    assert spec.settings.newton_tol == 1e-10
    assert spec.settings.max_iter == 3
    assert spec.settings.initial == "zero"


def test_parse_power_rhs_conversion():
    doc = _doc()
    doc["equations"][0]["rhs"] = {"basis": "power", "coeffs": [0.0, 0.0, 1.0]}
    spec = ts.parse_problem(doc)
    npt.assert_allclose(spec.equations[0].rhs, [3 / 8, 1 / 2, 1 / 8], atol=1e-14)


@pytest.mark.parametrize("mutate, needle", [
    (lambda d: d.pop("basis"), "basis"),
    (lambda d: d.pop("variables"), "variables"),
    (lambda d: d.pop("equations"), "equations"),
    (lambda d: d["solve"].pop("n"), "n"),
    (lambda d: d["equations"][0]["terms"].append({"var": "z"}), "unknown variable"),
    (lambda d: d["equations"][0].pop("terms"), "terms"),
    (lambda d: d["conditions"][0].pop("value"), "value"),
])
def test_parse_missing_pieces(mutate, needle):
    doc = _doc()
    mutate(doc)
    with pytest.raises(ts.ValidationError, match=needle):
        ts.parse_problem(doc)


def test_parse_error_carries_location():
    doc = _doc()
    doc["equations"][0]["terms"][1] = {"var": "y", "coeff": {"basis": "power"}}
    with pytest.raises(ts.ValidationError, match=r"equations\[0\].terms\[1\]"):
        ts.parse_problem(doc)


def test_system_must_be_square():
    doc = _doc(variables=["y", "z"])
    with pytest.raises(ts.ValidationError, match="square"):
        ts.parse_problem(doc)


def test_derivatives_need_conditions():
    doc = _doc(conditions=[])
    with pytest.raises(ts.ValidationError, match="conditions"):
        ts.parse_problem(doc)


def test_second_kind_needs_no_conditions():
    doc = _doc(conditions=[])
    doc["equations"][0]["terms"] = [
        {"var": "y"},
        {"var": "y", "coeff": -1.0, "volterra": {"kernel": [[1.0]], "lower": 0.0}},
    ]
    doc["equations"][0]["rhs"] = 1.0
    spec = ts.parse_problem(doc)
    assert not spec.conditions


def test_working_size_check():
    doc = _doc()
    doc["equations"][0]["rhs"] = {"basis": "orthogonal",
                                  "coeffs": [0.0] * 9 + [1.0]}
    with pytest.raises(ts.ValidationError, match="too small"):
        ts.parse_problem(doc, n=8)
    ts.parse_problem(doc, n=11)


def test_lower_limit_must_be_inside_domain():
    doc = _doc()
    doc["equations"][0]["terms"].append(
        {"var": "y", "volterra": {"kernel": [[1.0]], "lower": 2.0}})
    with pytest.raises(ts.ValidationError, match="outside"):
        ts.parse_problem(doc)


def test_deriv_cap():
    doc = _doc()
    doc["equations"][0]["terms"][0]["deriv"] = 9
    with pytest.raises(ts.ValidationError, match="cap"):
        ts.parse_problem(doc)


def test_product_needs_two_factors():
    with pytest.raises(ts.ValidationError, match="two factors"):
        ts.ProductTermSpec(factors=(("y", 0),))


def test_augment_requires_enclosure():
    with pytest.raises(ts.ValidationError, match="integrals"):
        ts.ProductTermSpec(factors=(("y", 0), ("y", 0)), augment=True)


def _nonlinear_doc():
    return {
        "basis": {"family": "ChebyshevT", "domain": [0.0, 1.0]},
        "variables": ["y"],
        "equations": [{
            "terms": [
                {"var": "y", "deriv": 1},
                {"var": "y"},
                {"product": {"factors": [{"var": "y"}, {"var": "y"}],
                             "weight": -1.0},
                 "fredholm": {"kernel": [[1.0]]},
                 "augment": True, "augment_name": "w"},
            ],
            "rhs": -0.5,
        }],
        "conditions": [{"terms": [{"var": "y", "point": 0.0}], "value": 2.0}],
        "solve": {"n": 8},
    }


def test_augment_structure():
    spec = ts.parse_problem(_nonlinear_doc())
    aug = ts.augment_variables(spec)
    assert aug.variables == ("y", "w")
    assert len(aug.equations) == 2
    # the product is gone from the first equation, replaced by a kernel term
    eq0 = aug.equations[0]
    assert not eq0.products
    repl = eq0.linear[-1]
    assert repl.var == "w" and repl.kind is Kind.FREDHOLM
    assert repl.coeff == (-1.0,)
    # the defining equation is w' minus the chain rule products
    eq1 = aug.equations[1]
    assert eq1.linear[0].var == "w" and eq1.linear[0].order == 1
    assert len(eq1.products) == 2
    assert all(p.weight == -1.0 for p in eq1.products)
    orders = sorted(tuple(o for _, o in p.factors) for p in eq1.products)
    assert orders == [(0, 1), (1, 0)]
    # the new condition pins w(0) = y(0)^2 = 4
    cond = aug.conditions[-1]
    assert cond.terms[0].var == "w"
    assert cond.value == 4.0
    assert cond.attach_to == "w"


def test_augment_without_initial_value_fails():
    doc = _nonlinear_doc()
    doc["conditions"] = [{"terms": [{"var": "y", "point": 0.0, "deriv": 1}],
                          "value": 1.0}]
    spec = ts.parse_problem(doc)
    with pytest.raises(ts.ValidationError, match="augment_initial"):
        ts.augment_variables(spec)


def test_augment_explicit_initial_value():
    doc = _nonlinear_doc()
    doc["equations"][0]["terms"][2]["augment_initial"] = {"point": 0.0, "value": 9.0}
    aug = ts.augment_variables(ts.parse_problem(doc))
    assert aug.conditions[-1].value == 9.0


def test_augment_name_collision():
    doc = _nonlinear_doc()
    doc["equations"][0]["terms"][2]["augment_name"] = "y"
    spec = ts.parse_problem(doc)
    with pytest.raises(ts.ValidationError, match="collides"):
        ts.augment_variables(spec)


def test_augment_noop_for_plain_products():
    doc = _nonlinear_doc()
    del doc["equations"][0]["terms"][2]["augment"]
    del doc["equations"][0]["terms"][2]["augment_name"]
    spec = ts.parse_problem(doc)
    assert ts.augment_variables(spec) is spec


def _iterate(spec, arrays):
    return {v: ts.Series(spec.basis, a) for v, a in arrays.items()}


def test_linearize_is_exact_at_expansion_point():
    """The Newton model agrees with the nonlinear terms at the iterate."""
    doc = {
        "basis": {"family": "ChebyshevT", "domain": [0.0, 1.0]},
        "variables": ["u", "v"],
        "equations": [
            {"terms": [
                {"var": "u", "deriv": 1},
                {"product": {"factors": [{"var": "u"}, {"var": "v"}],
                             "weight": 2.0}},
            ], "rhs": 1.0},
            {"terms": [
                {"var": "v", "deriv": 1},
                {"product": {"factors": [{"var": "u"}, {"var": "u"}],
                             "weight": -1.0},
                 "volterra": {"kernel": [[1.0, 1.0]], "lower": 0.0}},
            ], "rhs": 0.0},
        ],
        "conditions": [
            {"terms": [{"var": "u", "point": 0.0}], "value": 1.0},
            {"terms": [{"var": "v", "point": 0.0}], "value": 0.0},
        ],
        "solve": {"n": 16},
    }
    spec = ts.parse_problem(doc)
    rng = np.random.default_rng(2)
    it = _iterate(spec, {"u": rng.standard_normal(4), "v": rng.standard_normal(4)})
    lin = ts.linearize(spec, it)
    assert lin.is_linear
    d_nl = ts.equation_defects(spec, it)
    d_ln = ts.equation_defects(lin, it)
    for a, b in zip(d_nl, d_ln):
        size = max(len(a), len(b))
        pa = np.zeros(size)
        pa[: len(a)] = a.coeffs
        pb = np.zeros(size)
        pb[: len(b)] = b.coeffs
        npt.assert_allclose(pa, pb, atol=1e-12)


def test_linearize_noop_for_linear_spec():
    spec = ts.parse_problem(_doc())
    assert ts.linearize(spec, {}) is spec


def test_linearize_frozen_coefficients():
    """For w * u^2 the model term on u carries coefficient 2 w u0."""
    doc = _doc()
    doc["equations"][0]["terms"].append(
        {"product": {"factors": [{"var": "y"}, {"var": "y"}], "weight": 3.0}})
    spec = ts.parse_problem(doc)
    y0 = ts.Series(spec.basis, np.array([0.5, 0.25]))
    lin = ts.linearize(spec, {"y": y0})
    added = lin.equations[0].linear[2:]
    assert len(added) == 2
    for term in added:
        npt.assert_allclose(term.coeff, 3.0 * y0.coeffs, atol=1e-14)
    # the frozen product moves to the right-hand side once
    corr = np.asarray(lin.equations[0].rhs)
    frozen = ts.product(y0, y0).coeffs
    npt.assert_allclose(corr[: frozen.size], 3.0 * frozen, atol=1e-14)


def test_initial_iterate_policies():
    doc = _doc()
    doc["conditions"] = [
        {"terms": [{"var": "y", "point": 0.0}], "value": 1.0},
        {"terms": [{"var": "y", "point": 0.0, "deriv": 1}], "value": 2.0},
    ]
    spec = ts.parse_problem(doc)
    it = ts.initial_iterate(spec)
    s = it["y"]
    assert abs(s(0.0) - 1.0) < 1e-12
    ds = ts.series_derivative(s)
    assert abs(ds(0.0) - 2.0) < 1e-12

    zero = ts.initial_iterate(spec, policy="zero")
    assert np.all(zero["y"].coeffs == 0.0)

    given = ts.initial_iterate(spec, policy=[[5.0, 1.0]])
    npt.assert_allclose(given["y"].coeffs, [5.0, 1.0])
    flat = ts.initial_iterate(spec, policy=[5.0, 1.0])
    npt.assert_allclose(flat["y"].coeffs, [5.0, 1.0])


def test_initial_iterate_wrong_row_count():
    spec = ts.parse_problem(_doc())
    with pytest.raises(ts.ValidationError, match="expected 1"):
        ts.initial_iterate(spec, policy=[[1.0], [2.0]])


def test_settings_validation():
    with pytest.raises(ts.ValidationError, match="positive"):
        ts.parse_problem(_doc(solve={"n": 0}))
    with pytest.raises(ts.ValidationError, match="newton_tol"):
        ts.parse_problem(_doc(solve={"n": 8, "newton_tol": 0.0}))
    with pytest.raises(ts.ValidationError, match="max_iter"):
        ts.parse_problem(_doc(solve={"n": 8, "max_iter": 0}))
    with pytest.raises(ts.ValidationError, match="initial"):
        ts.parse_problem(_doc(solve={"n": 8, "initial": "best"}))
