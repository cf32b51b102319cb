"""Property suites: every commuting-diagram identity as check records.

Each suite returns a list of plain-dict records {check, observed,
criterion, pass}; the scenario runner serializes them and derives the
exit status.  The parameterized check functions are reused by the
lie-test and diffeo-test scenario kinds with user-supplied batteries.
"""

from __future__ import annotations

import math

import numpy as np

from .kernels import EpsilonGrid, Interval, fit_slope, integrate, ode_flow
from .basic_space import (embed_distribution, embed_smooth, pairing, regular,
                          rep_add, rep_mul, rep_scale)
from .diffeo import (act_on_representative, check_equivariance, compose,
                     identity_diffeo, pullback_smooth)
from .grading import (associate, grade_moderate, grade_negligible,
                      quotient_equal, sweep_against_witness, weak_limit)
from .lie import (lie_distribution, lie_rep_direct, lie_rep_formula,
                  lie_smooth, translation_field)
from .registry import (diffeo_battery, distribution_battery, field_battery,
                       get_smooth, named_regular, probe_pairs, product_battery,
                       sinefield, smooth_battery)
from .test_objects import (lie_derivative_form, make_bump,
                           make_moment_mollifier, pushforward, scaled_net)

IOTA_COMMUTATION_TOL = 1e-6
SIGMA_COMMUTATION_TOL = 1e-7
DUAL_ROUTE_REL_TOL = 1e-5
DUAL_ROUTE_ABS_FLOOR = 1e-10
EQUIVARIANCE_TOL = 1e-8
FLOW_DERIVATIVE_TOL = 1e-6


def check(name: str, observed, criterion: str, ok: bool) -> dict:
    return {"check": name, "observed": observed, "criterion": criterion,
            "pass": bool(ok)}


def _max_margin(value: float, tol: float) -> float:
    return value / tol


# ---------------------------------------------------------------- lie level

def commutation_checks(fields=None, distributions=None, smooths=None,
                       probes=None, tol_iota: float = IOTA_COMMUTATION_TOL,
                       tol_sigma: float = SIGMA_COMMUTATION_TOL) -> list[dict]:
    """Embedding commutation with Lie derivatives, both routes."""
    fields = fields if fields is not None else field_battery()
    distributions = distributions if distributions is not None else distribution_battery()
    smooths = smooths if smooths is not None else [get_smooth("sin"), get_smooth("x3")]
    probes = probes if probes is not None else probe_pairs(20)
    records = []
    for x_field in fields:
        for name, u in distributions:
            target = lie_distribution(x_field, u)
            rep = embed_distribution(u)
            worst_formula = 0.0
            worst_direct = 0.0
            for omega, p in probes:
                want = pairing(target, omega)
                worst_formula = max(worst_formula,
                                    abs(lie_rep_formula(x_field, rep, omega, p) - want))
                worst_direct = max(worst_direct,
                                   abs(lie_rep_direct(x_field, rep, omega, p) - want))
            records.append(check(
                f"iota-commutation[{x_field.label},{name},formula]", worst_formula,
                f"<= {tol_iota:g}", worst_formula <= tol_iota))
            records.append(check(
                f"iota-commutation[{x_field.label},{name},direct]", worst_direct,
                f"<= {tol_iota:g}", worst_direct <= tol_iota))
        for f in smooths:
            rep = embed_smooth(f)
            lf = lie_smooth(x_field, f)
            worst = 0.0
            for omega, p in probes:
                want = float(lf.value(p))
                worst = max(worst,
                            abs(lie_rep_formula(x_field, rep, omega, p) - want),
                            abs(lie_rep_direct(x_field, rep, omega, p) - want))
            records.append(check(
                f"sigma-commutation[{x_field.label},{f.label}]", worst,
                f"<= {tol_sigma:g}", worst <= tol_sigma))
    return records


def dual_route_checks(fields=None, reps=None, probes=None,
                      rel_tol: float = DUAL_ROUTE_REL_TOL,
                      abs_floor: float = DUAL_ROUTE_ABS_FLOOR) -> list[dict]:
    """Agreement of the defining flow route with the chain-rule formula."""
    from .basic_space import delta, heaviside

    fields = fields if fields is not None else field_battery()
    if reps is None:
        sin = get_smooth("sin")
        reps = [
            ("sigma(sin)", embed_smooth(sin)),
            ("iota(delta(0))", embed_distribution(delta(0.0))),
            ("iota(heaviside(-0.3))", embed_distribution(heaviside(-0.3))),
            ("iota(delta(0))*sigma(sin)",
             rep_mul(embed_distribution(delta(0.0)), embed_smooth(sin))),
            ("iota(delta(0))*iota(regular(sin))",
             rep_mul(embed_distribution(delta(0.0)),
                     embed_distribution(named_regular("sin")))),
            ("iota(delta(0))*iota(delta(0))",
             rep_mul(embed_distribution(delta(0.0)), embed_distribution(delta(0.0)))),
        ]
    probes = probes if probes is not None else probe_pairs(8)
    records = []
    for x_field in fields:
        for name, rep in reps:
            margin = 0.0
            for omega, p in probes:
                direct = lie_rep_direct(x_field, rep, omega, p)
                formula = lie_rep_formula(x_field, rep, omega, p)
                tol = max(rel_tol * max(abs(direct), abs(formula)), abs_floor)
                margin = max(margin, abs(direct - formula) / tol)
            records.append(check(
                f"dual-route[{x_field.label},{name}]", margin,
                "margin <= 1 (1e-5 relative, 1e-10 floor)", margin <= 1.0))
    return records


def flow_derivative_checks(tol: float = FLOW_DERIVATIVE_TOL) -> list[dict]:
    """Distributional derivative via the translation flow: the difference
    quotient of <u, (Fl_tau)_* omega> against -<u, omega'>."""
    from .basic_space import delta, heaviside

    ddx = translation_field()
    battery = [("delta(0)", delta(0.0)), ("heaviside(0)", heaviside(0.0)),
               ("regular(sin)", named_regular("sin"))]
    omegas = [make_bump(0.0, 1.0), make_bump(0.3, 0.8), make_bump(-0.2, 1.2)]
    tau = 1e-5
    records = []
    for name, u in battery:
        worst = 0.0
        for omega in omegas:
            plus = pairing(u, pushforward(ddx.flow_diffeo(tau), omega))
            minus = pairing(u, pushforward(ddx.flow_diffeo(-tau), omega))
            numeric = (plus - minus) / (2.0 * tau)
            want = -pairing(u, lie_derivative_form(ddx, omega))
            worst = max(worst, abs(numeric - want))
        records.append(check(f"flow-derivative[{name}]", worst,
                             f"<= {tol:g}", worst <= tol))
    return records


# ------------------------------------------------------------- diffeo level

def equivariance_checks(diffeos=None, distributions=None, probes=None,
                        tol: float = EQUIVARIANCE_TOL) -> list[dict]:
    diffeos = diffeos if diffeos is not None else diffeo_battery()
    distributions = distributions if distributions is not None else distribution_battery()
    probes = probes if probes is not None else probe_pairs(20)
    records = []
    for mu in diffeos:
        for name, u in distributions:
            worst = check_equivariance(mu, u, probes)
            records.append(check(f"iota-equivariance[{mu.label},{name}]", worst,
                                 f"<= {tol:g}", worst <= tol))
    # sigma equivariance holds as an identity of float expressions
    worst_sigma = 0.0
    for mu in diffeos:
        for fname in ("sin", "x3"):
            f = get_smooth(fname)
            left = act_on_representative(mu, embed_smooth(f))
            right = embed_smooth(pullback_smooth(mu, f))
            for omega, p in probes[:6]:
                worst_sigma = max(worst_sigma, abs(left.eval(omega, p) - right.eval(omega, p)))
    records.append(check("sigma-equivariance[battery]", worst_sigma,
                         "== 0 exactly", worst_sigma == 0.0))
    # group action: contravariance order frozen from the direct computation
    mu, nu = diffeos[0], diffeos[-1]
    rep = embed_distribution(distributions[0][1])
    worst_comp = 0.0
    for omega, p in probes[:6]:
        direct = act_on_representative(compose(mu, nu), rep).eval(omega, p)
        nested = act_on_representative(nu, act_on_representative(mu, rep)).eval(omega, p)
        worst_comp = max(worst_comp, abs(direct - nested))
    records.append(check("composition-order[mu.nu == nu-after-mu]", worst_comp,
                         "<= 1e-8", worst_comp <= 1e-8))
    ident = identity_diffeo()
    worst_id = 0.0
    for omega, p in probes[:6]:
        worst_id = max(worst_id,
                       abs(act_on_representative(ident, rep).eval(omega, p)
                           - rep.eval(omega, p)))
    records.append(check("identity-action", worst_id, "== 0 exactly", worst_id == 0.0))
    return records


# ------------------------------------------------------------ basic space

def linearity_unit_checks() -> list[dict]:
    from .basic_space import delta, heaviside

    u = delta(0.4)
    v = heaviside(-0.3)
    a, b = 2.5, -1.25
    probes = probe_pairs(12)
    combo = embed_distribution(a * u + b * v)
    manual = rep_add(rep_scale(a, embed_distribution(u)),
                     rep_scale(b, embed_distribution(v)))
    worst_lin = max(abs(combo.eval(omega, p) - manual.eval(omega, p))
                    for omega, p in probes)
    records = [check("iota-linearity", worst_lin, "== 0 exactly", worst_lin == 0.0)]

    rep = embed_distribution(u)
    worst_p = max(abs(rep.eval(omega, 0.1) - rep.eval(omega, -1.7))
                  for omega, _ in probes)
    records.append(check("iota-p-independence", worst_p, "== 0 exactly", worst_p == 0.0))

    one = embed_smooth(get_smooth("one"))
    battery = [embed_distribution(u), rep_mul(embed_distribution(v), embed_smooth(get_smooth("sin")))]
    worst_unit = 0.0
    for r in battery:
        for omega, p in probes[:8]:
            worst_unit = max(worst_unit, abs(rep_mul(one, r).eval(omega, p) - r.eval(omega, p)))
    records.append(check("sigma(one)-is-unit", worst_unit, "== 0 exactly", worst_unit == 0.0))

    r = battery[1]
    worst_inv = max(abs(rep_add(r, rep_scale(-1.0, r)).eval(omega, p))
                    for omega, p in probes[:8])
    records.append(check("additive-inverse", worst_inv, "== 0 exactly", worst_inv == 0.0))
    return records


def product_compatibility_checks(q_list=(2, 4)) -> list[dict]:
    """sigma is a homomorphism exactly; iota products agree in the quotient."""
    battery = product_battery()
    probes = probe_pairs(10)
    records = []
    worst_sigma = 0.0
    for f in battery:
        for g in battery:
            fg = f * g
            left = rep_mul(embed_smooth(f), embed_smooth(g))
            right = embed_smooth(fg)
            for omega, p in probes[:6]:
                worst_sigma = max(worst_sigma, abs(left.eval(omega, p) - right.eval(omega, p)))
    records.append(check("sigma-homomorphism", worst_sigma, "== 0 exactly",
                         worst_sigma == 0.0))

    pairs = [(battery[0], battery[1]), (battery[0], battery[2]), (battery[1], battery[2])]
    for f, g in pairs:
        fg = f * g
        a = rep_mul(embed_distribution(regular(f.value, f.support, f.label)),
                    embed_distribution(regular(g.value, g.support, g.label)))
        b = embed_distribution(regular(fg.value, fg.support, fg.label))
        equal, report = quotient_equal(a, b, q_list=q_list)
        min_slope = min((s.slope for s in report.series if not s.machine_zero),
                        default=math.inf)
        slope_ok = all(s.machine_zero or s.slope >= q + 0.8
                       for q in q_list for s in report.series
                       if s.label.startswith(f"q={q},"))
        records.append(check(
            f"quotient-product[{f.label},{g.label}]",
            None if math.isinf(min_slope) else min_slope,
            f"negligible with slope >= q+0.8 for q in {tuple(q_list)}",
            equal and slope_ok))
    return records


def negligibility_checks(q_list=(2, 4)) -> list[dict]:
    """(iota - sigma)(smooth battery) lands in the negligible ideal."""
    records = []
    for f in smooth_battery():
        diff = rep_add(embed_distribution(regular(f.value, f.support, f.label)),
                       rep_scale(-1.0, embed_smooth(f)))
        for q in q_list:
            report = grade_negligible(diff, q_list=(q,))
            ok = report.classification.kind in ("negligible", "machine-zero")
            slope_ok = all(s.machine_zero or s.slope >= q + 0.8 for s in report.series)
            observed = None if report.classification.kind == "machine-zero" \
                else report.fitted_slope
            records.append(check(
                f"iota-sigma-negligible[{f.label},q={q}]", observed,
                f"slope >= {q + 0.8:g} (or machine-zero)", ok and slope_ok))
    return records


# ----------------------------------------------------------------- grading

def signature_checks() -> list[dict]:
    from .basic_space import delta, heaviside

    phi0 = make_moment_mollifier(0)
    records = []
    d = embed_distribution(delta(0.0))
    rep = grade_moderate(d, phi=phi0, depth=0)
    ok = abs(rep.fitted_slope + 1.0) <= 0.1
    records.append(check("grade[iota(delta)]", rep.fitted_slope,
                         "slope -1 +/- 0.1", ok))

    d2 = rep_mul(d, d)
    rep2 = grade_moderate(d2, phi=phi0, depth=0)
    ok2 = abs(rep2.fitted_slope + 2.0) <= 0.1
    records.append(check("grade[iota(delta)^2]", rep2.fitted_slope,
                         "slope -2 +/- 0.1", ok2))

    h = embed_distribution(heaviside(0.0))
    hdiff = rep_add(rep_mul(h, h), rep_scale(-1.0, h))
    rep3 = grade_moderate(hdiff, phi=phi0, depth=0)
    ok3 = abs(rep3.fitted_slope) <= 0.1
    records.append(check("grade[iota(H)^2 - iota(H)]", rep3.fitted_slope,
                         "slope 0 +/- 0.1", ok3))
    neg = grade_negligible(hdiff, depth=0, q_list=(2,))
    records.append(check("not-negligible[iota(H)^2 - iota(H)]",
                         str(neg.classification),
                         "classification is neither",
                         neg.classification.kind == "neither"))
    return records


def association_checks() -> list[dict]:
    from .basic_space import delta, heaviside

    psi = get_smooth("witness_bump")
    phi = make_moment_mollifier(2)  # even by construction
    records = []
    h = embed_distribution(heaviside(0.0))
    for n in (2, 3):
        power = h
        for _ in range(n - 1):
            power = rep_mul(power, h)
        report = associate(power, h, psi, phi)
        decay = fit_slope(list(zip(report.epsilon_grid.values,
                                   [abs(v) for v in report.integral_values])))
        ok = (report.associated and not decay.machine_zero
              and decay.slope >= 0.8)
        records.append(check(
            f"associate[iota(H)^{n} ~ iota(H)]", report.extrapolated_limit,
            "associated, |I| decay slope >= 0.8", ok))

    d = embed_distribution(delta(0.0))
    hd = rep_mul(h, d)
    value, converged = weak_limit(hd, psi, phi)
    want = 0.5 * float(psi.value(0.0))
    ok = converged and abs(value - want) <= 1e-3
    records.append(check("weak-limit[iota(H)iota(delta)]", value,
                         f"= psi(0)/2 = {want:.6f} +/- 1e-3", ok))
    half_delta = rep_scale(0.5, d)
    rep_hd = associate(hd, half_delta, psi, phi)
    records.append(check("associate[iota(H)iota(delta) ~ iota(delta)/2]",
                         rep_hd.extrapolated_limit,
                         "associated (even mollifier)", rep_hd.associated))

    dd = rep_mul(d, d)
    div = sweep_against_witness(dd, psi, phi)
    decay = fit_slope(list(zip(div.epsilon_grid.values,
                               [abs(v) for v in div.integral_values])))
    ok = (not div.converged) and abs(decay.slope + 1.0) <= 0.2
    records.append(check("diverges[iota(delta)^2]", decay.slope,
                         "not converged, |I| slope -1 +/- 0.2", ok))
    return records


# ----------------------------------------------------------------- kernels

def kernel_checks() -> list[dict]:
    records = []
    exact = integrate(lambda x: x ** 8, Interval(0.0, 1.0), 1e-13)
    err = abs(exact - 1.0 / 9.0)
    records.append(check("quadrature-polynomial", err, "<= 1e-14", err <= 1e-14))
    err = abs(integrate(np.sin, Interval(0.0, math.pi), 1e-12) - 2.0)
    records.append(check("quadrature-sin", err, "<= 1e-12", err <= 1e-12))
    bump = make_bump(0.7, 1.3)
    err = abs(integrate(bump.density, bump.support, 1e-12) - 1.0)
    records.append(check("bump-normalization", err, "<= 1e-11", err <= 1e-11))

    field = sinefield(0.3)
    tol = 1e-12
    worst_comp = 0.0
    worst_inv = 0.0
    for x0 in (-1.0, 0.2, 1.5):
        s, t = 0.4, 0.7
        two = ode_flow(ode_flow(x0, field.coefficient, s, tol), field.coefficient, t, tol)
        one = ode_flow(x0, field.coefficient, s + t, tol)
        worst_comp = max(worst_comp, abs(two - one))
        back = ode_flow(ode_flow(x0, field.coefficient, 0.6, tol), field.coefficient, -0.6, tol)
        worst_inv = max(worst_inv, abs(back - x0))
    records.append(check("flow-composition", worst_comp, "<= 10*tol", worst_comp <= 10 * tol))
    records.append(check("flow-inversion", worst_inv, "<= 10*tol", worst_inv <= 10 * tol))

    err = abs(ode_flow(0.3, lambda x: np.ones_like(x), 0.5, tol) - 0.8)
    records.append(check("flow-translation", err, "<= 10*tol", err <= 10 * tol))
    err = abs(ode_flow(1.0, lambda x: x, math.log(2.0), tol) - 2.0)
    records.append(check("flow-linear", err, "<= 10*tol", err <= 10 * tol))

    grid = EpsilonGrid.default()
    f1 = fit_slope([(e, e) for e in grid])
    f2 = fit_slope([(e, 7.0 * e ** -2.0) for e in grid])
    err = max(abs(f1.slope - 1.0), abs(f1.r2 - 1.0),
              abs(f2.slope + 2.0), abs(f2.r2 - 1.0))
    records.append(check("fit-slope-power-laws", err, "<= 1e-10", err <= 1e-10))

    phi4 = make_moment_mollifier(4)
    worst_m = 0.0
    for k in range(1, 5):
        worst_m = max(worst_m, abs(integrate(
            lambda y, k=k: y ** k * phi4.profile.density(y),
            phi4.profile.support, 1e-12)))
    records.append(check("mollifier-moments[q=4]", worst_m, "<= 1e-10", worst_m <= 1e-10))

    worst_u = 0.0
    for eps in (1.0, 0.25, 2.0 ** -6, 2.0 ** -10):
        net = scaled_net(phi4, 0.3, eps)
        worst_u = max(worst_u, abs(integrate(net.density, net.support, 1e-12) - 1.0))
    records.append(check("scaled-net-unit-integral", worst_u, "<= 1e-10", worst_u <= 1e-10))
    return records


SUITES = {
    "kernels": kernel_checks,
    "linearity-unit": linearity_unit_checks,
    "smooth-product": product_compatibility_checks,
    "smooth-negligibility": negligibility_checks,
    "lie-commutation": commutation_checks,
    "lie-dual-route": dual_route_checks,
    "diffeo-equivariance": equivariance_checks,
    "flow-derivative": flow_derivative_checks,
    "grading-signatures": signature_checks,
    "association": association_checks,
}
