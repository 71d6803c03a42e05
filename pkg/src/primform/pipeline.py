"""End-to-end runs: validation, exponents and the full primitive-form pipeline.

The pipeline works at an internal t-order two above the requested one,
because the primitive-form conditions differentiate twice; every reported
certificate holds modulo t^(N+1).
"""

from math import ceil

from .calculus import (contraction_iso_check, eta_pairing, hodge_data, j_pairing, jacobian_ring,
                       validate_package)
from .deformation import (bv_operator, deformed_filtered_derham, deformed_gm_connection,
                          deformed_structure, solve_maurer_cartan)
from .derham import (build_filtered_derham, check_degeneration, check_gm_identities, check_K,
                     construct_very_good_section, higher_residue_pairing, lp_fmt, opposite_module)
from .errors import CapMismatch, MissingCYData, ValidationError, WindowTooNarrow
from .primitive import build_frobenius, fundamental_solution, solve_primitive_form
from .serialize import jsonable, matrix_to_json

EXTRA_ORDER = 2


def default_u_window(N, w):
    No = N + EXTRA_ORDER
    return (-No - 1, No + 2 + max(0, ceil(w)))


def check_u_window(window, N, w):
    lo, hi = window
    if lo > -N - 1 or hi < N + w:
        raise CapMismatch("u-window must contain [-N-1, N+w]", stage="config",
                          witness={"window": [lo, hi], "required": [-N - 1, str(N + w)]})


def required_weight_cap(q_max, N):
    """Omega-weight up to which the package must be complete for t-order N."""
    return q_max + N + EXTRA_ORDER + 1


def validation_report(P):
    rep = validate_package(P)
    out = rep.to_dict()
    if not rep.passed:
        bad = rep.failed()
        first = rep.results[bad[0]]
        raise ValidationError(f"calculus identity fails: {bad[0]}", stage="validate_package",
                              anchor="prop:iL",
                              witness={"failed": bad, "first": first.failures[:1]})
    return out


def _require_cy(cy):
    if cy is None:
        raise MissingCYData("the input carries no Calabi-Yau data (w, v1, trace)",
                            stage="config", anchor="conj:isom")


def classical_data(P, cy, strict=False):
    """Degeneration, Jacobian ring, contraction, Hodge data and pairings."""
    _require_cy(cy)
    H = build_filtered_derham(P)
    jac = jacobian_ring(P)
    iso = contraction_iso_check(P, cy, jac)
    hd = hodge_data(P, cy, jac, iso, strict=strict)
    eta = eta_pairing(P, jac, cy)
    J = j_pairing(jac, eta, cy, hd)
    return H, jac, iso, hd, eta, J


def exponents_report(P, cy, strict=False, validation=True):
    report = {"package": P.name}
    if validation:
        report["validation"] = validation_report(P)
    H, jac, iso, hd, eta, J = classical_data(P, cy, strict)
    report["degeneration"] = H.report
    report.update(_hodge_json(P, cy, jac, hd))
    report["eta"] = matrix_to_json(eta)
    report["J"] = matrix_to_json(J)
    return jsonable(report)


def _hodge_json(P, cy, jac, hd):
    return {"w": str(cy.w), "l": jac.l,
            "jacobian_basis": [P.T.format(r) for r in jac.reps],
            "exponents": [str(q) for q in hd.exponents],
            "degrees": [str(d) for d in jac.degrees],
            "hodge_numbers": {f"{p},{q}": h for (p, q), h in sorted(hd.hodge_numbers.items())},
            "hodge_checks": hd.checks}


def run_pipeline(P, cy, N=4, u_window=None, strict=False, validation=True, stages=None):
    """Return (report, FrobeniusStructure).

    If ``stages`` is a dict it is filled with the intermediate objects
    (section, pairing, Maurer-Cartan solution, deformed structure and so on).
    """
    N = int(N)
    if N < 1:
        raise CapMismatch("t-order must be at least 1", stage="config", witness={"N": N})
    _require_cy(cy)
    No = N + EXTRA_ORDER
    window = tuple(u_window) if u_window is not None else default_u_window(N, cy.w)
    check_u_window(window, N, cy.w)
    report = {"package": P.name, "t_order": N, "u_window": list(window)}
    if validation:
        report["validation"] = validation_report(P)
    H, jac, iso, hd, eta, J = classical_data(P, cy, strict)
    need = required_weight_cap(max(hd.exponents), N)
    top = H.certified_up_to()
    if top is None or top + 1 < need:
        raise WindowTooNarrow("the package is not complete to the Omega-weight this t-order needs",
                              stage="pipeline",
                              witness={"complete_to": None if top is None else str(top + 1),
                                       "required": str(need)})
    report.update(_hodge_json(P, cy, jac, hd))
    report["eta"] = matrix_to_json(eta)
    report["J"] = matrix_to_json(J)
    sec = construct_very_good_section(H, hd, cy)
    report["degeneration"] = check_degeneration(H, sec)
    report["very_good_section"] = sec.to_dict(P)
    report["gauss_manin"] = check_gm_identities(H)
    K = higher_residue_pairing(sec, J)
    report["K"] = [[lp_fmt(x) for x in row] for row in K.matrix()]
    report["K_checks"] = check_K(H, sec, K)
    S = opposite_module(H, sec, K)
    report["opposite_module"] = S.checks
    delta = bv_operator(P, cy)
    report["bv_operator"] = delta.checks
    mc = solve_maurer_cartan(P, delta, jac, No)
    report["maurer_cartan"] = mc.to_dict(P)
    ds = deformed_structure(P, mc, jac)
    report["deformed_structure"] = ds.checks
    lattice = deformed_filtered_derham(ds, H, sec)
    report["deformed_lattice"] = lattice.checks
    _, gm = deformed_gm_connection(ds, order=N + 1, lattice=lattice)
    report["deformed_gauss_manin"] = gm
    tr = fundamental_solution(ds, H, sec, u_window=window)
    report["trivialization"] = tr.checks
    pf = solve_primitive_form(ds, tr, S, lattice, K, order=N)
    report["primitive_form"] = {"r": str(pf.r), "certificates": pf.certificates,
                                "uniqueness": [u for u in pf.uniqueness if u["t_order"] <= N]}
    fr = build_frobenius(pf, ds, cy, order=N)
    report["frobenius"] = fr.to_dict()
    if stages is not None:
        stages.update(P=P, cy=cy, H=H, jac=jac, iso=iso, hodge=hd, eta=eta, J=J, section=sec,
                      K=K, S=S, delta=delta, mc=mc, ds=ds, lattice=lattice, triv=tr, pf=pf,
                      frobenius=fr)
    failures = [k for sect in ("gauss_manin", "deformed_gauss_manin")
                for k, v in report[sect].items() if not v["pass"]]
    if failures:
        raise ValidationError("Gauss-Manin identity fails", stage="deformed_gm_connection",
                              anchor="Gauss-Manin connection", witness={"failed": failures})
    return jsonable(report), fr
