"""The full inequality suite as one report.

Collects the chart-level estimates, the norm-scale sandwich, the
relocation bound, the elliptic, commutator and tame estimates of the
linearized operator and the two integration-by-parts formulas.  Every
entry carries `passed`; the suite passes when every entry does.
"""

from . import inequalities as ineq
from .linearized_evolution import tame_sweep, verify_commutator, verify_elliptic, verify_formulas
from .models import builtin_model
from .weighted_calculus import s_N

__all__ = ["PRODUCT_INDICES", "run_suite", "envelope_entries"]

PRODUCT_INDICES = ((4, 2, 2), (3, 3, 2), (4, 4, 4))


def _entry(name, payload, passed):
    return {"name": name, "passed": bool(passed), "report": payload}


def run_suite(model_kind="trivial", N=7.0, seed=0, trials=30, sandwich_trials=50, include_tame=True):
    """Run every verifier; returns {"passed", "entries"} with JSON-ready payloads."""
    model = builtin_model(model_kind, N=N)
    entries = []

    for s in range(1, s_N(N) + 1):
        rep = ineq.sobolev_report(s, N, trials, seed=seed)
        entries.append(_entry(f"sobolev_s{s}", rep.as_json(), rep.passed))

    for rep in ineq.verify_derivative_estimates(trials=trials, N=N, seed=seed):
        p = rep.parameters
        tag = "_".join(f"{k}{v}" for k, v in sorted(p.items()) if k != "N")
        entries.append(_entry(f"{rep.inequality_id}_{tag}", rep.as_json(), rep.passed))

    for rep in ineq.verify_product_terms(trials=trials, N=N, seed=seed):
        term = "_".join(f"{a}{b}" for a, b in rep.parameters["term"])
        entries.append(_entry(f"product_terms_{term}", rep.as_json(), rep.passed))

    rep = ineq.verify_composition(trials=trials, N=N, seed=seed)
    entries.append(_entry("composition_exp", rep.as_json(), rep.passed))

    for s1, s2, k in PRODUCT_INDICES:
        rep = ineq.verify_product_estimate(s1, s2, k, trials=trials, N=N, seed=seed)
        entries.append(_entry(f"product_{s1}_{s2}_{k}", rep.as_json(), rep.passed))

    rep = ineq.verify_relocation(trials=trials, N=N, seed=seed)
    entries.append(_entry("relocation", rep.as_json(), rep.passed))

    for rep in ineq.verify_sandwich(trials=sandwich_trials, N=N, seed=seed):
        entries.append(_entry(rep.inequality_id, rep.as_json(), rep.passed))

    for n in (1, 2):
        rep = verify_elliptic(model, n=n, trials=trials, seed=seed)
        entries.append(_entry(f"elliptic_n{n}", rep, rep["stable"]))

    rep = verify_commutator(model, n=2, trials=trials, seed=seed)
    entries.append(_entry("commutator_n2", rep, rep["stable"]))

    if include_tame:
        rep = tame_sweep(model)
        entries.append(_entry("tame", rep, rep["stable"]))

    rep = verify_formulas(N=N, trials=max(10, trials // 3), seed=seed)
    entries.append(_entry("formulas", rep, rep["passed"]))

    return {
        "model": model_kind,
        "N": N,
        "seed": seed,
        "trials": trials,
        "passed": bool(all(e["passed"] for e in entries)),
        "failed": [e["name"] for e in entries if not e["passed"]],
        "entries": entries,
    }


def envelope_entries(report):
    """The explicit-constant comparisons recorded by the derivative verifier."""
    out = []
    for e in report["entries"]:
        if e["name"].startswith("derivative_envelope"):
            notes = e["report"]["notes"]
            out.append({"name": e["name"], "worst_ratio": e["report"]["worst_ratio"],
                        "proof_constant": notes["proof_constant"], "envelope_ok": notes["envelope_ok"],
                        "hardy_constant": notes.get("hardy_constant")})
    return out
