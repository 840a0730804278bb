"""Scenario reports: both routes to Pr(b_r | a_q), prepared states, deviations."""

from __future__ import annotations

import json

import numpy as np

from . import chain
from . import instruments as inst
from .chain import ChainScenario
from .linalg import PROB_TOL, trace_distance

NOTES = {
    "ideal_degenerate": "collapse reference for a degenerate ideal instrument is the "
                        "Lueders state itself, so its deviation is 0 by construction",
    "generalized": "a bare Kraus set has no eigenbasis: no canonical collapse reference",
}


def build(scenario: ChainScenario) -> dict:
    """Everything ``run`` prints, as plain Python data."""
    result = chain.run_chain(scenario)
    first_kind = inst.kind(scenario.first)
    outcomes = []
    max_diff = 0.0
    for q in range(scenario.first.n_outcomes):
        entry: dict = {"q": q, "pr_first": float(result.first_probabilities[q])}
        if q not in result.prepared_states:
            entry["undefined"] = f"Pr(a_{q}) < {chain.EPS:g}: conditioning undefined"
            outcomes.append(entry)
            continue
        rho = result.prepared_states[q]
        rows = []
        for r in range(scenario.second.n_outcomes):
            via_joint = float(result.conditionals[q, r])
            via_trace = chain.predict_conditional(rho, scenario.second, r)
            diff = abs(via_joint - via_trace)
            max_diff = max(max_diff, diff)
            rows.append({"r": r, "pr_joint": float(result.joint_probabilities[q, r]),
                         "conditional_joint": via_joint, "conditional_trace": via_trace,
                         "abs_diff": diff})
        oracle = chain.prepared_state_oracle(result, q)
        entry.update({
            "conditionals": rows,
            "prepared_state": rho.matrix,
            "purity": rho.purity,
            "oracle_distance": trace_distance(rho, oracle),
            "collapse_deviation": result.collapse_deviations[q],
        })
        outcomes.append(entry)
    return {
        "system_dim": scenario.system_dim,
        "first": first_kind,
        "second": inst.kind(scenario.second),
        "note": NOTES.get(first_kind),
        "outcomes": outcomes,
        "max_abs_diff": max_diff,
        "passed": max_diff <= PROB_TOL,
    }


def _num(x: float) -> str:
    s = f"{x:.12g}"
    return "0" if s == "-0" else s


def _cnum(z: complex) -> str:
    re, im = _num(z.real), _num(z.imag)
    if im == "0":
        return re
    return f"{re}{'' if im.startswith('-') else '+'}{im}j"


def format_text(rep: dict) -> str:
    lines = [f"first instrument: {rep['first']}    second instrument: {rep['second']}    "
             f"system dim: {rep['system_dim']}"]
    if rep["note"]:
        lines.append(f"note: {rep['note']}")
    for entry in rep["outcomes"]:
        q = entry["q"]
        lines.append("")
        lines.append(f"outcome a_{q}: Pr = {_num(entry['pr_first'])}")
        if "undefined" in entry:
            lines.append(f"  {entry['undefined']}")
            continue
        lines.append("  r  Pr(b_r|a_q) joint   Pr(b_r|a_q) trace   |diff|")
        for row in entry["conditionals"]:
            lines.append(f"  {row['r']:<2} {_num(row['conditional_joint']):<19} "
                         f"{_num(row['conditional_trace']):<19} {_num(row['abs_diff'])}")
        lines.append("  prepared state:")
        for row in entry["prepared_state"]:
            lines.append("    [" + ", ".join(_cnum(z) for z in row) + "]")
        lines.append(f"  purity: {_num(entry['purity'])}")
        lines.append(f"  oracle trace distance: {_num(entry['oracle_distance'])}")
        dev = entry["collapse_deviation"]
        lines.append("  collapse deviation: "
                     + ("no canonical collapse reference" if dev is None else _num(dev)))
    lines.append("")
    lines.append(f"max |joint - trace| = {_num(rep['max_abs_diff'])}  "
                 f"({'PASS' if rep['passed'] else 'FAIL'} at {PROB_TOL:g})")
    return "\n".join(lines) + "\n"


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return [[_jsonable(v) for v in row] for row in x] if x.ndim == 2 else [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_jsonable(v) for v in x]
    return x


def format_json(rep: dict) -> str:
    return json.dumps(_jsonable(rep), indent=1) + "\n"
