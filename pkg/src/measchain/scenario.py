"""JSON scenario files.

A scenario is one JSON object::

    {
      "version": 1,
      "system_dim": 2,
      "initial_state": [[0.7071, 0], [0.7071, 0]],
      "first":  {"type": "non_ideal", "basis": ..., "disturbed": [...]},
      "second": {"type": "ideal", "basis": ...},
      "report": {"format": "text"}
    }

Complex numbers are ``[re, im]`` pairs (a bare real number is accepted too);
matrices are row-major nested lists. Instrument payloads by ``type``:

* ``ideal``: ``basis`` (columns are the measured eigenvectors; default
  computational)
* ``ideal_degenerate``: ``projectors`` (list of matrices)
* ``non_ideal``: ``basis`` and ``disturbed`` (list of vectors, one per outcome)
* ``generalized``: ``kraus`` (list of matrices)
* ``macroscopic``: ``u`` indexed ``[q][m][q'][m']``, ``m0``, optional ``basis``
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import instruments as inst
from .chain import ChainScenario
from .linalg import StateVector

VERSION = 1
FORMATS = ("text", "json")


class ScenarioParseError(ValueError):
    """Malformed file: bad JSON, missing fields, wrong shapes."""


class ScenarioValidationError(ValueError):
    """Well-formed file describing an unphysical scenario."""


@dataclass(frozen=True)
class ScenarioFile:
    scenario: ChainScenario
    version: int = VERSION
    report: dict = field(default_factory=dict)


def _complex(x, where: str) -> complex:
    if isinstance(x, bool):
        raise ScenarioParseError(f"{where}: expected a number or [re, im], got {x!r}")
    if isinstance(x, (int, float)):
        return complex(x)
    if (isinstance(x, list) and len(x) == 2
            and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in x)):
        return complex(x[0], x[1])
    raise ScenarioParseError(f"{where}: expected a number or [re, im], got {x!r}")


def _array(x, ndim: int, where: str) -> np.ndarray:
    if ndim == 0:
        return np.asarray(_complex(x, where))
    if not isinstance(x, list) or not x:
        raise ScenarioParseError(f"{where}: expected a non-empty list")
    parts = [_array(item, ndim - 1, f"{where}[{i}]") for i, item in enumerate(x)]
    shapes = {p.shape for p in parts}
    if len(shapes) != 1:
        raise ScenarioParseError(f"{where}: ragged array")
    return np.stack(parts)


def _get(obj: dict, key: str, where: str):
    if not isinstance(obj, dict):
        raise ScenarioParseError(f"{where}: expected an object")
    if key not in obj:
        raise ScenarioParseError(f"{where}: missing field '{key}'")
    return obj[key]


def _square(a: np.ndarray, d: int, where: str) -> np.ndarray:
    if a.shape != (d, d):
        raise ScenarioParseError(f"{where}: expected a {d}x{d} matrix, got shape {a.shape}")
    return a


def _basis(block: dict, d: int, where: str) -> np.ndarray:
    if "basis" not in block:
        return np.eye(d, dtype=complex)
    return _square(_array(block["basis"], 2, f"{where}.basis"), d, f"{where}.basis")


def parse_instrument(block: dict, d: int, where: str) -> inst.InstrumentSpec:
    kind = _get(block, "type", where)
    if kind == "ideal":
        return inst.IdealNonDegenerate(_basis(block, d, where))
    if kind == "ideal_degenerate":
        raw = _get(block, "projectors", where)
        projs = _array(raw, 3, f"{where}.projectors")
        for i, p in enumerate(projs):
            _square(p, d, f"{where}.projectors[{i}]")
        return inst.IdealDegenerate(tuple(projs))
    if kind == "non_ideal":
        basis = _basis(block, d, where)
        mus = _array(_get(block, "disturbed", where), 2, f"{where}.disturbed")
        if mus.shape != (d, d):
            raise ScenarioParseError(f"{where}.disturbed: expected {d} vectors of length {d}, "
                                     f"got shape {mus.shape}")
        return inst.NonIdeal(basis, mus.T)
    if kind == "generalized":
        ks = _array(_get(block, "kraus", where), 3, f"{where}.kraus")
        for i, k in enumerate(ks):
            _square(k, d, f"{where}.kraus[{i}]")
        return inst.Generalized(tuple(ks))
    if kind == "macroscopic":
        u = _array(_get(block, "u", where), 4, f"{where}.u")
        if u.shape[0] != d or u.shape[2] != d or u.shape[1] != u.shape[3]:
            raise ScenarioParseError(f"{where}.u: expected shape ({d}, mu, {d}, mu), got {u.shape}")
        m0 = _get(block, "m0", where)
        if not isinstance(m0, int) or isinstance(m0, bool):
            raise ScenarioParseError(f"{where}.m0: expected an integer")
        return inst.Macroscopic(u, m0=m0, basis=_basis(block, d, where))
    raise ScenarioParseError(f"{where}.type: unknown instrument type {kind!r} "
                             f"(expected one of {sorted(inst.KIND.values())})")


def parse(doc) -> ScenarioFile:
    """Build a validated scenario from a decoded JSON document."""
    version = _get(doc, "version", "$")
    if version != VERSION:
        raise ScenarioParseError(f"$.version: unsupported version {version!r}")
    d = _get(doc, "system_dim", "$")
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise ScenarioParseError("$.system_dim: expected a positive integer")
    phi = _array(_get(doc, "initial_state", "$"), 1, "$.initial_state")
    if phi.shape != (d,):
        raise ScenarioParseError(f"$.initial_state: expected {d} amplitudes, got {phi.size}")
    first = parse_instrument(_get(doc, "first", "$"), d, "$.first")
    second = parse_instrument(_get(doc, "second", "$"), d, "$.second")
    report = doc.get("report", {})
    if not isinstance(report, dict):
        raise ScenarioParseError("$.report: expected an object")
    fmt = report.get("format", "text")
    if fmt not in FORMATS:
        raise ScenarioParseError(f"$.report.format: expected one of {FORMATS}, got {fmt!r}")

    for label, spec in (("$.first", first), ("$.second", second)):
        rep = inst.validate(spec)
        if not rep.passed:
            raise ScenarioValidationError(
                f"{label}: " + "; ".join(c.describe() for c in rep.failures))
    try:
        state = StateVector((d,), phi)
    except ValueError as exc:
        raise ScenarioValidationError(f"$.initial_state: {exc}") from None
    return ScenarioFile(ChainScenario(state, first, second), version, report)


def loads(text: str) -> ScenarioFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse(doc)


def load(path) -> ScenarioFile:
    return loads(Path(path).read_text())


def _enc(a) -> list:
    a = np.asarray(a)
    if a.ndim == 0:
        c = complex(a)
        return [c.real, c.imag]
    return [_enc(x) for x in a]


def encode_instrument(spec: inst.InstrumentSpec) -> dict:
    block: dict = {"type": inst.kind(spec)}
    if isinstance(spec, (inst.IdealNonDegenerate, inst.NonIdeal)):
        block["basis"] = _enc(spec.basis)
        if isinstance(spec, inst.NonIdeal):
            block["disturbed"] = _enc(spec.disturbed.T)
    elif isinstance(spec, inst.IdealDegenerate):
        block["projectors"] = _enc(np.stack(spec.projectors))
    elif isinstance(spec, inst.Generalized):
        block["kraus"] = _enc(np.stack(spec.kraus))
    else:
        block["u"] = _enc(spec.u)
        block["m0"] = spec.m0
        block["basis"] = _enc(spec.basis)
    return block


def dumps(scenario: ChainScenario, report: dict | None = None) -> str:
    doc = {
        "version": VERSION,
        "system_dim": scenario.system_dim,
        "initial_state": _enc(scenario.initial_system.amplitudes),
        "first": encode_instrument(scenario.first),
        "second": encode_instrument(scenario.second),
        "report": report or {"format": "text"},
    }
    return json.dumps(doc, indent=1)
