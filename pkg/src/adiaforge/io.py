"""Circuit and program JSON, CSV output, atomic file writes.

Complex numbers are stored as [re, im] pairs.
"""

from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile

import numpy as np

from .circuit import STANDARD_GATES, Circuit, Gate, GridLayoutCircuit, gate
from .errors import ValidationError
from .local_hamiltonian import NOMINAL_K, AdiabaticProgram, HamiltonianSum, LocalTerm

__all__ = [
    "encode_matrix",
    "decode_matrix",
    "circuit_to_json",
    "circuit_from_json",
    "program_to_json",
    "program_from_json",
    "load_json",
    "atomic_write",
    "dumps",
    "csv_text",
]


def encode_matrix(m):
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(data, what="matrix"):
    try:
        a = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{what}: expected nested [re, im] pairs") from exc
    if a.ndim != 3 or a.shape[2] != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{what}: expected a square matrix of [re, im] pairs, got shape {a.shape}")
    return a[..., 0] + 1j * a[..., 1]


def _gate_to_json(g):
    out = {"name": g.name if g.name in STANDARD_GATES else "custom", "targets": list(g.targets)}
    std = STANDARD_GATES.get(g.name)
    if g.name == "I" and g.is_identity():
        return out
    if std is None or std.shape != g.unitary.shape or not np.array_equal(std, g.unitary):
        out["name"] = "custom"
    if out["name"] == "custom":
        out["matrix"] = encode_matrix(g.unitary)
    return out


def _gate_from_json(d, i):
    if not isinstance(d, dict) or "name" not in d or "targets" not in d:
        raise ValidationError(f"gate {i}: needs 'name' and 'targets'")
    name = d["name"]
    targets = d["targets"]
    if not isinstance(targets, list) or not all(isinstance(t, int) for t in targets):
        raise ValidationError(f"gate {i}: targets must be a list of integers")
    if name == "custom":
        if "matrix" not in d:
            raise ValidationError(f"gate {i}: custom gate requires 'matrix'")
        return Gate(tuple(targets), decode_matrix(d["matrix"], f"gate {i}"), "custom")
    g = gate(name, *targets)
    if "matrix" in d and not np.allclose(decode_matrix(d["matrix"], f"gate {i}"), g.unitary, atol=1e-12):
        raise ValidationError(f"gate {i}: matrix disagrees with standard gate {name}")
    return g


def circuit_to_json(c):
    out = {"n": c.n, "gates": [_gate_to_json(g) for g in c.gates]}
    if isinstance(c, GridLayoutCircuit):
        out["R"] = c.R
    return out


def circuit_from_json(d):
    if not isinstance(d, dict) or "n" not in d or "gates" not in d:
        raise ValidationError("circuit JSON needs 'n' and 'gates'")
    if not isinstance(d["n"], int):
        raise ValidationError("circuit 'n' must be an integer")
    if not isinstance(d["gates"], list):
        raise ValidationError("circuit 'gates' must be a list")
    gates = tuple(_gate_from_json(g, i) for i, g in enumerate(d["gates"]))
    if "R" in d:
        return GridLayoutCircuit(d["n"], d["R"], gates)
    return Circuit(d["n"], gates)


def _term_to_json(t):
    return {"support": list(t.support), "coefficient": t.coefficient, "label": t.label, "matrix": encode_matrix(t.matrix)}


def _terms_from_json(items, N, d, what):
    if not isinstance(items, list):
        raise ValidationError(f"{what} must be a list of terms")
    terms = []
    for i, t in enumerate(items):
        if not isinstance(t, dict) or not {"support", "coefficient", "matrix"} <= t.keys():
            raise ValidationError(f"{what}[{i}] needs support, coefficient, matrix")
        terms.append(
            LocalTerm(tuple(t["support"]), decode_matrix(t["matrix"], f"{what}[{i}]"), float(t["coefficient"]), t.get("label", ""))
        )
    return HamiltonianSum(N, d, terms)


def program_to_json(p):
    out = {
        "flavor": p.flavor,
        "n": p.n,
        "L": p.L,
        "k": p.k,
        "particle_dim": p.d,
        "particle_count": p.N,
        "epsilon": p.epsilon,
        "J": p.J,
        "L_original": p.L_original,
    }
    if p.R is not None:
        out["R"] = p.R
    if p.circuit is not None:
        out["circuit"] = circuit_to_json(p.circuit)
    out["h_init"] = [_term_to_json(t) for t in p.h_init.terms]
    out["h_final"] = [_term_to_json(t) for t in p.h_final.terms]
    return out


def program_from_json(d):
    need = {"flavor", "n", "L", "particle_dim", "particle_count", "h_init", "h_final"}
    if not isinstance(d, dict) or not need <= d.keys():
        missing = sorted(need - set(d) if isinstance(d, dict) else need)
        raise ValidationError(f"program JSON missing keys {missing}")
    N, dim = int(d["particle_count"]), int(d["particle_dim"])
    h_init = _terms_from_json(d["h_init"], N, dim, "h_init")
    h_final = _terms_from_json(d["h_final"], N, dim, "h_final")
    circuit = circuit_from_json(d["circuit"]) if d.get("circuit") is not None else None
    k = d.get("k", NOMINAL_K.get(d["flavor"], max(h_init.locality, h_final.locality)))
    kwargs = dict(
        n=int(d["n"]), L=int(d["L"]), k=int(k), epsilon=d.get("epsilon"), J=d.get("J"),
        L_original=d.get("L_original"), circuit=circuit, R=d.get("R"),
    )
    if d["flavor"] == "grid":
        from .grid6 import GridProgram

        return GridProgram("grid", h_init, h_final, **kwargs)
    return AdiabaticProgram(d["flavor"], h_init, h_final, **kwargs)


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def dumps(obj):
    """Deterministic JSON text (fixed key order from construction, repr floats)."""
    return json.dumps(obj, indent=1, allow_nan=True) + "\n"


def csv_text(header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(x, ".17g") if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def atomic_write(path, text):
    """Write via a temp file in the target directory, then rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
