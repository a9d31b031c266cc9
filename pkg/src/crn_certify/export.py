"""JSON and CSV renderings of analysis results.

Floats go through ``repr`` (shortest round-trip form), so re-running a
command reproduces its output byte for byte.
"""

from __future__ import annotations

import io
import json
from fractions import Fraction
from typing import Any

import numpy as np

from . import endotactic, graph
from .model import ReactionNetwork, format_reaction, is_first_order, molecularity
from .stability import DriftVerdict, NetFlow
from .statespace import ClassDecomposition, EssentialVerdict

SCHEMA = 1


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_plain(v) for v in items]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Fraction):
        return obj.numerator if obj.denominator == 1 else float(obj)
    return obj


def emit_certificate(kind: str, payload: dict[str, Any]) -> str:
    """Serialize one result document: ``{"schema": 1, "kind": kind, ...}``."""
    doc = {"schema": SCHEMA, "kind": kind}
    doc.update(payload)
    return json.dumps(_plain(doc), indent=2, allow_nan=False) + "\n"


def structure_payload(network: ReactionNetwork, box_cap: int) -> dict[str, Any]:
    s = graph.summarize(network)
    split = graph.zero_split(network)
    names = network.species
    out: dict[str, Any] = {
        "name": network.name,
        "species": list(names),
        "reactions": [format_reaction(r, names) for r in network.reactions],
        "molecularity": molecularity(network) if network.reactions else 0,
        "first_order": is_first_order(network),
        "complexes": s.complex_count,
        "linkage_classes": s.linkage_count,
        "stoichiometric_dimension": s.stoich_dim,
        "deficiency": s.deficiency,
        "weakly_reversible": s.weakly_reversible,
        "conservative": s.conservative,
        "conservation_vector": list(s.conservation_vector) if s.conservation_vector else None,
        "zero_split": {
            "zero_reactions": list(split.zero_indices),
            "rest_reactions": list(split.rest_indices),
            "zero_species": [names[i] for i in split.zero_species],
        },
        "endotactic": endotactic.endotactic_verdict(network),
    }
    if is_first_order(network) and split.zero_indices:
        jkl = endotactic.jkl_sets(network, box_cap)
        out["jkl"] = {
            "J": [names[i] for i in sorted(jkl.J)],
            "K": [names[i] for i in sorted(jkl.K)],
            "L": [names[i] for i in sorted(jkl.L)],
            "support": [names[i] for i in sorted(jkl.support)],
            "holds": jkl.holds,
            "box": jkl.box_cap,
            "l_semantics": jkl.l_semantics,
            "notes": list(jkl.notes),
        }
    if network.notes:
        out["notes"] = list(network.notes)
    return out


def drift_payload(verdict: DriftVerdict, ladder: list[dict[str, str]] | None = None) -> dict[str, Any]:
    out: dict[str, Any] = {"status": verdict.status, "method": verdict.method}
    cert = verdict.certificate
    if cert is not None:
        out.update(
            v=list(cert.v),
            margin=cert.margin,
            exceptional_radius=cert.exceptional_radius,
            exact=cert.exact,
            inert_species=list(cert.inert_species),
            inert_weight=cert.inert_weight,
        )
    if verdict.witness_state is not None:
        out["witness_state"] = list(verdict.witness_state)
        out["witness_value"] = verdict.witness_value
    if verdict.excess_polynomial is not None:
        out["excess_polynomial"] = str(verdict.excess_polynomial)
    out["diagnostics"] = verdict.diagnostics
    if ladder is not None:
        out["ladder"] = ladder
    return out


def classes_payload(dec: ClassDecomposition, verdict: EssentialVerdict, max_states: int = 50) -> dict[str, Any]:
    items = []
    for k, st in enumerate(dec.statuses):
        members = dec.members(k)
        item: dict[str, Any] = {
            "id": k,
            "status": st,
            "size": int(len(members)),
            "representative": list(dec.box.state(int(members[0]))),
        }
        if len(members) <= max_states:
            item["states"] = [list(dec.box.state(int(i))) for i in members]
        items.append(item)
    return {
        "box": dec.box.cap,
        "n_classes": dec.n_classes,
        "essential": verdict.status,
        "reason": verdict.reason,
        "witness": [list(w) for w in verdict.witness[:max_states]],
        "classes": items,
    }


def matrix_csv(flow: NetFlow, species: tuple[str, ...]) -> str:
    names = [species[i] for i in flow.species]
    buf = io.StringIO()
    buf.write("row," + ",".join(names) + ",b\n")
    for name, row, bi in zip(names, flow.A.tolist(), flow.b.tolist()):
        buf.write(name + "," + ",".join(f"{x:.17g}" for x in row) + f",{bi:.17g}\n")
    return buf.getvalue()

