"""Canonical JSON formats for bigraphs, circuits, states and reports; DOT export.

All writers produce byte-stable output: object keys sorted, floats rendered
with 17 significant digits, two-space indentation.  Loaders raise
FileFormatError on malformed content so the CLI can map them to exit code 2.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

from .circuit import BeamSplitter, Circuit, DFTPort, HeraldReport, PhaseShift
from .fock import ModeLayout, SparseState
from .sculpt import ColorLabel, Dot, Edge, SculptingBigraph
from .targets import QuditState


class FileFormatError(ValueError):
    """Malformed serialized content."""


def canonical_dumps(obj) -> str:
    """Deterministic JSON: sorted keys, %.17g floats, 2-space indent."""
    pieces: list[str] = []
    _write(obj, pieces, 0)
    return "".join(pieces) + "\n"


def _write(obj, out: list[str], depth: int) -> None:
    pad = "  " * depth
    inner_pad = "  " * (depth + 1)
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if not math.isfinite(obj):
            raise FileFormatError(f"non-finite float {obj} is not serializable")
        out.append(format(obj, ".17g"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for i, item in enumerate(obj):
            out.append(inner_pad)
            _write(item, out, depth + 1)
            out.append(",\n" if i + 1 < len(obj) else "\n")
        out.append(pad + "]")
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for i, key in enumerate(keys):
            if not isinstance(key, str):
                raise FileFormatError(f"non-string key {key!r}")
            out.append(inner_pad + json.dumps(key) + ": ")
            _write(obj[key], out, depth + 1)
            out.append(",\n" if i + 1 < len(keys) else "\n")
        out.append(pad + "}")
    else:
        raise FileFormatError(f"cannot serialize {type(obj).__name__}")


def _complex_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _fraction_dict(f: Fraction) -> dict:
    return {"num": f.numerator, "den": f.denominator}


def _fraction_from(obj) -> Fraction:
    try:
        return Fraction(int(obj["num"]), int(obj["den"]))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise FileFormatError(f"bad phase fraction {obj!r}") from exc


# -- bigraphs ---------------------------------------------------------------

def bigraph_to_dict(graph: SculptingBigraph) -> dict:
    return {
        "N": graph.n,
        "d": graph.d,
        "dots": [
            {
                "edges": [
                    {
                        "mode": e.mode,
                        "phase": _fraction_dict(e.phase),
                        "color": {"basis": e.color.basis, "index": e.color.index},
                    }
                    for e in dot.edges
                ]
            }
            for dot in graph.dots
        ],
    }


def bigraph_from_dict(data) -> SculptingBigraph:
    try:
        dots = tuple(
            Dot(
                tuple(
                    Edge(
                        int(e["mode"]),
                        _fraction_from(e["phase"]),
                        ColorLabel(str(e["color"]["basis"]), int(e["color"]["index"])),
                    )
                    for e in dot["edges"]
                )
            )
            for dot in data["dots"]
        )
        return SculptingBigraph(int(data["N"]), int(data["d"]), dots)
    except FileFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"bad bigraph: {exc}") from exc


# -- circuits ---------------------------------------------------------------

def _gate_to_dict(gate) -> dict:
    if isinstance(gate, DFTPort):
        return {"kind": "dft_port", "mode": gate.mode}
    if isinstance(gate, PhaseShift):
        return {"kind": "phase", "rail": gate.rail, "angle": _fraction_dict(gate.angle)}
    if isinstance(gate, BeamSplitter):
        return {
            "kind": "beam_splitter",
            "rail_a": gate.rail_a,
            "rail_b": gate.rail_b,
            "theta": float(gate.theta),
            "phi": float(gate.phi),
        }
    raise FileFormatError(f"unknown gate {gate!r}")


def _gate_from_dict(data):
    try:
        kind = data["kind"]
        if kind == "dft_port":
            return DFTPort(int(data["mode"]))
        if kind == "phase":
            return PhaseShift(int(data["rail"]), _fraction_from(data["angle"]))
        if kind == "beam_splitter":
            return BeamSplitter(
                int(data["rail_a"]), int(data["rail_b"]),
                float(data["theta"]), float(data["phi"]),
            )
        raise FileFormatError(f"unknown gate kind {kind!r}")
    except FileFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"bad gate: {exc}") from exc


def circuit_to_dict(circuit: Circuit) -> dict:
    lay = circuit.layout
    return {
        "layout": {
            "spatial_count": lay.spatial_count,
            "internal_dim": lay.internal_dim,
            "ancilla_count": lay.ancilla_count,
        },
        "gates": [_gate_to_dict(g) for g in circuit.gates],
        "detectors": [{"rail": r, "count": c} for r, c in circuit.detectors],
        "output_groups": [list(g) for g in circuit.output_groups],
        "source": bigraph_to_dict(circuit.source) if circuit.source else None,
    }


def circuit_from_dict(data) -> Circuit:
    try:
        lay = data["layout"]
        layout = ModeLayout(
            int(lay["spatial_count"]), int(lay["internal_dim"]), int(lay["ancilla_count"])
        )
        gates = tuple(_gate_from_dict(g) for g in data["gates"])
        detectors = tuple((int(d["rail"]), int(d["count"])) for d in data["detectors"])
        groups = tuple(tuple(int(r) for r in g) for g in data["output_groups"])
        source = bigraph_from_dict(data["source"]) if data.get("source") else None
        return Circuit(layout, gates, detectors, groups, source)
    except FileFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"bad circuit: {exc}") from exc


# -- states and reports -----------------------------------------------------

def sparse_state_to_dict(state: SparseState) -> dict:
    lay = state.layout
    return {
        "layout": {
            "spatial_count": lay.spatial_count,
            "internal_dim": lay.internal_dim,
            "ancilla_count": lay.ancilla_count,
        },
        "terms": [
            {"occupation": list(occ), "amplitude": _complex_pair(amp)}
            for occ, amp in state.sorted_terms()
        ],
    }


def qudit_state_to_dict(state: QuditState) -> dict:
    return {
        "n": state.n,
        "d": state.d,
        "label_basis": state.label_basis,
        "amplitudes": [_complex_pair(z) for z in state.amplitudes],
    }


def herald_report_to_dict(report: HeraldReport) -> dict:
    return {
        "pattern": list(report.pattern),
        "probability": float(report.probability),
        "conditional": sparse_state_to_dict(report.conditional) if report.conditional else None,
        "qudit_state": qudit_state_to_dict(report.qudit_state) if report.qudit_state else None,
        "fidelity": None if report.fidelity is None else float(report.fidelity),
    }


def load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise FileFormatError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path} is not valid JSON: {exc}") from exc


def load_bigraph(path: str) -> SculptingBigraph:
    return bigraph_from_dict(load_json(path))


def load_circuit(path: str) -> Circuit:
    return circuit_from_dict(load_json(path))


def dump_to_path(obj, path: str | None) -> str:
    """Canonical-serialize obj; write to path when given.  Returns the text."""
    text = canonical_dumps(obj)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


# -- DOT export -------------------------------------------------------------

def export_dot(graph: SculptingBigraph) -> str:
    """Graphviz rendering: labelled circles, unlabelled point dots, edges
    colored red (tilde-0) / blue (tilde-(d-1)) / gray otherwise, phases
    annotated on the edge label."""
    lines = [
        "graph sculpting_bigraph {",
        f'  // N={graph.n} circles, d={graph.d}, {len(graph.dots)} dots',
        "  node [shape=circle];",
    ]
    for j in range(graph.n):
        lines.append(f'  m{j} [label="{j}"];')
    lines.append("  node [shape=point];")
    for i in range(len(graph.dots)):
        lines.append(f'  u{i} [label=""];')
    for i, dot in enumerate(graph.dots):
        for e in dot.edges:
            if e.color.is_fourier and e.color.index == 0:
                color = "red"
            elif e.color.is_fourier and e.color.index == graph.d - 1:
                color = "blue"
            else:
                color = "gray"
            attrs = [f"color={color}"]
            labels = []
            if color == "gray":
                tag = "~" if e.color.is_fourier else ""
                labels.append(f"{e.color.index}{tag}")
            if e.phase % 2 != 0:
                f = e.phase % 2
                labels.append("pi" if f == 1 else f"{f.numerator}/{f.denominator} pi")
                attrs.append("style=dashed")
            if labels:
                attrs.append(f'label="{" ".join(labels)}"')
            lines.append(f'  m{e.mode} -- u{i} [{", ".join(attrs)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
