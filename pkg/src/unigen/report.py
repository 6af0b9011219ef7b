"""Result documents and their text / JSON renderings.

The structured form is canonical: sorted keys, floats with 17 significant
digits, Invalid (NaN) as ``null`` and infinities as the strings ``"inf"`` /
``"-inf"``.  Timestamps and timings never appear in it, so two runs with the
same inputs produce the same bytes.
"""

from __future__ import annotations

import datetime as _dt
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

from . import __version__

SCHEMA_VERSION = 1
KINDS = ("axioms", "group", "chain", "identity", "search", "eval", "families")


@dataclass
class Report:
    kind: str
    family: str
    payload: dict
    seed: int
    tolerance: float
    tool_version: str = __version__
    timestamp: str = field(default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat())
    elapsed: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown report kind {self.kind!r}")

    @property
    def verdict(self) -> str:
        return self.payload.get("verdict", "pass")

    def document(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "family": self.family,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "tool_version": self.tool_version,
            "payload": self.payload,
        }


def with_mask(values) -> dict:
    """Value list plus its validity mask (Invalid entries become null)."""
    vals = [float(v) for v in values]
    return {"values": vals, "valid": [not math.isnan(v) for v in vals]}


# -- structured ------------------------------------------------------------------

def _float(x: float) -> str:
    if math.isnan(x):
        return "null"
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == int(x) and abs(x) < 1e17:
        return repr(float(x))  # keeps "1.0" distinguishable from the int 1
    return format(x, ".17g")


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _float(obj)
    if hasattr(obj, "item") and not isinstance(obj, (list, tuple, dict)):
        return _encode(obj.item(), indent, level)  # numpy scalar
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(obj[k], indent, level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def render_structured(report: Report) -> str:
    return _encode(report.document(), 2, 0) + "\n"


def load_structured(text: str) -> dict:
    return json.loads(text)


# -- text -------------------------------------------------------------------------

def _num(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        if math.isnan(x):
            return "Invalid"
        return f"{x:.3g}"
    return str(x)


def _witness(w) -> str:
    if not w:
        return ""
    return "  at (" + ", ".join(f"{v:.6g}" for v in w) + ")"


def _check_line(label: str, d: dict) -> str:
    return (f"  {label}: {d['verdict'].upper()}  "
            f"(n={d.get('samples_tested', d.get('samples', 0))}, skipped={d.get('skipped', 0)}, "
            f"max err={_num(d.get('max_abs_error'))})"
            + (_witness(d.get("worst_witness")) if d["verdict"] != "pass" else ""))


def _axioms_text(p: dict) -> list[str]:
    out = [f"domain: {p.get('domain', '-')}", "axioms:"]
    out += [_check_line(a["label"], a) for a in p["axioms"]]
    if p.get("group"):
        out.append("derived group:")
        out += [_check_line(a["label"], a) for a in p["group"]]
    if p.get("roundtrip"):
        out.append(_check_line(p["roundtrip"]["label"], p["roundtrip"]))
    return out


def _chain_text(p: dict) -> list[str]:
    out = [f"aux z = {_num(p['aux_z'])}, aux w = {_num(p['aux_w'])}", "chain:"]
    for s in p["steps"]:
        out.append(f"  step {s['step']} {s['name']}: {s['statement']}")
        out.append(f"    polish: {s['polish']}")
        out.append(f"    size: {s['size']}" + ("" if s["pure_tree"] else " (inlined)"))
        out.append(_check_line("  verdict", s))
    if p.get("z_independence"):
        out.append(_check_line("z-independence", p["z_independence"]))
    if p.get("transport"):
        t = p["transport"]
        out.append(f"transport ({t['law']}):")
        out.append(_check_line("  transport", t))
    return out


def _identity_text(p: dict) -> list[str]:
    out = ["identities:"]
    for c in p["identities"]:
        out.append(_check_line(f"{c['id']} [{c['statement']}]", c))
    return out


def _search_text(p: dict, elapsed: Optional[float]) -> list[str]:
    out = [f"target: {p['target']} (arity {p['arity']}, leaves {{{', '.join(p['leaves'])}}})",
           f"max size: {p['max_size']}, k = {p['k']}"]
    if p["found"]:
        out.append(f"found: minimal size {p['minimal_size']}, {p['witness_count']} witness(es)")
        out += [f"  {w}" for w in p["witnesses"]]
    else:
        out.append(f"not found up to size {p['max_size']}"
                   + ("" if p["complete"] else " (budget exceeded, partial)"))
    if p["rejected_witnesses"]:
        out.append(f"rejected at second seed: {len(p['rejected_witnesses'])}")
    out.append(f"trees enumerated: {p['trees_enumerated']}, "
               f"distinct fingerprints: {p['distinct_fingerprints']}")
    if elapsed is not None:
        out.append(f"elapsed: {elapsed:.2f}s")
    return out


def _eval_text(p: dict) -> list[str]:
    pt = ", ".join(f"{k}={v}" for k, v in p["point"].items())
    return [f"{p['polish']}  =  {p['infix']}", f"at {pt}: {_value_text(p['value'])}"]


def _value_text(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "Invalid"
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def _families_text(p: dict) -> list[str]:
    out = []
    for f in p["families"]:
        out.append(f"{f['name']}: f={f['f']} g={f['g']} M={f['M']} e={_value_text(f['e'])} "
                   f"c={_value_text(f['c'])} domain={f['sample_domain']}"
                   + (" extended" if f["extended"] else ""))
    return out


def render_text(report: Report) -> str:
    p = report.payload
    head = f"{report.kind} | {report.family} | seed {report.seed} | tol {report.tolerance:g}"
    if report.kind in ("axioms", "group"):
        body = _axioms_text(p)
    elif report.kind == "chain":
        body = _chain_text(p)
    elif report.kind == "identity":
        body = _identity_text(p)
    elif report.kind == "search":
        body = _search_text(p, report.elapsed)
    elif report.kind == "families":
        body = _families_text(p)
    else:
        body = _eval_text(p)
    lines = [head, *body]
    if "verdict" in p:
        lines.append(f"overall: {p['verdict'].upper()}")
    return "\n".join(lines) + "\n"
