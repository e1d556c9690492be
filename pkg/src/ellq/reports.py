"""Residual reports and JSON serialization helpers.

All reports embed the truncation policy and precision context that
produced them; floats serialize as decimal with 17 significant digits so
identical runs give byte-identical JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .elliptic import DEFAULT_CTX, DEFAULT_POLICY, PrecisionContext, TruncationPolicy

SCHEMA_VERSION = 1


def jsonify(obj):
    """Recursively convert numbers/complex/arrays into JSON-stable forms."""
    if isinstance(obj, dict):
        return {str(k): jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonify(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": _fmt(obj.real), "im": _fmt(obj.imag)}
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return _fmt(obj)
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):  # numpy scalar
        return jsonify(obj.item())
    if hasattr(obj, "tolist"):
        return jsonify(obj.tolist())
    return obj


def _fmt(x: float):
    # decimal string with 17 significant digits; keeps JSON byte-stable
    return float(format(float(x), ".17g"))


def policy_dict(policy: TruncationPolicy, ctx: PrecisionContext):
    return {
        "max_terms": policy.max_terms,
        "tail_tol": _fmt(policy.tail_tol),
        "precision_bits": ctx.bits if ctx.bits is not None else "native-double",
    }


@dataclass
class ResidualReport:
    """Named functional-equation residual over an evaluation grid."""

    relation: str
    points: list = field(default_factory=list)   # [{"params": ..., "residual": float}]
    policy: TruncationPolicy = DEFAULT_POLICY
    ctx: PrecisionContext = DEFAULT_CTX
    extra: dict = field(default_factory=dict)

    def add(self, params, residual):
        self.points.append({"params": params, "residual": abs(residual)})

    @property
    def max_residual(self) -> float:
        return max((pt["residual"] for pt in self.points), default=0.0)

    @property
    def mean_residual(self) -> float:
        if not self.points:
            return 0.0
        return sum(pt["residual"] for pt in self.points) / len(self.points)

    def to_dict(self):
        d = {
            "schema": SCHEMA_VERSION,
            "relation": self.relation,
            "points": jsonify(self.points),
            "max_residual": _fmt(self.max_residual),
            "mean_residual": _fmt(self.mean_residual),
            "policy": policy_dict(self.policy, self.ctx),
        }
        if self.extra:
            d["extra"] = jsonify(self.extra)
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), sort_keys=True, **kw)
