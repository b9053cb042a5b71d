"""Check/report containers shared by the verification modules, plus canonical JSON.

Reports are plain data: a list of named checks, each with a residual and the
tolerance it was held to, and a free-form ``data`` dict.  ``canonical_json``
renders any report byte-identically across runs: keys sorted, floats printed
with 17 significant digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Tolerances:
    """Default numerical budgets: exact-arithmetic equality, eigen-path derived
    quantities, and PSD slack."""

    eq: float = 1e-10
    derived: float = 1e-8
    psd: float = 1e-9

    def validate(self) -> "Tolerances":
        if self.eq <= 0 or self.derived <= 0 or self.psd <= 0:
            raise ValueError("tolerances must be positive")
        return self


DEFAULT_TOLERANCES = Tolerances()


@dataclass
class Check:
    name: str
    residual: float
    tolerance: float
    passed: bool
    code: str | None = None

    def to_json(self) -> dict:
        obj = {
            "name": self.name,
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "pass": bool(self.passed),
        }
        if self.code is not None:
            obj["code"] = self.code
        return obj


@dataclass
class Report:
    title: str
    checks: list[Check] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def add(
        self,
        name: str,
        residual: float,
        tolerance: float,
        code: str | None = None,
    ) -> Check:
        check = Check(
            name=name,
            residual=float(residual),
            tolerance=float(tolerance),
            passed=bool(residual <= tolerance),
            code=code,
        )
        self.checks.append(check)
        return check

    def add_bool(self, name: str, ok: bool, code: str | None = None) -> Check:
        """Structural yes/no check: residual 0.0 on pass, 1.0 on fail."""
        check = Check(
            name=name,
            residual=0.0 if ok else 1.0,
            tolerance=0.0,
            passed=bool(ok),
            code=code,
        )
        self.checks.append(check)
        return check

    def extend(self, other: "Report") -> None:
        self.checks.extend(other.checks)
        for key, value in other.data.items():
            self.data[key] = value

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {
            "command": self.title,
            "pass": self.passed,
            "checks": [c.to_json() for c in self.checks],
            "data": self.data,
        }


def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"non-finite float {x!r} cannot be serialized")
    if x == int(x) and abs(x) < 1e16:
        # Keep a .0 marker so the value reads back as a float.
        return f"{x:.1f}"
    return f"{x:.17g}"


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, 17-significant-digit floats, no whitespace
    variation.  Supports the JSON core types only."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, str):
        out = ['"']
        for ch in obj:
            if ch == '"':
                out.append('\\"')
            elif ch == "\\":
                out.append("\\\\")
            elif ch == "\n":
                out.append("\\n")
            elif ch == "\t":
                out.append("\\t")
            elif ch == "\r":
                out.append("\\r")
            elif ord(ch) < 0x20:
                out.append(f"\\u{ord(ch):04x}")
            else:
                out.append(ch)
        out.append('"')
        return "".join(out)
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = []
        for key in sorted(obj):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            items.append(canonical_json(key) + ":" + canonical_json(obj[key]))
        return "{" + ",".join(items) + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__} canonically")
