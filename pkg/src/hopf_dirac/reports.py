"""Serialization of spectrum reports, zero-mode samples and check tables.

Every emitter returns text ending in exactly one newline so that files
written from identical inputs are byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .spectrum3d import SpectrumReport
from .sphere_bundle import theta_to_radius

SPECTRUM_COLUMNS = ("value", "multiplicity", "k", "lambda", "branch", "spin")
ZEROMODE_COLUMNS = ("mode", "sector", "theta", "radius", "re_upper", "im_upper", "re_lower", "im_lower")
TRANSFER_COLUMNS = ("mode", "x", "y", "z", "re_psi1", "im_psi1", "re_psi2", "im_psi2", "abs_B")


def format_fixed(x: float) -> str:
    """Twelve digits after the point, never a negative zero."""
    text = f"{x:.12f}"
    if text.startswith("-") and float(text) == 0.0:
        text = text[1:]
    return text


def format_sci(x: float) -> str:
    """Twelve significant digits in exponent form, never a negative zero."""
    if x == 0.0:
        x = 0.0
    return f"{x:.11e}"


def _sign_char(s: Optional[int]) -> str:
    if s is None:
        return ""
    return "+" if s > 0 else "-"


def _finish(rows: Iterable[str]) -> str:
    return "\n".join(rows) + "\n"


def _plain(obj):
    """Recursively convert numpy scalars and tuples to JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps_json(data) -> str:
    return json.dumps(_plain(data), sort_keys=True, indent=2, allow_nan=True) + "\n"


def spectrum_csv(report: SpectrumReport) -> str:
    rows = [",".join(SPECTRUM_COLUMNS)]
    for line in report.lines:
        if line.kind == "S":
            lam, branch, spin = "", "S", _sign_char(line.spin)
        else:
            lam, branch, spin = format_fixed(line.lam), _sign_char(line.branch), ""
        rows.append(",".join([format_fixed(line.value), str(line.multiplicity), str(line.k), lam, branch, spin]))
    return _finish(rows)


def spectrum_json(report: SpectrumReport) -> str:
    return dumps_json(report.to_dict())


def load_spectrum_json(text: str) -> SpectrumReport:
    return SpectrumReport.from_dict(json.loads(text))


def render_spectrum(report: SpectrumReport, fmt: str) -> str:
    if fmt == "csv":
        return spectrum_csv(report)
    if fmt == "json":
        return spectrum_json(report)
    raise ValueError(f"unknown format {fmt!r}")


def write_text(text: str, path: Optional[str], stream=None) -> None:
    """Write to ``path`` (exact bytes, LF newlines) or to ``stream`` when no path is set."""
    if path is None:
        if stream is not None:
            stream.write(text)
        return
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def emit_spectrum(report: SpectrumReport, cfg, stream=None) -> str:
    """Render the report in the configured format and write it out."""
    text = render_spectrum(report, cfg.output_format)
    write_text(text, cfg.output_path, stream)
    return text


# zero modes ----------------------------------------------------------------

@dataclass(frozen=True)
class ZeroModeSamples:
    chern: int
    sectors: Sequence[int]
    theta: np.ndarray
    values: np.ndarray  # (mode, theta, component), chart plus at phi = 0
    condition_number: float
    transition_residuals: Sequence[float]
    spin_purity: float

    def to_dict(self) -> dict:
        modes = []
        for index, sector in enumerate(self.sectors):
            vals = self.values[index]
            modes.append({"sector": sector,
                          "upper": [[float(v.real), float(v.imag)] for v in vals[:, 0]],
                          "lower": [[float(v.real), float(v.imag)] for v in vals[:, 1]]})
        return {"chern": self.chern, "theta": self.theta.tolist(), "condition_number": self.condition_number,
                "transition_residuals": list(self.transition_residuals), "spin_purity": self.spin_purity,
                "modes": modes}


def zeromode_csv(samples: ZeroModeSamples) -> str:
    rows = [",".join(ZEROMODE_COLUMNS)]
    radii = theta_to_radius(samples.theta)
    for index, sector in enumerate(samples.sectors):
        for t, r, v in zip(samples.theta, radii, samples.values[index]):
            fields = [str(index), str(sector), format_sci(t), format_sci(r)]
            fields += [format_sci(float(c)) for c in (v[0].real, v[0].imag, v[1].real, v[1].imag)]
            rows.append(",".join(fields))
    return _finish(rows)


def render_zeromodes(samples: ZeroModeSamples, fmt: str) -> str:
    return zeromode_csv(samples) if fmt == "csv" else dumps_json(samples.to_dict())


# R^3 transfer --------------------------------------------------------------

@dataclass(frozen=True)
class TransferSamples:
    field_strength: float
    points: np.ndarray  # (P, 3)
    values: np.ndarray  # (mode, P, 2)
    field_modulus: np.ndarray  # (P,)
    summary: dict

    def to_dict(self) -> dict:
        return {"field_strength": self.field_strength, "summary": self.summary,
                "points": self.points.tolist(), "abs_B": self.field_modulus.tolist(),
                "modes": [[[float(v[0].real), float(v[0].imag), float(v[1].real), float(v[1].imag)]
                           for v in mode] for mode in self.values]}


def transfer_csv(samples: TransferSamples) -> str:
    rows = [",".join(TRANSFER_COLUMNS)]
    for index, mode in enumerate(samples.values):
        for p, v, b in zip(samples.points, mode, samples.field_modulus):
            fields = [str(index)] + [format_sci(float(x)) for x in p]
            fields += [format_sci(float(c)) for c in (v[0].real, v[0].imag, v[1].real, v[1].imag)]
            fields.append(format_sci(float(b)))
            rows.append(",".join(fields))
    return _finish(rows)


def render_transfer(samples: TransferSamples, fmt: str) -> str:
    return transfer_csv(samples) if fmt == "csv" else dumps_json(samples.to_dict())


# verification table ---------------------------------------------------------

@dataclass(frozen=True)
class CheckOutcome:
    name: str
    residual: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and self.residual <= self.tolerance


def verification_table(outcomes: Sequence[CheckOutcome]) -> str:
    width = max([len("check")] + [len(o.name) for o in outcomes])
    rows = [f"{'check':<{width}}  {'residual':>12}  {'tolerance':>12}  status"]
    for o in outcomes:
        status = "PASS" if o.passed else "FAIL"
        detail = f"  {o.detail}" if o.detail else ""
        rows.append(f"{o.name:<{width}}  {o.residual:>12.3e}  {o.tolerance:>12.3e}  {status}{detail}")
    failed: List[str] = [o.name for o in outcomes if not o.passed]
    rows.append(f"{len(outcomes) - len(failed)}/{len(outcomes)} checks passed"
                + (f"; failed: {', '.join(failed)}" if failed else ""))
    return _finish(rows)
