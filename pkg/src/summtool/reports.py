"""Deterministic report serialization and CSV plot-data emission."""

from __future__ import annotations

import io
import json


def normalize_floats(obj):
    """Round-trip every float through 17 significant digits.

    float64 survives a 17-digit decimal round trip exactly, so this pins the
    byte representation without changing any value.
    """
    if isinstance(obj, float):
        return float(f"{obj:.17g}")
    if isinstance(obj, dict):
        return {k: normalize_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize_floats(v) for v in obj]
    return obj


def dump_report(report: dict) -> str:
    return json.dumps(normalize_floats(report), indent=2, sort_keys=True) + "\n"


def emit_plotdata(report: dict) -> str:
    """CSV rows for plotting from a gevrey or sum report.

    Gevrey reports yield (degree, log_norm, fitted); sum reports yield
    (re_x1, im_x1, re_x2, im_x2, re_value, im_value, tail_bound).  Row order
    follows the report, which is deterministic.
    """
    out = io.StringIO()
    if "growth_rows" in report:
        out.write("degree,log_norm,fitted\n")
        for row in report["growth_rows"]:
            out.write(f"{row['degree']},{row['log_norm']!r},{row['fitted']!r}\n")
    elif "rows" in report:
        out.write("re_x1,im_x1,re_x2,im_x2,re_value,im_value,tail_bound\n")
        for row in report["rows"]:
            out.write(
                f"{row['x1']['re']!r},{row['x1']['im']!r},"
                f"{row['x2']['re']!r},{row['x2']['im']!r},"
                f"{row['value_re']!r},{row['value_im']!r},{row['tail_bound']!r}\n"
            )
    else:
        raise ValueError("report carries neither growth rows nor sampled values")
    return out.getvalue()
