"""Deterministic serialisation of results with an embedded run manifest."""

from __future__ import annotations

import io
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import GravProbeError

FORMAT_VERSION = 1


class OutputError(GravProbeError):
    exit_code = 5


@dataclass(frozen=True)
class RunManifest:
    """Provenance for one output file.

    Wall-clock duration is measured but deliberately kept out of the file
    body so that identical configurations give byte-identical files; it is
    reported on the log stream instead.
    """

    fingerprint: str
    tool_version: str
    subcommand: str
    source: str
    defaults_used: dict
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "tool": "gravprobe",
            "tool_version": self.tool_version,
            "format_version": FORMAT_VERSION,
            "subcommand": self.subcommand,
            "fingerprint": self.fingerprint,
            "source": self.source,
            "defaults_used": dict(self.defaults_used),
        }
        out.update(self.extra)
        return out


def fmt_number(x) -> str:
    """Shortest-stable text for a float: 17 significant digits, ``nan``/``inf`` spelled out."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _json_scalar(x) -> str:
    if isinstance(x, bool) or isinstance(x, np.bool_):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "null" if not math.isfinite(x) else format(x, ".17g")
    if isinstance(x, str):
        import json

        return json.dumps(x, ensure_ascii=False)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def dumps_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with sorted keys and 17-significant-digit floats; non-finite floats become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{pad}{_json_scalar(str(k))}: {dumps_json(obj[k], indent, _level + 1)}" for k in sorted(obj, key=str)
        ]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_json_scalar(v) for v in obj) + "]"
        items = [pad + dumps_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return _json_scalar(obj)


def render_json(payload: dict, manifest: RunManifest) -> str:
    body = dict(payload)
    body["meta"] = manifest.as_dict()
    return dumps_json(body) + "\n"


def _manifest_lines(manifest: RunManifest):
    meta = manifest.as_dict()
    for key in sorted(meta):
        value = meta[key]
        if isinstance(value, dict):
            for sub in sorted(value):
                v = value[sub]
                text = fmt_number(v) if isinstance(v, float) else str(v)
                yield f"# {key}.{sub} = {text}"
        else:
            text = fmt_number(value) if isinstance(value, float) else str(value)
            yield f"# {key} = {text}"


def render_csv(header: Sequence[str], columns: Sequence, manifest: RunManifest, notes: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in _manifest_lines(manifest):
        buf.write(line + "\n")
    for note in notes:
        buf.write(f"# {note}\n")
    buf.write(",".join(header) + "\n")
    cols = [np.asarray(c) for c in columns]
    n = len(cols[0])
    if any(len(c) != n for c in cols):
        raise ValueError("CSV columns differ in length")
    for i in range(n):
        cells = []
        for c in cols:
            v = c[i]
            if isinstance(v, (bool, np.bool_)):
                cells.append("1" if v else "0")
            else:
                cells.append(fmt_number(v))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def write_text(text: str, out: Optional[str]) -> None:
    """Write to ``out`` or, if it is None or ``-``, to standard output."""
    if out is None or out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(out)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None


def gnuplot_script(csv_path: str, series: Sequence[str], title: str = "") -> str:
    """Self-contained gnuplot script overlaying the spectrum columns of ``csv_path``.

    Classical curves are drawn in green and quantum curves in red.
    """
    colors = {"classical": "#1a9850", "quantum_alpha": "#d73027", "quantum_beta": "#fc8d59"}
    name = Path(csv_path).name
    lines = [
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        "set logscale y",
        "set xlabel 'frequency (Hz)'",
        "set ylabel 'S_xx (m^2/Hz, single-sided)'",
        f"set title {title!r}" if title else "unset title",
        "set terminal pngcairo size 900,600",
        f"set output '{Path(name).stem}.png'",
    ]
    plots = []
    for i, s in enumerate(series, start=2):
        plots.append(f"'{name}' using 1:{i} with lines lw 2 lc rgb '{colors.get(s, '#333333')}' title '{s}'")
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"
