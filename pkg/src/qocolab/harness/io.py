"""Transcript CSV files and run summaries."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path

import numpy as np

from ..ogd import Transcript


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def transcript_header(n: int) -> list[str]:
    return (["t"] + [f"x_{i}" for i in range(n)] + [f"z_{i}" for i in range(n)] + ["loss_value"]
            + [f"grad_{i}" for i in range(n)] + ["eta", "r", "r_prime", "queries"])


def transcript_to_csv(tr: Transcript) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(transcript_header(tr.n))
    for i in range(tr.T):
        w.writerow([str(i + 1)] + [_fmt(v) for v in tr.x[i]] + [_fmt(v) for v in tr.z[i]]
                   + [_fmt(tr.loss_value[i])] + [_fmt(v) for v in tr.grad[i]]
                   + [_fmt(tr.eta[i]), _fmt(tr.r[i]), _fmt(tr.r_prime[i]), str(int(tr.queries[i]))])
    return buf.getvalue()


def transcript_from_csv(text: str) -> Transcript:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValueError("empty transcript file")
    header = rows[0]
    n = (len(header) - 6) // 3
    if header != transcript_header(n):
        raise ValueError("unexpected transcript header")
    data = rows[1:]
    T = len(data)
    x, z, g = np.zeros((T, n)), np.zeros((T, n)), np.zeros((T, n))
    loss, eta, r, rp = np.zeros(T), np.zeros(T), np.zeros(T), np.zeros(T)
    queries = np.zeros(T, dtype=np.int64)
    for i, row in enumerate(data):
        if int(row[0]) != i + 1:
            raise ValueError(f"row {i + 1} has round index {row[0]}")
        vals = row[1:]
        x[i] = [float(v) for v in vals[0:n]]
        z[i] = [float(v) for v in vals[n:2 * n]]
        loss[i] = float(vals[2 * n])
        g[i] = [float(v) for v in vals[2 * n + 1:3 * n + 1]]
        eta[i], r[i], rp[i] = (float(v) for v in vals[3 * n + 1:3 * n + 4])
        queries[i] = int(vals[3 * n + 4])
    return Transcript(x, z, loss, g, eta, r, rp, queries)


def atomic_write(path, text: str) -> Path:
    """Write ``text`` to a temporary sibling, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_transcript(tr: Transcript, path) -> Path:
    return atomic_write(path, transcript_to_csv(tr))


def read_transcript(path) -> Transcript:
    return transcript_from_csv(Path(path).read_text())


def format_summary(title: str, lines: list[str], values: dict) -> str:
    """Plain-text report followed by a ``key=value`` block between markers."""
    out = [title, "=" * len(title), *lines, "", "[summary]"]
    out += [f"{k}={_value(v)}" for k, v in values.items()]
    out.append("[end]")
    return "\n".join(out) + "\n"


def _value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_value(u) for u in v)
    return str(v)


def parse_summary(text: str) -> dict:
    """The ``key=value`` block of a summary, values kept as strings."""
    out, inside = {}, False
    for line in text.splitlines():
        if line.strip() == "[summary]":
            inside = True
        elif line.strip() == "[end]":
            break
        elif inside and "=" in line:
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out
