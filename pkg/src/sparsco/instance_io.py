"""Line-oriented text format for problem instances.

::

    SCO-INSTANCE v1 <cs|qcs> <m> <n> <s>
    <m lines of n floats: A, or the rows a_i for qcs>
    <one line of m floats: b>
    XSTAR                      (optional)
    <one line of n floats>

Floats are written with ``repr`` (shortest round-tripping form), so
write-then-read is bit-exact.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .bench import Instance
from .core import ProblemKind
from .objectives import CsProblem, QcsProblem

MAGIC = "SCO-INSTANCE"
VERSION = "v1"


class InstanceFormatError(ValueError):
    pass


def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def write_instance(inst: Instance, path) -> None:
    m, n, s = inst.dims
    lines = [f"{MAGIC} {VERSION} {inst.kind.value} {m} {n} {s}"]
    lines += [_fmt(row) for row in inst.problem.A]
    lines.append(_fmt(inst.problem.b))
    if inst.x_star is not None:
        lines.append("XSTAR")
        lines.append(_fmt(inst.x_star))
    Path(path).write_text("\n".join(lines) + "\n")


def _floats(line: str, expected: int, what: str) -> np.ndarray:
    parts = line.split()
    if len(parts) != expected:
        raise InstanceFormatError(f"{what}: expected {expected} values, found {len(parts)}")
    try:
        vals = np.array([float(p) for p in parts], dtype=np.float64)
    except ValueError as exc:
        raise InstanceFormatError(f"{what}: {exc}") from None
    if not np.all(np.isfinite(vals)):
        raise InstanceFormatError(f"{what}: non-finite entry")
    return vals


def read_instance(path) -> Instance:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InstanceFormatError(f"cannot read instance file {path}: {exc.strerror}") from None
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InstanceFormatError("header: file is empty")
    head = lines[0].split()
    if len(head) != 6 or head[0] != MAGIC or head[1] != VERSION:
        raise InstanceFormatError(f"header: expected '{MAGIC} {VERSION} <kind> <m> <n> <s>'")
    try:
        kind = ProblemKind(head[2])
    except ValueError:
        raise InstanceFormatError(f"kind: unknown problem kind {head[2]!r}") from None
    try:
        m, n, s = (int(v) for v in head[3:])
    except ValueError:
        raise InstanceFormatError("header: m, n, s must be integers") from None
    if m < 1 or n < 1 or not 1 <= s <= n:
        raise InstanceFormatError(f"header: invalid dimensions m={m}, n={n}, s={s}")

    body = lines[1:]
    xstar_at = next((i for i, ln in enumerate(body) if ln.split()[0] == "XSTAR"), None)
    data = body if xstar_at is None else body[:xstar_at]
    if len(data) != m + 1:
        raise InstanceFormatError(
            f"matrix: header declares m={m} rows but the file has {len(data) - 1} matrix rows")
    A = np.vstack([_floats(data[i], n, f"matrix row {i}") for i in range(m)])
    b = _floats(data[m], m, "b")

    x_star = None
    if xstar_at is not None:
        rest = body[xstar_at].split()[1:]
        tail = body[xstar_at + 1:]
        if rest:
            if tail:
                raise InstanceFormatError("xstar: unexpected lines after XSTAR values")
            x_star = _floats(" ".join(rest), n, "xstar")
        else:
            if len(tail) != 1:
                raise InstanceFormatError("xstar: expected one line of n values after XSTAR")
            x_star = _floats(tail[0], n, "xstar")

    problem = QcsProblem(A, b) if kind is ProblemKind.QCS else CsProblem(A, b)
    return Instance(kind, problem, x_star, None, (m, n, s))
