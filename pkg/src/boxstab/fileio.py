"""Box and query file formats.

Box file: header ``dim=3 n=<n> weighted=<0|1>``, then one box per line,
``x1 x2 y1 y2 z1 z2 [w]`` with ``*`` for an unbounded side.
Query file: one query per line, ``x y z [k]``.
"""

from __future__ import annotations

from .geom import Box3, ValidationError


def _fmt(v: int | None) -> str:
    return "*" if v is None else str(v)


def _parse(tok: str) -> int | None:
    return None if tok == "*" else int(tok)


def write_boxes(path: str, boxes, weighted: bool = False) -> None:
    lines = [f"dim=3 n={len(boxes)} weighted={int(weighted)}"]
    for b in boxes:
        parts = [
            _fmt(b.x[0]), _fmt(b.x[1]),
            _fmt(b.y[0]), _fmt(b.y[1]),
            _fmt(b.z[0]), _fmt(b.z[1]),
        ]
        if weighted:
            parts.append(str(b.weight if b.weight is not None else 0))
        lines.append(" ".join(parts))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_boxes(path: str) -> tuple[list[Box3], bool]:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValidationError(f"{path}: empty box file")
    header = dict(kv.split("=") for kv in lines[0].split())
    n = int(header.get("n", "0"))
    weighted = header.get("weighted", "0") == "1"
    boxes = []
    for i, ln in enumerate(lines[1 : n + 1]):
        toks = ln.split()
        if len(toks) < 6:
            raise ValidationError(f"{path}:{i + 2}: expected 6 coordinates")
        vals = [_parse(t) for t in toks[:6]]
        w = int(toks[6]) if weighted and len(toks) > 6 else None
        boxes.append(Box3(i, (vals[0], vals[1]), (vals[2], vals[3]), (vals[4], vals[5]), w))
    if len(boxes) != n:
        raise ValidationError(f"{path}: header says n={n}, found {len(boxes)} boxes")
    return boxes, weighted


def write_queries(path: str, queries) -> None:
    with open(path, "w") as fh:
        for q in queries:
            fh.write(" ".join(str(v) for v in q) + "\n")


def read_queries(path: str) -> list[tuple]:
    out = []
    with open(path) as fh:
        for ln in fh:
            ln = ln.strip()
            if ln:
                out.append(tuple(int(t) for t in ln.split()))
    return out
