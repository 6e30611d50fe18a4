"""Plain-text matrix format.

::

    # optional comment lines
    <rows> <cols>
    0 1 1 0 ...
    ...

Each data line has ``cols`` space-separated characters from ``{0, 1}``;
lines starting with ``#`` are skipped; files end with a newline.
"""

from __future__ import annotations

import os

from .bits import BitMatrix, BitVector


class MatrixFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


def format_matrix(m: BitMatrix, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend("# " + c for c in comment.splitlines())
    lines.append(f"{m.nrows} {m.ncols}")
    for v in m.row_vectors():
        lines.append(" ".join(str(b) for b in v))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> BitMatrix:
    if not text.endswith("\n"):
        raise MatrixFormatError("missing trailing newline")
    header = None
    rows: list[BitVector] = []
    for lineno, raw in enumerate(text.split("\n")[:-1], start=1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if header is None:
            parts = line.split()
            if len(parts) != 2 or not all(p.isdigit() for p in parts):
                raise MatrixFormatError("header must be '<rows> <cols>'", lineno)
            header = (int(parts[0]), int(parts[1]))
            if header[1] < 1:
                raise MatrixFormatError("cols must be positive", lineno)
            continue
        if not line:
            raise MatrixFormatError("blank line inside matrix", lineno)
        parts = line.split()
        if len(parts) != header[1]:
            raise MatrixFormatError(f"expected {header[1]} entries, got {len(parts)}", lineno)
        if any(p not in ("0", "1") for p in parts):
            raise MatrixFormatError("entries must be 0 or 1", lineno)
        rows.append(BitVector.from_bits(int(p) for p in parts))
    if header is None:
        raise MatrixFormatError("empty matrix file")
    if len(rows) != header[0]:
        raise MatrixFormatError(f"expected {header[0]} rows, got {len(rows)}")
    return BitMatrix.from_rows(rows, ncols=header[1])


def read_matrix(path: str | os.PathLike) -> BitMatrix:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_matrix(fh.read())


def write_matrix(path: str | os.PathLike, m: BitMatrix, comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_matrix(m, comment))
