"""Line-oriented parameter-set files (``# smallbias-set v1``)."""

from __future__ import annotations

import os
import re
from pathlib import Path

from .derandomizer import ParameterSet

HEADER = "# smallbias-set v1"
_INT = re.compile(r"[0-9]+")


class SetFileError(ValueError):
    def __init__(self, message: str, lineno: int, path: str | os.PathLike | None = None):
        where = f"{path}:" if path is not None else "line "
        super().__init__(f"{where}{lineno}: {message}")
        self.lineno = lineno
        self.path = path


def format_set(pset: ParameterSet) -> str:
    return (
        f"{HEADER}\n"
        f"n={pset.n}\n"
        f"d={pset.d}\n"
        f"gamma={pset.gamma:.17g}\n"
        f"k={' '.join(str(k) for k in pset.ks)}\n"
    )


def write_set(pset: ParameterSet, path: str | os.PathLike) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(format_set(pset))


def _field(line: str, key: str, lineno: int, path) -> str:
    prefix = key + "="
    if not line.startswith(prefix):
        raise SetFileError(f"expected '{prefix}...', got {line!r}", lineno, path)
    return line[len(prefix) :]


def _int(text: str, key: str, lineno: int, path) -> int:
    if not _INT.fullmatch(text):
        raise SetFileError(f"{key} must be a non-negative integer, got {text!r}", lineno, path)
    return int(text)


def parse_set(text: str, path: str | os.PathLike | None = None) -> ParameterSet:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) != 5:
        raise SetFileError(f"expected 5 lines, found {len(lines)}", min(len(lines) + 1, 6), path)
    if lines[0] != HEADER:
        raise SetFileError(f"bad header {lines[0]!r}", 1, path)
    n = _int(_field(lines[1], "n", 2, path), "n", 2, path)
    d = _int(_field(lines[2], "d", 3, path), "d", 3, path)
    gtext = _field(lines[3], "gamma", 4, path)
    try:
        gamma = float(gtext)
    except ValueError:
        raise SetFileError(f"gamma is not a decimal: {gtext!r}", 4, path) from None
    ktext = _field(lines[4], "k", 5, path)
    parts = ktext.split(" ") if ktext else []
    ks = [_int(part, "k", 5, path) for part in parts]
    if n < 2:
        raise SetFileError(f"n must be >= 2, got {n}", 2, path)
    if d < 1:
        raise SetFileError(f"d must be >= 1, got {d}", 3, path)
    if not 0.0 < gamma < 1.0:
        raise SetFileError(f"gamma must lie in (0, 1), got {gamma}", 4, path)
    if len(ks) != d:
        raise SetFileError(f"d={d} but {len(ks)} residues listed", 5, path)
    for k in ks:
        if not 1 <= k < n:
            raise SetFileError(f"residue {k} outside 1..{n - 1}", 5, path)
    return ParameterSet(n, d, gamma, tuple(ks))


def read_set(path: str | os.PathLike) -> ParameterSet:
    return parse_set(Path(path).read_text(), path)
