"""Implementation overlap between products, by shared install file names."""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import IoError

BINARY_EXTENSIONS = (".exe", ".dll")


@dataclass(frozen=True)
class FileNameSet:
    system: str
    names: frozenset[str]

    def __post_init__(self):
        bad = [n for n in self.names if not n or n != n.lower()]
        if bad:
            raise ValueError(f"file names must be nonempty and lower-case: {bad[:3]}")


@dataclass(frozen=True)
class OverlapMatrix:
    systems: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    def to_tsv(self) -> str:
        """Tab-separated table; zero counts are left blank."""
        rows = ["\t".join(("",) + self.systems)]
        for name, row in zip(self.systems, self.counts):
            rows.append("\t".join([name] + [str(c) if c else "" for c in row]))
        return "\n".join(rows) + "\n"


def list_files(root, system: Optional[str] = None,
               extensions: Optional[Iterable[str]] = None) -> FileNameSet:
    """Lower-cased base names of all files below ``root``.

    With ``extensions`` only names ending in one of them are kept.
    """
    root = Path(root)
    if not root.is_dir():
        raise IoError(root, "not a readable directory")
    exts = tuple(e.lower() for e in extensions) if extensions else None

    def fail(err: OSError):
        raise IoError(err.filename or root, err.strerror or str(err))

    names = set()
    for _dir, _subdirs, files in os.walk(root, onerror=fail):
        for f in files:
            name = f.lower()
            if exts is None or name.endswith(exts):
                names.add(name)
    return FileNameSet(system or root.name, frozenset(names))


def overlap_matrix(sets: Sequence[FileNameSet]) -> OverlapMatrix:
    if not sets:
        raise ValueError("need at least one system")
    counts = tuple(tuple(len(a.names & b.names) for b in sets) for a in sets)
    return OverlapMatrix(tuple(s.system for s in sets), counts)
