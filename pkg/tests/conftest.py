import re
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"
OBJDUMP = shutil.which("objdump")


def objdump_imports(path) -> set[tuple[str, str]]:
    """(dll, symbol) pairs as listed by ``objdump -p``; ordinals become ``ord#<n>``."""
    out = subprocess.run([OBJDUMP, "-p", str(path)], capture_output=True, text=True, check=True).stdout
    return parse_objdump(out)


def parse_objdump(text: str) -> set[tuple[str, str]]:
    pairs = set()
    dll = None
    for line in text.splitlines():
        m = re.match(r"\s*DLL Name: (\S+)", line)
        if m:
            dll = m.group(1).lower()
            continue
        if dll is None:
            continue
        m = re.match(r"\t([0-9a-f]+)\t\s*[0-9a-f]+\s+(\S+)", line)
        if m:
            vma, member = m.groups()
            if member == "<none>":
                member = f"ord#{int(vma, 16) & 0xFFFF}"
            pairs.add((dll, member))
        elif not line.strip():
            continue
        elif not line.startswith("\t"):
            dll = None
    return pairs


def read_frozen_pairs(path) -> set[tuple[str, str]]:
    return {tuple(line.split()) for line in Path(path).read_text().splitlines() if line.strip()}


def random_matrix(rng: np.random.Generator, n: int, density: float):
    """Symmetric sparse nonnegative count matrix over n objects; NaN = absent."""
    from archrecover.aib import AttributeMatrix

    w = np.full((n, n), np.nan)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                w[i, j] = w[j, i] = float(rng.integers(1, 6))
    names = tuple(f"o{i:02d}" for i in range(n))
    return AttributeMatrix(names, names, w)


@pytest.fixture
def data_dir():
    return DATA


ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
