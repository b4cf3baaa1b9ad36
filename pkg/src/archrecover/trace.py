"""Trace and symbol file formats, and address-to-symbol resolution.

Trace files are line oriented::

    # comment
    L <counter> <module> <base> <size>
    C <counter> <src_module> <src_site> <dst_module> <dst_site>

Symbol files hold ``<hex address> <name>`` lines. Module names are
canonicalized to lower case on parse.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Iterable, TextIO, Union

from .errors import DuplicateAddress, MalformedSymbols, MalformedTrace


@dataclass(frozen=True)
class TraceRecord:
    counter: int
    src_module: str
    src_site: str
    dst_module: str
    dst_site: str

    def to_line(self) -> str:
        return f"C {self.counter} {self.src_module} {self.src_site} {self.dst_module} {self.dst_site}"


@dataclass(frozen=True)
class ModuleLoadRecord:
    counter: int
    module: str
    base: int
    size: int

    def to_line(self) -> str:
        return f"L {self.counter} {self.module} {self.base:#x} {self.size}"


Record = Union[TraceRecord, ModuleLoadRecord]


@dataclass(frozen=True)
class SymbolTable:
    module: str
    entries: tuple[tuple[int, str], ...] = ()
    _addresses: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        addrs = tuple(a for a, _ in self.entries)
        if any(b <= a for a, b in zip(addrs, addrs[1:])):
            raise ValueError("symbol addresses must be strictly ascending")
        object.__setattr__(self, "_addresses", addrs)

    def __len__(self):
        return len(self.entries)


def _lines(stream: TextIO | Iterable[str]):
    for lineno, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line.split()


def _parse_hex(text: str) -> int:
    if not text.lower().startswith("0x"):
        raise ValueError(text)
    return int(text, 16)


def _parse_counter(text: str) -> int:
    if not text.isdigit():
        raise ValueError(text)
    return int(text)


def parse_trace_file(stream: TextIO | Iterable[str]) -> list[Record]:
    """Parse a trace stream into load and control-transfer records, in file order."""
    records: list[Record] = []
    last = -1
    for lineno, fields in _lines(stream):
        tag = fields[0]
        try:
            if tag == "L" and len(fields) == 5:
                size = int(fields[4])
                if size <= 0:
                    raise MalformedTrace(lineno, "module size must be positive")
                rec: Record = ModuleLoadRecord(
                    _parse_counter(fields[1]), fields[2].lower(), _parse_hex(fields[3]), size
                )
            elif tag == "C" and len(fields) == 6:
                rec = TraceRecord(
                    _parse_counter(fields[1]), fields[2].lower(), fields[3], fields[4].lower(), fields[5]
                )
            else:
                raise MalformedTrace(lineno, "unknown tag or wrong field count")
        except ValueError as exc:
            raise MalformedTrace(lineno, f"bad numeric field {exc}") from None
        if rec.counter < last:
            raise MalformedTrace(lineno, f"counter {rec.counter} decreases (previous {last})")
        last = rec.counter
        records.append(rec)
    return records


def write_trace(records: Iterable[Record], out: TextIO) -> None:
    for rec in records:
        out.write(rec.to_line() + "\n")


def trace_records(records: Iterable[Record]) -> list[TraceRecord]:
    return [r for r in records if isinstance(r, TraceRecord)]


def parse_symbol_table(stream: TextIO | Iterable[str], module: str) -> SymbolTable:
    entries: dict[int, str] = {}
    for lineno, fields in _lines(stream):
        if len(fields) != 2:
            raise MalformedSymbols(lineno, "expected '<hex address> <name>'")
        try:
            addr = _parse_hex(fields[0])
        except ValueError:
            raise MalformedSymbols(lineno, f"bad address {fields[0]!r}") from None
        if addr in entries:
            raise DuplicateAddress(addr)
        entries[addr] = fields[1]
    return SymbolTable(module.lower(), tuple(sorted(entries.items())))


def resolve_site(table: SymbolTable | None, address: int) -> str:
    """Label an address by its symbol, ``name+0x<off>`` past the nearest one, or raw hex."""
    if table is None or not table.entries:
        return hex(address)
    i = bisect.bisect_right(table._addresses, address) - 1
    if i < 0:
        return hex(address)
    start, name = table.entries[i]
    if start == address:
        return name
    return f"{name}+{address - start:#x}"


def site_label(site: str, table: SymbolTable | None) -> str:
    """Resolve a trace site if it is hexadecimal; symbolic sites pass through."""
    if table is not None and site[:2].lower() == "0x":
        try:
            addr = int(site, 16)
        except ValueError:
            return site
        return resolve_site(table, addr)
    return site
