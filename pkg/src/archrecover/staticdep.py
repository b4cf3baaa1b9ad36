"""DLL import extraction from PE32 / PE32+ executables."""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

from .errors import BadRva, NotPe, TruncatedBuffer

PE32_MAGIC = 0x10B
PE32PLUS_MAGIC = 0x20B
IMPORT_DIR = 1
CLR_DIR = 14
DESCRIPTOR_SIZE = 20
MAX_NAME = 4096


@dataclass(frozen=True)
class ImportEntry:
    importer: str
    imported_dll: str
    symbols: tuple[str, ...] = ()
    # set for .NET assemblies, whose managed references are not parsed
    not_supported: bool = False

    def as_tuple(self):
        return (self.importer, self.imported_dll, list(self.symbols))


@dataclass
class _Section:
    va: int
    vsize: int
    raw_off: int
    raw_size: int


@dataclass
class _Image:
    buf: bytes
    sections: list[_Section] = field(default_factory=list)

    def read(self, off: int, fmt: str):
        size = struct.calcsize(fmt)
        if off < 0 or off + size > len(self.buf):
            raise TruncatedBuffer(f"read of {size} bytes at {off:#x} past end ({len(self.buf):#x})")
        return struct.unpack_from(fmt, self.buf, off)

    def offset(self, rva: int) -> int:
        for s in self.sections:
            span = max(s.vsize, s.raw_size)
            if s.va <= rva < s.va + span:
                delta = rva - s.va
                if delta >= s.raw_size:
                    # lies in zero-filled tail of the section
                    raise BadRva(rva)
                return s.raw_off + delta
        raise BadRva(rva)

    def cstring(self, rva: int) -> str:
        off = self.offset(rva)
        if off >= len(self.buf):
            raise TruncatedBuffer(f"string at {off:#x} past end")
        end = self.buf.find(b"\0", off, min(len(self.buf), off + MAX_NAME))
        if end < 0:
            raise TruncatedBuffer(f"unterminated string at {off:#x}")
        return self.buf[off:end].decode("latin-1")


def _headers(buf: bytes):
    if len(buf) < 2 or buf[:2] != b"MZ":
        raise NotPe("missing MZ signature")
    img = _Image(buf)
    (e_lfanew,) = img.read(0x3C, "<I")
    (sig,) = img.read(e_lfanew, "<4s")
    if sig != b"PE\0\0":
        raise NotPe("missing PE signature")
    coff = e_lfanew + 4
    _machine, nsections, _ts, _symptr, _nsyms, opt_size, _chars = img.read(coff, "<HHIIIHH")
    opt = coff + 20
    (magic,) = img.read(opt, "<H")
    if magic == PE32_MAGIC:
        ndirs_off, dirs_off = opt + 92, opt + 96
    elif magic == PE32PLUS_MAGIC:
        ndirs_off, dirs_off = opt + 108, opt + 112
    else:
        raise NotPe(f"unknown optional header magic {magic:#x}")
    (ndirs,) = img.read(ndirs_off, "<I")
    dirs = {}
    for i in (IMPORT_DIR, CLR_DIR):
        if i < ndirs and dirs_off + 8 * i + 8 <= opt + opt_size:
            dirs[i] = img.read(dirs_off + 8 * i, "<II")
        else:
            dirs[i] = (0, 0)
    sec = opt + opt_size
    for i in range(nsections):
        _name, vsize, va, raw_size, raw_off = img.read(sec + 40 * i, "<8sIIII")
        img.sections.append(_Section(va, vsize, raw_off, raw_size))
    return img, magic, dirs


def parse_pe_imports(buf: bytes, importer: str) -> list[ImportEntry]:
    """Return one ImportEntry per import descriptor of a PE image.

    Raises NotPe, TruncatedBuffer or BadRva on malformed input; never reads
    outside ``buf``.
    """
    buf = bytes(buf)
    importer = importer.lower()
    img, magic, dirs = _headers(buf)
    if dirs[CLR_DIR][0]:
        return [ImportEntry(importer, "mscoree.dll", (), not_supported=True)]
    rva, size = dirs[IMPORT_DIR]
    if rva == 0:
        return []

    if magic == PE32_MAGIC:
        thunk_fmt, ord_flag = "<I", 1 << 31
    else:
        thunk_fmt, ord_flag = "<Q", 1 << 63
    thunk_size = struct.calcsize(thunk_fmt)

    entries = []
    desc = img.offset(rva)
    while True:
        oft, _ts, _fwd, name_rva, ft = img.read(desc, "<IIIII")
        if not (oft or _ts or _fwd or name_rva or ft):
            break
        dll = img.cstring(name_rva).lower()
        symbols = []
        # bound images overwrite the IAT, so prefer the lookup table
        toff = img.offset(oft or ft)
        while True:
            (thunk,) = img.read(toff, thunk_fmt)
            if thunk == 0:
                break
            if thunk & ord_flag:
                symbols.append(f"ord#{thunk & 0xFFFF}")
            else:
                symbols.append(img.cstring((thunk & 0x7FFFFFFF) + 2))
            toff += thunk_size
        if dll:
            entries.append(ImportEntry(importer, dll, tuple(symbols)))
        desc += DESCRIPTOR_SIZE
    return entries
