"""Exception types raised by the parsers and analyses."""


class ArchRecoverError(Exception):
    pass


class InputError(ArchRecoverError):
    """Bad input data: malformed files, unparsable binaries, I/O failures."""


class MalformedTrace(InputError):
    def __init__(self, line: int, reason: str = ""):
        self.line = line
        super().__init__(f"malformed trace at line {line}" + (f": {reason}" if reason else ""))


class MalformedSymbols(InputError):
    def __init__(self, line: int, reason: str = ""):
        self.line = line
        super().__init__(f"malformed symbol table at line {line}" + (f": {reason}" if reason else ""))


class DuplicateAddress(InputError):
    def __init__(self, address: int):
        self.address = address
        super().__init__(f"duplicate symbol address {address:#x}")


class MalformedGraph(InputError):
    def __init__(self, line: int, reason: str = ""):
        self.line = line
        super().__init__(f"malformed file at line {line}" + (f": {reason}" if reason else ""))


class NotPe(InputError):
    pass


class TruncatedBuffer(InputError):
    pass


class BadRva(InputError):
    def __init__(self, rva: int):
        self.rva = rva
        super().__init__(f"RVA {rva:#x} not covered by any section")


class IoError(InputError):
    def __init__(self, path, reason: str = ""):
        self.path = path
        super().__init__(f"cannot read {path}" + (f": {reason}" if reason else ""))


class BadK(ArchRecoverError, ValueError):
    def __init__(self, k, n):
        self.k = k
        self.n = n
        super().__init__(f"k={k} outside 1..{n}")


class UnknownPrimitive(ArchRecoverError, KeyError):
    pass


class ObjectSetMismatch(ArchRecoverError, ValueError):
    pass
