"""Command-line driver: ``archrecover <command> [options]``.

Exit status is 0 on success, 1 on usage errors and 2 on unreadable or
malformed input.
"""
from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import aib
from .depgraph import build_graph, merge_static, read_graph, read_imports, write_graph, write_imports
from .errors import BadK, InputError, IoError, MalformedGraph
from .overlap import BINARY_EXTENSIONS, list_files, overlap_matrix
from .render import RenderOptions, to_dot
from .significance import UseCaseAnnotation, overlay
from .staticdep import parse_pe_imports
from .synth import SynthParams, generate, nmi, write_truth
from .trace import parse_symbol_table, parse_trace_file, trace_records, write_trace

log = logging.getLogger("archrecover")

SYMBOL_SUFFIX = ".sym"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _open_in(path: str):
    try:
        return open(path, encoding="utf-8")
    except OSError as exc:
        raise IoError(path, exc.strerror) from None


@contextlib.contextmanager
def _open_out(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
        return
    try:
        f = open(path, "w", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise IoError(path, exc.strerror) from None
    with f:
        yield f


def _load_records(path: str):
    with _open_in(path) as f:
        return trace_records(parse_trace_file(f))


def _load_symbols(directory: Optional[str]):
    if not directory:
        return {}
    root = Path(directory)
    if not root.is_dir():
        raise IoError(directory, "not a directory")
    tables = {}
    for p in sorted(root.iterdir()):
        if p.is_file() and p.name.lower().endswith(SYMBOL_SUFFIX):
            module = p.name[: -len(SYMBOL_SUFFIX)].lower()
            with _open_in(str(p)) as f:
                tables[module] = parse_symbol_table(f, module)
    return tables


def _load_graph(path: str):
    with _open_in(path) as f:
        return read_graph(f)


def _load_clustering(path: str, graph=None):
    with _open_in(path) as f:
        c = aib.read_clustering(f)
    if not c.partition:
        raise MalformedGraph(0, f"{path} holds no 'P' partition lines")
    return c


def cmd_graph(args):
    tables = _load_symbols(args.symbols)
    records = [r for path in args.trace for r in _load_records(path)]
    graph = build_graph(records, tables)
    for path in args.imports or ():
        with _open_in(path) as f:
            graph = merge_static(graph, read_imports(f))
    with _open_out(args.out) as out:
        write_graph(graph, out)
    log.info("graph: %d components, %d edges", len(graph.components), len(graph.edges))


def cmd_imports(args):
    entries = []
    for path in args.pe:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise IoError(path, exc.strerror) from None
        found = parse_pe_imports(data, Path(path).name)
        for e in found:
            if e.not_supported:
                log.warning("%s: managed assembly, only the runtime import is reported", path)
        entries.extend(e.as_tuple() for e in found)
    with _open_out(args.out) as out:
        write_imports(entries, out)


def cmd_cluster(args):
    graph = _load_graph(args.graph)
    n = len(graph.components)
    if args.k is not None and not 1 <= args.k <= n:
        raise BadK(args.k, n)
    if n == 0:
        raise MalformedGraph(0, f"{args.graph} has no components")
    matrix = aib.build_matrix(graph)
    if not args.no_tfidf:
        matrix = aib.tfidf(matrix)
    dendrogram = aib.aib_cluster(aib.normalize(matrix))
    clustering = aib.select_clustering(dendrogram, args.k)
    with _open_out(args.out) as out:
        out.write(dendrogram.to_text())
        out.write(clustering.to_text())
    log.info("cluster: %d components into %d clusters", n, clustering.k)


def _read_overlay(path: str):
    anns = []
    with _open_in(path) as f:
        for lineno, raw in enumerate(f, 1):
            fields = raw.split()
            if not fields or fields[0] != "O":
                continue
            if len(fields) not in (3, 4):
                raise MalformedGraph(lineno, "expected 'O <primitive> <intensity> [use cases]'")
            try:
                intensity = float(fields[2])
            except ValueError:
                raise MalformedGraph(lineno, f"bad intensity {fields[2]!r}") from None
            cases = frozenset(fields[3].split(",")) if len(fields) == 4 else frozenset()
            anns.append(UseCaseAnnotation(fields[1], cases, intensity))
    return anns


def cmd_render(args):
    graph = _load_graph(args.graph)
    clustering = _load_clustering(args.clustering)
    annotations = _read_overlay(args.overlay) if args.overlay else None
    try:
        options = RenderOptions(label_depth=args.label_depth, color_buckets=args.buckets,
                                show_overlay=annotations is not None, redact=args.redact)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with _open_out(args.out) as out:
        out.write(to_dot(clustering, graph, options, annotations))


def cmd_overlap(args):
    exts = BINARY_EXTENSIONS if args.binary_only else None
    sets = [list_files(root, system=Path(root).resolve().name, extensions=exts) for root in args.roots]
    with _open_out(args.out) as out:
        out.write(overlap_matrix(sets).to_tsv())


def cmd_overlay(args):
    graph = _load_graph(args.graph)
    clustering = _load_clustering(args.clustering)
    usecases = {}
    for item in args.usecase:
        name, sep, path = item.partition("=")
        if not sep or not name or not path or "," in name:
            raise UsageError(f"--usecase expects NAME=TRACEFILE, got {item!r}")
        usecases[name] = _load_records(path)
    tables = _load_symbols(args.symbols)
    with _open_out(args.out) as out:
        for ann in overlay(clustering, graph, usecases, tables):
            out.write(ann.to_line() + "\n")


def cmd_synth(args):
    try:
        sizes = tuple(int(s) for s in args.sizes.split(","))
        params = SynthParams(sizes, args.methods, args.intra_degree, args.inter_prob, args.seed)
    except ValueError as exc:
        raise UsageError(f"bad synth parameters: {exc}") from None
    records, truth = generate(params)
    with _open_out(args.trace) as out:
        write_trace(records, out)
    if args.truth:
        with _open_out(args.truth) as out:
            write_truth(truth, out)


def cmd_eval(args):
    found = _load_clustering(args.clustering)
    with _open_in(args.truth) as f:
        truth = aib.read_clustering(f, tag="G")
    with _open_out(args.out) as out:
        out.write(f"nmi {nmi(found, truth):.6f}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="archrecover", description="Recover candidate architectures from binary traces.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", metavar="command", required=True)

    g = sub.add_parser("graph", help="build a dependency graph from traces")
    g.add_argument("--trace", action="append", required=True, help="trace file (repeatable)")
    g.add_argument("--symbols", help="directory of <module>.sym symbol tables")
    g.add_argument("--imports", action="append", help="import list from 'imports' (repeatable)")
    g.add_argument("--out")
    g.set_defaults(func=cmd_graph)

    i = sub.add_parser("imports", help="extract DLL imports from PE files")
    i.add_argument("pe", nargs="+")
    i.add_argument("--out")
    i.set_defaults(func=cmd_imports)

    c = sub.add_parser("cluster", help="cluster a dependency graph")
    mode = c.add_mutually_exclusive_group()
    mode.add_argument("--k", type=int)
    mode.add_argument("--auto", action="store_true", help="automatic cut (default)")
    c.add_argument("--graph", required=True)
    c.add_argument("--no-tfidf", action="store_true", help="skip attribute reweighting")
    c.add_argument("--out")
    c.set_defaults(func=cmd_cluster)

    r = sub.add_parser("render", help="emit DOT for a clustered graph")
    r.add_argument("--graph", required=True)
    r.add_argument("--clustering", required=True)
    r.add_argument("--label-depth", type=int, default=3)
    r.add_argument("--buckets", type=int, default=3)
    r.add_argument("--redact", action="store_true")
    r.add_argument("--overlay", help="overlay file from 'overlay'")
    r.add_argument("--out")
    r.set_defaults(func=cmd_render)

    o = sub.add_parser("overlap", help="shared file names between install trees")
    o.add_argument("roots", nargs="+")
    o.add_argument("--binary-only", action="store_true", help="only .exe and .dll files")
    o.add_argument("--out")
    o.set_defaults(func=cmd_overlap)

    v = sub.add_parser("overlay", help="annotate primitives with use-case traces")
    v.add_argument("--graph", required=True)
    v.add_argument("--clustering", required=True)
    v.add_argument("--usecase", action="append", required=True, metavar="NAME=TRACE")
    v.add_argument("--symbols")
    v.add_argument("--out")
    v.set_defaults(func=cmd_overlay)

    s = sub.add_parser("synth", help="generate a system with planted clusters")
    s.add_argument("--sizes", required=True, help="comma-separated cluster sizes")
    s.add_argument("--methods", type=int, default=10)
    s.add_argument("--intra-degree", type=float, default=8.0)
    s.add_argument("--inter-prob", type=float, default=0.05)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trace", required=True)
    s.add_argument("--truth")
    s.set_defaults(func=cmd_synth)

    e = sub.add_parser("eval", help="NMI of a clustering against ground truth")
    e.add_argument("--clustering", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(str(exc))
        return 1
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except (UsageError, BadK) as exc:
        sys.stderr.write(f"archrecover {args.command}: {exc}\n")
        return 1
    except InputError as exc:
        sys.stderr.write(f"archrecover {args.command}: {exc}\n")
        return 2
    return 0


def main():
    sys.exit(run())
