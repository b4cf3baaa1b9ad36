"""Architecture recovery from binary execution traces and import tables."""
from .aib import (
    AttributeMatrix,
    Clustering,
    Dendrogram,
    MergeStep,
    ProbModel,
    aib_cluster,
    build_matrix,
    info_loss,
    js_divergence,
    mutual_information,
    normalize,
    select_clustering,
    tfidf,
)
from .depgraph import DependencyGraph, DepEdge, EdgeKind, MethodRef, build_graph, directed_edge_count, merge_static
from .estimator import AIBClustering, TfidfWeighting
from .overlap import FileNameSet, OverlapMatrix, list_files, overlap_matrix
from .render import RenderOptions, to_dot
from .significance import SignificanceScore, UseCaseAnnotation, label_cluster, overlay, significance
from .staticdep import ImportEntry, parse_pe_imports
from .synth import SynthParams, generate, nmi
from .trace import ModuleLoadRecord, SymbolTable, TraceRecord, parse_symbol_table, parse_trace_file, resolve_site

__version__ = "0.1.0"
