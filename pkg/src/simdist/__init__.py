"""Parameter-free similarity distances (NCD, NGD) and quartet-tree clustering."""

__version__ = "0.1.0"

from .compressor import Blob, Compressor, LZSSCompressor, check_normality, compressed_length, concat_length, get_compressor
from .matrix import DistanceMatrix
from .ncd import ncd, ncd_matrix
from .ngd import UNDEFINED, ngd, ngd_matrix
from .quartet import QuartetTree, brute_force_best_tree, search, tree_score
from .termindex import CountSnapshot, TermIndex, ingest, load_snapshot, save_snapshot

__all__ = [
    "Blob", "Compressor", "LZSSCompressor", "check_normality", "compressed_length", "concat_length",
    "get_compressor", "DistanceMatrix", "ncd", "ncd_matrix", "UNDEFINED", "ngd", "ngd_matrix",
    "QuartetTree", "brute_force_best_tree", "search", "tree_score", "CountSnapshot", "TermIndex",
    "ingest", "load_snapshot", "save_snapshot",
]
