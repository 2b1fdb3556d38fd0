"""Single and average linkage clustering accelerated by random projections."""
from .alc import ClusterStats, SparseSetState, alc_distance, merge_stats, rp_alc, rp_alc_parameter_free
from .bench import BenchReport, RunConfig, bench, run_algorithm
from .data import CsvFormatError, GenerationError, generate_synthetic, ingest_csv, read_merges
from .evaluate import (CutLabels, PreconditionError, PreservationScore, compute_B, cut, fowlkes_mallows,
                       pr_bound, pr_probability_exact, preservation, projection_bound_mc)
from .geometry import Dataset, InvalidInputError, Point, RngStream, perturb, project, sample_unit_vector
from .merges import MergeSequence, UnionFind
from .oracle import brute_alc, brute_slc
from .partition import PartitionConfig, PartitionFamily, partition_once, perturb_multi_partition
from .slc import (CandidateEdgeTable, build_candidate_table, classify_edges, condition_62, rp_slc,
                  rp_slc_parameter_free)

__version__ = "0.1.0"

__all__ = [
    "BenchReport", "CandidateEdgeTable", "ClusterStats", "CsvFormatError", "CutLabels", "Dataset",
    "GenerationError", "InvalidInputError", "MergeSequence", "PartitionConfig", "PartitionFamily", "Point",
    "PreconditionError", "PreservationScore", "RngStream", "RunConfig", "SparseSetState", "UnionFind",
    "alc_distance", "bench", "brute_alc", "brute_slc", "build_candidate_table", "classify_edges",
    "compute_B", "condition_62", "cut", "fowlkes_mallows", "generate_synthetic", "ingest_csv", "merge_stats",
    "partition_once", "perturb", "perturb_multi_partition", "pr_bound", "pr_probability_exact", "preservation",
    "project", "projection_bound_mc", "read_merges", "rp_alc", "rp_alc_parameter_free", "rp_slc",
    "rp_slc_parameter_free", "run_algorithm", "sample_unit_vector",
]
