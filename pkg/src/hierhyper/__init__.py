"""Hierarchical hypersparse matrices for fast batched streaming updates."""
from .errors import (FormatError, IndexOutOfBoundsError, InvalidDimensionError, LaunchError,
                     ScheduleError, ShapeError, ValueOverflowError, WorkloadError)
from .hierarchy import CutSchedule, HierarchicalMatrix, UpdateStats, cut_schedule_from_ratio
from .hypersparse import HypersparseMatrix, Triple, add_assign, from_triples, new_matrix
from .streamgen import RmatParams, read_edge_file, rmat_generate, write_edge_file

__version__ = "0.1.0"

__all__ = [
    "CutSchedule",
    "FormatError",
    "HierarchicalMatrix",
    "HypersparseMatrix",
    "IndexOutOfBoundsError",
    "InvalidDimensionError",
    "LaunchError",
    "RmatParams",
    "ScheduleError",
    "ShapeError",
    "Triple",
    "UpdateStats",
    "ValueOverflowError",
    "WorkloadError",
    "add_assign",
    "cut_schedule_from_ratio",
    "from_triples",
    "new_matrix",
    "read_edge_file",
    "rmat_generate",
    "write_edge_file",
]
