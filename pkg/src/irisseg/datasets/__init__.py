"""Dataset persistence: images, annotations, score files and published tables."""

from .annotations import read_annotations, write_annotations, loads_annotations, dumps_annotations
from .pgm import GrayImage, read_pgm, write_pgm, load_pgm, save_pgm
from .published import PublishedTables, load_published, recompute_table3, table3_report
from .store import Dataset, load_dataset, save_dataset
from .scores import read_scores, write_scores, read_identities, write_identities

__all__ = [
    "GrayImage", "read_pgm", "write_pgm", "load_pgm", "save_pgm",
    "read_annotations", "write_annotations", "loads_annotations", "dumps_annotations",
    "read_scores", "write_scores", "read_identities", "write_identities",
    "Dataset", "load_dataset", "save_dataset",
    "PublishedTables", "load_published", "recompute_table3", "table3_report",
]
