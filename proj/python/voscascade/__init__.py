"""Two-stream VOS mask fusion (miss/wrong tracking cascade) and J/F scoring."""

from ._core import (
    boundary_f,
    classify_frames,
    count_contours,
    default_boundary_tolerance,
    fuse,
    generate_fixture,
    iou,
    is_high_noise,
    is_valid,
    read_sequence,
    region_j,
    score_video,
    write_sequence,
)

__all__ = [
    "boundary_f",
    "classify_frames",
    "count_contours",
    "default_boundary_tolerance",
    "fuse",
    "generate_fixture",
    "iou",
    "is_high_noise",
    "is_valid",
    "read_sequence",
    "region_j",
    "score_video",
    "write_sequence",
]
