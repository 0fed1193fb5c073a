"""Planar LiDAR perception: clustering, human gating, tracking and user selection."""

from .clustering import Cluster, OrientedBox, cluster, cluster_labels, gate_human, oriented_box
from .pipeline import Perception, PerceptionFrame, detect_humans, perceive_from_log
from .scan import (
    BEAM_COUNT,
    MAX_RANGE,
    Scan,
    ScanLogError,
    ScanLogWriter,
    beam_angles,
    filter_ground,
    read_scan_log,
    write_scan_log,
)
from .selection import NO_USER, UserSelection, UserSelector, in_roi, select_user, to_robot_frame
from .tracking import Track, Tracker, associate, correct, predict, track_update

__all__ = [
    "BEAM_COUNT",
    "MAX_RANGE",
    "NO_USER",
    "Cluster",
    "OrientedBox",
    "Perception",
    "PerceptionFrame",
    "Scan",
    "ScanLogError",
    "ScanLogWriter",
    "Track",
    "Tracker",
    "UserSelection",
    "UserSelector",
    "associate",
    "beam_angles",
    "cluster",
    "cluster_labels",
    "correct",
    "detect_humans",
    "filter_ground",
    "gate_human",
    "in_roi",
    "oriented_box",
    "perceive_from_log",
    "predict",
    "read_scan_log",
    "select_user",
    "to_robot_frame",
    "track_update",
    "write_scan_log",
]
