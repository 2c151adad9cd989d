"""Per-behaviour activity metrics: coverage, mean separation, jitter, drift.

Metrics other than coverage are computed over the frames in the behaviour
where the dragon-lamp separation was measurable. When too few such frames
exist the metric is absent (None), never zero; reports render it as "-".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .behaviour import BehaviourKind, FrameState

__all__ = [
    "ActivityReport",
    "coverage",
    "mean_vertical_diff",
    "jitter",
    "drift_slope",
    "activity_report",
    "activity_reports",
]


@dataclass(frozen=True)
class ActivityReport:
    behaviour: BehaviourKind
    coverage: float
    mean_vertical_diff: float | None
    jitter: float | None
    drift_slope: float | None
    frames_used: int


def coverage(kinds: Sequence[BehaviourKind], kind: BehaviourKind, frame_count: int) -> float:
    """Percentage of clip frames carrying the given behaviour."""
    if frame_count < 1:
        raise ValueError(f"frame_count must be >= 1, got {frame_count}")
    return 100.0 * sum(1 for k in kinds if k is kind) / frame_count


def mean_vertical_diff(values: Sequence[float]) -> float | None:
    """Arithmetic mean of the separation values; None when there are none."""
    if not values:
        return None
    return sum(values) / len(values)


def jitter(samples: Sequence[tuple[int, float]]) -> float | None:
    """Mean absolute change of the separation across adjacent frames.

    ``samples`` are (frame, value) pairs sorted by frame. Pairs spanning a
    hole (non-consecutive frames) are excluded; None when no adjacent pair
    exists.
    """
    diffs = [
        abs(v1 - v0)
        for (f0, v0), (f1, v1) in zip(samples, samples[1:])
        if f1 == f0 + 1
    ]
    if not diffs:
        return None
    return sum(diffs) / len(diffs)


def drift_slope(times_s: Sequence[float], values: Sequence[float]) -> float | None:
    """Ordinary least squares slope of value against time, per second.

    None with fewer than two samples or when all timestamps coincide.
    """
    n = len(times_s)
    if n != len(values):
        raise ValueError("times and values must have the same length")
    if n < 2:
        return None
    t_mean = sum(times_s) / n
    v_mean = sum(values) / n
    denom = sum((t - t_mean) ** 2 for t in times_s)
    if denom == 0:
        return None
    num = sum((t - t_mean) * (v - v_mean) for t, v in zip(times_s, values))
    return num / denom


def activity_report(
    states: Sequence[FrameState],
    kind: BehaviourKind,
    frame_count: int,
    fps: float,
) -> ActivityReport:
    """Build the four metrics for one behaviour from resolved frame states."""
    kinds = [s.kind for s in states]
    measured = [
        (s.frame, s.separation.delta_y)
        for s in states
        if s.kind is kind and s.separation is not None
    ]
    return ActivityReport(
        behaviour=kind,
        coverage=coverage(kinds, kind, frame_count),
        mean_vertical_diff=mean_vertical_diff([v for _, v in measured]),
        jitter=jitter(measured),
        drift_slope=drift_slope([f / fps for f, _ in measured], [v for _, v in measured]),
        frames_used=len(measured),
    )


def activity_reports(
    states: Sequence[FrameState], frame_count: int, fps: float
) -> dict[BehaviourKind, ActivityReport]:
    """One report per behaviour kind."""
    return {kind: activity_report(states, kind, frame_count, fps) for kind in BehaviourKind}
