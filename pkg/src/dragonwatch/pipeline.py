"""End-to-end per-clip analysis: tracks, states, episodes, activity metrics."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .activity import ActivityReport, activity_reports
from .behaviour import (
    BehaviourKind,
    Episode,
    FrameState,
    demote_short_basking,
    detect_hunting,
    resolve_frame_states,
    run_length_episodes,
)
from .ingest import RunConfig
from .model import Timeline
from .tracks import Track, associate_crickets, continuity, fill_gaps, reduce_per_frame

__all__ = ["TrackContinuity", "AnalysisResult", "analyze_timeline"]

CONTINUITY_NOTE = (
    "fraction of frames between a track's first and last detection that are covered; "
    "toolkit-defined measure of interpolation benefit"
)


@dataclass(frozen=True)
class TrackContinuity:
    """Continuity of one track before and after gap filling."""

    observed: float | None
    interpolated: float | None


@dataclass(frozen=True)
class AnalysisResult:
    """Everything one clip analysis produces, ready for serialisation."""

    config: RunConfig  # effective config, geometry resolved
    frame_count: int
    frames: list[FrameState]
    episodes: list[Episode]
    hunting_event_frames: list[int]
    activity: dict[BehaviourKind, ActivityReport]
    dragon_continuity: TrackContinuity
    lamp_continuity: TrackContinuity
    cricket_continuity: list[TrackContinuity]

    def to_json_dict(self) -> dict:
        geom = self.config.geometry
        assert geom is not None

        def continuity_dict(tc: TrackContinuity) -> dict:
            return {"observed": tc.observed, "interpolated": tc.interpolated}

        return {
            "config": {
                "beta": self.config.beta,
                "theta_max": self.config.theta_max,
                "gamma": self.config.gamma,
                "max_gap": self.config.max_gap,
                "disappearance_window": self.config.disappearance_window,
                "min_episode": self.config.min_episode,
                "cricket_gate": self.config.cricket_gate,
                "geometry": {"width": geom.width, "height": geom.height, "fps": geom.fps},
            },
            "frame_count": self.frame_count,
            "hunting_event_frames": list(self.hunting_event_frames),
            "episodes": [
                {
                    "behaviour": ep.kind.value,
                    "start_frame": ep.start_frame,
                    "end_frame": ep.end_frame,
                    "duration_s": ep.duration_s,
                }
                for ep in self.episodes
            ],
            "activity": {
                kind.value: {
                    "coverage": report.coverage,
                    "mean_vertical_diff": report.mean_vertical_diff,
                    "jitter": report.jitter,
                    "drift_slope": report.drift_slope,
                    "frames_used": report.frames_used,
                }
                for kind, report in self.activity.items()
            },
            "continuity": {
                "note": CONTINUITY_NOTE,
                "dragon": continuity_dict(self.dragon_continuity),
                "lamp": continuity_dict(self.lamp_continuity),
                "crickets": [continuity_dict(tc) for tc in self.cricket_continuity],
            },
        }


def _filled_with_continuity(track: Track, max_gap: int) -> tuple[Track, TrackContinuity]:
    filled = fill_gaps(track, max_gap)
    return filled, TrackContinuity(continuity(track), continuity(filled))


def analyze_timeline(timeline: Timeline, cfg: RunConfig | None = None) -> AnalysisResult:
    """Run the full behaviour pipeline on one parsed clip."""
    cfg = cfg if cfg is not None else RunConfig()
    geom = cfg.geometry if cfg.geometry is not None else timeline.geometry
    effective = replace(cfg, geometry=geom)

    dragon_raw, lamp_raw = reduce_per_frame(timeline)
    dragon, dragon_cont = _filled_with_continuity(dragon_raw, effective.max_gap)
    lamp, lamp_cont = _filled_with_continuity(lamp_raw, effective.max_gap)
    cricket_pairs = [
        _filled_with_continuity(track, effective.max_gap)
        for track in associate_crickets(
            timeline, gate_fraction=effective.cricket_gate, max_gap=effective.max_gap
        )
    ]
    crickets = [pair[0] for pair in cricket_pairs]

    hunts = detect_hunting(crickets, dragon, geom, timeline.frame_count, effective)
    raw_states = resolve_frame_states(
        dragon, lamp, hunts, geom, timeline.frame_count, effective
    )
    final_kinds = demote_short_basking([s.kind for s in raw_states], effective.min_episode)
    frames = [
        state if state.kind is kind else replace(state, kind=kind)
        for state, kind in zip(raw_states, final_kinds)
    ]
    episodes = run_length_episodes(final_kinds, geom.fps)
    if timeline.frame_count > 0:
        activity = activity_reports(frames, timeline.frame_count, geom.fps)
    else:
        activity = {}
    return AnalysisResult(
        config=effective,
        frame_count=timeline.frame_count,
        frames=frames,
        episodes=episodes,
        hunting_event_frames=hunts,
        activity=activity,
        dragon_continuity=dragon_cont,
        lamp_continuity=lamp_cont,
        cricket_continuity=[pair[1] for pair in cricket_pairs],
    )
