"""Shared test builders and hypothesis strategies."""

from __future__ import annotations

from hypothesis import strategies as st

from dragonwatch.model import (
    BBox,
    ClassLabel,
    Detection,
    FrameGeometry,
    PixelBox,
    Provenance,
    Timeline,
)


def det(
    frame: int,
    label: ClassLabel = ClassLabel.BEARDED_DRAGON,
    cx: float = 0.5,
    cy: float = 0.5,
    w: float = 0.1,
    h: float = 0.1,
    conf: float = 0.9,
    provenance: Provenance = Provenance.OBSERVED,
) -> Detection:
    return Detection(frame, label, BBox(cx, cy, w, h), conf, provenance)


def corner_box(x1: float, y1: float, x2: float, y2: float) -> PixelBox:
    return PixelBox(cx=(x1 + x2) / 2, cy=(y1 + y2) / 2, w=x2 - x1, h=y2 - y1)


unit_floats = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
extent_floats = st.floats(min_value=0.0, max_value=1.0, exclude_min=True, allow_nan=False)

bboxes = st.builds(BBox, cx=unit_floats, cy=unit_floats, w=extent_floats, h=extent_floats)

geometries = st.builds(
    FrameGeometry,
    width=st.integers(min_value=1, max_value=4000),
    height=st.integers(min_value=1, max_value=4000),
    fps=st.floats(min_value=0.1, max_value=240.0, allow_nan=False),
)

pixel_boxes = st.builds(
    PixelBox,
    cx=st.floats(min_value=-500, max_value=500, allow_nan=False),
    cy=st.floats(min_value=-500, max_value=500, allow_nan=False),
    w=st.floats(min_value=0.01, max_value=400, allow_nan=False),
    h=st.floats(min_value=0.01, max_value=400, allow_nan=False),
)


@st.composite
def timelines(draw) -> Timeline:
    geometry = draw(geometries)
    frame_count = draw(st.integers(min_value=1, max_value=40))
    n = draw(st.integers(min_value=0, max_value=25))
    detections = [
        Detection(
            frame=draw(st.integers(min_value=0, max_value=frame_count - 1)),
            label=draw(st.sampled_from(list(ClassLabel))),
            box=draw(bboxes),
            confidence=draw(unit_floats),
        )
        for _ in range(n)
    ]
    return Timeline.build(geometry, frame_count, detections)
