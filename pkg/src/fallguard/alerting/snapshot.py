"""Skeleton snapshot rendering for alert messages."""

from __future__ import annotations

import io

from PIL import Image, ImageDraw

from ..pose_stream import BONES, LandmarkFrame

BACKGROUND = (16, 16, 16)
BONE = (0, 190, 255)
BONE_DIM = (55, 70, 80)
JOINT = (255, 80, 80)
JOINT_DIM = (95, 60, 60)


def render_snapshot(
    frame: LandmarkFrame,
    width: int = 640,
    height: int = 480,
    min_visibility: float = 0.5,
) -> bytes:
    """Draw the frame's skeleton and return PNG bytes.

    Output depends only on the arguments.  Landmarks below ``min_visibility``
    and bones touching them are drawn dimmed.
    """
    if width < 64 or height < 64:
        raise ValueError("snapshot dimensions must be at least 64x64")
    img = Image.new("RGB", (width, height), BACKGROUND)
    draw = ImageDraw.Draw(img)
    pts = frame.points
    px = [(float(x) * width, float(y) * height) for x, y in pts[:, :2]]
    visible = pts[:, 2] >= min_visibility
    line_w = max(1, round(min(width, height) / 160))
    radius = max(2, round(min(width, height) / 100))

    for dim_pass in (True, False):
        for a, b in BONES:
            ok = bool(visible[a] and visible[b])
            if ok == dim_pass:
                continue
            draw.line([px[a], px[b]], fill=BONE if ok else BONE_DIM, width=line_w)
    for dim_pass in (True, False):
        for i, (x, y) in enumerate(px):
            if bool(visible[i]) == dim_pass:
                continue
            draw.ellipse(
                [x - radius, y - radius, x + radius, y + radius],
                fill=JOINT if visible[i] else JOINT_DIM,
            )
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()
