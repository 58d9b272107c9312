"""Action-space quantization."""

from __future__ import annotations

from ..trace.model import (
    ACTION_RADIUS_MAX,
    ACTION_RADIUS_MIN,
    SCENE_EXTENT,
    Action,
    Vec2,
)


def quantize_actions(x_bins: int, y_bins: int, r_bins: int) -> list[Action]:
    """Bin-center actions over x,y in [0,256] and r in [4,32], row-major
    (x outermost, then y, then r)."""
    if x_bins < 1 or y_bins < 1 or r_bins < 1:
        raise ValueError("bin counts must be >= 1")
    r_span = ACTION_RADIUS_MAX - ACTION_RADIUS_MIN
    actions = []
    for xi in range(x_bins):
        x = (xi + 0.5) * SCENE_EXTENT / x_bins
        for yi in range(y_bins):
            y = (yi + 0.5) * SCENE_EXTENT / y_bins
            for ri in range(r_bins):
                r = ACTION_RADIUS_MIN + (ri + 0.5) * r_span / r_bins
                actions.append(Action(position=Vec2(x, y), radius=r))
    return actions
