from ._kernel import BACKEND
from .actions import quantize_actions
from .render import render_frames, render_scene_image, write_ppm
from .templates import (
    SceneTemplate,
    UnknownTemplateError,
    bucket_targets,
    build_scene,
    list_templates,
    register_template,
)
from .world import (
    PlacementError,
    SimConfig,
    SimulationDivergedError,
    simulate,
    task_success,
)

__all__ = [
    "BACKEND",
    "PlacementError",
    "SceneTemplate",
    "SimConfig",
    "SimulationDivergedError",
    "UnknownTemplateError",
    "bucket_targets",
    "build_scene",
    "list_templates",
    "quantize_actions",
    "register_template",
    "render_frames",
    "render_scene_image",
    "simulate",
    "task_success",
    "write_ppm",
]
