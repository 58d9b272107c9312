from .library import (
    CycleError,
    PatternDetector,
    PatternLibrary,
    ablate,
    library_from_json,
    library_to_json,
    resolve_order,
)
from .engine import (
    AnnotationError,
    AnnotationEvent,
    AnnotationMatrix,
    annotate,
    ast_from_json,
    ast_to_json,
    render_annotations,
)

__all__ = [
    "AnnotationError",
    "AnnotationEvent",
    "AnnotationMatrix",
    "CycleError",
    "PatternDetector",
    "PatternLibrary",
    "ablate",
    "annotate",
    "ast_from_json",
    "ast_to_json",
    "library_from_json",
    "library_to_json",
    "render_annotations",
    "resolve_order",
]
