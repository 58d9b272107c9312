from .client import (
    ENV_API_KEY,
    ENV_ENDPOINT,
    ENV_MODEL,
    AuthError,
    EndpointConfig,
    HttpBackend,
    RequestLog,
    TransportError,
    complete,
)
from .extract import ExtractionError, extract_code, extract_detector
from .mock import MockBackend, TranscriptExhaustedError
from .prompts import (
    MutationRequest,
    assemble_prompt,
    build_detector_prompt,
    build_label_prompt,
    build_reward_prompt,
    detector_grammar_text,
    library_summary,
    library_table,
    load_template,
    render,
    scene_summary,
)
from .synth import LMDetectorMutator, SynthesisError, propose_labels, synthesize_reward

__all__ = [
    "AuthError",
    "ENV_API_KEY",
    "ENV_ENDPOINT",
    "ENV_MODEL",
    "EndpointConfig",
    "ExtractionError",
    "HttpBackend",
    "LMDetectorMutator",
    "MockBackend",
    "MutationRequest",
    "RequestLog",
    "SynthesisError",
    "TranscriptExhaustedError",
    "TransportError",
    "assemble_prompt",
    "build_detector_prompt",
    "build_label_prompt",
    "build_reward_prompt",
    "complete",
    "detector_grammar_text",
    "extract_code",
    "extract_detector",
    "library_summary",
    "library_table",
    "load_template",
    "propose_labels",
    "render",
    "scene_summary",
    "synthesize_reward",
]
