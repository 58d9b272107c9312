"""Fenced-code extraction from model responses."""

from __future__ import annotations

import json
import re


class ExtractionError(ValueError):
    pass


_FENCE_KINDS = {"detector": "detector", "dsl": "dsl", "json": "json"}


def _fence_re(kind: str) -> re.Pattern:
    return re.compile(rf"```{kind}\s*\n(.*?)```", re.DOTALL)


def extract_code(model_text: str, fence_kind: str) -> str:
    """Contents of the first matching fenced block (think/answer wrappers and
    surrounding prose are ignored)."""
    if fence_kind not in _FENCE_KINDS:
        raise ValueError(f"unknown fence kind {fence_kind!r}")
    match = _fence_re(fence_kind).search(model_text)
    if match is None:
        raise ExtractionError(f"no ```{fence_kind} fence found in model response")
    return match.group(1).strip()


def extract_detector(model_text: str) -> tuple[str, dict]:
    """Detector responses carry a program fence and a trailing JSON schema of
    the emitted parameters. The schema is {} when the block is missing or
    unparseable (the program's PARAMS clause is authoritative anyway)."""
    source = extract_code(model_text, "detector")
    schema: dict = {}
    try:
        schema_text = extract_code(model_text, "json")
        parsed = json.loads(schema_text)
        if isinstance(parsed, dict):
            schema = parsed
    except (ExtractionError, json.JSONDecodeError):
        schema = {}
    return source, schema
