"""Event matching shared by the reward DSL and DetectorScript.

uid matching is exact; label matching is case-insensitive. A parameter
filter matches when every provided key exists on the event and its value
matches: strings case-insensitively, numbers by value with 1e-9 tolerance,
booleans exactly, lists element-wise. An empty filter matches anything.
"""

from __future__ import annotations

from typing import Any, Mapping

NUMBER_TOL = 1e-9


def values_match(expected: Any, actual: Any) -> bool:
    if isinstance(expected, bool) or isinstance(actual, bool):
        return expected is actual or expected == actual
    if isinstance(expected, (int, float)) and isinstance(actual, (int, float)):
        return abs(float(expected) - float(actual)) <= NUMBER_TOL
    if isinstance(expected, str) and isinstance(actual, str):
        return expected.lower() == actual.lower()
    if isinstance(expected, (list, tuple)) and isinstance(actual, (list, tuple)):
        return len(expected) == len(actual) and all(
            values_match(e, a) for e, a in zip(expected, actual)
        )
    return expected == actual


def params_match(filter_params: Mapping[str, Any] | None,
                 event_params: Mapping[str, Any]) -> bool:
    if not filter_params:
        return True
    for key, expected in filter_params.items():
        if key not in event_params:
            return False
        if not values_match(expected, event_params[key]):
            return False
    return True


def identifier_matches(query: str, uid: str, label: str | None) -> bool:
    if query == uid:
        return True
    return label is not None and query.lower() == label.lower()
