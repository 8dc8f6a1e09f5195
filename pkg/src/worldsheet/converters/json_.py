from __future__ import annotations

import json
import math
from collections.abc import Mapping, Sequence
from typing import Any

from cattrs import Converter

from .._types import JSONType

_NON_FINITE = {"nan": math.nan, "inf": math.inf, "-inf": -math.inf}


def json_float(value: float) -> float | str:
    """
    JSON has no NaN or infinity; those travel as strings.

    ```pycon
    >>> json_float(0.5), json_float(float("inf")), json_float(float("nan"))
    (0.5, 'inf', 'nan')

    ```
    """
    if math.isfinite(value):
        return value
    if math.isnan(value):
        return "nan"
    return "inf" if value > 0 else "-inf"


def res_json_float(value: Any, _: type[float]) -> float:
    """
    ```pycon
    >>> res_json_float("-inf", float), res_json_float(3, float)
    (-inf, 3.0)

    ```
    """
    if isinstance(value, str) and value.lower() in _NON_FINITE:
        return _NON_FINITE[value.lower()]
    if isinstance(value, bool):
        raise TypeError(f"Cannot structure {value!r} into float")
    return float(value)


def dumps(payload: JSONType | Mapping[str, Any] | Sequence[Any]) -> str:
    """Stable JSON text: sorted keys, fixed indent, trailing newline."""
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def register_json_hooks(conv: Converter) -> None:
    def _seq(value: Any) -> list[Any]:
        return [conv.unstructure(v) for v in value]

    def _unordered(value: Any) -> list[Any]:
        return _seq(sorted(value, key=str))

    conv.register_unstructure_hook(tuple, _seq)
    conv.register_unstructure_hook(set, _unordered)
    conv.register_unstructure_hook(frozenset, _unordered)
    conv.register_unstructure_hook(float, json_float)
    conv.register_structure_hook(float, res_json_float)


if __name__ == "__main__":
    import doctest

    _ = doctest.testmod()
