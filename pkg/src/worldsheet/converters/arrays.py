"""ndarray hooks: nested lists out, float64 arrays in."""

from __future__ import annotations

from typing import Any

import numpy as np
from cattrs import Converter

from .._types import FloatArray
from ._raise_util import raise_type_error
from .json_ import json_float


def des_ndarray(value: np.ndarray[Any, Any]) -> Any:
    """
    ```pycon
    >>> import numpy as np
    >>> des_ndarray(np.array([[1.0, np.nan]]))
    [[1.0, 'nan']]

    ```
    """
    if value.ndim == 0:
        return json_float(float(value))
    return [des_ndarray(row) for row in value]


def res_ndarray(value: Any, _: type[Any]) -> FloatArray:
    if isinstance(value, np.ndarray):
        return value.astype(np.float64)
    if isinstance(value, (list, tuple, int, float)):
        try:
            return np.asarray(value, dtype=np.float64)
        except ValueError:
            pass
    raise_type_error(value, "ndarray", "a (nested) list of numbers")


def register_array_hooks(conv: Converter) -> None:
    conv.register_unstructure_hook(np.ndarray, des_ndarray)
    conv.register_structure_hook(np.ndarray, res_ndarray)
    conv.register_unstructure_hook(np.floating, lambda v: json_float(float(v)))
    conv.register_unstructure_hook(np.integer, int)
    conv.register_unstructure_hook(np.bool_, bool)
