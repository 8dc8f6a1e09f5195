from __future__ import annotations

from .base_converter import ModelConverter, get_converter
from .json_ import dumps, json_float

__all__ = ["ModelConverter", "dumps", "get_converter", "json_float"]


def _doc_test() -> None:
    """
    ```pycon
    >>> import math
    >>> import numpy as np
    >>> from worldsheet.enums import SuccessStatus
    >>> from worldsheet._types import AUTO_DELTA
    >>> from worldsheet.converters import get_converter

    >>> conv = get_converter()
    >>> row = {"status": SuccessStatus.WARNING, "values": np.array([0.5, np.inf]),
    ...        "ratio": math.nan, "shape": (2, np.int64(3))}
    >>> conv.unstructure(row)
    {'status': 'warning', 'values': [0.5, 'inf'], 'ratio': 'nan', 'shape': [2, 3]}
    >>> conv.unstructure(AUTO_DELTA)
    'AUTO'

    ```
    """


if __name__ == "__main__":
    import doctest

    _ = doctest.testmod()
