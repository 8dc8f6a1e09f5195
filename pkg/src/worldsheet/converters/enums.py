from __future__ import annotations

from enum import Enum
from typing import Any

from cattrs import Converter

from ..enums import BaseStrEnum
from ._raise_util import raise_type_error


def base_enum(value: Enum) -> str:
    return str(value.value)


def res_base_str_enum(value: Any, t: type[BaseStrEnum]) -> BaseStrEnum:
    """
    Catalog ids from YAML are matched case-insensitively; `-` and `_` are
    interchangeable.

    ```pycon
    >>> from worldsheet.enums import OracleName, MetricKind
    >>> res_base_str_enum("Minkowski_Circle", OracleName)
    <OracleName.MINKOWSKI_CIRCLE: 'minkowski-circle'>
    >>> res_base_str_enum("flrw", MetricKind)
    <MetricKind.FLRW: 'flrw'>

    ```
    """
    if isinstance(value, t):
        return value
    if isinstance(value, str):
        wanted = value.strip().lower().replace("_", "-")
        for member in t:
            if str(member.value).replace("_", "-") == wanted:
                return member
    raise_type_error(value, t, ", ".join(str(m) for m in t))


def register_enum_hooks(conv: Converter) -> None:
    conv.register_unstructure_hook(Enum, base_enum)
    conv.register_structure_hook(BaseStrEnum, res_base_str_enum)
