"""Exposes the default converter for this package"""

from __future__ import annotations

from collections.abc import Mapping
from typing import Any

from cattrs.converters import Converter

from .arrays import register_array_hooks
from .attrs_converters import register_attrs_hooks
from .enums import register_enum_hooks
from .exceptions import register_exception_hooks
from .json_ import register_json_hooks
from .sentinels import register_sentinel_hooks


class ModelConverter(Converter):
    """Converter whose payloads are plain JSON values"""

    def to_payload(self, obj: Any) -> Any:
        """Unstructure into plain JSON values; mappings keep their key order."""
        des = self.unstructure(obj)
        if isinstance(des, Mapping):
            return {str(k): v for k, v in des.items()}
        return des


def optional_string_structure_hook(
    value: str | None, _: type[str | None]
) -> str | None:
    """
    YAML `null`, empty strings and the literal "null" all mean "unset".

    ```pycon
    >>> optional_string_structure_hook("  ", str) is None
    True
    >>> optional_string_structure_hook("curve.txt", str)
    'curve.txt'

    ```
    """
    if isinstance(value, str):
        if value.lower() == "null" or value.strip() == "":
            return None
        return value
    if value is None:
        return None
    raise TypeError(f"Cannot structure {value!r} into an optional string")


def get_converter(*, forbid_extra_keys: bool = False, omit: tuple[type, ...] = ()) -> ModelConverter:
    """
    One converter for config structuring and report unstructuring.

    `omit` lists attrs classes whose fields may carry ``metadata={"omit": True}``.
    """
    converter = ModelConverter(forbid_extra_keys=forbid_extra_keys)
    register_json_hooks(converter)
    register_array_hooks(converter)
    register_enum_hooks(converter)
    register_exception_hooks(converter)
    register_sentinel_hooks(converter)
    register_attrs_hooks(converter, *omit)
    converter.register_structure_hook(str | None, optional_string_structure_hook)
    return converter


if __name__ == "__main__":
    import doctest

    _ = doctest.testmod()
