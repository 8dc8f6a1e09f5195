"""``cattrs`` hooks for attrs classes with fields kept out of payloads"""

# pyright: reportPrivateUsage = false
from __future__ import annotations

from collections.abc import Callable, Iterable
from typing import Any

import attr
import attrs
import cattrs


def _iter_kept(cls: type) -> Iterable[attr.Attribute[Any]]:
    if not attr.has(cls):
        raise TypeError(f"{cls} is not an attrs class")
    for f in attrs.fields(cls):
        if f.metadata.get("omit", False):
            continue
        yield f


def des_omit_factory(
    cls: type,
    conv: cattrs.Converter,
) -> Callable[[Any], dict[str, Any]]:
    """Omit fields whose metadata carries ``omit=True``

    ```pycon
    >>> import attr
    >>> import cattrs
    >>> @attr.define
    ... class Output:
    ...     directory: str = attr.field(default="out", metadata={"omit": True})
    ...     surface_format: str = "csv"

    >>> conv = cattrs.Converter()
    >>> conv.register_unstructure_hook(Output, des_omit_factory(Output, conv))
    >>> conv.unstructure(Output())
    {'surface_format': 'csv'}

    ```
    """
    kept = [f.name for f in _iter_kept(cls)]

    def _des(obj: Any) -> dict[str, Any]:
        return {name: conv.unstructure(getattr(obj, name)) for name in kept}

    return _des


def register_attrs_hooks(
    conv: cattrs.Converter,
    *classes: type,
) -> None:
    """Unstructure each class through `des_omit_factory`"""
    for cls in classes:
        conv.register_unstructure_hook(cls, des_omit_factory(cls, conv))


if __name__ == "__main__":
    import doctest

    _ = doctest.testmod()
