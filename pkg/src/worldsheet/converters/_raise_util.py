from __future__ import annotations

from typing import Any

from typing_extensions import LiteralString, Never


def raise_type_error(
    value: Any, t: type | LiteralString, expected: str | None = None
) -> Never:
    """
    ```pycon
    >>> raise_type_error("x", float)
    Traceback (most recent call last):
        ...
    TypeError: Cannot structure 'x' into float (type: str)

    ```
    """
    t_str = t if isinstance(t, str) else t.__name__
    hint = f"; expected {expected}" if expected else ""
    raise TypeError(
        f"Cannot structure {value!r} into {t_str} (type: {type(value).__name__}){hint}"
    )
