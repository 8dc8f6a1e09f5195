from __future__ import annotations

from collections.abc import Callable
from typing import Any, TypeVar, get_args

from cattrs import Converter

from .._types import AutoDeltaSentinel, SentinelMeta
from ._raise_util import raise_type_error

_T_Sentinel = TypeVar("_T_Sentinel", bound=SentinelMeta)


def sentinel_des_hook_factory(cls: type) -> Callable[..., str]:
    return lambda v: str(v)  # pyright: ignore[reportUnknownVariableType]


def sentinel_res_hook_factory(cls: type[_T_Sentinel]) -> Callable[..., _T_Sentinel]:
    def _wrapper(value: Any, _: type[_T_Sentinel]) -> _T_Sentinel:
        if isinstance(value, str) and value.upper() == cls.value():
            return cls.make()
        if isinstance(value, cls):
            return value
        raise_type_error(value, cls, repr(cls.value()))

    return _wrapper


def res_float_or_sentinel(value: Any, t: Any) -> Any:
    """
    `float | <Sentinel>` unions: the sentinel's value string or a number.

    ```pycon
    >>> from worldsheet._types import AUTO_DELTA
    >>> res_float_or_sentinel("auto", float | AutoDeltaSentinel) == AUTO_DELTA
    True
    >>> res_float_or_sentinel(0.25, float | AutoDeltaSentinel)
    0.25

    ```
    """
    (sentinel,) = (a for a in get_args(t) if _is_sentinel(a))
    if isinstance(value, (sentinel, str)):
        return sentinel_res_hook_factory(sentinel)(value, sentinel)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    raise_type_error(value, "float", f"a number or {sentinel.value()!r}")


def _is_sentinel(t: Any) -> bool:
    return isinstance(t, type) and issubclass(t, SentinelMeta)


def _is_float_sentinel_union(t: Any) -> bool:
    args = get_args(t)
    return (
        len(args) == 2
        and float in args
        and any(_is_sentinel(a) for a in args)
    )


def register_sentinel_hooks(conv: Converter) -> None:
    """
    ```pycon
    >>> import cattrs
    >>> from worldsheet._types import AUTO_DELTA
    >>> conv = cattrs.Converter()
    >>> register_sentinel_hooks(conv)
    >>> conv.unstructure(AUTO_DELTA)
    'AUTO'
    >>> conv.structure("AUTO", AutoDeltaSentinel) == AUTO_DELTA
    True
    >>> conv.structure(1, float | AutoDeltaSentinel)
    1.0

    ```
    """
    _ = conv.register_unstructure_hook_factory(_is_sentinel, sentinel_des_hook_factory)
    _ = conv.register_structure_hook_factory(_is_sentinel, sentinel_res_hook_factory)
    conv.register_structure_hook_func(_is_float_sentinel_union, res_float_or_sentinel)


__all__ = ["AutoDeltaSentinel", "register_sentinel_hooks"]


if __name__ == "__main__":
    import doctest

    _ = doctest.testmod()
