from __future__ import annotations

import cattrs

from ..exceptions import SolverFailure, ValidationError
from ._raise_util import raise_type_error


def des_exception_instance(exc: BaseException) -> dict[str, str]:
    """
    ```pycon
    >>> from worldsheet.exceptions import DegenerateDataError
    >>> des_exception_instance(DegenerateDataError(0.5))["family"]
    'validation'

    ```
    """
    if isinstance(exc, ValidationError):
        family = "validation"
    elif isinstance(exc, SolverFailure):
        family = "solver"
    else:
        family = "internal"
    return {"type": type(exc).__name__, "family": family, "message": str(exc)}


def des_exception_type(t: type) -> str:
    if issubclass(t, BaseException):
        return t.__name__
    raise_type_error(t, "BaseException")


def register_exception_hooks(conv: cattrs.Converter) -> None:
    """
    ```pycon
    >>> conv = cattrs.Converter()
    >>> register_exception_hooks(conv)
    >>> conv.unstructure(ValueError("bad"))
    {'type': 'ValueError', 'family': 'internal', 'message': 'bad'}
    >>> conv.unstructure(ValueError)
    'ValueError'

    ```
    """
    conv.register_unstructure_hook(BaseException, des_exception_instance)
    conv.register_unstructure_hook_func(
        lambda t: t is type, des_exception_type
    )


if __name__ == "__main__":
    import doctest

    _ = doctest.testmod()
