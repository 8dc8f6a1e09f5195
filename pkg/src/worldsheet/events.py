from __future__ import annotations

import json
import logging
from collections.abc import Mapping

import attr
from typing_extensions import override

from ._types import JSONType, LoggerEvent, LoggerEventProto
from .enums import SuccessStatus


@attr.define(frozen=True)
class SolverEvent(LoggerEvent):
    """
    ```pycon
    >>> ev = SolverEvent("strip.solved", SuccessStatus.SUCCESS, {"rows": 3})
    >>> render_event(ev)
    'event=strip.solved status=success details={"rows":3}'

    ```
    """

    _event: str
    _status: SuccessStatus = SuccessStatus.SUCCESS
    _details: Mapping[str, JSONType] = attr.field(factory=dict)

    @property
    @override
    def event(self) -> str:
        return self._event

    @property
    @override
    def status(self) -> str:
        return str(self._status)

    @property
    @override
    def details(self) -> Mapping[str, JSONType]:
        return self._details


def render_event(ev: LoggerEventProto) -> str:
    payload = json.dumps(dict(ev.details), separators=(",", ":"), default=str)
    return f"event={ev.event} status={ev.status} details={payload}"


def log_event(
    logger: logging.Logger, ev: LoggerEventProto, level: int = logging.INFO
) -> None:
    if logger.isEnabledFor(level):
        logger.log(level, "%s", render_event(ev))


if __name__ == "__main__":
    import doctest

    _ = doctest.testmod()
