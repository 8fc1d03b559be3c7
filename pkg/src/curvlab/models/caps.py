"""State-count guard shared by the model builders."""

import os

from ..errors import TooLargeError

DEFAULT_STATE_CAP = 20_000
_ENV_VAR = "CURVLAB_STATE_CAP"


def state_cap() -> int:
    raw = os.environ.get(_ENV_VAR)
    if raw is None:
        return DEFAULT_STATE_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"{_ENV_VAR} must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise ValueError(f"{_ENV_VAR} must be positive, got {cap}")
    return cap


def check_state_count(count: int, what: str) -> None:
    cap = state_cap()
    if count > cap:
        raise TooLargeError(
            f"{what} needs {count} states, above the cap of {cap} "
            f"(override with {_ENV_VAR})"
        )
