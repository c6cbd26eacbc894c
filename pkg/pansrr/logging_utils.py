import json
import logging
import os
import sys
from typing import Any

import numpy as np

LOGGER_NAME = "pansrr"


def setup_logging(level: int | None = None) -> logging.Logger:
    logger = logging.getLogger(LOGGER_NAME)
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        formatter = logging.Formatter("%(message)s")
        handler.setFormatter(formatter)
        logger.addHandler(handler)
    if level is None:
        level = logging.getLevelName(os.getenv("PANSRR_LOG_LEVEL", "INFO").upper())
        if not isinstance(level, int):
            level = logging.INFO
    logger.setLevel(level)
    return logger


def _plain(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, os.PathLike):
        return os.fspath(value)
    return value


def log_event(event: str, level: int = logging.INFO, **kwargs: Any) -> None:
    logger = logging.getLogger(LOGGER_NAME)
    if not logger.isEnabledFor(level):
        return
    payload = {"event": event, **{k: _plain(v) for k, v in kwargs.items()}}
    try:
        logger.log(level, json.dumps(payload))
    except (TypeError, ValueError):
        logger.log(level, payload)
