"""
Atomic CSV export of tabular artifacts
"""

import hashlib
import os
import tempfile
from pathlib import Path
from typing import Union

import pandas as pd
import structlog

logger = structlog.get_logger(__name__)

FLOAT_FORMAT = "%.17g"


def frame_to_csv_text(frame: pd.DataFrame) -> str:
    """Render a frame exactly as it is written to disk"""
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def frame_digest(frame: pd.DataFrame) -> str:
    """SHA-256 of the CSV rendering, used by determinism checks"""
    return hashlib.sha256(frame_to_csv_text(frame).encode("utf-8")).hexdigest()


def write_csv_atomic(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """Write a frame to CSV via a temporary file and rename"""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    text = frame_to_csv_text(frame)

    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise

    logger.debug("CSV written", path=str(target), rows=len(frame))
    return target
