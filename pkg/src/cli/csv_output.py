from __future__ import annotations

from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Any, Iterable, Optional

import pandas as pd

from src.cli.scene_config import RunConfig, format_scene
from src.physics.model import SceneConfig
from utils.config import TOOL_NAME, TOOL_VERSION, cli_logger
from utils.exceptions import OutputWriteError


def _flatten(row: Any) -> dict[str, Any]:
    """Dataclass or mapping to a flat dict; complex values become `_re`/`_im` columns."""
    record = asdict(row) if is_dataclass(row) else dict(row)
    flat: dict[str, Any] = {}
    for key, value in record.items():
        if isinstance(value, complex):
            flat[f"{key}_re"], flat[f"{key}_im"] = value.real, value.imag
        else:
            flat[key] = value
    return flat


def header_line(config: RunConfig, scene: SceneConfig) -> str:
    """Comment line with the tool version, the subcommand and the full scene echo."""
    return f"# {TOOL_NAME} {TOOL_VERSION} {config.subcommand} " + " ".join(format_scene(scene))


def emit_csv(rows: Iterable[Any], config: RunConfig, scene: SceneConfig, columns: Optional[list[str]] = None) -> str:
    """
    Render result rows as deterministic CSV text.

    Args:
        rows (Iterable[Any]): Dataclasses or mappings, one per output line.
        config (RunConfig): Supplies the precision and the subcommand.
        scene (SceneConfig): Echoed into the header comment.
        columns (Optional[list[str]]): Column order; the order of the first row when omitted.

    Returns:
        str: Header comment, column names and one line per row, newline terminated.
    """
    records = [_flatten(row) for row in rows]
    frame = pd.DataFrame.from_records(records, columns=columns)
    body = frame.to_csv(index=False, float_format=config.float_format, lineterminator="\n")
    return header_line(config, scene) + "\n" + body


def write_output(text: str, path: Optional[str], stream) -> None:
    """
    Write CSV text to a file, or to the given stream when no path is set.

    Raises:
        OutputWriteError: If the file cannot be written; the message names the path.
    """
    if path is None:
        stream.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8", newline="")
    except OSError as e:
        cli_logger.error(f"Could not write {path}: {e}")
        raise OutputWriteError(f"{path}: {e}") from e
    cli_logger.info(f"Wrote {len(text.splitlines()) - 2} row(s) to {path}")
