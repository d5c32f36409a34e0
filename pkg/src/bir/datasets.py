"""Reading positive-valued data files and the bundled guinea-pig survival data."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .exceptions import BIRError

__all__ = ["Dataset", "DataError", "parse_values", "load_data", "guinea_pigs", "GUINEA_SHA256"]

GUINEA_SHA256 = "6638f94747f66ed0abb9a9cf233c0a81bf04d26d4fa98eb20253bc9aa532f89e"
BUILTIN_PREFIX = "builtin:"
_SEPARATORS = re.compile(r"[,\s;]+")


class DataError(BIRError, ValueError):
    """A data file is unreadable or contains invalid values."""


@dataclass(frozen=True)
class Dataset:
    values: np.ndarray
    label: str

    def __len__(self):
        return int(self.values.size)


def parse_values(text, label="<text>"):
    """Parse numbers separated by commas, semicolons or whitespace; ``#`` starts a comment.

    Nonpositive or non-numeric entries raise :class:`DataError` naming the line.
    """
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for token in _SEPARATORS.split(line):
            if not token:
                continue
            try:
                v = float(token)
            except ValueError:
                raise DataError(f"{label}:{lineno}: not a number: {token!r}") from None
            if not (v > 0.0 and np.isfinite(v)):
                raise DataError(f"{label}:{lineno}: values must be finite and positive, got {token}")
            values.append(v)
    if not values:
        raise DataError(f"{label}: no data values found")
    return Dataset(np.array(values, dtype=float), label)


def guinea_pigs():
    """The 72 guinea-pig survival times bundled with the package (checksum verified)."""
    raw = resources.files("bir").joinpath("data", "guinea.txt").read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    if digest != GUINEA_SHA256:
        raise DataError(f"bundled guinea data checksum mismatch: {digest}")
    return parse_values(raw.decode("utf-8"), label="builtin:guinea")


def load_data(source):
    """Load a dataset from a path or the ``builtin:guinea`` tag."""
    if source.startswith(BUILTIN_PREFIX):
        name = source[len(BUILTIN_PREFIX):]
        if name != "guinea":
            raise DataError(f"unknown builtin dataset {name!r}; available: guinea")
        return guinea_pigs()
    try:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {source}: {exc}") from exc
    return parse_values(text, label=source)
