"""ASCII (P2) PGM label maps, one value per grid node."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import CountMismatch, HeaderError, ParseError

MAX_PGM_VALUE = 65535


def format_pgm(labels) -> str:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 2 or labels.size == 0:
        raise ValueError("label map must be a non-empty 2-D array")
    if labels.min() < 0 or labels.max() > MAX_PGM_VALUE:
        raise ValueError(f"labels must lie in [0, {MAX_PGM_VALUE}]")
    height, width = labels.shape
    # maxval must be positive even for an all-background map
    maxval = max(1, int(labels.max()))
    rows = [" ".join(str(v) for v in row) for row in labels.tolist()]
    return f"P2\n{width} {height}\n{maxval}\n" + "\n".join(rows) + "\n"


def write_pgm(path, labels) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_pgm(labels))


def parse_pgm(text: str) -> np.ndarray:
    tokens = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        for tok in line.split("#", 1)[0].split():
            tokens.append((lineno, tok))
    if not tokens or tokens[0][1] != "P2":
        raise HeaderError("expected ASCII PGM magic 'P2'", tokens[0][0] if tokens else 1)
    if len(tokens) < 4:
        raise HeaderError("truncated PGM header", tokens[-1][0])
    try:
        width, height, maxval = (int(tok) for _, tok in tokens[1:4])
    except ValueError:
        raise HeaderError("PGM header fields must be integers", tokens[1][0]) from None
    if width < 1 or height < 1 or not 1 <= maxval <= MAX_PGM_VALUE:
        raise HeaderError("invalid PGM dimensions or maxval", tokens[1][0])
    body = tokens[4:]
    if len(body) != width * height:
        raise CountMismatch(
            f"expected {width * height} samples, found {len(body)}",
            body[-1][0] if body else tokens[3][0],
        )
    values = np.empty(width * height, dtype=np.int64)
    for k, (lineno, tok) in enumerate(body):
        try:
            values[k] = int(tok)
        except ValueError:
            raise ParseError(f"non-integer sample {tok!r}", lineno) from None
        if not 0 <= values[k] <= maxval:
            raise ParseError(f"sample {values[k]} outside [0, {maxval}]", lineno)
    return values.reshape(height, width)


def read_pgm(path) -> np.ndarray:
    return parse_pgm(Path(path).read_text(encoding="ascii"))
