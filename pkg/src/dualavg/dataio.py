"""LibSVM text format: parsing, writing, densifying and subsampling."""
from __future__ import annotations

import gzip
import io
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import ContractError, ParseError
from .problems import svm_problem

_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_LABEL_RE = re.compile(rf"^{_NUMBER}$")
_ENTRY_RE = re.compile(rf"^(\d+):({_NUMBER})$")


@dataclass(frozen=True)
class SparseExample:
    label: int
    entries: tuple  # ((index, value), ...), 1-based strictly increasing indices


def _lines(stream):
    if isinstance(stream, (bytes, bytearray)):
        stream = io.BytesIO(stream)
    elif isinstance(stream, str):
        stream = io.StringIO(stream)
    for raw in stream:
        yield raw.decode("utf-8") if isinstance(raw, (bytes, bytearray)) else raw


def _parse_line(text, lineno):
    tokens = text.split()
    if not _LABEL_RE.match(tokens[0]):
        raise ParseError(f"label {tokens[0]!r} is not a number", lineno)
    label = float(tokens[0])
    entries = []
    prev = 0
    for tok in tokens[1:]:
        m = _ENTRY_RE.match(tok)
        if m is None:
            raise ParseError(f"malformed feature {tok!r}; expected index:value", lineno)
        idx = int(m.group(1))
        if idx < 1:
            raise ParseError(f"feature index must be positive, got {idx}", lineno)
        if idx <= prev:
            raise ParseError(f"feature indices must be strictly increasing ({prev} then {idx})",
                             lineno)
        entries.append((idx, float(m.group(2))))
        prev = idx
    return label, tuple(entries)


def _label_map(raw_labels):
    distinct = sorted(set(raw_labels))
    if set(distinct) <= {-1.0, 1.0}:
        return {v: int(v) for v in distinct}
    if len(distinct) > 2:
        raise ContractError(f"expected two classes, found labels {distinct[:5]}")
    if len(distinct) == 1:
        # a lone 0 is the negative class of a {0,1} file; anything else is positive
        return {distinct[0]: -1 if distinct[0] == 0 else 1}
    lo, hi = distinct
    return {lo: -1, hi: 1}


def parse_libsvm(stream) -> tuple[list[SparseExample], int]:
    """Parse LibSVM text from a file object, ``bytes`` or ``str``.

    Returns the examples and the inferred dimension (largest index seen).
    Blank lines and ``#`` comments are ignored. Labels are normalized to
    -1/+1; any two-class labelling such as {0, 1} or {1, 2} maps its larger
    label to +1.
    """
    raw = []
    for lineno, line in enumerate(_lines(stream), start=1):
        body = line.split("#", 1)[0].strip()
        if body:
            raw.append(_parse_line(body, lineno))
    mapping = _label_map([lab for lab, _ in raw])
    examples = [SparseExample(mapping[lab], ent) for lab, ent in raw]
    dim = max((ent[-1][0] for _, ent in raw if ent), default=0)
    return examples, dim


def load_libsvm(path) -> tuple[list[SparseExample], int]:
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    try:
        with opener(path, "rb") as fh:
            return parse_libsvm(fh)
    except OSError as exc:
        raise ContractError(f"cannot read dataset {path}: {exc.strerror or exc}") from exc


def format_libsvm(examples: Iterable[SparseExample]) -> str:
    """Text that :func:`parse_libsvm` reads back to the same examples."""
    out = []
    for ex in examples:
        parts = ["+1" if ex.label > 0 else "-1"]
        parts += [f"{i}:{v!r}" for i, v in ex.entries]
        out.append(" ".join(parts))
    return "".join(line + "\n" for line in out)


def write_libsvm(path, examples):
    Path(path).write_text(format_libsvm(examples))


def densify(examples, dim=None):
    """Dense ``(X, y)``; ``dim`` overrides the inferred width (indices beyond it are errors)."""
    width = max((ex.entries[-1][0] for ex in examples if ex.entries), default=0)
    if dim is None:
        dim = width
    elif width > dim:
        raise ContractError(f"feature index {width} exceeds requested dim {dim}")
    X = np.zeros((len(examples), dim))
    y = np.empty(len(examples))
    for row, ex in enumerate(examples):
        y[row] = ex.label
        for i, v in ex.entries:
            X[row, i - 1] = v
    return X, y


def to_problem(examples, mu, dim=None, name=""):
    if not examples:
        raise ContractError("dataset is empty")
    X, y = densify(examples, dim)
    if X.shape[1] == 0:
        raise ContractError("dataset has no features")
    return svm_problem(X, y, mu, name=name)


def subsample(examples, n, seed):
    """``n`` examples drawn uniformly without replacement, in draw order."""
    if n > len(examples):
        raise ContractError(f"cannot draw {n} examples from {len(examples)}")
    if n < 0:
        raise ContractError("n must be nonnegative")
    picks = np.random.default_rng(seed).choice(len(examples), size=n, replace=False)
    return [examples[i] for i in picks]
