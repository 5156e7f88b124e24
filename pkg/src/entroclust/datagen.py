"""Sparse symmetric two-component Gaussian mixtures: X = eps (a + N)."""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DatasetParseError, DomainError


def rng_stream(master_seed, stream_id=0):
    """Counter-based generator keyed by (master_seed, stream_id)."""
    ss = np.random.SeedSequence([int(master_seed) & (2**64 - 1), int(stream_id)])
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True, eq=False)
class MixtureSpec:
    d: int
    s: int
    a: np.ndarray
    a_norm2: float
    a_norm_inf: float
    support: tuple

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.shape != (self.d,):
            raise DomainError("a must have length d")
        if abs(float(np.linalg.norm(a)) - self.a_norm2) > 1e-12 * max(1.0, self.a_norm2):
            raise DomainError("stored a_norm2 does not match a")

    @classmethod
    def from_vector(cls, a):
        a = np.array(a, dtype=float)
        a.setflags(write=False)
        support = tuple(int(i) for i in np.flatnonzero(a))
        return cls(
            d=a.size,
            s=len(support),
            a=a,
            a_norm2=float(np.linalg.norm(a)),
            a_norm_inf=float(np.max(np.abs(a))) if a.size else 0.0,
            support=support,
        )

    def to_dict(self):
        return {
            "d": self.d,
            "s": self.s,
            "a": [float(v) for v in self.a],
            "a_norm2": self.a_norm2,
            "a_norm_inf": self.a_norm_inf,
            "support": list(self.support),
        }


def make_spec(d, s, a_norm2, placement="first_s", seed=0):
    """s equal-magnitude positive coordinates a_i = a_norm2/sqrt(s)."""
    if not (isinstance(d, (int, np.integer)) and d >= 1):
        raise DomainError("d must be a positive integer")
    if not (isinstance(s, (int, np.integer)) and 1 <= s):
        raise DomainError("s must be a positive integer")
    if s > d:
        raise DomainError(f"s={s} exceeds d={d}")
    if not a_norm2 > 0:
        raise DomainError("a_norm2 must be positive")
    if placement == "first_s":
        idx = np.arange(s)
    elif placement == "random":
        idx = np.sort(rng_stream(seed, 0xA).choice(d, size=s, replace=False))
    else:
        raise DomainError(f"unknown placement {placement!r}")
    a = np.zeros(d)
    a[idx] = a_norm2 / math.sqrt(s)
    return MixtureSpec.from_vector(a)


@dataclass(frozen=True, eq=False)
class Dataset:
    n: int
    d: int
    rows: np.ndarray
    seed: int
    labels: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.rows.shape != (self.n, self.d):
            raise DomainError("rows shape does not match (n, d)")
        if not np.all(np.isfinite(self.rows)):
            raise DomainError("rows must be finite")
        if self.labels is not None and not np.all(np.abs(self.labels) == 1):
            raise DomainError("labels must be +-1")

    def without_labels(self):
        return Dataset(n=self.n, d=self.d, rows=self.rows, seed=self.seed, labels=None)


def sample(spec, n, seed):
    """Draw n rows eps_i (a + N_i); labels hold the eps_i."""
    if n < 1:
        raise DomainError("n must be at least 1")
    gen = rng_stream(seed, 1)
    eps = np.where(gen.random(n) < 0.5, -1.0, 1.0)
    noise = gen.standard_normal((n, spec.d))
    rows = eps[:, None] * (np.asarray(spec.a)[None, :] + noise)
    rows.setflags(write=False)
    eps.setflags(write=False)
    return Dataset(n=int(n), d=spec.d, rows=rows, seed=int(seed), labels=eps)


def bayes_labels(dataset, spec):
    """sign(x^t a), ties to +1."""
    z = np.asarray(dataset.rows) @ np.asarray(spec.a)
    return np.where(z >= 0, 1, -1)


def misclassification(pred, truth):
    """Error rate up to a global label flip, in [0, 0.5]."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.size == 0:
        raise DomainError("pred and truth must be nonempty with equal shapes")
    err = float(np.mean(pred != truth))
    return min(err, 1.0 - err)


# ---------------------------------------------------------------- CSV i/o


def _fmt(v):
    return repr(float(v))


def dumps_dataset(dataset):
    buf = io.StringIO()
    buf.write(f"# n={dataset.n} d={dataset.d} seed={dataset.seed}\n")
    has_labels = dataset.labels is not None
    if has_labels:
        buf.write("# labels=present\n")
    for i in range(dataset.n):
        fields = [_fmt(v) for v in dataset.rows[i]]
        if has_labels:
            fields.append(str(int(dataset.labels[i])))
        buf.write(",".join(fields))
        buf.write("\n")
    return buf.getvalue()


def save_dataset(dataset, path):
    text = dumps_dataset(dataset)
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write dataset to {path}: {exc}") from exc


def _parse_header(line):
    if not line.startswith("#"):
        raise DatasetParseError("expected header '# n=<n> d=<d> seed=<seed>'", 1, 1)
    meta = {}
    col = 2
    for tok in line[1:].split():
        col = line.index(tok, col - 1) + 1
        if "=" not in tok:
            raise DatasetParseError(f"bad header token {tok!r}", 1, col)
        k, v = tok.split("=", 1)
        try:
            meta[k] = int(v)
        except ValueError:
            raise DatasetParseError(f"header value for {k!r} is not an integer", 1, col) from None
    for k in ("n", "d", "seed"):
        if k not in meta:
            raise DatasetParseError(f"header is missing {k}=", 1, 1)
    return meta


def loads_dataset(text):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DatasetParseError("empty file", 1, 1)
    meta = _parse_header(lines[0])
    n, d = meta["n"], meta["d"]
    if n < 1 or d < 1:
        raise DatasetParseError("n and d must be positive", 1, 1)
    body_start = 1
    has_labels = False
    if len(lines) > 1 and lines[1].startswith("#"):
        if lines[1].strip() != "# labels=present":
            raise DatasetParseError(f"unknown header line {lines[1]!r}", 2, 1)
        has_labels = True
        body_start = 2
    body = lines[body_start:]
    if len(body) != n:
        raise DatasetParseError(f"expected {n} data rows, found {len(body)}", body_start + len(body) + 1, 1)
    width = d + (1 if has_labels else 0)
    rows = np.empty((n, d))
    labels = np.empty(n) if has_labels else None
    for i, line in enumerate(body):
        lineno = body_start + i + 1
        fields = line.split(",")
        if len(fields) != width:
            col = len(line) + 1 if len(fields) < width else sum(len(f) + 1 for f in fields[:width]) + 1
            raise DatasetParseError(f"expected {width} columns, found {len(fields)}", lineno, col)
        col = 1
        for j, f in enumerate(fields):
            try:
                v = float(f)
            except ValueError:
                raise DatasetParseError(f"not a number: {f!r}", lineno, col) from None
            if not math.isfinite(v):
                raise DatasetParseError(f"non-finite value {f!r}", lineno, col)
            if j < d:
                rows[i, j] = v
            else:
                if v not in (1.0, -1.0):
                    raise DatasetParseError(f"label must be 1 or -1, got {f!r}", lineno, col)
                labels[i] = v
            col += len(f) + 1
    rows.setflags(write=False)
    return Dataset(n=n, d=d, rows=rows, seed=meta["seed"], labels=labels)


def load_dataset(path):
    with open(path, encoding="utf-8") as fh:
        return loads_dataset(fh.read())
