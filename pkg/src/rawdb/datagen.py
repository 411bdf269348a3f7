"""Synthetic key-distribution generators for benchmarking.

Six distributions over r records with target group-by cardinality c:

  rseq       c segments in key order, segment i holds r/c copies of key i
  rseq_shf   rseq, uniformly shuffled
  hhit       one seed-chosen key takes floor(r/2) records, the other c-1
             keys appear at least once, remainder drawn from them uniformly
  hhit_shf   hhit, uniformly shuffled
  zipf       i.i.d. draws from rank weights k^(-e), k = 1..c
  movc       key i uniform in [floor((c-W)i/r), floor((c-W)i/r)+W]

rseq/rseq_shf/hhit/hhit_shf hit cardinality c exactly; zipf/movc are
probabilistic (observed cardinality <= c). All randomness comes from one
seeded generator per spec, so equal specs give byte-identical output.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import (
    CardinalityInfeasibleError,
    IndivisibleSizeError,
    WindowExceedsCardinalityError,
)

DISTRIBUTIONS = ("rseq", "rseq_shf", "hhit", "hhit_shf", "zipf", "movc")


@dataclass(frozen=True)
class DatasetSpec:
    distribution: str
    r: int
    c: int
    e: float = 0.5  # zipf exponent
    W: int = 64  # movc window size
    seed: int = 0

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if not (self.r >= self.c >= 1):
            raise ValueError(f"need r >= c >= 1, got r={self.r} c={self.c}")


def generate(spec: DatasetSpec) -> np.ndarray:
    fn = {
        "rseq": gen_rseq,
        "rseq_shf": gen_rseq_shf,
        "hhit": lambda s: gen_hhit(s, shuffled=False),
        "hhit_shf": lambda s: gen_hhit(s, shuffled=True),
        "zipf": gen_zipf,
        "movc": gen_movc,
    }[spec.distribution]
    return fn(spec)


def gen_rseq(spec: DatasetSpec) -> np.ndarray:
    """Non-decreasing keys: segment i (1..c) holds r/c copies of key i."""
    if spec.r % spec.c != 0:
        raise IndivisibleSizeError(f"c={spec.c} does not divide r={spec.r}")
    return np.repeat(np.arange(1, spec.c + 1, dtype=np.int64), spec.r // spec.c)


def gen_rseq_shf(spec: DatasetSpec) -> np.ndarray:
    keys = gen_rseq(spec)
    rng = np.random.default_rng(spec.seed)
    rng.shuffle(keys)
    return keys


def gen_hhit(spec: DatasetSpec, shuffled: bool) -> np.ndarray:
    """Heavy hitter: floor(r/2) copies of one key, c-1 others at least once.

    Unshuffled layout is positional: the hitter fills the first floor(r/2)
    slots, then each remaining key once, then uniform draws from the
    remaining keys.
    """
    r, c = spec.r, spec.c
    if r < 2 * c:
        raise CardinalityInfeasibleError(f"need r >= 2c, got r={r} c={c}")
    rng = np.random.default_rng(spec.seed)
    keys = np.arange(1, c + 1, dtype=np.int64)
    hitter = rng.integers(1, c + 1) if c > 1 else 1
    others = keys[keys != hitter]
    half = r // 2
    fill = r - half - len(others)
    parts = [np.full(half, hitter, dtype=np.int64), others]
    if fill > 0:
        if len(others) > 0:
            parts.append(rng.choice(others, size=fill))
        else:
            parts.append(np.full(fill, hitter, dtype=np.int64))
    out = np.concatenate(parts)
    if shuffled:
        rng.shuffle(out)
    return out


def gen_zipf(spec: DatasetSpec) -> np.ndarray:
    """r i.i.d. draws from rank weights w(k) = k^(-e), k = 1..c."""
    ranks = np.arange(1, spec.c + 1, dtype=np.float64)
    weights = ranks ** (-spec.e)
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    rng = np.random.default_rng(spec.seed)
    u = rng.random(spec.r)
    return (np.searchsorted(cdf, u, side="right") + 1).astype(np.int64)


def gen_movc(spec: DatasetSpec) -> np.ndarray:
    """Sliding-window keys: key i uniform in [lo(i), lo(i)+W],
    lo(i) = floor((c-W)*i/r)."""
    r, c, w = spec.r, spec.c, spec.W
    if w > c:
        raise WindowExceedsCardinalityError(f"window W={w} exceeds cardinality c={c}")
    rng = np.random.default_rng(spec.seed)
    i = np.arange(r, dtype=np.int64)
    lo = (c - w) * i // r
    return lo + rng.integers(0, w + 1, size=r)


def window_bounds(spec: DatasetSpec, i: int) -> tuple[int, int]:
    """Inclusive [lo, hi] window for the i-th movc key."""
    lo = (spec.c - spec.W) * i // spec.r
    return lo, lo + spec.W


def write_dataset(keys, path: str, fmt: str = "csv", value_rule=None) -> None:
    """Write (key, value) rows in an engine-ingestible format.

    value_rule maps key -> value; default is value = key. csv output has a
    header row; tbl output is headerless pipe-delimited.
    """
    if fmt not in ("csv", "tbl"):
        raise ValueError(f"unsupported output format {fmt!r}")
    rule = value_rule if value_rule is not None else (lambda k: k)
    with open(path, "w", newline="") as f:
        if fmt == "csv":
            writer = csv.writer(f)
            writer.writerow(["key", "value"])
            writer.writerows((int(k), rule(int(k))) for k in keys)
        else:
            for k in keys:
                f.write(f"{int(k)}|{rule(int(k))}|\n")


def records_for_aggregation(spec: DatasetSpec) -> tuple[np.ndarray, np.ndarray]:
    """(keys, values) pair for the aggregation harness; value = key as float."""
    keys = generate(spec)
    return keys, keys.astype(np.float64)
