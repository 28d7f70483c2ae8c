"""Random orderings of integer labels driven by a quasi-uniform measure.

Each label independently draws a conjugate pair (x, y).  Label m sits below
label n exactly when x_m < x_n, or y_m < y_n, or the pairs coincide at an
atom, in which case a right atom (x > y) keeps the natural label order and a
left atom (x < y) reverses it.  The resulting random order is invariant
under order-preserving relabelling, and the rank of a label inside a large
window recovers its pair: lower-window ranks converge to x, upper-window
ranks to y.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .errors import IncomparableSamples, WindowTooSmall
from .measure import (
    ConjugateSample,
    MeasureMixture,
    QuasiUniformMeasure,
    cell_decomposition,
    locate_sample,
    sample_conjugate_batch,
    sample_conjugate_pair,
)
from .permutations import Perm
from . import stats as _stats

OrderingSource = Union[QuasiUniformMeasure, MeasureMixture]

__all__ = [
    "OrderingSample",
    "EmpiricalPosition",
    "MeasureMixture",
    "compare",
    "sample_ordering",
    "sample_ordering_batch",
    "ordering_counts",
    "empirical_positions",
    "exchangeability_test",
]


def check_labels(labels: Sequence[int]) -> tuple[int, ...]:
    out = tuple(int(v) for v in labels)
    if len(out) == 0:
        raise ValueError("need at least one label")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ValueError(f"labels must be strictly increasing: {labels}")
    return out


def compare(
    sample_m: ConjugateSample, sample_n: ConjugateSample, m: int, n: int
) -> bool:
    """True when label m sits below label n.

    Both samples must come from the same measure.  Raises
    IncomparableSamples when the pairs coincide without an atom to orient
    them (identical diffuse draws, a probability-zero event).
    """
    if m == n:
        raise ValueError("labels must differ")
    if sample_m.x < sample_n.x or sample_m.y < sample_n.y:
        return True
    if sample_m.x == sample_n.x and sample_m.y == sample_n.y:
        if sample_m.x > sample_m.y:
            return m < n
        if sample_m.x < sample_m.y:
            return n < m
        raise IncomparableSamples(
            f"labels {m} and {n} drew identical diffuse value {sample_m.x}"
        )
    return False


@dataclass(frozen=True)
class OrderingSample:
    """A sampled total order: ranking[i] is the rank (1 = lowest) of labels[i]."""

    labels: tuple[int, ...]
    ranking: Perm
    samples: tuple[ConjugateSample, ...]

    def rank_of(self, label: int) -> int:
        return self.ranking[self.labels.index(label)]

    def as_permutation(self) -> Perm:
        return self.ranking

    def sorted_labels(self) -> tuple[int, ...]:
        order = sorted(range(len(self.labels)), key=lambda i: self.ranking[i])
        return tuple(self.labels[i] for i in order)


def _resolve_component(
    source: OrderingSource, rng: np.random.Generator
) -> QuasiUniformMeasure:
    if isinstance(source, MeasureMixture):
        return source.sample_component(rng)
    return source


def sample_ordering(
    source: OrderingSource, labels: Sequence[int], rng: np.random.Generator
) -> OrderingSample:
    """Draw one ordering of the labels (one pair per label, then sort).

    For a mixture, a single component is drawn for the whole ordering.
    """
    labels = check_labels(labels)
    measure = _resolve_component(source, rng)
    samples = tuple(sample_conjugate_pair(measure, rng) for _ in labels)
    keys = []
    for idx, s in enumerate(samples):
        if s.x > s.y:
            third = idx
        elif s.x < s.y:
            third = -idx
        else:
            third = 0
        keys.append((s.x, s.y, third))
    order = sorted(range(len(labels)), key=lambda i: keys[i])
    for a, b in zip(order, order[1:]):
        if keys[a] == keys[b]:
            raise IncomparableSamples(
                f"labels {labels[a]} and {labels[b]} drew identical diffuse values"
            )
    ranking = [0] * len(labels)
    for pos, idx in enumerate(order):
        ranking[idx] = pos + 1
    if __debug__:
        for a, b in zip(order, order[1:]):
            assert compare(samples[a], samples[b], labels[a], labels[b]), (
                f"sorted order violates the comparator at {labels[a]}, {labels[b]}"
            )
    return OrderingSample(labels, tuple(ranking), samples)


def sample_ordering_batch(
    source: OrderingSource,
    labels: Sequence[int],
    size: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Vectorized ordering draws; returns a (size, n) array of rankings.

    Floating-point coincidences (probability ~2^-52 per pair) fall back to
    natural label order instead of raising; the scalar path stays exact.
    """
    labels = check_labels(labels)
    n = len(labels)
    if isinstance(source, MeasureMixture):
        weights = np.array([float(w) for w, _ in source.components])
        weights = weights / weights.sum()
        which = rng.choice(len(weights), size=size, p=weights)
        out = np.empty((size, n), dtype=np.int64)
        for ci, (_, m) in enumerate(source.components):
            mask = which == ci
            count = int(mask.sum())
            if count:
                out[mask] = sample_ordering_batch(m, labels, count, rng)
        return out
    batch = sample_conjugate_batch(source, (size, n), rng)
    asc = (np.arange(n) + 1.0) / (n + 2.0)
    within = np.where(
        batch.sign == 0, batch.rel, np.where(batch.sign > 0, asc, 1.0 - asc)
    )
    key = batch.cell.astype(np.float64) + within
    order = np.argsort(key, axis=1, kind="stable")
    return np.argsort(order, axis=1, kind="stable") + 1


def ordering_counts(
    source: OrderingSource,
    labels: Sequence[int],
    size: int,
    rng: np.random.Generator,
    chunk: int = 1_000_000,
) -> dict[Perm, int]:
    """Histogram of sampled rankings over `size` draws, in chunks."""
    labels = check_labels(labels)
    n = len(labels)
    mult = (n + 1) ** np.arange(n, dtype=np.int64)
    totals: dict[int, int] = {}
    remaining = size
    while remaining > 0:
        take = min(chunk, remaining)
        ranks = sample_ordering_batch(source, labels, take, rng)
        codes = ranks @ mult
        vals, counts = np.unique(codes, return_counts=True)
        for v, c in zip(vals.tolist(), counts.tolist()):
            totals[v] = totals.get(v, 0) + c
        remaining -= take
    out: dict[Perm, int] = {}
    for code, count in totals.items():
        digits = []
        v = code
        for _ in range(n):
            digits.append(v % (n + 1))
            v //= n + 1
        out[tuple(digits)] = count
    return out


@dataclass(frozen=True)
class EmpiricalPosition:
    """Window-rank estimates of a label's conjugate pair.

    x_hat averages the indicator {k below target} over the window labels
    k < target, y_hat over k > target; both are normalized by the window
    half-width, the target itself excluded.
    """

    label: int
    window: int
    x_hat: float
    y_hat: float
    target: ConjugateSample


def empirical_positions(
    source: OrderingSource,
    target_label: int,
    window: int,
    rng: np.random.Generator,
) -> EmpiricalPosition:
    """Estimate the target's pair from one ordering of labels -N..N."""
    target_label = int(target_label)
    n_half = int(window)
    if n_half < 1 or abs(target_label) > n_half:
        raise WindowTooSmall(
            f"window [-{n_half}, {n_half}] does not contain label {target_label}"
        )
    measure = _resolve_component(source, rng)
    target = sample_conjugate_pair(measure, rng)
    cell_t, rel_t = locate_sample(measure, target)
    cells = cell_decomposition(measure).cells
    sign_t = 0
    if target.gap_index is not None:
        sign_t = 1 if cells[cell_t].atom_side == "right" else -1

    others = np.arange(-n_half, n_half + 1)
    others = others[others != target_label]
    batch = sample_conjugate_batch(measure, others.shape, rng)
    lower = others < target_label
    below_cell = batch.cell < cell_t
    same_cell = batch.cell == cell_t
    if sign_t == 0:
        tie_lower = batch.rel < rel_t
        tie_upper = tie_lower
    elif sign_t > 0:
        tie_lower = np.ones_like(lower)
        tie_upper = np.zeros_like(lower)
    else:
        tie_lower = np.zeros_like(lower)
        tie_upper = np.ones_like(lower)
    below = below_cell | (same_cell & np.where(lower, tie_lower, tie_upper))
    x_hat = float(np.count_nonzero(below & lower)) / n_half
    y_hat = float(np.count_nonzero(below & ~lower)) / n_half
    return EmpiricalPosition(target_label, n_half, x_hat, y_hat, target)


def exchangeability_test(
    source: OrderingSource,
    labels_a: Sequence[int],
    labels_b: Sequence[int],
    samples: int,
    rng: np.random.Generator,
    alpha: float = 0.001,
):
    """Two-sample test that order-isomorphic label sets order identically."""
    labels_a = check_labels(labels_a)
    labels_b = check_labels(labels_b)
    if len(labels_a) != len(labels_b):
        raise ValueError("label sets must have equal size")
    counts_a = ordering_counts(source, labels_a, samples, rng)
    counts_b = ordering_counts(source, labels_b, samples, rng)
    return _stats.chi_square_two_sample(counts_a, counts_b, alpha=alpha)
