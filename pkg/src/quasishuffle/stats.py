"""Statistical checks used to compare samplers against exact references.

Counts stay exact (integers / Fractions); only tail probabilities go
through floating point.  Chi-square tests pool cells until every expected
count reaches 5, the usual validity rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.special import kolmogorov
from scipy.stats import chi2

from .errors import DimensionMismatch, EmptyCounts, OutOfRange

MIN_EXPECTED = 5.0


@dataclass(frozen=True)
class TestReport:
    name: str
    statistic: float
    p_value: float
    samples: int
    alpha: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "samples": self.samples,
            "alpha": self.alpha,
            "passed": self.passed,
            "detail": {k: str(v) for k, v in self.detail.items()},
        }


def _pool(cells: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Merge smallest-expected cells until all expecteds reach MIN_EXPECTED."""
    cells = sorted(cells)
    while len(cells) > 1 and cells[0][0] < MIN_EXPECTED:
        (e0, o0), (e1, o1) = cells[0], cells[1]
        cells = sorted([(e0 + e1, o0 + o1)] + cells[2:])
    return cells


def chi_square_goodness(
    counts: Mapping, expected: Mapping, alpha: float = 0.01
) -> TestReport:
    """Pearson goodness-of-fit of observed counts against exact probabilities.

    `expected` maps outcomes to probabilities (Fractions or floats) summing
    to one; outcomes observed outside its support are a mismatch.
    """
    total = sum(int(c) for c in counts.values())
    if total <= 0:
        raise EmptyCounts("no observations")
    for key in counts:
        if key not in expected:
            raise DimensionMismatch(f"observed outcome {key!r} has zero expected mass")
    cells = [
        (float(p) * total, float(counts.get(key, 0))) for key, p in expected.items()
    ]
    cells = _pool(cells)
    if len(cells) < 2:
        return TestReport("chi_square_goodness", 0.0, 1.0, total, alpha, True,
                          {"df": 0, "note": "support too small after pooling"})
    stat = sum((o - e) ** 2 / e for e, o in cells)
    df = len(cells) - 1
    p = float(chi2.sf(stat, df))
    return TestReport(
        "chi_square_goodness", float(stat), p, total, alpha, p >= alpha, {"df": df}
    )


def chi_square_two_sample(
    counts_a: Mapping, counts_b: Mapping, alpha: float = 0.001
) -> TestReport:
    """Homogeneity test: do two count tables come from one distribution?"""
    total_a = sum(int(c) for c in counts_a.values())
    total_b = sum(int(c) for c in counts_b.values())
    if total_a <= 0 or total_b <= 0:
        raise EmptyCounts("both samples need observations")
    keys = sorted(set(counts_a) | set(counts_b))
    grand = total_a + total_b
    # cells carry (pooled expected, (obs_a, obs_b, col_total)) per outcome
    cols = [
        (float(counts_a.get(k, 0)), float(counts_b.get(k, 0))) for k in keys
    ]
    merged = sorted(
        ((a + b) * min(total_a, total_b) / grand, a, b) for a, b in cols
    )
    while len(merged) > 1 and merged[0][0] < MIN_EXPECTED:
        (e0, a0, b0), (e1, a1, b1) = merged[0], merged[1]
        merged = sorted([(e0 + e1, a0 + a1, b0 + b1)] + merged[2:])
    if len(merged) < 2:
        return TestReport("chi_square_two_sample", 0.0, 1.0, grand, alpha, True,
                          {"df": 0, "note": "support too small after pooling"})
    stat = 0.0
    for _, a, b in merged:
        col = a + b
        for obs, row_total in ((a, total_a), (b, total_b)):
            exp = row_total * col / grand
            stat += (obs - exp) ** 2 / exp
    df = len(merged) - 1
    p = float(chi2.sf(stat, df))
    return TestReport(
        "chi_square_two_sample", float(stat), p, grand, alpha, p >= alpha, {"df": df}
    )


def _ks_statistic(sorted_samples: np.ndarray, cdf_at, cdf_left_at) -> float:
    n = len(sorted_samples)
    grid_hi = np.arange(1, n + 1) / n
    grid_lo = np.arange(0, n) / n
    d_plus = float(np.max(grid_hi - cdf_at))
    d_minus = float(np.max(cdf_left_at - grid_lo))
    return max(d_plus, d_minus, 0.0)


def ks_uniform(samples: Sequence[float], alpha: float = 0.01) -> TestReport:
    """Kolmogorov-Smirnov against the uniform law on [0,1] (asymptotic p)."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = len(x)
    if n == 0:
        raise EmptyCounts("no samples")
    if x[0] < 0.0 or x[-1] > 1.0:
        raise OutOfRange("samples must lie in [0,1]")
    stat = _ks_statistic(x, x, x)
    p = float(kolmogorov(stat * np.sqrt(n)))
    return TestReport("ks_uniform", stat, p, n, alpha, p >= alpha, {})


def ks_measure_marginal(samples: Sequence[float], measure, alpha: float = 0.01) -> TestReport:
    """KS of samples against a quasi-uniform measure's CDF.

    Uses the left-limit CDF below each sample so atoms are handled
    correctly; the asymptotic p-value is conservative at atoms.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = len(x)
    if n == 0:
        raise EmptyCounts("no samples")
    if x[0] < 0.0 or x[-1] > 1.0:
        raise OutOfRange("samples must lie in [0,1]")
    points = sorted({Fraction(0), Fraction(1)} | {g.lo for g in measure.gaps} | {g.hi for g in measure.gaps})
    bp = np.array([float(p) for p in points])
    cdf_at_bp = np.array([float(measure.cdf(p)) for p in points])
    left_at_bp = np.array([float(measure.cdf_left(p)) for p in points])
    slope = np.zeros(len(points) - 1)
    for i, (a, b) in enumerate(zip(points, points[1:])):
        mid = (a + b) / 2
        inside_gap = any(g.lo < mid < g.hi for g in measure.gaps)
        slope[i] = 0.0 if inside_gap else 1.0
    idx = np.clip(np.searchsorted(bp, x, side="left"), 0, len(bp) - 1)
    at_bp = x == bp[idx]
    region = np.clip(np.searchsorted(bp, x, side="right") - 1, 0, len(slope) - 1)
    interp = cdf_at_bp[region] + slope[region] * (x - bp[region])
    # atoms sit only at breakpoints, so off them the CDF is continuous
    cdf_vals = np.where(at_bp, cdf_at_bp[idx], interp)
    left_vals = np.where(at_bp, left_at_bp[idx], interp)
    stat = _ks_statistic(x, cdf_vals, left_vals)
    p = float(kolmogorov(stat * np.sqrt(n)))
    return TestReport("ks_measure_marginal", stat, p, n, alpha, p >= alpha, {})


def empirical_tv(counts: Mapping, reference) -> Fraction:
    """Exact total-variation distance between empirical counts and a reference.

    `reference` is a permutation distribution with fields n and probs.
    """
    total = sum(int(c) for c in counts.values())
    if total <= 0:
        raise EmptyCounts("no observations")
    n = reference.n
    for key in counts:
        if len(key) != n or sorted(key) != list(range(1, n + 1)):
            raise DimensionMismatch(f"count key {key!r} is not a permutation of 1..{n}")
    keys = set(counts) | set(reference.probs)
    acc = Fraction(0)
    for k in keys:
        acc += abs(Fraction(int(counts.get(k, 0)), total) - reference.probs.get(k, Fraction(0)))
    return acc / 2
