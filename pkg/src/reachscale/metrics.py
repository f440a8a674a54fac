"""Per-trial margin and speed statistics, batch aggregation and nominal-vs-scaled reports."""
import math
from dataclasses import dataclass, fields

import numpy as np

from ._io import write_csv


class EmptyInterval(ValueError):
    """No samples left after masking out freeze and post-arrival samples."""


@dataclass(frozen=True)
class TrialMetrics:
    mean_delta: float
    p5_delta: float
    pct_delta_pos: float
    max_delta: float
    mean_speed: float
    max_speed: float


METRIC_NAMES = tuple(f.name for f in fields(TrialMetrics))

LABELS = {
    "pct_delta_pos": "Samples with delta > 0 (%)",
    "mean_delta": "Mean delta (m/s^2)",
    "p5_delta": "5th percentile of delta (m/s^2)",
    "max_delta": "Max delta (m/s^2)",
    "mean_speed": "Mean speed (m/s)",
    "max_speed": "Max speed (m/s)",
}


@dataclass(frozen=True)
class AggregateMetrics:
    n: int
    mean: dict
    std: dict
    values: dict   # metric name -> per-trial values, in trial order

    def to_dict(self):
        return {"n": self.n, "mean": dict(self.mean), "std": dict(self.std)}


def moving_mask(r, exclude_post_arrival=True):
    """Samples used for statistics: not frozen and, by default, not yet arrived.

    A sample counts as arrived once the clock has reached tau_end and the
    robot sits within goal_tol of the goal.
    """
    mask = ~np.asarray(r.frozen, dtype=bool)
    if exclude_post_arrival:
        dist = np.hypot(r.p[:, 0] - r.goal[0], r.p[:, 1] - r.goal[1])
        mask &= (r.tau_clock < r.tau_end) | (dist > r.goal_tol)
    return mask


def metrics_from_series(delta, speed):
    delta = np.asarray(delta, dtype=float)
    speed = np.asarray(speed, dtype=float)
    if len(delta) == 0:
        raise EmptyInterval("no samples in the moving interval")
    return TrialMetrics(
        mean_delta=float(np.mean(delta)),
        p5_delta=float(np.percentile(delta, 5.0, method="linear")),
        pct_delta_pos=100.0 * np.count_nonzero(delta > 0.0) / len(delta),
        max_delta=float(np.max(delta)),
        mean_speed=float(np.mean(speed)),
        max_speed=float(np.max(speed)),
    )


def trial_metrics(r, exclude_post_arrival=True):
    m = moving_mask(r, exclude_post_arrival)
    return metrics_from_series(r.delta[m], np.hypot(r.v[m, 0], r.v[m, 1]))


def aggregate(ms):
    """Sample mean and standard deviation (n - 1 denominator; 0 for one trial)."""
    ms = list(ms)
    if not ms:
        raise ValueError("need at least one trial")
    n = len(ms)
    values, mean, std = {}, {}, {}
    for name in METRIC_NAMES:
        x = np.array([getattr(m, name) for m in ms], dtype=float)
        values[name] = x
        mean[name] = float(np.mean(x))
        std[name] = float(np.std(x, ddof=1)) if n > 1 else 0.0
    return AggregateMetrics(n, mean, std, values)


def relative_reduction(before, after):
    """Fractional drop from ``before`` to ``after``; 0 when both are zero."""
    if before == after:
        return 0.0
    if before == 0.0:
        return -math.inf if after > 0 else math.inf
    return (before - after) / abs(before)


def histogram(nominal, scaled, bins=20):
    """Shared-edge histogram of per-trial mean delta for both cases."""
    a = np.asarray(nominal.values["mean_delta"])
    b = np.asarray(scaled.values["mean_delta"])
    both = np.concatenate((a, b))
    lo, hi = float(both.min()), float(both.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    edges = np.linspace(lo, hi, bins + 1)
    ca, _ = np.histogram(a, edges)
    cb, _ = np.histogram(b, edges)
    return edges, ca, cb


def write_histogram_csv(fh, edges, count_nominal, count_scaled, meta=None):
    write_csv(fh, ("bin_left", "bin_right", "count_nominal", "count_scaled"),
              zip(edges[:-1], edges[1:], count_nominal, count_scaled), meta)


def compare(nominal, scaled, bins=20):
    """Side-by-side summary with relative reductions and histogram data.

    When both batches have the same length they are treated as paired and the
    number of trials in which scaling lowers each metric is reported too.
    """
    rows = {}
    for name in METRIC_NAMES:
        rows[name] = {
            "nominal_mean": nominal.mean[name], "nominal_std": nominal.std[name],
            "scaled_mean": scaled.mean[name], "scaled_std": scaled.std[name],
            "reduction": relative_reduction(nominal.mean[name], scaled.mean[name]),
        }
        if nominal.n == scaled.n:
            rows[name]["n_lower"] = int(np.count_nonzero(
                scaled.values[name] < nominal.values[name]))
    edges, ca, cb = histogram(nominal, scaled, bins)
    return {
        "n_nominal": nominal.n,
        "n_scaled": scaled.n,
        "metrics": rows,
        "histogram": {"edges": edges.tolist(), "count_nominal": ca.tolist(),
                      "count_scaled": cb.tolist()},
    }


def _pm(mean, std, digits):
    return f"{mean:.{digits}f} ± {std:.{digits}f}"


def profile_table(stats):
    """Markdown table from a list of profile_stats dicts."""
    keys = (("min_alpha", "Minimum alpha", 3), ("mean_alpha", "Mean alpha", 3),
            ("modified_pct", "Modified points (%)", 2))
    lines = ["| Metric | Value |", "|---|---|"]
    for key, label, d in keys:
        x = np.array([s[key] for s in stats], dtype=float)
        sd = float(np.std(x, ddof=1)) if len(x) > 1 else 0.0
        lines.append(f"| {label} | {_pm(float(x.mean()), sd, d)} |")
    return "\n".join(lines) + "\n"


def comparison_table(cmp):
    lines = ["| Metric | Nominal | Scaled | Reduction |", "|---|---|---|---|"]
    for name in ("pct_delta_pos", "mean_delta", "p5_delta", "max_delta", "mean_speed",
                 "max_speed"):
        row = cmp["metrics"][name]
        d = 3 if "speed" in name else 2
        lines.append(f"| {LABELS[name]} | {_pm(row['nominal_mean'], row['nominal_std'], d)} "
                     f"| {_pm(row['scaled_mean'], row['scaled_std'], d)} "
                     f"| {100.0 * row['reduction']:.1f}% |")
    return "\n".join(lines) + "\n"
