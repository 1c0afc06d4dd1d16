"""Estimator reports, accumulation, and CSV/JSON export."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

from .errors import ValidationError

CSV_HEADER = ["name", "lambda", "n", "mean", "std_error", "ci_lo", "ci_hi",
              "theory", "seed"]


class Welford:
    """Streaming mean/variance accumulator."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self._m2 = 0.0

    def add(self, value):
        self.n += 1
        delta = value - self.mean
        self.mean += delta / self.n
        self._m2 += delta * (value - self.mean)

    def merge(self, other):
        if other.n == 0:
            return self
        if self.n == 0:
            self.n, self.mean, self._m2 = other.n, other.mean, other._m2
            return self
        n = self.n + other.n
        delta = other.mean - self.mean
        self.mean += delta * other.n / n
        self._m2 += other._m2 + delta * delta * self.n * other.n / n
        self.n = n
        return self

    @property
    def variance(self):
        return self._m2 / (self.n - 1) if self.n > 1 else 0.0

    @property
    def std_error(self):
        return math.sqrt(self.variance / self.n) if self.n > 0 else 0.0


@dataclass(frozen=True)
class EstimatorReport:
    name: str
    lam: float
    n: int
    mean: float
    variance: float
    std_error: float
    ci95: tuple
    theory_value: float
    rescale_rate: str
    seed: int

    def __post_init__(self):
        if self.variance < 0:
            raise ValidationError("variance must be nonnegative")
        scale = max(1.0, abs(self.mean))
        lo, hi = self.ci95
        if abs(lo - (self.mean - 1.96 * self.std_error)) > 1e-9 * scale or \
                abs(hi - (self.mean + 1.96 * self.std_error)) > 1e-9 * scale:
            raise ValidationError("ci95 must equal mean +- 1.96 * std_error")

    @staticmethod
    def from_welford(name, lam, acc, theory_value, rescale_rate, seed):
        se = acc.std_error
        return EstimatorReport(
            name=name, lam=float(lam), n=acc.n, mean=acc.mean,
            variance=acc.variance, std_error=se,
            ci95=(acc.mean - 1.96 * se, acc.mean + 1.96 * se),
            theory_value=theory_value, rescale_rate=rescale_rate,
            seed=int(seed))

    def to_dict(self):
        return {"name": self.name, "lambda": self.lam, "n": self.n,
                "mean": self.mean, "variance": self.variance,
                "std_error": self.std_error,
                "ci95": list(self.ci95), "theory_value": self.theory_value,
                "rescale_rate": self.rescale_rate, "seed": self.seed}

    @staticmethod
    def from_dict(d):
        return EstimatorReport(
            name=d["name"], lam=d["lambda"], n=d["n"], mean=d["mean"],
            variance=d["variance"], std_error=d["std_error"],
            ci95=tuple(d["ci95"]), theory_value=d["theory_value"],
            rescale_rate=d["rescale_rate"], seed=d["seed"])

    def csv_row(self):
        return [self.name, _fmt(self.lam), str(self.n), _fmt(self.mean),
                _fmt(self.std_error), _fmt(self.ci95[0]), _fmt(self.ci95[1]),
                _fmt(self.theory_value), str(self.seed)]


def _fmt(x):
    if x is None:
        return ""
    return repr(float(x))


def export(reports, fmt, path):
    """Write reports as CSV or JSON; returns the path."""
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in reports:
                writer.writerow(r.csv_row())
    elif fmt == "json":
        with open(path, "w") as fh:
            json.dump([r.to_dict() for r in reports], fh, indent=2)
            fh.write("\n")
    else:
        raise ValidationError(f"unknown export format {fmt!r}")
    return path


def load_json(path):
    with open(path) as fh:
        return [EstimatorReport.from_dict(d) for d in json.load(fh)]
