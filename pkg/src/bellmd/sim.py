"""Monte-Carlo sampling of hidden-variable models and empirical Bell estimates.

Streams are split in chunks of ``CHUNK`` trials; chunk ``c`` draws from
``PCG64(SeedSequence(seed, spawn_key=(c,)))``, so a trial stream depends
only on the seed and the model, not on how it is consumed.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .errors import DomainError, EmptyCell
from .functional import BellFunctional
from .oracle import EveModel, agreement_probability, base_outputs

CHUNK = 1 << 16
GENERATOR = "numpy PCG64, SeedSequence(seed, spawn_key=(chunk,)), chunk size 65536"


class TrialRecord(NamedTuple):
    lambda_id: int
    j: int
    k: int
    a: int
    b: int


@dataclass
class Trials:
    """Column store of sampled trials; iterates as :class:`TrialRecord`."""

    lam: np.ndarray
    j: np.ndarray
    k: np.ndarray
    a: np.ndarray
    b: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.lam.size)

    def __iter__(self) -> Iterator[TrialRecord]:
        for row in zip(self.lam.tolist(), self.j.tolist(), self.k.tolist(),
                       self.a.tolist(), self.b.tolist()):
            yield TrialRecord(*row)

    def __getitem__(self, i: int) -> TrialRecord:
        return TrialRecord(int(self.lam[i]), int(self.j[i]), int(self.k[i]),
                           int(self.a[i]), int(self.b[i]))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# generator: {self.metadata.get('generator', GENERATOR)}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["lambda", "j", "k", "a", "b"])
            writer.writerows(zip(self.lam.tolist(), self.j.tolist(), self.k.tolist(),
                                 self.a.tolist(), self.b.tolist()))


def _empty(seed) -> Trials:
    z = np.zeros(0, dtype=np.int64)
    return Trials(z, z.copy(), z.copy(), z.copy(), z.copy(),
                  {"generator": GENERATOR, "seed": seed, "n": 0})


def sample_trials(model: EveModel, n: int, seed: int = 0) -> Trials:
    """Draw lambda ~ p(lambda), then the cell (j, k) ~ p(X_j, Y_k | lambda),
    then outputs from the strategy."""
    model.check()
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n}")
    if n == 0:
        return _empty(seed)

    w = np.clip(model.weights, 0.0, None)
    w_cum = np.cumsum(w / w.sum())
    tables = np.array([np.clip(np.asarray(e.inputs, dtype=float).ravel(), 0.0, None)
                       for e in model.entries])
    cell_cum = np.cumsum(tables / tables.sum(axis=1, keepdims=True), axis=1)
    base_a = np.array([base_outputs(e.strategy)[0] for e in model.entries], dtype=np.int64)
    base_b = np.array([base_outputs(e.strategy)[1] for e in model.entries], dtype=np.int64)
    keep = np.array([agreement_probability(e.strategy) for e in model.entries])

    parts = []
    for chunk, start in enumerate(range(0, n, CHUNK)):
        size = min(CHUNK, n - start)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))
        # Four uniforms per trial, row-major, so a stream's prefix does not
        # depend on its total length.
        r = rng.random((size, 4))
        lam = np.minimum(np.searchsorted(w_cum, r[:, 0], side="right"), len(w) - 1)
        cell = np.minimum((r[:, 1, None] >= cell_cum[lam]).sum(axis=1), 8)
        j, k = np.divmod(cell, 3)
        flip_a = r[:, 2] >= keep[lam]
        flip_b = r[:, 3] >= keep[lam]
        a = np.where(flip_a, -1, 1) * base_a[lam, j]
        b = np.where(flip_b, -1, 1) * base_b[lam, k]
        parts.append((lam, j, k, a, b))

    cols = [np.concatenate([p[i] for p in parts]).astype(np.int64) for i in range(5)]
    return Trials(*cols, metadata={"generator": GENERATOR, "seed": seed, "n": n})


@dataclass
class BellEstimate:
    value: float
    stderr: float
    counts: np.ndarray
    n: int
    correlators: np.ndarray

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "stderr": self.stderr,
            "n": self.n,
            "counts": self.counts.tolist(),
            "correlators": self.correlators.tolist(),
        }


def _cell_counts(trials: Trials) -> np.ndarray:
    return np.bincount(3 * trials.j + trials.k, minlength=9).reshape(3, 3)


def estimate_bell(trials: Trials, f: BellFunctional) -> BellEstimate:
    """Sum of c_jk times the per-cell conditional correlators.

    Each correlator is a mean of +-1 products, with variance (1 - E^2)/N_jk.
    """
    counts = _cell_counts(trials)
    for j in range(3):
        for k in range(3):
            if counts[j, k] == 0:
                raise EmptyCell((j, k))
    prod = trials.a * trials.b
    sums = np.bincount(3 * trials.j + trials.k, weights=prod, minlength=9).reshape(3, 3)
    E = sums / counts
    value = math.fsum((f.coeffs * E).ravel())
    var = np.sum(f.coeffs ** 2 * np.clip(1.0 - E ** 2, 0.0, None) / counts)
    return BellEstimate(value, float(math.sqrt(var)), counts, len(trials), E)


def empirical_input_marginals(trials: Trials) -> np.ndarray:
    if len(trials) == 0:
        raise DomainError("no trials to count")
    return _cell_counts(trials) / len(trials)


def marginal_sigma(n: int, p: float = 1.0 / 9.0) -> float:
    """Binomial standard deviation of a cell frequency."""
    return math.sqrt(p * (1.0 - p) / n)
