"""Empirical losses and the two lattice descent trainers.

Losses are exact fractions of pixel counts, so ties are well defined and
runs are reproducible bit for bit. The full-neighborhood trainer always
moves to a best neighbor (progress is preserved by best-visited tracking);
the stochastic variant moves per mini-batch among sampled neighbors and
checkpoints the best full-sample loss at epoch ends. Candidate losses may
be evaluated by a thread pool; the argmin is always taken over the
candidate list in canonical order, so thread count never changes results.
"""

from __future__ import annotations

import csv
import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .arch import ArchitectureSpec, ParamVector, compile, param_neighbors, sample_neighbors
from .errors import ConfigError
from .graph import MCGraph, evaluate
from .image import BinaryImage

log = logging.getLogger(__name__)

LossFn = Callable[[BinaryImage, BinaryImage, MCGraph], Fraction]


@dataclass(frozen=True)
class SamplePair:
    input: BinaryImage
    target: BinaryImage

    def __post_init__(self):
        if not self.input.same_frame(self.target):
            raise ValueError("input and target frames differ")


def loss_absolute(x: BinaryImage, y: BinaryImage, g: MCGraph) -> Fraction:
    """Fraction of frame pixels where the output disagrees with the target."""
    if not x.same_frame(y):
        raise ValueError("input and target frames differ")
    out = evaluate(g, x)
    return Fraction((out ^ y).count(), x.width * x.height)


def loss_iou(x: BinaryImage, y: BinaryImage, g: MCGraph) -> Fraction:
    """One minus intersection-over-union; both empty counts as loss 0."""
    if not x.same_frame(y):
        raise ValueError("input and target frames differ")
    out = evaluate(g, x)
    union = (out | y).count()
    if union == 0:
        return Fraction(0)
    return 1 - Fraction((out & y).count(), union)


LOSSES: dict[str, LossFn] = {"absolute": loss_absolute, "iou": loss_iou}


def mean_loss(arch: ArchitectureSpec, params: ParamVector,
              sample: Sequence[SamplePair], loss: LossFn) -> Fraction:
    """Arithmetic mean of the loss over the sample; exact fraction."""
    if not sample:
        raise ValueError("sample must be non-empty")
    g = compile(arch, params)
    total = sum(loss(p.input, p.target, g) for p in sample)
    return Fraction(total, len(sample))


@dataclass(frozen=True)
class TrainConfig:
    algorithm: str = "slda"
    epochs: int = 1
    batch_size: int = 1
    neighbors_sampled: int = 1
    loss: str = "absolute"
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ("lda", "slda"):
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.neighbors_sampled < 1:
            raise ConfigError("neighbors_sampled must be >= 1")
        if self.loss not in LOSSES:
            raise ConfigError(f"unknown loss {self.loss!r}")

    @property
    def loss_fn(self) -> LossFn:
        return LOSSES[self.loss]


@dataclass(frozen=True)
class EpochRow:
    epoch: int
    current_loss: Fraction
    best_loss: Fraction
    time_ms: int


@dataclass(frozen=True)
class TrainReport:
    best_params: ParamVector
    best_loss: Fraction
    rows: tuple[EpochRow, ...]
    epoch_of_best: int
    initial_loss: Fraction
    path: tuple[ParamVector, ...] | None = None


_CSV_HEADER = ("epoch", "current_loss", "best_loss", "time_ms")


class _MetricsWriter:
    """Appends one CSV row per epoch, flushing eagerly."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="") if path is not None else None
        if self._fh is not None:
            w = csv.writer(self._fh)
            w.writerow(_CSV_HEADER)
            self._fh.flush()

    def row(self, r: EpochRow) -> None:
        if self._fh is None:
            return
        w = csv.writer(self._fh)
        w.writerow((r.epoch, _fmt(r.current_loss), _fmt(r.best_loss), r.time_ms))
        self._fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()


def _fmt(v: Fraction) -> str:
    return f"{float(v):.12g}"


def _batch_mean(g: MCGraph, batch: Sequence[SamplePair], lossfn: LossFn) -> Fraction:
    return Fraction(sum(lossfn(p.input, p.target, g) for p in batch), len(batch))


def _candidate_losses(arch: ArchitectureSpec, cands: Sequence[ParamVector],
                      batch: Sequence[SamplePair], lossfn: LossFn,
                      threads: int) -> list[Fraction]:
    def one(c: ParamVector) -> Fraction:
        return _batch_mean(compile(arch, c), batch, lossfn)

    if threads <= 1 or len(cands) <= 1:
        return [one(c) for c in cands]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, cands))


def _pick_argmin(losses: list[Fraction], rng: random.Random) -> int:
    best = min(losses)
    idxs = [i for i, l in enumerate(losses) if l == best]
    if len(idxs) == 1:
        return idxs[0]
    return rng.choice(idxs)


def lda_train(arch: ArchitectureSpec, init: ParamVector, sample: Sequence[SamplePair],
              cfg: TrainConfig, *, threads: int = 1, metrics_path=None,
              record_path: bool = False) -> TrainReport:
    """Full-neighborhood greedy descent over the parameter lattice.

    Every epoch moves to a minimum-loss neighbor of the current point (the
    point itself excluded), even when all neighbors are worse; ties are
    broken uniformly with the seeded generator. The best point ever
    visited, the initial one included, is returned.
    """
    if cfg.algorithm != "lda":
        raise ConfigError("config algorithm is not 'lda'")
    if not sample:
        raise ConfigError("training sample is empty")
    rng = random.Random(cfg.seed)
    lossfn = cfg.loss_fn

    current = init
    initial_loss = mean_loss(arch, init, sample, lossfn)
    best, best_loss, epoch_of_best = init, initial_loss, 0
    rows: list[EpochRow] = []
    path: list[ParamVector] = []
    before_last: ParamVector | None = None
    last: ParamVector = init
    writer = _MetricsWriter(metrics_path)
    try:
        for epoch in range(1, cfg.epochs + 1):
            t0 = time.perf_counter()
            nbrs = param_neighbors(current)
            losses = _candidate_losses(arch, nbrs, sample, lossfn, threads)
            pick = _pick_argmin(losses, rng)
            current = nbrs[pick]
            current_loss = losses[pick]
            if before_last is not None and current == before_last:
                log.info("length-2 cycle detected at epoch %d", epoch)
            before_last, last = last, current
            if current_loss < best_loss:
                best, best_loss, epoch_of_best = current, current_loss, epoch
            row = EpochRow(epoch, current_loss, best_loss,
                           int((time.perf_counter() - t0) * 1000))
            rows.append(row)
            writer.row(row)
            if record_path:
                path.append(current)
    finally:
        writer.close()
    return TrainReport(best, best_loss, tuple(rows), epoch_of_best, initial_loss,
                       tuple(path) if record_path else None)


def _batches(sample: Sequence[SamplePair], b: int, rng: random.Random) -> list[list[SamplePair]]:
    order = list(range(len(sample)))
    rng.shuffle(order)
    shuffled = [sample[i] for i in order]
    return [shuffled[i:i + b] for i in range(0, len(shuffled), b)]


def slda_train(arch: ArchitectureSpec, init: ParamVector, sample: Sequence[SamplePair],
               cfg: TrainConfig, *, threads: int = 1, metrics_path=None,
               record_path: bool = False) -> TrainReport:
    """Stochastic descent: sampled neighbors, mini-batch moves.

    Each epoch shuffles the sample into ceil(N/b) batches (the last may be
    short). For each batch the point moves to the best of n sampled
    neighbors by batch loss, unconditionally. The best full-sample loss
    seen at an epoch end (or at the start) determines the returned point.
    """
    if cfg.algorithm != "slda":
        raise ConfigError("config algorithm is not 'slda'")
    if not sample:
        raise ConfigError("training sample is empty")
    if cfg.batch_size > len(sample):
        raise ConfigError(f"batch_size {cfg.batch_size} exceeds sample size {len(sample)}")
    rng = random.Random(cfg.seed)
    lossfn = cfg.loss_fn

    current = init
    initial_loss = mean_loss(arch, init, sample, lossfn)
    best, best_loss, epoch_of_best = init, initial_loss, 0
    rows: list[EpochRow] = []
    path: list[ParamVector] = []
    writer = _MetricsWriter(metrics_path)
    try:
        for epoch in range(1, cfg.epochs + 1):
            t0 = time.perf_counter()
            for batch in _batches(sample, cfg.batch_size, rng):
                nbrs = sample_neighbors(current, cfg.neighbors_sampled, rng)
                losses = _candidate_losses(arch, nbrs, batch, lossfn, threads)
                current = nbrs[_pick_argmin(losses, rng)]
            current_loss = mean_loss(arch, current, sample, lossfn)
            if current_loss < best_loss:
                best, best_loss, epoch_of_best = current, current_loss, epoch
            row = EpochRow(epoch, current_loss, best_loss,
                           int((time.perf_counter() - t0) * 1000))
            rows.append(row)
            writer.row(row)
            if record_path:
                path.append(current)
    finally:
        writer.close()
    return TrainReport(best, best_loss, tuple(rows), epoch_of_best, initial_loss,
                       tuple(path) if record_path else None)


def train(arch: ArchitectureSpec, init: ParamVector, sample: Sequence[SamplePair],
          cfg: TrainConfig, **kw) -> TrainReport:
    fn = lda_train if cfg.algorithm == "lda" else slda_train
    return fn(arch, init, sample, cfg, **kw)
