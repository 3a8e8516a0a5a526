"""Exact log-linear distributions, KL divergence and the FP/FN experiment.

Distributions are dense tables over every configuration of the domain, so
everything here is limited to small domains (see ``MAX_CONFIGURATIONS``).
Parameter learning is done against the exact target distribution, i.e. the
infinite-data limit of maximum likelihood.
"""
from __future__ import annotations

import csv
import io
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np
from scipy.special import logsumexp
from scipy.stats import spearmanr

from .comparator import (
    ComparatorConfig,
    build_hfn,
    confusion_matrix,
    dependence_count,
    total_dependence_count,
)
from .model import DomainSpec, Feature, StructureModel

MAX_CONFIGURATIONS = 2**20
CSV_COLUMNS = ("structure_id", "mode", "fp", "fn", "error_pct", "kl_nats", "iterations", "grad_norm")
MODES = ("fp", "fn")


class GuardExceeded(RuntimeError):
    pass


def _guard(domain: DomainSpec, limit: int = MAX_CONFIGURATIONS) -> None:
    size = domain.configuration_count()
    if size > limit:
        raise GuardExceeded(f"{size} configurations exceed the exact-inference guard ({limit})")


def configurations(domain: DomainSpec) -> np.ndarray:
    """Every joint configuration, one row each, in lexicographic order."""
    _guard(domain)
    grids = np.indices(domain.cardinalities).reshape(domain.n, -1)
    return grids.T


def feature_matrix(domain: DomainSpec, features: Sequence[Feature]) -> np.ndarray:
    """0/1 indicator of each feature (columns) on each configuration (rows)."""
    X = configurations(domain)
    A = np.ones((X.shape[0], len(features)))
    for col, f in enumerate(features):
        for k, v in f.items:
            A[:, col] *= X[:, k] == v
    return A


@dataclass(frozen=True, eq=False)
class ExactDistribution:
    domain: DomainSpec
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.shape != (self.domain.configuration_count(),):
            raise ValueError(f"expected {self.domain.configuration_count()} probabilities, got {p.shape}")
        if np.any(p < 0):
            raise ValueError("negative probability")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {p.sum()!r}")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)


def exact_distribution(m: StructureModel) -> ExactDistribution:
    if m.weights is None:
        raise ValueError("model has no weights")
    A = feature_matrix(m.domain, m.features)
    logits = A @ np.asarray(m.weights, dtype=float)
    return ExactDistribution(m.domain, np.exp(logits - float(logsumexp(logits))))


def kl_divergence(p: ExactDistribution, q: ExactDistribution) -> float:
    """``sum p log(p/q)`` in nats, with ``0 log 0/q = 0`` and ``p log p/0 = inf``."""
    if p.domain != q.domain:
        raise ValueError("distributions live on different domains")
    pp, qq = p.probabilities, q.probabilities
    support = pp > 0
    if np.any(qq[support] == 0):
        return math.inf
    val = float(np.sum(pp[support] * (np.log(pp[support]) - np.log(qq[support]))))
    return max(val, 0.0)


def sample_empirical(p: ExactDistribution, n_samples: int, seed: int) -> ExactDistribution:
    """Empirical distribution of ``n_samples`` i.i.d. draws from ``p``."""
    counts = np.random.default_rng(seed).multinomial(n_samples, p.probabilities)
    return ExactDistribution(p.domain, counts / n_samples)


class LogLikelihood:
    """Expected log-likelihood ``sum_x target(x) log q_theta(x)`` and its derivatives."""

    def __init__(self, structure: StructureModel, target: ExactDistribution):
        if structure.domain != target.domain:
            raise ValueError("structure and target live on different domains")
        self.A = feature_matrix(structure.domain, structure.features)
        self.target = target.probabilities
        self.target_moments = self.A.T @ self.target

    def model_probabilities(self, theta: np.ndarray) -> np.ndarray:
        logits = self.A @ theta
        return np.exp(logits - float(logsumexp(logits)))

    def value(self, theta: np.ndarray) -> float:
        logits = self.A @ theta
        return float(self.target @ logits) - float(logsumexp(logits))

    def gradient(self, theta: np.ndarray) -> np.ndarray:
        """Target feature expectations minus model feature expectations."""
        return self.target_moments - self.A.T @ self.model_probabilities(theta)

    def feature_covariance(self, theta: np.ndarray) -> np.ndarray:
        """Negated Hessian: covariance of the features under the model."""
        q = self.model_probabilities(theta)
        mean = self.A.T @ q
        return (self.A * q[:, None]).T @ self.A - np.outer(mean, mean)


@dataclass(frozen=True)
class FitResult:
    model: StructureModel
    iterations: int
    grad_norm: float
    converged: bool


def fit_exact(
    structure: StructureModel,
    target: ExactDistribution,
    tol: float = 1e-8,
    max_iters: int = 10_000,
    method: str = "newton",
    theta0: Optional[Sequence[float]] = None,
) -> FitResult:
    """Maximum-likelihood weights for ``structure`` against an exact target.

    ``method="newton"`` steps along the minimum-norm solution of
    ``cov @ step = grad`` (redundant features make the covariance singular);
    ``method="gradient"`` steps along the gradient with Barzilai-Borwein
    trial lengths. Both backtrack until the Armijo condition holds, so the
    log-likelihood never decreases between accepted iterates. Stops when the
    gradient max-norm drops to ``tol`` or after ``max_iters``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if method not in ("newton", "gradient"):
        raise ValueError(f"unknown method {method!r}")
    objective = LogLikelihood(structure, target)
    k = len(structure.features)
    theta = np.zeros(k) if theta0 is None else np.asarray(theta0, dtype=float).copy()
    if k == 0:
        return FitResult(structure.with_weights(()), 0, 0.0, True)

    value = objective.value(theta)
    grad = objective.gradient(theta)
    bb = 1.0
    it = 0
    while it < max_iters and float(np.max(np.abs(grad))) > tol:
        it += 1
        if method == "newton":
            direction = np.linalg.lstsq(objective.feature_covariance(theta), grad, rcond=1e-12)[0]
            t = 1.0
        else:
            direction = grad
            t = bb
        slope = float(grad @ direction)
        if slope <= 0:
            direction, slope, t = grad, float(grad @ grad), 1.0
        while True:
            cand = theta + t * direction
            cand_value = objective.value(cand)
            if cand_value >= value + 1e-4 * t * slope or t < 1e-14:
                break
            t *= 0.5
        if cand_value < value:
            break  # no ascent left at floating-point resolution
        new_grad = objective.gradient(cand)
        s, y = cand - theta, grad - new_grad
        sy = float(s @ y)
        bb = min(max(float(s @ s) / sy if sy > 1e-300 else 2.0 * t, 1e-6), 1e6)
        theta, value, grad = cand, cand_value, new_grad
    gnorm = float(np.max(np.abs(grad)))
    return FitResult(structure.with_weights(theta), it, gnorm, gnorm <= tol)


def make_reference_model(
    n_others: int = 5, magnitude: float = 1.0, seed: int = 0, card: int = 2
) -> StructureModel:
    """Two-context reference structure on ``X_0..X_n_others``.

    Under ``X_0 = 0`` every pair of the other variables interacts; under
    ``X_0 = 1`` they are mutually independent. ``X_0`` interacts with every
    other variable in both contexts. Weights have random sign and magnitude
    uniform in ``[magnitude, 2*magnitude]``.
    """
    if n_others < 2:
        raise ValueError("n_others must be >= 2")
    domain = DomainSpec((card,) * (n_others + 1))
    feats = []
    others = range(1, n_others + 1)
    for a in others:
        for b in others:
            if a < b:
                for va in range(card):
                    for vb in range(card):
                        feats.append(Feature(((0, 0), (a, va), (b, vb))))
    for k in others:
        for v0 in range(card):
            for vk in range(card):
                feats.append(Feature(((0, v0), (k, vk))))
    rng = random.Random(seed)
    weights = [rng.choice((-1.0, 1.0)) * rng.uniform(magnitude, 2 * magnitude) for _ in feats]
    return StructureModel(domain, tuple(feats), tuple(weights))


def _random_pair_feature(domain: DomainSpec, pair, rng: random.Random) -> Feature:
    i, j = pair
    others = [k for k in range(domain.n) if k not in (i, j)]
    extra = rng.sample(others, rng.randint(min(1, len(others)), len(others)))
    return Feature(tuple((k, rng.randrange(domain.card(k))) for k in [i, j, *extra]))


def perturb(
    reference: StructureModel, mode: str, count: int, seed: int, max_retries: int = 10_000
) -> StructureModel:
    """Structure with only false positives (``fp``) or only false negatives (``fn``).

    ``fn`` drops ``count`` random features. ``fp`` adds ``count`` random
    features, each adding at least one FC dependence not already covered.
    Weights are dropped either way.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    rng = random.Random(seed)
    feats = list(reference.features)
    if mode == "fn":
        if count > len(feats):
            raise ValueError(f"cannot remove {count} of {len(feats)} features")
        drop = set(rng.sample(range(len(feats)), count))
        return StructureModel(reference.domain, tuple(f for i, f in enumerate(feats) if i not in drop))
    if mode != "fp":
        raise ValueError(f"unknown mode {mode!r}")

    current = StructureModel(reference.domain, tuple(feats))
    for _ in range(count):
        open_pairs = [
            p for p in reference.domain.pairs()
            if dependence_count(current, p) < reference.domain.contexts_per_pair(p)
        ]
        if not open_pairs:
            raise RuntimeError("every FC context is already a dependence; no false positive possible")
        for _attempt in range(max_retries):
            pair = rng.choice(open_pairs)
            cand = _random_pair_feature(reference.domain, pair, rng)
            if build_hfn(StructureModel(reference.domain, (cand,)), current, pair):
                break
        else:
            raise RuntimeError(f"no uncovered feature found after {max_retries} attempts")
        current = StructureModel(reference.domain, current.features + (cand,))
    return current


@dataclass(frozen=True)
class ExperimentRecord:
    structure_id: int
    mode: str
    fp: int
    fn: int
    error_pct: float
    kl_nats: float
    iterations: int
    grad_norm: float

    def __post_init__(self):
        if not 0.0 <= self.error_pct <= 100.0:
            raise ValueError(f"error percentage {self.error_pct} outside [0, 100]")
        if not self.kl_nats >= 0.0:
            raise ValueError(f"negative KL {self.kl_nats}")

    def row(self) -> tuple:
        return (
            self.structure_id, self.mode, self.fp, self.fn,
            repr(self.error_pct), repr(self.kl_nats), self.iterations, repr(self.grad_norm),
        )


@dataclass(frozen=True)
class FitParams:
    tol: float = 1e-8
    max_iters: int = 10_000
    sample_size: Optional[int] = None


def _run_one(args):
    reference, target, dependent, mode, idx, count, seed, params = args
    structure = perturb(reference.structure(), mode, count, seed)
    cm = confusion_matrix(reference, structure, ComparatorConfig())
    if mode == "fn":
        denom, errors = dependent, cm.fn
    else:
        denom, errors = cm.total - dependent, cm.fp
    pct = 100.0 * errors / denom if denom else 0.0
    data = target
    if params.sample_size is not None:
        data = sample_empirical(target, params.sample_size, seed)
    fit = fit_exact(structure, data, params.tol, params.max_iters)
    kl = kl_divergence(target, exact_distribution(fit.model))
    return ExperimentRecord(idx, mode, cm.fp, cm.fn, pct, kl, fit.iterations, fit.grad_norm)


def run_kl_experiment(
    reference: StructureModel,
    n_structures: int,
    seed: int,
    params: FitParams = FitParams(),
    modes: Iterable[str] = MODES,
    max_fp_features: int = 15,
    workers: int = 1,
) -> List[ExperimentRecord]:
    """Fit ``n_structures`` perturbed structures per mode against the reference.

    The error percentage is FN over the reference's FC dependencies (``fn``)
    or FP over its FC independencies (``fp``). Records are ordered by
    ``(mode, structure_id)``.
    """
    _guard(reference.domain)
    target = exact_distribution(reference)
    dependent = total_dependence_count(reference)
    rng = random.Random(seed)
    jobs = []
    for mode in modes:
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        for idx in range(n_structures):
            hi = len(reference.features) if mode == "fn" else max_fp_features
            count = rng.randint(1, hi)
            jobs.append((reference, target, dependent, mode, idx, count, rng.randrange(2**31), params))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_one, jobs))
    return [_run_one(job) for job in jobs]


def write_csv(records: Sequence[ExperimentRecord], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(rec.row())


def records_to_csv(records: Sequence[ExperimentRecord]) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()


def summarize(records: Sequence[ExperimentRecord]) -> dict:
    """Per mode: count, Spearman(KL, error %) and the largest KL."""
    out = {}
    for mode in MODES:
        recs = [r for r in records if r.mode == mode]
        if not recs:
            continue
        rho = math.nan
        if len(recs) > 1:
            rho = float(spearmanr([r.kl_nats for r in recs], [r.error_pct for r in recs])[0])
        out[mode] = {"n": len(recs), "spearman": rho, "max_kl": max(r.kl_nats for r in recs)}
    return out
