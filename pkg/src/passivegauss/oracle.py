"""Brute-force search over the passive group, used to cross-check the closed forms.

Nothing here calls into :mod:`passivegauss.power`; the search only needs
passive transforms and the negativity of the transformed state.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .core import (
    CovarianceMatrix,
    PassiveTransform,
    apply_passive,
    haar_unitary,
    mode_indices,
    passive_from_unitary,
    real_form,
    require_valid,
)
from .entanglement import (
    ModePartition,
    entanglement_report,
    negativity_from_spectrum,
    symplectic_values,
)
from .errors import StructuralError

TOL_OPT = 1e-6
OBJECTIVES = ("full", "two_mode_subsystem")
MIN_STEP = 1e-9


@dataclass(frozen=True)
class SearchConfig:
    """Parameters of :func:`maximize_negativity`.

    ``objective="full"`` maximises the negativity across ``partition``;
    ``"two_mode_subsystem"`` maximises over every pair of modes (1|1 split
    of the reduced state) instead.  ``workers`` only changes wall time:
    samples are drawn in fixed chunks with their own seeds.
    """

    samples: int = 2000
    refine_iters: int = 500
    seed: int = 0
    partition: Optional[ModePartition] = None
    n: Optional[int] = None
    objective: str = "full"
    proposals: int = 8
    step: float = 0.3
    chunk_size: int = 1000
    workers: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise StructuralError("samples must be >= 1")
        if self.refine_iters < 0:
            raise StructuralError("refine_iters must be >= 0")
        if self.objective not in OBJECTIVES:
            raise StructuralError(f"objective must be one of {OBJECTIVES}")


@dataclass(frozen=True)
class SearchResult:
    best_negativity_bits: float
    best_unitary: np.ndarray
    history: Tuple[float, ...] = field(default=(), repr=False)

    @property
    def best_transform(self) -> PassiveTransform:
        return passive_from_unitary(self.best_unitary)


def random_passive(n: int, rng: np.random.Generator) -> PassiveTransform:
    """Haar-distributed passive transformation on ``n`` modes."""
    return passive_from_unitary(haar_unitary(n, rng))


def _batch_scores(data: np.ndarray, us: np.ndarray, part: Optional[ModePartition], objective: str):
    """Search score and negativity for a stack of candidate unitaries.

    The score equals the negativity on NPPT candidates and ``-log2(s_min)``
    (<= 0) on PPT ones, so the local search has a slope to climb even
    before it finds entanglement.
    """
    k = real_form(us)
    out = np.swapaxes(k, -1, -2) @ data @ k
    out = 0.5 * (out + np.swapaxes(out, -1, -2))
    n = data.shape[0] // 2
    if objective == "full":
        d = part.momentum_signs()
        spectra = symplectic_values(out * np.outer(d, d))
        en = negativity_from_spectrum(spectra)
        score = np.where(en > 0, en, -np.log2(spectra[..., 0]))
        return score, en
    d = np.array([1.0, 1.0, 1.0, -1.0])
    best_score = best_en = None
    for i, j in itertools.combinations(range(n), 2):
        idx = mode_indices([i, j], n)
        sub = out[..., idx[:, None], idx[None, :]] * np.outer(d, d)
        spectra = symplectic_values(sub)
        en = negativity_from_spectrum(spectra)
        score = np.where(en > 0, en, -np.log2(spectra[..., 0]))
        if best_score is None:
            best_score, best_en = score, en
        else:
            best_score = np.maximum(best_score, score)
            best_en = np.maximum(best_en, en)
    return best_score, best_en


def _evaluate(gamma: CovarianceMatrix, u: np.ndarray, part: Optional[ModePartition], objective: str) -> float:
    """Negativity of a single candidate through the public API."""
    out = apply_passive(gamma, passive_from_unitary(u))
    if objective == "full":
        return entanglement_report(out, part).log_negativity
    pair = ModePartition.contiguous(1, 1)
    return max(
        entanglement_report(out.submatrix([i, j]), pair).log_negativity
        for i, j in itertools.combinations(range(gamma.n), 2)
    )


def _random_hermitian(rng: np.random.Generator, size: int, n: int) -> np.ndarray:
    a = rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))
    h = 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))
    return h / np.linalg.norm(h, axis=(-2, -1), keepdims=True)


def _expi(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(i t H)`` for a stack of Hermitian matrices."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * t * w)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def maximize_negativity(gamma, cfg: SearchConfig) -> SearchResult:
    """Random Haar sampling followed by greedy local refinement of the best sample.

    Refinement multiplies the incumbent unitary by ``exp(i t H)`` for a few
    random Hermitian ``H``; the best proposal is accepted if it improves
    the score, and the step ``t`` grows on success and shrinks on failure.
    Refinement ends after ``refine_iters`` rounds or once ``t`` drops below
    ``MIN_STEP``.  Deterministic for a fixed config.
    """
    gamma = require_valid(gamma)
    n = gamma.n
    if cfg.n is not None and cfg.n != n:
        raise StructuralError(f"config is for {cfg.n} modes, state has {n}")
    if n < 2:
        raise StructuralError("negativity needs at least two modes")
    part = cfg.partition
    if cfg.objective == "full":
        part = ModePartition.halves(n) if part is None else part
        if part.n != n:
            raise StructuralError(f"partition covers {part.n} modes, state has {n}")
    data = gamma.data

    n_chunks = -(-cfg.samples // cfg.chunk_size)
    seeds = np.random.SeedSequence(cfg.seed).spawn(n_chunks + 1)

    def run_chunk(i):
        size = min(cfg.chunk_size, cfg.samples - i * cfg.chunk_size)
        us = haar_unitary(n, np.random.default_rng(seeds[i]), size=size)
        score, _ = _batch_scores(data, us, part, cfg.objective)
        k = int(np.argmax(score))
        return float(score[k]), us[k]

    if cfg.workers > 1 and n_chunks > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            chunks = list(pool.map(run_chunk, range(n_chunks)))
    else:
        chunks = [run_chunk(i) for i in range(n_chunks)]
    best = int(np.argmax([s for s, _ in chunks]))
    score, u = chunks[best]

    rng = np.random.default_rng(seeds[-1])
    step = cfg.step
    history = []
    for _ in range(cfg.refine_iters):
        cands = u @ _expi(_random_hermitian(rng, cfg.proposals, n), step)
        s, _ = _batch_scores(data, cands, part, cfg.objective)
        k = int(np.argmax(s))
        if s[k] > score + 1e-15:
            score, u = float(s[k]), cands[k]
            step = min(step * 1.5, 1.0)
        else:
            step *= 0.6
        history.append(max(0.0, score))
        if step < MIN_STEP:
            break

    # re-orthonormalise accumulated rounding before handing U out
    q, r = np.linalg.qr(u)
    u = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    best_en = _evaluate(gamma, u, part, cfg.objective)
    return SearchResult(best_en, u, tuple(history))


@dataclass(frozen=True)
class VerdictCheck:
    """Comparison of the eigenvalue criterion with the oracle's best find."""

    product: float
    closed_form_bits: float
    oracle_best_bits: float
    criterion: bool
    passed: bool
    discrepancy: float
    message: str
    search: Optional[SearchResult] = field(default=None, repr=False)


def verify_criterion(gamma, cfg: SearchConfig, margin: float = 1e-3) -> VerdictCheck:
    """Check ``lambda1 lambda2 < 1`` against what the search actually finds.

    Fails if the oracle finds entanglement (> TOL_OPT) although
    ``lambda1 lambda2 >= 1``, or finds none although
    ``lambda1 lambda2 < 1 - margin``.  Failures are returned, not raised.
    """
    gamma = require_valid(gamma)
    w = np.linalg.eigvalsh(gamma.data)
    product = float(w[0] * w[1])
    closed = max(0.0, float(-np.log2(product) / 2))
    search = maximize_negativity(gamma, cfg)
    best = search.best_negativity_bits
    criterion = product < 1
    if best > TOL_OPT and not criterion:
        passed, gap, msg = False, best, "oracle found entanglement although lambda1*lambda2 >= 1"
    elif product < 1 - margin and best <= 0:
        passed, gap, msg = False, closed, "criterion predicts entanglement but the oracle found none"
    else:
        passed, gap, msg = True, abs(closed - best), "ok"
    return VerdictCheck(product, closed, best, criterion, passed, gap, msg, search)
