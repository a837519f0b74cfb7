#!/usr/bin/env python3
"""
Coupled non-negative Tucker2 factorization of the three back-off tensors.

Each back-off tensor is approximated with two shared factors and its own core, the relation mode
keeping the identity factor:

    X3 ~ G3 x1 A x2 B,   X2 ~ G2 x1 A x2 C,   X1 ~ G1 x1 B x2 C

and the solver minimises the sum of the three squared Frobenius residuals plus
lambda_a |A|^2 + lambda_b |B|^2 + lambda_c |C|^2 with multiplicative updates. Every factor update
is the Lee-Seung rule for the concatenated mode unfoldings of the two tensors sharing that factor;
the core updates are the Tucker multiplicative rules.
"""

from __future__ import annotations

import math
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linear_sum_assignment

from .corpus import BackoffTensors, FourModeTensor, build_4mode_tensor, build_backoff_tensors
from .errors import ConfigError, DataError, NumericError, ShapeError
from .models import (
    DEFAULT_MAX_ITERS, DEFAULT_SEED, DEFAULT_TOL, DENSE_SLICE_LIMIT, EPSILON, INIT_ITERS, INIT_RESTARTS,
    FactorSet, FitReport, Ranks, Regularizers, TupleRecord, Vocabulary,
)
from .sparse_tensor import SparseTensor3, frobenius_norm, matricize, ttm, unfold
from .utils import get_logger

logger = get_logger("factorize")

Term = Tuple[SparseTensor3, np.ndarray, np.ndarray, np.ndarray]


# --- Validation ---
def validate_ranks(ranks: Ranks, vocab: Vocabulary) -> None:
    n1, n2, n3, _ = vocab.sizes
    for name, r, n in (("r1", ranks.r1, n1), ("r2", ranks.r2, n2), ("r3", ranks.r3, n3)):
        if r < 1:
            raise ConfigError(f"{name} must be >= 1, got {r}")
        if r > n:
            raise ConfigError(f"{name}={r} exceeds the vocabulary size {n}")


def validate_regularizers(reg: Regularizers) -> None:
    for name, value in zip(("lambda_a", "lambda_b", "lambda_c"), reg.as_tuple()):
        if not (value >= 0 and math.isfinite(value)):
            raise ConfigError(f"{name} must be a finite non-negative number, got {value}")


def _check_shapes(tensors: BackoffTensors, f: FactorSet) -> None:
    n1, n2, n3 = f.A.shape[0], f.B.shape[0], f.C.shape[0]
    r1, r2, r3 = f.ranks.as_tuple()
    m = tensors.x3.shape[2]
    expected = {
        "X1": (tensors.x1.shape, (n2, n3, m)), "X2": (tensors.x2.shape, (n1, n3, m)),
        "X3": (tensors.x3.shape, (n1, n2, m)), "G1": (f.G1.shape, (r2, r3, m)),
        "G2": (f.G2.shape, (r1, r3, m)), "G3": (f.G3.shape, (r1, r2, m)),
    }
    for name, (got, want) in expected.items():
        if tuple(got) != want:
            raise ShapeError(f"{name} has shape {tuple(got)}, expected {want}")


def _terms(tensors: BackoffTensors, f: FactorSet) -> List[Term]:
    """(X, G, P, Q) for the three coupled reconstructions X ~ G x1 P x2 Q."""
    return [
        (tensors.x1, f.G1, f.B, f.C),
        (tensors.x2, f.G2, f.A, f.C),
        (tensors.x3, f.G3, f.A, f.B),
    ]


# --- Reconstruction and residuals ---
def reconstruct(core: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Dense G x1 P x2 Q x3 I."""
    return ttm(ttm(core, p.T, 1), q.T, 2)


def synthesize_backoff(f: FactorSet, vocab: Optional[Vocabulary] = None) -> BackoffTensors:
    """Back-off tensors reproduced exactly by ``f``."""
    x1 = SparseTensor3.from_dense(reconstruct(f.G1, f.B, f.C))
    x2 = SparseTensor3.from_dense(reconstruct(f.G2, f.A, f.C))
    x3 = SparseTensor3.from_dense(reconstruct(f.G3, f.A, f.B))
    if vocab is None:
        vocab = Vocabulary(
            subjects=[f"s{i}" for i in range(f.A.shape[0])],
            objects=[f"o{i}" for i in range(f.B.shape[0])],
            others=[f"c{i}" for i in range(f.C.shape[0])],
            relations=[f"r{i}" for i in range(f.n_relations)],
        )
    return BackoffTensors(x1, x2, x3, vocab, x3.total)


def residual_sq(x: SparseTensor3, core: Optional[np.ndarray], p: np.ndarray, q: np.ndarray) -> float:
    """|X - G x1 P x2 Q|_F^2; ``core=None`` stands for the zero reconstruction.

    Small slices are compared densely one relation at a time. Larger ones use
    |X|^2 - 2<X, R> + |R|^2 so only stored entries of X enter the cross term.
    """
    n_a, n_b, m = x.shape
    if n_a * n_b <= DENSE_SLICE_LIMIT:
        partial = []
        for k in range(m):
            xk = x.slice(k).toarray()
            rk = np.zeros_like(xk) if core is None else p @ core[:, :, k] @ q.T
            partial.append(float(np.sum(np.square(xk - rk))))
        return math.fsum(partial)

    norm_sq = math.fsum(np.square(x.vals))
    if core is None:
        return norm_sq
    cross = math.fsum((core * ttm(ttm(x, p, 1), q, 2)).ravel())
    gram = math.fsum((core * ttm(ttm(core, p.T @ p, 1), q.T @ q, 2)).ravel())
    return max(0.0, norm_sq - 2.0 * cross + gram)


def objective(tensors: BackoffTensors, f: FactorSet, reg: Regularizers) -> float:
    _check_shapes(tensors, f)
    loss = [residual_sq(x, g, p, q) for x, g, p, q in _terms(tensors, f)]
    penalty = [
        reg.lambda_a * frobenius_norm(f.A) ** 2,
        reg.lambda_b * frobenius_norm(f.B) ** 2,
        reg.lambda_c * frobenius_norm(f.C) ** 2,
    ]
    return math.fsum(loss + penalty)


def fit_report(tensors: BackoffTensors, f: FactorSet, reg: Optional[Regularizers] = None) -> FitReport:
    """FIT = 1 - |X - R| / |X| per tensor and their mean."""
    _check_shapes(tensors, f)
    fits = []
    for name, (x, g, p, q) in zip(("X1", "X2", "X3"), _terms(tensors, f)):
        norm_sq = residual_sq(x, None, p, q)
        if norm_sq == 0.0:
            raise DataError(f"{name} has zero norm; FIT is undefined")
        fits.append(1.0 - math.sqrt(residual_sq(x, g, p, q)) / math.sqrt(norm_sq))
    fit1, fit2, fit3 = fits
    return FitReport(
        fit1=fit1, fit2=fit2, fit3=fit3, avg_fit=(fit1 + fit2 + fit3) / 3,
        objective=objective(tensors, f, reg or Regularizers()), iterations_run=0,
    )


# --- Multiplicative updates ---
def _factor_terms(x: SparseTensor3, core: np.ndarray, other: np.ndarray, mode: int) -> Tuple[np.ndarray, np.ndarray]:
    """Numerator X_(n) H^T and Gram H H^T for the factor at ``mode`` (1 or 2) of X ~ G x1 P x2 Q.

    H is the mode-n unfolding of the core multiplied by the other factor, e.g. (G x2 Q)_(1) for
    the first factor. Both products are formed without materialising H.
    """
    other_mode = 3 - mode
    core_n = unfold(core, mode)
    numerator = unfold(ttm(x, other, other_mode), mode) @ core_n.T
    gram = unfold(ttm(core, other.T @ other, other_mode), mode) @ core_n.T
    return numerator, gram


def _multiplicative(current: np.ndarray, numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    updated = current * numerator / np.maximum(denominator, EPSILON)
    return np.maximum(updated, EPSILON)


def update_A(tensors: BackoffTensors, f: FactorSet, reg: Regularizers) -> np.ndarray:
    num3, gram3 = _factor_terms(tensors.x3, f.G3, f.B, 1)
    num2, gram2 = _factor_terms(tensors.x2, f.G2, f.C, 1)
    return _multiplicative(f.A, num3 + num2, f.A @ (gram3 + gram2) + reg.lambda_a * f.A)


def update_B(tensors: BackoffTensors, f: FactorSet, reg: Regularizers) -> np.ndarray:
    num3, gram3 = _factor_terms(tensors.x3, f.G3, f.A, 2)
    num1, gram1 = _factor_terms(tensors.x1, f.G1, f.C, 1)
    return _multiplicative(f.B, num3 + num1, f.B @ (gram3 + gram1) + reg.lambda_b * f.B)


def update_C(tensors: BackoffTensors, f: FactorSet, reg: Regularizers) -> np.ndarray:
    # X2 and X1 both carry C in their second mode.
    num2, gram2 = _factor_terms(tensors.x2, f.G2, f.A, 2)
    num1, gram1 = _factor_terms(tensors.x1, f.G1, f.B, 2)
    return _multiplicative(f.C, num2 + num1, f.C @ (gram2 + gram1) + reg.lambda_c * f.C)


def _update_core(x: SparseTensor3, core: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    numerator = ttm(ttm(x, p, 1), q, 2)
    denominator = ttm(ttm(core, p.T @ p, 1), q.T @ q, 2)
    return core * numerator / np.maximum(denominator, EPSILON)


def update_cores(tensors: BackoffTensors, f: FactorSet) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    g1, g2, g3 = (_update_core(x, g, p, q) for x, g, p, q in _terms(tensors, f))
    return g1, g2, g3


# --- Initialization ---
def _positive_uniform(rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    """Uniform on (0, 1]."""
    return 1.0 - rng.random(shape)


def pure_rows(m: sp.spmatrix, rank: int) -> List[int]:
    """Successive projection on the L1-normalised rows of ``m``: ``rank`` rows spanning its row space.

    Each step takes the row with the largest norm left after projecting out the rows already
    taken; ties go to the lowest index. All-zero rows are only taken once nothing else is left.
    """
    m = sp.csr_matrix(m, dtype=float)
    sums = np.asarray(abs(m).sum(axis=1)).ravel()
    scale = np.divide(1.0, sums, out=np.zeros_like(sums), where=sums > 0)
    normalized = sp.csr_matrix(sp.diags(scale) @ m)
    norms = np.asarray(normalized.multiply(normalized).sum(axis=1)).ravel()

    picked: List[int] = []
    basis: List[np.ndarray] = []
    for _ in range(rank):
        residual = norms.copy()
        if basis:
            projected = np.asarray(normalized @ np.column_stack(basis))
            residual -= np.sum(np.square(projected), axis=1)
        if picked:
            residual[picked] = -np.inf
        row_index = int(np.argmax(residual))
        picked.append(row_index)
        row = normalized[row_index].toarray().ravel()
        for v in basis:
            row -= v * float(v @ row)
        length = float(np.linalg.norm(row))
        if length > EPSILON:
            basis.append(row / length)
    return picked


def _pure_row_factor(x: SparseTensor3, mode: int, rank: int) -> np.ndarray:
    """Least-squares coefficients of every mode-n row on the pure rows, clipped to the epsilon floor."""
    m = sp.csr_matrix(matricize(x, mode))
    picked = m[pure_rows(m, rank)]
    sums = np.asarray(abs(picked).sum(axis=1)).ravel()
    scale = np.divide(1.0, sums, out=np.zeros_like(sums), where=sums > 0)
    s = np.asarray((sp.diags(scale) @ picked).todense())
    coef = np.asarray(m @ s.T) @ np.linalg.pinv(s @ s.T)
    return np.maximum(coef, EPSILON)


def pure_row_start(x: SparseTensor3, rank_p: int, rank_q: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic Tucker2 start: pure-row factors and the least-squares core they imply, clipped positive."""
    p = _pure_row_factor(x, 1, rank_p)
    q = _pure_row_factor(x, 2, rank_q)
    core = ttm(ttm(x, np.linalg.pinv(p).T, 1), np.linalg.pinv(q).T, 2)
    return p, q, np.maximum(core, EPSILON)


def _tucker2_mu(
    x: SparseTensor3, p: np.ndarray, q: np.ndarray, core: np.ndarray, iters: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    for _ in range(iters):
        num, gram = _factor_terms(x, core, q, 1)
        p = _multiplicative(p, num, p @ gram)
        num, gram = _factor_terms(x, core, p, 2)
        q = _multiplicative(q, num, q @ gram)
        core = _update_core(x, core, p, q)
    return p, q, core


def tucker2_single(
    x: SparseTensor3, rank_p: int, rank_q: int, rng: np.random.Generator, iters: int = INIT_ITERS
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Non-negative Tucker2 of one tensor, X ~ G x1 P x2 Q, from a strictly positive random start."""
    n_p, n_q, m = x.shape
    p = _positive_uniform(rng, (n_p, rank_p))
    q = _positive_uniform(rng, (n_q, rank_q))
    core = _positive_uniform(rng, (rank_p, rank_q, m))
    return _tucker2_mu(x, p, q, core, iters)


def best_tucker2(
    x: SparseTensor3,
    rank_p: int,
    rank_q: int,
    rng: np.random.Generator,
    iters: int = INIT_ITERS,
    restarts: int = INIT_RESTARTS,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Lowest-residual Tucker2 among the pure-row start and ``restarts`` random starts.

    The winner's factor columns are scaled to unit length, the core absorbing the scale.
    """
    candidates = [_tucker2_mu(x, *pure_row_start(x, rank_p, rank_q), iters)]
    candidates.extend(tucker2_single(x, rank_p, rank_q, rng, iters) for _ in range(restarts))
    residuals = [residual_sq(x, core, p, q) for p, q, core in candidates]
    p, q, core = candidates[int(np.argmin(residuals))]
    logger.debug("single Tucker2 %s: best of %d residuals %r", x.shape, len(candidates), min(residuals))

    p_norms = np.maximum(np.linalg.norm(p, axis=0), EPSILON)
    q_norms = np.maximum(np.linalg.norm(q, axis=0), EPSILON)
    core = core * p_norms[:, None, None] * q_norms[None, :, None]
    return p / p_norms, q / q_norms, core


def column_matching(reference: np.ndarray, candidate: np.ndarray) -> np.ndarray:
    """Permutation of ``candidate``'s columns maximising their total cosine similarity to ``reference``."""
    ref = reference / np.maximum(np.linalg.norm(reference, axis=0), EPSILON)
    cand = candidate / np.maximum(np.linalg.norm(candidate, axis=0), EPSILON)
    _, order = linear_sum_assignment(ref.T @ cand, maximize=True)
    return order


def init_factors(
    tensors: BackoffTensors,
    ranks: Ranks,
    seed: int = DEFAULT_SEED,
    iters: int = INIT_ITERS,
    restarts: int = INIT_RESTARTS,
) -> FactorSet:
    """Average the factor candidates of three independent single-tensor decompositions.

    Each shared factor gets one candidate from each tensor that carries it. The second candidate's
    columns are matched to the first's before averaging and its core is permuted along.
    """
    validate_ranks(ranks, tensors.vocab)
    if restarts < 0:
        raise ConfigError(f"restarts must be >= 0, got {restarts}")
    rng3, rng2, rng1 = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3))
    a3, b3, g3 = best_tucker2(tensors.x3, ranks.r1, ranks.r2, rng3, iters, restarts)
    a2, c2, g2 = best_tucker2(tensors.x2, ranks.r1, ranks.r3, rng2, iters, restarts)
    b1, c1, g1 = best_tucker2(tensors.x1, ranks.r2, ranks.r3, rng1, iters, restarts)

    order = column_matching(a3, a2)
    a2, g2 = a2[:, order], g2[order, :, :]
    order = column_matching(b3, b1)
    b1, g1 = b1[:, order], g1[order, :, :]
    order = column_matching(c2, c1)
    c1, g1 = c1[:, order], g1[:, order, :]
    return FactorSet(
        A=(a3 + a2) / 2.0, B=(b3 + b1) / 2.0, C=(c2 + c1) / 2.0,
        G1=g1, G2=g2, G3=g3,
    )


# --- Driver ---
def sweep(tensors: BackoffTensors, f: FactorSet, reg: Regularizers) -> FactorSet:
    """One alternating pass: A, B, C, then the three cores, each seeing the latest factors."""
    f = f.copy()
    f.A = update_A(tensors, f, reg)
    f.B = update_B(tensors, f, reg)
    f.C = update_C(tensors, f, reg)
    f.G1, f.G2, f.G3 = update_cores(tensors, f)
    return f


def factorize(
    tensors: BackoffTensors,
    ranks: Ranks,
    reg: Regularizers,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    seed: int = DEFAULT_SEED,
    init: Optional[FactorSet] = None,
    log_every: int = 50,
    on_sweep: Optional[Callable[[int, FactorSet], None]] = None,
) -> Tuple[FactorSet, FitReport]:
    """Alternate the updates until ``max_iters`` sweeps or a relative decrease below ``tol``.

    ``objective_trace`` in the report holds the initial objective followed by one value per sweep.
    """
    validate_regularizers(reg)
    if max_iters < 1:
        raise ConfigError(f"max_iters must be >= 1, got {max_iters}")
    if not tol >= 0:
        raise ConfigError(f"tol must be >= 0, got {tol}")

    if init is None:
        f = init_factors(tensors, ranks, seed)
    else:
        validate_ranks(init.ranks, tensors.vocab)
        f = init.copy()
    _check_shapes(tensors, f)

    previous = objective(tensors, f, reg)
    if not math.isfinite(previous):
        raise NumericError("initial objective is not finite")
    trace = [previous]
    iterations = 0
    for iterations in range(1, max_iters + 1):
        f = sweep(tensors, f, reg)
        current = objective(tensors, f, reg)
        if not math.isfinite(current):
            raise NumericError(
                f"objective became non-finite at sweep {iterations}; check the epsilon floor and input scale"
            )
        trace.append(current)
        if on_sweep is not None:
            on_sweep(iterations, f)
        if log_every and iterations % log_every == 0:
            logger.debug("sweep %d objective %r", iterations, current)
        decrease = (previous - current) / max(abs(previous), EPSILON)
        if decrease < tol:
            break
        previous = current

    report = fit_report(tensors, f, reg)
    report.iterations_run = iterations
    report.objective_trace = trace
    logger.info(
        "ranks %s lambdas %s: %d sweep(s), objective %r, AvgFIT %r",
        ranks.as_tuple(), reg.as_tuple(), iterations, report.objective, report.avg_fit,
    )
    return f, report


# --- Diagnostics ---
def diagnose_4mode(records: List[TupleRecord], tensors: Optional[BackoffTensors] = None) -> Dict[str, Any]:
    """Sparsity of the 4-mode tensor next to the back-off tensors built from the same records."""
    four_mode, _ = build_4mode_tensor(records)
    if tensors is None:
        tensors = build_backoff_tensors(records)
    report = {"four_mode": {"shape": list(four_mode.shape), "nnz": four_mode.nnz, "sparsity_ratio": four_mode.sparsity_ratio}}
    for name, t in zip(("x1", "x2", "x3"), tensors.tensors()):
        report[name] = {"shape": list(t.shape), "nnz": t.nnz, "sparsity_ratio": t.density}
    logger.info(
        "4-mode sparsity %.3g vs back-off %s",
        four_mode.sparsity_ratio, ", ".join(f"{t.density:.3g}" for t in tensors.tensors()),
    )
    return report


def direct_objective(
    four_mode: FourModeTensor,
    core: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    reg: Regularizers,
    chunk: int = 1024,
) -> float:
    """Objective of factorizing the 4-mode tensor directly, |X - G x1 A x2 B x3 C x4 I|^2 + penalties.

    Kept to show why the back-off is needed; it is never optimised by the pipeline.
    """
    n1, n2, n3, m = four_mode.shape
    if core.shape != (a.shape[1], b.shape[1], c.shape[1], m):
        raise ShapeError(f"core shape {core.shape} does not match the factors and {m} relations")
    if (a.shape[0], b.shape[0], c.shape[0]) != (n1, n2, n3):
        raise ShapeError("factor row counts do not match the 4-mode tensor")

    norm_sq = math.fsum(np.square(four_mode.vals))
    by_relation = np.moveaxis(core, 3, 0)
    cross: List[float] = []
    for lo in range(0, four_mode.nnz, chunk):
        s, o, k, r = four_mode.subs[lo:lo + chunk].T
        values = np.einsum("nabc,na,nb,nc->n", by_relation[r], a[s], b[o], c[k])
        cross.append(float(np.dot(four_mode.vals[lo:lo + chunk], values)))
    weighted = np.einsum("abcr,ax,by,cz->xyzr", core, a.T @ a, b.T @ b, c.T @ c)
    gram = math.fsum((weighted * core).ravel())
    residual = max(0.0, norm_sq - 2.0 * math.fsum(cross) + gram)
    penalty = (
        reg.lambda_a * frobenius_norm(a) ** 2 + reg.lambda_b * frobenius_norm(b) ** 2
        + reg.lambda_c * frobenius_norm(c) ** 2
    )
    return residual + penalty
