"""MMD and mean-embedding estimators.

Classical V- and U-statistic estimators, their outlier-robust median-of-means
counterparts optimised by block-coordinate ascent over the unit ball of the
RKHS, closed-form MMD values for Gaussian inputs, and empirical covariance
diagnostics with the matching deviation-bound evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HyperparameterError, ShapeError
from .kernels import AggregatedGram, Kernel, aggregated_gram, as_sample, gram
from .linalg import weighted_norm
from .mon import BlockPartition, make_partition, median_block

EARLY_STOP_TOL = 1e-12
EARLY_STOP_PATIENCE = 10
DEFAULT_ITERATIONS = 100
DEFAULT_REBUILD_PERIOD = 10

ESTIMATOR_NAMES = ("vstat", "ustat", "monk_bcd", "monk_bcd_fast")


@dataclass(frozen=True)
class MmdEstimate:
    """Result of one MMD estimation run.

    ``value`` is reported raw; the block-coordinate estimators can in
    principle come out negative and callers who compare against a true
    MMD >= 0 clamp at the comparison site.  For the U-statistic, ``u_squared``
    keeps the unbiased squared-scale value and ``value`` is its signed root.
    ``block_values`` and ``blocks`` describe the final partition for the
    median-of-means methods (empty for the classical ones).
    """

    value: float
    method: str
    q_count: int
    iterations_run: int = 0
    objective_trace: tuple[float, ...] = ()
    seed: int = 0
    u_squared: float | None = None
    block_values: tuple[float, ...] = ()
    blocks: tuple[tuple[int, ...], ...] = ()


@dataclass(frozen=True)
class CoefExpansion:
    """A function in the RKHS written as a kernel expansion over base points.

    Represents ``f = sum_i c[i] k(., base_x[i]) + sum_j c[nx + j] k(., base_y[j])``.
    """

    base_x: np.ndarray
    base_y: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        if len(self.c) != len(self.base_x) + len(self.base_y):
            raise ShapeError(
                f"coefficient length {len(self.c)} does not match "
                f"{len(self.base_x)} + {len(self.base_y)} base points"
            )

    def points(self) -> np.ndarray:
        if len(self.base_y) == 0:
            return self.base_x
        if len(self.base_x) == 0:
            return self.base_y
        return np.concatenate([self.base_x, self.base_y])


def empirical_embedding(xs) -> CoefExpansion:
    """The plain empirical mean embedding: weight 1/n on every point."""
    xs = as_sample(xs)
    n = len(xs)
    if n == 0:
        raise ShapeError("cannot embed an empty sample")
    return CoefExpansion(base_x=xs, base_y=xs[:0], c=np.full(n, 1.0 / n))


# ---------------------------------------------------------------------------
# Classical estimators
# ---------------------------------------------------------------------------


def mmd_vstat(g: AggregatedGram, seed: int = 0) -> MmdEstimate:
    """Biased (with-diagonal) MMD estimate: the RKHS norm of the difference
    of the two empirical mean embeddings."""
    s = float(g.kxx.sum() + g.kyy.sum() - 2.0 * g.kxy.sum())
    return MmdEstimate(value=math.sqrt(max(s, 0.0)) / g.n, method="vstat", q_count=1, seed=seed)


def mmd_ustat(g: AggregatedGram, seed: int = 0) -> MmdEstimate:
    """Unbiased MMD^2 estimate (diagonal terms removed) and its signed root."""
    n = g.n
    if n < 2:
        raise ShapeError("the unbiased estimator needs at least 2 points per side")
    sum_xx = float(g.kxx.sum() - np.trace(g.kxx))
    sum_yy = float(g.kyy.sum() - np.trace(g.kyy))
    u = (sum_xx + sum_yy) / (n * (n - 1)) - 2.0 * float(g.kxy.sum()) / (n * n)
    value = math.copysign(math.sqrt(abs(u)), u)
    return MmdEstimate(value=value, method="ustat", q_count=1, seed=seed, u_squared=u)


# ---------------------------------------------------------------------------
# Block objectives
# ---------------------------------------------------------------------------


def _signed_block_means(diff: np.ndarray, part: BlockPartition) -> np.ndarray:
    m = part.block_size
    return diff[part.used_indices()].reshape(part.q_count, m).sum(axis=1) / m


def block_objectives(g: AggregatedGram, coef, part: BlockPartition) -> np.ndarray:
    """Per-block projections of the difference of block mean embeddings onto f.

    Entry q is ``(1/|S_q|) * [1_q; -1_q]^T K c`` for the coefficient vector c
    of ``coef`` (a :class:`CoefExpansion` over the same base points, or a raw
    length-2n vector).
    """
    c = np.asarray(coef.c if isinstance(coef, CoefExpansion) else coef, dtype=np.float64)
    if c.shape != (2 * g.n,):
        raise ShapeError(f"coefficient vector must have length {2 * g.n}, got {c.shape}")
    if part.n != g.n:
        raise ShapeError(f"partition over {part.n} items does not match n={g.n}")
    kc = g.entries @ c
    return _signed_block_means(kc[: g.n] - kc[g.n :], part)


def _support_objectives(
    g: AggregatedGram, support: tuple[np.ndarray, float] | None, part: BlockPartition
) -> np.ndarray:
    """block_objectives for the sparse iterate c = scale * [1_b; -1_b]."""
    if support is None:
        return np.zeros(part.q_count)
    idx, scale = support
    n = g.n
    kc = scale * (g.entries[:, idx].sum(axis=1) - g.entries[:, n + idx].sum(axis=1))
    return _signed_block_means(kc[:n] - kc[n:], part)


def _signed_indicator(n: int, idx: np.ndarray) -> np.ndarray:
    v = np.zeros(2 * n)
    v[idx] = 1.0
    v[n + idx] = -1.0
    return v


# ---------------------------------------------------------------------------
# Median-of-means estimators
# ---------------------------------------------------------------------------


def monk_bcd(
    g: AggregatedGram,
    q_count: int,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    *,
    drop_remainder: bool = False,
) -> MmdEstimate:
    """Robust MMD estimate: coordinate ascent on the unit ball against the
    median-attaining block.

    Each iteration reshuffles the sample into ``q_count`` equal blocks, finds
    the block whose projection attains the (lower) median, and replaces the
    iterate with the analytic maximiser for that block,
    ``c = [1_q; -1_q] / ||L^T [1_q; -1_q]||``.  The returned value is the
    median of the per-block projections at the final iterate.  Stops early
    once the median moves less than 1e-12 for 10 consecutive iterations.
    """
    if iterations < 1:
        raise HyperparameterError("iterations must be >= 1")
    rng = np.random.default_rng(seed)
    factor = g.chol()
    n = g.n
    support: tuple[np.ndarray, float] | None = None
    trace: list[float] = []
    stable = 0
    prev = None
    part = None
    objectives = np.zeros(q_count)
    for t in range(1, iterations + 1):
        part = make_partition(n, q_count, rng=rng, drop_remainder=drop_remainder)
        pre = _support_objectives(g, support, part)
        q_m, _ = median_block(pre)
        idx = part.blocks[q_m]
        denom = weighted_norm(factor, _signed_indicator(n, idx))
        support = (idx, 1.0 / denom) if denom > 0 else None
        objectives = _support_objectives(g, support, part)
        _, med = median_block(objectives)
        trace.append(med)
        if prev is not None and abs(med - prev) < EARLY_STOP_TOL:
            stable += 1
        else:
            stable = 0
        prev = med
        if stable >= EARLY_STOP_PATIENCE:
            break
    return MmdEstimate(
        value=trace[-1],
        method="monk_bcd",
        q_count=q_count,
        iterations_run=len(trace),
        objective_trace=tuple(trace),
        seed=seed,
        block_values=tuple(float(v) for v in objectives),
        blocks=tuple(tuple(int(i) for i in b) for b in part.blocks),
    )


def _normalize_rebuild(rebuild_at, iterations: int) -> set[int]:
    if rebuild_at is None:
        rebuild_at = set(range(1, iterations + 1, DEFAULT_REBUILD_PERIOD))
    rebuild_at = {int(t) for t in rebuild_at}
    rebuild_at.add(1)
    return rebuild_at


def _bcd_fast_core(
    n: int,
    block_gram,
    q_count: int,
    iterations: int,
    rebuild_at,
    seed: int,
    drop_remainder: bool,
) -> MmdEstimate:
    if iterations < 1:
        raise HyperparameterError("iterations must be >= 1")
    rebuild_at = _normalize_rebuild(rebuild_at, iterations)
    rng = np.random.default_rng(seed)
    part = None
    grams: list[AggregatedGram] = []
    coefs: list[np.ndarray] = []
    u = None
    trace: list[float] = []
    stable = 0
    prev = None
    objectives = np.zeros(q_count)
    for t in range(1, iterations + 1):
        if t in rebuild_at:
            part = make_partition(n, q_count, rng=rng, drop_remainder=drop_remainder)
            m = part.block_size
            grams = [block_gram(idx) for idx in part.blocks]
            u = np.concatenate([np.ones(m), -np.ones(m)])
            # Warm start: every block begins at its analytic maximiser.  A zero
            # start leaves the lower median pinned on still-zero blocks, which
            # stalls the ascent with half the blocks never updated.
            coefs = []
            for g_q in grams:
                denom = weighted_norm(g_q.chol(), u)
                coefs.append(u / denom if denom > 0 else np.zeros_like(u))
            objectives = np.array([float(u @ (grams[q].entries @ coefs[q])) / m for q in range(q_count)])
        q_m, _ = median_block(objectives)
        denom = weighted_norm(grams[q_m].chol(), u)
        coefs[q_m] = u / denom if denom > 0 else np.zeros_like(u)
        objectives[q_m] = float(u @ (grams[q_m].entries @ coefs[q_m])) / part.block_size
        _, med = median_block(objectives)
        trace.append(med)
        if prev is not None and abs(med - prev) < EARLY_STOP_TOL:
            stable += 1
        else:
            stable = 0
        prev = med
        if stable >= EARLY_STOP_PATIENCE:
            break
    return MmdEstimate(
        value=trace[-1],
        method="monk_bcd_fast",
        q_count=q_count,
        iterations_run=len(trace),
        objective_trace=tuple(trace),
        seed=seed,
        block_values=tuple(float(v) for v in objectives),
        blocks=tuple(tuple(int(i) for i in b) for b in part.blocks),
    )


def monk_bcd_fast(
    kernel: Kernel,
    xs,
    ys,
    q_count: int,
    iterations: int = DEFAULT_ITERATIONS,
    rebuild_at=None,
    seed: int = 0,
    *,
    drop_remainder: bool = False,
) -> MmdEstimate:
    """Approximate robust MMD estimate with per-block Gram matrices only.

    Coefficients live block-locally, so each rebuild costs Q Gram matrices of
    side 2n/Q instead of one of side 2n; blocks (and the per-block Cholesky
    factors) are rebuilt only at the iterations in ``rebuild_at`` (default:
    every 10th, starting at the first), where every block coefficient is
    initialised at its analytic maximiser.
    """
    xs = as_sample(xs)
    ys = as_sample(ys)
    if len(xs) != len(ys) or len(xs) == 0:
        raise ShapeError(f"need equal non-empty samples, got {len(xs)} and {len(ys)}")

    def block_gram(idx: np.ndarray) -> AggregatedGram:
        return aggregated_gram(kernel, xs[idx], ys[idx])

    return _bcd_fast_core(
        len(xs), block_gram, q_count, iterations, rebuild_at, seed, drop_remainder
    )


def monk_bcd_fast_from_gram(
    g: AggregatedGram,
    q_count: int,
    iterations: int = DEFAULT_ITERATIONS,
    rebuild_at=None,
    seed: int = 0,
    *,
    drop_remainder: bool = False,
) -> MmdEstimate:
    """monk_bcd_fast driven from a precomputed aggregated Gram matrix.

    Produces the same value as the direct form for the same seed; useful when
    kernel evaluations are cached (bootstrap resampling of pooled points).
    """

    def block_gram(idx: np.ndarray) -> AggregatedGram:
        both = np.concatenate([idx, g.n + idx])
        return AggregatedGram(n=len(idx), entries=g.entries[np.ix_(both, both)])

    return _bcd_fast_core(g.n, block_gram, q_count, iterations, rebuild_at, seed, drop_remainder)


def monk_mean_embedding(
    kernel: Kernel,
    xs,
    q_count: int,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    *,
    drop_remainder: bool = False,
) -> CoefExpansion:
    """Robust mean-embedding estimate via median-of-means block selection.

    Heuristic coordinate scheme: each iteration reshuffles the blocks, scores
    every block by the squared RKHS distance between the current iterate and
    that block's empirical embedding, and jumps to the embedding of the block
    attaining the median score.  With one block this is the plain empirical
    mean embedding.
    """
    xs = as_sample(xs)
    n = len(xs)
    rng = np.random.default_rng(seed)
    kmat = gram(kernel, xs, xs)
    w = np.zeros(n)
    for _ in range(iterations):
        part = make_partition(n, q_count, rng=rng, drop_remainder=drop_remainder)
        m = part.block_size
        kw = kmat @ w
        wkw = float(w @ kw)
        cross = kw[part.used_indices()].reshape(q_count, m).mean(axis=1)
        self_terms = np.array(
            [float(kmat[np.ix_(idx, idx)].sum()) / (m * m) for idx in part.blocks]
        )
        scores = wkw - 2.0 * cross + self_terms
        q_m, _ = median_block(scores)
        w = np.zeros(n)
        w[part.blocks[q_m]] = 1.0 / m
    return CoefExpansion(base_x=xs, base_y=xs[:0], c=w)


def rkhs_distance(f: CoefExpansion, g: CoefExpansion, kernel: Kernel) -> float:
    """RKHS norm of the difference of two kernel expansions."""
    pf, pg = f.points(), g.points()
    cf = np.asarray(f.c, dtype=np.float64)
    cg = np.asarray(g.c, dtype=np.float64)
    d2 = 0.0
    if len(pf):
        d2 += float(cf @ gram(kernel, pf, pf) @ cf)
    if len(pg):
        d2 += float(cg @ gram(kernel, pg, pg) @ cg)
    if len(pf) and len(pg):
        d2 -= 2.0 * float(cf @ gram(kernel, pf, pg) @ cg)
    return math.sqrt(max(d2, 0.0))


# ---------------------------------------------------------------------------
# Closed-form MMD for Gaussian inputs
# ---------------------------------------------------------------------------


def analytic_mmd_gaussian(kernel: Kernel, m1: float, s1: float, m2: float, s2: float) -> float:
    """Exact MMD between N(m1, s1^2) and N(m2, s2^2).

    Available for the rbf kernel and the degree-2 polynomial kernel; both
    closed forms are validated against Monte-Carlo integration in the test
    suite before use.
    """
    if not (s1 > 0 and s2 > 0):
        raise HyperparameterError("standard deviations must be positive")
    if kernel.family == "rbf":
        sig = kernel.params["sigma"]
        pp = sig / math.sqrt(sig * sig + 2.0 * s1 * s1)
        qq = sig / math.sqrt(sig * sig + 2.0 * s2 * s2)
        tau = sig * sig + s1 * s1 + s2 * s2
        pq = sig * math.exp(-((m1 - m2) ** 2) / (2.0 * tau)) / math.sqrt(tau)
        mmd2 = pp + qq - 2.0 * pq
    elif kernel.family == "polynomial" and kernel.params["degree"] == 2:
        a1 = m1 * m1 + s1 * s1
        a2 = m2 * m2 + s2 * s2
        mmd2 = (a1 - a2) ** 2 + 2.0 * kernel.params["offset"] * (m1 - m2) ** 2
    else:
        raise HyperparameterError(
            "closed-form MMD is available for rbf and degree-2 polynomial kernels only"
        )
    return math.sqrt(max(mmd2, 0.0))


# ---------------------------------------------------------------------------
# Covariance diagnostics and deviation bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundDiagnostics:
    """Empirical covariance-operator summaries plus bound parameters.

    ``trace_hat`` and ``opnorm_hat`` estimate the trace and operator norm of
    the RKHS covariance operator.  For the two-sample ("mmd") bound they hold
    the sums over both samples; see :func:`combine_diagnostics`.
    """

    trace_hat: float
    opnorm_hat: float
    delta: float = 0.5
    eta: float = 0.05
    n_corrupt: int = 0

    def __post_init__(self):
        if not 0 < self.delta <= 0.5:
            raise HyperparameterError("delta must lie in (0, 1/2]")
        if not 0 < self.eta < 1:
            raise HyperparameterError("eta must lie in (0, 1)")
        if self.n_corrupt < 0 or self.trace_hat < 0 or self.opnorm_hat < 0:
            raise HyperparameterError("counts and covariance summaries must be non-negative")

    @property
    def q_required(self) -> float:
        """Block count 72 delta^-2 ln(1/eta) at which the bounds hold."""
        return 72.0 * math.log(1.0 / self.eta) / (self.delta * self.delta)

    def admissible(self, q_count: int) -> bool:
        """Whether the contamination level fits ``n_corrupt <= Q (1/2 - delta)``."""
        return self.n_corrupt <= q_count * (0.5 - self.delta)


def cov_diagnostics(
    kernel: Kernel, xs, *, delta: float = 0.5, eta: float = 0.05, n_corrupt: int = 0
) -> BoundDiagnostics:
    """Empirical trace and operator norm of the covariance operator of xs."""
    xs = as_sample(xs)
    n = len(xs)
    if n < 2:
        raise ShapeError("covariance diagnostics need at least 2 points")
    kmat = gram(kernel, xs, xs)
    trace_hat = max(float(np.trace(kmat)) / n - float(kmat.sum()) / (n * n), 0.0)
    row_means = kmat.mean(axis=1, keepdims=True)
    centered = kmat - row_means - row_means.T + kmat.mean()
    opnorm_hat = max(float(np.linalg.eigvalsh(centered)[-1]) / n, 0.0)
    return BoundDiagnostics(
        trace_hat=trace_hat,
        opnorm_hat=min(opnorm_hat, trace_hat),
        delta=delta,
        eta=eta,
        n_corrupt=n_corrupt,
    )


def combine_diagnostics(dp: BoundDiagnostics, dq: BoundDiagnostics) -> BoundDiagnostics:
    """Sum two per-sample diagnostics for the two-sample bound."""
    if dp.delta != dq.delta or dp.eta != dq.eta:
        raise HyperparameterError("cannot combine diagnostics with different delta or eta")
    return BoundDiagnostics(
        trace_hat=dp.trace_hat + dq.trace_hat,
        opnorm_hat=dp.opnorm_hat + dq.opnorm_hat,
        delta=dp.delta,
        eta=dp.eta,
        n_corrupt=max(dp.n_corrupt, dq.n_corrupt),
    )


def theorem_bound(d: BoundDiagnostics, n_samples: int, which: str) -> float:
    """High-probability deviation bound for the median-of-means estimators.

    ``which`` selects the one-sample mean-embedding bound or the two-sample
    MMD bound (whose diagnostics carry summed trace/opnorm).
    """
    if n_samples < 1:
        raise HyperparameterError("sample count must be >= 1")
    log_term = math.log(1.0 / d.eta)
    if which == "mean_embedding":
        lead = 12.0 * (1.0 + math.sqrt(2.0)) / d.delta
        first = math.sqrt(6.0 * d.opnorm_hat * log_term / (d.delta * n_samples))
    elif which == "mmd":
        lead = 12.0 / d.delta
        first = math.sqrt(d.opnorm_hat * log_term / (d.delta * n_samples))
    else:
        raise HyperparameterError(f"unknown bound {which!r}")
    second = 2.0 * math.sqrt(d.trace_hat / n_samples)
    return lead * max(first, second)


# ---------------------------------------------------------------------------
# Uniform front-end over the four estimators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Estimator:
    """Configured estimator, callable on samples or on a precomputed Gram."""

    method: str
    q_count: int = 1
    iterations: int = DEFAULT_ITERATIONS
    rebuild_period: int = DEFAULT_REBUILD_PERIOD
    drop_remainder: bool = False

    def __post_init__(self):
        if self.method not in ESTIMATOR_NAMES:
            raise HyperparameterError(
                f"unknown estimator {self.method!r}; choose from {ESTIMATOR_NAMES}"
            )

    def _rebuild_at(self) -> set[int]:
        return set(range(1, self.iterations + 1, self.rebuild_period))

    def from_gram(self, g: AggregatedGram, seed: int = 0) -> MmdEstimate:
        if self.method == "vstat":
            return mmd_vstat(g, seed=seed)
        if self.method == "ustat":
            return mmd_ustat(g, seed=seed)
        if self.method == "monk_bcd":
            return monk_bcd(
                g, self.q_count, self.iterations, seed, drop_remainder=self.drop_remainder
            )
        return monk_bcd_fast_from_gram(
            g,
            self.q_count,
            self.iterations,
            self._rebuild_at(),
            seed,
            drop_remainder=self.drop_remainder,
        )

    def estimate(self, kernel: Kernel, xs, ys, seed: int = 0) -> MmdEstimate:
        if self.method == "monk_bcd_fast":
            return monk_bcd_fast(
                kernel,
                xs,
                ys,
                self.q_count,
                self.iterations,
                self._rebuild_at(),
                seed,
                drop_remainder=self.drop_remainder,
            )
        return self.from_gram(aggregated_gram(kernel, xs, ys), seed=seed)
