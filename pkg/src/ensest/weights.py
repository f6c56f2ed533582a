"""Ensemble weight optimization and the weighted ensemble estimator.

An ensemble of plug-in estimators indexed by bandwidth multipliers
``lbar`` (component l uses k(l) = l * sqrt(M)) has bias terms proportional
to the basis functions psi_i(l) = l^(i/d), i = 1..d-1.  Choosing weights
that sum to one and annihilate (or nearly annihilate) the weighted basis
sums gamma_w(i) = sum_l w(l) psi_i(l) cancels those bias terms, leaving a
dimension-independent MSE rate.

Two solvers are provided:

* ``solve_exact``: minimum-norm solution of the hard constraints
  gamma_w(i) = 0; its squared norm equals the determinant ratio computed
  by ``eta_exact``.  The basis rows are nearly parallel for larger d, the
  constraint system can be conditioned like 1e13, and the minimum norm
  itself can reach 1e20, so this path runs in extended precision
  (mpmath); the reported residuals are those of the extended-precision
  solution, before the returned weights are rounded to float64.
* ``solve_relaxed``: minimizes the largest scaled residual
  |gamma_w(i)| * T^(1/2 - i/(2d)) subject to a cap ``eta`` on ||w||^2.
  The optimum is found by bisection on the residual level; feasibility of
  a level is an exact box-constrained quadratic program in the d-1
  residual targets, solved by active-set enumeration.  All quadratic
  forms are evaluated through an orthonormal basis of the constraint row
  space (QR plus triangular solves), never through the squared-condition
  Gram inverse.

Weights depend only on (lbar, d, T, eta), never on data, so they can be
computed once and cached.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass

import numpy as np
from mpmath import mp
from scipy.linalg import solve_triangular

from ._kernels import window_counts
from .density import truncated_volumes
from .functionals import FunctionalSpec
from .plugin import EstimateRecord, SplitConfig, plugin_values_from_counts, split

_EXACT_DPS = 60  # enough for Gram conditioning up to ~1e27


def default_lbar(count: int = 50, scale: float = 10.0, span: float = 3.0) -> np.ndarray:
    """Standard bandwidth-multiplier grid: count points in (span/scale, span].

    l_i = span/scale + (scale-1) * i * span / (scale * count), i = 1..count.
    The defaults give 50 values from 0.354 to 3.0.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if scale <= 1 or span <= 0:
        raise ValueError("need scale > 1 and span > 0")
    i = np.arange(1, count + 1, dtype=np.float64)
    return span / scale + (scale - 1.0) * i * span / (scale * count)


@dataclass(frozen=True)
class EnsembleConfig:
    """Bandwidth grid and problem size for weight optimization.

    lbar: strictly positive, distinct bandwidth multipliers (length L).
    d: sample dimension; the bias index set is {1, .., d-1}, so L must
       exceed d - 1.
    t: total sample count T (enters only the relaxed solver's residual
       scaling).
    """

    lbar: tuple[float, ...]
    d: int
    t: int

    def __post_init__(self):
        lbar = tuple(float(v) for v in self.lbar)
        object.__setattr__(self, "lbar", lbar)
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if self.t < 2:
            raise ValueError("sample size T must be >= 2")
        if any(v <= 0 for v in lbar):
            raise ValueError("bandwidth multipliers must be strictly positive")
        if len(set(lbar)) != len(lbar):
            raise ValueError("bandwidth multipliers must be distinct")
        if len(lbar) <= self.d - 1:
            raise ValueError(f"need L > d-1 = {self.d - 1}, got L = {len(lbar)}")

    @property
    def size(self) -> int:
        return len(self.lbar)

    @property
    def index_set(self) -> range:
        return range(1, self.d)

    @property
    def eta_default(self) -> float:
        return 3.0 * self.d


@dataclass(frozen=True)
class WeightSolution:
    """Weight vector plus feasibility diagnostics.

    residuals[0] is sum(w) (target 1); residuals[i] for i >= 1 is the raw
    basis sum gamma_w(i).  For the relaxed solver, epsilon bounds the
    scaled residuals |gamma_w(i)| * T^(1/2 - i/(2d)).
    """

    w: tuple[float, ...]
    epsilon: float
    norm_sq: float
    residuals: tuple[float, ...]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.w, dtype=np.float64)

    def to_json(self) -> dict:
        return {
            "w": list(self.w),
            "epsilon": self.epsilon,
            "norm_sq": self.norm_sq,
            "residuals": list(self.residuals),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "WeightSolution":
        return cls(tuple(obj["w"]), float(obj["epsilon"]), float(obj["norm_sq"]),
                   tuple(obj["residuals"]))

    @property
    def weights_hash(self) -> str:
        payload = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


def basis_matrix(cfg: EnsembleConfig) -> np.ndarray:
    """Constraint matrix: row of ones on top, one row l^(i/d) per i in the index set."""
    lbar = np.asarray(cfg.lbar)
    rows = [np.ones_like(lbar)]
    rows += [lbar ** (i / cfg.d) for i in cfg.index_set]
    return np.vstack(rows)


def _basis_matrix_hp(cfg: EnsembleConfig) -> "mp.matrix":
    # Same matrix in extended precision; each column needs one mpf power
    # (the d-th root) and then repeated multiplication.
    n_rows = cfg.d
    a = mp.matrix(n_rows, cfg.size)
    for c, l in enumerate(cfg.lbar):
        root = mp.mpf(l) ** (mp.mpf(1) / cfg.d)
        val = mp.mpf(1)
        a[0, c] = val
        for r in range(1, n_rows):
            val *= root
            a[r, c] = val
    return a


def _gram_hp(a: "mp.matrix") -> "mp.matrix":
    g = mp.matrix(a.rows, a.rows)
    for i in range(a.rows):
        for j in range(i, a.rows):
            acc = mp.mpf(0)
            for c in range(a.cols):
                acc += a[i, c] * a[j, c]
            g[i, j] = acc
            g[j, i] = acc
    return g


def solve_exact(cfg: EnsembleConfig) -> WeightSolution:
    """Minimum-norm weights with all bias-cancellation constraints exact.

    Solves min ||w||_2 subject to sum(w) = 1 and gamma_w(i) = 0 for every
    i in the index set, via the normal equations on the Gram matrix in
    extended precision.  The residuals and squared norm are evaluated at
    that precision before rounding; the returned float64 weights carry
    unavoidable representation error of order 1e-16 * max|w|.
    """
    with mp.workdps(_EXACT_DPS):
        a = _basis_matrix_hp(cfg)
        g = _gram_hp(a)
        b = mp.matrix(cfg.d, 1)
        b[0] = mp.mpf(1)
        try:
            y = mp.lu_solve(g, b)
        except ZeroDivisionError as exc:
            raise ValueError("constraint system is singular (degenerate grid)") from exc
        w = a.T * y
        resid = a * w - b
        norm_sq = sum((w[c] ** 2 for c in range(cfg.size)), mp.mpf(0))
        return WeightSolution(
            w=tuple(float(w[c]) for c in range(cfg.size)),
            epsilon=0.0,
            norm_sq=float(norm_sq),
            residuals=tuple(float(resid[r] + (1 if r == 0 else 0)) for r in range(cfg.d)),
        )


def eta_exact(cfg: EnsembleConfig) -> float:
    """Squared norm of the exact solution as a determinant ratio.

    Equals det(A1 A1') / det(A0 A0'), where A0 is the full constraint
    matrix and A1 drops the all-ones row.  For d = 1 (empty index set)
    this reduces to 1/L.  Computed in extended precision, like
    ``solve_exact``, so the two agree to float64 rounding.
    """
    if cfg.d == 1:
        return 1.0 / cfg.size
    with mp.workdps(_EXACT_DPS):
        a0 = _basis_matrix_hp(cfg)
        a1 = a0[1:, :]
        det0 = mp.det(_gram_hp(a0))
        if det0 == 0:
            raise ValueError("constraint system is singular (degenerate grid)")
        return float(mp.det(_gram_hp(a1)) / det0)


def residual_scales(cfg: EnsembleConfig) -> np.ndarray:
    """T^(1/2 - i/(2d)) for i in the index set."""
    i = np.asarray(list(cfg.index_set), dtype=np.float64)
    return float(cfg.t) ** (0.5 - i / (2.0 * cfg.d))


def _box_qp_min(s0: np.ndarray, st: np.ndarray, eps: float) -> tuple[float, np.ndarray]:
    """Exact minimum of ||s0 + st @ t||^2 over the box |t_i| <= eps.

    Enumerates all 3^I active-set patterns (each coordinate free, at +eps,
    or at -eps); the pattern of the true optimum always yields a feasible
    stationary candidate, so the best feasible candidate is the exact
    minimum.  The free coordinates of each pattern come from a tiny
    least-squares solve, I = d - 1 stays single digit in practice.
    """
    n_res = st.shape[1]
    best_val = np.inf
    best_t = np.zeros(n_res)
    tol = 1.0 + 1e-12
    for pattern in itertools.product((-1, 0, 1), repeat=n_res):
        pat = np.asarray(pattern)
        free = pat == 0
        t = eps * pat.astype(np.float64)
        if np.any(free):
            rhs = -(s0 + st[:, ~free] @ t[~free])
            t[free] = np.linalg.lstsq(st[:, free], rhs, rcond=None)[0]
            if np.any(np.abs(t[free]) > eps * tol):
                continue
        r = s0 + st @ t
        val = float(r @ r)
        if val < best_val:
            best_val = val
            best_t = t
    return best_val, best_t


def solve_relaxed(cfg: EnsembleConfig, eta_bound: float | None = None) -> WeightSolution:
    """Minimize the largest scaled residual under a norm cap.

    Solves min epsilon over {sum(w) = 1, |gamma_w(i)| * T^(1/2 - i/(2d))
    <= epsilon, ||w||^2 <= eta}.  When eta admits the exact solution the
    optimum is epsilon = 0 and the exact weights are returned; otherwise
    the norm cap binds and the residual level is found by bisection, with
    an exact inner box-QP at each level.  Deterministic, no iteration
    tuning.
    """
    eta = cfg.eta_default if eta_bound is None else float(eta_bound)
    length = cfg.size
    if eta < 1.0 / length:
        raise ValueError(
            f"eta = {eta} is infeasible: sum(w) = 1 forces ||w||^2 >= 1/L = {1.0 / length}"
        )
    a0 = basis_matrix(cfg)
    scales = residual_scales(cfg)
    a_scaled = a0.copy()
    a_scaled[1:] *= scales[:, None]

    # Orthonormal row-space basis: a_scaled' = q_f r.  The minimum-norm
    # weights for residual targets v = [1; t] are w = q_f (r^-T v), their
    # squared norm ||r^-T v||^2, so every quadratic form below is a
    # triangular solve away from well-conditioned arithmetic.
    q_f, r = np.linalg.qr(a_scaled.T)
    s = solve_triangular(r, np.eye(cfg.d), trans="T", lower=False)
    s0, st = s[:, 0], s[:, 1:]

    def solution_for(t: np.ndarray, epsilon: float) -> WeightSolution:
        u = s0 + st @ t
        w = q_f @ u
        residuals = a0 @ w
        return WeightSolution(w=tuple(float(v) for v in w), epsilon=float(epsilon),
                              norm_sq=float(u @ u),
                              residuals=tuple(float(r) for r in residuals))

    n_res = cfg.d - 1
    if n_res == 0:
        # No bias constraints: the minimum-norm weights are uniform.
        return solution_for(np.zeros(0), epsilon=0.0)
    if float(s0 @ s0) <= eta:
        # Exact bias cancellation fits inside the norm ball.
        return solution_for(np.zeros(n_res), epsilon=0.0)

    # Uniform weights are always feasible (norm 1/L <= eta), so their
    # residual level brackets the optimum from above.
    uniform = np.full(length, 1.0 / length)
    hi = float(np.max(np.abs(a_scaled[1:] @ uniform)))
    lo = 0.0
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        val, _ = _box_qp_min(s0, st, mid)
        if val <= eta:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-14 * max(1.0, hi):
            break
    _, t_star = _box_qp_min(s0, st, hi)
    return solution_for(t_star, epsilon=hi)


def ensemble_bandwidths(lbar, m: int) -> np.ndarray:
    """Component bandwidths k(l) = l * sqrt(M); every k(l) must stay <= M."""
    ks = np.asarray(lbar, dtype=np.float64) * float(np.sqrt(m))
    bad = ks > m
    if np.any(bad):
        offending = list(np.asarray(lbar, dtype=np.float64)[bad])
        raise ValueError(f"k(l) = l*sqrt(M) exceeds M = {m} for l in {offending}")
    return ks


def k_of_l(lbar, m: int) -> np.ndarray:
    """Bandwidths k(l) = l * sqrt(M) for the ensemble components."""
    return np.asarray(lbar, dtype=np.float64) * float(np.sqrt(m))


def ensemble_estimate(g: FunctionalSpec, samples: np.ndarray, cfg: EnsembleConfig,
                      weights: WeightSolution, split_cfg: SplitConfig) -> EstimateRecord:
    """Weighted ensemble estimate: sum_l w(l) * (truncated plug-in at k(l)).

    All component estimates share one split and one window-count pass over
    the density part; components are combined in fixed grid order.
    """
    w = weights.as_array()
    if w.size != cfg.size:
        raise ValueError(f"weight vector has length {w.size}, config expects {cfg.size}")
    samples = np.asarray(samples, dtype=np.float64)
    eval_part, density_part = split(samples, split_cfg)
    m = density_part.shape[0]
    ks = ensemble_bandwidths(cfg.lbar, m)
    d_ks = (ks / m) ** (1.0 / cfg.d)
    counts = window_counts(eval_part, density_part, d_ks / 2.0)
    vols = truncated_volumes(eval_part, d_ks)
    value = 0.0
    for j in range(cfg.size):
        comp = plugin_values_from_counts(g, counts[:, j], ks[j], m, vols[:, j])
        value += w[j] * comp
    return EstimateRecord(value=value, estimator_id="weighted",
                          n_eval=eval_part.shape[0], m_density=m,
                          seed=split_cfg.seed, weights_hash=weights.weights_hash)
