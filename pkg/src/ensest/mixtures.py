"""Beta-uniform mixture on the unit cube: pdf, sampling, and truth oracle.

The density is ``f(x) = p * prod_j Beta(x_j; a, b) + (1 - p)`` on
``[0, 1]^d``.  With ``a, b >= 1`` it is bounded below by ``1 - p``, which
makes it a convenient test density for boundary-truncated kernel
estimators.  Ground-truth functional values are obtained by Monte-Carlo
expectation with the exact pdf (deterministic quadrature is infeasible at
d = 6), and cached to JSON keyed by (params, functional, n_mc, seed).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.special import betaln

from .functionals import FunctionalSpec, g_eval

_ORACLE_CHUNK = 1_000_000  # fixed so chunking never alters results


@dataclass(frozen=True)
class MixtureParams:
    """Beta-uniform mixture f(a, b, p, d) with support [0, 1]^d."""

    a: float
    b: float
    p: float
    d: int

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("beta shapes a, b must be positive")
        if not (0.0 <= self.p <= 1.0):
            raise ValueError("mixing weight p must lie in [0, 1]")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("dimension d must be a positive integer")

    @property
    def key(self) -> str:
        return f"a={self.a!r},b={self.b!r},p={self.p!r},d={self.d}"

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "p": self.p, "d": self.d}

    @classmethod
    def from_json(cls, obj: dict) -> "MixtureParams":
        return cls(float(obj["a"]), float(obj["b"]), float(obj["p"]), int(obj["d"]))


def _beta_logpdf(x: np.ndarray, a: float, b: float) -> np.ndarray:
    # (a-1)*log(x) with the a == 1 case forced to 0 so that 0 * -inf
    # never produces NaN at the support edges.
    with np.errstate(divide="ignore"):
        la = np.where(a == 1.0, 0.0, (a - 1.0) * np.log(x))
        lb = np.where(b == 1.0, 0.0, (b - 1.0) * np.log1p(-x))
    return la + lb - betaln(a, b)


def mixture_pdf(x, params: MixtureParams):
    """Density at ``x`` (one point of shape (d,) or a batch (n, d))."""
    pts = np.asarray(x, dtype=np.float64)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != params.d:
        raise ValueError(f"points have {pts.shape[1]} coordinates, expected d={params.d}")
    if np.any(pts < 0.0) or np.any(pts > 1.0):
        raise ValueError("point outside the support [0, 1]^d")
    if params.p == 0.0:
        vals = np.ones(pts.shape[0])
    else:
        log_beta = np.sum(_beta_logpdf(pts, params.a, params.b), axis=1)
        vals = params.p * np.exp(log_beta) + (1.0 - params.p)
    return float(vals[0]) if scalar else vals


def _draw(rng: np.random.Generator, params: MixtureParams, n: int) -> np.ndarray:
    # Both component blocks are always drawn so the stream layout depends
    # only on (n, d), keeping results reproducible across mixing weights.
    from_beta = rng.random(n) < params.p
    beta_pts = rng.beta(params.a, params.b, size=(n, params.d))
    unif_pts = rng.random((n, params.d))
    return np.where(from_beta[:, None], beta_pts, unif_pts)


def sample(params: MixtureParams, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` i.i.d. points from the mixture; deterministic in seed."""
    if n < 1:
        raise ValueError("sample count must be >= 1")
    return _draw(np.random.default_rng(seed), params, n)


@dataclass(frozen=True)
class TruthEstimate:
    """Monte-Carlo estimate of a functional's true value."""

    value: float
    stderr: float
    n_mc: int

    def to_json(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "n_mc": self.n_mc}

    @classmethod
    def from_json(cls, obj: dict) -> "TruthEstimate":
        return cls(float(obj["value"]), float(obj["stderr"]), int(obj["n_mc"]))


def true_functional(params: MixtureParams, g: FunctionalSpec, n_mc: int, seed: int) -> TruthEstimate:
    """Monte-Carlo expectation of g(f(X), X) under the mixture.

    Streams in fixed-size chunks so arbitrarily large ``n_mc`` fits in
    memory; the chunk size is a constant, so results are a pure function
    of (params, g, n_mc, seed).
    """
    if n_mc < 1_000:
        raise ValueError("truth oracle requires n_mc >= 1000")
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_mc:
        c = min(_ORACLE_CHUNK, n_mc - done)
        pts = _draw(rng, params, c)
        vals = g_eval(g, mixture_pdf(pts, params), pts)
        total += float(np.sum(vals))
        total_sq += float(np.sum(vals * vals))
        done += c
    mean = total / n_mc
    var = max(total_sq - n_mc * mean * mean, 0.0) / (n_mc - 1)
    return TruthEstimate(value=mean, stderr=float(np.sqrt(var / n_mc)), n_mc=n_mc)


class MissingTruthError(KeyError):
    """A sweep asked for a truth value that is not in the cache."""


def truth_key(params: MixtureParams, g: FunctionalSpec, n_mc: int, seed: int) -> str:
    return f"{params.key}|{g.key}|n_mc={n_mc}|seed={seed}"


class TruthCache:
    """JSON-file-backed store of truth estimates.

    Keys encode (params, functional, n_mc, seed); values are
    TruthEstimate dicts.  The repository ships a reference cache with
    n_mc = 10**7 entries for the mixtures used in the experiments.
    """

    def __init__(self, entries: dict | None = None, path: str | Path | None = None):
        self.entries = dict(entries or {})
        self.path = Path(path) if path is not None else None

    @classmethod
    def load(cls, path: str | Path) -> "TruthCache":
        path = Path(path)
        entries = json.loads(path.read_text()) if path.exists() else {}
        return cls(entries, path=path)

    @classmethod
    def reference(cls) -> "TruthCache":
        """The packaged read-only cache of pinned ground-truth values."""
        text = resources.files("ensest").joinpath("data/truth_reference.json").read_text()
        return cls(json.loads(text))

    def save(self, path: str | Path | None = None) -> None:
        target = Path(path) if path is not None else self.path
        if target is None:
            raise ValueError("no path given and cache has no backing file")
        target.write_text(json.dumps(self.entries, sort_keys=True, indent=2) + "\n")

    def get(self, params: MixtureParams, g: FunctionalSpec, n_mc: int, seed: int) -> TruthEstimate:
        key = truth_key(params, g, n_mc, seed)
        if key not in self.entries:
            raise MissingTruthError(
                f"no truth value cached for {key}; run the oracle first "
                f"(CLI: ensest oracle) to populate the cache"
            )
        return TruthEstimate.from_json(self.entries[key])

    def put(self, params: MixtureParams, g: FunctionalSpec, n_mc: int, seed: int,
            estimate: TruthEstimate) -> None:
        self.entries[truth_key(params, g, n_mc, seed)] = estimate.to_json()

    def ensure(self, params: MixtureParams, g: FunctionalSpec, n_mc: int, seed: int) -> TruthEstimate:
        """Return the cached estimate, computing and storing it if absent."""
        try:
            return self.get(params, g, n_mc, seed)
        except MissingTruthError:
            est = true_functional(params, g, n_mc, seed)
            self.put(params, g, n_mc, seed, est)
            return est
