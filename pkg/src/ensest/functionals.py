"""Pointwise integrands g(f, x) of the supported density functionals.

Every functional estimated by this package has the form
``G = E[g(f(X), X)]`` for a pointwise function ``g`` of the density value.
The four supported kinds are Shannon entropy, Renyi-alpha, the quadratic
functional and the Panter-Dite distortion-rate factor.  At ``f = 0`` each
kind returns the finite indicator value 1 (0 for quadratic, where f**2 is
already finite), which keeps plug-in estimates bounded when a kernel
window is empty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("shannon", "renyi", "quadratic", "panter_dite")


@dataclass(frozen=True)
class FunctionalSpec:
    """Which functional to estimate, with its parameters.

    kind: one of "shannon", "renyi", "quadratic", "panter_dite".
    alpha: Renyi order (alpha > 0, alpha != 1); Renyi only.
    n: number of quantizer levels (n >= 1); Panter-Dite only.
    q: quantizer dimension (q >= 1); Panter-Dite only.
    """

    kind: str
    alpha: float | None = None
    n: int | None = None
    q: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown functional kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "renyi":
            if self.alpha is None or self.alpha <= 0 or self.alpha == 1:
                raise ValueError("renyi requires alpha > 0 and alpha != 1")
        elif self.alpha is not None:
            raise ValueError(f"alpha is only valid for renyi, not {self.kind!r}")
        if self.kind == "panter_dite":
            if self.n is None or int(self.n) != self.n or self.n < 1:
                raise ValueError("panter_dite requires integer n >= 1")
            if self.q is None or int(self.q) != self.q or self.q < 1:
                raise ValueError("panter_dite requires integer q >= 1")
        elif self.n is not None or self.q is not None:
            raise ValueError(f"n, q are only valid for panter_dite, not {self.kind!r}")

    @classmethod
    def shannon(cls) -> "FunctionalSpec":
        return cls("shannon")

    @classmethod
    def renyi(cls, alpha: float) -> "FunctionalSpec":
        return cls("renyi", alpha=alpha)

    @classmethod
    def quadratic(cls) -> "FunctionalSpec":
        return cls("quadratic")

    @classmethod
    def panter_dite(cls, n: int, q: int) -> "FunctionalSpec":
        return cls("panter_dite", n=n, q=q)

    @property
    def key(self) -> str:
        """Canonical identifier, used in truth-cache keys."""
        if self.kind == "renyi":
            return f"renyi(alpha={self.alpha!r})"
        if self.kind == "panter_dite":
            return f"panter_dite(n={self.n},q={self.q})"
        return self.kind

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.n is not None:
            out["n"] = self.n
        if self.q is not None:
            out["q"] = self.q
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "FunctionalSpec":
        return cls(obj["kind"], alpha=obj.get("alpha"), n=obj.get("n"), q=obj.get("q"))


def g_eval(spec: FunctionalSpec, f, x=None):
    """Evaluate g(f, x) elementwise for density values ``f >= 0``.

    ``x`` is accepted for interface completeness; none of the supported
    kinds depends on the location argument.  Scalar input returns a float,
    array input an array of the same shape.  Negative ``f`` raises.
    """
    arr = np.asarray(f, dtype=np.float64)
    if np.any(arr < 0):
        raise ValueError("density values must be nonnegative")
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    pos = arr > 0

    if spec.kind == "quadratic":
        out = arr * arr
    else:
        out = np.ones_like(arr)
        if spec.kind == "shannon":
            out[pos] = -np.log(arr[pos])
        elif spec.kind == "renyi":
            out[pos] = arr[pos] ** (spec.alpha - 1.0)
        else:  # panter_dite
            out[pos] = spec.n ** (-2.0 / spec.q) * arr[pos] ** (-2.0 / (spec.q + 2.0))

    return float(out[0]) if scalar else out


def uniform_value(spec: FunctionalSpec) -> float:
    """Exact functional value for the uniform density on the unit cube.

    With f identically 1, G = g(1): Shannon and Renyi integrands give 0 and
    1 respectively, the quadratic gives 1, and Panter-Dite gives n**(-2/q).
    """
    return g_eval(spec, 1.0)
