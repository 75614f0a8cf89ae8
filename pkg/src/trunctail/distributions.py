"""Heavy-tailed marginal models: Burr, Pareto and Frechet.

All three families have survival functions that are regularly varying
at infinity with index -1/tail_index, which is the only property the
estimators downstream rely on.  The Burr family additionally exposes a
shape parameter delta controlling the second-order approach to the
pure power law.

Numerics: survival/df/quantile are written with log1p/expm1 so that
round-trips hold to ~1e-12 even near the support boundary.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HeavyTailModel",
    "burr",
    "pareto",
    "frechet",
    "parse_model",
]

_FAMILIES = ("burr", "pareto", "frechet")


def _as_array(x, name, lower=0.0):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if np.any(arr < lower):
        raise ValueError(f"{name} must be >= {lower}")
    return arr


def _scalar_like(result, x):
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(result)
    return result


@dataclass(frozen=True)
class HeavyTailModel:
    """A heavy-tailed distribution with tail index tail_index > 0.

    Attributes:
        family: one of "burr", "pareto", "frechet".
        tail_index: extreme value index gamma > 0 of the survival
            function, i.e. survival is regularly varying with index
            -1/gamma.
        delta: Burr shape parameter (> 0); None for the other families.
    """

    family: str
    tail_index: float
    delta: float | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not (np.isfinite(self.tail_index) and self.tail_index > 0):
            raise ValueError("tail_index must be finite and > 0")
        if self.family == "burr":
            if self.delta is None or not (np.isfinite(self.delta) and self.delta > 0):
                raise ValueError("burr requires delta > 0")
        elif self.delta is not None:
            raise ValueError(f"{self.family} takes no delta parameter")

    def survival(self, x):
        """P(X > x).  Accepts a scalar or array, x >= 0."""
        xa = _as_array(x, "x")
        g = self.tail_index
        if self.family == "burr":
            d = self.delta
            out = np.exp((-d / g) * np.log1p(xa ** (1.0 / d)))
        elif self.family == "pareto":
            out = np.where(xa < 1.0, 1.0, np.power(np.maximum(xa, 1.0), -1.0 / g))
        else:  # frechet
            with np.errstate(divide="ignore"):
                out = np.where(xa == 0.0, 1.0, -np.expm1(-(xa ** (-1.0 / g))))
        return _scalar_like(out, x)

    def df(self, x):
        """P(X <= x).  Accepts a scalar or array, x >= 0."""
        xa = _as_array(x, "x")
        g = self.tail_index
        if self.family == "burr":
            d = self.delta
            out = -np.expm1((-d / g) * np.log1p(xa ** (1.0 / d)))
        elif self.family == "pareto":
            with np.errstate(divide="ignore"):
                out = np.where(xa < 1.0, 0.0, -np.expm1((-1.0 / g) * np.log(np.maximum(xa, 1.0))))
        else:
            with np.errstate(divide="ignore"):
                out = np.where(xa == 0.0, 0.0, np.exp(-(xa ** (-1.0 / g))))
        return _scalar_like(out, x)

    def quantile(self, u):
        """Inverse df: the unique x with df(x) = u, for u in (0, 1)."""
        ua = np.asarray(u, dtype=float)
        if np.any(~np.isfinite(ua)) or np.any(ua <= 0.0) or np.any(ua >= 1.0):
            raise ValueError("u must lie strictly inside (0, 1)")
        g = self.tail_index
        if self.family == "burr":
            d = self.delta
            out = np.expm1((-g / d) * np.log1p(-ua)) ** d
        elif self.family == "pareto":
            out = np.exp(-g * np.log1p(-ua))
        else:
            out = (-np.log(ua)) ** (-g)
        return _scalar_like(out, u)

    def sample(self, count: int, seed: int) -> np.ndarray:
        """Draw count iid values by inverting uniforms from a seeded stream.

        The uniforms live on the open interval (0, 1) so the quantile
        is always defined.  Identical (count, seed) give identical
        output.
        """
        if count < 1:
            raise ValueError("count must be >= 1")
        from .seeding import derive_rng

        rng = derive_rng(seed)
        u = rng.integers(1, 1 << 53, size=count) / float(1 << 53)
        return self.quantile(u)

    def second_order_tau(self) -> float:
        """Second-order regular variation rate exponent of this family.

        The quantile tail U(t) = quantile(1 - 1/t) satisfies
        (U(tx)/U(t) - x^g) / A(t) -> x^g (x^tau - 1)/tau with A
        regularly varying of index tau.  Burr: tau = -tail_index/delta.
        Frechet: tau = -1.  Pareto is an exact power law (A vanishes);
        -inf is returned as the conventional sentinel.
        """
        if self.family == "burr":
            return -self.tail_index / self.delta
        if self.family == "pareto":
            return float("-inf")
        return -1.0

    def spec_string(self) -> str:
        """Round-trippable text form, e.g. 'burr:delta=0.25,gamma=0.6'."""
        if self.family == "burr":
            return f"burr:delta={self.delta!r},gamma={self.tail_index!r}"
        return f"{self.family}:gamma={self.tail_index!r}"


def burr(delta: float, tail_index: float) -> HeavyTailModel:
    """Burr model with survival (1 + x^(1/delta))^(-delta/tail_index)."""
    return HeavyTailModel("burr", tail_index, delta)


def pareto(tail_index: float) -> HeavyTailModel:
    """Pareto model with survival x^(-1/tail_index) on [1, inf)."""
    return HeavyTailModel("pareto", tail_index)


def frechet(tail_index: float) -> HeavyTailModel:
    """Frechet model with df exp(-x^(-1/tail_index)) on (0, inf)."""
    return HeavyTailModel("frechet", tail_index)


def parse_model(text: str) -> HeavyTailModel:
    """Parse a model spec string like 'burr:delta=0.25,gamma=0.6'.

    Recognised forms:
        burr:delta=<float>,gamma=<float>
        pareto:gamma=<float>
        frechet:gamma=<float>
    """
    head, sep, tail = text.strip().partition(":")
    family = head.strip().lower()
    if not sep or family not in _FAMILIES:
        raise ValueError(f"cannot parse model spec {text!r}")
    params = {}
    for item in tail.split(","):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"cannot parse model spec {text!r}")
        try:
            params[key.strip().lower()] = float(val)
        except ValueError:
            raise ValueError(f"bad numeric value in model spec {text!r}") from None
    if "gamma" not in params:
        raise ValueError(f"model spec {text!r} is missing gamma")
    gamma = params.pop("gamma")
    if family == "burr":
        if set(params) != {"delta"}:
            raise ValueError(f"burr spec needs exactly delta and gamma, got {text!r}")
        return burr(params["delta"], gamma)
    if params:
        raise ValueError(f"{family} spec takes only gamma, got {text!r}")
    return HeavyTailModel(family, gamma)
