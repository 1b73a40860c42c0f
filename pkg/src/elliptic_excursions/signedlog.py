"""Real numbers carried as (sign, log|value|) pairs.

Products of hundreds of theta or sine factors overflow doubles long before
T=100, so every product in the package is accumulated in this form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.special import logsumexp

NEG_INF = -math.inf


@dataclass(frozen=True)
class SignedLogValue:
    """A real number ``sign * exp(log_mag)``; zero is ``(0, -inf)``."""

    sign: int
    log_mag: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign!r}")
        if (self.sign == 0) != (self.log_mag == NEG_INF):
            raise ValueError("sign 0 must pair with log_mag = -inf and vice versa")
        if math.isnan(self.log_mag) or self.log_mag == math.inf:
            raise ValueError(f"log_mag must be finite or -inf, got {self.log_mag!r}")

    @classmethod
    def zero(cls) -> "SignedLogValue":
        return cls(0, NEG_INF)

    @classmethod
    def one(cls) -> "SignedLogValue":
        return cls(1, 0.0)

    @classmethod
    def from_float(cls, value: float) -> "SignedLogValue":
        if value == 0.0:
            return cls.zero()
        return cls(1 if value > 0 else -1, math.log(abs(value)))

    @classmethod
    def from_parts(cls, sign, log_mag) -> "SignedLogValue":
        """Build from possibly-numpy scalars, normalising zero."""
        sign = int(sign)
        log_mag = float(log_mag)
        if sign == 0 or log_mag == NEG_INF:
            return cls.zero()
        return cls(sign, log_mag)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_mag)

    __float__ = to_float

    def __mul__(self, other: "SignedLogValue") -> "SignedLogValue":
        if self.sign == 0 or other.sign == 0:
            return SignedLogValue.zero()
        return SignedLogValue(self.sign * other.sign, self.log_mag + other.log_mag)

    def __truediv__(self, other: "SignedLogValue") -> "SignedLogValue":
        if other.sign == 0:
            raise ZeroDivisionError("division by an exact zero SignedLogValue")
        if self.sign == 0:
            return SignedLogValue.zero()
        return SignedLogValue(self.sign * other.sign, self.log_mag - other.log_mag)

    def __neg__(self) -> "SignedLogValue":
        return SignedLogValue(-self.sign, self.log_mag)

    def __add__(self, other: "SignedLogValue") -> "SignedLogValue":
        return signed_sum([self, other])

    def __sub__(self, other: "SignedLogValue") -> "SignedLogValue":
        return signed_sum([self, -other])


def signed_logsumexp(signs, log_mags) -> tuple[int, float]:
    """Signed log-sum-exp of ``sum(signs * exp(log_mags))``.

    Returns ``(sign, log|sum|)``; an exact or empty zero gives ``(0, -inf)``.
    """
    signs = np.asarray(signs, dtype=float).ravel()
    log_mags = np.asarray(log_mags, dtype=float).ravel()
    keep = (signs != 0) & np.isfinite(log_mags)
    if not keep.any():
        return 0, NEG_INF
    val, sgn = logsumexp(log_mags[keep], b=signs[keep], return_sign=True)
    if sgn == 0 or not np.isfinite(val):
        return 0, NEG_INF
    return int(sgn), float(val)


def signed_sum(values: Iterable[SignedLogValue]) -> SignedLogValue:
    values = list(values)
    sign, log_mag = signed_logsumexp([v.sign for v in values], [v.log_mag for v in values])
    return SignedLogValue.from_parts(sign, log_mag)


def signed_product(values: Iterable[SignedLogValue]) -> SignedLogValue:
    out = SignedLogValue.one()
    for v in values:
        out = out * v
    return out


def relative_difference(a: SignedLogValue, b: SignedLogValue) -> float:
    """|a − b| / max(|a|, |b|), computed without leaving the log domain."""
    if a.sign == 0 and b.sign == 0:
        return 0.0
    scale = max(a.log_mag, b.log_mag)
    _, log_diff = signed_logsumexp([a.sign, -b.sign], [a.log_mag, b.log_mag])
    return math.exp(log_diff - scale) if log_diff != NEG_INF else 0.0
