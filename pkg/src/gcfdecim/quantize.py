"""Bounded-error coefficient rounding and greedy power-of-two expansion."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import SpecError


@dataclass(frozen=True)
class QuantizedCoefficientSet:
    """Rounded coefficients with their exact errors (``values = original + deltas``)."""

    values: np.ndarray
    deltas: np.ndarray
    max_abs_error: float
    step: float

    @property
    def original(self) -> np.ndarray:
        return self.values - self.deltas


def grid_step(eps: float) -> float:
    """Largest power of two not exceeding ``2 * eps``."""
    if not eps > 0 or not math.isfinite(eps):
        raise SpecError(f"eps must be a positive finite number, got {eps}")
    return math.ldexp(1.0, math.floor(math.log2(2 * eps)))


def round_to_error(coeffs, eps: float) -> QuantizedCoefficientSet:
    """Round to the nearest multiple of a power-of-two step <= 2 eps.

    Ties go away from zero.  Because the step is a power of two, every
    delta is computed without rounding error.

    >>> round_to_error([0.125, 0.375], 1e-3).deltas
    array([0., 0.])
    """
    step = grid_step(eps)
    c = np.asarray(coeffs, dtype=float)
    values = np.sign(c) * np.floor(np.abs(c) / step + 0.5) * step + 0.0  # no -0.0
    return QuantizedCoefficientSet(values, values - c, eps, step)


@dataclass(frozen=True)
class Po2Expansion:
    """``x ~= sum sign * 2**exponent`` over ``terms``; ``error = x - value``."""

    x: float
    terms: tuple
    value: float
    error: float
    converged: bool

    def __len__(self):
        return len(self.terms)


def po2_expand(x: float, max_terms: int, eps: float) -> Po2Expansion:
    """Greedy signed power-of-two expansion of ``x``.

    Each step takes the power of two nearest the residual (the lower one on
    a tie) until ``|residual| <= eps`` or ``max_terms`` are used.  Missing
    the target is reported through ``converged``, not raised.
    """
    x = float(x)
    if not abs(x) < 4:
        raise SpecError(f"|x| must be below 4, got {x}")
    if int(max_terms) != max_terms or max_terms < 1:
        raise SpecError(f"max_terms must be a positive integer, got {max_terms}")
    if not eps >= 0:
        raise SpecError(f"eps must be non-negative, got {eps}")
    terms = []
    res = x
    while len(terms) < max_terms and abs(res) > eps:
        _, e = math.frexp(abs(res))  # 2**(e-1) <= |res| < 2**e
        lo, hi = math.ldexp(1.0, e - 1), math.ldexp(1.0, e)
        exp = e - 1 if abs(res) - lo <= hi - abs(res) else e
        sign = 1 if res > 0 else -1
        terms.append((sign, exp))
        res -= sign * math.ldexp(1.0, exp)  # exact: within a factor of two of res
    value = math.fsum(s * math.ldexp(1.0, e) for s, e in terms)
    return Po2Expansion(x, tuple(terms), value, res, abs(res) <= eps)
