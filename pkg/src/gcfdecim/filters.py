"""Comb and generalized comb (GCF) transfer functions.

Polynomials are plain 1-D numpy arrays of real coefficients in ascending
powers of z^-1: ``c[k]`` multiplies ``z**-k``.  Every constructor here
returns DC-normalized coefficients (``c.sum() == 1``).

The third-order GCF decimating by D has the closed form

    H(z) = (1 - z^-D)/(1 - z^-1)
         * (1 - z^-D e^{+j a D})/(1 - z^-1 e^{+j a})
         * (1 - z^-D e^{-j a D})/(1 - z^-1 e^{-j a})

and two independent routes to its taps are provided: a nested-summation
recursion (:func:`gcf3_impulse`) and explicit complex polynomial
multiplication plus long division (:func:`gcf3_tf_oracle`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DivisionRemainderError, ImaginaryResidueError, SpecError

#: Optimal zero rotations q_p per filter order, in rotation-slot order:
#: the first N entries rotate the H1 families, the rest the H2 families
#: around z = -1 (used for even D only).
OPTIMAL_ROTATIONS = {
    3: (-0.79, 0.0, +0.79, +0.79),
    4: (-0.35, +0.35, -0.88, +0.88, +0.88, +0.35),
    5: (+0.55, +0.93, -0.55, -0.93, 0.0, +0.55, +0.93),
    6: (+0.95, +0.675, +0.25, -0.25, -0.675, -0.95, +0.95, +0.675, +0.25),
}

#: Approximate folding-band QN rejection gain over the equal-order comb, dB.
OPTIMAL_GAIN_DB = {3: 8.0, 4: 13.0, 5: 18.0, 6: 23.0}

IMAG_TOL = 1e-10
REMAINDER_TOL = 1e-9


def _normalize(raw: np.ndarray) -> np.ndarray:
    return raw / raw.sum()


def _check_real(values: np.ndarray, what: str) -> np.ndarray:
    residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if residue > IMAG_TOL:
        raise ImaginaryResidueError(
            f"{what}: imaginary residue {residue:.3e} exceeds {IMAG_TOL:g}"
        )
    return np.ascontiguousarray(values.real)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def rotation_count(order: int, decimation: int) -> int:
    """Number of rotation slots the GCF structure uses for (N, D)."""
    if decimation % 2:
        return order
    return order + order // 2


@dataclass(frozen=True)
class GcfSpec:
    """An N-th order GCF decimating by D.

    ``nu`` is the residual oversampling left after this stage, so the
    oversampling ratio is ``nu * D`` and the signal band edge is
    ``fc = 1 / (2 * nu * D)``.  Rotation ``q_p`` turns into the angle
    ``alpha_p = q_p * 2 * pi * fc``.
    """

    order: int
    decimation: int
    rotations: tuple = field(default=())
    nu: int = 4

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise SpecError(f"order must be a positive integer, got {self.order}")
        if int(self.decimation) != self.decimation or self.decimation < 2:
            raise SpecError(f"decimation must be an integer >= 2, got {self.decimation}")
        if int(self.nu) != self.nu or self.nu < 1:
            raise SpecError(f"nu must be a positive integer, got {self.nu}")
        q = tuple(float(v) for v in self.rotations)
        expected = rotation_count(self.order, self.decimation)
        if len(q) != expected:
            raise SpecError(
                f"order {self.order} with D={self.decimation} needs {expected} "
                f"rotations, got {len(q)}"
            )
        bad = [v for v in q if not abs(v) <= 1.0]
        if bad:
            raise SpecError(f"rotations must lie in [-1, 1], got {bad}")
        object.__setattr__(self, "rotations", q)

    @classmethod
    def optimal(cls, order: int, decimation: int, nu: int = 4) -> "GcfSpec":
        """Spec using the tabulated optimal rotations (zeros for other orders)."""
        n = rotation_count(order, decimation)
        table = OPTIMAL_ROTATIONS.get(order)
        q = table[:n] if table is not None else (0.0,) * n
        return cls(order, decimation, q, nu)

    @property
    def fc(self) -> float:
        return 1.0 / (2 * self.nu * self.decimation)

    @property
    def alphas(self) -> np.ndarray:
        return np.asarray(self.rotations) * 2 * math.pi * self.fc


@dataclass(frozen=True)
class ImpulseResponse:
    """Taps of a linear-phase FIR, with the un-normalized values kept.

    ``raw`` is what the structure actually multiplies by (``raw[0] == 1``
    for the GCF recursions); ``taps`` is ``raw`` scaled to unit DC gain.
    """

    taps: np.ndarray
    raw: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "taps", _frozen(self.taps))
        object.__setattr__(self, "raw", _frozen(self.raw))
        if self.taps.shape != self.raw.shape or self.taps.ndim != 1 or not self.taps.size:
            raise SpecError("taps and raw must be equal-length non-empty 1-D arrays")

    @classmethod
    def from_raw(cls, raw) -> "ImpulseResponse":
        raw = np.asarray(raw, dtype=float)
        return cls(_normalize(raw), raw)

    @property
    def gain(self) -> float:
        """DC gain of the raw taps."""
        return float(self.raw.sum())

    def __len__(self):
        return self.taps.size


def comb_tf(order: int, decimation: int) -> np.ndarray:
    """DC-normalized taps of ((1/D)(1 - z^-D)/(1 - z^-1))^N.

    >>> comb_tf(3, 2)
    array([0.125, 0.375, 0.375, 0.125])
    """
    if int(order) != order or order < 1:
        raise SpecError(f"order must be a positive integer, got {order}")
    if int(decimation) != decimation or decimation < 2:
        raise SpecError(f"decimation must be an integer >= 2, got {decimation}")
    box = np.ones(int(decimation))
    raw = box
    for _ in range(int(order) - 1):
        raw = np.convolve(raw, box)
    return _normalize(raw)


def _quadratic(angle: float) -> np.ndarray:
    # conjugate zero pair e^{+-j angle}
    return np.array([1.0, -2.0 * math.cos(angle), 1.0])


def gcf_factors(spec: GcfSpec) -> list:
    """Real first/second-order factors whose product is the GCF numerator."""
    N, D = spec.order, spec.decimation
    alphas = spec.alphas
    d_m = D // 2 - 1 if D % 2 == 0 else (D - 1) // 2
    factors = [
        _quadratic(2 * math.pi * i / D - alphas[n])
        for i in range(1, d_m + 1)
        for n in range(N)
    ]
    if D % 2 == 0:
        factors += [_quadratic(math.pi - alphas[N + n]) for n in range(N // 2)]
        if N % 2:
            factors.append(np.array([1.0, 1.0]))
    return factors


def expand_factors(factors, degree: int) -> np.ndarray:
    """Multiply real polynomial factors, returning raw ascending coefficients.

    The product is evaluated on a DFT grid of ``degree + 1`` points on the
    unit circle, factor by factor, and inverted with an FFT.  Sequential
    convolution of many unit-circle factors loses most of its digits to
    cancellation once D reaches a few tens; the DFT route keeps the error
    at a few ulps of the largest response value.
    """
    m = degree + 1
    w = np.exp(-2j * np.pi * np.arange(m) / m)
    values = np.ones(m, dtype=complex)
    for f in factors:
        values *= np.polyval(np.asarray(f)[::-1], w)
    # values are the DFT of the ascending coefficients
    raw = np.fft.ifft(values)
    gain = raw.real.sum()
    return _check_real(raw / gain, "factor expansion") * gain


def gcf_tf(spec: GcfSpec) -> np.ndarray:
    """DC-normalized taps of the N-th order GCF described by ``spec``.

    All zeros lie on the unit circle at angles ``2*pi*i/D - alpha_n``
    (plus the H2 / ``1 + z^-1`` zeros near z = -1 for even D).
    """
    factors = gcf_factors(spec)
    degree = sum(len(f) - 1 for f in factors)
    return _normalize(expand_factors(factors, degree))


def gcf_zero_angles(spec: GcfSpec) -> np.ndarray:
    """Angles (rad) of every zero of :func:`gcf_tf`, both half-planes."""
    N, D = spec.order, spec.decimation
    alphas = spec.alphas
    d_m = D // 2 - 1 if D % 2 == 0 else (D - 1) // 2
    upper = [2 * math.pi * i / D - alphas[n] for i in range(1, d_m + 1) for n in range(N)]
    if D % 2 == 0:
        upper += [math.pi - alphas[N + n] for n in range(N // 2)]
    angles = upper + [-a for a in upper]
    if D % 2 == 0 and N % 2:
        angles.append(math.pi)
    return np.array(angles)


def _one_minus(c: complex, power: int) -> np.ndarray:
    # 1 - c w^power as descending coefficients in w
    p = np.zeros(power + 1, dtype=complex)
    p[0] = -c
    p[-1] = 1.0
    return p


def _divide_linear(num: np.ndarray, root: complex):
    """Long division of descending ``num`` by ``1 - root*w``; returns (quotient, remainder)."""
    rem = np.array(num, dtype=complex)
    quot = np.empty(rem.size - 1, dtype=complex)
    for k in range(quot.size):
        quot[k] = rem[k] / -root
        rem[k + 1] -= quot[k]
    return quot, rem[-1]


def gcf3_tf_oracle(decimation: int, alpha: float) -> np.ndarray:
    """Third-order GCF taps by complex polynomial product and long division.

    Works in w = z^-1: the three numerator factors ``1 - e^{j k a D} w^D``
    are multiplied out, then divided by ``1 - w``, ``1 - e^{ja} w`` and
    ``1 - e^{-ja} w`` in turn.  Dividing one linear factor at a time keeps
    the remainder near 1e-11 at D = 64, where a single division by the cubic
    (triple root at w = 1 when a = 0) drifts past 1e-8.

    Raises
    ------
    DivisionRemainderError
        If the division leaves a remainder above 1e-9.
    ImaginaryResidueError
        If the normalized quotient is not real to 1e-10.
    """
    D = int(decimation)
    if D != decimation or D < 2:
        raise SpecError(f"decimation must be an integer >= 2, got {decimation}")
    if alpha < 0:
        raise SpecError(f"alpha must be >= 0, got {alpha}")
    rot = np.exp(1j * alpha * D)
    num = np.polymul(np.polymul(_one_minus(1.0, D), _one_minus(rot, D)), _one_minus(np.conj(rot), D))
    quot = num
    residue = 0.0
    for root in (1.0, np.exp(1j * alpha), np.exp(-1j * alpha)):
        quot, rem = _divide_linear(quot, root)
        residue = max(residue, abs(rem))
    if residue > REMAINDER_TOL:
        raise DivisionRemainderError(f"long division left remainder {residue:.3e}")
    taps = quot[::-1]
    return _check_real(taps / taps.real.sum(), "gcf3_tf_oracle")


def gcf3_impulse(decimation: int, alpha: float) -> ImpulseResponse:
    """Third-order GCF impulse response from the nested-summation recursion.

    For n = 0 .. 3D-3::

        h(n) = e^{jan} sum_{k3<=n} e^{-2jak3} sum_{k2<=k3} e^{jak2} sum_{k1<=k2} x_t(k1)

    with ``x_t(n) = d(n) - r d(n-D) + r d(n-2D) - d(n-3D)`` and
    ``r = 1 + 2 cos(a D)``.  The inner sums do not depend on n, so each
    level is a running (prefix) sum and the whole response costs O(D).
    """
    D = int(decimation)
    if D != decimation or D < 1:
        raise SpecError(f"decimation must be a positive integer, got {decimation}")
    if alpha < 0:
        raise SpecError(f"alpha must be >= 0, got {alpha}")
    length = 3 * D - 2
    r = 1.0 + 2.0 * math.cos(alpha * D)
    x_t = np.zeros(length)
    x_t[0] = 1.0
    # the -d(n-3D) term lies past the last tap
    for pos, val in ((D, -r), (2 * D, r)):
        if pos < length:
            x_t[pos] = val
    n = np.arange(length)
    s1 = np.cumsum(x_t)
    s2 = np.cumsum(np.exp(1j * alpha * n) * s1)
    s3 = np.cumsum(np.exp(-2j * alpha * n) * s2)
    h = np.exp(1j * alpha * n) * s3
    _check_real(h / h.real.sum(), "gcf3_impulse")
    return ImpulseResponse.from_raw(h.real)
