"""Partial polyphase realization of the third-order GCF for D = 2**p.

The GCF factors into p multiplier-light stages

    H(z) = prod_{i=0}^{p-1} [1 + r_i (z^-2^i + z^-2*2^i) + z^-3*2^i],
    r_i  = 1 + 2 cos(2^i a),

which are split at ``pp`` into a polyphase section H_P (stages 0..pp,
decimating by D1 = 2**(pp+1)) and a cascade H_N of by-2 stages
(pp+1..p-1, decimating by D2 = 2**(p-pp-1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import SpecError
from .filters import GcfSpec, ImpulseResponse, gcf3_impulse

SYMMETRY_TOL = 1e-12


def _log2_exact(n: int) -> int:
    if int(n) != n or n < 1 or int(n) & (int(n) - 1):
        raise SpecError(f"decimation {n} is not a power of two")
    return int(n).bit_length() - 1


def symmetric_rotation(spec: GcfSpec) -> float:
    """The shared rotation magnitude |q1| of a third-order, +-symmetric GCF."""
    if spec.order != 3:
        raise SpecError(f"the stage factorization needs order 3, got {spec.order}")
    q = spec.rotations
    mag = abs(q[0])
    ok = abs(q[1]) <= SYMMETRY_TOL and abs(q[2] + q[0]) <= SYMMETRY_TOL
    if len(q) > 3:
        ok = ok and abs(abs(q[3]) - mag) <= SYMMETRY_TOL
    if not ok:
        raise SpecError(f"rotations {q} lack the (-q, 0, +q, +-q) symmetry")
    return mag


@dataclass(frozen=True)
class CascadeSpec:
    """Power-of-two split D = D1 * D2 of a third-order GCF.

    ``q`` is the rotation magnitude |q1| and ``nu`` the residual
    oversampling, giving ``fc = 1/(2 nu D)`` and ``alpha = 2 pi q fc``.
    """

    p: int
    pp: int
    q: float = 0.79
    nu: int = 4

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise SpecError(f"p must be a positive integer, got {self.p}")
        if int(self.pp) != self.pp or not -1 <= self.pp <= self.p - 1:
            raise SpecError(f"pp must be an integer in [-1, {self.p - 1}], got {self.pp}")
        if not 0.0 <= self.q <= 1.0:
            raise SpecError(f"q must lie in [0, 1], got {self.q}")
        if int(self.nu) != self.nu or self.nu < 1:
            raise SpecError(f"nu must be a positive integer, got {self.nu}")

    @classmethod
    def from_decimation(cls, decimation: int, pp: int | None = None, q: float = 0.79, nu: int = 4):
        p = _log2_exact(decimation)
        return cls(p, p - 1 if pp is None else pp, q, nu)

    @classmethod
    def from_gcf(cls, spec: GcfSpec, pp: int | None = None):
        p = _log2_exact(spec.decimation)
        return cls(p, p - 1 if pp is None else pp, symmetric_rotation(spec), spec.nu)

    @property
    def D(self) -> int:
        return 2**self.p

    @property
    def D1(self) -> int:
        return 2 ** (self.pp + 1)

    @property
    def D2(self) -> int:
        return 2 ** (self.p - self.pp - 1)

    @property
    def fc(self) -> float:
        return 1.0 / (2 * self.nu * self.D)

    @property
    def alpha(self) -> float:
        return 2 * math.pi * self.q * self.fc

    def r(self, i: int) -> float:
        return 1.0 + 2.0 * math.cos(2**i * self.alpha)

    @property
    def multipliers(self) -> np.ndarray:
        """r_i for every stage i = 0..p-1."""
        return np.array([self.r(i) for i in range(self.p)])

    @property
    def hn_indices(self) -> range:
        return range(self.pp + 1, self.p)

    @property
    def stage_multipliers(self) -> np.ndarray:
        """r_u of the H_N stages, u = pp+1..p-1."""
        return np.array([self.r(u) for u in self.hn_indices])


@dataclass(frozen=True)
class Stage:
    """One factor ``1 + r (x + x^2) + x^3`` with ``x = z^-delay``.

    ``index`` is the stage number i in the full-rate factorization.
    """

    index: int
    r: float
    delay: int

    @property
    def taps(self) -> np.ndarray:
        return np.array([1.0, self.r, self.r, 1.0])

    @property
    def gain(self) -> float:
        return 2.0 + 2.0 * self.r

    def expand(self) -> np.ndarray:
        """Raw coefficients in z^-1 with the delay spelled out."""
        out = np.zeros(3 * self.delay + 1)
        out[:: self.delay] = self.taps
        return out


def expand_stages(stages) -> np.ndarray:
    """Raw product of stages (all-positive taps, so plain convolution is exact enough)."""
    out = np.array([1.0])
    for st in stages:
        out = np.convolve(out, st.expand())
    return out


def factorize(spec) -> list:
    """Stage factors of a third-order GCF with D = 2**p.

    Accepts either a :class:`GcfSpec` (order 3, +-symmetric rotations) or a
    :class:`CascadeSpec`.  Stage i carries delay 2**i at the input rate.
    """
    if isinstance(spec, GcfSpec):
        spec = CascadeSpec.from_gcf(spec)
    return [Stage(i, spec.r(i), 2**i) for i in range(spec.p)]


def section_hp(spec: CascadeSpec) -> ImpulseResponse:
    """Polyphase-section taps h_P (a third-order GCF decimating by D1)."""
    if spec.D1 == 1:
        return ImpulseResponse([1.0], [1.0])
    return gcf3_impulse(spec.D1, spec.alpha)


def section_hn(spec: CascadeSpec) -> list:
    """H_N stages re-indexed to run after decimation by D1."""
    return [Stage(u, spec.r(u), 2 ** (u - spec.pp - 1)) for u in spec.hn_indices]


def split(spec: CascadeSpec):
    """Return ``(h_P, h_N)``: the polyphase impulse response and the H_N stages.

    h_N stage u is ``[1, r_u, r_u, 1]`` in ``z^-2**(u-pp-1)`` at rate fs/D1.
    """
    return section_hp(spec), section_hn(spec)


@dataclass(frozen=True)
class PolyphaseBank:
    """Polyphase components ``components[k][n] = h(D1 n + k)``.

    ``length`` is the number of taps of the decomposed filter; slots past
    it are structural zeros from padding to a uniform inner length.
    """

    D1: int
    components: np.ndarray
    length: int

    @property
    def inner(self) -> int:
        return self.components.shape[1]

    def reconstruct(self) -> np.ndarray:
        """Interleave the components back into sum_k z^-k E_k(z^D1)."""
        return self.components.T.reshape(-1)[: self.length].copy()

    def mask(self) -> np.ndarray:
        """Boolean (D1, inner) array, True where a slot holds a real tap."""
        idx = self.D1 * np.arange(self.inner)[None, :] + np.arange(self.D1)[:, None]
        return idx < self.length


def polyphase_components(h, D1: int) -> PolyphaseBank:
    """Split taps into D1 polyphase components, zero-padded to equal length.

    >>> polyphase_components([1/8, 3/8, 3/8, 1/8], 2).components
    array([[0.125, 0.375],
           [0.375, 0.125]])
    """
    if isinstance(h, ImpulseResponse):
        h = h.taps
    if int(D1) != D1 or D1 < 1:
        raise SpecError(f"D1 must be a positive integer, got {D1}")
    D1 = int(D1)
    h = np.asarray(h, dtype=float)
    if h.ndim != 1 or not h.size:
        raise SpecError("taps must be a non-empty 1-D sequence")
    inner = -(-h.size // D1)
    padded = np.zeros(inner * D1)
    padded[: h.size] = h
    return PolyphaseBank(D1, padded.reshape(inner, D1).T.copy(), h.size)


class PolyphaseDecimator:
    """Streaming FIR decimator by ``factor`` built on a polyphase bank.

    Output sample m is ``sum_k h[k] x[m*factor - k]`` (phase 0: the very
    first input sample feeds branch E_0).  Blocks may have any length;
    state carries across calls.
    """

    def __init__(self, taps, factor: int):
        self.bank = polyphase_components(taps, factor)
        self.factor = self.bank.D1
        self.reset()

    def reset(self):
        self._pending = np.zeros(self.factor - 1)
        self._history = np.zeros((self.factor, self.bank.inner - 1))

    def process(self, block) -> np.ndarray:
        buf = np.concatenate([self._pending, np.asarray(block, dtype=float)])
        nframes = buf.size // self.factor
        self._pending = buf[nframes * self.factor :]
        # branch k, sample m  ->  x[m*factor - k]
        branches = buf[: nframes * self.factor].reshape(nframes, self.factor)[:, ::-1].T
        ext = np.concatenate([self._history, branches], axis=1)
        lag = self.bank.inner - 1
        e = self.bank.components
        y = np.zeros(nframes)
        for n in range(self.bank.inner):
            y += e[:, n] @ ext[:, lag - n : lag - n + nframes]
        self._history = ext[:, ext.shape[1] - lag :]
        return y


class CascadeDecimator:
    """Polyphase section followed by by-2 stages ``[1, r, r, 1]``.

    Coefficients are used raw (h_P(0) = 1, stage gains 2 + 2r); a single
    output scale restores unit DC gain.  ``flush`` pushes the convolution
    tail out so that the total output equals full-rate filtering followed
    by keeping every D-th sample.
    """

    def __init__(self, hp_raw, D1: int, multipliers=(), scale: float | None = None):
        self.hp_raw = np.asarray(hp_raw, dtype=float)
        self.D1 = int(D1)
        self.multipliers = tuple(float(r) for r in multipliers)
        if scale is None:
            scale = 1.0 / (self.hp_raw.sum() * math.prod(2.0 + 2.0 * r for r in self.multipliers))
        self.scale = scale
        self.D = self.D1 * 2 ** len(self.multipliers)
        # full-rate length of the overall impulse response
        self.length = self.hp_raw.size + sum(3 * self.D1 * 2**i for i in range(len(self.multipliers)))
        self._sections = [PolyphaseDecimator(self.hp_raw, self.D1)] + [
            PolyphaseDecimator([1.0, r, r, 1.0], 2) for r in self.multipliers
        ]
        self.n_in = 0

    @classmethod
    def from_spec(cls, spec: CascadeSpec):
        hp, _ = split(spec)
        return cls(hp.raw, spec.D1, spec.stage_multipliers)

    def reset(self):
        for s in self._sections:
            s.reset()
        self.n_in = 0

    def process(self, block) -> np.ndarray:
        y = np.asarray(block, dtype=float)
        self.n_in += y.size
        for s in self._sections:
            y = s.process(y)
        return y * self.scale

    def flush(self) -> np.ndarray:
        if self.n_in == 0:
            return np.zeros(0)
        return self.process(np.zeros(self.length - 1))


def decimate_stream(samples, spec: CascadeSpec, block_size: int | None = None) -> np.ndarray:
    """Decimate a finite sequence through the partial polyphase cascade.

    Equivalent to ``reference_decimate(samples, gcf3_tf_oracle(D, a), D)``
    including the convolution tail.
    """
    x = np.asarray(samples, dtype=float)
    dec = CascadeDecimator.from_spec(spec)
    if block_size is None:
        parts = [dec.process(x)]
    else:
        parts = [dec.process(x[i : i + block_size]) for i in range(0, x.size, block_size)]
    parts.append(dec.flush())
    return np.concatenate(parts)


def reference_decimate(samples, tf, D: int) -> np.ndarray:
    """Full-rate convolution, then keep every D-th sample starting at 0."""
    if int(D) != D or D < 1:
        raise SpecError(f"D must be a positive integer, got {D}")
    x = np.asarray(samples, dtype=float)
    if not x.size:
        return np.zeros(0)
    return np.convolve(x, np.asarray(tf, dtype=float))[:: int(D)]
