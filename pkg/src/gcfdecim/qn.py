"""Sigma-delta quantization noise folding into the aliasing bands.

A B-th order modulator shapes its quantization noise as

    S_B(f) = S_e (2 sin(pi f))^(2B),

and after a decimation filter H the noise that aliases onto the signal
band is the integral of |H|^2 S_B over the folding bands
[k/D1 - fc, k/D1 + fc], k = 1..D1//2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, SpecError
from .filters import comb_tf, gcf3_impulse
from .polyphase import _log2_exact

QUAD_RTOL = 1e-8
_SEED_INTERVALS = 64
_LO_NODES = np.polynomial.legendre.leggauss(8)
_HI_NODES = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class QnModel:
    """Noise model and band geometry for one decimation section."""

    fc: float
    D1: int
    B: int = 2
    se: float = 1.0

    def __post_init__(self):
        if int(self.B) != self.B or self.B < 1:
            raise SpecError(f"B must be a positive integer, got {self.B}")
        if not self.se > 0:
            raise SpecError(f"se must be positive, got {self.se}")
        if int(self.D1) != self.D1 or self.D1 < 2:
            raise SpecError(f"D1 must be an integer >= 2, got {self.D1}")
        if not 0 < self.fc < 1 / (2 * self.D1):
            raise SpecError(f"fc must lie in (0, 1/(2 D1)), got {self.fc}")

    @classmethod
    def for_decimation(cls, D1: int, nu: int = 4, B: int = 2, se: float = 1.0) -> "QnModel":
        """Band edge ``fc = 1/(2 nu D1)``."""
        return cls(1.0 / (2 * nu * D1), D1, B, se)

    @property
    def bands(self) -> np.ndarray:
        """(K, 2) array of folding-band edges.

        For even D1 the last band is centred on 0.5 and is integrated across
        it: the noise on both sides of fs/2 folds onto the signal band.
        """
        k = np.arange(1, self.D1 // 2 + 1) / self.D1
        return np.column_stack([k - self.fc, k + self.fc])


def qn_psd(f, model: QnModel):
    """S_e (2 sin(pi f))^(2B).

    >>> float(qn_psd(0.5, QnModel(0.01, 2, B=2)))
    16.0
    """
    return model.se * (2 * np.sin(np.pi * np.asarray(f, dtype=float))) ** (2 * model.B)


def _power_density(tf: np.ndarray, f: np.ndarray, model: QnModel) -> np.ndarray:
    h = np.polyval(tf[::-1], np.exp(-2j * np.pi * f))
    return (h.real**2 + h.imag**2) * qn_psd(f, model)


def _gauss(tf, a, b, nodes, model):
    x, w = nodes
    half = 0.5 * (b - a)
    f = (a + half)[:, None] + half[:, None] * x[None, :]
    vals = _power_density(tf, f.ravel(), model).reshape(f.shape)
    return half * (vals @ w)


def pqn(tf, model: QnModel, rtol: float = QUAD_RTOL, max_rounds: int = 40) -> float:
    """Quantization-noise power of ``tf`` summed over the folding bands.

    Globally adaptive Gauss-Legendre quadrature: each band starts as 64
    panels, and every panel whose 8- and 16-point rules disagree by more
    than its share of ``rtol`` is bisected.
    """
    tf = np.asarray(tf, dtype=float).reshape(-1)
    edges = model.bands
    t = np.linspace(0, 1, _SEED_INTERVALS + 1)
    grid = edges[:, :1] + (edges[:, 1:] - edges[:, :1]) * t[None, :]
    a, b = grid[:, :-1].ravel(), grid[:, 1:].ravel()
    width = float(np.sum(edges[:, 1] - edges[:, 0]))
    done = 0.0
    for _ in range(max_rounds):
        coarse = _gauss(tf, a, b, _LO_NODES, model)
        fine = _gauss(tf, a, b, _HI_NODES, model)
        total = done + fine.sum()
        budget = rtol * abs(total) * (b - a) / width
        ok = np.abs(fine - coarse) <= budget
        done += fine[ok].sum()
        if ok.all():
            return float(done)
        mid = 0.5 * (a[~ok] + b[~ok])
        a, b = np.concatenate([a[~ok], mid]), np.concatenate([mid, b[~ok]])
    raise ConvergenceError(f"quadrature left {a.size} panels unresolved")


def delta_pqn(tf_test, model: QnModel, rtol: float = QUAD_RTOL) -> float:
    """Folding-band noise of ``tf_test`` relative to comb^3, in dB.

    Both filters are expected at unit DC gain.
    """
    ref = pqn(comb_tf(3, model.D1), model, rtol)
    return float(10 * np.log10(pqn(tf_test, model, rtol) / ref))


def perturbed_section(D1: int, dh: float = 0.0, nu: int = 4, q: float = 0.79) -> np.ndarray:
    """Third-order GCF taps for D1 with ``dh`` added to every raw tap.

    The result is scaled by the nominal raw DC gain, which is what a
    fixed-point datapath with a hard-wired output shift does.
    """
    fc = 1.0 / (2 * nu * D1)
    raw = gcf3_impulse(D1, 2 * np.pi * q * fc).raw
    return (raw + dh) / raw.sum()


@dataclass(frozen=True)
class SweepResult:
    """``db[i, j]`` is the dB gain over comb^3 at ``d1[i]`` with error ``dh[j]``."""

    d1: tuple
    dh: tuple
    db: np.ndarray

    def rows(self):
        for i, d1 in enumerate(self.d1):
            for j, dh in enumerate(self.dh):
                yield d1, dh, float(self.db[i, j])


def deltapqn_sweep(d1_values, dh_values, nu: int = 4, B: int = 2, se: float = 1.0,
                   q: float = 0.79, rtol: float = QUAD_RTOL) -> SweepResult:
    """Noise-rejection gain over comb^3 for every (D1, uniform raw tap error)."""
    d1_values = tuple(int(d) for d in d1_values)
    dh_values = tuple(float(v) for v in dh_values)
    for d in d1_values:
        _log2_exact(d)
    db = np.empty((len(d1_values), len(dh_values)))
    for i, d1 in enumerate(d1_values):
        model = QnModel.for_decimation(d1, nu, B, se)
        ref = pqn(comb_tf(3, d1), model, rtol)
        for j, dh in enumerate(dh_values):
            db[i, j] = 10 * np.log10(pqn(perturbed_section(d1, dh, nu, q), model, rtol) / ref)
    return SweepResult(d1_values, dh_values, db)
