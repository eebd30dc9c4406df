"""Frequency responses and first-order sensitivity of the partial polyphase GCF.

Multiplier errors are expressed on the raw coefficients the structure
actually multiplies by: the h_P taps with h_P(0) = 1 (laid out as the
polyphase slots ``c[k, n] = h_P(D1 n + k)``) and the stage multipliers
r_u.  The first-order error function is

    dH(w) = (1/H_P) sum_{k,n} dc[k,n] e^{-jw(D1 n + k)}
          + sum_u cos(2^{u-1} w) dr_u / (cos(3 2^{u-1} w) + r_u cos(2^{u-1} w))

so that the perturbed response is approximately ``H (1 + dH)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import SpecError
from .polyphase import CascadeSpec, polyphase_components, section_hp

FLAG_TOL = 1e-12
_CHUNK = 1 << 20


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing digital frequencies in [0, 0.5]."""

    points: np.ndarray

    def __post_init__(self):
        f = np.array(self.points, dtype=float).reshape(-1)
        if not f.size:
            raise SpecError("frequency grid is empty")
        if f[0] < 0 or f[-1] > 0.5:
            raise SpecError("grid points must lie in [0, 0.5]")
        if np.any(np.diff(f) <= 0):
            raise SpecError("grid points must be strictly increasing")
        f.setflags(write=False)
        object.__setattr__(self, "points", f)

    @classmethod
    def uniform(cls, n: int = 8192) -> "FrequencyGrid":
        return cls(np.linspace(0.0, 0.5, n))

    @classmethod
    def for_bands(cls, D: int, fc: float, n: int = 8192) -> "FrequencyGrid":
        """Uniform grid plus the folding-band edges k/D +- fc."""
        k = np.arange(1, D // 2 + 1)
        edges = np.concatenate([k / D - fc, k / D + fc])
        pts = np.concatenate([np.linspace(0.0, 0.5, n), edges[(edges >= 0) & (edges <= 0.5)]])
        return cls(np.unique(pts))

    @property
    def omega(self) -> np.ndarray:
        return 2 * np.pi * self.points

    def __len__(self):
        return self.points.size


def _omega(grid) -> np.ndarray:
    if isinstance(grid, FrequencyGrid):
        return grid.omega
    return 2 * np.pi * np.asarray(grid, dtype=float).reshape(-1)


def _evaluate(coeffs, omega: np.ndarray, precise: bool = False) -> np.ndarray:
    """sum_m c[m] e^{-j omega m}, chunked over the grid.

    ``precise`` evaluates in extended precision (np.longdouble) and returns
    np.clongdouble; on platforms where longdouble is plain double this is
    just slower.
    """
    dt = np.longdouble if precise else np.float64
    c = np.asarray(coeffs).astype(dt)
    om = np.asarray(omega).astype(dt)
    m = np.arange(c.size, dtype=dt)
    out = np.empty(om.size, dtype=np.clongdouble if precise else complex)
    rows = max(1, _CHUNK // max(1, c.size))
    for s in range(0, om.size, rows):
        out[s : s + rows] = np.exp(-1j * np.outer(om[s : s + rows], m)) @ c
    return out


def freq_response(tf, grid, precise: bool = False) -> np.ndarray:
    """H(e^{jw}) of ascending z^-1 coefficients at every grid frequency."""
    return _evaluate(np.asarray(tf, dtype=float), _omega(grid), precise)


def _stage_response(r, delay: int, omega, precise: bool = False) -> np.ndarray:
    dt = np.longdouble if precise else np.float64
    c = np.zeros(3 * delay + 1, dtype=dt)
    c[0] = c[3 * delay] = 1
    c[delay] = c[2 * delay] = r
    return _evaluate(c, omega, precise)


def hn_freq_response(spec: CascadeSpec, grid) -> np.ndarray:
    """Closed-form H_N(e^{jw}) at the input rate (raw, DC gain prod(2 + 2 r_u)).

    Each stage contributes ``2 e^{-j 3 2^{u-1} w} [cos(3 2^{u-1} w) + r_u cos(2^{u-1} w)]``.
    """
    if not len(spec.hn_indices):
        raise SpecError("H_N is empty for pp = p - 1")
    w = _omega(grid)
    out = np.ones(w.size, dtype=complex)
    for u in spec.hn_indices:
        half = 2.0 ** (u - 1) * w
        out *= 2 * np.exp(-3j * half) * (np.cos(3 * half) + spec.r(u) * np.cos(half))
    return out


@dataclass(frozen=True)
class PerturbationConfig:
    """Multiplier errors: ``delta_c[k, n]`` on h_P(D1 n + k), ``delta_r[i]`` on r_u.

    ``delta_r`` is ordered like ``spec.hn_indices``.
    """

    delta_c: np.ndarray
    delta_r: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "delta_c", np.atleast_2d(np.asarray(self.delta_c, dtype=float)))
        object.__setattr__(self, "delta_r", np.asarray(self.delta_r, dtype=float).reshape(-1))

    @classmethod
    def uniform(cls, spec: CascadeSpec, dh: float = 0.0, dr: float = 0.0) -> "PerturbationConfig":
        bank = polyphase_components(section_hp(spec).raw, spec.D1)
        return cls(np.where(bank.mask(), dh, 0.0), np.full(len(spec.hn_indices), float(dr)))

    @classmethod
    def from_taps(cls, spec: CascadeSpec, delta_h, delta_r=None) -> "PerturbationConfig":
        """Build from per-tap errors on h_P(0..L-1)."""
        delta_h = np.asarray(delta_h, dtype=float)
        if delta_h.size != len(section_hp(spec)):
            raise SpecError(f"expected {len(section_hp(spec))} tap errors, got {delta_h.size}")
        if delta_r is None:
            delta_r = np.zeros(len(spec.hn_indices))
        return cls(polyphase_components(delta_h, spec.D1).components, delta_r)

    def validate(self, spec: CascadeSpec):
        bank = polyphase_components(section_hp(spec).raw, spec.D1)
        if self.delta_c.shape != bank.components.shape:
            raise SpecError(
                f"delta_c shape {self.delta_c.shape} != polyphase layout {bank.components.shape}"
            )
        if np.any(self.delta_c[~bank.mask()] != 0):
            raise SpecError("delta_c is non-zero in a padding slot")
        if self.delta_r.size != len(spec.hn_indices):
            raise SpecError(f"expected {len(spec.hn_indices)} stage errors, got {self.delta_r.size}")

    def delta_h(self, spec: CascadeSpec) -> np.ndarray:
        """Per-tap errors in h_P order."""
        self.validate(spec)
        return self.delta_c.T.reshape(-1)[: len(section_hp(spec))].copy()


@dataclass(frozen=True)
class ErrorTerms:
    """Sampled error functions; NaN marks flagged (divergent) grid points."""

    dh1: np.ndarray
    dh2: np.ndarray  # one row per H_N stage, ordered like spec.hn_indices
    stages: tuple

    @property
    def total(self) -> np.ndarray:
        return self.dh1 + self.dh2.sum(axis=0)

    @property
    def flagged(self) -> np.ndarray:
        return ~np.isfinite(self.total)


def error_function(spec: CascadeSpec, pert: PerturbationConfig, grid) -> ErrorTerms:
    """First-order relative error terms dH_1 and dH_{2,u} on the grid.

    Where a denominator (unit-gain H_P, or a stage's cosine sum) falls below 1e-12 and
    the matching perturbation is non-zero, the sample is NaN: these are the
    filter nulls where relative sensitivity diverges.
    """
    w = _omega(grid)
    dh = pert.delta_h(spec)
    if np.any(dh):
        raw = section_hp(spec).raw
        hp = _evaluate(raw, w)
        num = _evaluate(dh, w)
        # the threshold applies to the unit-DC-gain H_P
        bad = np.abs(hp) < FLAG_TOL * raw.sum()
        dh1 = np.where(bad, np.nan, num / np.where(bad, 1.0, hp))
    else:
        dh1 = np.zeros(w.size, dtype=complex)
    rows = []
    for u, dr in zip(spec.hn_indices, pert.delta_r):
        if dr == 0:
            rows.append(np.zeros(w.size, dtype=complex))
            continue
        half = 2.0 ** (u - 1) * w
        den = np.cos(3 * half) + spec.r(u) * np.cos(half)
        bad = np.abs(den) < FLAG_TOL
        rows.append(np.where(bad, np.nan, np.cos(half) * dr / np.where(bad, 1.0, den)).astype(complex))
    dh2 = np.array(rows) if rows else np.zeros((0, w.size), dtype=complex)
    return ErrorTerms(dh1, dh2, tuple(spec.hn_indices))


def cascade_response(spec: CascadeSpec, grid, pert: PerturbationConfig | None = None, precise: bool = False):
    """H_P(w) * prod_u S_u(w) rebuilt from (possibly perturbed) raw multipliers.

    Coefficients are summed with their errors in the working precision, and
    every section is evaluated directly, so no first-order approximation is
    involved.  The DC value is ``h_P.sum() * prod(2 + 2 r_u)``.
    """
    w = _omega(grid)
    dt = np.longdouble if precise else np.float64
    hp = section_hp(spec).raw.astype(dt)
    r = spec.stage_multipliers.astype(dt)
    if pert is not None:
        hp = hp + pert.delta_h(spec).astype(dt)
        r = r + pert.delta_r.astype(dt)
    out = _evaluate(hp, w, precise)
    for u, ru in zip(spec.hn_indices, r):
        out = out * _stage_response(ru, 2**u, w, precise)
    return out


def perturbed_response(spec: CascadeSpec, pert: PerturbationConfig, grid, precise: bool = True):
    """Exact response of the structure with c + dc and r + dr.

    Evaluated in extended precision by default because it is used to
    resolve second-order differences near 1e-11 on values of order 1e4.
    """
    pert.validate(spec)
    return cascade_response(spec, grid, pert, precise)


def first_order_residual(spec: CascadeSpec, pert: PerturbationConfig, grid) -> np.ndarray:
    """|exact - H (1 + dH)| per grid point; NaN where dH is flagged."""
    terms = error_function(spec, pert, grid)
    nominal = cascade_response(spec, grid, precise=True)
    exact = perturbed_response(spec, pert, grid)
    pred = nominal * (1 + terms.total.astype(np.clongdouble))
    return np.abs(exact - pred).astype(float)
