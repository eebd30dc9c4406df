"""Nominal zeros of H_P and H_N, first-order displacements, and a root oracle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exceptions import ConvergenceError, DegenerateZeroError, SpecError
from .polyphase import CascadeSpec, section_hp

DEGENERATE_TOL = 1e-12
ROOT_TOL = 1e-10
_EPS = np.finfo(float).eps


def _multiplicities(z: np.ndarray, tol: float) -> np.ndarray:
    if not z.size:
        return np.zeros(0, dtype=int)
    return (np.abs(z[:, None] - z[None, :]) <= tol).sum(axis=1)


@dataclass(frozen=True)
class ZeroSet:
    """Zeros of one section.

    ``section`` is "H_P", "H_N" or "full".  ``labels`` tags each zero with
    its family (H_P) or stage index u (H_N); -1 when unknown.
    """

    zeros: np.ndarray
    section: str
    multiplicities: np.ndarray
    labels: np.ndarray

    def __len__(self):
        return self.zeros.size

    @property
    def angles(self) -> np.ndarray:
        return np.angle(self.zeros)

    def circle_error(self) -> float:
        """max | |z| - 1 | over the set."""
        return float(np.max(np.abs(np.abs(self.zeros) - 1))) if self.zeros.size else 0.0


def _zero_set(z, section, labels=None, tol=1e-9) -> ZeroSet:
    z = np.asarray(z, dtype=complex)
    if labels is None:
        labels = np.full(z.size, -1)
    return ZeroSet(z, section, _multiplicities(z, tol), np.asarray(labels, dtype=int))


def nominal_zeros_hp(spec: CascadeSpec) -> ZeroSet:
    """The 3*D1 - 3 designed zeros of the polyphase section.

    Families (label: angle): 0: +2pi k/D1, k=1..K; 1: -2pi k/D1, k=1..K-1;
    2: +(2pi k/D1 + a) and 3: its conjugate, k=1..K-1; 4: +-(2pi k/D1 - a),
    k=1..K, with K = D1 // 2.
    """
    if spec.D1 < 2:
        raise SpecError("H_P has no zeros for D1 = 1")
    K = spec.D1 // 2
    a = spec.alpha
    base = lambda lo, hi: 2 * np.pi * np.arange(lo, hi + 1) / spec.D1  # noqa: E731
    shifted = base(1, K) - a
    families = [base(1, K), -base(1, K - 1), base(1, K - 1) + a, -(base(1, K - 1) + a),
                np.concatenate([shifted, -shifted])]
    angles = np.concatenate(families)
    labels = np.concatenate([np.full(f.size, i) for i, f in enumerate(families)])
    return _zero_set(np.exp(1j * angles), "H_P", labels)


def nominal_zeros_hn(spec: CascadeSpec) -> ZeroSet:
    """Zeros of every H_N stage, at the input rate.

    Stage u (m = 2**u) vanishes where z^-m is -1 or -e^{+-j m a}.
    """
    if not len(spec.hn_indices):
        raise SpecError("H_N is empty for pp = p - 1")
    zs, labels = [], []
    for u in spec.hn_indices:
        m = 2**u
        k = 2 * np.pi * np.arange(m)
        for shift in (0.0, -m * spec.alpha, m * spec.alpha):
            zs.append(np.exp(1j * (np.pi + shift + k) / m))
            labels.append(np.full(m, u))
    return _zero_set(np.concatenate(zs), "H_N", np.concatenate(labels))


def _as_deltas(delta, n: int, what: str) -> np.ndarray:
    d = np.asarray(delta, dtype=float)
    if d.ndim == 0:
        return np.full(n, float(d))
    if d.size != n:
        raise SpecError(f"expected {n} {what}, got {d.size}")
    return d.reshape(-1)


def _check_degenerate(den: np.ndarray):
    bad = np.flatnonzero(np.abs(den) < DEGENERATE_TOL)
    if bad.size:
        raise DegenerateZeroError(
            f"{bad.size} zero(s) have a vanishing derivative (repeated zeros)", bad
        )


def displacement_hp(spec: CascadeSpec, delta_h, normalized: bool = False) -> np.ndarray:
    """First-order shift of each nominal H_P zero for tap errors ``delta_h``.

    ``delta_h`` is a scalar (uniform error) or one value per tap.  By default
    the errors sit on the raw taps (h_P(0) = 1); with ``normalized`` they sit
    on the unit-DC-gain taps instead, which is the same as raw errors scaled
    by ``h_P.sum()``.  Output follows :func:`nominal_zeros_hp` order.
    """
    raw = section_hp(spec).raw
    dh = _as_deltas(delta_h, raw.size, "tap errors")
    if normalized:
        dh = dh * raw.sum()
    z = nominal_zeros_hp(spec).zeros
    inv = 1 / z
    num = np.polyval(dh[::-1], inv)
    # H_P'(z_i): only the k = i term of the product rule survives at z_i
    ratio = 1 - z[None, :] * inv[:, None]
    np.fill_diagonal(ratio, 1.0)
    den = raw[0] * inv * ratio.prod(axis=1)
    _check_degenerate(den)
    return -num / den


def _stage_terms(z, m, r):
    w = z ** (-m)
    s = 1 + r * (w + w * w) + w**3
    ds = -(r * (m * w + 2 * m * w * w) + 3 * m * w**3) / z
    return s, ds, w + w * w


def displacement_hn(spec: CascadeSpec, delta_r) -> np.ndarray:
    """First-order shift of each nominal H_N zero for stage errors ``delta_r``.

    ``delta_r`` is a scalar or one value per stage (``spec.hn_indices``
    order).  Output follows :func:`nominal_zeros_hn` order.
    """
    dr = _as_deltas(delta_r, len(spec.hn_indices), "stage errors")
    z = nominal_zeros_hn(spec).zeros
    terms = [_stage_terms(z, 2**u, spec.r(u)) for u in spec.hn_indices]
    s = np.array([t[0] for t in terms])
    n = len(terms)
    others = [np.prod(np.delete(s, i, axis=0), axis=0) for i in range(n)]
    dz = sum(terms[i][1] * others[i] for i in range(n))
    dr_term = sum(terms[i][2] * others[i] * dr[i] for i in range(n))
    _check_degenerate(dz)
    return -dr_term / dz


def _pair_conjugates(z: np.ndarray) -> np.ndarray:
    _, partner = linear_sum_assignment(np.abs(z[:, None] - np.conj(z)[None, :]))
    return 0.5 * (z + np.conj(z[partner]))


def _initial_guesses(a: np.ndarray) -> np.ndarray:
    """Starting points on circles read off the Newton polygon of |coefficients|.

    One circle per edge of the upper convex hull of (j, log|b_j|), where b_j
    multiplies z^j; a single circle would miss roots of widely spread size.
    """
    b = np.abs(a[::-1])
    j = np.flatnonzero(b)
    logs = np.log(b[j])
    hull = []
    for k in range(j.size):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            # drop i1 if it lies on or below the chord i0 -> k
            if (logs[i1] - logs[i0]) * (j[k] - j[i0]) <= (logs[k] - logs[i0]) * (j[i1] - j[i0]):
                hull.pop()
            else:
                break
        hull.append(k)
    pts = []
    for s, (i0, i1) in enumerate(zip(hull[:-1], hull[1:])):
        m = j[i1] - j[i0]
        radius = np.exp((logs[i0] - logs[i1]) / m)
        pts.append(radius * np.exp(1j * (2 * np.pi * np.arange(m) / m + np.pi / (2 * m) + 0.7 * s)))
    return np.concatenate(pts)


def root_oracle(tf, tol: float = ROOT_TOL, maxiter: int = 500) -> ZeroSet:
    """All roots of ``sum_k tf[k] z^-k`` by Aberth-Ehrlich iteration.

    The ascending z^-1 coefficients are the descending coefficients of the
    polynomial in z.  Every root must reach a relative residual
    ``|p(z)| / sum |a_k| |z|^(n-k)`` below ``tol``; conjugate pairs of a
    real polynomial are symmetrized.
    """
    c = np.asarray(tf, dtype=float).reshape(-1)
    if c.size < 2:
        raise SpecError("root_oracle needs degree >= 1")
    if c[0] == 0:
        raise SpecError("leading coefficient must be non-zero")
    nz = 0
    while c[-1] == 0:
        c = c[:-1]
        nz += 1
    a = c / c[0]
    n = a.size - 1
    if n == 0:
        return _zero_set(np.zeros(nz), "full", tol=1e-4)
    da = np.polyder(a)
    absa = np.abs(a)
    z = _initial_guesses(a)
    active = np.ones(n, dtype=bool)

    def backward(z):
        return np.abs(np.polyval(a, z)) / np.polyval(absa, np.abs(z))

    for _ in range(maxiter):
        if not active.any():
            break
        za = z[active]
        ratio = np.polyval(a, za) / np.polyval(da, za)
        diff = za[:, None] - z[None, :]
        diff[np.arange(za.size), np.flatnonzero(active)] = np.inf
        step = ratio / (1 - ratio * (1 / diff).sum(axis=1))
        step[~np.isfinite(step)] = 0
        z[active] = za - step
        done = (np.abs(step) <= 4 * _EPS * np.abs(za)) | (backward(z[active]) <= 4 * n * _EPS)
        active[np.flatnonzero(active)[done]] = False
    # one Newton polish, kept only where it helps (it can wander at clustered roots)
    with np.errstate(divide="ignore", invalid="ignore"):
        cand = z - np.polyval(a, z) / np.polyval(da, z)
    better = np.isfinite(cand) & (backward(cand) < backward(z))
    z[better] = cand[better]
    z = _pair_conjugates(z)
    residuals = backward(z)
    if np.max(residuals) > tol:
        raise ConvergenceError(
            f"root iteration stalled: max residual {np.max(residuals):.3e} > {tol:g}", residuals
        )
    return _zero_set(np.concatenate([z, np.zeros(nz)]), "full", tol=1e-4)


def match_zeros(reference, candidates) -> np.ndarray:
    """Reorder ``candidates`` so entry i is the one assigned to ``reference[i]``.

    Minimum-total-distance assignment, robust when zeros sit close together.
    """
    ref = np.asarray(getattr(reference, "zeros", reference), dtype=complex)
    cand = np.asarray(getattr(candidates, "zeros", candidates), dtype=complex)
    if ref.size != cand.size:
        raise SpecError(f"cannot match {ref.size} zeros against {cand.size}")
    rows, cols = linear_sum_assignment(np.abs(ref[:, None] - cand[None, :]))
    out = np.empty_like(ref)
    out[rows] = cand[cols]
    return out


def stage_polynomial(spec: CascadeSpec, delta_r=0.0) -> np.ndarray:
    """Full-rate coefficients of H_N with multipliers r_u + delta_r."""
    dr = _as_deltas(delta_r, len(spec.hn_indices), "stage errors")
    out = np.array([1.0])
    for u, d in zip(spec.hn_indices, dr):
        m = 2**u
        st = np.zeros(3 * m + 1)
        st[[0, 3 * m]] = 1
        st[[m, 2 * m]] = spec.r(u) + d
        out = np.convolve(out, st)
    return out
