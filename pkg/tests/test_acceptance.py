"""Acceptance checks, one per primary criterion.

Each check prints a PASS/FAIL line with its measured figure; the lines are
repeated in the pytest terminal summary.  Run directly with
``python3 tests/test_acceptance.py`` for the report alone.
"""

import math
import time

import numpy as np
import pytest

from gcfdecim import (
    CascadeSpec,
    FrequencyGrid,
    GcfSpec,
    PerturbationConfig,
    QnModel,
    comb_tf,
    decimate_stream,
    delta_pqn,
    deltapqn_sweep,
    displacement_hn,
    displacement_hp,
    error_function,
    gcf3_impulse,
    gcf3_tf_oracle,
    gcf_tf,
    match_zeros,
    nominal_zeros_hn,
    nominal_zeros_hp,
    polyphase_components,
    reference_decimate,
    root_oracle,
)
from gcfdecim.cli import main as cli_main
from gcfdecim.polyphase import section_hp
from gcfdecim.sensitivity import first_order_residual
from gcfdecim.zeros import stage_polynomial

RESULTS = []


def _record(num, title, ok, detail):
    line = f"criterion {num} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def criterion_1():
    def run():
        worst, lengths_ok = 0.0, True
        for D in (2, 4, 8, 16, 32, 64):
            for a in (0.0, 0.79 * 2 * math.pi / (2 * 4 * D)):
                h = gcf3_impulse(D, a).taps
                o = gcf3_tf_oracle(D, a)
                lengths_ok &= h.size == o.size == 3 * D - 2
                worst = max(worst, float(np.max(np.abs(h - o))))
        return worst, lengths_ok

    (worst, lengths_ok), dt = _timed(run)
    ok = worst < 1e-12 and lengths_ok and dt < 1
    return _record(1, "impulse vs oracle", ok, f"max diff {worst:.2e} (<1e-12), lengths 3D-2 {lengths_ok}, {dt:.2f}s (<1s)")


def criterion_2():
    bad = [D for D in (2, 4, 8, 16, 32, 64, 128) if not np.array_equal(gcf3_impulse(D, 0.0).taps, comb_tf(3, D))]
    return _record(2, "comb degeneracy", not bad, "bit-exact for D=2..128" if not bad else f"mismatch at D={bad}")


def criterion_3():
    configs = [(32, -1), (32, 2), (32, 4), (64, 5)]

    def run():
        recon_ok, worst = True, 0.0
        rng = np.random.default_rng(20240601)
        for D, pp in configs:
            spec = CascadeSpec.from_decimation(D, pp)
            hp = section_hp(spec).taps
            recon_ok &= np.array_equal(polyphase_components(hp, spec.D1).reconstruct(), hp)
            full = gcf3_tf_oracle(D, spec.alpha)
            for _ in range(10):
                x = rng.standard_normal(10_000)
                y, ref = decimate_stream(x, spec), reference_decimate(x, full, D)
                worst = max(worst, float(np.sqrt(np.mean((y - ref) ** 2))))
        return recon_ok, worst

    (recon_ok, worst), dt = _timed(run)
    ok = recon_ok and worst < 1e-10 and dt < 10
    return _record(3, "polyphase correctness", ok, f"reconstruction exact {recon_ok}, max RMS {worst:.2e} (<1e-10), {dt:.2f}s (<10s)")


def criterion_4():
    db, dt = _timed(lambda: delta_pqn(gcf_tf(GcfSpec.optimal(3, 32)), QnModel.for_decimation(32)))
    ok = abs(db + 8) <= 1 and dt < 5
    return _record(4, "rejection gain over comb^3", ok, f"dPqn {db:.3f} dB (-8 +- 1), {dt:.2f}s (<5s)")


def criterion_5():
    res, dt = _timed(lambda: deltapqn_sweep([32, 64, 128, 256], [0.0, 1e-3]))
    gap = float(np.max(np.abs(res.db[:, 1] - res.db[:, 0])))
    ok = gap < 1 and dt < 30
    cells = ", ".join(f"D1={d}: {a:.3f}/{b:.3f}" for d, (a, b) in zip(res.d1, res.db))
    return _record(5, "quantization robustness", ok, f"max shift {gap:.4f} dB (<1) [{cells}], {dt:.2f}s (<30s)")


def criterion_6():
    spec = CascadeSpec.from_decimation(32, pp=2)
    grid = FrequencyGrid.for_bands(spec.D, spec.fc)
    deltas = [1e-7, 1e-6, 1e-5]

    def run():
        return [float(np.nanmax(first_order_residual(spec, PerturbationConfig.uniform(spec, d, d), grid)))
                for d in deltas]

    res, dt = _timed(run)
    slope = float(np.polyfit(np.log10(deltas), np.log10(res), 1)[0])
    ok = abs(slope - 2) <= 0.2 and dt < 10
    return _record(6, "first-order validity", ok, f"log-log slope {slope:.3f} (2 +- 0.2), {dt:.2f}s (<10s)")


def criterion_7():
    spec = CascadeSpec.from_decimation(32, pp=2)
    grid = FrequencyGrid.for_bands(spec.D, spec.fc)
    e = np.abs(error_function(spec, PerturbationConfig.uniform(spec, 1e-4, 1e-4), grid).total)
    f = grid.points
    pb = np.nanmax(e[f <= spec.fc])
    fb = np.nanmax(e[np.abs(f - 1 / spec.D) <= spec.fc])
    margin = float(20 * np.log10(fb / pb))
    return _record(7, "pass-band insensitivity", margin >= 20, f"folding band {margin:.1f} dB above pass band (>=20)")


def _relative_errors(nominal, predicted, moved):
    actual = match_zeros(nominal, moved) - nominal
    live = np.abs(predicted) > 1e-9 * np.abs(predicted).max()
    rel = np.abs(actual - predicted)[live] / np.abs(predicted[live])
    # zeros with no first-order motion (z = -1) must stay put to well below the section's scale
    pinned = float(np.max(np.abs(actual[~live]), initial=0.0)) / np.abs(predicted).max()
    return float(rel.max()), pinned, int((~live).sum())


def criterion_8():
    spec = CascadeSpec(5, 2)  # D1 = 8, D2 = 4

    def run():
        raw = section_hp(spec).raw
        hp_nom, hn_nom = nominal_zeros_hp(spec).zeros, nominal_zeros_hn(spec).zeros
        hp_pred, hn_pred = displacement_hp(spec, 1e-6), displacement_hn(spec, 1e-6)
        hn_moved = root_oracle(stage_polynomial(spec, 1e-6))
        return (_relative_errors(hp_nom, hp_pred, root_oracle(raw + 1e-6)),
                _relative_errors(hn_nom, hn_pred, hn_moved), hn_moved.circle_error(),
                np.abs(hp_pred).max(), np.abs(hn_pred).max())

    (hp_err, hn_err, circle, hp_max, hn_max), dt = _timed(run)
    pinned_ok = max(hp_err[1], hn_err[1]) < 1e-3
    ok = hp_err[0] < 0.05 and hn_err[0] < 0.05 and pinned_ok and circle < 1e-10 and hn_max < hp_max and dt < 10
    return _record(
        8, "zero displacement", ok,
        f"H_P rel {hp_err[0]:.2e}, H_N rel {hn_err[0]:.2e} (<0.05; {hp_err[2]}+{hn_err[2]} pinned zeros moved "
        f"<= {max(hp_err[1], hn_err[1]):.1e} of max |dz|), H_N circle {circle:.1e} (<1e-10), "
        f"max |dz| H_N {hn_max:.2e} < H_P {hp_max:.2e}, {dt:.2f}s (<10s)",
    )


def criterion_9(tmp_dir):
    out = tmp_dir / "freqresp.csv"
    code = cli_main(["freqresp", "--d", "64", "--nu", "4", "--quantize", "1e-3", "--output", str(out)])
    data = np.genfromtxt(out, delimiter=",", skip_header=2)
    f, exact, approx = data[:, 0], data[:, 1], data[:, 3]
    fc = 1 / (2 * 4 * 64)
    in_band = np.zeros(f.size, dtype=bool)
    for k in range(1, 33):
        in_band |= np.abs(f - k / 64) <= fc
    sel = in_band & (exact > -120)
    gap = float(np.max(np.abs(exact - approx)[sel]))
    ok = code == 0 and gap < 3
    return _record(9, "overlay reproduction", ok, f"max in-band gap {gap:.3f} dB over {sel.sum()} points (<3 dB)")


@pytest.mark.parametrize("num", range(1, 9))
def test_criterion(num):
    assert globals()[f"criterion_{num}"]()


def test_criterion_9(tmp_path):
    assert criterion_9(tmp_path)


if __name__ == "__main__":
    import pathlib
    import tempfile

    for n in range(1, 9):
        globals()[f"criterion_{n}"]()
    with tempfile.TemporaryDirectory() as d:
        criterion_9(pathlib.Path(d))
