"""Command-line front end: ``gcfdecim <subcommand> [flags]``.

CSV outputs start with a ``# schema=1`` line followed by a header row.
Exit status is 0 on success, 1 for invalid flags or unreadable input and
2 for numerical failures.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import math
import sys

import numpy as np

from . import __version__
from .exceptions import SpecError
from .filters import GcfSpec, gcf_tf
from .polyphase import CascadeDecimator, CascadeSpec, _log2_exact, polyphase_components, split
from .qn import deltapqn_sweep
from .quantize import round_to_error
from .sensitivity import (
    FrequencyGrid,
    PerturbationConfig,
    cascade_response,
    error_function,
)
from .zeros import displacement_hn, displacement_hp, nominal_zeros_hn, nominal_zeros_hp

SCHEMA = 1
EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _int_list(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(v)
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


@contextlib.contextmanager
def _sink(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _write_csv(path, header, rows):
    with _sink(path) as fh:
        fh.write(f"# schema={SCHEMA}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _db(x) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 20 * np.log10(np.abs(x))


def _cascade(args) -> CascadeSpec:
    return CascadeSpec.from_decimation(args.d, args.pp, args.q, args.nu)


# --- subcommands ---------------------------------------------------------


def cmd_design(args):
    _log2_exact(args.d)
    q = tuple(args.q) if args.q is not None else GcfSpec.optimal(args.order, args.d, args.nu).rotations
    gspec = GcfSpec(args.order, args.d, q, args.nu)
    report = {
        "schema": SCHEMA,
        "spec": {"order": gspec.order, "d": gspec.decimation, "nu": gspec.nu,
                 "q": list(gspec.rotations), "fc": gspec.fc},
        "h_gcf": gcf_tf(gspec).tolist(),
    }
    if gspec.order == 3:
        cspec = CascadeSpec.from_gcf(gspec, args.pp)
        hp, hn = split(cspec)
        report["spec"].update(p=cspec.p, pp=cspec.pp, d1=cspec.D1, d2=cspec.D2, alpha=cspec.alpha)
        report["r"] = cspec.multipliers.tolist()
        report["h_p"] = hp.taps.tolist()
        report["h_p_raw"] = hp.raw.tolist()
        report["polyphase"] = polyphase_components(hp.taps, cspec.D1).components.tolist()
        report["stages"] = [{"u": st.index, "r": st.r, "delay": st.delay} for st in hn]
        zeros = {"h_p": [[z.real, z.imag] for z in nominal_zeros_hp(cspec).zeros]} if cspec.D1 > 1 else {}
        if hn:
            zeros["h_n"] = [[z.real, z.imag] for z in nominal_zeros_hn(cspec).zeros]
        report["zeros"] = zeros
    with _sink(args.output) as fh:
        json.dump(report, fh, indent=1)
        fh.write("\n")


def cmd_freqresp(args):
    spec = _cascade(args)
    grid = FrequencyGrid.for_bands(spec.D, spec.fc, args.points)
    hp, _ = split(spec)
    gain = hp.raw.sum() * math.prod(2 + 2 * r for r in spec.stage_multipliers)
    exact = cascade_response(spec, grid) / gain
    header = ["f_d", "mag_db", "phase"]
    cols = [grid.points, _db(exact), np.angle(exact)]
    pert = None
    if args.quantize is not None:
        qh = round_to_error(hp.raw, args.quantize)
        qr = round_to_error(spec.stage_multipliers, args.quantize)
        pert = PerturbationConfig.from_taps(spec, qh.deltas, qr.deltas)
    elif args.offset is not None:
        pert = PerturbationConfig.uniform(spec, args.offset, args.offset)
    if pert is not None:
        approx = cascade_response(spec, grid, pert) / gain
        header += ["mag_db_approx", "phase_approx"]
        cols += [_db(approx), np.angle(approx)]
    _write_csv(args.output, header, zip(*cols))


def cmd_sensitivity(args):
    spec = _cascade(args)
    grid = FrequencyGrid.for_bands(spec.D, spec.fc, args.points)
    terms = error_function(spec, PerturbationConfig.uniform(spec, args.dh, args.dr), grid)
    header = ["f_d", "abs_dh1"] + [f"abs_dh2_u{u}" for u in terms.stages] + ["abs_dh", "flagged"]
    cols = [grid.points, np.abs(terms.dh1), *np.abs(terms.dh2), np.abs(terms.total), terms.flagged]
    _write_csv(args.output, header, zip(*cols))


def cmd_zeros(args):
    rows = []
    for d1 in args.d1:
        pp = _log2_exact(d1) - 1
        spec = CascadeSpec(pp + 1 + _log2_exact(args.d2), pp, args.q, args.nu)
        if spec.D1 < 2:
            raise SpecError("D1 must be at least 2")
        sets = [("H_P", nominal_zeros_hp(spec), displacement_hp(spec, args.dh))]
        if len(spec.hn_indices):
            sets.append(("H_N", nominal_zeros_hn(spec), displacement_hn(spec, args.dr)))
        for name, nominal, dz in sets:
            if args.per_zero:
                for i, (z, d) in enumerate(zip(nominal.zeros, dz)):
                    rows.append((d1, name, i, z.real, z.imag, abs(d)))
            else:
                rows.append((d1, name, float(np.max(np.abs(dz)))))
    header = ["d1", "section", "index", "re", "im", "abs_dz"] if args.per_zero else ["d1", "section", "max_abs_dz"]
    _write_csv(args.output, header, rows)


def cmd_qnsweep(args):
    res = deltapqn_sweep(args.d1, args.dh, nu=args.nu, B=args.B, q=args.q)
    _write_csv(args.output, ["d1", "dh", "delta_pqn_db"], res.rows())


def _read_samples(path) -> np.ndarray:
    with open(path) as fh:
        return np.array([float(line) for line in fh if line.strip()], dtype=float)


def cmd_simulate(args):
    if args.filter_file:
        with open(args.filter_file) as fh:
            report = json.load(fh)
        try:
            dec = CascadeDecimator(report["h_p_raw"], report["spec"]["d1"],
                                   [st["r"] for st in report["stages"]])
        except (KeyError, TypeError) as exc:
            raise SpecError(f"filter file lacks a polyphase design: {exc}")
    else:
        dec = CascadeDecimator.from_spec(_cascade(args))
    if args.input == "impulse":
        n = args.length if args.length is not None else dec.length
        x = np.zeros(n)
        if n:
            x[0] = 1.0
    elif args.input == "noise":
        n = args.length if args.length is not None else 4096
        x = np.random.default_rng(args.seed).standard_normal(n)
    else:
        if not args.input_file:
            raise SpecError("--input file needs --input-file")
        x = _read_samples(args.input_file)
    step = args.block_size or max(1, x.size)
    y = np.concatenate([dec.process(x[i : i + step]) for i in range(0, x.size, step)] + [dec.flush()])
    _write_csv(args.output, ["n", "y"], enumerate(y))


# --- parser --------------------------------------------------------------


def _cascade_flags(p, d_default=32):
    p.add_argument("--d", type=int, default=d_default, help="overall decimation D (power of two)")
    p.add_argument("--pp", type=int, default=None, help="polyphase split p_p (default: D1 = D)")
    p.add_argument("--nu", type=int, default=4, help="residual oversampling")
    p.add_argument("--q", type=float, default=0.79, help="zero rotation |q|")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gcfdecim", description="Generalized comb decimation filter toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("design", help="filter report as json")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--d", type=int, default=32)
    p.add_argument("--nu", type=int, default=4)
    p.add_argument("--pp", type=int, default=None)
    p.add_argument("--q", type=_float_list, default=None, help="comma-separated rotations")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("freqresp", help="magnitude/phase csv, optionally with approximated multipliers")
    _cascade_flags(p, 64)
    p.add_argument("--points", type=int, default=8192)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--quantize", type=float, help="round every multiplier to within this error")
    g.add_argument("--offset", type=float, help="add this error to every multiplier")
    p.set_defaults(func=cmd_freqresp)

    p = sub.add_parser("sensitivity", help="first-order error function csv")
    _cascade_flags(p)
    p.add_argument("--points", type=int, default=8192)
    p.add_argument("--dh", type=float, default=1e-4, help="uniform error on h_P taps")
    p.add_argument("--dr", type=float, default=1e-4, help="uniform error on stage multipliers")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("zeros", help="first-order zero displacements per D1")
    p.add_argument("--d1", type=_int_list, default=[8, 16, 32, 64])
    p.add_argument("--d2", type=int, default=4)
    p.add_argument("--nu", type=int, default=4)
    p.add_argument("--q", type=float, default=0.79)
    p.add_argument("--dh", type=float, default=1e-4)
    p.add_argument("--dr", type=float, default=1e-4)
    p.add_argument("--per-zero", action="store_true", help="one row per zero instead of the maximum")
    p.set_defaults(func=cmd_zeros)

    p = sub.add_parser("qnsweep", help="noise-rejection gain over comb^3 per (D1, dh)")
    p.add_argument("--d1", type=_int_list, default=[8, 16, 32, 64, 128])
    p.add_argument("--dh", type=_float_list, default=[0.0, 1e-4, 1e-3, 1e-2])
    p.add_argument("--nu", type=int, default=4)
    p.add_argument("--B", type=int, default=2, help="modulator order")
    p.add_argument("--q", type=float, default=0.79)
    p.set_defaults(func=cmd_qnsweep)

    p = sub.add_parser("simulate", help="stream samples through the decimator")
    _cascade_flags(p)
    p.add_argument("--input", choices=("impulse", "noise", "file"), default="impulse")
    p.add_argument("--input-file", help="one sample per line")
    p.add_argument("--length", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--block-size", type=int, default=None)
    p.add_argument("--filter-file", help="design json to run instead of the flags")
    p.set_defaults(func=cmd_simulate)

    for p in sub.choices.values():
        p.add_argument("--output", "-o", default=None, help="output path (default stdout)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except BrokenPipeError:
        sys.stderr.close()  # downstream reader went away (e.g. `| head`)
        return EXIT_OK
    except (SpecError, OSError, ValueError) as exc:
        print(f"gcfdecim: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, RuntimeError) as exc:
        print(f"gcfdecim: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
