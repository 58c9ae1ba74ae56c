"""Command-line interface.

Subcommands: eigensolve, simulate, spectrum, stokes, oracle, scan,
list-scenarios, bench.  Exit codes: 0 success, 2 validation error,
3 numerical failure.
"""

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import emission as emission_mod
from . import propagator as prop_mod
from . import selection_oracle
from .arrayio import read_array, write_array
from .ring_model import AccuracyError, GeometryError, analytic_energy
from .scenario_io import (ValidationError, bundled_scenario_names,
                          default_output_root, load_scenario, run_pipeline,
                          solve_scenario_orbitals)

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _add_common(parser):
    parser.add_argument("--scenario", required=True,
                        help="bundled scenario name or YAML path")
    parser.add_argument("--out", default=None,
                        help="output root (default $RINGLIGHT_OUT or ./ringlight-out)")
    parser.add_argument("--ci-scale", action="store_true",
                        help="apply the scenario's reduced CI-scale settings")
    parser.add_argument("--override", action="append", default=[],
                        metavar="KEY=VALUE",
                        help="dotted-path scenario override (repeatable)")


def _load(args):
    return load_scenario(args.scenario, overrides=args.override,
                         ci_scale=args.ci_scale)


def cmd_list_scenarios(args):
    for name in bundled_scenario_names():
        print(name)
    return 0


def cmd_eigensolve(args):
    scn = _load(args)
    orbitals = solve_scenario_orbitals(scn)
    out_dir = os.path.join(args.out or default_output_root(), scn.name)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "orbitals.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("n0", "m0", "energy_mev", "occupation"))
        for orb in orbitals:
            writer.writerow((orb.n0, orb.m0, orb.energy, orb.occupation))
    kept = [o for o in orbitals if o.occupation >= scn.occupation_cutoff]
    write_array(os.path.join(out_dir, "radial_profiles"),
                np.array([o.radial_profile for o in kept]),
                {"scenario_hash": scn.hash, "quantity": "radial_profiles",
                 "rho_max_nm": scn.grid.extent,
                 "labels": [list(o.label) for o in kept]})
    print(f"{len(orbitals)} states ({len(kept)} occupied) -> {path}")
    if len(scn.stack.rings) == 1:
        ring = scn.stack.rings[0]
        worst = max(abs(o.energy - analytic_energy(ring, o.n0, abs(o.m0),
                                                   scn.material))
                    / abs(analytic_energy(ring, o.n0, abs(o.m0), scn.material))
                    for o in orbitals[:20])
        print(f"closed-form check (20 lowest): max rel err {worst:.2e}")
    return 0


def cmd_simulate(args):
    scn = _load(args)
    def progress(i, n):
        if args.progress and (i % max(n // 20, 1) == 0 or i == n):
            print(f"  step {i}/{n}", file=sys.stderr)
    manifest = run_pipeline(scn, out_root=args.out,
                            progress=progress if args.progress else None)
    print(f"scenario {scn.name} ({scn.hash}) -> {manifest.out_dir}")
    print(f"artifacts: {len(manifest.artifacts)}")
    return 0


def _spectro_summary(out_dir, region, what):
    base = os.path.join(out_dir, f"spectro_s0_{region}")
    if not os.path.exists(base + ".f64"):
        raise FileNotFoundError(
            f"no spectrogram for region {region!r} under {out_dir}; "
            "run `simulate` first")
    s0, meta = read_array(base)
    omegas = np.linspace(meta["omega_max_radps"] / meta["n_freq"],
                         meta["omega_max_radps"], meta["n_freq"])
    times = meta["t0_ps"] + meta["dt_ps"] * np.arange(s0.shape[0])
    return s0, omegas, times, meta


def cmd_spectrum(args):
    scn = _load(args)
    out_dir = os.path.join(args.out or default_output_root(), scn.name)
    s0, omegas, times, _ = _spectro_summary(out_dir, args.region, "s0")
    it, iw = np.unravel_index(np.argmax(s0), s0.shape)
    from .constants import HBAR
    print(f"region {args.region}: S0 peak at "
          f"{omegas[iw] / (2 * math.pi):.3f} THz "
          f"({omegas[iw] * HBAR:.3f} meV), t = {times[it]:.2f} ps, "
          f"S0 = {s0[it, iw]:.4e}")
    if args.cut_time is not None:
        it = int(np.argmin(np.abs(times - args.cut_time)))
        path = os.path.join(out_dir, f"spectrum_cut_t{times[it]:.2f}.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("freq_thz", "s0"))
            for w, v in zip(omegas / (2 * math.pi), s0[it]):
                writer.writerow((w, v))
        print(f"cut -> {path}")
    return 0


def cmd_stokes(args):
    scn = _load(args)
    out_dir = os.path.join(args.out or default_output_root(), scn.name)
    s0, omegas, times, meta = _spectro_summary(out_dir, args.region, "s0")
    rows = []
    for comp in (1, 2, 3):
        arr, _ = read_array(os.path.join(out_dir,
                                         f"spectro_s{comp}_{args.region}"))
        rows.append(arr)
    it, iw = np.unravel_index(np.argmax(s0), s0.shape)
    s0v = s0[it, iw]
    print(f"region {args.region} dominant line "
          f"({omegas[iw] / (2 * math.pi):.3f} THz, t={times[it]:.2f} ps):")
    for comp, arr in zip((1, 2, 3), rows):
        print(f"  S{comp}/S0 = {arr[it, iw] / s0v:+.4f}")
    p = math.sqrt(sum(arr[it, iw] ** 2 for arr in rows)) / s0v
    print(f"  degree of polarization p = {p:.4f}")
    return 0


def cmd_oracle(args):
    scn = _load(args)
    orbitals = solve_scenario_orbitals(scn)
    lines = selection_oracle.predict_lines(
        orbitals, scn.pulse, scn.material,
        occupation_cutoff=scn.occupation_cutoff,
        max_lines=args.max_lines)
    print("from(n0,m0) -> to(n0,m0)   dE[meV]   f[THz]    weight")
    for ln in lines:
        print(f"({ln.from_label[0]},{ln.from_label[1]:+d}) -> "
              f"({ln.to_label[0]},{ln.to_label[1]:+d})   "
              f"{ln.delta_e:7.3f}  {ln.frequency_thz:7.3f}  {ln.weight:.3e}")
    return 0


def cmd_scan(args):
    scn_base = _load(args)
    out_root = args.out or default_output_root()
    m_values = [int(v) for v in args.m_oam.split(",")]
    factors = [float(v) for v in args.intensity_factors.split(",")]
    results = []
    for m in m_values:
        for fac in factors:
            overrides = list(args.override) + [
                f"pulse.m_oam={m}",
                f"pulse.peak_intensity_w_cm2="
                f"{scn_base.pulse.peak_intensity * fac}",
                f"name={scn_base.name}-scan-m{m}-I{fac:g}"]
            scn = load_scenario(args.scenario, overrides=overrides,
                                ci_scale=args.ci_scale)
            manifest = run_pipeline(scn, out_root=out_root)
            s0, omegas, times, _ = _spectro_summary(
                manifest.out_dir, "total", "s0")
            sel = (omegas / (2 * math.pi) >= args.band[0]) & \
                  (omegas / (2 * math.pi) <= args.band[1])
            it = int(np.argmin(np.abs(times - args.probe_time)))
            signal = float(s0[it, sel].max()) if np.any(sel) else 0.0
            results.append((m, fac, signal))
            print(f"m_oam={m} intensity x{fac:g}: band signal {signal:.4e}")
    path = os.path.join(out_root, f"{scn_base.name}-scan.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("m_oam", "intensity_factor", "signal"))
        writer.writerows(results)
    print(f"scan table -> {path}")
    return 0


def cmd_field(args):
    """Export vector-potential snapshots on the scenario grid."""
    from .vortex_field import vector_potential
    scn = _load(args)
    out_dir = os.path.join(args.out or default_output_root(), scn.name)
    X, Y = scn.grid.meshes()
    for t in args.time:
        sample = vector_potential(scn.pulse, X, Y, t)
        base = os.path.join(out_dir, f"field_t{t:.3f}".replace(".", "p"))
        write_array(base, np.stack([sample.Ax, sample.Ay]),
                    {"scenario_hash": scn.hash, "quantity": "vector_potential",
                     "units": "V*s/m", "time_ps": t,
                     "extent_nm": scn.grid.extent,
                     "layout": "(component, y, x)"})
        print(base + ".f64")
    return 0


def cmd_bench(args):
    """Benchmark the compiled core against the pure-Python fallback."""
    from .propagator import backend, kernels_fallback
    import time as time_mod
    ny = nx = args.size
    rng = np.random.default_rng(0)
    v = rng.standard_normal((ny, nx)) + 1j * rng.standard_normal((ny, nx))
    px = np.ascontiguousarray(rng.standard_normal((ny, nx)))
    py = np.ascontiguousarray(rng.standard_normal((ny, nx)))
    ps = np.ascontiguousarray(np.exp(1j * rng.standard_normal((ny, nx))))
    impls = [("python", kernels_fallback)]
    try:
        impls.append(("compiled", backend.kernels(force="compiled")))
    except ImportError:
        print("compiled core not available; benchmarking fallback only")

    def timeit(fn, n=args.repeats):
        t0 = time_mod.perf_counter()
        for _ in range(n):
            fn()
        return (time_mod.perf_counter() - t0) / n * 1e3

    rows = []
    for name, ker in impls:
        fac = ker.CayleyFactor(nx, 1.95, 3.8e-4, 568.7)
        out = np.empty_like(v)
        a = v.copy()
        rows.append((name, {
            "coupling_ms": timeit(lambda: ker.coupling_apply_out(
                out, v, px, py, 1.95, 1.95, -0.5j)),
            "phase_ms": timeit(lambda: ker.phase_apply(a, ps, px, py, 1e-3)),
            "kinetic_x_ms": timeit(lambda: ker.kinetic_apply_x(a, fac)),
            "kinetic_y_ms": timeit(lambda: ker.kinetic_apply_y(a, fac)),
        }))
    print(f"grid {nx}x{ny}, {args.repeats} repeats")
    for name, row in rows:
        cells = "  ".join(f"{k}={v:8.3f}" for k, v in row.items())
        print(f"{name:>9}: {cells}")
    if len(rows) == 2:
        speedups = {k: rows[0][1][k] / rows[1][1][k] for k in rows[0][1]}
        cells = "  ".join(f"{k.split('_ms')[0]} x{v:.1f}"
                          for k, v in speedups.items())
        print(f" speedup: {cells}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ringlight",
        description="Vortex-driven quantum-ring emission simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list-scenarios", help="list bundled scenarios")
    p.set_defaults(func=cmd_list_scenarios)

    p = sub.add_parser("eigensolve", help="solve stationary states only")
    _add_common(p)
    p.set_defaults(func=cmd_eigensolve)

    p = sub.add_parser("simulate", help="run the full pipeline")
    _add_common(p)
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectrum", help="summarize an S0 spectrogram")
    _add_common(p)
    p.add_argument("--region", default="total")
    p.add_argument("--cut-time", type=float, default=None,
                   help="export a CSV frequency cut at this time (ps)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("stokes", help="Stokes ratios at the dominant line")
    _add_common(p)
    p.add_argument("--region", default="total")
    p.set_defaults(func=cmd_stokes)

    p = sub.add_parser("oracle", help="first-order line predictions")
    _add_common(p)
    p.add_argument("--max-lines", type=int, default=25)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("scan", help="m_oam x intensity scan")
    _add_common(p)
    p.add_argument("--m-oam", default="4", dest="m_oam",
                   help="comma-separated winding numbers")
    p.add_argument("--intensity-factors", default="0.25,0.5,1.0",
                   help="comma-separated multipliers of the scenario intensity")
    p.add_argument("--band", type=float, nargs=2, default=(0.5, 0.7),
                   metavar=("THZ_LO", "THZ_HI"))
    p.add_argument("--probe-time", type=float, default=9.0)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("field", help="export beam snapshots for debugging")
    _add_common(p)
    p.add_argument("--time", type=float, nargs="+", required=True,
                   help="times (ps) to sample")
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("bench", help="compiled-vs-python kernel benchmark")
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--repeats", type=int, default=50)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, GeometryError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except (AccuracyError, prop_mod.StabilityError, RuntimeError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
