"""Command-line front end.

Every command resolves one TOML run configuration (bundled preset and/or user
file), writes CSV/structured-text artifacts plus a manifest into the output
directory, and prints a one-line summary.

Exit codes:
    0  success
    2  usage error (bad flags, unknown command; raised by argparse)
    3  configuration error (missing/invalid config, bad preset name)
    4  infeasible request (frequency plan or filter design constraints)
    5  computation failure (fit non-convergence, domain errors)
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, _kernels, _toml_out
from .cavity import CavityError, finesse_and_decay, pair_photon_fwhm
from .config import ConfigError, RunBundle, load_bundle
from .correlation import (DetectionEventStream, FitError, G2Model, bin_coincidences,
                          comb_period_estimate, fit_envelope, g2_envelope, g2_multimode,
                          model_from_source, simulate_events)
from .fabry_perot import (DesignInfeasibleError, FilterConstraints, design_filter,
                          extinction_report, fp_fsr, kelvin_per_fsr)
from .planning import (PlanInfeasibleError, d1_reference_features,
                       delta_nu_to_tuning_temperature, solve_plan, validate_plan)
from .rubidium import blocked_band_center_hz, filter_scan, photon_spectroscopy
from .spectrum import cluster_report, cluster_spacing, dfg_scan, jsi_slice

EXIT_CONFIG = 3
EXIT_INFEASIBLE = 4
EXIT_FAILURE = 5


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return path


def _write_manifest(out_dir: Path, command: str, bundle: RunBundle, outputs,
                    extra=None) -> Path:
    entries = {}
    for p in outputs:
        entries[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
    doc = {
        "command": command,
        "package": {"name": "cespdc", "version": __version__,
                    "kernel_backend": _kernels.BACKEND},
        "versions": {
            "python": ".".join(map(str, sys.version_info[:3])),
            "numpy": np.__version__,
            "scipy": __import__("scipy").__version__,
        },
        "inputs": {"config_sha256": bundle.digest, "seed": bundle.seed},
        "outputs": entries,
    }
    if extra:
        doc["arguments"] = extra
    path = out_dir / "manifest.toml"
    _toml_out.dump(doc, path)
    return path


def _finish(args, command: str, bundle: RunBundle, outputs, summary: str, extra=None):
    _write_manifest(Path(args.out), command, bundle, outputs, extra)
    print(f"cespdc {command}: {summary}")
    return 0


def _out_dir(args, command: str) -> Path:
    if args.out is None:
        args.out = f"runs/{command}"
    path = Path(args.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _g2_model(bundle: RunBundle, multimode: bool) -> G2Model:
    cor = bundle.correlation
    fsr_mean = bundle.source.cavity.fsr_mean()
    if not multimode:
        return G2Model(cor.gamma_s, cor.gamma_i, 1.0 / fsr_mean,
                       background_rate=cor.background_rate_hz)
    rep = cluster_report(bundle.source, window_hz=2e9, weight_floor=1e-3)
    model = model_from_source(bundle.source, list(rep.pairs), cor.background_rate_hz)
    # keep the configured relaxation rates, not the loss-model ones
    return G2Model(cor.gamma_s, cor.gamma_i, model.round_trip_time_s,
                   model.mode_deltas_hz, model.mode_weights, cor.background_rate_hz)


# ---------------------------------------------------------------- commands


def cmd_jsi(args, bundle: RunBundle):
    out = _out_dir(args, "jsi")
    src = bundle.source
    span, points = bundle.scan.jsi_span_hz, bundle.scan.jsi_points
    det = np.linspace(-span / 2, span / 2, points)
    w = jsi_slice(src, src.signal_anchor_hz + det)
    path = _write_csv(out / "jsi.csv", ["detuning_hz", "weight"],
                      zip(det.tolist(), np.asarray(w).tolist()))
    peak = int(np.argmax(w))
    summary = (f"{points} points over ±{span/2e9:.2f} GHz, "
               f"peak weight {float(np.max(w)):.4f} at {det[peak]/1e6:+.1f} MHz")
    return _finish(args, "jsi", bundle, [path], summary)


def cmd_clusters(args, bundle: RunBundle):
    out = _out_dir(args, "clusters")
    rep = cluster_report(bundle.source, bundle.scan.enumeration_window_hz,
                         bundle.scan.weight_floor)
    modes = _write_csv(
        out / "modes.csv",
        ["signal_index", "idler_index", "signal_freq_hz", "idler_freq_hz",
         "weight", "brightness"],
        [(p.signal_index, p.idler_index, p.signal_freq_hz, p.idler_freq_hz,
          p.weight, p.brightness) for p in rep.pairs])
    finesse, gamma = finesse_and_decay(bundle.source.cavity)
    doc = {
        "predicted_spacing_hz": rep.predicted_spacing_hz,
        "predicted_modes_per_cluster": rep.predicted_modes_per_cluster,
        "empirical_fwhm_count": rep.empirical_fwhm_count,
        "finesse": finesse,
        "decay_rate_rad_per_s": gamma,
        "photon_fwhm_hz": pair_photon_fwhm(gamma),
        "cluster": [
            {"center_hz": c.center_hz, "members": len(c.pairs),
             "fwhm_mode_count": c.fwhm_mode_count, "peak_weight": c.peak_weight}
            for c in rep.clusters
        ],
    }
    report = out / "clusters.toml"
    _toml_out.dump(doc, report)
    summary = (f"spacing {rep.predicted_spacing_hz/1e9:.3f} GHz, "
               f"{len(rep.clusters)} clusters, central FWHM count "
               f"{rep.empirical_fwhm_count} (formula {rep.predicted_modes_per_cluster:.2f})")
    return _finish(args, "clusters", bundle, [modes, report], summary)


def cmd_dfg_scan(args, bundle: RunBundle):
    out = _out_dir(args, "dfg-scan")
    src = bundle.source
    span, points = bundle.scan.dfg_span_hz, bundle.scan.dfg_points
    det, power = dfg_scan(src, src.signal_anchor_hz - span / 2,
                          src.signal_anchor_hz + span / 2, points)
    path = _write_csv(out / "dfg_scan.csv", ["detuning_hz", "power"],
                      zip(det.tolist(), power.tolist()))
    fsr_s = src.signal_comb.fsr_hz
    fsr_i = src.idler_comb.fsr_hz
    summary = (f"{points} points over ±{span/2e9:.1f} GHz, peak {float(power.max()):.3f}, "
               f"cluster recurrence {cluster_spacing(fsr_s, fsr_i)/1e9:.3f} GHz")
    return _finish(args, "dfg-scan", bundle, [path], summary)


def cmd_filter_design(args, bundle: RunBundle):
    out = _out_dir(args, "filter-design")
    rep = cluster_report(bundle.source, bundle.scan.enumeration_window_hz,
                         weight_floor=0.0)
    design = design_filter(rep, purity_target=args.purity_target,
                           constraints=FilterConstraints(),
                           peak_transmission=bundle.fp.peak_transmission)
    ext = extinction_report(list(rep.pairs), design.fp)
    ext_path = _write_csv(
        out / "extinction.csv",
        ["signal_freq_hz", "raw_weight", "filtered_weight", "suppression_db"],
        [(r.signal_freq_hz, r.raw_weight, r.filtered_weight, r.suppression_db)
         for r in ext.rows])
    doc = {
        "spacer_length_m": design.fp.spacer_length_m,
        "reflectivity": design.fp.reflectivity,
        "fsr_hz": fp_fsr(design.fp),
        "finesse": design.fp.finesse,
        "unwanted_fraction": design.unwanted_fraction,
        "worst_suppression_db": design.worst_suppression_db,
        "purity_target": args.purity_target,
    }
    report = out / "design.toml"
    _toml_out.dump(doc, report)
    summary = (f"spacer {design.fp.spacer_length_m*1e3:.2f} mm, R "
               f"{design.fp.reflectivity*100:.2f}%, unwanted fraction "
               f"{design.unwanted_fraction*100:.2f}%")
    return _finish(args, "filter-design", bundle, [ext_path, report], summary,
                   {"purity_target": args.purity_target})


def cmd_filter_scan(args, bundle: RunBundle):
    out = _out_dir(args, "filter-scan")
    cell = None if args.no_cell else bundle.cell
    det, singles = filter_scan(bundle.source, bundle.fp, cell,
                               bundle.scan.filter_scan_range_hz,
                               bundle.scan.filter_scan_step_hz)
    path = _write_csv(out / "filter_scan.csv", ["detuning_hz", "singles"],
                      zip(det.tolist(), singles.tolist()))
    # report the most prominent non-central response in the window
    away = np.abs(det) > 2e9
    aliased = det[away][int(np.argmax(singles[away]))] if away.any() else math.nan
    summary = (f"{len(det)} points over ±{bundle.scan.filter_scan_range_hz/2e9:.1f} GHz, "
               f"strongest off-center response at {aliased/1e9:+.2f} GHz"
               + ("" if cell else " (cell removed)"))
    return _finish(args, "filter-scan", bundle, [path], summary,
                   {"no_cell": bool(args.no_cell)})


def cmd_g2(args, bundle: RunBundle):
    out = _out_dir(args, "g2")
    cor = bundle.correlation
    model = _g2_model(bundle, args.multimode)
    span = 5.0 * model.envelope_time_constant_s
    tau = np.linspace(-span, span, 4001)
    curve = _write_csv(out / "g2_model.csv", ["tau_ps", "envelope", "g2"],
                       zip((tau * 1e12).tolist(),
                           g2_envelope(model, tau).tolist(),
                           np.asarray(g2_multimode(model, tau)).tolist()))
    stream = simulate_events(model, cor.duration_s, cor.pair_rate_hz, bundle.seed)
    hist = bin_coincidences(stream, cor.bin_width_s, cor.window_s)
    hist_path = _write_csv(out / "histogram.csv", ["tau_ps", "count"],
                           zip(np.rint(hist.tau_edges_s * 1e12).astype(int).tolist(),
                               hist.counts.tolist()))
    outputs = [curve, hist_path]
    if args.multimode:
        period = comb_period_estimate(hist, 1.0 / model.round_trip_time_s)
        summary = (f"multimode comb, period {period*1e9:.3f} ns, "
                   f"{int(hist.counts.sum())} coincidences")
        extra = {"multimode": True, "comb_period_s": period}
    else:
        fit = fit_envelope(hist)
        fit_doc = {
            "gamma_s_rad_per_s": fit.gamma_s, "gamma_i_rad_per_s": fit.gamma_i,
            "gamma_s_mhz": fit.gamma_s / (2 * math.pi) / 1e6,
            "gamma_i_mhz": fit.gamma_i / (2 * math.pi) / 1e6,
            "peak": fit.peak, "background": fit.background,
            "photon_fwhm_hz": fit.photon_fwhm_hz,
            "errors": {k: float(v) for k, v in fit.errors.items()},
            "degenerate": fit.degenerate,
        }
        fit_path = out / "fit.toml"
        _toml_out.dump(fit_doc, fit_path)
        outputs.append(fit_path)
        summary = (f"fit gamma_s/2pi {fit.gamma_s/2/math.pi/1e6:.2f} MHz, "
                   f"gamma_i/2pi {fit.gamma_i/2/math.pi/1e6:.2f} MHz, "
                   f"photon FWHM {fit.photon_fwhm_hz/1e6:.2f} MHz")
        extra = {"multimode": False}
    return _finish(args, "g2", bundle, outputs, summary, extra)


def cmd_events(args, bundle: RunBundle):
    out = _out_dir(args, "events")
    cor = bundle.correlation
    model = _g2_model(bundle, args.multimode)
    stream = simulate_events(model, cor.duration_s, cor.pair_rate_hz, bundle.seed)
    path = _write_csv(out / "events.csv", ["channel", "timestamp_ps"],
                      stream.merged())
    summary = (f"{len(stream.signal_ps)} signal + {len(stream.idler_ps)} idler "
               f"events over {cor.duration_s:g} s (seed {bundle.seed})")
    return _finish(args, "events", bundle, [path], summary,
                   {"multimode": bool(args.multimode)})


def _read_events(path) -> DetectionEventStream:
    sig, idl = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            (sig if row["channel"] == "s" else idl).append(int(row["timestamp_ps"]))
    sig = np.sort(np.asarray(sig, dtype=np.int64))
    idl = np.sort(np.asarray(idl, dtype=np.int64))
    dur = float(max(sig[-1] if len(sig) else 0, idl[-1] if len(idl) else 0)) * 1e-12
    return DetectionEventStream(signal_ps=sig, idler_ps=idl, duration_s=dur)


def cmd_fit(args, bundle: RunBundle):
    out = _out_dir(args, "fit")
    cor = bundle.correlation
    stream = _read_events(args.events)
    hist = bin_coincidences(stream, cor.bin_width_s, cor.window_s)
    hist_path = _write_csv(out / "histogram.csv", ["tau_ps", "count"],
                           zip(np.rint(hist.tau_edges_s * 1e12).astype(int).tolist(),
                               hist.counts.tolist()))
    fit = fit_envelope(hist)
    doc = {
        "gamma_s_mhz": fit.gamma_s / (2 * math.pi) / 1e6,
        "gamma_i_mhz": fit.gamma_i / (2 * math.pi) / 1e6,
        "peak": fit.peak, "background": fit.background,
        "photon_fwhm_hz": fit.photon_fwhm_hz,
        "errors": {k: float(v) for k, v in fit.errors.items()},
        "degenerate": fit.degenerate,
    }
    fit_path = out / "fit.toml"
    _toml_out.dump(doc, fit_path)
    summary = (f"gamma_s/2pi {fit.gamma_s/2/math.pi/1e6:.2f} MHz, gamma_i/2pi "
               f"{fit.gamma_i/2/math.pi/1e6:.2f} MHz from {args.events}")
    return _finish(args, "fit", bundle, [hist_path, fit_path], summary,
                   {"events": str(args.events)})


def cmd_plan(args, bundle: RunBundle):
    out = _out_dir(args, "plan")
    target_signal = (bundle.source.signal_anchor_hz if args.target_signal_hz is None
                     else float(args.target_signal_hz))
    delta_nu = (bundle.source.tuning_offset_hz if args.delta_nu_mhz is None
                else float(args.delta_nu_mhz) * 1e6)
    features = d1_reference_features(bundle.rb_data)
    plan = solve_plan(target_signal, target_signal + delta_nu, features,
                      bundle.plan_constraints)
    dt, residual = delta_nu_to_tuning_temperature(
        plan.delta_nu, bundle.source.cavity, bundle.tuning_region,
        nu_idler_hz=plan.nu_idler)
    doc = {
        "reference": plan.reference_name,
        "nu_ref_hz": plan.nu_ref,
        "nu_aom1_hz": plan.nu_aom1,
        "nu_aom2_hz": plan.nu_aom2,
        "nu_laser_hz": plan.nu_laser,
        "nu_signal_hz": plan.nu_signal,
        "nu_idler_hz": plan.nu_idler,
        "nu_pump_hz": plan.nu_pump,
        "pump_offset_hz": plan.pump_offset,
        "delta_nu_hz": plan.delta_nu,
        "tuning_temperature_offset_k": dt,
        "tuning_residual_hz": residual,
        "violations": [v.constraint for v in validate_plan(plan)],
    }
    path = out / "plan.toml"
    _toml_out.dump(doc, path)
    summary = (f"lock {plan.reference_name}, AOMs {plan.nu_aom1/1e6:.2f}/"
               f"{plan.nu_aom2/1e6:.2f} MHz, pump offset {plan.pump_offset/1e6:+.1f} MHz, "
               f"tuning {dt:+.2f} K")
    return _finish(args, "plan", bundle, [path], summary,
                   {"target_signal_hz": target_signal, "delta_nu_hz": delta_nu})


def cmd_spectroscopy(args, bundle: RunBundle):
    out = _out_dir(args, "spectroscopy")
    scan = bundle.scan
    delta_nu = (250e6 if args.delta_nu_mhz is None else float(args.delta_nu_mhz) * 1e6)
    center = blocked_band_center_hz(bundle.rb_data)
    freqs = np.arange(center - scan.spectroscopy_span_hz / 2,
                      center + scan.spectroscopy_span_hz / 2 + scan.spectroscopy_step_hz / 2,
                      scan.spectroscopy_step_hz)
    rows = photon_spectroscopy([(f, delta_nu) for f in freqs], bundle.fp, bundle.cell,
                               bundle.plan_constraints.delta_nu_max_hz)
    path = _write_csv(out / "spectroscopy.csv", ["arm", "frequency_hz", "transmission"],
                      [(r.arm, r.frequency_hz, r.transmission) for r in rows])
    t_sig = [r.transmission for r in rows if r.arm == "signal"]
    t_idl = [r.transmission for r in rows if r.arm == "idler"]
    summary = (f"{len(freqs)} sweep points at {bundle.cell.temperature_c:.0f} C, "
               f"min transmission signal {min(t_sig):.2e} / idler {min(t_idl):.2e} "
               f"(delta_nu {delta_nu/1e6:+.0f} MHz)")
    return _finish(args, "spectroscopy", bundle, [path], summary,
                   {"delta_nu_hz": delta_nu})


# ---------------------------------------------------------------- wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cespdc",
        description="Cavity-enhanced SPDC source simulator and design toolkit.")
    parser.add_argument("--version", action="version", version=f"cespdc {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration file")
    common.add_argument("--preset", help="bundled preset name (e.g. paper-2020)")
    common.add_argument("--out", help="output directory (default runs/<command>)")
    common.add_argument("--seed", type=int, help="override the configured RNG seed")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("jsi", parents=[common],
                   help="joint spectral intensity slice around the anchor pair")
    sub.add_parser("clusters", parents=[common],
                   help="mode-pair enumeration and cluster report")
    sub.add_parser("dfg-scan", parents=[common],
                   help="seeded parametric-gain scan across several clusters")
    p = sub.add_parser("filter-design", parents=[common],
                       help="search spacer length and reflectivity for target purity")
    p.add_argument("--purity-target", type=float, default=0.05,
                   help="maximum unwanted-photon fraction (default 0.05)")
    p = sub.add_parser("filter-scan", parents=[common],
                       help="filter-frequency scan with vapor cell (aliasing included)")
    p.add_argument("--no-cell", action="store_true", help="remove the vapor cell")
    p = sub.add_parser("g2", parents=[common],
                       help="analytic g2 plus a simulated, binned, fitted histogram")
    p.add_argument("--multimode", action="store_true",
                   help="include the mode-beat comb instead of the filtered envelope")
    p = sub.add_parser("events", parents=[common],
                       help="simulate a time-tagged detection event stream")
    p.add_argument("--multimode", action="store_true",
                   help="sample delays from the multimode comb")
    p = sub.add_parser("fit", parents=[common],
                       help="bin an event CSV and fit the correlation envelope")
    p.add_argument("--events", required=True, help="events.csv from the events command")
    p = sub.add_parser("plan", parents=[common],
                       help="solve the lock/AOM/pump frequency chain")
    p.add_argument("--target-signal-hz", type=float,
                   help="signal target (default: configured anchor)")
    p.add_argument("--delta-nu-mhz", type=float,
                   help="idler minus signal offset in MHz (default: configured)")
    p = sub.add_parser("spectroscopy", parents=[common],
                       help="photon-pair transmission sweep across the D1 lines")
    p.add_argument("--delta-nu-mhz", type=float,
                   help="idler offset from signal in MHz (default +250)")
    return parser


HANDLERS = {
    "jsi": cmd_jsi,
    "clusters": cmd_clusters,
    "dfg-scan": cmd_dfg_scan,
    "filter-design": cmd_filter_design,
    "filter-scan": cmd_filter_scan,
    "g2": cmd_g2,
    "events": cmd_events,
    "fit": cmd_fit,
    "plan": cmd_plan,
    "spectroscopy": cmd_spectroscopy,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        bundle = load_bundle(args.config, args.preset, args.seed)
    except ConfigError as exc:
        print(f"cespdc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return HANDLERS[args.command](args, bundle)
    except (PlanInfeasibleError, DesignInfeasibleError) as exc:
        print(f"cespdc: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (FitError, CavityError, ValueError, OSError) as exc:
        print(f"cespdc: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    raise SystemExit(main())
