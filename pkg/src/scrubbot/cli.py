"""Command line entry point: ``scrubbot <subcommand> [options]``.

Every CSV starts with ``#`` comment lines holding the resolved settings, so
outputs are reproducible and contain no timestamps.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import brush as br
from . import clean as cl
from . import control as ct
from . import dataset as ds
from . import fixtures as fx
from . import ik_net as nn
from . import plant as pl
from .svg import line_plot

log = logging.getLogger("scrubbot")

DEFAULT_CIRCLE_Z = -705.0


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.10g}"


def write_csv(path, header, rows, meta: dict) -> None:
    lines = [f"# scrubbot {__version__}"]
    lines += [f"# {k}={v}" for k, v in meta.items()]
    lines.append(",".join(header))
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# output locations and verbosity do not change results, so they stay out of headers
_NOT_META = ("func", "out", "svg", "history", "baseline_out", "verbose")


def _meta(args, skip=_NOT_META) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _plant(args) -> pl.PlantConfig:
    return pl.PlantConfig.from_file(args.plant) if args.plant else pl.PlantConfig()


# --- subcommands ---------------------------------------------------------------

def cmd_brush(args) -> None:
    spec = br.BrushSpec(args.mu, args.ro, args.ri)
    n = int(round((args.fmax - args.fmin) / args.step)) + 1
    forces = np.linspace(args.fmin, args.fmax, n)
    fit = br.BacklashFit(args.k, args.delta)
    rows = br.force_sweep(spec, forces, fit)
    write_csv(args.out, ("force_N", "moment_uni_Nmm", "moment_cr_Nmm", "moment_backlash_Nmm"),
              rows, _meta(args))
    if args.svg:
        cols = list(zip(*rows))
        Path(args.svg).write_text(line_plot(
            [("unidirectional", cols[0], cols[1]), ("counter-rotating", cols[0], cols[2]),
             ("backlash model", cols[0], cols[3])],
            "Brush reaction moment", "normal force (N)", "moment (N mm)"))


def _dataset_spec(args, levels=None) -> ds.DatasetSpec:
    levels = levels or ds.even_levels(args.levels)
    return ds.DatasetSpec(weight_levels=levels, samples_per_level=args.per_level,
                          seed=args.seed, noise_sigma=args.noise)


def cmd_dataset(args) -> None:
    levels = (ds.DEFAULT_RANGE.f_g_min,) if args.single_level else None
    data = ds.generate(_dataset_spec(args, levels), _plant(args))
    ds.save(data, args.out, meta={"version": __version__, **_meta(args)})
    log.info("wrote %d samples to %s", len(data), args.out)


def _train_config(args) -> nn.TrainConfig:
    return nn.TrainConfig(hidden_width=args.hidden, epochs=args.epochs, seed=args.seed,
                          batch_size=args.batch_size, learning_rate=args.lr,
                          lr_decay_gamma=args.gamma)


def train_on(data: ds.Dataset, cfg: nn.TrainConfig, split_seed: int, val_fraction: float = 0.2):
    train_set, val_set = ds.split(data, 1.0 - val_fraction, split_seed)
    return nn.train(train_set.inputs, train_set.q, val_set.inputs, val_set.q, cfg,
                    progress=lambda e, a, b: log.info("epoch %2d  train %.4e  val %.4e", e, a, b))


def cmd_train(args) -> None:
    data = ds.load(args.data)
    t0 = time.perf_counter()
    params, hist = train_on(data, _train_config(args), args.seed, args.val_fraction)
    log.info("trained in %.1f s", time.perf_counter() - t0)
    nn.save_model(params, args.out, meta={"version": __version__, **_meta(args)})
    if args.history:
        write_csv(args.history, ("epoch", "lr", "train_loss", "val_loss"),
                  [(e, lr, a, b) for e, (lr, a, b) in
                   enumerate(zip(hist.learning_rate, hist.train_loss, hist.val_loss))],
                  _meta(args))


def _circle(args) -> ct.Trajectory:
    center = pl.Pose([args.center_x, args.center_y, args.center_z], ct.TOOL_DOWN)
    return ct.circle_trajectory(center, args.diameter, args.waypoints, dwell=args.dwell)


def _write_tracking(path, report: ct.TrackingReport, meta) -> None:
    write_csv(path, ct.TrackingReport.CSV_HEADER, report.rows(), meta)


def cmd_track(args) -> None:
    plant = _plant(args)
    traj = _circle(args)
    reports = {"model": ct.track_and_evaluate(traj, nn.load_model(args.model), plant,
                                              args.f_gravity, args.extra_load, args.seed)}
    _write_tracking(args.out, reports["model"], _meta(args))
    if args.baseline:
        reports["baseline"] = ct.track_and_evaluate(traj, nn.load_model(args.baseline), plant,
                                                    args.f_gravity, args.extra_load, args.seed)
        if args.baseline_out:
            _write_tracking(args.baseline_out, reports["baseline"], _meta(args))
    for name, rep in reports.items():
        print(f"{name}: mean {rep.mean_mm:.2f} mm ({rep.mean_pct_length:.2f} %L), "
              f"max {rep.max_mm:.2f} mm, mean {rep.mean_deg:.2f} deg", file=sys.stderr)
    if args.svg:
        series = [("target", traj.positions[:, 0], traj.positions[:, 1])]
        series += [(name, rep.achieved[:, 0], rep.achieved[:, 1]) for name, rep in reports.items()]
        Path(args.svg).write_text(line_plot(series, "Circle tracking (top view)", "x (mm)", "y (mm)"))


def cmd_force(args) -> None:
    plant = _plant(args)
    report = ct.force_ramp_eval(nn.load_model(args.model), plant, args.f_gravity,
                                (args.fmin, args.fmax), args.steps, args.delta_r,
                                args.surface_z, args.seed)
    write_csv(args.out, ct.ForceRampReport.CSV_HEADER, report.rows(), _meta(args))
    if args.svg:
        series = [(f"dr={s.delta_r:g} mm", s.targets, s.measured) for s in report.sweeps]
        series.append(("ideal", report.sweeps[0].targets, report.sweeps[0].targets))
        Path(args.svg).write_text(line_plot(series, "Open-loop force ramp", "target (N)",
                                            "measured (N)", markers=True))


def cmd_clean(args) -> None:
    before = cl.read_pixmap(args.before)
    after = cl.read_pixmap(args.after)
    res = cl.measure_cleaning(before, after, args.surface)
    print(f"surface={res.surface} before_px={res.before_px} after_px={res.after_px} "
          f"cleaned_pct={res.percent:.2f}")
    if args.mask_dir:
        out = Path(args.mask_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name in ("before_mask", "after_mask", "before_roi", "after_roi"):
            cl.write_pixmap(out / f"{args.surface}_{name}.pgm", getattr(res, name))


def cmd_report(args) -> None:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    plant = _plant(args)
    meta = {"version": __version__, **_meta(args)}
    summary = []
    t_start = time.perf_counter()

    # brush
    spec = br.BrushSpec(br.MEASURED_MU, br.BRUSH_R_OUTER, br.BRUSH_R_INNER)
    rows = br.force_sweep(spec, np.linspace(0, 11, 23))
    write_csv(out / "brush.csv", ("force_N", "moment_uni_Nmm", "moment_cr_Nmm", "moment_backlash_Nmm"),
              rows, meta)
    reduction = br.average_reduction(np.linspace(4, 11, 71))
    summary += [
        ("brush", "zero-moment radius ratio", br.zero_moment_ratio(), "~0.79"),
        ("brush", "linearised counter slope (N mm/N)",
         br.linear_slope_counter(br.MEASURED_MU, br.BRUSH_R_INNER, br.BRUSH_R_OUTER), "9.34"),
        ("brush", "integral counter slope (N mm/N)",
         br.slope_counter_rotating(br.MEASURED_MU, br.BRUSH_R_INNER, br.BRUSH_R_OUTER), "n/a"),
        ("brush", "mean moment reduction 4-11 N (%)", 100 * reduction, "85"),
    ]

    # data + training
    dspec = ds.DatasetSpec(samples_per_level=args.per_level, seed=args.seed)
    data = ds.generate(dspec, plant)
    ds.save(data, out / "dataset.csv", meta)
    base_spec = ds.DatasetSpec(weight_levels=(ds.DEFAULT_RANGE.f_g_min,),
                               samples_per_level=args.per_level * len(dspec.weight_levels),
                               seed=args.seed + 1)
    base_data = ds.generate(base_spec, plant)
    ds.save(base_data, out / "dataset_baseline.csv", meta)
    cfg = nn.TrainConfig(hidden_width=args.hidden, epochs=args.epochs, seed=args.seed)
    t0 = time.perf_counter()
    model, hist = train_on(data, cfg, args.seed)
    train_time = time.perf_counter() - t0
    baseline, _ = train_on(base_data, cfg, args.seed)
    nn.save_model(model, out / "model.txt", meta)
    nn.save_model(baseline, out / "model_baseline.txt", meta)
    write_csv(out / "training.csv", ("epoch", "lr", "train_loss", "val_loss"),
              [(e, lr, a, b) for e, (lr, a, b) in
               enumerate(zip(hist.learning_rate, hist.train_loss, hist.val_loss))], meta)
    summary += [("learning", "samples (per level)", len(data), f"10000 ({args.per_level})"),
                ("learning", "training time (s)", train_time, "42.1 on GPU"),
                ("learning", "final val loss (normalised)", hist.val_loss[-1], "n/a")]

    # tracking
    traj = ct.circle_trajectory(pl.Pose([0.0, 0.0, DEFAULT_CIRCLE_Z], ct.TOOL_DOWN), 150.0, 100)
    t0 = time.perf_counter()
    aware = ct.track_and_evaluate(traj, model, plant, ds.DEFAULT_RANGE.f_g_min, 3.4)
    per_wp_ms = 1000 * (time.perf_counter() - t0) / len(traj)
    naive = ct.track_and_evaluate(traj, baseline, plant, ds.DEFAULT_RANGE.f_g_min, 3.4)
    _write_tracking(out / "track.csv", aware, meta)
    _write_tracking(out / "track_baseline.csv", naive, meta)
    ref = ct.HARDWARE_TRACKING_REFERENCE
    summary += [
        ("tracking", "load-aware mean error (mm)", aware.mean_mm, ref["aware_mm"]),
        ("tracking", "load-aware mean error (%L)", aware.mean_pct_length, 0.98),
        ("tracking", "load-aware mean orientation error (deg)", aware.mean_deg, ref["aware_deg"]),
        ("tracking", "baseline mean error (mm)", naive.mean_mm, ref["baseline_mm"]),
        ("tracking", "baseline mean orientation error (deg)", naive.mean_deg, ref["baseline_deg"]),
        ("tracking", "aware / baseline error ratio", aware.mean_mm / naive.mean_mm, "0.45"),
        ("tracking", "plan+evaluate time per waypoint (ms)", per_wp_ms, "1.33 (inference only)"),
    ]

    # force
    force = ct.force_ramp_eval(model, plant)
    write_csv(out / "force.csv", ct.ForceRampReport.CSV_HEADER, force.rows(), meta)
    for s in force.sweeps:
        hw = ct.HARDWARE_FORCE_REFERENCE[s.delta_r]
        summary.append(("force", f"dr={s.delta_r:g} mm gain error (%)", s.gain_error_percent,
                        hw["gain_error_pct"]))
        summary.append(("force", f"dr={s.delta_r:g} mm R2", s.fit.r_squared, hw["r_squared"]))

    # cleaning on bundled fixtures
    clean_rows = []
    truth = fx.load_truth()
    for surface in cl.SURFACES:
        res = cl.measure_cleaning(fx.load_fixture(f"{surface}_before"),
                                  fx.load_fixture(f"{surface}_after"), surface)
        expected = cl.cleaned_percent(truth[f"{surface}_before"], truth[f"{surface}_after"])
        clean_rows.append((surface, res.before_px, res.after_px, res.percent, expected))
        summary.append(("cleaning", f"{surface} fixture cleaned (%)", res.percent, f"{expected:.2f} (truth)"))
    for (surface, method), (b, a, printed) in cl.REPORTED_COUNTS.items():
        summary.append(("cleaning", f"reported counts {surface}/{method} cleaned (%)",
                        cl.cleaned_percent(b, a), printed))
    _write_clean(out, clean_rows, meta)

    summary.append(("report", "total runtime (s)", time.perf_counter() - t_start, "n/a"))
    _write_summary(out / "summary.csv", summary, meta)
    width = max(len(r[1]) for r in summary)
    print(f"{'section':<9} {'quantity':<{width}} {'this run':>12}  reference")
    for section, name, value, reference in summary:
        print(f"{section:<9} {name:<{width}} {_fmt(value) if not isinstance(value, str) else value:>12}  {reference}")


def _write_clean(out, rows, meta) -> None:
    lines = [f"# scrubbot {__version__}"] + [f"# {k}={v}" for k, v in meta.items()]
    lines.append("surface,before_px,after_px,cleaned_pct,truth_pct")
    lines += [f"{s},{b},{a},{_fmt(p)},{_fmt(t)}" for s, b, a, p, t in rows]
    (out / "clean.csv").write_text("\n".join(lines) + "\n")


def _write_summary(path, rows, meta) -> None:
    lines = [f"# scrubbot {__version__}"] + [f"# {k}={v}" for k, v in meta.items()]
    lines.append("section,quantity,value,reference")
    for section, name, value, ref in rows:
        value = value if isinstance(value, str) else _fmt(value)
        lines.append(f"{section},{name},{value},{ref}")
    Path(path).write_text("\n".join(lines) + "\n")


# --- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scrubbot", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"scrubbot {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("brush", help="moment vs normal force sweep")
    b.add_argument("--mu", type=float, default=br.MEASURED_MU)
    b.add_argument("--ro", type=float, default=br.BRUSH_R_OUTER, help="outer radius, mm")
    b.add_argument("--ri", type=float, default=br.BRUSH_R_INNER, help="inner radius, mm")
    b.add_argument("--fmin", type=float, default=0.0)
    b.add_argument("--fmax", type=float, default=11.0)
    b.add_argument("--step", type=float, default=0.5)
    b.add_argument("--k", type=float, default=br.MEASURED_BACKLASH.k, help="backlash slope, N mm/N")
    b.add_argument("--delta", type=float, default=br.MEASURED_BACKLASH.delta, help="backlash, N mm")
    b.add_argument("--out", default="-")
    b.add_argument("--svg")
    b.set_defaults(func=cmd_brush)

    d = sub.add_parser("dataset", help="generate the force-deflection corpus")
    d.add_argument("--out", required=True)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--per-level", type=int, default=2000)
    d.add_argument("--levels", type=int, default=5)
    d.add_argument("--single-level", action="store_true", help="base weight only (baseline corpus)")
    d.add_argument("--noise", type=float, default=0.0, help="tip position noise, mm")
    d.add_argument("--plant")
    d.set_defaults(func=cmd_dataset)

    t = sub.add_parser("train", help="train the inverse model")
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--hidden", type=int, default=128)
    t.add_argument("--epochs", type=int, default=50)
    t.add_argument("--seed", type=int, default=42)
    t.add_argument("--batch-size", type=int, default=16)
    t.add_argument("--lr", type=float, default=1e-3)
    t.add_argument("--gamma", type=float, default=0.9)
    t.add_argument("--val-fraction", type=float, default=0.2)
    t.add_argument("--history")
    t.set_defaults(func=cmd_train)

    k = sub.add_parser("track", help="circle tracking under an extra tip load")
    k.add_argument("--model", required=True)
    k.add_argument("--baseline")
    k.add_argument("--baseline-out")
    k.add_argument("--plant")
    k.add_argument("--f-gravity", type=float, default=ds.DEFAULT_RANGE.f_g_min)
    k.add_argument("--extra-load", type=float, default=3.4)
    k.add_argument("--diameter", type=float, default=150.0)
    k.add_argument("--waypoints", type=int, default=100)
    k.add_argument("--dwell", type=float, default=0.5)
    k.add_argument("--center-x", type=float, default=0.0)
    k.add_argument("--center-y", type=float, default=0.0)
    k.add_argument("--center-z", type=float, default=DEFAULT_CIRCLE_Z)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--out", default="-")
    k.add_argument("--svg")
    k.set_defaults(func=cmd_track)

    f = sub.add_parser("force", help="open-loop force ramp over radial offsets")
    f.add_argument("--model", required=True)
    f.add_argument("--plant")
    f.add_argument("--f-gravity", type=float, default=15.3)
    f.add_argument("--fmin", type=float, default=1.0)
    f.add_argument("--fmax", type=float, default=8.5)
    f.add_argument("--steps", type=int, default=16)
    f.add_argument("--delta-r", type=float, nargs="+", default=[0.0, 25.0, 50.0, 75.0])
    f.add_argument("--surface-z", type=float)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", default="-")
    f.add_argument("--svg")
    f.set_defaults(func=cmd_force)

    c = sub.add_parser("clean", help="cleaned percentage from before/after images")
    c.add_argument("--before", required=True)
    c.add_argument("--after", required=True)
    c.add_argument("--surface", choices=cl.SURFACES, required=True)
    c.add_argument("--mask-dir")
    c.set_defaults(func=cmd_clean)

    r = sub.add_parser("report", help="run the whole pipeline and summarise")
    r.add_argument("--out", required=True)
    r.add_argument("--seed", type=int, default=42)
    r.add_argument("--hidden", type=int, default=128)
    r.add_argument("--epochs", type=int, default=50)
    r.add_argument("--per-level", type=int, default=2000)
    r.add_argument("--plant")
    r.set_defaults(func=cmd_report)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except OSError as exc:
        print(f"scrubbot: error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError) as exc:
        print(f"scrubbot: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
