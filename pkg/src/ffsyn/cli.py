"""Command-line surface: synth, check, bode, simulate, compare, export-sdpa.

Configuration is a single YAML file; decibel bounds are converted to absolute
magnitudes at this boundary and everything downstream works with absolute
gains.  Artifacts (JSON/CSV/.dat-s) land in the --out directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import design, plantmodel, realization, sdpgate, simulate, verify
from .plantmodel import ControllerParams, SynthesisSpec, UncertainPlant
from .polyalg import polyeval

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_VIOLATIONS = 4


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    plant: UncertainPlant
    spec: SynthesisSpec
    pins: dict
    controller: ControllerParams | None  # explicit coefficients, for check/bode/simulate
    adapter: str
    eps_margin: float
    verify_samples: int
    seed: int
    grid_points: int
    reference: simulate.Reference
    duration: float
    dt: float
    settle_fraction: float
    eval_plant: tuple[np.ndarray, np.ndarray] | None


def _require(mapping: dict, key: str, section: str):
    if key not in mapping:
        raise ConfigError(f"missing config field {section}.{key}")
    return mapping[key]


def _band(raw: dict, section: str) -> realization.FrequencyBand:
    kind = _require(raw, "kind", section)
    return realization.freq_band(kind, raw.get("omega_l"), raw.get("omega_h"))


def _bound(raw: dict, stem: str, section: str) -> float:
    if f"{stem}_db" in raw:
        return float(10.0 ** (float(raw[f"{stem}_db"]) / 20.0))
    if f"{stem}_abs" in raw:
        return float(raw[f"{stem}_abs"])
    raise ConfigError(f"missing config field {section}.{stem}_db (or {stem}_abs)")


def load_config(path) -> RunConfig:
    """Parse and validate the YAML run configuration."""
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")

    praw = _require(raw, "plant", "")
    try:
        plant = UncertainPlant.from_nominal(
            _require(praw, "a", "plant"), _require(praw, "b", "plant"),
            percent=float(praw.get("deviation_percent", 0.0)),
            a_dev=praw.get("a_dev"), b_dev=praw.get("b_dev"),
        )
    except ValueError as exc:
        raise ConfigError(f"plant: {exc}") from exc

    craw = raw.get("controller", {})
    m = int(_require(craw, "order", "controller"))
    pins = {str(k): float(v) for k, v in (craw.get("pin") or {}).items()}
    controller = None
    if "x" in craw or "y" in craw:
        try:
            controller = ControllerParams(
                x=np.concatenate([[1.0], np.asarray(_require(craw, "x", "controller"), dtype=float)]),
                y=np.asarray(_require(craw, "y", "controller"), dtype=float),
                fixed_mask=pins,
            )
        except ValueError as exc:
            raise ConfigError(f"controller: {exc}") from exc
        if controller.m != m:
            raise ConfigError("controller.x/y lengths disagree with controller.order")

    sraw = _require(raw, "spec", "")
    try:
        spec = SynthesisSpec(
            rho_s=_bound(sraw, "s_bound", "spec"),
            band_s=_band(_require(sraw, "s_band", "spec"), "spec.s_band"),
            rho_t=_bound(sraw, "t_bound", "spec"),
            band_t=_band(_require(sraw, "t_band", "spec"), "spec.t_band"),
            delta_s=float(sraw.get("delta_s", 0.5)),
            delta_t=float(sraw.get("delta_t", 0.5)),
            d_c=np.asarray(_require(sraw, "d_c", "spec"), dtype=float),
            m=m,
        )
    except ValueError as exc:
        raise ConfigError(f"spec: {exc}") from exc
    if spec.d_c.size != m + plant.n + 1:
        raise ConfigError(f"spec.d_c must have degree {m + plant.n}")

    solver = raw.get("solver", {})
    vraw = raw.get("verify", {})
    simraw = raw.get("simulate", {})
    ref_raw = simraw.get("reference", {})
    reference = simulate.Reference(
        kind=str(ref_raw.get("kind", "sin")),
        amplitude=float(ref_raw.get("amplitude", 1.0)),
        omega=float(ref_raw.get("omega", 0.05)),
    )
    duration = simraw.get("duration")
    if duration is None:
        periods = float(simraw.get("periods", 10.0))
        duration = periods * 2.0 * np.pi / reference.omega if reference.kind == "sin" else periods
    eval_plant = None
    if "eval_plant" in simraw:
        ep = simraw["eval_plant"]
        a = np.concatenate([[1.0], np.asarray(_require(ep, "a", "simulate.eval_plant"), dtype=float)])
        b = np.concatenate([[0.0], np.asarray(_require(ep, "b", "simulate.eval_plant"), dtype=float)])
        if a.size != plant.n + 1:
            raise ConfigError("simulate.eval_plant.a must list n coefficients")
        eval_plant = (a, b)

    return RunConfig(
        plant=plant,
        spec=spec,
        pins=pins,
        controller=controller,
        adapter=os.environ.get("FFSYN_SOLVER", str(solver.get("adapter", "CLARABEL"))),
        eps_margin=float(solver.get("eps_margin", 1e-7)),
        verify_samples=int(vraw.get("samples", 200)),
        seed=int(vraw.get("seed", 1234)),
        grid_points=int(vraw.get("grid_points", 200)),
        reference=reference,
        duration=float(duration),
        dt=float(simraw.get("dt", 1e-3)),
        settle_fraction=float(simraw.get("settle_fraction", 0.2)),
        eval_plant=eval_plant,
    )


def _adapter(cfg: RunConfig):
    return sdpgate.CvxpyAdapter(solver=cfg.adapter)


def _controller_json(k: ControllerParams) -> dict:
    return {"m": k.m, "x": k.x.tolist(), "y": k.y.tolist(), "pins": dict(k.fixed_mask)}


def _load_controller(path) -> ControllerParams:
    with open(path) as fh:
        raw = json.load(fh)
    return ControllerParams(x=np.asarray(raw["x"], dtype=float),
                            y=np.asarray(raw["y"], dtype=float),
                            fixed_mask=raw.get("pins", {}))


def _pick_controller(cfg: RunConfig, args) -> ControllerParams:
    if getattr(args, "controller", None):
        return _load_controller(args.controller)
    if cfg.controller is not None:
        return cfg.controller
    raise ConfigError("no controller: pass --controller FILE or set controller.x/y in the config")


def _eval_sample(cfg: RunConfig) -> tuple[np.ndarray, np.ndarray]:
    if cfg.eval_plant is not None:
        return cfg.eval_plant
    return cfg.plant.a_center.copy(), cfg.plant.b_center.copy()


def _run_verify(cfg: RunConfig, controller: ControllerParams, collect=False):
    samples = verify.sample_uncertainty(cfg.verify_samples, cfg.seed, cfg.plant)
    return verify.verify_specs(cfg.plant, controller, cfg.spec, samples=samples,
                               grid_points=cfg.grid_points, collect_curves=collect)


def cmd_synth(cfg: RunConfig, args, out: Path) -> int:
    outcome = design.synthesize(cfg.plant, cfg.spec, pins=cfg.pins, mode=args.mode,
                                adapter=_adapter(cfg), eps_margin=cfg.eps_margin)
    res = outcome.result
    cert = {
        "mode": args.mode,
        "status": res.status,
        "solver": res.solver,
        "wall_time_s": res.wall_time,
        "lmi_count": outcome.problem.n_lmis,
        "max_residual": None if not res.residuals else max(res.residuals.values()),
        "residuals": res.residuals,
    }
    (out / "certificate.json").write_text(json.dumps(cert, indent=2) + "\n")
    if not outcome.feasible:
        print(f"synthesis {res.status} ({res.solver})")
        return EXIT_INFEASIBLE
    (out / "controller.json").write_text(
        json.dumps(_controller_json(outcome.controller), indent=2) + "\n")
    print(f"synthesis feasible: x={np.round(outcome.controller.x, 6).tolist()} "
          f"y={np.round(outcome.controller.y, 6).tolist()}")
    print(f"artifacts: {out / 'controller.json'}, {out / 'certificate.json'}")
    return EXIT_OK


def cmd_check(cfg: RunConfig, args, out: Path) -> int:
    controller = _pick_controller(cfg, args)
    report, curves = _run_verify(cfg, controller, collect=True)
    report.to_json(out / "report.json")
    verify.write_gains_csv(out / "gains.csv", curves)
    print(f"checked {report.n_samples} samples: "
          f"stable {report.stable_fraction:.1%}, {len(report.gain_violations)} gain violations")
    print(f"worst |S| {report.worst_S_gain:.4f} @ {report.worst_S_omega:.4g} rad/s; "
          f"worst |T| {report.worst_T_gain:.4f} @ {report.worst_T_omega:.4g} rad/s")
    return EXIT_OK if report.clean else EXIT_VIOLATIONS


def cmd_bode(cfg: RunConfig, args, out: Path) -> int:
    controller = _pick_controller(cfg, args)
    a, b = _eval_sample(cfg)
    den = plantmodel.closed_loop_charpoly(a, b, controller)
    systems = {
        "plant": (b, a),
        "controller": (controller.y, controller.x),
        "openloop": (np.convolve(b, controller.y), np.convolve(a, controller.x)),
        "S": (np.convolve(a, controller.x), den),
        "T": (np.convolve(b, controller.y), den),
    }
    omegas = np.geomspace(args.omega_min, args.omega_max, args.points)
    rows = [omegas]
    header = ["omega_rad_s"]
    for name, (num, denom) in systems.items():
        vals = polyeval(num, 1j * omegas) / polyeval(denom, 1j * omegas)
        mag = np.abs(vals)
        rows += [mag, 20 * np.log10(np.maximum(mag, 1e-300)), np.angle(vals, deg=True)]
        header += [f"{name}_mag", f"{name}_db", f"{name}_phase_deg"]
    data = np.column_stack(rows)
    with open(out / "bode.csv", "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in data:
            fh.write(",".join(f"{v:.10g}" for v in row) + "\n")
    print(f"bode data for {', '.join(systems)} -> {out / 'bode.csv'}")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, args, out: Path) -> int:
    controller = _pick_controller(cfg, args)
    result = simulate.simulate_tracking(_eval_sample(cfg), controller,
                                        cfg.reference, cfg.duration, cfg.dt)
    rmse, maxae = simulate.metrics(result, cfg.settle_fraction)
    result.to_csv(out / "timeseries.csv")
    (out / "sim_metrics.json").write_text(json.dumps({
        "rmse": rmse, "max_abs_error": maxae, "stable": result.stable,
        "dt": cfg.dt, "duration": cfg.duration,
        "settle_fraction": cfg.settle_fraction,
    }, indent=2) + "\n")
    print(f"simulated {cfg.duration:.4g} s: rmse={rmse:.4g} maxae={maxae:.4g}")
    return EXIT_OK


def cmd_compare(cfg: RunConfig, args, out: Path) -> int:
    rows = []
    eval_sample = _eval_sample(cfg)
    vertex_list = verify.vertices(cfg.plant)
    for mode in design.MODES:
        t0 = time.perf_counter()
        outcome = design.synthesize(cfg.plant, cfg.spec, pins=cfg.pins, mode=mode,
                                    adapter=_adapter(cfg), eps_margin=cfg.eps_margin)
        solve_time = time.perf_counter() - t0
        row = {
            "method": mode,
            "lmi_count": outcome.problem.n_lmis,
            "status": outcome.result.status,
            "solve_time_s": solve_time,
        }
        if outcome.feasible:
            k = outcome.controller
            row["x"] = k.x.tolist()
            row["y"] = k.y.tolist()
            stable = 0
            for v in vertex_list:
                a, b = plantmodel.instantiate(cfg.plant, v)
                ok, _ = verify.check_stability(plantmodel.closed_loop_charpoly(a, b, k))
                stable += ok
            row["vertices_stable"] = f"{stable}/{len(vertex_list)}"
            sim = simulate.simulate_tracking(eval_sample, k, cfg.reference,
                                             cfg.duration, cfg.dt)
            rmse, maxae = simulate.metrics(sim, cfg.settle_fraction)
            row["rmse"] = rmse
            row["maxae"] = maxae
        rows.append(row)
    (out / "compare.json").write_text(json.dumps(rows, indent=2) + "\n")
    print(f"{'method':<10} {'LMIs':>5} {'status':<11} {'time(s)':>8} "
          f"{'rmse':>10} {'maxae':>10} {'vertices':>10}")
    for row in rows:
        print(f"{row['method']:<10} {row['lmi_count']:>5} {row['status']:<11} "
              f"{row['solve_time_s']:>8.2f} "
              f"{row.get('rmse', float('nan')):>10.4g} {row.get('maxae', float('nan')):>10.4g} "
              f"{row.get('vertices_stable', '-'):>10}")
    all_ok = all(r["status"] == "feasible" for r in rows)
    return EXIT_OK if all_ok else EXIT_INFEASIBLE


def cmd_export_sdpa(cfg: RunConfig, args, out: Path) -> int:
    problem = design.build_synthesis_problem(cfg.plant, cfg.spec, pins=cfg.pins,
                                             mode=args.mode, eps_margin=cfg.eps_margin)
    path = Path(args.output) if args.output else out / f"problem_{args.mode}.dat-s"
    path.write_text(sdpgate.to_sdpa(problem))
    print(f"wrote {problem.n_lmis} LMIs + {len(problem.positivity)} positivity blocks -> {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ffsyn",
                                description="Fixed-order robust controller synthesis "
                                            "via finite-frequency LMIs")
    p.add_argument("--config", "-c", required=True, help="YAML run configuration")
    p.add_argument("--out", "-o", default="out", help="artifact directory")
    p.add_argument("--seed", type=int, help="override verify.seed")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="solve the design LMIs and extract a controller")
    sp.add_argument("--mode", choices=design.MODES, default="proposed")

    cp = sub.add_parser("check", help="verify the spec on Monte-Carlo samples and vertices")
    cp.add_argument("--controller", help="controller JSON (defaults to config coefficients)")

    bp = sub.add_parser("bode", help="emit frequency-response CSV data")
    bp.add_argument("--controller")
    bp.add_argument("--omega-min", type=float, default=1e-3)
    bp.add_argument("--omega-max", type=float, default=1e3)
    bp.add_argument("--points", type=int, default=400)

    mp = sub.add_parser("simulate", help="closed-loop tracking simulation")
    mp.add_argument("--controller")

    sub.add_parser("compare", help="proposed vs vertex baseline vs nominal-only")

    ep = sub.add_parser("export-sdpa", help="write the problem in SDPA sparse format")
    ep.add_argument("--mode", choices=design.MODES, default="proposed")
    ep.add_argument("--output", help="target .dat-s path")
    return p


COMMANDS = {
    "synth": cmd_synth,
    "check": cmd_check,
    "bode": cmd_bode,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "export-sdpa": cmd_export_sdpa,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except (ConfigError, FileNotFoundError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg.seed = args.seed
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return COMMANDS[args.command](cfg, args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
