"""Command-line interface.

Subcommands: run, validate, ensemble, sweep, twin, refine, report.  Every
command takes a configuration file (report takes a results directory) and
exits 0 on success, 1 when a strictly monitored invariant was breached,
2 on configuration problems, 3 on numerical divergence or a step-size
violation.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import _kernels, __version__
from .config import RunConfig, load_config
from .diagnostics import diagnostics_records
from .errors import (
    ConfigurationError,
    ContractViolationError,
    DivergenceError,
    InvariantBreachError,
    StepSizeError,
)
from .experiments import (
    ensemble_run,
    galerkin_sweep,
    refinement_study_dt,
    refinement_study_grid,
    twin_run,
)
from .coefficients import validate_coefficients
from .snapshots import snapshot_path, write_json, write_ndjson, write_snapshot
from .stepper import run


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_value("noise", "seed", args.seed)
    return cfg


def _outdir(args, cfg: RunConfig) -> Path:
    out = Path(args.output) if getattr(args, "output", None) else cfg.output_dir()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_common(out: Path, cfg: RunConfig, manifest: dict) -> None:
    (out / "config.ini").write_text(cfg.serialize())
    manifest["backend"] = _kernels.backend()
    manifest["config"] = cfg.as_dict()
    write_json(out / "manifest.json", manifest)


def _cmd_run(args) -> int:
    cfg = _load(args)
    grid = cfg.grid()
    stepper_cfg = cfg.stepper_config(grid)
    initial = cfg.initial_state(grid)
    traj = run(stepper_cfg, initial)
    out = _outdir(args, cfg)

    records = diagnostics_records(traj, stepper_cfg.coeffs)
    write_ndjson(out / "diagnostics.ndjson", records)
    for i, state in enumerate(traj.states):
        write_snapshot(snapshot_path(out, i), state)
    last = records[-1]
    manifest = {
        "kind": "run",
        "records": len(records),
        "snapshots": len(traj.states),
        "breaches": traj.breaches,
        "clipped_mass": traj.clipped_mass,
        "final": {"t": last["t"], "mass": last["mass"], "sup_c": last["sup_c"],
                  "min_n": last["min_n"]},
    }
    _write_common(out, cfg, manifest)
    drift = abs(last["mass"] - records[0]["mass"]) / max(abs(records[0]["mass"]), 1e-300)
    print(f"run finished: t = {last['t']:g}, mass drift {drift:.3e}, "
          f"{len(traj.breaches)} monitor breach(es)")
    print(f"wrote {out / 'diagnostics.ndjson'} ({len(records)} records)")
    return 0


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    coeffs = cfg.coefficients()
    report = validate_coefficients(coeffs, mode=args.mode)
    print(f"coefficient conditions, tier {report.mode}, attractant range "
          f"[0, {report.c_max:g}]:")
    for ch in report.checks:
        mark = "ok  " if ch.satisfied else "FAIL"
        print(f"  {mark} {ch.name:28s} margin {ch.margin:+.3e}  ({ch.detail})")
    print(f"entropy weights: lambda0 = {coeffs.lambda0():.6g}, "
          f"lambda1 = {coeffs.lambda1():.6g}")
    print("all conditions satisfied" if report.passed
          else "some conditions failed (see above)")
    return 0


def _cmd_ensemble(args) -> int:
    cfg = _load(args)
    params = cfg.experiment_params("ensemble")
    if args.members is not None:
        params["members"] = args.members
    if args.seed is not None:
        params["master_seed"] = args.seed
    grid = cfg.grid()
    stepper_cfg = cfg.stepper_config(grid)
    if stepper_cfg.noise is None:
        raise ConfigurationError("[noise] enabled = false: ensembles need noise")
    initial = cfg.initial_state(grid)
    out = _outdir(args, cfg)
    members_dir = out / "members"
    members_dir.mkdir(exist_ok=True)

    def writer(i, traj, k_const):
        recs = diagnostics_records(traj, stepper_cfg.coeffs, k_const)
        write_ndjson(members_dir / f"member_{i:03d}.ndjson", recs)

    result = ensemble_run(stepper_cfg, initial, params["members"],
                          params["master_seed"], on_member=writer)
    manifest = {"kind": "ensemble"}
    manifest.update(result.as_dict())
    _write_common(out, cfg, manifest)
    print(f"ensemble of {result.members}: {result.survivors} survived, "
          f"moment ratio {result.moment_ratio:.4f} (budget {result.d0:.4f})")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    params = cfg.experiment_params("sweep")
    modes = list(params["modes"])
    grid = cfg.grid()
    stepper_cfg = cfg.stepper_config(grid, modes=max(modes))
    if stepper_cfg.noise is None:
        raise ConfigurationError("[noise] enabled = false: the sweep needs noise")
    initial = cfg.initial_state(grid)
    result = galerkin_sweep(stepper_cfg, initial, modes)
    out = _outdir(args, cfg)
    manifest = {"kind": "sweep"}
    manifest.update(result.as_dict())
    _write_common(out, cfg, manifest)
    pairs = ", ".join(f"{a}->{b}: {d:.3e}" for a, b, d in
                      zip(modes, modes[1:], result.distances))
    print(f"truncation sweep ({pairs}); "
          f"{'decreasing' if result.decreasing else 'NOT decreasing'}")
    return 0


def _cmd_twin(args) -> int:
    cfg = _load(args)
    params = cfg.experiment_params("twin")
    grid = cfg.grid()
    stepper_cfg = cfg.stepper_config(grid)
    initial = cfg.initial_state(grid)
    result = twin_run(stepper_cfg, initial, delta0=params["delta0"],
                      perturb=params["perturb"],
                      snapshot_stride=params["snapshot_stride"])
    out = _outdir(args, cfg)
    manifest = {"kind": "twin"}
    manifest.update(result.as_dict())
    _write_common(out, cfg, manifest)
    rep = result.report
    print(f"twin run (delta0 = {result.delta0:g} on {result.perturbed}): "
          f"gronwall constant {rep.gronwall_constant:.4f}"
          + (" [degenerate]" if rep.degenerate else ""))
    return 0


def _cmd_refine(args) -> int:
    cfg = _load(args)
    params = cfg.experiment_params("refine")
    kind = args.kind or params["kind"]
    if args.seed is not None:
        params["master_seed"] = args.seed
    grid = cfg.grid()
    stepper_cfg = cfg.stepper_config(grid)
    initial = cfg.initial_state(grid)
    if kind == "dt":
        result = refinement_study_dt(stepper_cfg, initial, list(params["dts"]),
                                     paths=params["paths"],
                                     master_seed=params["master_seed"])
    elif kind == "grid":
        if stepper_cfg.noise is not None:
            stepper_cfg = replace(stepper_cfg, noise=None)
        result = refinement_study_grid(stepper_cfg, initial,
                                       list(params["sizes"]))
    else:
        raise ConfigurationError(f"refine kind must be dt or grid, got {kind!r}")
    out = _outdir(args, cfg)
    manifest = result.as_dict()
    manifest["axis"] = manifest.pop("kind")
    manifest["kind"] = "refine"
    _write_common(out, cfg, manifest)
    print(f"{kind} refinement: order {result.order:.3f} (R^2 {result.r_squared:.4f})"
          + (" [inconclusive fit]" if result.inconclusive else ""))
    return 0


def _cmd_report(args) -> int:
    root = Path(args.directory)
    if not root.is_dir():
        raise ConfigurationError(f"not a directory: {root}")
    import json

    rows = []
    for mf in sorted(root.rglob("manifest.json")):
        try:
            data = json.loads(mf.read_text())
        except (OSError, ValueError) as exc:
            print(f"skipping {mf}: {exc}", file=sys.stderr)
            continue
        kind = data.get("kind", "?")
        if kind == "run":
            head = (f"t = {data['final']['t']:g}, mass {data['final']['mass']:.6g}, "
                    f"{len(data.get('breaches', []))} breach(es)")
        elif kind == "ensemble":
            head = (f"{data['survivors']}/{data['members']} survived, "
                    f"moment ratio {data['moment_ratio']:.4f}")
        elif kind == "sweep":
            d = data.get("distances", [])
            head = f"last distance {d[-1]:.3e}" if d else "no distances"
        elif kind == "twin":
            head = f"gronwall constant {data.get('gronwall_constant', 0.0):.4f}"
        elif kind == "refine":
            head = f"order {data.get('order', 0.0):.3f}"
        else:
            head = ""
        rows.append({"path": str(mf.parent), "kind": kind, "summary": head})

    if not rows:
        print(f"no manifests under {root}")
        return 0
    width = max(len(r["path"]) for r in rows)
    kw = max(len(r["kind"]) for r in rows)
    for r in rows:
        print(f"{r['path']:{width}s}  {r['kind']:{kw}s}  {r['summary']}")
    write_json(root / "report.json", {"entries": rows})
    print(f"wrote {root / 'report.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ctns",
        description="Stochastic chemotaxis-fluid simulator on the 2D torus")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, config=True):
        sp = sub.add_parser(name, help=help_text)
        if config:
            sp.add_argument("config", help="configuration file (INI)")
            sp.add_argument("--seed", type=int, default=None,
                            help="override the noise / master seed")
            sp.add_argument("--output", default=None,
                            help="output directory (default from [output])")
        sp.set_defaults(handler=fn)
        return sp

    add("run", _cmd_run, "integrate one trajectory and write diagnostics")
    sp = add("validate", _cmd_validate,
             "check the structural coefficient conditions", config=True)
    sp.add_argument("--mode", choices=("H", "A"), default="H",
                    help="condition tier to check")
    sp = add("ensemble", _cmd_ensemble, "independent-path ensemble statistics")
    sp.add_argument("--members", type=int, default=None,
                    help="override the member count")
    add("sweep", _cmd_sweep, "noise-truncation comparison on one path")
    add("twin", _cmd_twin, "coupled twin run with a perturbed initial state")
    sp = add("refine", _cmd_refine, "refinement study against a reference run")
    sp.add_argument("--kind", choices=("dt", "grid"), default=None,
                    help="refine the time step or the grid")
    rp = sub.add_parser("report", help="aggregate result directories")
    rp.add_argument("directory", help="directory tree holding manifest.json files")
    rp.set_defaults(handler=_cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigurationError, ContractViolationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except InvariantBreachError as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return 1
    except (DivergenceError, StepSizeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
