"""Command-line front end.

    spinnav <spectrum|simulate|scan|minarea|route|ghz|map> --config run.yaml --out results/

Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 infeasible route or
bracket.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import BracketError, scan_pulse_center, scaling_curve
from .basis import SystemParams, basis_state, energies, named_state
from .config import ConfigError, dump_config, load_config
from .dynamics import PropagationError, propagate, sample_times
from .navigator import (
    RouteInfeasible,
    ScheduleConflict,
    build_crossing_graph,
    ghz_schedule,
    plan_route,
    run_ghz,
    schedule_from_route,
    wide_pulse_schedule,
)
from .physmap import BecParams, IonTrapParams, bec_effective_params, ion_trap_xi
from .pulses import Pulse, Schedule, validate_schedule

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INFEASIBLE = 0, 2, 3, 4

log = logging.getLogger("spinnav")


class StudyFailed(RuntimeError):
    """Outputs were written but some points failed."""


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % x


def write_csv(path: Path, header: list[str], rows, cfg: dict) -> None:
    buf = io.StringIO()
    buf.write(f"# spinnav {__version__}\n")
    for line in dump_config(cfg).splitlines():
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue())


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Inverse of :func:`write_csv` (comment lines skipped)."""
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]]).reshape(-1, len(header))
    return header, data


def write_json(path: Path, payload: dict, cfg: dict) -> None:
    doc = {"spinnav_version": __version__, "config": cfg, **payload}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _params(cfg: dict) -> SystemParams:
    s = cfg["system"]
    return SystemParams(s["N"], s["xi"], s["A"])


def _initial(params: SystemParams, which) -> np.ndarray:
    return basis_state(params, which) if isinstance(which, int) else named_state(params, which)


def _grid(g) -> np.ndarray:
    if isinstance(g, list):
        return np.array(g, dtype=float)
    return np.linspace(g["start"], g["stop"], g["num"])


def cmd_spectrum(cfg: dict, out: Path, args) -> None:
    params = _params(cfg)
    ts = _grid(cfg["spectrum"]["t_grid"])
    es = energies(params, ts)
    graph = build_crossing_graph(params)
    fmt = cfg["output"]["format"]
    if fmt == "csv":
        header = ["t"] + [f"E_{n}" for n in range(params.dim)]
        write_csv(out / "spectrum.csv", header, np.column_stack([ts, es]), cfg)
        rows = [(e.n, e.k, e.time, e.order, e.energy, int(e.n_invariant)) for e in graph.edges]
        write_csv(out / "crossings.csv", ["n", "k", "time", "order", "energy", "n_invariant"], rows, cfg)
    else:
        write_json(out / "spectrum.json", {"t": ts.tolist(), "energies": es.tolist(), "graph": graph.to_dict()}, cfg)


def cmd_simulate(cfg: dict, out: Path, args) -> None:
    params = _params(cfg)
    schedule = Schedule.from_dict(cfg["schedule"])
    psi0 = _initial(params, cfg["initial_state"])
    sim = cfg["simulate"]
    times = sample_times(schedule.resolved_window(params), schedule, sim["sample_spacing"])
    result = propagate(params, schedule, psi0, sim["tol"], times=times)
    pops = result.populations
    norms = pops.sum(axis=1)
    header = ["t"] + [f"P_{n}" for n in range(params.dim)] + ["norm"]
    write_csv(out / "simulate.csv", header, np.column_stack([result.times, pops, norms]), cfg)
    report = validate_schedule(schedule, params)
    summary = {
        "final_amplitudes": [[float(a.real), float(a.imag)] for a in result.final_state],
        "final_populations": result.final_populations.tolist(),
        "norm_drift": result.norm_drift,
        "error_estimate": result.error_estimate,
        "nfev": result.nfev,
        "schedule_report": report.to_dict(),
    }
    write_json(out / "simulate.json", summary, cfg)


def cmd_scan(cfg: dict, out: Path, args) -> None:
    params = _params(cfg)
    sc = cfg["scan"]
    pulse = Pulse.from_dict(sc["pulse"])
    grid = _grid(sc["t0_grid"])
    psi0 = _initial(params, sc["initial_state"])
    result = scan_pulse_center(params, pulse, grid, psi0, cfg["simulate"]["tol"], workers=args.threads)
    header = ["T0"] + [f"P_{n}" for n in range(params.dim)]
    rows = np.column_stack([result.values, result.populations])
    if cfg["output"]["format"] == "csv":
        write_csv(out / "scan.csv", header, rows, cfg)
    else:
        write_json(out / "scan.json", {"T0": grid.tolist(), "populations": result.populations.tolist(),
                                       "errors": result.errors}, cfg)
    if result.errors:
        raise StudyFailed(f"{len(result.errors)} scan points failed")


def cmd_minarea(cfg: dict, out: Path, args) -> None:
    ma = cfg["minarea"]
    curve = scaling_curve(
        ma["xi"], ma["A"], ma["N_list"], ma["width"], ma["target_efficiency"], ma["resolution"],
        ma["tol"], workers=args.threads,
    )
    rows = np.column_stack([curve.N, curve.areas, curve.omega0, curve.efficiencies])
    if cfg["output"]["format"] == "csv":
        write_csv(out / "minarea.csv", ["N", "area", "omega0", "efficiency"], rows, cfg)
    else:
        write_json(out / "minarea.json", {"N": curve.N.tolist(), "area": curve.areas.tolist(),
                                          "omega0": curve.omega0.tolist(),
                                          "efficiency": curve.efficiencies.tolist(),
                                          "diagnostics": curve.diagnostics, "errors": curve.errors}, cfg)
    if curve.errors:
        if any("target efficiency" in msg or "omega0 -> 0" in msg for _, msg in curve.errors):
            raise BracketError("; ".join(msg for _, msg in curve.errors))
        raise StudyFailed(f"{len(curve.errors)} N values failed")


def cmd_route(cfg: dict, out: Path, args) -> None:
    params = _params(cfg)
    rt = cfg["route"]
    if rt["strategy"] == "wide":
        if {rt["source"], rt["target"]} != {0, params.N} or rt["source"] != 0:
            raise RouteInfeasible("wide-pulse mode only links |0> -> |N>")
        if rt["omega0"] is None:
            raise ConfigError("route.omega0: required for the wide strategy")
        schedule = wide_pulse_schedule(params, rt["omega0"], rt["width"])
        payload = {"route": {"source": 0, "target": params.N, "mode": "wide"}}
    else:
        graph = build_crossing_graph(params)
        route = plan_route(
            graph, rt["source"], rt["target"], rt["strategy"], rt["max_order"],
            rt["require_N_invariant"], rt["width"],
        )
        schedule = schedule_from_route(route, rt["omega0"], rt["width"])
        payload = {"route": route.to_dict()}
    payload["schedule"] = schedule.to_dict()
    payload["schedule_report"] = validate_schedule(schedule, params).to_dict()
    write_json(out / "route.json", payload, cfg)
    (out / "schedule.json").write_text(json.dumps(schedule.to_dict(), indent=2, sort_keys=True) + "\n")


def cmd_ghz(cfg: dict, out: Path, args) -> None:
    params = _params(cfg)
    g = cfg["ghz"]
    schedule = ghz_schedule(params, Pulse.from_dict(g["pulse"]), g["rotation_time"])
    res = run_ghz(params, schedule, cfg["simulate"]["tol"])
    res.pop("result")
    res["schedule"] = schedule.to_dict()
    write_json(out / "ghz.json", res, cfg)


def cmd_map(cfg: dict, out: Path, args) -> None:
    mp = cfg["map"]
    if mp["platform"] == "ion_trap":
        xi = ion_trap_xi(IonTrapParams(**mp["ion_trap"]))
        extra = {"xi_sign": "negative" if xi < 0 else "positive"}
    else:
        mapping = bec_effective_params(BecParams(**mp["bec"]))
        xi = mapping.xi
        extra = {"alpha": mapping.alpha, "chirp": {"alpha": mapping.alpha, "A": mp["A"]}}
    system = {"N": mp["N"], "xi": xi, "A": mp["A"]}
    if xi > 0:
        SystemParams(**system)
    write_json(out / "map.json", {"system": system, **extra}, cfg)


COMMANDS = {
    "spectrum": cmd_spectrum,
    "simulate": cmd_simulate,
    "scan": cmd_scan,
    "minarea": cmd_minarea,
    "route": cmd_route,
    "ghz": cmd_ghz,
    "map": cmd_map,
}

REQUIRED_SECTION = {"scan": "scan", "minarea": "minarea", "route": "route", "ghz": "ghz", "map": "map"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinnav", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="YAML/JSON run configuration")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--format", choices=["csv", "json"], help="override output.format")
    parser.add_argument("--tol", type=float, help="override simulate.tol")
    parser.add_argument("--threads", type=int, help="worker processes (default $SPINNAV_THREADS or 1)")
    parser.add_argument("--seed", type=int, help="recorded only; every study is deterministic")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.threads is None:
        try:
            args.threads = int(os.environ.get("SPINNAV_THREADS", "1"))
        except ValueError:
            print("error: SPINNAV_THREADS must be an integer", file=sys.stderr)
            return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        if args.format:
            cfg["output"]["format"] = args.format
        if args.tol is not None:
            if not args.tol > 0:
                raise ConfigError("--tol: must be positive")
            cfg["simulate"]["tol"] = args.tol
        if args.seed is not None:
            cfg["seed"] = args.seed
        section = REQUIRED_SECTION.get(args.command)
        if section and section not in cfg:
            raise ConfigError(f"{section}: section required by '{args.command}'")
        if args.command != "map" and "system" not in cfg:
            raise ConfigError("system: section required")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RouteInfeasible, ScheduleConflict, BracketError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (PropagationError, StudyFailed) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, IndexError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
