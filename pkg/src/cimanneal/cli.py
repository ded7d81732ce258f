"""Command-line harness.

Single problem::

    cimanneal --solver simcim --graph G22.txt --runs 100 --out-dir out/

Benchmark suite (one problem per manifest line)::

    cimanneal --manifest suite.txt --solver simcim,nmfa --out-dir out/

Options can also come from ``--config FILE`` holding ``key = value`` lines
(keys are the long option names, e.g. ``v-start = -1.2``) or from a
``summary.json`` written by an earlier run.  Precedence: command line, then
config file, then built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import shlex
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import build_histogram
from .cim_physics import CimPhysicsParams, cim_run_batch
from .exceptions import ConfigError, DivergenceError, GSetParseError
from .graph import GraphGenSpec, generate_random, read_gset
from .nmfa import NmfaParams, nmfa_run_batch
from .simcim import PumpSchedule, SimCimParams
from .simcim import run_batch as simcim_run_batch

log = logging.getLogger("cimanneal")

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_DIVERGENCE = 4
EXIT_IO = 5
EXIT_SUITE_FAILURES = 6

SOLVERS = ("simcim", "nmfa", "cim_physics")

_simcim_defaults = SimCimParams()
_nmfa_defaults = NmfaParams()
_cim_defaults = CimPhysicsParams()

# option name -> (type, default); None default means "solver decides"
OPTIONS = {
    "solver": (str, "simcim"),
    "graph": (str, None),
    "format": (str, "gset"),
    "generate": (str, None),
    "runs": (int, 100),
    "iterations": (int, 1000),
    "seed": (int, 0),
    "zeta": (float, None),
    "zeta-auto": (bool, None),
    "noise": (float, None),
    "x-sat": (float, _simcim_defaults.x_sat),
    "beta": (float, _simcim_defaults.momentum_beta),
    "v-start": (float, _simcim_defaults.schedule.start),
    "v-end": (float, _simcim_defaults.schedule.end),
    "steepness": (float, _simcim_defaults.schedule.steepness),
    "alpha": (float, _nmfa_defaults.alpha),
    "field-start": (float, _nmfa_defaults.schedule.start),
    "field-end": (float, _nmfa_defaults.schedule.end),
    "gain": (float, _cim_defaults.w),
    "loss": (float, _cim_defaults.gamma),
    "nonlinear-loss": (float, _cim_defaults.s),
    "trace": (bool, False),
    "out-dir": (str, "."),
    "jobs": (int, 1),
    "block-size": (int, None),
    "bin-width": (float, None),
}

_SOLVER_DEFAULTS = {
    "simcim": {"zeta": _simcim_defaults.zeta, "zeta-auto": _simcim_defaults.zeta_auto, "noise": _simcim_defaults.noise_amplitude},
    "nmfa": {"zeta": _nmfa_defaults.zeta, "zeta-auto": _nmfa_defaults.zeta_auto, "noise": _nmfa_defaults.noise_amplitude},
    "cim_physics": {"zeta": _cim_defaults.zeta, "zeta-auto": _cim_defaults.zeta_auto, "noise": _cim_defaults.noise_amplitude},
}

# options echoed into summary.json for each solver
_ECHO = {
    "simcim": ["zeta", "zeta-auto", "noise", "x-sat", "beta", "v-start", "v-end", "steepness"],
    "nmfa": ["zeta", "zeta-auto", "noise", "alpha", "field-start", "field-end"],
    "cim_physics": ["zeta", "zeta-auto", "noise", "gain", "loss", "nonlinear-loss"],
}
_COMMON_ECHO = ["solver", "graph", "format", "generate", "runs", "iterations", "seed", "block-size", "bin-width"]


def _to_bool(value):
    if isinstance(value, bool):
        return value
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


def _coerce(key, value):
    if key not in OPTIONS:
        raise ConfigError(f"unknown option {key!r}")
    typ = OPTIONS[key][0]
    if value is None:
        return None
    try:
        if typ is bool:
            return _to_bool(value)
        if typ is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        return typ(value)
    except (TypeError, ValueError):
        raise ConfigError(f"option {key!r}: cannot interpret {value!r} as {typ.__name__}") from None


def _norm_key(key):
    return key.strip().replace("_", "-")


def read_config(path):
    """Parse a ``key = value`` file or an earlier ``summary.json``."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config {path}: {exc}") from None
        data = data.get("config", data)
        return {_norm_key(k): _coerce(_norm_key(k), v) for k, v in data.items() if v is not None}
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = _norm_key(key)
        out[key] = _coerce(key, value.strip())
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="cimanneal", description="Anneal Ising / max-cut instances with SimCIM, NMFA or the CIM map.")
    p.add_argument("--config", help="key = value file (or summary.json) with option defaults")
    p.add_argument("--manifest", help="benchmark manifest: one problem source per line")
    p.add_argument("--solver", help="simcim, nmfa or cim_physics (comma list allowed with --manifest)")
    p.add_argument("--graph", help="problem file")
    p.add_argument("--format", choices=["gset"])
    p.add_argument("--generate", help="random instance N,DIST,SEED with DIST gaussian[:MEAN:STD] or discrete:P")
    p.add_argument("--runs", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--zeta", type=float)
    p.add_argument("--zeta-auto", action=argparse.BooleanOptionalAction, default=None,
                   help="divide zeta by the largest eigenvalue of J")
    p.add_argument("--noise", type=float)
    p.add_argument("--x-sat", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--v-start", type=float)
    p.add_argument("--v-end", type=float)
    p.add_argument("--steepness", type=float)
    p.add_argument("--alpha", type=float, help="NMFA relaxation rate")
    p.add_argument("--field-start", type=float, help="NMFA field multiplier at the first iteration")
    p.add_argument("--field-end", type=float, help="NMFA field multiplier at the last iteration")
    p.add_argument("--gain", type=float, help="CIM parametric gain w")
    p.add_argument("--loss", type=float, help="CIM linear loss gamma")
    p.add_argument("--nonlinear-loss", type=float, help="CIM nonlinear loss s")
    p.add_argument("--trace", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--out-dir")
    p.add_argument("--jobs", type=int, help="worker threads for the batch")
    p.add_argument("--block-size", type=int, help="runs per panel (part of the reproducibility key)")
    p.add_argument("--bin-width", type=float)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def merge_options(cli, file_opts):
    """CLI values over config-file values over defaults."""
    opts = {k: v[1] for k, v in OPTIONS.items()}
    opts.update({k: v for k, v in file_opts.items() if v is not None})
    opts.update({k: v for k, v in cli.items() if v is not None})
    return opts


def parse_generate(text):
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 3:
        raise ConfigError(f"--generate expects N,DIST,SEED, got {text!r}")
    try:
        n, seed = int(parts[0]), int(parts[2])
    except ValueError:
        raise ConfigError(f"--generate: N and SEED must be integers in {text!r}") from None
    dist = parts[1].split(":")
    try:
        if dist[0] == "gaussian":
            mean = float(dist[1]) if len(dist) > 1 else 0.0
            std = float(dist[2]) if len(dist) > 2 else 1.0
            return GraphGenSpec(n=n, distribution="gaussian", mean=mean, stddev=std, seed=seed)
        if dist[0] == "discrete":
            p = float(dist[1]) if len(dist) > 1 else 1.0
            return GraphGenSpec(n=n, distribution="discrete", p=p, seed=seed)
    except ValueError as exc:
        raise ConfigError(f"--generate: {exc}") from None
    raise ConfigError(f"--generate: unknown distribution {parts[1]!r}")


@dataclass
class RunSpec:
    solver: str
    params: object
    runs: int
    out_dir: Path
    graph: Path | None = None
    generate: GraphGenSpec | None = None
    trace: bool = False
    jobs: int = 1
    block_size: int | None = None
    bin_width: float | None = None
    options: dict = field(default_factory=dict)


def solver_params(solver, opts):
    """Translate flat options into the solver's parameter object."""
    o = dict(_SOLVER_DEFAULTS[solver])
    o.update({k: v for k, v in opts.items() if v is not None})
    T = o["iterations"]
    if T < 1:
        raise ConfigError("iterations must be >= 1")
    try:
        if solver == "simcim":
            return SimCimParams(
                zeta=o["zeta"],
                noise_amplitude=o["noise"],
                x_sat=o["x-sat"],
                momentum_beta=o["beta"],
                schedule=PumpSchedule.tanh(o["v-start"], o["v-end"], o["steepness"], T),
                seed=o["seed"],
                zeta_auto=o["zeta-auto"],
            )
        if solver == "nmfa":
            return NmfaParams(
                alpha=o["alpha"],
                zeta=o["zeta"],
                noise_amplitude=o["noise"],
                schedule=PumpSchedule.linear(o["field-start"], o["field-end"], T),
                iterations=T,
                seed=o["seed"],
                zeta_auto=o["zeta-auto"],
            )
        return CimPhysicsParams(
            w=o["gain"],
            gamma=o["loss"],
            s=o["nonlinear-loss"],
            zeta=o["zeta"],
            noise_amplitude=o["noise"],
            iterations=T,
            seed=o["seed"],
            zeta_auto=o["zeta-auto"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_run_spec(opts):
    solver = opts["solver"]
    if solver not in SOLVERS:
        raise ConfigError(f"unknown solver {solver!r}; choose from {', '.join(SOLVERS)}")
    if (opts.get("graph") is None) == (opts.get("generate") is None):
        raise ConfigError("give exactly one problem source: --graph or --generate")
    if opts["runs"] < 1:
        raise ConfigError("runs must be >= 1")
    if opts["seed"] < 0:
        raise ConfigError("seed must be non-negative")
    if opts.get("block-size") is not None and opts["block-size"] < 1:
        raise ConfigError("block-size must be >= 1")
    if opts.get("bin-width") is not None and not opts["bin-width"] > 0:
        raise ConfigError("bin-width must be positive")
    graph = gen = None
    if opts.get("graph") is not None:
        graph = Path(opts["graph"])
        if not graph.is_file():
            raise ConfigError(f"graph file not found: {graph}")
    else:
        gen = parse_generate(opts["generate"])
    return RunSpec(
        solver=solver,
        params=solver_params(solver, opts),
        runs=opts["runs"],
        out_dir=Path(opts["out-dir"]),
        graph=graph,
        generate=gen,
        trace=bool(opts["trace"]),
        jobs=opts["jobs"],
        block_size=opts.get("block-size"),
        bin_width=opts.get("bin-width"),
        options=opts,
    )


def load_problem(spec):
    if spec.graph is not None:
        try:
            return read_gset(spec.graph)
        except OSError as exc:
            raise ConfigError(f"cannot read graph {spec.graph}: {exc}") from None
    try:
        return generate_random(spec.generate)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


_RUNNERS = {"simcim": simcim_run_batch, "nmfa": nmfa_run_batch, "cim_physics": cim_run_batch}


def solve(spec, problem):
    return _RUNNERS[spec.solver](
        problem, spec.params, spec.runs, block_size=spec.block_size, n_jobs=spec.jobs, trace=spec.trace
    )


def _num(x):
    x = float(x)
    if x.is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def results_csv(result):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["run_index", "seed", "cut", "energy", "wall_time_ms"])
    for k in range(result.n_runs):
        w.writerow([k, int(result.seeds[k]), _num(result.cuts[k]), _num(result.energies[k]), f"{result.wall_times_ms[k]:.3f}"])
    return buf.getvalue()


def trace_csv(trace):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iteration", "v", "eig_proximity"] + [f"x_{i}" for i in trace.indices])
    for t in range(trace.pump.size):
        prox = trace.eig_proximity[t]
        w.writerow([t, repr(float(trace.pump[t])), "" if math.isnan(prox) else repr(float(prox))]
                   + [repr(float(a)) for a in trace.amplitudes[t]])
    return buf.getvalue()


def echo_config(opts):
    keys = _COMMON_ECHO + _ECHO[opts["solver"]]
    out = {}
    for k in keys:
        v = opts.get(k)
        if v is None and k in _SOLVER_DEFAULTS[opts["solver"]]:
            v = _SOLVER_DEFAULTS[opts["solver"]][k]
        out[k] = v
    return out


def summary_dict(spec, problem, result):
    hist = build_histogram(result.cuts, spec.bin_width)
    return {
        "schema_version": SCHEMA_VERSION,
        "solver": spec.solver,
        "config": echo_config(spec.options),
        "problem": {
            "name": problem.name,
            "n": problem.n,
            "edges": problem.n_edges,
            "storage": problem.storage,
            "source": str(spec.graph) if spec.graph is not None else f"generate:{spec.options['generate']}",
        },
        "zeta_effective": result.extra.get("zeta_effective"),
        "stats": result.stats,
        "best_cut": result.best_cut,
        "best_energy": float(result.energies[result.best_index]),
        "best_run": result.best_index,
        "best_spins": "".join("+" if s > 0 else "-" for s in result.best_config),
        "histogram": hist.to_dict(),
        "mean_wall_time_ms": float(np.mean(result.wall_times_ms)),
        "total_wall_time_s": result.total_wall_time_s,
    }


def write_outputs(out_dir, files):
    """Write all ``{name: text}`` files after the computation has finished."""
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            tmp = out_dir / f".{name}.tmp"
            tmp.write_text(text)
            os.replace(tmp, out_dir / name)
    except OSError as exc:
        raise OSError(f"cannot write outputs to {out_dir}: {exc}") from exc


def execute(spec):
    """Run one problem and write results.csv, summary.json and optionally trace.csv.

    Returns ``(summary_dict, result)``.
    """
    problem = load_problem(spec)
    log.info("%s: %r, %d runs x %d iterations", spec.solver, problem, spec.runs, spec.options["iterations"])
    result, trace = solve(spec, problem)
    summary = summary_dict(spec, problem, result)
    files = {"results.csv": results_csv(result), "summary.json": json.dumps(summary, indent=2) + "\n"}
    if spec.trace and trace is not None:
        files["trace.csv"] = trace_csv(trace)
    write_outputs(spec.out_dir, files)
    return summary, result


# -- benchmark suite --------------------------------------------------------


def read_manifest(path):
    """Manifest lines: ``SOURCE [key=value ...]`` with SOURCE a graph path
    (relative to the manifest) or ``generate:N,DIST,SEED``."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from None
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = shlex.split(line)
        source, rest = tokens[0], tokens[1:]
        overrides = {}
        for tok in rest:
            if "=" not in tok:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {tok!r}")
            k, v = tok.split("=", 1)
            overrides[_norm_key(k)] = v
        name = overrides.pop("name", None)
        if source.startswith("generate:"):
            gen = source[len("generate:"):]
            entry = {"generate": gen, "graph": None}
            name = name or parse_generate(gen).label
        else:
            g = Path(source)
            if not g.is_absolute():
                g = path.parent / g
            entry = {"graph": str(g), "generate": None}
            name = name or g.stem
        solvers = overrides.pop("solver", None)
        for k in list(overrides):
            overrides[k] = _coerce(k, overrides[k])
        entries.append({"name": name, "solvers": solvers, "options": {**overrides, **entry}})
    if not entries:
        raise ConfigError(f"manifest {path} lists no problems")
    return entries


def benchmark_suite(manifest, base_opts):
    """Run every manifest problem with every requested solver.

    Returns ``(report, n_failed)``; the report is also written to
    ``report.json`` in the output directory.
    """
    entries = read_manifest(manifest)
    out_root = Path(base_opts["out-dir"])
    default_solvers = base_opts["solver"]
    report = {"schema_version": SCHEMA_VERSION, "manifest": str(manifest), "problems": [], "aggregates": {}}
    per_solver = {}
    n_failed = 0
    t0 = time.perf_counter()
    for entry in entries:
        solvers = [s.strip() for s in (entry["solvers"] or default_solvers).split(",") if s.strip()]
        rec = {"name": entry["name"], "results": {}}
        for solver in solvers:
            opts = {**base_opts, **entry["options"], "solver": solver}
            opts["out-dir"] = str(out_root / entry["name"] / solver)
            try:
                spec = build_run_spec(opts)
                summary, _ = execute(spec)
            except (ConfigError, GSetParseError, DivergenceError, OSError, ValueError) as exc:
                n_failed += 1
                rec["results"][solver] = {"error": f"{type(exc).__name__}: {exc}"}
                log.error("%s/%s failed: %s", entry["name"], solver, exc)
                continue
            rec["results"][solver] = {
                "stats": summary["stats"],
                "out_dir": opts["out-dir"],
                "total_wall_time_s": summary["total_wall_time_s"],
            }
            per_solver.setdefault(solver, []).append(summary["stats"])
        report["problems"].append(rec)
    for solver, stats in per_solver.items():
        report["aggregates"][solver] = {
            "n_problems": len(stats),
            "mean_of_mean_cuts": float(np.mean([s["mean"] for s in stats])),
            "mean_of_max_cuts": float(np.mean([s["max"] for s in stats])),
        }
    report["failed"] = n_failed
    report["total_wall_time_s"] = time.perf_counter() - t0
    write_outputs(out_root, {"report.json": json.dumps(report, indent=2) + "\n"})
    return report, n_failed


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cli = {_norm_key(k): v for k, v in vars(args).items() if k not in ("config", "manifest", "verbose")}
    try:
        file_opts = read_config(args.config) if args.config else {}
        opts = merge_options(cli, file_opts)
        if args.manifest:
            report, n_failed = benchmark_suite(args.manifest, opts)
            for solver, agg in report["aggregates"].items():
                print(f"{solver}: {agg['n_problems']} problems, mean cut {agg['mean_of_mean_cuts']:.3f}, "
                      f"mean max cut {agg['mean_of_max_cuts']:.3f}")
            return EXIT_SUITE_FAILURES if n_failed else EXIT_OK
        spec = build_run_spec(opts)
        summary, _ = execute(spec)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GSetParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DivergenceError as exc:
        print(f"solver diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    s = summary["stats"]
    print(f"{summary['problem']['name']} [{spec.solver}] runs={s['n_runs']} best={_num(s['max'])} "
          f"mean={s['mean']:.3f} std={s['std']:.3f} ({summary['total_wall_time_s']:.2f} s)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
