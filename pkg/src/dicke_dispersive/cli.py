"""Command-line front end.

Subcommands::

    dicke-dispersive simulate --preset fig2a --out runs/
    dicke-dispersive compare --J 4 --g 1 --omega0 0.01 --cycles 800 --out runs/
    dicke-dispersive scan --k 1 --g-min 0.9 --g-max 1.1 --points 21 --out runs/
    dicke-dispersive chains --J 2 --k 1
    dicke-dispersive coeffs --n 0 1 2 --m 1 --beta 1
    dicke-dispersive presets

Every data file written under ``--out`` gets a JSON manifest next to it.
Exit codes: 0 success, 2 configuration error, 3 cutoff or convergence
failure.
"""
from __future__ import annotations

import argparse
import ast
import configparser
import csv
import io
import json
import math
import operator
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import scan_resonance
from .chains import build_chain_graph, chain_partition, photon_offset
from .coefficients import coefficient_rows
from .errors import ConfigError, CutoffTooSmall, DickeError, StepTooLarge
from .hamiltonians import (
    Frame,
    ModelConfig,
    build_dicke,
    build_h2,
    build_h3,
    check_cutoff,
    effective_model,
    frame_displacement,
    required_cutoff,
)
from .hilbert import as_half_integer, as_twice, basis_state, jz_basis_state, spin_operators
from .propagate import (
    CONVERGENCE_TOL,
    StaticEvolution,
    TimeGrid,
    compose_lab_frame,
    evolve_timedep,
    inner_initial_state,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

# run contracts checked before a manifest is marked ok
NORM_DRIFT_TOL = 1e-8
EDGE_POPULATION_TOL = 1e-8
CHUNK = 1024

_RUN_KEYS = {
    "j", "g", "g2", "g2j", "omega0", "omega", "n_max", "cycles", "start_cycles",
    "samples_per_cycle", "init", "frame", "effective", "effective_kind",
}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCS = {"sqrt": math.sqrt, "exp": math.exp, "log": math.log}
_NAMES = {"pi": math.pi, "e": math.e}


def parse_number(text: str) -> float:
    """Evaluate a small arithmetic expression such as ``sqrt(3) + 0.03``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ConfigError(f"unsupported expression {text!r}")

    try:
        tree = ast.parse(str(text).strip(), mode="eval")
        value = ev(tree)
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot evaluate {text!r}: {exc}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{text!r} is not finite")
    return value


def _split(value: str) -> list[str]:
    return [v.strip() for v in str(value).split(",") if v.strip()]


def _bool(value: str) -> bool:
    v = str(value).strip().lower()
    if v in ("1", "yes", "true", "on"):
        return True
    if v in ("0", "no", "false", "off"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


def parse_init(text: str) -> tuple[str, Fraction, int]:
    """``x:m,n`` (Jx eigenstate) or ``z:m,n`` (Jz eigenstate) with photon number ``n``."""
    try:
        axis, rest = str(text).split(":", 1) if ":" in str(text) else ("x", str(text))
        m, n = rest.split(",")
        axis = axis.strip().lower()
        if axis not in ("x", "z") or int(n) < 0:
            raise ValueError
        return axis, as_half_integer(m.strip()), int(n)
    except ValueError:
        raise ConfigError(f"bad initial state {text!r}; expected x:m,n or z:m,n") from None


def load_presets() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.read_string(resources.files(__package__).joinpath("presets.ini").read_text())
    return parser


@dataclass(frozen=True)
class RunSpec:
    label: str
    cfg: ModelConfig
    cycles: float
    start_cycles: float
    samples_per_cycle: int
    init: tuple[str, Fraction, int]
    frame: Frame
    effective: bool
    effective_kind: str

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid.cycles(self.cycles, self.samples_per_cycle, self.cfg.omega, self.start_cycles)

    def echo(self) -> dict:
        out = self.cfg.as_dict()
        out.update(
            label=self.label,
            cycles=self.cycles,
            start_cycles=self.start_cycles,
            samples_per_cycle=self.samples_per_cycle,
            init=f"{self.init[0]}:{self.init[1]},{self.init[2]}",
            effective=self.effective,
            effective_kind=self.effective_kind,
        )
        return out


def _spreads(axis: str, m: Fraction) -> bool:
    # only Jx = 0 or +-1/2 initial states sit where the frame dressing is trivial
    return axis != "x" or abs(m) > Fraction(1, 2)


def _coupling(values: dict, J: Fraction) -> float:
    given = [k for k in ("g", "g2", "g2j") if values.get(k) not in (None, "")]
    if len(given) != 1:
        raise ConfigError("give exactly one of g, g2, g2J")
    key = given[0]
    x = parse_number(values[key])
    if x < 0:
        raise ConfigError(f"{key} must be non-negative")
    if key == "g":
        return x
    if key == "g2":
        return math.sqrt(x)
    return math.sqrt(x / float(J))


def expand_runs(values: dict, label: str) -> list[RunSpec]:
    """Turn one flat key/value section into runs, looping over list-valued J and omega0."""
    values = {k.lower(): v for k, v in values.items() if v is not None}
    unknown = set(values) - _RUN_KEYS
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    for key in ("j", "omega0", "cycles"):
        if key not in values:
            raise ConfigError(f"missing key {key!r}")
    try:
        j_list = [as_half_integer(v) for v in _split(values["j"])]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    w0_list = [parse_number(v) for v in _split(values["omega0"])]
    if not j_list or not w0_list:
        raise ConfigError("J and omega0 need at least one value")
    omega = parse_number(values.get("omega", "1"))
    init = parse_init(values.get("init", "x:0,0"))
    try:
        frame = Frame(values.get("frame", "lab").strip().lower())
    except ValueError:
        raise ConfigError(f"unknown frame {values.get('frame')!r}") from None
    if frame not in (Frame.LAB, Frame.H2, Frame.H3):
        raise ConfigError("frame must be lab, interaction_h2 or interaction_h3")
    runs = []
    for J in j_list:
        for w0 in w0_list:
            g = _coupling(values, J)
            axis, m, n = init
            if as_twice(m) % 2 != as_twice(J) % 2:
                # the central state is the only one with a partner of the other parity
                if abs(m) > Fraction(1, 2):
                    raise ConfigError(f"initial m={m} does not exist for J={J}")
                m = Fraction(1, 2) if as_twice(J) % 2 else Fraction(0)
            n_max_text = str(values.get("n_max", "auto")).strip().lower()
            try:
                cfg = ModelConfig(omega0=w0, g=g, J=J, n_max=max(n, 2), omega=omega, frame=frame, n_init=n)
                if n_max_text == "auto":
                    n_max = max(required_cutoff(cfg, spread_initial=_spreads(axis, m)), n + 2, 2)
                else:
                    n_max = int(n_max_text)
                cfg = cfg.replace(n_max=n_max)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            tag = label
            if len(j_list) > 1:
                tag += f"_J{str(J).replace('/', '-')}"
            if len(w0_list) > 1:
                tag += f"_w0-{w0:g}"
            try:
                runs.append(
                    RunSpec(
                        label=tag,
                        cfg=cfg,
                        cycles=parse_number(values["cycles"]),
                        start_cycles=parse_number(values.get("start_cycles", "0")),
                        samples_per_cycle=int(values.get("samples_per_cycle", 16)),
                        init=(axis, m, n),
                        frame=frame,
                        effective=_bool(values.get("effective", "no")),
                        effective_kind=values.get("effective_kind", "auto").strip().lower(),
                    )
                )
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
    return runs


_FLAG_KEYS = {
    "J": "j", "g": "g", "g2": "g2", "g2J": "g2j", "omega0": "omega0", "omega": "omega",
    "n_max": "n_max", "cycles": "cycles", "start_cycles": "start_cycles",
    "samples_per_cycle": "samples_per_cycle", "init": "init", "frame": "frame",
    "effective_kind": "effective_kind",
}


def resolve_runs(args) -> list[RunSpec]:
    """Merge preset, config file and flags (in that order of increasing priority)."""
    values: dict = {}
    label = "run"
    if args.preset:
        presets = load_presets()
        if not presets.has_section(args.preset):
            raise ConfigError(f"unknown preset {args.preset!r}; see 'presets'")
        values.update(presets[args.preset])
        label = args.preset
    if args.config:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        try:
            with open(args.config) as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read {args.config}: {exc}") from None
        section = args.section or (parser.sections()[0] if parser.sections() else "DEFAULT")
        if section != "DEFAULT" and not parser.has_section(section):
            raise ConfigError(f"no section [{section}] in {args.config}")
        values.update(parser[section])
        if section != "DEFAULT":
            label = section
    for attr, key in _FLAG_KEYS.items():
        val = getattr(args, attr, None)
        if val is not None:
            if key in ("g", "g2", "g2j"):
                for other in ("g", "g2", "g2j"):
                    values.pop(other, None)
            values[key] = str(val)
    if getattr(args, "effective", None) is not None:
        values["effective"] = "yes" if args.effective else "no"
    if args.label:
        label = args.label
    return expand_runs(values, label)


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------


def initial_state(spec: RunSpec) -> np.ndarray:
    axis, m, n = spec.init
    basis = spec.cfg.basis
    if axis == "z":
        return jz_basis_state(basis, m, n)
    return basis_state(basis, m, n)


class _Observables:
    """Chunked observables of a lab-frame trajectory."""

    def __init__(self, spec: RunSpec, psi0: np.ndarray):
        self.basis = spec.cfg.basis
        self.psi0 = psi0
        self.jz = spin_operators(spec.cfg.J).jz
        self.parts: dict[str, list[np.ndarray]] = {}
        self.norm_drift = 0.0
        self.edge_population = 0.0

    def add(self, states: np.ndarray) -> None:
        b = self.basis
        blocks = states.reshape(len(states), b.spin_dim, b.fock_dim)
        pops = np.abs(blocks) ** 2
        fock_pop = pops.sum(axis=1)
        cdf = np.cumsum(fock_pop, axis=1)
        jz_states = np.einsum("ij,tjn->tin", self.jz, blocks)
        values = {
            "P": np.abs(states @ self.psi0.conj()) ** 2,
            "photon_cdf_0": cdf[:, 0],
            "photon_cdf_1": cdf[:, min(1, b.n_max)],
            "photon_cdf_2": cdf[:, min(2, b.n_max)],
            "Jz": np.einsum("tin,tin->t", blocks.conj(), jz_states).real,
        }
        for key, val in values.items():
            self.parts.setdefault(key, []).append(np.clip(val, 0.0, 1.0) if key != "Jz" else val)
        self.norm_drift = max(self.norm_drift, float(np.max(np.abs(np.sqrt(pops.sum(axis=(1, 2))) - 1.0))))
        self.edge_population = max(self.edge_population, float(np.max(fock_pop[:, -1])))

    def columns(self, suffix: str = "") -> dict[str, np.ndarray]:
        return {k + suffix: np.concatenate(v) for k, v in self.parts.items()}


def run_exact(spec: RunSpec, psi0: np.ndarray, times: np.ndarray) -> tuple[_Observables, dict]:
    cfg = spec.cfg
    obs = _Observables(spec, psi0)
    diag: dict = {"frame": spec.frame.value}
    if spec.frame is Frame.LAB:
        evo = StaticEvolution(build_dicke(cfg))
        diag["method"] = evo.method
        for start in range(0, len(times), CHUNK):
            obs.add(evo.states(psi0, times[start : start + CHUNK]))
    else:
        hfun = build_h2(cfg) if spec.frame is Frame.H2 else build_h3(cfg)
        inner = inner_initial_state(psi0, cfg, spec.frame)
        grid = TimeGrid(float(times[0]), float(times[-1]), len(times))
        if times[0] != 0.0:
            # propagate from t=0 so the frame phases line up
            pre = evolve_timedep(hfun, inner, TimeGrid(0.0, float(times[0]), 2))
            inner = pre.states[-1] / np.linalg.norm(pre.states[-1])
        traj = evolve_timedep(hfun, inner, grid)
        diag.update(traj.diagnostics)
        d = frame_displacement(cfg)
        for start in range(0, len(times), CHUNK):
            sl = slice(start, start + CHUNK)
            obs.add(compose_lab_frame(traj.states[sl], times[sl], cfg, spec.frame, displacement=d))
    diag["norm_drift"] = max(obs.norm_drift, diag.get("norm_drift", 0.0))
    diag["edge_population"] = obs.edge_population
    return obs, diag


def run_effective(spec: RunSpec, psi0: np.ndarray, times: np.ndarray) -> tuple[_Observables, dict]:
    cfg = spec.cfg
    h_eff, frame, k = effective_model(cfg, spec.effective_kind)
    evo = StaticEvolution(h_eff)
    inner = inner_initial_state(psi0, cfg, frame)
    d = frame_displacement(cfg)
    obs = _Observables(spec, psi0)
    for start in range(0, len(times), CHUNK):
        ts = times[start : start + CHUNK]
        obs.add(compose_lab_frame(evo.states(inner, ts), ts, cfg, frame, k, displacement=d))
    return obs, {"model": frame.value, "k": k, "norm_drift": obs.norm_drift}


def _contract_failures(diag: dict) -> list[str]:
    bad = []
    if diag.get("norm_drift", 0.0) > NORM_DRIFT_TOL:
        bad.append(f"norm drift {diag['norm_drift']:.2e} > {NORM_DRIFT_TOL:g}")
    if diag.get("halving_change", 0.0) > CONVERGENCE_TOL:
        bad.append(f"step-halving change {diag['halving_change']:.2e} > {CONVERGENCE_TOL:g}")
    if diag.get("edge_population", 0.0) > EDGE_POPULATION_TOL:
        bad.append(f"population {diag['edge_population']:.2e} at n_max exceeds {EDGE_POPULATION_TOL:g}")
    return bad


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def write_csv(path: Path, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    data = np.column_stack([np.asarray(columns[c], dtype=float) for c in names])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in data:
            writer.writerow(["%.17g" % x for x in row])


def write_manifest(path: Path, command: str, config: dict, outputs: list[str], diagnostics: dict,
                   wall_time: float, status: str = "ok") -> None:
    manifest = {
        "tool": "dicke-dispersive",
        "version": __version__,
        "command": command,
        "argv": sys.argv[1:],
        "config": config,
        "outputs": outputs,
        "diagnostics": diagnostics,
        "wall_time_s": wall_time,
        "status": status,
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_trajectories(args, compare: bool) -> int:
    runs = resolve_runs(args)
    out = _out_dir(args)
    status = EXIT_OK
    for spec in runs:
        t0 = time.perf_counter()
        check_cutoff(spec.cfg, spread_initial=_spreads(spec.init[0], spec.init[1]))
        psi0 = initial_state(spec)
        times = spec.grid.times
        exact, diag = run_exact(spec, psi0, times)
        columns = {"t": times}
        use_eff = compare or spec.effective
        if use_eff:
            eff, eff_diag = run_effective(spec, psi0, times)
            diag["effective"] = eff_diag
        if compare:
            p_exact = exact.columns()["P"]
            p_eff = eff.columns()["P"]
            diff = np.abs(p_exact - p_eff)
            columns.update(P_exact=p_exact, P_effective=p_eff, abs_diff=diff,
                           running_max_diff=np.maximum.accumulate(diff))
            diag["max_abs_diff"] = float(diff.max())
        else:
            columns.update(exact.columns())
            if use_eff:
                columns.update(eff.columns("_eff"))
        failures = _contract_failures(diag)
        diag["contract_failures"] = failures
        csv_path = out / f"{spec.label}.csv"
        write_csv(csv_path, columns)
        write_manifest(out / f"{spec.label}.manifest.json", args.command, spec.echo(), [csv_path.name],
                       diag, time.perf_counter() - t0, "failed" if failures else "ok")
        print(f"{csv_path}" + (f"  [FAILED: {'; '.join(failures)}]" if failures else ""))
        if failures:
            status = EXIT_NUMERIC
    return status


def cmd_simulate(args) -> int:
    return _run_trajectories(args, compare=False)


def cmd_compare(args) -> int:
    return _run_trajectories(args, compare=True)


def cmd_scan(args) -> int:
    if args.points < 1:
        raise ConfigError("--points must be >= 1")
    g_min, g_max = parse_number(args.g_min), parse_number(args.g_max)
    grid = np.linspace(g_min, g_max, args.points) if args.points > 1 else np.array([g_min])
    t0 = time.perf_counter()
    try:
        cfg = ModelConfig(omega0=parse_number(args.omega0), g=float(grid[0]), J=args.J, n_max=2)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    result = scan_resonance(cfg, args.k, grid, horizon_cycles=args.horizon_cycles, threads=args.threads)
    columns = dict(zip(result.COLUMNS, map(np.asarray, zip(*result.rows()))))
    out = _out_dir(args)
    name = args.label or f"scan_J{str(cfg.J).replace('/', '-')}_k{args.k}"
    csv_path = out / f"{name}.csv"
    write_csv(csv_path, columns)
    config = {"J": str(cfg.J), "k": args.k, "omega0": cfg.omega0, "omega": cfg.omega,
              "g_min": g_min, "g_max": g_max, "points": args.points, "horizon_cycles": args.horizon_cycles}
    write_manifest(out / f"{name}.manifest.json", "scan", config, [csv_path.name],
                   {"horizons": result.horizons.tolist()}, time.perf_counter() - t0)
    print(csv_path)
    return EXIT_OK


def cmd_chains(args) -> int:
    t0 = time.perf_counter()
    k = None if args.off_resonant else args.k
    if k is None and not args.off_resonant:
        raise ConfigError("give --k or --off-resonant")
    twice_j = as_twice(args.J)
    if args.n_base is not None:
        if k is None:
            raise ConfigError("--n-base needs a resonance --k")
        top = args.n_base + photon_offset(twice_j, twice_j, k)
        n_max = args.n_max if args.n_max is not None else top
        graph = build_chain_graph(args.J, k, args.n_base, n_max)
    else:
        n_max = args.n_max if args.n_max is not None else max(photon_offset(twice_j, twice_j, k or 1), 1) + 2
        graph = chain_partition(args.J, k, n_max)
    text = graph.dumps()
    if not args.out:
        print(text)
        return EXIT_OK
    out = _out_dir(args)
    name = args.label or f"chains_J{str(graph.J).replace('/', '-')}_" + (f"k{k}" if k else "off")
    (out / f"{name}.json").write_text(text + "\n")
    (out / f"{name}.dot").write_text(graph.to_dot())
    config = {"J": str(graph.J), "k": k, "n_base": args.n_base, "n_max": n_max}
    write_manifest(out / f"{name}.manifest.json", "chains", config, [f"{name}.json", f"{name}.dot"],
                   {"components": len(graph.components), "edges": len(graph.edges)}, time.perf_counter() - t0)
    print(out / f"{name}.json")
    return EXIT_OK


def cmd_coeffs(args) -> int:
    t0 = time.perf_counter()
    betas = [parse_number(b) for b in args.beta]
    if any(n < 0 for n in args.n) or any(m < 0 for m in args.m):
        raise ConfigError("n and m must be non-negative")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "m", "beta", "omega"])
    for n, m, beta, value in coefficient_rows(args.n, args.m, betas):
        writer.writerow([n, m, "%.17g" % beta, "%.17g" % value])
    if not args.out:
        sys.stdout.write(buf.getvalue())
        return EXIT_OK
    out = _out_dir(args)
    name = args.label or "coeffs"
    (out / f"{name}.csv").write_text(buf.getvalue())
    write_manifest(out / f"{name}.manifest.json", "coeffs", {"n": args.n, "m": args.m, "beta": betas},
                   [f"{name}.csv"], {}, time.perf_counter() - t0)
    print(out / f"{name}.csv")
    return EXIT_OK


def cmd_presets(args) -> int:
    presets = load_presets()
    for name in presets.sections():
        sec = presets[name]
        coupling = next(f"{k}={sec[k]}" for k in ("g", "g2", "g2j") if k in sec)
        print(f"{name:7s} J={sec['j']:8s} {coupling:16s} omega0={sec['omega0']:10s} cycles={sec['cycles']}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", help="named parameter preset (see 'presets')")
    p.add_argument("--config", help="INI file with run keys; flags override it")
    p.add_argument("--section", help="section of --config to use (default: first)")
    p.add_argument("--J", help="spin length, or comma-separated list")
    coupling = p.add_mutually_exclusive_group()
    coupling.add_argument("--g", help="coupling in units of omega, e.g. 'sqrt(5)'")
    coupling.add_argument("--g2", help="g^2 in units of omega^2")
    coupling.add_argument("--g2J", dest="g2J", help="g^2 J in units of omega^2")
    p.add_argument("--omega0", help="atomic splitting, or comma-separated list")
    p.add_argument("--omega", help="mode frequency (default 1)")
    p.add_argument("--n-max", dest="n_max", help="Fock cutoff or 'auto'")
    p.add_argument("--cycles", help="end time in mode cycles")
    p.add_argument("--start-cycles", dest="start_cycles", help="first sample, in mode cycles")
    p.add_argument("--samples-per-cycle", dest="samples_per_cycle", type=int)
    p.add_argument("--init", help="initial state x:m,n or z:m,n (default x:0,0)")
    p.add_argument("--frame", choices=["lab", "interaction_h2", "interaction_h3"],
                   help="propagate in this frame and map back to the lab")
    p.add_argument("--effective-kind", dest="effective_kind", choices=["auto", "lmg", "dsc", "half"])
    p.add_argument("--label", help="output file stem")
    p.add_argument("--out", default="dicke_output", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dicke-dispersive", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="exact P(t), photon CDFs and <Jz>")
    _add_run_flags(p)
    eff = p.add_mutually_exclusive_group()
    eff.add_argument("--effective", dest="effective", action="store_true", default=None,
                     help="add effective-model columns")
    eff.add_argument("--no-effective", dest="effective", action="store_false")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="exact vs effective P(t) and their running max difference")
    _add_run_flags(p)
    p.set_defaults(func=cmd_compare, effective=None)

    p = sub.add_parser("scan", help="P_min and frequency across couplings near a resonance")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--g-min", dest="g_min", required=True)
    p.add_argument("--g-max", dest="g_max", required=True)
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--omega0", default="0.01")
    p.add_argument("--J", default="1")
    p.add_argument("--horizon-cycles", dest="horizon_cycles", type=float, default=0.0,
                   help="minimum horizon; at least 20 predicted periods are always covered")
    p.add_argument("--threads", type=int, help="worker cap (default: DICKE_THREADS or CPU count)")
    p.add_argument("--label")
    p.add_argument("--out", default="dicke_output")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("chains", help="dispersive chain graph as JSON and DOT")
    p.add_argument("--J", required=True)
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--k", type=int)
    grp.add_argument("--off-resonant", dest="off_resonant", action="store_true")
    p.add_argument("--n-base", dest="n_base", type=int, help="single chain with this base photon number")
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--label")
    p.add_argument("--out", help="output directory (default: print JSON)")
    p.set_defaults(func=cmd_chains)

    p = sub.add_parser("coeffs", help="table of Omega_n^m(beta)")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--m", type=int, nargs="+", required=True)
    p.add_argument("--beta", nargs="+", required=True)
    p.add_argument("--label")
    p.add_argument("--out", help="output directory (default: print CSV)")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("presets", help="list parameter presets")
    p.set_defaults(func=cmd_presets)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CutoffTooSmall, StepTooLarge) as exc:
        hint = getattr(exc, "suggested_n_max", None)
        print(f"error: {exc}" + (f" (try --n-max {hint})" if hint else ""), file=sys.stderr)
        return EXIT_NUMERIC
    except (DickeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
