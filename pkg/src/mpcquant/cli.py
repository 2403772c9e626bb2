"""Command-line front end.

Energies, ``k`` and grid bounds are given and reported in units of ``hbar``.
Exit codes: 0 quantized / agreement / success, 3 condition fails, 1 error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__, scenarios
from .hamiltonian_dynamics import NonClosing, detect_closed_orbit, level_set_seeds
from .reduction_holonomy import (
    Mode,
    OrbitRecord,
    PrequantizationModel,
    Tolerances,
    default_invariance_directions,
    energy_scan,
    full_vs_reduced_monodromy,
    invariance_check,
    is_quantized,
)

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 3
TOLERANCE_FIELDS = ("sp", "orbit", "reduced", "trivial", "adapted", "pivot")


class UsageError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    scenario: str = "harmonic"
    n: int = 1
    parameters: dict[str, Any] = field(default_factory=dict)
    hbar: float = 1.0
    mode: str = "mpc"
    tolerances: dict[str, float] = field(default_factory=dict)
    seeds: int | None = None
    grid: tuple[float, float, float] | None = None
    energy: float | None = None

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "n": self.n,
            "parameters": dict(sorted(self.parameters.items())),
            "hbar": self.hbar,
            "mode": self.mode,
            "tolerances": dict(sorted(self.tolerances.items())),
            "seeds": self.seeds,
            "grid": None if self.grid is None else list(self.grid),
            "energy": self.energy,
        }

    def tol(self) -> Tolerances:
        return Tolerances().updated(**self.tolerances)

    def system(self, mode: str | None = None):
        p = self.parameters
        k = p.get("k")
        return scenarios.build(self.scenario, self.n, self.hbar,
                               k=None if k is None else k * self.hbar,
                               f=p.get("f"), H=p.get("H"))

    def model(self, sys=None, mode: str | None = None) -> PrequantizationModel:
        return PrequantizationModel(sys or self.system(), Mode(mode or self.mode), self.hbar,
                                    tol=self.tol())


# -- parsing ------------------------------------------------------------------------


def parse_grid(text) -> tuple[float, float, float]:
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = str(text).split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be a:b:step, got {text!r}")
    try:
        a, b, step = (float(v) for v in parts)
    except ValueError as exc:
        raise UsageError(f"grid must be numeric a:b:step, got {text!r}") from exc
    return a, b, step


def grid_values(grid: tuple[float, float, float]) -> np.ndarray:
    """Points ``a + j step`` in the half-open interval ``(a, b]``."""
    a, b, step = grid
    if step <= 0 or b <= a:
        raise UsageError(f"empty grid ({a}, {b}] with step {step}")
    count = int(np.floor((b - a) / step + 1e-9))
    if count < 1:
        raise UsageError(f"empty grid ({a}, {b}] with step {step}")
    return np.round(a + step * np.arange(1, count + 1), 12)


def _field_error(name: str, expected: str, value) -> UsageError:
    return UsageError(f"config field '{name}': expected {expected}, got {value!r}")


def load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"{path}: top level must be a JSON object")
    return data


def config_from_mapping(data: dict) -> ScenarioConfig:
    known = {"scenario", "n", "parameters", "hbar", "mode", "tolerances", "seeds", "grid",
             "energy"}
    extra = set(data) - known
    if extra:
        raise UsageError(f"unknown config field(s): {', '.join(sorted(extra))}")
    cfg = ScenarioConfig()
    if "scenario" in data:
        if data["scenario"] not in scenarios.SCENARIOS:
            raise _field_error("scenario", "one of " + ", ".join(scenarios.SCENARIOS),
                               data["scenario"])
        cfg.scenario = data["scenario"]
    if "n" in data:
        if not isinstance(data["n"], int) or isinstance(data["n"], bool) or data["n"] < 1:
            raise _field_error("n", "positive integer", data["n"])
        cfg.n = data["n"]
    if "parameters" in data:
        if not isinstance(data["parameters"], dict):
            raise _field_error("parameters", "object", data["parameters"])
        cfg.parameters = dict(data["parameters"])
    for name in ("hbar", "energy"):
        if name in data and data[name] is not None:
            if not isinstance(data[name], (int, float)) or isinstance(data[name], bool):
                raise _field_error(name, "number", data[name])
            setattr(cfg, name, float(data[name]))
    if "mode" in data:
        if data["mode"] not in ("mpc", "ks", "both"):
            raise _field_error("mode", "'mpc', 'ks' or 'both'", data["mode"])
        cfg.mode = data["mode"]
    if "tolerances" in data:
        tol = data["tolerances"]
        if not isinstance(tol, dict) or not set(tol) <= set(TOLERANCE_FIELDS):
            raise _field_error("tolerances", "object with keys " + ", ".join(TOLERANCE_FIELDS),
                               tol)
        cfg.tolerances = {k: float(v) for k, v in tol.items()}
    if "seeds" in data and data["seeds"] is not None:
        if not isinstance(data["seeds"], int) or data["seeds"] < 1:
            raise _field_error("seeds", "positive integer", data["seeds"])
        cfg.seeds = data["seeds"]
    if "grid" in data and data["grid"] is not None:
        cfg.grid = parse_grid(data["grid"])
    return cfg


def build_config(args: argparse.Namespace) -> ScenarioConfig:
    """Config file fields overridden by explicit flags."""
    cfg = config_from_mapping(load_config_file(args.config)) if args.config else ScenarioConfig()
    if args.scenario is not None:
        cfg.scenario = args.scenario
    if args.n is not None:
        cfg.n = args.n
    if args.energy is not None:
        cfg.energy = args.energy
    if args.k is not None:
        cfg.parameters["k"] = args.k
    if args.f is not None:
        cfg.parameters["f"] = args.f
    if args.hamiltonian is not None:
        cfg.parameters["H"] = args.hamiltonian
    if args.mode is not None:
        cfg.mode = args.mode
    if args.hbar is not None:
        cfg.hbar = args.hbar
    if args.tol is not None:
        cfg.tolerances["trivial"] = args.tol
    if args.seeds is not None:
        cfg.seeds = args.seeds
    if args.grid is not None:
        cfg.grid = parse_grid(args.grid)
    if cfg.hbar <= 0:
        raise UsageError("hbar must be positive")
    if cfg.scenario in ("shifted_harmonic", "product_hamiltonian"):
        cfg.n = 2
    return cfg


# -- reports ------------------------------------------------------------------------


def _orbit_json(rec: OrbitRecord, hbar: float, label: str | None = None) -> dict:
    out = rec.to_json()
    if label is not None:
        out = {"system": label, **out}
    return out


def _report(cfg: ScenarioConfig, command: str, **body) -> dict:
    base = {"command": command, "config": cfg.to_json(), "orbits": [], "levels": [],
            "nonclosing": 0}
    base.update(body)
    base["version"] = __version__
    return base


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _table(headers: list[str], rows: list[list]) -> str:
    cells = [[_fmt(v) for v in row] for row in rows]
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines)


def _orbit_rows(orbits: list[dict]) -> tuple[list[str], list[list]]:
    headers = ["seed", "status", "period", "action", "w_b", "p", "Re lambda", "Im lambda",
               "trivial"]
    rows = []
    for o in orbits:
        lam = o["lambda"] or {"re": None, "im": None}
        rows.append([" ".join(repr(v) for v in o["seed"]), o["status"], o["period"],
                     o["action"], o["parity_frame"], o["parity_reduced"], lam["re"], lam["im"],
                     o["trivial"]])
    if orbits and "system" in orbits[0]:
        headers = ["system"] + headers
        rows = [[o["system"]] + r for o, r in zip(orbits, rows)]
    return headers, rows


def render_table(report: dict) -> str:
    cmd = report["command"]
    parts = []
    if cmd == "check":
        parts.append(_table(*_orbit_rows(report["orbits"])))
        parts.append(f"E/hbar = {_fmt(report['energy'])}  mode = {report['config']['mode']}  "
                     f"quantized = {_fmt(report['quantized'])}  "
                     f"nonclosing = {report['nonclosing']}")
    elif cmd == "scan":
        for scan in report["scans"]:
            rows = [[e["energy"], e["arg"], e["status"], e["trivial"]] for e in scan["entries"]]
            parts.append(f"mode = {scan['mode']}")
            parts.append(_table(["E/hbar", "arg lambda", "status", "trivial"], rows))
            parts.append("levels (E/hbar): " + ", ".join(_fmt(v) for v in scan["levels"]))
        if "level_shift" in report:
            parts.append(f"mpc levels minus ks levels: {_fmt(report['level_shift'])}")
    elif cmd == "invariance":
        parts.append(_table(*_orbit_rows(report["orbits"])))
        rows = [[c["index"], c["hausdorff"], c["lambda_gap"], c["agree"]]
                for c in report["comparisons"]]
        parts.append(_table(["seed #", "hausdorff", "|lambda1 - lambda2|", "agree"], rows))
        parts.append(f"energies (E1/hbar, E2/hbar) = ({_fmt(report['energies'][0])}, "
                     f"{_fmt(report['energies'][1])})  quantized: "
                     f"{_fmt(report['quantized'][0])} / {_fmt(report['quantized'][1])}  "
                     f"agree = {_fmt(report['agree'])}")
    elif cmd == "monodromy-demo":
        parts.append(_table(*_orbit_rows(report["orbits"])))
        parts.append(f"|h - I| = {_fmt(report['full_defect'])}  "
                     f"|nu(h) - I| = {_fmt(report['reduced_defect'])}")
    return "\n".join(parts)


# -- commands -----------------------------------------------------------------------


def cmd_check(cfg: ScenarioConfig) -> tuple[dict, int]:
    if cfg.energy is None:
        raise UsageError("check needs --energy")
    if cfg.mode == "both":
        raise UsageError("check needs a single mode")
    model = cfg.model()
    rep = is_quantized(model, cfg.energy * cfg.hbar, cfg.seeds or 8)
    orbits = [_orbit_json(r, cfg.hbar) for r in rep.records]
    out = _report(cfg, "check", orbits=orbits, nonclosing=rep.nonclosing,
                  energy=cfg.energy, quantized=rep.quantized)
    return out, EXIT_OK if rep.quantized else EXIT_FAIL


def cmd_scan(cfg: ScenarioConfig) -> tuple[dict, int]:
    if cfg.grid is None:
        raise UsageError("scan needs --grid a:b:step")
    energies = grid_values(cfg.grid)
    modes = ["mpc", "ks"] if cfg.mode == "both" else [cfg.mode]
    sys_ = cfg.system()
    scans = []
    for mode in modes:
        rep = energy_scan(cfg.model(sys_, mode), energies * cfg.hbar, cfg.seeds or 1)
        scans.append({
            "mode": mode,
            "entries": [{"energy": e.energy / cfg.hbar, "arg": e.arg,
                         "lambda": None if e.lam is None else {"re": e.lam.real,
                                                               "im": e.lam.imag},
                         "status": e.status, "trivial": e.trivial}
                        for e in rep.entries],
            "levels": [L / cfg.hbar for L in rep.levels],
            "level_residuals": rep.level_residuals,
        })
    body = {"scans": scans, "levels": scans[0]["levels"],
            "nonclosing": sum(e["status"] != "closed" for s in scans for e in s["entries"])}
    if len(scans) == 2 and len(scans[0]["levels"]) == len(scans[1]["levels"]):
        shifts = [a - b for a, b in zip(scans[0]["levels"], scans[1]["levels"])]
        body["level_shift"] = float(np.median(shifts)) if shifts else None
    return _report(cfg, "scan", **body), EXIT_OK


def _invariance_pair(cfg: ScenarioConfig):
    if cfg.mode == "both":
        raise UsageError("invariance needs a single mode")
    if cfg.scenario in ("product_hamiltonian", "shifted_harmonic"):
        k = cfg.parameters.get("k")
        if k is None:
            raise UsageError("invariance for the product pair needs --k")
        s1 = scenarios.shifted_harmonic(k * cfg.hbar, cfg.hbar)
        s2 = scenarios.product_hamiltonian(k * cfg.hbar, cfg.hbar)
        return s1, s2, (0.0, 0.0)
    if cfg.scenario == "composed":
        f = cfg.parameters.get("f")
        if f is None or cfg.energy is None:
            raise UsageError("invariance for composed needs --f and --energy")
        s1 = scenarios.harmonic(cfg.n, cfg.hbar)
        s2 = scenarios.composed(cfg.n, f, cfg.hbar)
        E = cfg.energy * cfg.hbar
        return s1, s2, (E, scenarios.compose_energy(f, E))
    raise UsageError("invariance supports the product_hamiltonian pair and composed f(H)")


def cmd_invariance(cfg: ScenarioConfig) -> tuple[dict, int]:
    s1, s2, level = _invariance_pair(cfg)
    m1, m2 = cfg.model(s1), cfg.model(s2)
    rep = invariance_check(m1, m2, level, cfg.seeds or 8)
    orbits, comparisons = [], []
    for i, c in enumerate(rep.comparisons):
        orbits.append(_orbit_json(c.record1, cfg.hbar, s1.name))
        orbits.append(_orbit_json(c.record2, cfg.hbar, s2.name))
        comparisons.append({"index": i, "hausdorff": c.hausdorff, "lambda_gap": c.lambda_gap,
                            "agree": c.agree})
    body = {
        "orbits": orbits,
        "comparisons": comparisons,
        "energies": [level[0] / cfg.hbar, level[1] / cfg.hbar],
        "quantized": [rep.quantized1, rep.quantized2],
        "agree": rep.agree,
        "nonclosing": sum(r["status"] != "closed" for r in orbits),
    }
    return _report(cfg, "invariance", **body), EXIT_OK if rep.agree else EXIT_FAIL


def cmd_monodromy_demo(cfg: ScenarioConfig) -> tuple[dict, int]:
    if cfg.scenario in ("product_hamiltonian", "shifted_harmonic") and "k" not in cfg.parameters:
        cfg.parameters["k"] = 2.0
    sys_ = cfg.system()
    E = (cfg.energy if cfg.energy is not None else
         (0.0 if cfg.scenario in ("product_hamiltonian", "shifted_harmonic") else 1.0)) * cfg.hbar
    seed = level_set_seeds(sys_, E, 1, default_invariance_directions(sys_.n, 1)[-1:])[0]
    orbit = detect_closed_orbit(sys_, seed)
    if isinstance(orbit, NonClosing):
        raise UsageError(f"no closed orbit through {seed.tolist()}: {orbit.reason}")
    full, reduced = full_vs_reduced_monodromy(sys_, orbit)
    rec = OrbitRecord(seed, "closed", orbit.period)
    body = {"orbits": [_orbit_json(rec, cfg.hbar)], "full_defect": full,
            "reduced_defect": reduced}
    return _report(cfg, "monodromy-demo", **body), EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "scan": cmd_scan,
    "invariance": cmd_invariance,
    "monodromy-demo": cmd_monodromy_demo,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", choices=scenarios.SCENARIOS)
    common.add_argument("--n", type=int)
    common.add_argument("--energy", type=float, help="energy in units of hbar")
    common.add_argument("--k", type=float, help="shift k in units of hbar")
    common.add_argument("--f", help='polynomial f, e.g. "x^3+2x"')
    common.add_argument("--hamiltonian", help='custom H in p1..pn, q1..qn, e.g. "p1^2+q1^2"')
    common.add_argument("--mode", choices=("mpc", "ks", "both"))
    common.add_argument("--hbar", type=float)
    common.add_argument("--tol", type=float, help="triviality tolerance on |lambda - 1|")
    common.add_argument("--seeds", type=int)
    common.add_argument("--grid", help="energy grid a:b:step, the interval (a, b]")
    common.add_argument("--config", help="JSON config file; flags override its fields")
    common.add_argument("--out", help="write the report to this file")
    common.add_argument("--format", choices=("table", "json"), default="table")
    common.add_argument("--no-timing", action="store_true",
                        help="omit wall-clock timing from the JSON report")
    parser = _Parser(prog="mpcquant", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        cfg = build_config(args)
        report, code = COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"mpcquant {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # reported, not raised, so the exit code is meaningful
        print(f"mpcquant {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if not args.no_timing:
        report["timing"] = {"seconds": time.perf_counter() - start}
    if args.format == "json":
        text = json.dumps(report, indent=2)
    else:
        text = render_table(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
