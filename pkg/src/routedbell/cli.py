"""Command-line driver: figure data, sweeps, certification, attacks, exports.

Commands write CSV/text artifacts into an output directory; every file starts
with a manifest comment recording the package version, the seed, and a hash of
the effective configuration, so identical reruns produce identical bytes.
Configuration comes from an optional flat ``key=value`` file overridden by
flags.  Exit codes: 0 success, 2 validation, 3 solver failure, 4 certification
required but not achieved.
"""

import argparse
import hashlib
import logging
import math
import sys
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .attacks import (
    AttackScenario,
    attack_one,
    attack_two,
    ns_from_csv,
    ns_to_csv,
    pr_embedded_box,
    random_ns_target,
)
from .behavior import BehaviorTable, DeviceParams, postprocess_assign
from .chsh import SWEEP_CASES, critical_eta_a1, report_from_table, sweep_point, curve_to_csv
from .conic import SolveOptions
from .localset import Scenario, branch_scenario, functional_to_csv, is_local, weights_to_csv
from .npa import (
    CHSH_SCENARIO,
    OutsideRelaxationError,
    RelaxationSolverError,
    critical_eta_numeric,
    guessing_probability,
    max_functional_upper_bound,
    parse_level,
)
from .quantum import chsh_functional, isotropic_strategy
from .sdpa import write_dats, write_solution_file
from .seesaw import threshold_eta
from .util import fmt17, make_rng, parallel_map

log = logging.getLogger("routedbell.cli")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_UNCERTIFIED = 4

# numeric-vs-analytic comparisons are limited by the bisection step
DOMINANCE_TOL = 1e-4


class ValidationError(ValueError):
    """Bad configuration or bad input data; maps to exit code 2."""


@dataclass
class RunConfig:
    """Effective settings of one command run; file values overridden by flags."""

    out: str = "out"
    seed: int = 1234
    level: str = "1ab"
    tol: float = 1e-7
    jobs: int = 0                 # 0 = one worker per processor
    grid_start: float = 0.5       # near-efficiency grid (figure2 / sweep)
    grid_stop: float = 1.0
    grid_points: int = 26
    nu_start: float = 0.95        # distant-visibility grid (figure3)
    nu_stop: float = 1.0
    nu_points: int = 11
    eta_b: float = 0.993          # near-source defaults (figure3)
    nu_b: float = 0.993
    eta_a0: float = 0.966
    nu_a0: float = 0.993
    case: str = "iso-asym"        # sweep case
    kind: int = 1                 # attack kind
    scenario: str = "2,2,2,2"     # attack scenario N,M,N',M'
    target: str = ""              # attack target: '' = PR box, 'random', or a CSV path
    x: int = 0                    # far-device input for guessing
    behavior: str = ""            # behavior CSV path (certify / guess)
    require_certified: bool = False
    guess: bool = False           # certify: also bound the guessing probability
    local_check: bool = False     # certify: LP locality certificates per branch


def read_config(path) -> dict:
    """Parse a flat UTF-8 key=value file; '#' starts a comment."""
    known = {f.name for f in fields(RunConfig)}
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in known:
            raise ValidationError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def _coerce(name: str, text: str):
    kind = type(getattr(RunConfig(), name))
    if kind is bool:
        lowered = text.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValidationError(f"config key {name!r}: expected a boolean, got {text!r}")
    try:
        return kind(text)
    except ValueError as exc:
        raise ValidationError(f"config key {name!r}: {exc}") from exc


def effective_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        file_values = read_config(args.config)
        cfg = replace(cfg, **{k: _coerce(k, v) for k, v in file_values.items()})
    names = {f.name for f in fields(RunConfig)}
    overrides = {k: v for k, v in vars(args).items() if k in names and v is not None}
    cfg = replace(cfg, **overrides)
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    if cfg.tol <= 0.0:
        raise ValidationError(f"tol must be positive, got {cfg.tol}")
    if cfg.jobs < 0:
        raise ValidationError(f"jobs must be nonnegative, got {cfg.jobs}")
    if cfg.seed < 0:
        raise ValidationError(f"seed must be nonnegative, got {cfg.seed}")
    if cfg.grid_points < 1 or cfg.nu_points < 1:
        raise ValidationError("grids need at least one point")
    for lo, hi, label in ((cfg.grid_start, cfg.grid_stop, "grid"),
                          (cfg.nu_start, cfg.nu_stop, "nu grid")):
        if not lo <= hi:
            raise ValidationError(f"{label} is not monotone: start {lo} > stop {hi}")
        if not (0.0 <= lo and hi <= 1.0):
            raise ValidationError(f"{label} leaves the unit interval: [{lo}, {hi}]")
    for name in ("eta_b", "nu_b", "eta_a0", "nu_a0"):
        value = getattr(cfg, name)
        if not 0.0 <= value <= 1.0:
            raise ValidationError(f"{name} must lie in [0, 1], got {value}")
    if cfg.case not in SWEEP_CASES:
        raise ValidationError(f"case must be one of {SWEEP_CASES}, got {cfg.case!r}")
    if cfg.kind not in (1, 2):
        raise ValidationError(f"attack kind must be 1 or 2, got {cfg.kind}")
    if cfg.x not in (0, 1):
        raise ValidationError(f"far input x must be 0 or 1, got {cfg.x}")
    try:
        parse_level(cfg.level)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def config_hash(cfg: RunConfig, command: str) -> str:
    lines = [f"command={command}"]
    lines += [f"{f.name}={getattr(cfg, f.name)!r}" for f in fields(RunConfig)]
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()[:12]


def manifest_line(cfg: RunConfig, command: str) -> str:
    return (f"manifest: routedbell {__version__} command={command} "
            f"seed={cfg.seed} config={config_hash(cfg, command)}")


def ensure_outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _jobs(cfg: RunConfig):
    return None if cfg.jobs == 0 else cfg.jobs


def _write_report(path: Path, manifest: str, lines: list) -> None:
    with path.open("w") as fh:
        fh.write(f"# {manifest}\n")
        for line in lines:
            fh.write(line + "\n")
    for line in lines:
        print(line)


# -- figure2 -----------------------------------------------------------------

ONSET_SETUPS = (
    ("iso-sym", "sym", False),
    ("iso-asym", "asym", False),
    ("tilted-sym", "sym", True),
    ("tilted-asym", "asym", True),
)


def _curve_task(item):
    case, eta = item
    try:
        return ("ok", sweep_point(case, eta))
    except Exception as exc:
        return ("error", f"{case} eta={eta:.6g}: {exc}")


def _onset_task(item):
    label, side, tilted = item
    try:
        return ("ok", label, threshold_eta(side, tilted=tilted))
    except Exception as exc:
        return ("error", f"onset {label}: {exc}")


def cmd_figure2(cfg: RunConfig) -> int:
    out = ensure_outdir(cfg)
    man = manifest_line(cfg, "figure2")
    grid = np.linspace(cfg.grid_start, cfg.grid_stop, cfg.grid_points)
    tasks = [(case, float(eta)) for case in SWEEP_CASES for eta in grid]
    results = parallel_map(_curve_task, tasks, jobs=_jobs(cfg))
    by_case = {case: [] for case in SWEEP_CASES}
    failures = 0
    for (case, _), res in zip(tasks, results):
        if res[0] == "ok":
            by_case[case].append(res[1])
        else:
            failures += 1
            log.warning("figure2 point failed: %s", res[1])
    standalone = 0
    for case in SWEEP_CASES:
        points = by_case[case]
        standalone += sum(pt.method == "standalone" for pt in points)
        curve_to_csv(points, out / f"figure2_{case}.csv", comments=[man])
    onset_rows = []
    for res in parallel_map(_onset_task, list(ONSET_SETUPS), jobs=_jobs(cfg)):
        if res[0] == "ok":
            onset_rows.append((res[1], res[2]))
        else:
            failures += 1
            log.warning("figure2 onset failed: %s", res[1])
    with (out / "figure2_onsets.csv").open("w", newline="") as fh:
        fh.write(f"# {man}\n")
        fh.write("case,onset_eta\n")
        for label, value in onset_rows:
            fh.write(f"{label},{fmt17(value)}\n")
    for label, value in onset_rows:
        print(f"onset {label}: eta = {value:.6f}")
    print(f"figure2: {len(tasks) - failures}/{len(tasks)} grid points, "
          f"{standalone} without near-branch leverage, wrote {out}")
    return EXIT_OK


# -- figure3 -----------------------------------------------------------------

def _figure3_task(item):
    strategy, near, nu, level, tol = item
    try:
        analytic = critical_eta_a1(strategy, near, nu).eta_a1_star
        numeric = critical_eta_numeric(strategy, near, nu, level,
                                       options=SolveOptions(tol=tol))
        return ("ok", nu, analytic, numeric)
    except Exception as exc:
        return ("error", f"nu_a1={nu:.6g}: {exc}")


def cmd_figure3(cfg: RunConfig) -> int:
    out = ensure_outdir(cfg)
    man = manifest_line(cfg, "figure3")
    strategy = isotropic_strategy()
    near = (DeviceParams(cfg.eta_a0, cfg.nu_a0), DeviceParams(cfg.eta_b, cfg.nu_b))
    grid = np.linspace(cfg.nu_start, cfg.nu_stop, cfg.nu_points)
    tasks = [(strategy, near, float(nu), cfg.level, cfg.tol) for nu in grid]
    results = parallel_map(_figure3_task, tasks, jobs=_jobs(cfg))
    rows = []
    for res in results:
        if res[0] == "ok":
            rows.append(res[1:])
        else:
            log.warning("figure3 point omitted: %s", res[1])
    dominant = sum(numeric <= analytic + DOMINANCE_TOL for _, analytic, numeric in rows)
    summary = (f"dominance: numeric <= analytic at {dominant}/{len(rows)} points "
               f"(tol {DOMINANCE_TOL:g})")
    with (out / "figure3_curves.csv").open("w", newline="") as fh:
        fh.write(f"# {man}\n")
        fh.write(f"# {summary}\n")
        fh.write("nu_a1,eta_star_analytic,eta_star_numeric\n")
        for nu, analytic, numeric in rows:
            fh.write(f"{fmt17(nu)},{fmt17(analytic)},{fmt17(numeric)}\n")
    print(summary)
    print(f"figure3: {len(rows)}/{len(tasks)} points, wrote {out / 'figure3_curves.csv'}")
    return EXIT_OK


# -- certify -----------------------------------------------------------------

def _sniff_schema(path) -> str:
    """Peek at the CSV header: routed tables carry a branch column `i`."""
    try:
        with Path(path).open() as fh:
            for line in fh:
                if line.startswith("#") or not line.strip():
                    continue
                header = [cell.strip() for cell in line.split(",")]
                break
            else:
                raise ValidationError(f"{path}: empty behavior file")
    except OSError as exc:
        raise ValidationError(f"cannot read behavior {path}: {exc}") from exc
    if header[:1] == ["i"]:
        return "routed"
    if header[:1] == ["x"]:
        return "ns"
    raise ValidationError(f"{path}: unrecognized behavior header {header}")


def _certify_routed(cfg: RunConfig, out: Path, path: str, lines: list) -> bool:
    table = BehaviorTable.from_csv(path)
    rep = table.validate()
    lines.append(f"validation: normalization_dev={rep.normalization_dev:.3e} "
                 f"min_entry={rep.min_entry:.3e} "
                 f"ns_dev={max(rep.alice_ns_dev, rep.bob_ns_dev):.3e}")
    if not rep.ok:
        raise ValidationError(f"{path}: behavior table fails validation "
                              f"(normalized={rep.normalized} nonnegative={rep.nonnegative} "
                              f"no_signaling={rep.no_signaling})")
    assigned = postprocess_assign(table) if table.n_outcomes == 3 else table
    crep = report_from_table(assigned)
    lines.append(f"c_near = {fmt17(crep.c_near)}")
    lines.append(f"c_far = {fmt17(crep.c_far)}")
    lines.append(f"tradeoff_rhs = {fmt17(crep.rhs)}")
    lines.append(f"certified = {crep.certified}")
    if cfg.guess:
        if table.n_outcomes != 3:
            raise ValidationError("guessing bounds need the three-outcome table "
                                  "(no-click outcome retained)")
        res = guessing_probability(table, cfg.x, cfg.level, SolveOptions(tol=cfg.tol))
        lines.append(f"guessing_probability(x={cfg.x}, level={cfg.level}) = {fmt17(res.g)}")
        lines.append(f"min_entropy = {fmt17(res.h_min)}")
        lines.append(f"guessing_certificate = {fmt17(res.certificate['bound'])}")
    if cfg.local_check:
        scen = branch_scenario(table)
        for i in (0, 1):
            cert = is_local(table.branch(i), scen)
            verdict = "local" if cert.is_member else "nonlocal"
            lines.append(f"branch {i}: {verdict} "
                         f"(lp infeasibility {cert.lp_infeasibility:.3e})")
            man = manifest_line(cfg, "certify")
            if cert.is_member:
                weights_to_csv(cert, out / f"certify_branch{i}_weights.csv",
                               comments=[man])
            else:
                functional_to_csv(cert, out / f"certify_branch{i}_functional.csv",
                                  comments=[man])
    return crep.certified


def _certify_ns(cfg: RunConfig, out: Path, path: str, lines: list) -> bool:
    table = ns_from_csv(path)
    s = table.scenario
    lines.append(f"schema: plain no-signaling table, scenario "
                 f"{s.a_inputs},{s.a_outputs},{s.b_inputs},{s.b_outputs}")
    cert = is_local(table.as_float(),
                    Scenario(s.a_inputs, s.a_outputs, s.b_inputs, s.b_outputs))
    verdict = "local" if cert.is_member else "nonlocal"
    lines.append(f"locality: {verdict} (lp infeasibility {cert.lp_infeasibility:.3e})")
    man = manifest_line(cfg, "certify")
    if cert.is_member:
        weights_to_csv(cert, out / "certify_weights.csv", comments=[man])
        lines.append(f"local model written to {out / 'certify_weights.csv'}")
    else:
        functional_to_csv(cert, out / "certify_functional.csv", comments=[man])
        lines.append(f"separating functional written to {out / 'certify_functional.csv'}")
    lines.append("certified = False  (trade-off certification needs a routed table)")
    return False


def cmd_certify(cfg: RunConfig) -> int:
    if not cfg.behavior:
        raise ValidationError("certify needs a behavior CSV path")
    out = ensure_outdir(cfg)
    lines = []
    if _sniff_schema(cfg.behavior) == "routed":
        certified = _certify_routed(cfg, out, cfg.behavior, lines)
    else:
        certified = _certify_ns(cfg, out, cfg.behavior, lines)
    _write_report(out / "certify_report.txt", manifest_line(cfg, "certify"), lines)
    if cfg.require_certified and not certified:
        log.error("certification required but not achieved")
        return EXIT_UNCERTIFIED
    return EXIT_OK


# -- guess -------------------------------------------------------------------

def cmd_guess(cfg: RunConfig) -> int:
    if not cfg.behavior:
        raise ValidationError("guess needs a behavior CSV path")
    table = BehaviorTable.from_csv(cfg.behavior)
    rep = table.validate()
    if not rep.ok:
        raise ValidationError(f"{cfg.behavior}: behavior table fails validation")
    if table.n_outcomes != 3:
        raise ValidationError("guessing bounds need the three-outcome table")
    out = ensure_outdir(cfg)
    res = guessing_probability(table, cfg.x, cfg.level, SolveOptions(tol=cfg.tol))
    lines = [
        f"guessing_probability(x={cfg.x}, level={cfg.level}) = {fmt17(res.g)}",
        f"min_entropy = {fmt17(res.h_min)}",
        f"certificate_bound = {fmt17(res.certificate['bound'])}",
        f"solver_status = {res.report.status}",
        f"boundary_rescue = {'rescue' in res.certificate}",
    ]
    _write_report(out / "guess_report.txt", manifest_line(cfg, "guess"), lines)
    return EXIT_OK


# -- attack ------------------------------------------------------------------

def _parse_scenario(text: str) -> AttackScenario:
    parts = text.split(",")
    if len(parts) != 4:
        raise ValidationError(f"scenario must be N,M,N',M' (four integers), got {text!r}")
    try:
        numbers = [int(p) for p in parts]
    except ValueError as exc:
        raise ValidationError(f"scenario {text!r}: {exc}") from exc
    try:
        return AttackScenario(*numbers)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def cmd_attack(cfg: RunConfig) -> int:
    s = _parse_scenario(cfg.scenario)
    if cfg.target == "random":
        target = random_ns_target(s, make_rng(cfg.seed))
    elif cfg.target:
        target = ns_from_csv(cfg.target)
        if target.scenario != s:
            raise ValidationError(f"target scenario {target.scenario} does not match "
                                  f"--scenario {cfg.scenario}")
    else:
        target = pr_embedded_box(s)
    if cfg.kind == 1:
        model, induced = attack_one(target)
        eta_a, eta_b = Fraction(1, s.a_inputs), Fraction(1, s.b_inputs)
        extra = []
    else:
        model, induced, leakage = attack_two(target)
        eta_a, eta_b = Fraction(1, s.a_outputs), Fraction(1, s.b_outputs)
        extra = [f"leakage = {fmt17(leakage)}"]
    out = ensure_outdir(cfg)
    man = manifest_line(cfg, "attack")
    ns_to_csv(target, out / "attack_target.csv", comments=[man])
    metadata = [man, f"kind = {cfg.kind}",
                f"eta_alice = {eta_a}", f"eta_bob = {eta_b}", *extra]
    ns_to_csv(induced, out / "attack_induced.csv", comments=metadata,
              definite_a=s.a_outputs, definite_b=s.b_outputs)
    print(f"attack kind {cfg.kind} on scenario {cfg.scenario}: "
          f"eta_alice = {eta_a}, eta_bob = {eta_b}")
    for line in extra:
        print(line)
    print(f"wrote {out / 'attack_target.csv'} and {out / 'attack_induced.csv'}")
    return EXIT_OK


# -- export-sdpa -------------------------------------------------------------

def cmd_export_sdpa(cfg: RunConfig) -> int:
    out = ensure_outdir(cfg)
    man = manifest_line(cfg, "export-sdpa")
    bound = max_functional_upper_bound(chsh_functional(), CHSH_SCENARIO,
                                      cfg.level, SolveOptions(tol=cfg.tol))
    level = parse_level(cfg.level)
    problem_path = out / f"chsh_L{level}.dats-s"
    solution_path = out / f"chsh_L{level}.sol"
    write_dats(bound.problem, problem_path,
               comments=(man, f"certified optimum {fmt17(bound.bound)}"))
    write_solution_file(solution_path, bound.solution.y, comments=(man,))
    print(f"CHSH level {level}: certified upper bound = {fmt17(bound.bound)}")
    print(f"wrote {problem_path} and {solution_path}")
    return EXIT_OK


# -- sweep -------------------------------------------------------------------

def cmd_sweep(cfg: RunConfig) -> int:
    out = ensure_outdir(cfg)
    man = manifest_line(cfg, "sweep")
    grid = np.linspace(cfg.grid_start, cfg.grid_stop, cfg.grid_points)
    tasks = [(cfg.case, float(eta)) for eta in grid]
    results = parallel_map(_curve_task, tasks, jobs=_jobs(cfg))
    points = []
    for res in results:
        if res[0] == "ok":
            points.append(res[1])
        else:
            log.warning("sweep point failed: %s", res[1])
    path = out / f"sweep_{cfg.case}.csv"
    curve_to_csv(points, path, comments=[man])
    print(f"sweep {cfg.case}: {len(points)}/{len(tasks)} points, wrote {path}")
    return EXIT_OK


# -- argument parsing --------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, metavar="PATH",
                        help="flat key=value config file ('#' comments)")
    parser.add_argument("--out", default=None, metavar="DIR",
                        help="output directory (created if missing)")
    parser.add_argument("--seed", type=int, default=None, metavar="N",
                        help="RNG seed recorded in manifests")
    parser.add_argument("--level", choices=("1", "1ab", "2"), default=None,
                        help="relaxation level")
    parser.add_argument("--tol", type=float, default=None, metavar="X",
                        help="solver tolerance")
    parser.add_argument("--jobs", type=int, default=None, metavar="N",
                        help="worker processes (0 = one per processor)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="routedbell",
        description="Routed Bell experiments: curves, certification, attacks.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("figure2", help="critical-efficiency curves for the four cases")
    _add_common(p)
    p.add_argument("--grid-start", dest="grid_start", type=float, default=None)
    p.add_argument("--grid-stop", dest="grid_stop", type=float, default=None)
    p.add_argument("--grid-points", dest="grid_points", type=int, default=None)

    p = sub.add_parser("figure3", help="analytic vs numeric critical far efficiency")
    _add_common(p)
    p.add_argument("--nu-start", dest="nu_start", type=float, default=None)
    p.add_argument("--nu-stop", dest="nu_stop", type=float, default=None)
    p.add_argument("--nu-points", dest="nu_points", type=int, default=None)
    p.add_argument("--eta-b", dest="eta_b", type=float, default=None)
    p.add_argument("--nu-b", dest="nu_b", type=float, default=None)
    p.add_argument("--eta-a0", dest="eta_a0", type=float, default=None)
    p.add_argument("--nu-a0", dest="nu_a0", type=float, default=None)

    p = sub.add_parser("certify", help="trade-off and locality certification of a table")
    _add_common(p)
    p.add_argument("behavior", nargs="?", default=None,
                   help="behavior CSV (routed or plain no-signaling schema)")
    p.add_argument("--require-certified", dest="require_certified",
                   action="store_true", default=None,
                   help="exit 4 unless certification succeeds")
    p.add_argument("--guess", dest="guess", action="store_true", default=None,
                   help="also bound the far-device guessing probability")
    p.add_argument("--local-check", dest="local_check", action="store_true",
                   default=None, help="LP locality certificate per branch")
    p.add_argument("--x", dest="x", type=int, default=None,
                   help="far-device input for the guessing bound")

    p = sub.add_parser("guess", help="guessing-probability bound for a routed table")
    _add_common(p)
    p.add_argument("behavior", nargs="?", default=None, help="routed behavior CSV")
    p.add_argument("--x", dest="x", type=int, default=None)

    p = sub.add_parser("attack", help="appendix attacks on a no-signaling target")
    _add_common(p)
    p.add_argument("--kind", dest="kind", type=int, default=None, choices=(1, 2))
    p.add_argument("--scenario", dest="scenario", default=None, metavar="N,M,N',M'")
    p.add_argument("--target", dest="target", default=None,
                   help="target table CSV, 'random', or empty for the PR box")

    p = sub.add_parser("export-sdpa", help="write the CHSH relaxation in SDPA format")
    _add_common(p)

    p = sub.add_parser("sweep", help="critical-efficiency curve for one case")
    _add_common(p)
    p.add_argument("--case", dest="case", default=None, choices=SWEEP_CASES)
    p.add_argument("--grid-start", dest="grid_start", type=float, default=None)
    p.add_argument("--grid-stop", dest="grid_stop", type=float, default=None)
    p.add_argument("--grid-points", dest="grid_points", type=int, default=None)

    return parser


COMMANDS = {
    "figure2": cmd_figure2,
    "figure3": cmd_figure3,
    "certify": cmd_certify,
    "guess": cmd_guess,
    "attack": cmd_attack,
    "export-sdpa": cmd_export_sdpa,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = effective_config(args)
        return COMMANDS[args.command](cfg)
    except OutsideRelaxationError as exc:
        log.error("behavior outside the relaxation: %s", exc)
        return EXIT_VALIDATION
    except RelaxationSolverError as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER
    except ValidationError as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    except (ValueError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
