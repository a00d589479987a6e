"""Scenario configuration, execution and output (CSV time series + text report)."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from . import analysis
from .core import (
    EXCITED,
    GROUND,
    BlochVector,
    Constant,
    FieldDrive,
    InvalidStateError,
    Rectangular,
    StateVector2,
    SystemParams,
)
from .propagators import FORMULATIONS, IntegratorConfig, Trajectory, simulate

CHECKS = ("equivalence", "energy", "pi_pulse", "phase", "purity")
CSV_HEADER = "t,E,u,v,w,P,J,U"
PURITY_TOL = 1e-9

DEFAULTS_TEXT = """\
# Driven two-level dipole scenario (hbar = 1).
# One key=value per line; '#' starts a comment.

# transition frequency and dipole matrix element
omega0=1
dipole=1
# drive E(t) = envelope(t) * e0 * cos(omega t + phase)
e0=0.02
omega=1
phase=0
# constant | rect:t_on:t_off
envelope=constant
# comma list of liouville, schrodinger, bloch, pju
formulations=liouville,bloch
# ground | excited | bloch(u,v,w) | state(re_a,im_a,re_b,im_b)
init=ground
# run length; dt defaults to 1e-3 * 2 pi / omega0
t_end=320
# dt=
sample_every=1
# comma list of equivalence, energy, pi_pulse, phase, purity (empty = none)
checks=
tol_equiv=1e-8
# absolute, in energy units; defaults to 1e-6 * hbar * omega0
# tol_energy=
# relative deviation of t_pi from pi hbar / (D e0)
tol_pi=0.01
output_path=out
"""

KEYS = (
    "omega0", "dipole", "e0", "omega", "phase", "envelope", "formulations", "init",
    "t_end", "dt", "sample_every", "checks", "tol_equiv", "tol_energy", "tol_pi", "output_path",
)


class ConfigError(ValueError):
    """Config parse or validation failure, naming the line and/or key."""

    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.key = key


InitSpec = Union[BlochVector, StateVector2]


@dataclass(frozen=True)
class ScenarioConfig:
    sys: SystemParams
    drive: FieldDrive
    formulations: Tuple[str, ...]
    init: InitSpec
    t_end: float
    dt: float
    sample_every: int
    checks: Tuple[str, ...] = ()
    tol_equiv: float = 1e-8
    tol_energy: float = 1e-6
    tol_pi: float = 0.01
    output_path: Path = Path("out")


@dataclass
class ScenarioResult:
    status: int
    report: List[str]
    trajectories: Dict[str, Trajectory] = field(default_factory=dict)


def _raw_pairs(text: str) -> Dict[str, Tuple[str, int]]:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {raw.strip()!r}", line=lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", line=lineno)
        if key not in KEYS:
            raise ConfigError("unknown key", line=lineno, key=key)
        if key in pairs:
            raise ConfigError("duplicate key", line=lineno, key=key)
        pairs[key] = (value, lineno)
    return pairs


def _float(pairs, key, default):
    if key not in pairs or pairs[key][0] == "":
        return default
    value, line = pairs[key]
    try:
        x = float(value)
    except ValueError:
        raise ConfigError(f"not a number: {value!r}", line=line, key=key) from None
    if not math.isfinite(x):
        raise ConfigError(f"must be finite, got {value!r}", line=line, key=key)
    return x


def _list(pairs, key, default, allowed):
    if key not in pairs:
        return tuple(default)
    value, line = pairs[key]
    items = tuple(s.strip() for s in value.split(",") if s.strip())
    for item in items:
        if item not in allowed:
            raise ConfigError(f"unknown entry {item!r}; expected any of {', '.join(allowed)}", line=line, key=key)
    if len(set(items)) != len(items):
        raise ConfigError("repeated entry", line=line, key=key)
    return items


_CALL = re.compile(r"^(\w+)\((.*)\)$")


def _parse_init(value: str, line: Optional[int]) -> InitSpec:
    v = value.replace(" ", "")
    if v in ("", "ground"):
        return GROUND
    if v == "excited":
        return EXCITED
    m = _CALL.match(v)
    if not m or m.group(1) not in ("bloch", "state"):
        raise ConfigError(f"unrecognized init {value!r}", line=line, key="init")
    try:
        nums = [float(x) for x in m.group(2).split(",")]
    except ValueError:
        raise ConfigError(f"non-numeric argument in {value!r}", line=line, key="init") from None
    try:
        if m.group(1) == "bloch":
            if len(nums) != 3:
                raise ConfigError("bloch(u,v,w) takes 3 numbers", line=line, key="init")
            return BlochVector(*nums).validate()
        if len(nums) != 4:
            raise ConfigError("state(re_a,im_a,re_b,im_b) takes 4 numbers", line=line, key="init")
        return StateVector2(complex(nums[0], nums[1]), complex(nums[2], nums[3])).validate()
    except InvalidStateError as exc:
        raise ConfigError(str(exc), line=line, key="init") from None


def _parse_envelope(value: str, line):
    v = value.strip()
    if v in ("", "constant"):
        return Constant()
    parts = v.split(":")
    if parts[0] == "rect" and len(parts) == 3:
        try:
            return Rectangular(float(parts[1]), float(parts[2]))
        except ValueError as exc:
            raise ConfigError(str(exc), line=line, key="envelope") from None
    raise ConfigError(f"expected constant or rect:t_on:t_off, got {value!r}", line=line, key="envelope")


def parse_config(text: str) -> ScenarioConfig:
    """Parse a key=value scenario document and apply defaults."""
    pairs = _raw_pairs(text)
    line = lambda k: pairs.get(k, (None, None))[1]  # noqa: E731

    omega0 = _float(pairs, "omega0", 1.0)
    dipole = _float(pairs, "dipole", 1.0)
    try:
        sys = SystemParams(omega0, dipole)
    except ValueError as exc:
        key = "omega0" if "omega0" in str(exc) else "dipole"
        raise ConfigError(str(exc), line=line(key), key=key) from None

    e0 = _float(pairs, "e0", 0.02)
    omega = _float(pairs, "omega", omega0)
    phase = _float(pairs, "phase", 0.0)
    envelope = _parse_envelope(pairs["envelope"][0], line("envelope")) if "envelope" in pairs else Constant()
    try:
        drive = FieldDrive(e0, omega, envelope, phase)
    except ValueError as exc:
        key = next((k for k in ("e0", "omega", "phase") if k in str(exc)), "e0")
        raise ConfigError(str(exc), line=line(key), key=key) from None

    formulations = _list(pairs, "formulations", ("liouville", "bloch"), FORMULATIONS)
    if not formulations:
        raise ConfigError("at least one formulation is required", line=line("formulations"), key="formulations")
    init = _parse_init(pairs["init"][0], line("init")) if "init" in pairs else GROUND
    if "schrodinger" in formulations and isinstance(init, BlochVector) and abs(init.norm - 1.0) > 1e-9:
        raise ConfigError("schrodinger needs a pure initial state (|b| = 1)", line=line("init"), key="init")

    t_end = _float(pairs, "t_end", 320.0)
    if t_end <= 0:
        raise ConfigError("must be > 0", line=line("t_end"), key="t_end")
    dt = _float(pairs, "dt", 1e-3 * 2.0 * math.pi / omega0)
    if dt <= 0:
        raise ConfigError("must be > 0", line=line("dt"), key="dt")
    se = _float(pairs, "sample_every", 1)
    if se != int(se) or se < 1:
        raise ConfigError("must be an integer >= 1", line=line("sample_every"), key="sample_every")

    checks = _list(pairs, "checks", (), CHECKS)
    if "equivalence" in checks and len(formulations) < 2:
        raise ConfigError("equivalence check needs at least two formulations", line=line("checks"), key="checks")

    tols = {}
    for key, default in (("tol_equiv", 1e-8), ("tol_energy", 1e-6 * omega0), ("tol_pi", 0.01)):
        tols[key] = _float(pairs, key, default)
        if tols[key] <= 0:
            raise ConfigError("must be > 0", line=line(key), key=key)

    out = pairs.get("output_path", ("out", None))[0] or "out"
    return ScenarioConfig(sys, drive, formulations, init, t_end, dt, int(se), checks, output_path=Path(out), **tols)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(traj: Trajectory, path: Path) -> None:
    cols = (traj.times, traj.field, traj.u, traj.v, traj.w, traj.P, traj.J, traj.U)
    lines = [CSV_HEADER]
    lines.extend(",".join(map(_fmt, row)) for row in zip(*cols))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def _line(name, ok, measured, tol):
    return f"{name} {'PASS' if ok else 'FAIL'} measured={measured:.6g} tol={tol:.6g}"


def _run_checks(cfg: ScenarioConfig, trajs: Dict[str, Trajectory]) -> List[str]:
    report = []
    ref = trajs[cfg.formulations[0]]
    for check in cfg.checks:
        if check == "equivalence":
            err = max(analysis.check_equivalence(ref, trajs[f], cfg.tol_equiv).max_abs_error for f in cfg.formulations[1:])
            report.append(_line(check, err <= cfg.tol_equiv, err, cfg.tol_equiv))
        elif check == "energy":
            res = max(analysis.energy_audit(t) for t in trajs.values())
            report.append(_line(check, res <= cfg.tol_energy, res, cfg.tol_energy))
        elif check == "purity":
            drift = max(float(abs(t.purity - t.purity[0]).max()) for t in trajs.values())
            report.append(_line(check, drift <= PURITY_TOL, drift, PURITY_TOL))
        elif check == "pi_pulse":
            t_pi = analysis.find_pi_pulse_time(cfg.sys, cfg.drive, IntegratorConfig(cfg.dt))
            rel = abs(t_pi / analysis.rwa_pi_time(cfg.sys, cfg.drive) - 1.0)
            report.append(_line(check, rel <= cfg.tol_pi, rel, cfg.tol_pi))
        elif check == "phase":
            # measured: |J|-envelope peak vs U = hbar omega0 / 2 crossing, in drive periods
            segs = analysis.classify_phase(ref)
            expected = [("absorption", "out_of_phase"), ("emission", "in_phase")]
            ok = bool(segs) and all((s.kind, s.phase_class) == expected[i % 2] for i, s in enumerate(segs))
            t_env, t_half = analysis.coupling_sign_change(ref)
            offset = abs(t_env - t_half) * cfg.drive.omega / (2.0 * math.pi)
            report.append(_line(check, ok and offset <= 1.0, offset, 1.0))
    return report


def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    """Run every formulation, write ``<output_path>/<formulation>.csv`` and ``report.txt``.

    Status is 0 iff every requested check passes; 1 if one fails.
    Simulation or analysis errors propagate to the caller.
    """
    out = Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    icfg = IntegratorConfig(cfg.dt)
    trajs = {}
    for f in cfg.formulations:
        trajs[f] = simulate(f, cfg.init, cfg.sys, cfg.drive, cfg.t_end, icfg, cfg.sample_every)
        write_csv(trajs[f], out / f"{f}.csv")
    report = _run_checks(cfg, trajs)
    (out / "report.txt").write_text("".join(line + "\n" for line in report))
    status = 0 if all(" PASS " in line for line in report) else 1
    return ScenarioResult(status, report, trajs)
