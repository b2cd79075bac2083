"""Command-line front end: scenario configs, engine selection, CSV output.

Config files are INI-style key/value sections::

    [params]
    e0 = 0.0
    gamma_l = 0.05
    gamma_n = 1.0
    delta_omega = 8.0     ; or: w = 4.0 (delta_omega = 2 w)
    c = 1.0

    [engine]
    engine = analytic     ; analytic | ode | mc | all
    initial = eg          ; eg | ee
    t_max = 6.0
    n_steps = 601

    [ode]
    n_modes = 4096
    window_factor = 100.0
    dt = 0                ; 0 means automatic

    [mc]
    n_traj = 20000
    seed = 12345

    [output]
    events = false
    normalized = false

Every key has the default shown above; command-line flags override file
values.  Output CSV columns are ``t,p_L2L1,p_L2L2,p_L2N,visibility,engine``
with densities per unit length (multiplied by c and divided by gamma_n when
``--normalized`` is set, with t in units of 1/gamma_n).  Files are written
atomically and identical configs give byte-identical output.

Exit codes: 0 success, 2 invalid configuration, 3 output path not writable.
"""

from __future__ import annotations

import argparse
import configparser
import io
import os
import sys
import tempfile
from dataclasses import dataclass, replace

import numpy as np

from .model import Channel, ModelParams, SystemState
from .montecarlo import (
    GENERATOR_NAME,
    cascade_histogram,
    quantum_jump_trajectory,
    single_decay_histogram,
    trajectory_seeds,
)
from . import analytic
from .correlator import build_table, project_after_detection, visibility_series
from .oracle import default_ladders, integrate_ww

_ENGINES = ("analytic", "ode", "mc", "all")
_INITIALS = ("eg", "ee")
_CSV_HEADER = "t,p_L2L1,p_L2L2,p_L2N,visibility,engine"


class ConfigError(Exception):
    """Invalid scenario configuration; message names the offending field."""


@dataclass(frozen=True)
class ScenarioConfig:
    e0: float = 0.0
    gamma_l: float = 0.05
    gamma_n: float = 1.0
    delta_omega: float = 8.0
    c: float = 1.0
    engine: str = "analytic"
    initial: str = "eg"
    t_max: float = 6.0
    n_steps: int = 601
    n_modes: int = 4096
    window_factor: float = 100.0
    dt: float = 0.0
    n_traj: int = 20000
    seed: int = 12345
    out: str = "out.csv"
    events: bool = False
    normalized: bool = False

    def validate(self) -> None:
        if self.engine not in _ENGINES:
            raise ConfigError(f"[engine] engine must be one of {_ENGINES}, got {self.engine!r}")
        if self.initial not in _INITIALS:
            raise ConfigError(f"[engine] initial must be one of {_INITIALS}, got {self.initial!r}")
        if not self.t_max > 0:
            raise ConfigError(f"[engine] t_max must be > 0, got {self.t_max}")
        if self.n_steps < 2:
            raise ConfigError(f"[engine] n_steps must be >= 2, got {self.n_steps}")
        if self.gamma_l < 0 or self.gamma_n < 0:
            raise ConfigError("[params] gamma_l and gamma_n must be >= 0")
        if self.c <= 0:
            raise ConfigError(f"[params] c must be > 0, got {self.c}")
        if self.n_modes < 2:
            raise ConfigError(f"[ode] n_modes must be >= 2, got {self.n_modes}")
        if self.window_factor <= 0:
            raise ConfigError(f"[ode] window_factor must be > 0, got {self.window_factor}")
        if self.dt < 0:
            raise ConfigError(f"[ode] dt must be >= 0, got {self.dt}")
        if self.engine in ("mc", "all") and self.n_traj < 1:
            raise ConfigError(f"[mc] n_traj must be >= 1, got {self.n_traj}")

    def params(self) -> ModelParams:
        return ModelParams.from_beat_frequency(
            self.delta_omega, self.gamma_l, self.gamma_n, e0=self.e0, c=self.c
        )

    def t_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_steps)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp["params"] = {
            "e0": repr(self.e0),
            "gamma_l": repr(self.gamma_l),
            "gamma_n": repr(self.gamma_n),
            "delta_omega": repr(self.delta_omega),
            "c": repr(self.c),
        }
        cp["engine"] = {
            "engine": self.engine,
            "initial": self.initial,
            "t_max": repr(self.t_max),
            "n_steps": str(self.n_steps),
        }
        cp["ode"] = {
            "n_modes": str(self.n_modes),
            "window_factor": repr(self.window_factor),
            "dt": repr(self.dt),
        }
        cp["mc"] = {"n_traj": str(self.n_traj), "seed": str(self.seed)}
        cp["output"] = {
            "events": str(self.events).lower(),
            "normalized": str(self.normalized).lower(),
        }
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _get(cp: configparser.ConfigParser, section: str, key: str, cast, current):
    if not cp.has_option(section, key):
        return current
    raw = cp.get(section, key)
    try:
        if cast is bool:
            lowered = raw.strip().lower()
            if lowered in ("true", "1", "yes", "on"):
                return True
            if lowered in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from exc


def load_config_file(path: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    cfg = base or ScenarioConfig()
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"config file {path!r} not found or unreadable")
    known = {
        "params": {"e0", "gamma_l", "gamma_n", "delta_omega", "w", "c"},
        "engine": {"engine", "initial", "t_max", "n_steps"},
        "ode": {"n_modes", "window_factor", "dt"},
        "mc": {"n_traj", "seed"},
        "output": {"out", "events", "normalized"},
    }
    for section in cp.sections():
        if section not in known:
            raise ConfigError(f"unknown config section [{section}]")
        for key in cp.options(section):
            if key not in known[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
    if cp.has_option("params", "w") and cp.has_option("params", "delta_omega"):
        raise ConfigError("[params] give either w or delta_omega, not both")

    updates: dict = {}
    updates["e0"] = _get(cp, "params", "e0", float, cfg.e0)
    updates["gamma_l"] = _get(cp, "params", "gamma_l", float, cfg.gamma_l)
    updates["gamma_n"] = _get(cp, "params", "gamma_n", float, cfg.gamma_n)
    if cp.has_option("params", "w"):
        updates["delta_omega"] = 2.0 * _get(cp, "params", "w", float, cfg.delta_omega / 2.0)
    else:
        updates["delta_omega"] = _get(cp, "params", "delta_omega", float, cfg.delta_omega)
    updates["c"] = _get(cp, "params", "c", float, cfg.c)
    updates["engine"] = _get(cp, "engine", "engine", str, cfg.engine)
    updates["initial"] = _get(cp, "engine", "initial", str, cfg.initial)
    updates["t_max"] = _get(cp, "engine", "t_max", float, cfg.t_max)
    updates["n_steps"] = _get(cp, "engine", "n_steps", int, cfg.n_steps)
    updates["n_modes"] = _get(cp, "ode", "n_modes", int, cfg.n_modes)
    updates["window_factor"] = _get(cp, "ode", "window_factor", float, cfg.window_factor)
    updates["dt"] = _get(cp, "ode", "dt", float, cfg.dt)
    updates["n_traj"] = _get(cp, "mc", "n_traj", int, cfg.n_traj)
    updates["seed"] = _get(cp, "mc", "seed", int, cfg.seed)
    updates["out"] = _get(cp, "output", "out", str, cfg.out)
    updates["events"] = _get(cp, "output", "events", bool, cfg.events)
    updates["normalized"] = _get(cp, "output", "normalized", bool, cfg.normalized)
    return replace(cfg, **updates)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".qbeats-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _engine_columns(cfg: ScenarioConfig, engine: str):
    """Columns (p_L2L1, p_L2L2, p_L2N, visibility) on the scenario grid."""
    params = cfg.params()
    t = cfg.t_grid()
    if engine == "analytic":
        p1 = np.asarray(analytic.p_l2_l1(params, t), dtype=float)
        p2 = np.asarray(analytic.p_l2_l2(params, t), dtype=float)
        pn = np.asarray(analytic.p_l2_n(params, t), dtype=float)
        vis = np.asarray(analytic.visibility(params, t), dtype=float)
        return t, p1, p2, pn, vis
    if engine == "ode":
        ladders = default_ladders(params, cfg.window_factor, cfg.n_modes)
        initial = project_after_detection(SystemState.from_label("ee"), Channel.L2)
        result = integrate_ww(
            params,
            initial,
            ladders=ladders,
            t_final=float(t[-1]),
            dt=cfg.dt if cfg.dt > 0 else None,
            n_save=max(801, 4 * len(t)),
        )
        cols = {
            ch: np.interp(t, result.times, result.channel_density(ch)) for ch in Channel
        }
        table = _columns_as_table(params, t, cols, "ode")
        vis = _extracted_visibility(table, t)
        return t, cols[Channel.L1], cols[Channel.L2], cols[Channel.N], vis
    if engine == "mc":
        if cfg.initial == "ee":
            table = build_table(
                params, t, engine="mc", mc_options={"n_traj": cfg.n_traj, "seed": cfg.seed}
            )
            p1 = table[(Channel.L2, Channel.L1)].values
            p2 = table[(Channel.L2, Channel.L2)].values
            pn = table[(Channel.L2, Channel.N)].values
        else:
            # single-excitation start: every trajectory contributes, so the
            # statistics beat conditioning the cascade on a rare first photon
            h = float(t[1] - t[0])
            edges = np.concatenate([[max(t[0] - h / 2.0, 0.0)], t + h / 2.0])
            counts = single_decay_histogram(
                params, SystemState.from_label("eg"), cfg.n_traj, cfg.seed, edges
            )
            widths = np.diff(edges)
            scale = cfg.n_traj * widths * params.c
            p1 = counts[Channel.L1] / scale
            p2 = counts[Channel.L2] / scale
            pn = counts[Channel.N] / scale
        table = _columns_as_table(
            params, t, {Channel.L1: p1, Channel.L2: p2, Channel.N: pn}, "mc"
        )
        try:
            vis = _extracted_visibility(table, t)
        except ValueError:
            vis = np.full_like(t, np.nan)
        return t, p1, p2, pn, vis
    raise ConfigError(f"unknown engine {engine!r}")


def _columns_as_table(params, t, cols, engine):
    from .correlator import CorrelationSeries, CorrelationTable

    series = {}
    for second, values in cols.items():
        series[(Channel.L2, second)] = CorrelationSeries(t, values, engine, params)
    return CorrelationTable(params=params, t_grid=t, engine=engine, series=series)


def _extracted_visibility(table, t):
    times, values = visibility_series(table, (Channel.L2, Channel.L1))
    return np.interp(t, times, values, left=np.nan, right=np.nan)


def _write_csv(path: str, cfg: ScenarioConfig, engine: str, columns) -> None:
    t, p1, p2, pn, vis = columns
    params = cfg.params()
    if cfg.normalized and params.gamma_n > 0:
        scale = params.c / params.gamma_n
        t = t * params.gamma_n
        p1, p2, pn = p1 * scale, p2 * scale, pn * scale
    lines = [_CSV_HEADER]
    for i in range(len(t)):
        lines.append(
            ",".join(
                [_fmt(t[i]), _fmt(p1[i]), _fmt(p2[i]), _fmt(pn[i]), _fmt(vis[i]), engine]
            )
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def _write_events(path: str, cfg: ScenarioConfig) -> None:
    params = cfg.params()
    lines = [
        f"# generator: {GENERATOR_NAME}",
        f"# master_seed: {cfg.seed}",
        "trajectory_id,first_channel,first_time,second_channel,second_time",
    ]
    if cfg.initial == "ee":
        hist = cascade_histogram(params, cfg.n_traj, cfg.seed, np.array([0.0, cfg.t_max]))
        for rec in hist.records:
            lines.append(
                ",".join(
                    [
                        str(rec.trajectory_id),
                        rec.first.value if rec.first else "",
                        _fmt(rec.first_time) if rec.first_time is not None else "",
                        rec.second.value if rec.second else "",
                        _fmt(rec.second_time) if rec.second_time is not None else "",
                    ]
                )
            )
    else:
        initial = SystemState.from_label("eg")
        for i, sub_seed in enumerate(trajectory_seeds(cfg.seed, cfg.n_traj)):
            traj = quantum_jump_trajectory(params, initial, sub_seed)
            ev = traj.events
            first = ev[0] if ev else None
            lines.append(
                ",".join(
                    [
                        str(i),
                        first.channel.value if first else "",
                        _fmt(first.time) if first else "",
                        "",
                        "",
                    ]
                )
            )
    _atomic_write(path, "\n".join(lines) + "\n")


def _stem_path(out: str, suffix: str) -> str:
    root, ext = os.path.splitext(out)
    return f"{root}_{suffix}{ext or '.csv'}"


def _deviation_report(cfg: ScenarioConfig, results: dict) -> str:
    names = ["p_L2L1", "p_L2L2", "p_L2N", "visibility"]
    lines = [
        "engine comparison report",
        f"generator: {GENERATOR_NAME}",
        f"master_seed: {cfg.seed}",
        f"params: gamma_l={cfg.gamma_l} gamma_n={cfg.gamma_n} "
        f"delta_omega={cfg.delta_omega} e0={cfg.e0} c={cfg.c}",
        f"grid: t_max={cfg.t_max} n_steps={cfg.n_steps}",
        "",
    ]
    engines = sorted(results)
    for i, a in enumerate(engines):
        for b in engines[i + 1 :]:
            lines.append(f"[{a} vs {b}]")
            for j, name in enumerate(names):
                xa, xb = results[a][j + 1], results[b][j + 1]
                mask = np.isfinite(xa) & np.isfinite(xb)
                if not np.any(mask):
                    lines.append(f"  {name}: no overlapping finite samples")
                    continue
                diff = np.abs(xa[mask] - xb[mask])
                lines.append(
                    f"  {name}: max_abs_dev = {_fmt(float(diff.max()))} "
                    f"mean_abs_dev = {_fmt(float(diff.mean()))}"
                )
            lines.append("")
    return "\n".join(lines) + "\n"


def run(cfg: ScenarioConfig) -> int:
    """Execute a scenario; returns a process exit code."""
    try:
        cfg.validate()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    engines = ["analytic", "ode", "mc"] if cfg.engine == "all" else [cfg.engine]
    try:
        results = {}
        for engine in engines:
            results[engine] = _engine_columns(cfg, engine)
        if cfg.engine == "all":
            for engine in engines:
                _write_csv(_stem_path(cfg.out, engine), cfg, engine, results[engine])
            _atomic_write(_stem_path(cfg.out, "report").rsplit(".", 1)[0] + ".txt",
                          _deviation_report(cfg, results))
        else:
            _write_csv(cfg.out, cfg, cfg.engine, results[cfg.engine])
        if cfg.events and ("mc" in engines):
            _write_events(_stem_path(cfg.out, "events").rsplit(".", 1)[0] + ".txt", cfg)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


FIGURE1_DEFAULTS = dict(
    e0=0.0,
    gamma_l=0.05,
    gamma_n=1.0,
    delta_omega=8.0,
    c=1.0,
    engine="analytic",
    initial="eg",
    t_max=6.0,
    n_steps=1201,
    out="figure1.csv",
)


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file; flags override file values")
    p.add_argument("--engine", choices=_ENGINES, help="computation engine")
    p.add_argument("--seed", type=int, help="Monte Carlo master seed")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--t-max", type=float, dest="t_max", help="time span of the grid")
    p.add_argument("--n-steps", type=int, dest="n_steps", help="grid points")
    p.add_argument("--n-traj", type=int, dest="n_traj", help="Monte Carlo trajectories")
    p.add_argument("--gamma-l", type=float, dest="gamma_l", help="local emission rate")
    p.add_argument("--gamma-n", type=float, dest="gamma_n", help="far-field emission rate")
    p.add_argument("--delta-omega", type=float, dest="delta_omega", help="beat frequency")
    p.add_argument("--initial", choices=_INITIALS, help="initial condition")
    p.add_argument("--events", action="store_true", default=None,
                   help="also write the Monte Carlo event file")
    p.add_argument("--normalized", action="store_true", default=None,
                   help="report rates in units of gamma_n (t in units of 1/gamma_n)")
    p.add_argument("--dump-config", action="store_true",
                   help="print the effective config and exit")


def _apply_flags(cfg: ScenarioConfig, args: argparse.Namespace) -> ScenarioConfig:
    overrides = {}
    for key in ("engine", "seed", "out", "t_max", "n_steps", "n_traj", "gamma_l",
                "gamma_n", "delta_omega", "initial", "events", "normalized"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return replace(cfg, **overrides)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qbeats",
        description="Conditional photon correlations of two coupled emitters",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario from config/flags")
    _add_common_flags(p_run)

    p_fig = sub.add_parser(
        "figure1",
        help="preset: local beat correlations at gamma_n=1, gamma_l=0.05, delta_omega=8",
    )
    _add_common_flags(p_fig)

    args = parser.parse_args(argv)
    try:
        if args.command == "figure1":
            cfg = ScenarioConfig(**FIGURE1_DEFAULTS)
        else:
            cfg = ScenarioConfig()
        if args.config:
            cfg = load_config_file(args.config, base=cfg)
        cfg = _apply_flags(cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.dump_config:
        try:
            cfg.validate()
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        sys.stdout.write(cfg.to_ini())
        return 0
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
