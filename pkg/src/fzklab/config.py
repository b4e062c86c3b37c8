"""Experiment configuration: TOML schema, validation, and the runner.

A config file fully determines a run; the CLI only overrides the output
directory and the seed.  Outputs are deterministic: identical config and
seed produce byte-identical CSV/JSON.
"""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

import numpy as np

from . import __version__
from .evolve import (
    SolverConfig,
    config_digest,
    make_initial_data,
    save_checkpoint,
    solve,
)
from .monitors import (
    DiagnosticWriter,
    localized_sobolev,
    propagation_monitor,
    smoothing_bound_report,
    smoothing_integral,
)
from .spectral import Field, Grid
from .weights import (
    Channel,
    ConeCondition,
    DirectionalWeight,
    HalfSpace,
    PlateauProfile,
    UnitBox,
    check_cone,
)


class ConfigError(ValueError):
    """Invalid experiment configuration; carries every violation found."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class DiagnosticSpec:
    """One registered diagnostic.

    kinds: "halfspace" | "channel" | "box" (per-record localized norms),
    "smoothing" (weighted time integrals), "propagation" (moving-window
    monitor).  Unused fields stay at their defaults.
    """

    kind: str
    label: str
    r: float = 0.0
    s: float = 0.0
    nu: tuple = (1.0, 0.0)
    omega: float = 0.0
    beta: float = 0.0
    eps: float = 0.25
    tau: float = 1.25
    corner: tuple = (0, 0)
    shift: float = 0.0
    plateau: float = 1.0
    ramp_width: float = 1.0
    channel_index: Optional[float] = None
    skip_initial: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    dimension: int
    points: tuple
    length: tuple
    origin: tuple
    alpha: float
    initial_name: str
    initial_params: dict
    dt: float
    T: float
    record_every: int
    nonlinear: bool
    output_dir: str
    seed: int
    diagnostics: tuple = ()
    write_checkpoints: bool = True

    def grid(self) -> Grid:
        return Grid(self.points, self.length, self.origin)

    def solver(self) -> SolverConfig:
        return SolverConfig(alpha=self.alpha, dt=self.dt, T=self.T,
                            record_every=self.record_every,
                            nonlinear=self.nonlinear)

    def digest(self) -> str:
        return config_digest(asdict_config(self))


def asdict_config(cfg: ExperimentConfig) -> dict:
    out = asdict(cfg)
    out["diagnostics"] = [asdict(d) for d in cfg.diagnostics]
    return out


def _as_axis_tuple(value, n: int) -> tuple:
    if isinstance(value, (int, float)):
        return (value,) * n
    return tuple(value)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a TOML experiment configuration."""
    data = _toml.loads(text)
    violations: List[str] = []

    def need(section: str, key: str, default=None):
        sec = data.get(section, {})
        if key not in sec and default is None:
            violations.append(f"missing [{section}] {key}")
            return None
        return sec.get(key, default)

    alpha = data.get("alpha")
    if alpha is None:
        violations.append("missing top-level alpha")
        alpha = 1.0
    elif not 0.0 < float(alpha) <= 2.0:
        violations.append(f"alpha must be in (0, 2], got {alpha}")

    dim = int(need("grid", "dimension", 2))
    points = need("grid", "points")
    length = need("grid", "length")
    origin = need("grid", "origin", 0.0)
    if dim not in (2, 3):
        violations.append(f"grid dimension must be 2 or 3, got {dim}")

    name = need("initial_data", "name")
    params = data.get("initial_data", {}).get("params", {})

    dt = need("solver", "dt")
    T = need("solver", "T")
    record_every = int(need("solver", "record_every", 10))
    nonlinear = bool(data.get("solver", {}).get("nonlinear", True))
    if dt is not None and dt <= 0:
        violations.append("solver dt must be positive")
    if dt is not None and T is not None and T < dt:
        violations.append("solver T must be >= dt")
    if record_every < 1:
        violations.append("solver record_every must be >= 1")

    out_dir = data.get("output", {}).get("directory", "fzk-out")
    write_ckpt = bool(data.get("output", {}).get("checkpoints", True))
    seed = int(data.get("seed", 0))

    diags = []
    for i, d in enumerate(data.get("diagnostics", [])):
        kind = d.get("kind")
        if kind not in ("halfspace", "channel", "box", "smoothing", "propagation"):
            violations.append(f"diagnostics[{i}]: unknown kind {kind!r}")
            continue
        label = d.get("label", f"{kind}_{i}")
        spec = DiagnosticSpec(
            kind=kind,
            label=label,
            r=float(d.get("r", 0.0)),
            s=float(d.get("s", 0.0)),
            nu=tuple(float(v) for v in d.get("nu", (1.0,) + (0.0,) * (dim - 1))),
            omega=float(d.get("omega", 0.0)),
            beta=float(d.get("beta", 0.0)),
            eps=float(d.get("eps", 0.25)),
            tau=float(d.get("tau", 1.25)),
            corner=tuple(int(v) for v in d.get("corner", (0,) * dim)),
            shift=float(d.get("shift", 0.0)),
            plateau=float(d.get("plateau", 1.0)),
            ramp_width=float(d.get("ramp_width", 1.0)),
            channel_index=(float(d["channel_index"])
                           if "channel_index" in d else None),
            skip_initial=bool(d.get("skip_initial", False)),
        )
        if len(spec.nu) != dim:
            violations.append(f"diagnostics[{i}] ({label}): nu has wrong dimension")
        if kind in ("channel", "propagation") and spec.tau <= spec.eps:
            violations.append(f"diagnostics[{i}] ({label}): tau must exceed eps")
        if kind == "propagation" and spec.tau < 5 * spec.eps:
            violations.append(f"diagnostics[{i}] ({label}): tau must be >= 5*eps")
        if (kind in ("smoothing", "propagation") and alpha is not None
                and 0.0 < float(alpha) <= 2.0 and len(spec.nu) == dim):
            cls = check_cone(ConeCondition(spec.nu, float(alpha)))
            if not cls.admissible:
                violations.append(
                    f"diagnostics[{i}] ({label}): direction fails the cone "
                    f"condition ({cls.reason})")
        diags.append(spec)

    if violations:
        raise ConfigError(violations)

    return ExperimentConfig(
        dimension=dim,
        points=tuple(int(p) for p in _as_axis_tuple(points, dim)),
        length=tuple(float(L) for L in _as_axis_tuple(length, dim)),
        origin=tuple(float(o) for o in _as_axis_tuple(origin, dim)),
        alpha=float(alpha),
        initial_name=str(name),
        initial_params=dict(params),
        dt=float(dt),
        T=float(T),
        record_every=record_every,
        nonlinear=nonlinear,
        output_dir=str(out_dir),
        seed=seed,
        diagnostics=tuple(diags),
        write_checkpoints=write_ckpt,
    )


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


# ---------------------------------------------------------------------------
# Serialization (round-trip partner of parse_config)
# ---------------------------------------------------------------------------

def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g") if v != int(v) else f"{v:.1f}"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v)}")


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = [f"alpha = {_toml_value(cfg.alpha)}", f"seed = {cfg.seed}", ""]
    lines += ["[grid]",
              f"dimension = {cfg.dimension}",
              f"points = {_toml_value(list(cfg.points))}",
              f"length = {_toml_value(list(cfg.length))}",
              f"origin = {_toml_value(list(cfg.origin))}", ""]
    lines += ["[initial_data]", f'name = {_toml_value(cfg.initial_name)}']
    if cfg.initial_params:
        lines.append("[initial_data.params]")
        for k, v in cfg.initial_params.items():
            lines.append(f"{k} = {_toml_value(v)}")
    lines.append("")
    lines += ["[solver]",
              f"dt = {_toml_value(cfg.dt)}",
              f"T = {_toml_value(cfg.T)}",
              f"record_every = {cfg.record_every}",
              f"nonlinear = {_toml_value(cfg.nonlinear)}", ""]
    lines += ["[output]",
              f'directory = {_toml_value(cfg.output_dir)}',
              f"checkpoints = {_toml_value(cfg.write_checkpoints)}", ""]
    for d in cfg.diagnostics:
        lines.append("[[diagnostics]]")
        lines.append(f'kind = {_toml_value(d.kind)}')
        lines.append(f'label = {_toml_value(d.label)}')
        for key in ("r", "s", "omega", "beta", "eps", "tau", "shift",
                    "plateau", "ramp_width"):
            lines.append(f"{key} = {_toml_value(getattr(d, key))}")
        lines.append(f"nu = {_toml_value(list(d.nu))}")
        lines.append(f"corner = {_toml_value(list(d.corner))}")
        if d.channel_index is not None:
            lines.append(f"channel_index = {_toml_value(d.channel_index)}")
        lines.append(f"skip_initial = {_toml_value(d.skip_initial)}")
        lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

def _region_for(spec: DiagnosticSpec):
    if spec.kind == "halfspace":
        return HalfSpace(spec.nu, spec.beta + spec.eps)
    if spec.kind == "channel":
        return Channel(spec.nu, spec.beta + spec.eps, spec.beta + spec.tau)
    if spec.kind == "box":
        return UnitBox(spec.corner)
    raise ValueError(spec.kind)


def _weight_for(spec: DiagnosticSpec) -> DirectionalWeight:
    return DirectionalWeight(
        spec.nu, shift=spec.shift,
        profile=PlateauProfile(spec.plateau, spec.ramp_width))


def run_experiment(cfg: ExperimentConfig,
                   output_dir: Optional[str] = None) -> dict:
    """Execute a configured experiment; returns the summary payload."""
    grid = cfg.grid()
    u0 = make_initial_data(cfg.initial_name, grid, cfg.initial_params)
    out = Path(output_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    digest = cfg.digest()

    writer = DiagnosticWriter(cfg.alpha, {
        "config_hash": digest,
        "version": __version__,
        "seed": cfg.seed,
        "grid_points": list(cfg.points),
        "grid_length": list(cfg.length),
        "alpha": cfg.alpha,
    })

    region_specs = [d for d in cfg.diagnostics
                    if d.kind in ("halfspace", "channel", "box")]
    region_objs = {d.label: (_region_for(d), d) for d in region_specs}

    def hook(t: float, u: Field):
        localized = {}
        for label, (region, d) in region_objs.items():
            omega = 0.0 if d.kind == "box" else d.omega
            localized[label] = localized_sobolev(u, d.r, region, t, omega)
        writer.observe(t, u, localized)

    if cfg.write_checkpoints:
        save_checkpoint(out / "initial.ckpt", u0, 0.0, cfg.alpha, digest)

    traj = solve(u0, cfg.solver(), hooks=[hook])

    extra = {"diagnostics": {}}
    for d in cfg.diagnostics:
        if d.kind == "smoothing":
            w = _weight_for(d)
            res = smoothing_integral(traj, d.s, cfg.alpha, w, d.omega,
                                     d.skip_initial)
            cone = ConeCondition(d.nu, cfg.alpha)
            rep = smoothing_bound_report(traj, d.s, cfg.alpha, w, cone,
                                         omega=d.omega,
                                         skip_initial=d.skip_initial)
            extra["diagnostics"][d.label] = {
                "kind": "smoothing",
                "gain_term": res.gain_term,
                "x1_term": res.x1_term,
                "homogeneous_term": res.homogeneous_term,
                "lambda": rep.lam,
                "lhs_time_integral": rep.lhs_time_integral,
                "rhs_surrogate": rep.rhs_surrogate,
                "ratio": rep.ratio,
            }
        elif d.kind == "propagation":
            res = propagation_monitor(traj, d.r, d.beta, d.eps, d.tau,
                                      d.nu, d.omega, d.channel_index)
            extra["diagnostics"][d.label] = {
                "kind": "propagation",
                "sup_half_space": res.sup_half_space,
                "sup_time": res.sup_time,
                "channel_integral": res.channel_integral,
            }

    extra["boundary_warning"] = bool(traj.meta.get("boundary_warning", False))
    extra["stability_number"] = traj.meta["stability_number"]
    if not cfg.nonlinear:
        from .evolve import linear_propagator
        from .spectral import apply_multiplier

        final = traj.final()
        exact = apply_multiplier(
            linear_propagator(grid, cfg.alpha, final.t), u0)
        denom = max(exact.l2_norm(), 1e-300)
        extra["linear_error"] = (final.u - exact).l2_norm() / denom

    if cfg.write_checkpoints:
        save_checkpoint(out / "final.ckpt", traj.final().u, traj.final().t,
                        cfg.alpha, digest)
    writer.write_csv(out / "records.csv")
    writer.write_summary(out / "summary.json", extra)
    return extra
