"""Experiment configuration files.

Flat ``key = value`` text, one entry per line, ``#`` starts a comment::

    preset = fig4-left          # optional; fills graph and parameters
    graph = net.graph           # graph file (see graphpde.network)
    p = 1.5
    q = 2
    lambda = 3
    u0.x1 = 2                   # one line per vertex; missing vertices are 0
    integrator.t_horizon = 2
    integrator.rel_tol = 1e-8
    eigen.seed = 0
    outputs = out

``integrator.*`` and ``eigen.*`` accept every field of
:class:`~graphpde.dynamics.IntegratorConfig` and
:class:`~graphpde.eigen.EigenSolveConfig`.  Later lines override earlier
ones.  Values set explicitly win over preset values.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .dynamics import IntegratorConfig, ProblemSpec
from .eigen import EigenSolveConfig
from .network import Network, load_network
from .presets import get_preset

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config", "serialize_config"]


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


_INT_FIELDS = {"snapshot_stride", "max_steps", "restarts", "max_iters", "seed"}


@dataclass(frozen=True)
class ExperimentConfig:
    p: float | None = None
    q: float | None = None
    lam: float | None = None
    u0: dict[str, float] = field(default_factory=dict)
    graph_path: str | None = None
    preset: str | None = None
    integrator: IntegratorConfig = IntegratorConfig()
    eigen: EigenSolveConfig = EigenSolveConfig()
    outputs: str | None = None

    def __post_init__(self):
        if self.p is not None and not self.p > 1:
            raise ConfigError(f"p must be > 1, got {self.p}")
        if self.q is not None and not self.q > 0:
            raise ConfigError(f"q must be > 0, got {self.q}")
        if self.lam is not None and not self.lam > 0:
            raise ConfigError(f"lambda must be > 0, got {self.lam}")
        if self.preset is not None:
            get_preset(self.preset)

    @classmethod
    def from_preset(cls, name: str, **overrides) -> "ExperimentConfig":
        pr = get_preset(name)
        labels = pr.network().labels
        base = dict(
            preset=name, p=pr.p, q=pr.q, lam=pr.lam,
            u0=dict(zip(labels, pr.u0)),
            integrator=IntegratorConfig(t_horizon=pr.horizon),
        )
        base.update(overrides)
        return cls(**base)

    def network(self) -> Network:
        if self.graph_path is not None:
            return load_network(self.graph_path)
        if self.preset is not None:
            return get_preset(self.preset).network()
        raise ConfigError("no graph: set 'graph' or 'preset'")

    def problem(self, net: Network | None = None) -> ProblemSpec:
        """Validated :class:`ProblemSpec`; every ``u0`` vertex must exist in the graph."""
        net = net or self.network()
        for name in ("p", "q", "lam"):
            if getattr(self, name) is None:
                raise ConfigError(f"missing parameter {'lambda' if name == 'lam' else name}")
        unknown = sorted(set(self.u0) - set(net.labels))
        if unknown:
            raise ConfigError(f"u0 refers to unknown vertices: {', '.join(unknown)}")
        try:
            return ProblemSpec(net, self.p, self.q, self.lam, {v: self.u0.get(v, 0.0) for v in net.labels})
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _number(key: str, text: str):
    try:
        if key in _INT_FIELDS:
            return int(text)
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {text!r}") from None


def parse_config(text: str) -> ExperimentConfig:
    top: dict = {}
    u0: dict[str, float] = {}
    integ: dict = {}
    eig: dict = {}
    integ_fields = {f.name for f in dataclasses.fields(IntegratorConfig)}
    eig_fields = {f.name for f in dataclasses.fields(EigenSolveConfig)}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key.startswith("u0."):
            u0[key[3:]] = _number(key, value)
        elif key.startswith("integrator."):
            name = key.split(".", 1)[1]
            if name not in integ_fields:
                raise ConfigError(f"line {lineno}: unknown integrator field {name!r}")
            integ[name] = _number(name, value)
        elif key.startswith("eigen."):
            name = key.split(".", 1)[1]
            if name not in eig_fields:
                raise ConfigError(f"line {lineno}: unknown eigen field {name!r}")
            eig[name] = _number(name, value)
        elif key in ("p", "q"):
            top[key] = _number(key, value)
        elif key == "lambda":
            top["lam"] = _number(key, value)
        elif key == "graph":
            top["graph_path"] = value
        elif key in ("preset", "outputs"):
            top[key] = value
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    return build_config(top, u0, integ, eig)


def build_config(top: dict, u0: dict, integ: dict, eig: dict, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Merge explicit settings over ``base`` (or over the named preset)."""
    try:
        if base is None:
            preset = top.get("preset")
            base = ExperimentConfig.from_preset(preset) if preset else ExperimentConfig()
        elif top.get("preset") and top["preset"] != base.preset:
            base = ExperimentConfig.from_preset(top["preset"])
        merged_u0 = dict(base.u0)
        merged_u0.update(u0)
        return dataclasses.replace(
            base,
            **top,
            u0=merged_u0,
            integrator=dataclasses.replace(base.integrator, **integ),
            eigen=dataclasses.replace(base.eigen, **eig),
        )
    except ConfigError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(str(exc).strip("'\"")) from exc


def serialize_config(cfg: ExperimentConfig) -> str:
    """Text form that :func:`parse_config` reads back to an equal config."""
    lines = []
    if cfg.preset is not None:
        lines.append(f"preset = {cfg.preset}")
    if cfg.graph_path is not None:
        lines.append(f"graph = {cfg.graph_path}")
    for key, val in (("p", cfg.p), ("q", cfg.q), ("lambda", cfg.lam)):
        if val is not None:
            lines.append(f"{key} = {val!r}")
    for v, x in cfg.u0.items():
        lines.append(f"u0.{v} = {float(x)!r}")
    for f in dataclasses.fields(IntegratorConfig):
        lines.append(f"integrator.{f.name} = {getattr(cfg.integrator, f.name)!r}")
    for f in dataclasses.fields(EigenSolveConfig):
        lines.append(f"eigen.{f.name} = {getattr(cfg.eigen, f.name)!r}")
    if cfg.outputs is not None:
        lines.append(f"outputs = {cfg.outputs}")
    return "\n".join(lines) + "\n"


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())
