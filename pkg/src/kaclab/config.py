"""Run configuration: sectioned key/value files (INI) with JSON accepted.

Every field has a documented default and the file representation
round-trips losslessly (parse -> emit -> parse is the identity), which
keeps scenario files diffable under version control.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .kernel import KernelSpec
from .spectral import Gaussian, GridSpec, Indicator, TwoBump

PROFILE_KINDS = ("gaussian", "indicator", "two_bump")
SCHEMES = ("rk4", "rk23_adaptive")
KERNEL_FAMILIES = ("power_law", "debye_yukawa", "truncated_power_law")


@dataclass(frozen=True)
class KernelBlock:
    family: str = "power_law"
    C0: float = 1.0
    s: float = 0.25
    m: float = 1.0
    theta_cut: float = 0.1
    tol: float = 1e-9

    def to_spec(self) -> KernelSpec:
        return KernelSpec(family=self.family, C0=self.C0, s=self.s,
                          m=self.m, theta_cut=self.theta_cut)


@dataclass(frozen=True)
class GridBlock:
    xi_max: float = 20.0
    n: int = 256
    v_max: float = 8.0
    interp_order: int = 12

    def to_spec(self) -> GridSpec:
        return GridSpec(xi_max=self.xi_max, n=self.n, v_max=self.v_max,
                        interp_order=self.interp_order)


@dataclass(frozen=True)
class ProfileBlock:
    kind: str = "indicator"
    mass: float = 1.0
    temperature: float = 1.0
    half_width: float = 1.7320508075688772  # unit energy for unit mass
    centers: tuple = (1.2,)
    widths: tuple = (0.45,)

    def to_profile(self):
        if self.kind == "gaussian":
            return Gaussian(self.mass, self.temperature)
        if self.kind == "indicator":
            return Indicator(self.mass, self.half_width)
        return TwoBump(self.mass, self.centers, self.widths)


@dataclass(frozen=True)
class IntegratorBlock:
    scheme: str = "rk23_adaptive"
    T: float = 1.0
    n_outputs: int = 21
    reltol: float = 1e-8
    abstol: float = 1e-12
    dt: float = 1e-3  # rk4 only


@dataclass(frozen=True)
class DiagnosticsBlock:
    s_prime: float = 0.2
    floor: float = 1e-12
    c0_policy: str = "fitted"
    delta_ladder: tuple = (1e-1, 1e-2, 1e-3, 1e-6)
    apriori_delta: float = 1e-3
    rhs_check: bool = True


@dataclass(frozen=True)
class RunConfig:
    kernel: KernelBlock = field(default_factory=KernelBlock)
    grid: GridBlock = field(default_factory=GridBlock)
    profile: ProfileBlock = field(default_factory=ProfileBlock)
    integrator: IntegratorBlock = field(default_factory=IntegratorBlock)
    diagnostics: DiagnosticsBlock = field(default_factory=DiagnosticsBlock)
    kernel3d_K: float = 1.0
    kernel3d_s: float = 0.25
    output_dir: str = ""
    seed: int = 7

    def validate(self) -> "RunConfig":
        problems = []
        k, g, p, it, d = self.kernel, self.grid, self.profile, self.integrator, self.diagnostics
        if k.family not in KERNEL_FAMILIES:
            problems.append(f"kernel.family: unknown {k.family!r}")
        if not (0.0 < k.s < 1.0):
            problems.append(f"kernel.s: {k.s} not in (0, 1)")
        if k.C0 < 0:
            problems.append(f"kernel.C0: {k.C0} negative")
        if k.family == "debye_yukawa" and k.m <= 0:
            problems.append(f"kernel.m: {k.m} must be positive")
        if k.family == "truncated_power_law" and not (0 < k.theta_cut <= math.pi / 2):
            problems.append(f"kernel.theta_cut: {k.theta_cut} not in (0, pi/2]")
        if k.tol <= 0:
            problems.append(f"kernel.tol: {k.tol} must be positive")
        if g.n < 16:
            problems.append(f"grid.n: {g.n} < 16")
        if g.xi_max <= 0:
            problems.append(f"grid.xi_max: {g.xi_max} must be positive")
        if g.v_max <= 0:
            problems.append(f"grid.v_max: {g.v_max} must be positive")
        if g.interp_order % 2 or g.interp_order < 2:
            problems.append(f"grid.interp_order: {g.interp_order} must be even >= 2")
        if p.kind not in PROFILE_KINDS:
            problems.append(f"profile.kind: unknown {p.kind!r}")
        if p.mass <= 0:
            problems.append(f"profile.mass: {p.mass} must be positive")
        if p.kind == "gaussian" and p.temperature <= 0:
            problems.append(f"profile.temperature: {p.temperature} must be positive")
        if p.kind == "indicator" and p.half_width <= 0:
            problems.append(f"profile.half_width: {p.half_width} must be positive")
        if p.kind == "two_bump":
            if len(p.centers) != len(p.widths) or not p.centers:
                problems.append("profile.centers/widths: need equal nonempty lengths")
            elif any(w <= 0 for w in p.widths):
                problems.append("profile.widths: must be positive")
        if it.scheme not in SCHEMES:
            problems.append(f"integrator.scheme: unknown {it.scheme!r}")
        if it.T <= 0:
            problems.append(f"integrator.T: {it.T} must be positive")
        if it.n_outputs < 2:
            problems.append(f"integrator.n_outputs: {it.n_outputs} < 2")
        if it.reltol <= 0 or it.abstol <= 0:
            problems.append("integrator.reltol/abstol: must be positive")
        if not (0.0 < d.s_prime < 0.5):
            problems.append(f"diagnostics.s_prime: {d.s_prime} not in (0, 1/2)")
        if d.s_prime >= k.s:
            problems.append(
                f"diagnostics.s_prime: {d.s_prime} must be below kernel.s={k.s}")
        if d.floor <= 0:
            problems.append(f"diagnostics.floor: {d.floor} must be positive")
        if d.c0_policy != "fitted":
            problems.append(f"diagnostics.c0_policy: only 'fitted' is supported")
        if problems:
            raise ConfigError(problems)
        return self


def _format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ", ".join(repr(float(x)) for x in v)
    return str(v)


def to_ini(cfg: RunConfig) -> str:
    buf = io.StringIO()
    sections = {
        "kernel": asdict(cfg.kernel),
        "grid": asdict(cfg.grid),
        "profile": asdict(cfg.profile),
        "integrator": asdict(cfg.integrator),
        "diagnostics": asdict(cfg.diagnostics),
        "kernel3d": {"K": cfg.kernel3d_K, "s": cfg.kernel3d_s},
        "run": {"output_dir": cfg.output_dir, "seed": cfg.seed},
    }
    for name, block in sections.items():
        buf.write(f"[{name}]\n")
        for key, val in block.items():
            buf.write(f"{key} = {_format_value(val)}\n")
        buf.write("\n")
    return buf.getvalue()


def _parse_tuple(text: str) -> tuple:
    parts = [p for p in (s.strip() for s in text.split(",")) if p]
    return tuple(float(p) for p in parts)


_BOOL = {"true": True, "false": False, "1": True, "0": False,
         "yes": True, "no": False}


def _coerce(section: str, key: str, text: str, default):
    try:
        if isinstance(default, bool):
            return _BOOL[text.strip().lower()]
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            return _parse_tuple(text)
        return text.strip()
    except (ValueError, KeyError) as exc:
        raise ConfigError([f"{section}.{key}: cannot parse {text!r}"]) from exc


def _read_block(parser, name, block_cls):
    defaults = block_cls()
    if not parser.has_section(name):
        return defaults
    values = {}
    for key in parser[name]:
        if not hasattr(defaults, key):
            raise ConfigError([f"{name}.{key}: unknown field"])
        values[key] = _coerce(name, key, parser[name][key], getattr(defaults, key))
    return replace(defaults, **values)


def from_ini(text: str) -> RunConfig:
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys like C0 are case-sensitive
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"ini parse error: {exc}"]) from exc
    cfg = RunConfig(
        kernel=_read_block(parser, "kernel", KernelBlock),
        grid=_read_block(parser, "grid", GridBlock),
        profile=_read_block(parser, "profile", ProfileBlock),
        integrator=_read_block(parser, "integrator", IntegratorBlock),
        diagnostics=_read_block(parser, "diagnostics", DiagnosticsBlock),
    )
    if parser.has_section("kernel3d"):
        sec = parser["kernel3d"]
        cfg = replace(cfg,
                      kernel3d_K=_coerce("kernel3d", "K", sec.get("K", "1.0"), 1.0),
                      kernel3d_s=_coerce("kernel3d", "s", sec.get("s", "0.25"), 0.25))
    if parser.has_section("run"):
        sec = parser["run"]
        cfg = replace(
            cfg,
            output_dir=sec.get("output_dir", "").strip(),
            seed=_coerce("run", "seed", sec.get("seed", "7"), 7),
        )
    return cfg.validate()


def from_json(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"json parse error: {exc}"]) from exc
    cfg = RunConfig()
    blocks = {"kernel": KernelBlock, "grid": GridBlock, "profile": ProfileBlock,
              "integrator": IntegratorBlock, "diagnostics": DiagnosticsBlock}
    kwargs = {}
    for name, cls in blocks.items():
        defaults = cls()
        payload = data.get(name, {})
        unknown = set(payload) - set(asdict(defaults))
        if unknown:
            raise ConfigError([f"{name}.{k}: unknown field" for k in sorted(unknown)])
        coerced = {}
        for k, v in payload.items():
            d = getattr(defaults, k)
            coerced[k] = tuple(float(x) for x in v) if isinstance(d, tuple) else type(d)(v)
        kwargs[name] = replace(defaults, **coerced)
    run = data.get("run", {})
    k3 = data.get("kernel3d", {})
    cfg = RunConfig(**kwargs,
                    kernel3d_K=float(k3.get("K", 1.0)),
                    kernel3d_s=float(k3.get("s", 0.25)),
                    output_dir=str(run.get("output_dir", "")),
                    seed=int(run.get("seed", 7)))
    return cfg.validate()


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return from_json(text)
    return from_ini(text)


def config_digest(cfg: RunConfig) -> str:
    return hashlib.sha256(to_ini(cfg).encode()).hexdigest()


# ---------------------------------------------------------------------------
# Presets

PRESETS = {
    "maxwellian-sanity": RunConfig(
        profile=ProfileBlock(kind="gaussian", mass=1.0, temperature=1.0),
        integrator=IntegratorBlock(T=1.0, n_outputs=11),
    ),
    "indicator-conservation": RunConfig(
        profile=ProfileBlock(kind="indicator", mass=1.0,
                             half_width=1.7320508075688772),
        integrator=IntegratorBlock(T=1.0, n_outputs=21),
    ),
    "indicator-gevrey": RunConfig(
        profile=ProfileBlock(kind="indicator", mass=1.0,
                             half_width=1.7320508075688772),
        integrator=IntegratorBlock(T=0.5, n_outputs=11),
    ),
    "two-bump-moments": RunConfig(
        profile=ProfileBlock(kind="two_bump", mass=1.0,
                             centers=(1.2,), widths=(0.45,)),
        integrator=IntegratorBlock(T=1.0, n_outputs=21),
    ),
    "determinism-smoke": RunConfig(
        grid=GridBlock(xi_max=12.0, n=96, v_max=7.0),
        profile=ProfileBlock(kind="indicator", mass=1.0,
                             half_width=1.7320508075688772),
        integrator=IntegratorBlock(T=0.1, n_outputs=5),
    ),
}


def preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError([f"unknown preset {name!r}; available: "
                           f"{', '.join(sorted(PRESETS))}"])
    return PRESETS[name].validate()
