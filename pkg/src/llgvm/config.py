"""Flat key = value run configuration with full validation.

Sections are spelled with dotted keys (grid.n = 32).  Parsing is total:
every malformed entry is collected and reported together; unknown keys are
rejected so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .errors import ConfigError
from .textures import TEXTURE_NAMES

log = logging.getLogger(__name__)

F0_KINDS = ("bump_maxwellian", "uniform_maxwellian", "two_stream", "delta")


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_triple(text: str) -> tuple[float, float, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected three comma-separated numbers, got {text!r}")
    return tuple(float(p) for p in parts)


# key -> (converter, default); a None default means "derived later".
SCHEMA = {
    "grid.n": (int, 32),
    "grid.nx": (int, None),
    "grid.ny": (int, None),
    "grid.nz": (int, None),
    "grid.box": (float, 16.0),
    "grid.lx": (float, None),
    "grid.ly": (float, None),
    "grid.lz": (float, None),
    "llg.alpha": (float, 0.1),
    "llg.h": (float, 0.5),
    "llg.stabilizer_c": (float, None),
    "llg.dt": (float, None),  # alias of run.dt
    "llg.initial": (str, "random_smooth"),
    "llg.init_radius": (float, None),
    "llg.init_amplitude": (float, 0.05),
    "llg.init_kcut": (int, 2),
    "em.eps_r": (float, 1.0),
    "em.mu_r": (float, 1.0),
    "em.init_modes": (str, ""),
    "kinetic.n_particles": (int, 10000),
    "kinetic.seed": (int, None),  # defaults to run.seed
    "kinetic.f0.kind": (str, "bump_maxwellian"),
    "kinetic.f0.center": (_parse_triple, None),  # defaults to the box center
    "kinetic.f0.radius": (float, 1.6),
    "kinetic.f0.v_thermal": (float, 0.3),
    "kinetic.f0.mass": (float, 1.0),
    "kinetic.f0.drift": (float, 0.8),
    "kinetic.f0.position": (_parse_triple, None),
    "kinetic.f0.velocity": (_parse_triple, None),
    "mollifier.epsilon": (float, None),  # defaults to 4 grid spacings
    "run.dt": (float, 5e-5),
    "run.n_steps": (int, 200),
    "run.snapshot_every": (int, 0),
    "run.output_dir": (str, "out"),
    "run.seed": (int, 12345),
    "run.topology_diagnostics": (_parse_bool, True),
}


@dataclass
class RunConfig:
    values: dict
    warnings: list = field(default_factory=list)

    def __getitem__(self, key):
        return self.values[key]

    def grid_shape(self) -> tuple[int, int, int]:
        v = self.values
        return (
            v["grid.nx"] if v["grid.nx"] is not None else v["grid.n"],
            v["grid.ny"] if v["grid.ny"] is not None else v["grid.n"],
            v["grid.nz"] if v["grid.nz"] is not None else v["grid.n"],
        )

    def box_lengths(self) -> tuple[float, float, float]:
        v = self.values
        return (
            v["grid.lx"] if v["grid.lx"] is not None else v["grid.box"],
            v["grid.ly"] if v["grid.ly"] is not None else v["grid.box"],
            v["grid.lz"] if v["grid.lz"] is not None else v["grid.box"],
        )


def _range_checks(values: dict, errors: list[str], warnings: list[str]):
    def check(cond: bool, message: str):
        if not cond:
            errors.append(message)

    for key in ("grid.n", "grid.nx", "grid.ny", "grid.nz"):
        n = values[key]
        if n is None:
            continue
        if n < 4 or n % 2 != 0:
            errors.append(f"{key} = {n}: node counts must be even and >= 4")
    for key in ("grid.box", "grid.lx", "grid.ly", "grid.lz"):
        l = values[key]
        if l is not None:
            check(l > 0.0, f"{key} = {l}: box lengths must be positive")
    check(values["llg.alpha"] > 0.0, "llg.alpha must be positive")
    if values["llg.h"] <= 0.25:
        warnings.append(
            f"llg.h = {values['llg.h']} <= 1/4: the interaction energy is only"
            " H^2-coercive for h > 1/4; the run may be outside the well-posed regime"
        )
    if values["llg.initial"] not in TEXTURE_NAMES:
        errors.append(
            f"llg.initial = {values['llg.initial']!r}: choose one of {TEXTURE_NAMES}"
        )
    if values["llg.init_radius"] is not None:
        check(values["llg.init_radius"] > 0.0, "llg.init_radius must be positive")
    check(values["llg.init_kcut"] >= 1, "llg.init_kcut must be >= 1")
    check(values["em.eps_r"] >= 1.0, "em.eps_r must be >= 1")
    check(values["em.mu_r"] >= 1.0, "em.mu_r must be >= 1")
    check(values["kinetic.n_particles"] >= 0, "kinetic.n_particles must be >= 0")
    if values["kinetic.f0.kind"] not in F0_KINDS:
        errors.append(f"kinetic.f0.kind = {values['kinetic.f0.kind']!r}: choose one of {F0_KINDS}")
    check(values["kinetic.f0.radius"] > 0.0, "kinetic.f0.radius must be positive")
    check(values["kinetic.f0.v_thermal"] >= 0.0, "kinetic.f0.v_thermal must be >= 0")
    check(values["kinetic.f0.mass"] >= 0.0, "kinetic.f0.mass must be >= 0")
    if values["mollifier.epsilon"] is not None:
        check(values["mollifier.epsilon"] > 0.0, "mollifier.epsilon must be positive")
    check(values["run.dt"] > 0.0, "run.dt must be positive")
    check(values["run.n_steps"] >= 0, "run.n_steps must be >= 0")
    check(values["run.snapshot_every"] >= 0, "run.snapshot_every must be >= 0")
    if values["llg.stabilizer_c"] is not None:
        lam = values["llg.alpha"] / (1.0 + values["llg.alpha"] ** 2)
        check(
            values["llg.stabilizer_c"] >= lam,
            f"llg.stabilizer_c must be >= lambda = alpha/(1+alpha^2) = {lam:.6g}",
        )


def parse_config_text(text: str, source: str = "<string>") -> RunConfig:
    errors: list[str] = []
    warnings: list[str] = []
    values = {key: default for key, (_, default) in SCHEMA.items()}
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, _, rhs = line.partition("=")
        key = key.strip()
        rhs = rhs.strip()
        if key not in SCHEMA:
            errors.append(f"{source}:{lineno}: unknown key {key!r}")
            continue
        if key in seen:
            errors.append(f"{source}:{lineno}: duplicate key {key!r}")
            continue
        seen.add(key)
        converter, _ = SCHEMA[key]
        try:
            values[key] = converter(rhs)
        except (ValueError, TypeError) as err:
            errors.append(f"{source}:{lineno}: bad value for {key}: {err}")
    # llg.dt is an alias for run.dt
    if values["llg.dt"] is not None:
        if "run.dt" in seen and values["llg.dt"] != values["run.dt"]:
            errors.append(
                f"llg.dt = {values['llg.dt']} conflicts with run.dt = {values['run.dt']}"
            )
        else:
            values["run.dt"] = values["llg.dt"]
    _range_checks(values, errors, warnings)
    if errors:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(errors))
    if values["kinetic.seed"] is None:
        values["kinetic.seed"] = values["run.seed"]
    for msg in warnings:
        log.warning("%s", msg)
    return RunConfig(values=values, warnings=warnings)


def parse_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read configuration file {path}: {err}") from err
    return parse_config_text(text, source=str(path))


def default_config() -> RunConfig:
    return parse_config_text("")
