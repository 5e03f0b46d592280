"""JSON scenario files <-> ScenarioConfig.

Schema (top level keys):
    dim            int in {1,2,3}
    counts         list of per-axis point counts
    lengths        list of per-axis physical lengths
    material       {"rho": num, "E": num} or {"rho": num, "lambda": num, "mu": num}
    kernel         {"family": str, "A": num, "ell": num, "beta": num, "central": bool}
    init           {"preset": str, "params": {...}, "seed": int}
    bc             {"x-min": "fixed"|"free", ...}; unlisted faces are free
    dt             positive number (<= the stability limit)
    steps          int >= 0
    sample_every   int >= 1

Validation errors name the offending dotted key path.
"""

from __future__ import annotations

import json

from .dynamics import MaterialModel, ScenarioConfig
from .kernels import KernelSpec


class ConfigError(ValueError):
    pass


def _need(d: dict, key: str, path: str):
    if key not in d:
        full = f"{path}.{key}" if path else key
        raise ConfigError(f"missing required key {full}")
    return d[key]


def _number(val, path: str) -> float:
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path} must be a number, got {val!r}")
    return float(val)


def _integer(val, path: str) -> int:
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"{path} must be an integer, got {val!r}")
    return val


def parse_config(doc: dict) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    dim = _integer(_need(doc, "dim", ""), "dim")
    counts = _need(doc, "counts", "")
    lengths = _need(doc, "lengths", "")
    if not isinstance(counts, list) or not isinstance(lengths, list):
        raise ConfigError("counts and lengths must be lists")

    mat = _need(doc, "material", "")
    if not isinstance(mat, dict):
        raise ConfigError("material must be an object")
    rho = _number(_need(mat, "rho", "material"), "material.rho")
    if "E" in mat:
        material = MaterialModel(rho=rho, e_modulus=_number(mat["E"], "material.E"))
    elif "lambda" in mat and "mu" in mat:
        material = MaterialModel(rho=rho, lam=_number(mat["lambda"], "material.lambda"),
                                 mu=_number(mat["mu"], "material.mu"))
    else:
        raise ConfigError("material needs either material.E or material.lambda + material.mu")

    ker = _need(doc, "kernel", "")
    if not isinstance(ker, dict):
        raise ConfigError("kernel must be an object")
    family = _need(ker, "family", "kernel")
    if not isinstance(family, str):
        raise ConfigError("kernel.family must be a string")
    try:
        kernel = KernelSpec(
            family=family,
            amplitude=_number(ker.get("A", 1.0), "kernel.A"),
            horizon=_number(ker.get("ell", 1.0), "kernel.ell"),
            modulation=_number(ker.get("beta", 0.0), "kernel.beta"),
            central=bool(ker.get("central", False)),
        )
    except ValueError as exc:
        raise ConfigError(f"kernel: {exc}") from exc

    init = _need(doc, "init", "")
    if not isinstance(init, dict):
        raise ConfigError("init must be an object")
    preset = _need(init, "preset", "init")
    params = init.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("init.params must be an object")
    seed = _integer(init.get("seed", 0), "init.seed")

    bc = doc.get("bc", {})
    if not isinstance(bc, dict):
        raise ConfigError("bc must be an object")

    cfg = ScenarioConfig(
        dim=dim,
        counts=tuple(_integer(c, "counts[]") for c in counts),
        lengths=tuple(_number(L, "lengths[]") for L in lengths),
        material=material,
        kernel=kernel,
        preset=preset,
        preset_params=dict(params),
        seed=seed,
        bc=dict(bc),
        dt=_number(_need(doc, "dt", ""), "dt"),
        steps=_integer(_need(doc, "steps", ""), "steps"),
        sample_every=_integer(doc.get("sample_every", 1), "sample_every"),
    )
    try:
        cfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return parse_config(doc)


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """Round-trippable plain-dict echo of a config."""
    mat = {"rho": cfg.material.rho}
    if cfg.material.e_modulus is not None:
        mat["E"] = cfg.material.e_modulus
    else:
        mat["lambda"] = cfg.material.lam
        mat["mu"] = cfg.material.mu
    return {
        "dim": cfg.dim,
        "counts": list(cfg.counts),
        "lengths": list(cfg.lengths),
        "material": mat,
        "kernel": {
            "family": cfg.kernel.family,
            "A": cfg.kernel.amplitude,
            "ell": cfg.kernel.horizon,
            "beta": cfg.kernel.modulation,
            "central": cfg.kernel.central,
        },
        "init": {"preset": cfg.preset, "params": cfg.preset_params, "seed": cfg.seed},
        "bc": dict(cfg.bc),
        "dt": cfg.dt,
        "steps": cfg.steps,
        "sample_every": cfg.sample_every,
    }
