"""Scenario configuration and the pipelines behind each CLI subcommand."""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import checks as ck
from . import fixtures as fx
from . import models as mg
from . import tensor as tc
from .checks import Check
from .errors import ConfigError
from .harmonic import (
    hopf_rotation_check,
    identity_noise_floor,
    minimal_lagrangian_map,
    minimize_pair_energy,
    write_face_csv,
    write_mesh,
)
from .landslide import (
    dual_curvature,
    invert_landslide,
    k_surface_from_pair,
    landslide_field,
    landslide_point,
)
from .report import RunReport
from .surfaces import (
    assemble_spacetime,
    codazzi_residual,
    dual_surface,
    flow_time,
    fuchsian_foliation,
    gauss_residual,
    k_surface_area,
    normal_flow,
    write_embedding_csv,
    write_spacetime_csv,
)

SCENARIOS = ("models", "landslide", "ksurface", "foliation", "duality", "harmonic", "verify")

# fixtures each scenario can run on (the first is the default)
SCENARIO_FIXTURES = {
    "models": ("fuchsian-cone-disk",),
    "landslide": ("radial-pair", "fuchsian-cone-disk"),
    "ksurface": ("radial-pair", "fuchsian-cone-disk"),
    "foliation": ("fuchsian-cone-disk",),
    "duality": ("fuchsian-cone-disk", "radial-pair"),
    "harmonic": ("cone4", "radial-pair", "fuchsian-cone-disk", "stretch"),
    "verify": ("cone4",),
}

DEFAULT_MESH_N = {"cone4": 48, "radial-pair": 48, "fuchsian-cone-disk": 48, "stretch": 32}


@dataclass
class ScenarioConfig:
    scenario: str
    cone: mg.ConeData = field(default_factory=lambda: fx.CONE4)
    theta0: float = fx.DEFAULT_THETA
    spacing: float = 1.0 / 128
    r_min: float = 1.0
    r_max: float = 2.0
    alpha: float = math.pi / 2
    K: float = -2.0
    t: Optional[float] = None
    K_list: tuple = (-4.0, -4.0 / 3.0)
    fixture: Optional[str] = None
    mesh_n: Optional[int] = None
    tol: dict = field(default_factory=dict)
    out: str = "adsland-out"
    threads: int = 1
    formats: tuple = ("json",)

    def echo(self) -> dict:
        d = asdict(self)
        d["cone"] = {"genus": self.cone.genus, "angles": list(self.cone.angles)}
        d["K_list"] = list(self.K_list)
        d["formats"] = list(self.formats)
        d["tol"] = dict(sorted(self.tol.items()))
        d.pop("out")
        return d


_FIELDS = {f for f in ScenarioConfig.__dataclass_fields__}


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def build_config(data: dict) -> ScenarioConfig:
    """Turn a plain mapping into a validated :class:`ScenarioConfig`."""
    data = dict(data)
    unknown = set(data) - _FIELDS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "scenario" not in data:
        raise ConfigError("scenario is required")
    try:
        if "cone" in data:
            c = data["cone"]
            data["cone"] = mg.ConeData(int(c.get("genus", 0)), tuple(c.get("angles", ())))
        for key in ("theta0", "spacing", "r_min", "r_max", "alpha", "K"):
            if key in data:
                data[key] = float(data[key])
        if data.get("t") is not None:
            data["t"] = float(data["t"])
        if "K_list" in data:
            data["K_list"] = tuple(float(k) for k in data["K_list"])
        if data.get("mesh_n") is not None:
            data["mesh_n"] = int(data["mesh_n"])
        if "threads" in data:
            data["threads"] = int(data["threads"])
        if "tol" in data:
            data["tol"] = {str(k): float(v) for k, v in dict(data["tol"]).items()}
        if "formats" in data:
            data["formats"] = tuple(data["formats"])
        cfg = ScenarioConfig(**data)
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    validate(cfg)
    return cfg


def validate(cfg: ScenarioConfig) -> None:
    if cfg.scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {cfg.scenario!r}")
    if cfg.fixture is None:
        cfg.fixture = SCENARIO_FIXTURES[cfg.scenario][0]
    if cfg.fixture not in fx.FIXTURES:
        raise ConfigError(f"unknown fixture {cfg.fixture!r}; available: {', '.join(fx.FIXTURES)}")
    if cfg.fixture not in SCENARIO_FIXTURES[cfg.scenario]:
        raise ConfigError(f"fixture {cfg.fixture!r} is not available for {cfg.scenario}")
    if any(not 0 < a < math.pi for a in cfg.cone.angles):
        raise ConfigError("cone angles must lie in (0, pi)")
    if not mg.admissible(cfg.cone):
        raise ConfigError("cone data is not admissible")
    if not 0 < cfg.theta0 < math.pi:
        raise ConfigError("theta0 must lie in (0, pi)")
    if not (0 < cfg.r_min < cfg.r_max) or not 0 < cfg.spacing <= (cfg.r_max - cfg.r_min) / 8:
        raise ConfigError("need 0 < r_min < r_max and a spacing giving at least 8 radial steps")
    if not math.isfinite(cfg.alpha):
        raise ConfigError("alpha must be finite")
    if cfg.scenario in ("ksurface", "duality") and not cfg.K < -1:
        raise ConfigError("K must be < -1")
    if cfg.scenario == "foliation":
        if len(cfg.K_list) < 2 or any(not k < -1 for k in cfg.K_list):
            raise ConfigError("K_list needs at least two values, all < -1")
    if cfg.mesh_n is not None and (cfg.mesh_n < 8 or cfg.mesh_n % 4):
        raise ConfigError("mesh_n must be a multiple of 4, at least 8")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    bad = set(cfg.formats) - {"json", "csv", "text"}
    if bad:
        raise ConfigError(f"unknown report formats {sorted(bad)}")
    names = set(registered_checks(cfg))
    unknown = set(cfg.tol) - names
    if unknown:
        raise ConfigError(f"tolerance overrides for unknown checks: {sorted(unknown)}")


# -- registered check lists ----------------------------------------------------------

def _tag(a):
    return f"{a / math.pi:.4g}pi"


def registered_checks(cfg: ScenarioConfig):
    s = cfg.scenario
    if s == "models":
        return ["model_curvature", "cone_angle", "area_closed_form"]
    if s == "landslide":
        out = ["landslide_det_preserved", "h_alpha_curvature", "landslide_reverse"]
        if abs(math.sin(cfg.alpha / 2)) > 1e-6:
            out.append("landslide_inverse")
        return out
    if s == "ksurface":
        return ["gauss_equation", "gauss_residual", "codazzi_residual", "spacetime_slices"]
    if s == "foliation":
        n = len(cfg.K_list) - 1
        out = [f"flow_time[{i}]" for i in range(n)] + [f"leaf_match[{i}]" for i in range(n)]
        if cfg.t is not None:
            out.append("flow_time_expected")
        return out
    if s == "duality":
        return ["dual_curvature", "dual_involution", "dual_formula_involution"]
    if s == "harmonic":
        return {
            "cone4": ["pair_symmetric_parameter", "ml_area_ratio", "ml_det_b", "ml_self_adjoint"],
            "radial-pair": ["hopf_rotation", "hopf_modulus"],
            "fuchsian-cone-disk": ["fuchsian_detected"],
            "stretch": ["pair_self_parameter", "pair_self_hopf_over_floor"],
        }[cfg.fixture]
    if s == "verify":
        return [f"c{k}.{c}" for k, c in _VERIFY_NAMES]
    raise ConfigError(f"unknown scenario {s!r}")


# -- pipelines -------------------------------------------------------------------------

def _chart(cfg):
    return fx.reference_chart(cfg.theta0, cfg.spacing, cfg.r_min, cfg.r_max)


def _pair(cfg, chart=None):
    chart = chart or _chart(cfg)
    if cfg.fixture == "radial-pair":
        return fx.radial_pair_fields(chart)
    return fx.fuchsian_pair_fields(chart)


def _maxabs(x):
    return float(np.max(np.abs(x)))


def run_models(cfg, out):
    chart = _chart(cfg)
    h = mg.cone_disk_polar(cfg.theta0, chart)
    checks = [
        Check("model_curvature", _maxabs(mg.gaussian_curvature_fd(h) + 1.0), 1e-3),
        Check("cone_angle", abs(mg.cone_angle_estimate(h) - cfg.theta0), 1e-6),
    ]
    area = k_surface_area(-1.0, cfg.cone)
    closed = -2 * math.pi * cfg.cone.cone_euler_characteristic
    checks.append(Check("area_closed_form", abs(area - closed), 1e-12))
    path = os.path.join(out, "metric.csv")
    mg.write_field_csv(h, path)
    w, v = mg.collar_widths([1.0, 2.0], cfg.cone)
    results = {"hyperbolic_area": area, "collar_w": w, "collar_v": v,
               "admissible": mg.admissible(cfg.cone)}
    return checks, results, [path]


def run_landslide(cfg, out):
    pair = _pair(cfg)
    res = landslide_field(pair, cfg.alpha)
    dh = tc.det(pair.h.samples)
    checks = [
        Check("landslide_det_preserved", _maxabs((tc.det(res.h_alpha.samples) - dh) / dh), 1e-9),
        Check("h_alpha_curvature", max(_maxabs(mg.gaussian_curvature_fd(f) + 1.0)
                                       for f in (res.h_alpha, res.h_alpha_pi)), 1e-3),
    ]
    back = landslide_point(res.h_alpha.samples, res.h_alpha_pi.samples, -cfg.alpha)
    checks.append(Check("landslide_reverse", max(ck._rel(back[0], pair.h.samples),
                                                 ck._rel(back[1], pair.h2.samples)), 1e-10))
    if abs(math.sin(cfg.alpha / 2)) > 1e-6:
        h = pair.h.samples.reshape(-1, 2, 2)
        ha = res.h_alpha.samples.reshape(-1, 2, 2)
        b = pair.morphism().reshape(-1, 2, 2)
        idx = np.linspace(0, len(h) - 1, 64).astype(int)
        err = max(float(np.max(np.abs(invert_landslide(h[i], ha[i], cfg.alpha) - b[i]))) for i in idx)
        checks.append(Check("landslide_inverse", err, 1e-8))
    paths = [os.path.join(out, "h_alpha.csv"), os.path.join(out, "h_alpha_pi.csv")]
    mg.write_field_csv(res.h_alpha, paths[0], alpha=cfg.alpha)
    mg.write_field_csv(res.h_alpha_pi, paths[1], alpha=cfg.alpha + math.pi)
    return checks, {"alpha": cfg.alpha}, paths


def run_ksurface(cfg, out):
    data = k_surface_from_pair(_pair(cfg), cfg.K)
    times = np.linspace(0.0, 1.0, 5)
    block = assemble_spacetime(data, times)
    # the t-slice of the block is the normal-flow image of the surface
    slice_err = max(ck._rel(block.samples[k][..., 1:, 1:], normal_flow(data, t).I.samples)
                    for k, t in enumerate(times))
    checks = [
        Check("gauss_equation", _maxabs(data.curvature - cfg.K), 1e-12),
        Check("gauss_residual", _maxabs(gauss_residual(data)), 1e-3),
        Check("codazzi_residual", _maxabs(codazzi_residual(data)), 1e-3),
        Check("spacetime_slices", slice_err, 1e-12),
    ]
    paths = [os.path.join(out, "embedding.csv"), os.path.join(out, "spacetime.csv")]
    write_embedding_csv(data, paths[0])
    write_spacetime_csv(block, data.I, paths[1])
    results = {"K": cfg.K, "closed_area": k_surface_area(cfg.K, cfg.cone)}
    return checks, results, paths


def _eigen_flow_time(K1, K2):
    """Time taking principal curvature sqrt(-1-K1) to sqrt(-1-K2) under the flow law."""
    l1, l2 = math.sqrt(-1 - K1), math.sqrt(-1 - K2)
    return math.atan2(l1 - l2, 1 + l1 * l2)


def run_foliation(cfg, out):
    chart = _chart(cfg)
    h = mg.cone_disk_polar(cfg.theta0, chart)
    leaves = fuchsian_foliation(h, cfg.K_list)
    checks, times, paths = [], [], []
    matches = []
    for i, (K1, K2) in enumerate(zip(cfg.K_list, cfg.K_list[1:])):
        t = flow_time(K1, K2)
        times.append(t)
        checks.append(Check(f"flow_time[{i}]", abs(t - _eigen_flow_time(K1, K2)), 1e-12))
        moved = normal_flow(leaves[i], t)
        matches.append(Check(f"leaf_match[{i}]", max(ck._rel(moved.I.samples, leaves[i + 1].I.samples),
                                                      ck._rel(moved.B, leaves[i + 1].B)), 1e-10))
    checks += matches
    if cfg.t is not None:
        checks.append(Check("flow_time_expected", abs(times[0] - cfg.t), 1e-10))
    for i, leaf in enumerate(leaves):
        p = os.path.join(out, f"leaf_{i}.csv")
        write_embedding_csv(leaf, p)
        paths.append(p)
    results = {"K_list": list(cfg.K_list), "flow_times": times,
               "leaf_areas": [k_surface_area(K, cfg.cone) for K in cfg.K_list]}
    return checks, results, paths


def run_duality(cfg, out):
    data = k_surface_from_pair(_pair(cfg), cfg.K)
    dual = dual_surface(data)
    dd = dual_surface(dual)
    kstar = dual_curvature(cfg.K)
    checks = [
        Check("dual_curvature", _maxabs(dual.curvature - kstar) / max(1.0, abs(kstar)), 1e-12),
        Check("dual_involution", max(ck._rel(dd.I.samples, data.I.samples), ck._rel(dd.B, data.B)), 1e-12),
        Check("dual_formula_involution", abs(dual_curvature(kstar) - cfg.K) / abs(cfg.K), 1e-12),
    ]
    p = os.path.join(out, "dual.csv")
    write_embedding_csv(dual, p)
    return checks, {"K": cfg.K, "K_star": kstar}, [p]


def run_harmonic(cfg, out):
    n = cfg.mesh_n or DEFAULT_MESH_N[cfg.fixture]
    paths = []
    if cfg.fixture == "cone4":
        fam = fx.cone4_family(n)
        h1, h2 = fx.cone4_pair()
        res = minimize_pair_energy(fam, h1, h2)
        m, rep = minimal_lagrangian_map(h1, h2, fam, res)
        checks = [
            Check("pair_symmetric_parameter", abs(res.params[0] - fam.symmetric_value[0]), 1e-3),
            Check("ml_area_ratio", _maxabs(rep.area_ratio - 1.0), 0.02),
            Check("ml_det_b", _maxabs(rep.det_b - 1.0), 0.02),
            Check("ml_self_adjoint", float(np.max(rep.self_adjoint)), 5e-2),
        ]
        results = {"params": list(res.params), "energy": res.energy, "faces": len(fam.faces),
                   "phi_sum": res.phi_sum}
        paths = [os.path.join(out, "minimal_lagrangian.mesh"), os.path.join(out, "u1_faces.csv")]
        write_mesh(m, paths[0])
        write_face_csv(res.maps[0], paths[1])
    elif cfg.fixture in ("radial-pair", "fuchsian-cone-disk"):
        V, F, pinned, h, h2 = fx.rotation_fixture(n)
        if cfg.fixture == "fuchsian-cone-disk":
            h2 = h
        rep = hopf_rotation_check(h, h2, cfg.alpha, V, F, pinned)
        if rep.fuchsian:
            checks = [Check("fuchsian_detected", 0.0, 0.0)]
        elif cfg.fixture == "fuchsian-cone-disk":
            checks = [Check("fuchsian_detected", 1.0, 0.0)]
        else:
            checks = [Check("hopf_rotation", rep.rotation_error, 0.05),
                      Check("hopf_modulus", rep.modulus_error, 0.05)]
        results = {"alpha": cfg.alpha, "mean_rotation": rep.mean_rotation, "fuchsian": rep.fuchsian,
                   "note": rep.note, "faces": len(F)}
    else:
        fam = fx.stretch_fixture(n)
        base = fx.ScaledCone().metric
        floor = identity_noise_floor(fam.vertices, fam.faces, fam.pinned, base)
        res = minimize_pair_energy(fam, base, base)
        checks = [Check("pair_self_parameter", abs(res.params[0]), 1e-3),
                  Check("pair_self_hopf_over_floor", res.phi_sum / floor, 10.0)]
        results = {"params": list(res.params), "noise_floor": floor, "faces": len(fam.faces)}
    return checks, results, paths


def run_verify(cfg, out):
    checks, results = [], {}
    for k, (title, fn) in ck.CRITERIA.items():
        got = fn(quoted=False) if k == 13 else fn()
        results[f"c{k}"] = title
        checks += [Check(f"c{k}.{c.name}", c.value, c.tol, c.op) for c in got]
    return checks, results, []


# check names produced by the verify suite, in order
_VERIFY_NAMES = [
    (1, "landslide_composition"), (1, "landslide_identity"), (1, "landslide_pi_swap"),
    (1, "landslide_2pi_identity"), (2, "beta_unimodular"), (2, "landslide_det_preserved"),
] + [(3, f"{p}[{_tag(a)}]") for a in (math.pi / 3, math.pi / 2, 2 * math.pi / 3)
     for p in ("h_alpha_curvature", "h_alpha_curvature_rate")] + [
    (4, "dual_involution"), (4, "dual_curvature"), (4, "dual_fixed_point"),
    (5, "flow_eigenvalues"), (5, "flow_semigroup"), (5, "flow_half_pi_dual"),
    (6, "foliation_flow_time"), (6, "foliation_leaf_match"), (6, "leaf_area_closed_form"),
    (6, "leaf_area_numeric"),
] + [(7, f"{p}[K={K:g}]") for K in (-1.5, -2.0, -4.0) for p in ("gauss_residual", "gauss_residual_rate")] + [
    (8, f"mess_landslide[{_tag(a)}]") for a in (math.pi / 3, math.pi / 2, 2 * math.pi / 3)] + [
    (9, "maximal_traceless"), (9, "maximal_gauss"),
    (10, "identity_energy_area"), (10, "identity_hopf"), (10, "conformal_invariance"),
    (10, "density_identities"), (10, "bochner_ratio[16->32]"), (10, "bochner_ratio[32->64]"),
    (10, "bochner_residual[n=64]"),
    (11, "pair_self_parameter"), (11, "pair_self_hopf_over_floor"), (11, "pair_symmetric_parameter"),
] + [(12, f"{p}[{_tag(a)}]") for a in (math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi)
     for p in ("hopf_rotation", "hopf_modulus")] + [
    (13, "collar_v"), (13, "collar_w"), (13, "admissibility_table"),
]

RUNNERS = {
    "models": run_models,
    "landslide": run_landslide,
    "ksurface": run_ksurface,
    "foliation": run_foliation,
    "duality": run_duality,
    "harmonic": run_harmonic,
    "verify": run_verify,
}


def run(cfg: ScenarioConfig) -> RunReport:
    """Execute a validated scenario, writing artifacts under ``cfg.out``."""
    t0 = time.perf_counter()
    os.makedirs(cfg.out, exist_ok=True)
    checks, results, paths = RUNNERS[cfg.scenario](cfg, cfg.out)
    checks = ck.apply_overrides(checks, cfg.tol)
    names = [c.name for c in checks]
    if sorted(names) != sorted(registered_checks(cfg)) or len(set(names)) != len(names):
        raise RuntimeError(f"scenario {cfg.scenario} produced checks {names}, "
                           f"expected {registered_checks(cfg)}")
    rel = [os.path.relpath(p, cfg.out) for p in paths]
    return RunReport(cfg.scenario, cfg.echo(), checks, results, rel, cfg.threads,
                     time.perf_counter() - t0)


__all__ = ["SCENARIOS", "ScenarioConfig", "build_config", "load_config", "registered_checks",
           "run", "validate"]
