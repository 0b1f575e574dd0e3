"""Experiment configuration, orchestration and reporting.

A run builds a field (catalog solution or Goursat solve) on one or more
nested grids, runs the requested analyses, writes artifacts and a digest
manifest, and evaluates pass/fail checks.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import catalog
from .algebra import inner_product, random_stiefel, random_algebra
from .convergence import coarse_view, study
from .exceptions import ConfigError, DegenerateMetricError
from .field import currents, el_residual, stiefel_defect, tangent_vectors
from .frame import frame_field
from .geometry import analyze_geometry, mixed_derivatives_Z
from .goursat import goursat_solve, random_initial_data
from .grid import LightConeGrid, d1, interior_mask
from .immersion import loop_closedness_residual, weierstrass_integrate
from .io import write_csv, write_json, write_manifest

ANALYSES = ("verify", "surface", "geometry", "frame")

DEFAULT_TOLERANCES = {
    "el": 1e-10,            # analytic EL residual
    "orthogonality": 1e-10,  # |(d_L d_R Z, Z_D)| for analytic fields
    "frame": 1e-10,          # normal Gram and tangent-normal products
    "order": 2.0,            # expected order of second-order quantities
    "order_band": 0.2,
    "min_order": 1.0,        # order required for K and GCR discrepancies
    "stiefel": 1e-8,
}

EXAMPLE_CONFIG = {
    "model": {"n": 3, "m": 1},
    "source": {"kind": "goursat", "modes": 3, "amplitude": 0.1},
    "seed": 5,
    "grid": {"nodes": 33, "length": 1.0, "origin": [0.0, 0.0]},
    "refinements": [1, 2, 4],
    "basepoint": [0, 0],
    "analyses": "all",
    "out": "out",
}


def _grid_from(d):
    if not isinstance(d, dict):
        raise ConfigError("grid must be an object")
    try:
        if "nodes" in d:
            origin = d.get("origin", [0.0, 0.0])
            return LightConeGrid.square(int(d["nodes"]), float(d.get("length", 1.0)),
                                        (float(origin[0]), float(origin[1])))
        return LightConeGrid.from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid grid descriptor {d!r}: {exc}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description.

    Precedence: built-in defaults < JSON document < command-line flags.
    """

    source: dict
    grid: LightConeGrid
    n: Optional[int] = None
    m: Optional[int] = None
    refinements: tuple = (1,)
    seed: int = 0
    frame_seed: Optional[int] = None
    basepoint: tuple = (0, 0)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    analyses: tuple = ANALYSES
    out: str = "out"

    KEYS = ("model", "source", "seed", "frame_seed", "grid", "refinements", "basepoint",
            "tolerances", "analyses", "out")

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - set(cls.KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("source", "grid"):
            if key not in d:
                raise ConfigError(f"missing required key {key!r}")
        model = d.get("model", {})
        n, m = model.get("n"), model.get("m")
        if (n is None) != (m is None):
            raise ConfigError("model needs both n and m")
        if n is not None and not (isinstance(n, int) and isinstance(m, int) and 1 <= m < n):
            raise ConfigError(f"model requires integers 1 <= m < n, got n={n}, m={m}")
        source = d["source"]
        _check_source(source, n, m)
        refinements = tuple(int(r) for r in d.get("refinements", [1]))
        if not refinements or any(r < 1 for r in refinements) or list(refinements) != sorted(set(refinements)):
            raise ConfigError("refinements must be increasing positive integers")
        analyses = d.get("analyses", "all")
        if analyses == "all":
            analyses = ANALYSES
        analyses = tuple(analyses)
        bad = [a for a in analyses if a not in ANALYSES]
        if bad:
            raise ConfigError(f"unknown analyses {bad}; choose from {ANALYSES} or 'all'")
        tol = dict(DEFAULT_TOLERANCES)
        extra = set(d.get("tolerances", {})) - set(tol)
        if extra:
            raise ConfigError(f"unknown tolerances {sorted(extra)}")
        tol.update({k: float(v) for k, v in d.get("tolerances", {}).items()})
        seed = d.get("seed", 0)
        if not isinstance(seed, int) or seed < 0 or seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        grid = _grid_from(d["grid"])
        bp = tuple(int(v) for v in d.get("basepoint", (0, 0)))
        if len(bp) != 2 or not (0 <= bp[0] < grid.nL and 0 <= bp[1] < grid.nR):
            raise ConfigError(f"basepoint {bp} outside the grid")
        return cls(copy.deepcopy(source), grid, n, m, refinements, seed,
                   d.get("frame_seed"), bp, tol, analyses, str(d.get("out", "out")))

    def override(self, grid=None, seed=None, out=None):
        """Apply command-line overrides; ``grid`` is ``(nL, nR, hL, hR)``."""
        kw = {}
        if grid is not None:
            nL, nR, hL, hR = grid
            try:
                kw["grid"] = LightConeGrid(int(nL), int(nR), float(hL), float(hR),
                                           self.grid.xiL0, self.grid.xiR0)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        if seed is not None:
            if seed < 0 or seed >= 2**64:
                raise ConfigError("seed must be an unsigned 64-bit integer")
            kw["seed"] = int(seed)
        if out is not None:
            kw["out"] = str(out)
        return ExperimentConfig(**{**self.__dict__, **kw})

    def to_dict(self):
        return {
            "model": {"n": self.n, "m": self.m},
            "source": self.source,
            "seed": self.seed,
            "frame_seed": self.frame_seed,
            "grid": self.grid.to_dict(),
            "refinements": list(self.refinements),
            "basepoint": list(self.basepoint),
            "tolerances": self.tolerances,
            "analyses": list(self.analyses),
            "out": self.out,
        }

    def grids(self):
        return [self.grid.refine(r) if r > 1 else self.grid for r in self.refinements]


CATALOG_PARAMS = {
    "constant": {"n", "m"},
    "chiral_wave": {"n", "m", "scale"},
    "balanced_torus": {"a1", "a2", "b1", "b2"},
    "torus": {"a", "b", "amplitudes"},
    "flat_plane": {"da", "db", "da2", "db2"},
    "direct_sum": {"first", "second"},
}


def _check_source(src, n, m):
    if not isinstance(src, dict) or "kind" not in src:
        raise ConfigError("source must be an object with a 'kind'")
    kind = src["kind"]
    if kind == "goursat":
        if n is None:
            raise ConfigError("goursat source needs model n and m")
        extra = set(src) - {"kind", "modes", "amplitude", "speed", "period"}
        if extra:
            raise ConfigError(f"unknown goursat parameters {sorted(extra)}")
        return
    if kind != "catalog":
        raise ConfigError(f"unknown source kind {kind!r}")
    name = src.get("name")
    if name not in CATALOG_PARAMS:
        raise ConfigError(f"unknown catalog entry {name!r}; available: {sorted(CATALOG_PARAMS)}")
    extra = set(src.get("params", {})) - CATALOG_PARAMS[name]
    if extra:
        raise ConfigError(f"unknown parameters for {name}: {sorted(extra)}")
    if name == "direct_sum":
        p = src.get("params", {})
        for part in ("first", "second"):
            if part not in p:
                raise ConfigError(f"direct_sum needs '{part}'")
            _check_source(p[part], None, None)
    if name in ("constant", "chiral_wave"):
        p = src.get("params", {})
        nn, mm = p.get("n", n), p.get("m", m)
        if not (isinstance(nn, int) and isinstance(mm, int) and 1 <= mm < nn):
            raise ConfigError(f"{name} needs integers 1 <= m < n (model or params)")


def build_solution(src, n, m, rng):
    """Analytic solution for a catalog source description."""
    name = src["name"]
    p = src.get("params", {})
    n, m = p.get("n", n), p.get("m", m)
    if name == "constant":
        return catalog.constant_solution(random_stiefel(n, m, rng))
    if name == "chiral_wave":
        gen = float(p.get("scale", 1.0)) * random_algebra(n, rng)
        return catalog.chiral_wave(*catalog.exponential_curve(random_stiefel(n, m, rng), gen))
    if name == "balanced_torus":
        return catalog.balanced_torus(*(float(p.get(k, d)) for k, d in
                                        (("a1", 1.0), ("a2", 0.0), ("b1", 1.0), ("b2", 0.0))))
    if name == "torus":
        return catalog.torus(p.get("a", (1.0, 0.0)), p.get("b", (1.0, 0.0)),
                             p.get("amplitudes", (0.8**0.5, 0.2**0.5)))
    if name == "flat_plane":
        return catalog.flat_plane(*(float(p.get(k, d)) for k, d in
                                    (("da", 2.0), ("db", 0.0), ("da2", 0.0), ("db2", 2.0))))
    if name == "direct_sum":
        s1 = build_solution(p["first"], None, None, rng)
        s2 = build_solution(p["second"], None, None, rng)
        return catalog.direct_sum(s1, s2)
    raise ConfigError(f"unknown catalog entry {name!r}")


def build_fields(config):
    """One :class:`GridField` per refinement level."""
    src = config.source
    grids = config.grids()
    if src["kind"] == "goursat":
        opts = {k: src[k] for k in ("modes", "amplitude", "speed", "period") if k in src}
        left, right = random_initial_data(config.n, config.m, config.seed,
                                          origin=(config.grid.xiL0, config.grid.xiR0), **opts)
        out = []
        for g in grids:
            gf = goursat_solve(left, right, g)
            gf.meta.update({"source": "goursat", "seed": config.seed})
            out.append(gf)
        return out
    sol = build_solution(src, config.n, config.m, np.random.default_rng(config.seed))
    if config.n is not None and (sol.n, sol.m) != (config.n, config.m):
        raise ConfigError(f"model ({config.n}, {config.m}) does not match "
                          f"{src['name']} with ({sol.n}, {sol.m})")
    return [sol.sample(g) for g in grids]


def conservation_defect(gfield, exact=True):
    """Per node ``max(|d_R J_L|, |d_L J_R|)`` with FD derivatives of the currents."""
    jl, jr = currents(gfield.jets(exact=exact))
    g = gfield.grid
    return np.maximum(np.abs(d1(jl, g.hR, 1)), np.abs(d1(jr, g.hL, 0)))


def orthogonality_defect(gfield, exact=True):
    """Per node ``max |(d_R Z_L, Z_D)|, |(d_L Z_R, Z_D)|`` over D = L, R."""
    jets = gfield.jets(exact=exact)
    zl, zr = tangent_vectors(jets)
    out = np.zeros(gfield.grid.shape)
    for dz in mixed_derivatives_Z(jets):
        for z in (zl, zr):
            out = np.maximum(out, np.abs(inner_product(dz, z)))
    return out


@dataclass
class GridAnalysis:
    """Everything computed on one grid level."""

    field: object
    el: np.ndarray
    conservation: np.ndarray
    orthogonality: np.ndarray
    closedness: Optional[np.ndarray] = None
    surface: object = None
    geometry: object = None
    frame: object = None
    frame_skipped: Optional[str] = None


def _max(a, mask=None):
    a = np.asarray(a, float)
    if mask is not None:
        a = a[mask]
    a = a[np.isfinite(a)]
    return float(np.max(a)) if a.size else None


def analyze(gfield, config, need_frame=False):
    exact = gfield.exact_jets is not None
    jets = gfield.jets()
    res = GridAnalysis(gfield, el_residual(jets), conservation_defect(gfield),
                       orthogonality_defect(gfield))
    if "surface" in config.analyses or "verify" in config.analyses:
        res.closedness = loop_closedness_residual(gfield, exact, reduce=None)
    if "surface" in config.analyses:
        res.surface = weierstrass_integrate(gfield, config.basepoint)
    if "geometry" in config.analyses or "verify" in config.analyses:
        res.geometry = analyze_geometry(gfield)
    if need_frame or "frame" in config.analyses or "verify" in config.analyses:
        try:
            res.frame = frame_field(gfield, seed=config.frame_seed)
        except DegenerateMetricError as exc:
            if need_frame:
                raise
            res.frame_skipped = str(exc)
    return res


def grid_summary(a: GridAnalysis):
    g = a.field.grid
    analytic = a.field.exact_jets is not None
    inner = np.ones(g.shape, bool) if analytic else interior_mask(g.shape, 2)
    out = {
        "grid": g.to_dict(),
        "provenance": a.field.provenance,
        "stiefel_defect": float(np.max(stiefel_defect(a.field.frames))),
        "el_residual": _max(a.el, inner),
        "conservation_defect": _max(a.conservation, interior_mask(g.shape, 2)),
        "orthogonality": _max(a.orthogonality, inner),
        "solver": {k: v for k, v in a.field.meta.items()},
    }
    if a.closedness is not None:
        out["closedness"] = _max(a.closedness)
    if a.geometry is not None:
        geo = a.geometry
        reg = geo.regular
        out["regularity"] = {
            "status": "regular" if np.all(reg) else ("degenerate" if not np.any(reg) else "mixed"),
            "regular_fraction": float(np.mean(reg)),
            "detG_min": float(np.min(geo.metric.detG)),
            "detG_max": float(np.max(geo.metric.detG)),
        }
        out["K_max_abs"] = _max(np.abs(geo.K))
        out["H_norm_max"] = _max(geo.Hnorm)
        out["K_discrepancy"] = _max(np.abs(geo.K - geo.K_gauss))
    if a.frame is not None:
        f = a.frame
        b = f.bundle
        gram = b.gram() - np.eye(b.count)
        interior = interior_mask(g.shape, 2) & f.valid
        out["frame"] = {
            "normal_count": b.count,
            "gram_defect": float(np.max(np.abs(gram))),
            "tangent_normal_max": float(np.max(np.abs(b.tangent_products()))),
            "gcr_max": _max(f.gcr, interior),
            "antisymmetry_defect": _max(f.gw.antisymmetry_defect(), interior),
            "valid_fraction": float(np.mean(f.valid)),
        }
    elif a.frame_skipped:
        out["frame"] = {"skipped": a.frame_skipped}
    return out


def convergence_tables(analyses, need_frame=False):
    """Refinement studies of the second-order error measures."""
    grids = [a.field.grid for a in analyses]
    tables = [
        study("el_residual", grids, [a.el for a in analyses]),
        study("conservation_defect", grids, [a.conservation for a in analyses]),
        study("orthogonality", grids, [a.orthogonality for a in analyses]),
    ]
    if all(a.closedness is not None for a in analyses):
        # plaquettes of the coarse grid are compared through their lower-left corners
        pad = [np.pad(a.closedness, ((0, 1), (0, 1)), constant_values=np.nan) for a in analyses]
        tables.append(study("closedness", grids, pad, margin=0))
    if all(a.geometry is not None for a in analyses):
        disc = [np.abs(a.geometry.K - a.geometry.K_gauss) for a in analyses]
        tables.append(study("K_discrepancy", grids, disc))
    if all(a.frame is not None for a in analyses):
        coarse = grids[0].shape
        mask = interior_mask(coarse, 2)
        for a in analyses:
            mask &= coarse_view(a.frame.valid, coarse)
        tables.append(study("gcr", grids, [a.frame.gcr for a in analyses], mask=mask))
    return tables


def evaluate_checks(config, analyses, tables):
    """Named pass/fail checks with the measured values."""
    tol = config.tolerances
    checks = []

    def add(name, value, passed, bound):
        checks.append({"check": name, "value": value, "bound": bound, "passed": bool(passed)})

    first = analyses[0]
    if first.field.exact_jets is not None:
        for a in analyses:
            tag = f"{a.field.grid.nL}x{a.field.grid.nR}"
            v = float(np.max(a.el))
            add(f"el_residual[{tag}]", v, v <= tol["el"], tol["el"])
            v = float(np.max(a.orthogonality))
            add(f"orthogonality[{tag}]", v, v <= tol["orthogonality"], tol["orthogonality"])
            if a.frame is not None:
                s = grid_summary(a)["frame"]
                add(f"frame_gram[{tag}]", s["gram_defect"], s["gram_defect"] <= tol["frame"], tol["frame"])
                add(f"frame_tangent_normal[{tag}]", s["tangent_normal_max"],
                    s["tangent_normal_max"] <= tol["frame"], tol["frame"])
    else:
        for a in analyses:
            tag = f"{a.field.grid.nL}x{a.field.grid.nR}"
            v = float(np.max(stiefel_defect(a.field.frames)))
            add(f"stiefel[{tag}]", v, v <= tol["stiefel"], tol["stiefel"])
        if len(analyses) >= 3:
            lo, hi = tol["order"] - tol["order_band"], tol["order"] + tol["order_band"]
            for t in tables:
                if t.label in ("el_residual", "conservation_defect", "orthogonality", "closedness"):
                    add(f"order[{t.label}]", t.order, lo <= t.order <= hi, [lo, hi])
                elif t.label in ("K_discrepancy", "gcr"):
                    add(f"order[{t.label}]", t.order,
                        t.order >= tol["min_order"] and t.decreasing(), tol["min_order"])
    return checks


@dataclass
class RunResult:
    status: int
    report: dict
    files: list


EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4


def run(config: ExperimentConfig, command="export"):
    """Execute one CLI command; returns a :class:`RunResult` (files already written)."""
    if command == "export":
        wanted = set(config.analyses)
    elif command == "solve":
        wanted = set()
    else:
        wanted = {command}
    cfg = ExperimentConfig(**{**config.__dict__, "analyses": tuple(a for a in ANALYSES if a in wanted)})
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    fields = build_fields(cfg)
    analyses = [analyze(f, cfg, need_frame=(command == "frame")) for f in fields]
    files = [write_json(out / "config.json", cfg.to_dict())]
    for a in analyses:
        tag = f"{a.field.grid.nL}x{a.field.grid.nR}"
        if command in ("solve", "export"):
            files.append(write_json(out / f"field_{tag}.json", a.field.to_dict()))
        if a.surface is not None:
            d = a.surface.to_dict()
            d["closedness"] = _max(a.closedness)
            files.append(write_json(out / f"surface_{tag}.json", d))
        if a.geometry is not None and "geometry" in cfg.analyses:
            files.append(write_csv(out / f"geometry_{tag}.csv", a.geometry.CSV_HEADER,
                                   a.geometry.rows()))
        if a.frame is not None:
            files.append(write_json(out / f"frame_{tag}.json", a.frame.to_dict()))
    tables = convergence_tables(analyses) if len(analyses) >= 2 else []
    report = {
        "command": command,
        "grids": [grid_summary(a) for a in analyses],
        "convergence": [t.to_dict() for t in tables],
    }
    status = EXIT_OK
    if command == "verify":
        checks = evaluate_checks(cfg, analyses, tables)
        report["checks"] = checks
        report["passed"] = all(c["passed"] for c in checks)
        if not report["passed"]:
            status = EXIT_VERIFY
    files.append(write_json(out / "summary.json", report))
    files.append(write_manifest(out, files))
    return RunResult(status, report, files)


__all__ = [
    "ExperimentConfig", "EXAMPLE_CONFIG", "build_fields", "build_solution", "run", "RunResult",
    "conservation_defect", "orthogonality_defect", "convergence_tables", "evaluate_checks",
    "EXIT_OK", "EXIT_CONFIG", "EXIT_NUMERIC", "EXIT_VERIFY",
]
