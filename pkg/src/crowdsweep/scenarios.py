"""Preset experiments, initial-measure sampling, and obstacle placement search.

A Scenario is a plain-data description (field, obstacle, wall, initial
measure, run parameters, evaluation region) that builds the solver objects on
demand.  The bundled presets reproduce the two published experiment families:
a drifting swarm crossed by a translating elliptic obstacle, and an
evacuation-through-an-exit crowd with a stationary or rotating obstacle whose
remaining mass exhibits Braess's paradox.
"""

import math
import time
from dataclasses import dataclass, field as dataclass_field, replace

import numpy as np

from .errors import (EmptyAdmissibleSet, ParameterOutOfRange, PreconditionViolated,
                     SamplingStarved)
from .fields import CongestionField, ConstantDrift, DriftField, ExitParabolaDrift, MorseField
from .geometry import (EllipseComplement, HalfSpace, WallWithExit, Workspace,
                       composite_moving_set, moving_ellipse_complement, static_set,
                       translating_halfspace)
from .sweeper import run
from .transport import ParticleCloud
from .validation import check_rng


# ---------------------------------------------------------------------------
# evaluation regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HalfPlaneRegion:
    """Open half-plane {x : n.x > offset}; the default dangerous region."""

    normal: tuple = (1.0, 0.0)
    offset: float = 0.0

    def contains(self, X):
        X = np.asarray(X, dtype=float)
        return X @ np.asarray(self.normal) > self.offset


@dataclass(frozen=True)
class BoxRegion:
    lo: tuple
    hi: tuple

    def contains(self, X):
        X = np.asarray(X, dtype=float)
        return np.all((X > np.asarray(self.lo)) & (X < np.asarray(self.hi)), axis=-1)


def mass_in_region(cloud, region):
    """Fraction of particles inside the region."""
    return float(np.count_nonzero(region.contains(cloud.points))) / cloud.n


# ---------------------------------------------------------------------------
# scenario description
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=True)
class Scenario:
    """Everything needed to reproduce one run, as plain data."""

    name: str
    field: dict
    initial: dict
    tau: float
    horizon: float
    n: int
    seed: int
    obstacle: dict = None
    wall: dict = None
    region: dict = None
    substeps: int = 1
    integrator: str = "rk4"
    strict: bool = True
    workspace: tuple = ((-8.0, -8.0), (8.0, 8.0))
    declared_m: float = None
    declared_reach: float = None

    def with_overrides(self, **kwargs):
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs)

    def build_workspace(self):
        return Workspace(self.workspace[0], self.workspace[1])

    def build_field(self):
        return build_field(self.field)

    def build_moving_set(self):
        parts = []
        if self.obstacle and self.obstacle.get("kind", "none") != "none":
            parts.append(_build_obstacle_part(self.obstacle, self.horizon))
        if self.wall:
            parts.append(static_set(WallWithExit(
                wall_x=self.wall["x"],
                exit_half_width=self.wall["exit_half_width"],
                thickness=self.wall["thickness"],
                exit_center=self.wall.get("exit_center", 0.0)), self.horizon))
        if not parts:
            raise PreconditionViolated("scenario defines neither obstacle nor wall")
        ms = parts[0] if len(parts) == 1 else composite_moving_set(parts, self.horizon)
        if self.declared_m is not None or self.declared_reach is not None:
            m = self.declared_m if self.declared_m is not None else ms.lipschitz_m
            reach = self.declared_reach if self.declared_reach is not None else ms.declared_reach
            ms = type(ms)(ms._shape_at, self.horizon, lipschitz_m=m,
                          declared_reach=reach, label=ms.label)
        return ms

    def build_region(self):
        spec = self.region or {"kind": "halfspace", "normal": (1.0, 0.0), "offset": 0.0}
        if spec["kind"] == "halfspace":
            return HalfPlaneRegion(tuple(spec.get("normal", (1.0, 0.0))),
                                   float(spec.get("offset", 0.0)))
        if spec["kind"] == "box":
            return BoxRegion(tuple(spec["lo"]), tuple(spec["hi"]))
        raise ParameterOutOfRange(f"unknown region kind {spec['kind']!r}")

    def sample_initial(self, seed=None):
        seed = self.seed if seed is None else seed
        viability = self.build_moving_set().at(0.0)
        return sample_initial(self.initial, self.n, seed, viability)


def build_field(spec):
    kind = spec["kind"]
    drift = _build_drift(spec.get("drift", ("zero",)))
    declared_l = float(spec.get("declared_l", math.inf))
    if kind == "morse":
        return MorseField(spec["attract_strength"], spec["repel_strength"],
                          spec["attract_range"], spec["repel_range"],
                          drift=drift, declared_l=declared_l)
    if kind == "congestion":
        return CongestionField(spec["radius"], spec["saturation"], spec["normalizer"],
                               drift=drift, declared_l=declared_l)
    if kind == "drift":
        return DriftField(drift=drift, declared_l=declared_l)
    raise ParameterOutOfRange(f"unknown field kind {kind!r}")


def _build_drift(desc):
    desc = tuple(desc)
    if desc[0] == "zero":
        return ConstantDrift((0.0, 0.0))
    if desc[0] == "constant":
        return ConstantDrift(desc[1])
    if desc[0] == "exit_parabola":
        return ExitParabolaDrift()
    raise ParameterOutOfRange(f"unknown drift {desc[0]!r}")


def _build_obstacle_part(spec, horizon):
    kind = spec["kind"]
    if kind == "ellipse":
        return moving_ellipse_complement(
            center0=spec["center"],
            velocity=spec.get("velocity", (0.0, 0.0)),
            semi_axes=spec["semi_axes"],
            horizon=horizon,
            angle0=spec.get("angle0", 0.0),
            spin=spec.get("spin", 0.0))
    if kind == "halfspace":
        return translating_halfspace(spec["normal"], spec.get("offset", 0.0),
                                     spec.get("speed", 0.0), horizon)
    raise ParameterOutOfRange(f"unknown obstacle kind {kind!r}")


# ---------------------------------------------------------------------------
# initial sampling
# ---------------------------------------------------------------------------

def sample_initial(spec, n, seed, viability):
    """Draw the initial cloud; rejected draws are resampled against C(0).

    Deterministic for a fixed 64-bit seed.  Raises ``SamplingStarved`` when
    less than 1% of draws land in the viability region.
    """
    if n < 1:
        raise ParameterOutOfRange("need at least one particle")
    kind = spec["kind"]
    if kind == "points":
        pts = np.asarray(spec["points"], dtype=float).reshape(-1, 2)
        if len(pts) != n:
            raise ParameterOutOfRange(f"point list has {len(pts)} entries, n={n}")
        return ParticleCloud(pts)

    rng = check_rng(seed)
    accepted = []
    got = 0
    drawn = 0
    while got < n:
        batch = _draw_batch(spec, max(n, 256), rng)
        drawn += len(batch)
        keep = viability.contains(batch, tol=1e-9)
        kept = batch[keep]
        accepted.append(kept)
        got += len(kept)
        if drawn >= max(100 * n, 10_000) and got / drawn < 0.01:
            raise SamplingStarved(
                f"only {got}/{drawn} draws landed in the viability region")
    return ParticleCloud(np.concatenate(accepted, axis=0)[:n])


def _draw_batch(spec, size, rng):
    kind = spec["kind"]
    if kind == "gaussian":
        mean = np.asarray(spec["mean"], dtype=float)
        std = np.broadcast_to(np.asarray(spec.get("std", 1.0), dtype=float), mean.shape)
        return mean + rng.standard_normal((size, len(mean))) * std
    if kind == "uniform":
        x0, x1, y0, y1 = (float(v) for v in spec["box"])
        if spec.get("stratified", False):
            return _jittered_grid(x0, x1, y0, y1, size, rng)
        u = rng.random((size, 2))
        return np.stack([x0 + u[:, 0] * (x1 - x0), y0 + u[:, 1] * (y1 - y0)], axis=-1)
    raise ParameterOutOfRange(f"unknown initial kind {kind!r}")


def _jittered_grid(x0, x1, y0, y1, size, rng):
    # one jittered sample per cell of a near-square grid, low variance
    aspect = (x1 - x0) / (y1 - y0)
    kx = max(int(math.ceil(math.sqrt(size * aspect))), 1)
    ky = max(int(math.ceil(size / kx)), 1)
    cells = [(i, j) for j in range(ky) for i in range(kx)][:size]
    u = rng.random((len(cells), 2))
    pts = np.empty((len(cells), 2))
    for idx, (i, j) in enumerate(cells):
        pts[idx, 0] = x0 + (i + u[idx, 0]) * (x1 - x0) / kx
        pts[idx, 1] = y0 + (j + u[idx, 1]) * (y1 - y0) / ky
    return pts


# ---------------------------------------------------------------------------
# bundled scenarios
# ---------------------------------------------------------------------------

#: congestion model constants shared by the Braess family
_CONGESTION_FIELD = {
    "kind": "congestion",
    "radius": 0.3,
    "saturation": 1000.0,
    "normalizer": 0.466,
    "drift": ("exit_parabola",),
    "declared_l": 40.0,
}

_BRAESS_OBSTACLES = {
    "none": {"kind": "ellipse", "center": (100.0, 100.0), "semi_axes": (0.9, 0.16),
             "angle0": 0.0, "spin": 0.0, "velocity": (0.0, 0.0)},
    "stationary": {"kind": "ellipse", "center": (1.1, 0.0), "semi_axes": (0.9, 0.16),
                   "angle0": 0.0, "spin": 0.0, "velocity": (0.0, 0.0)},
    "moving": {"kind": "ellipse", "center": (1.1, 0.0), "semi_axes": (0.9, 0.1),
               "angle0": 0.0, "spin": 1.0, "velocity": (0.0, 0.0)},
}


def braess_scenario(variant, seed=0, n=300, tau=0.01, horizon=20.0):
    """One of the three exit-evacuation configurations (no / static / rotating obstacle).

    The congestion drift is unbounded near the exit center, so the declared
    field constant is a working bound for the crowd's actual excursions, and
    the step-feasibility precondition cannot hold against the thin obstacle's
    reach; these presets therefore run in non-strict mode (projections still
    refuse genuinely ambiguous queries).
    """
    if variant not in _BRAESS_OBSTACLES:
        raise ParameterOutOfRange(f"unknown braess variant {variant!r}")
    return Scenario(
        name=f"braess_{variant}",
        field=dict(_CONGESTION_FIELD),
        obstacle=dict(_BRAESS_OBSTACLES[variant]),
        wall={"x": 0.0, "exit_half_width": 0.6, "thickness": 0.1, "exit_center": 0.0},
        initial={"kind": "uniform", "box": (2.0, 6.0, -4.0, 4.0)},
        region={"kind": "halfspace", "normal": (1.0, 0.0), "offset": 0.0},
        tau=tau, horizon=horizon, n=n, seed=seed,
        strict=False,
        declared_m=1.0 if variant == "moving" else 0.0,
        workspace=((-8.0, -8.0), (8.0, 8.0)),
    )


def swarm_crossing_scenario(seed=0, n=300, tau=0.01, horizon=20.0):
    """Attraction/repulsion swarm crossed by a translating elliptic obstacle."""
    return Scenario(
        name="swarm_crossing",
        field={"kind": "morse", "attract_strength": 4.0, "repel_strength": 7.0,
               "attract_range": 1.0 / math.sqrt(2.0), "repel_range": 0.5,
               "drift": ("constant", (-0.3, -0.3)), "declared_l": 8.0},
        obstacle={"kind": "ellipse", "center": (-2.0, -4.0),
                  "semi_axes": (math.sqrt(2.0), math.sqrt(0.5)),
                  "angle0": 0.0, "spin": 0.0, "velocity": (0.5, 0.5)},
        wall=None,
        initial={"kind": "gaussian", "mean": (4.0, 0.0), "std": 1.0},
        region={"kind": "halfspace", "normal": (1.0, 0.0), "offset": 0.0},
        tau=tau, horizon=horizon, n=n, seed=seed,
        strict=True,
        workspace=((-10.0, -10.0), (10.0, 10.0)),
    )


def halfspace_sweep_scenario(seed=0, tau=0.01, horizon=2.0, speed=1.0):
    """Closed-form case: a single resting particle pushed by a moving half-space."""
    return Scenario(
        name="halfspace_sweep",
        field={"kind": "drift", "drift": ("zero",), "declared_l": 0.0},
        obstacle={"kind": "halfspace", "normal": (1.0, 0.0), "offset": 0.0,
                  "speed": speed},
        wall=None,
        initial={"kind": "points", "points": ((0.0, 0.0),)},
        region={"kind": "halfspace", "normal": (1.0, 0.0), "offset": 0.0},
        tau=tau, horizon=horizon, n=1, seed=seed,
        strict=True,
        declared_reach=1.0,
        workspace=((-6.0, -6.0), (6.0, 6.0)),
    )


PRESETS = {
    "braess_none": lambda: braess_scenario("none"),
    "braess_stationary": lambda: braess_scenario("stationary"),
    "braess_moving": lambda: braess_scenario("moving"),
    "swarm_crossing": swarm_crossing_scenario,
    "halfspace_sweep": halfspace_sweep_scenario,
}


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

def run_scenario(scenario, seed=None):
    """Sample the initial cloud and run the scheme with the scenario's policy."""
    initial = scenario.sample_initial(seed=seed)
    field = scenario.build_field()
    ms = scenario.build_moving_set()
    return run(initial, field, ms, scenario.tau, horizon=scenario.horizon,
               substeps=scenario.substeps, integrator=scenario.integrator,
               enforce_feasibility=scenario.strict,
               projection_guard="declared" if scenario.strict else None)


def braess_suite(seed, n=300, tau=0.01, horizon=20.0):
    """Remaining dangerous-region mass for the three exit configurations.

    Returns the (none, stationary, moving) fractions at the final time; Braess's
    paradox shows as none > stationary > moving.
    """
    fractions = []
    for variant in ("none", "stationary", "moving"):
        scenario = braess_scenario(variant, seed=seed, n=n, tau=tau, horizon=horizon)
        traj = run_scenario(scenario)
        final = ParticleCloud(traj.positions[-1])
        fractions.append(mass_in_region(final, scenario.build_region()))
    return tuple(fractions)


# ---------------------------------------------------------------------------
# obstacle search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridResult:
    params: tuple               # (c1, c2, a1, a2, spin)
    objective: float
    runtime: float
    admissible: bool


def optimize_obstacle(base, grid, seed=None):
    """Exhaustive obstacle search over (center, semi-axes, spin) tuples.

    Grid points whose obstacle overlaps the sampled initial cloud are rejected
    as inadmissible (the initial measure must give the viability region full
    mass).  Ties break lexicographically on the parameter tuple.  Returns
    (best GridResult, full table sorted by objective).
    """
    grid = [tuple(float(v) for v in g) for g in grid]
    if not grid:
        raise EmptyAdmissibleSet("empty parameter grid")
    table = []
    for params in grid:
        c1, c2, a1, a2, spin = params
        scenario = base.with_overrides(obstacle={
            "kind": "ellipse", "center": (c1, c2), "semi_axes": (a1, a2),
            "angle0": 0.0, "spin": spin, "velocity": (0.0, 0.0)})
        initial = scenario.sample_initial(seed=seed)
        shape0 = scenario.build_moving_set().at(0.0)
        if float(np.max(shape0.distance(initial.points))) > 1e-9:
            table.append(GridResult(params, math.inf, 0.0, False))
            continue
        start = time.perf_counter()
        traj = run_scenario(scenario, seed=seed)
        elapsed = time.perf_counter() - start
        final = ParticleCloud(traj.positions[-1])
        objective = mass_in_region(final, scenario.build_region())
        table.append(GridResult(params, objective, elapsed, True))
    admissible = [r for r in table if r.admissible]
    if not admissible:
        raise EmptyAdmissibleSet("no grid point keeps the initial cloud feasible")
    best = min(admissible, key=lambda r: (r.objective, r.params))
    table.sort(key=lambda r: (r.objective, r.params))
    return best, table
