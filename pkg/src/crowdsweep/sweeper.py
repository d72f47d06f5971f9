"""The catching-up time discretization and its runtime diagnostics.

The horizon [0, T] is split into 2K intervals of length tau.  Each double
window alternates
  (1) a transport half-step under the doubled field, with the cloud argument
      frozen at the window start, and
  (2) a projection of every particle onto the viability region at the window
      end.
Recorded velocities per interval: the doubled field values on transport
intervals and the projection displacement over tau on projection intervals.
Time stepping is strictly sequential; trajectories are immutable once built.
"""

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import (ConstantMismatch, MeshMismatch, OutOfReach,
                     ParameterOutOfRange, PreconditionViolated)
from .geometry import NonSmoothPoint, Workspace, hausdorff
from .transport import ParticleCloud, w2_distance
from .validation import check_scalar

SUPPORT_TOL = 1e-9
SPEED_SLACK = 1e-9
W2_SLACK = 1e-6


@dataclass(frozen=True)
class Trajectory:
    """Mesh times, particle positions per time, and per-interval velocities."""

    times: np.ndarray
    positions: np.ndarray          # (2K+1, N, d)
    velocities: np.ndarray         # (2K, N, d)
    tau: float
    field: object
    moving_set: object
    lipschitz_l: float
    lipschitz_m: float
    reach: float
    integrator: str = "rk4"
    substeps: int = 1

    @property
    def n_particles(self):
        return self.positions.shape[1]

    @property
    def dim(self):
        return self.positions.shape[2]

    @property
    def horizon(self):
        return float(self.times[-1])

    @property
    def speed_bound(self):
        """Scheme-level velocity bound 2(L+M)."""
        return 2.0 * (self.lipschitz_l + self.lipschitz_m)

    def index_of(self, t):
        idx = int(round(float(t) / self.tau))
        if idx < 0 or idx >= len(self.times) or abs(self.times[idx] - t) > 1e-9:
            raise MeshMismatch(f"t={t} is not on the mesh with tau={self.tau}")
        return idx

    def cloud_at(self, t):
        return ParticleCloud(self.positions[self.index_of(t)])

    def velocity_at(self, t):
        """Recorded velocity on the interval starting at mesh time t."""
        idx = self.index_of(t)
        if idx >= len(self.velocities):
            raise MeshMismatch("no interval starts at the final time")
        return self.velocities[idx]

    def window_velocity(self, k):
        """Average particle velocity over the k-th double window."""
        i = 2 * k
        return (self.positions[i + 2] - self.positions[i]) / (2.0 * self.tau)

    def shares_constants_with(self, other, tol=1e-12):
        return (abs(self.lipschitz_l - other.lipschitz_l) <= tol
                and abs(self.lipschitz_m - other.lipschitz_m) <= tol
                and abs(self.reach - other.reach) <= tol
                and self.field.descriptor() == other.field.descriptor())


def _advance(positions, frozen_cloud, field, dt, substeps, method):
    """Integrate the doubled frozen field; returns (new positions, initial rate)."""
    if substeps < 1:
        raise ParameterOutOfRange("substeps must be >= 1")
    if method not in ("euler", "rk4"):
        raise ParameterOutOfRange(f"unknown integrator {method!r}")
    X = np.array(positions, dtype=float)
    h = dt / substeps

    def rate(Y):
        return 2.0 * field.evaluate_many(frozen_cloud, Y)

    rate0 = None
    for _ in range(substeps):
        k1 = rate(X)
        if rate0 is None:
            rate0 = k1
        if method == "euler":
            X = X + h * k1
        else:
            k2 = rate(X + 0.5 * h * k1)
            k3 = rate(X + 0.5 * h * k2)
            k4 = rate(X + h * k3)
            X = X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return X, rate0


def transport_substep(positions, frozen_cloud, field, dt, substeps=1, method="rk4"):
    """Advance particles under the doubled field with the cloud frozen.

    Explicit Euler or classical four-stage Runge-Kutta; the frozen cloud is
    never modified.
    """
    return _advance(positions, frozen_cloud, field, dt, substeps, method)[0]


def run(initial, field, moving_set, tau, horizon=None, substeps=1, integrator="rk4",
        enforce_feasibility=True, projection_guard="declared"):
    """Run the catching-up scheme and return the full trajectory.

    Preconditions: the horizon is an even multiple of tau, the initial cloud is
    supported in C(0), and (unless disabled) the step is feasible for the
    declared constants: 2 tau (L + M) < reach.  ``projection_guard`` is
    "declared" (refuse projections beyond the declared reach), ``None``
    (refuse only genuinely ambiguous projections), or a radius.
    """
    tau = check_scalar(tau, name="tau", minimum=0.0, strict_min=True)
    horizon = moving_set.horizon if horizon is None else float(horizon)
    double_windows = horizon / (2.0 * tau)
    if abs(double_windows - round(double_windows)) > 1e-9 or round(double_windows) < 1:
        raise MeshMismatch(f"horizon {horizon} is not a positive even multiple of tau {tau}")
    n_win = int(round(double_windows))

    lipschitz_l = field.declared_l
    lipschitz_m = moving_set.lipschitz_m
    reach = moving_set.declared_reach
    if enforce_feasibility:
        bound = 2.0 * tau * (lipschitz_l + lipschitz_m)
        if not bound < reach:
            raise PreconditionViolated(
                f"tau-feasibility: 2*tau*(L+M) = {bound:.6g} must stay below reach {reach:.6g}")

    guard = moving_set.declared_reach if projection_guard == "declared" else projection_guard

    start = moving_set.at(0.0)
    if float(np.max(start.distance(initial.points))) > SUPPORT_TOL:
        raise PreconditionViolated("initial cloud is not supported in C(0)")

    n, d = initial.points.shape
    times = np.arange(2 * n_win + 1) * tau
    pos = np.empty((2 * n_win + 1, n, d))
    vel = np.empty((2 * n_win, n, d))
    pos[0] = initial.points

    for k in range(n_win):
        i = 2 * k
        frozen = ParticleCloud(pos[i])
        pos[i + 1], vel[i] = _advance(pos[i], frozen, field, tau,
                                      substeps, integrator)
        target = moving_set.at(times[i + 2])
        try:
            pos[i + 2] = target.project_points(pos[i + 1], guard=guard)
        except OutOfReach as err:
            err.step = k
            raise
        vel[i + 1] = (pos[i + 2] - pos[i + 1]) / tau

    pos.setflags(write=False)
    vel.setflags(write=False)
    return Trajectory(times=times, positions=pos, velocities=vel, tau=tau,
                      field=field, moving_set=moving_set, lipschitz_l=lipschitz_l,
                      lipschitz_m=lipschitz_m, reach=reach,
                      integrator=integrator, substeps=substeps)


# ---------------------------------------------------------------------------
# residual diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResidualReport:
    residuals: np.ndarray       # nan where skipped
    boundary: np.ndarray        # bool mask of boundary-adjacent particles
    skipped: np.ndarray         # bool mask of particles without a usable normal

    @property
    def max(self):
        vals = self.residuals[~self.skipped]
        return float(np.max(vals)) if len(vals) else 0.0


def _projection_window(traj, t):
    idx = traj.index_of(t)
    if idx % 2 != 1:
        raise MeshMismatch("t must be a projection-interval mesh time (odd mesh index)")
    return idx, (idx - 1) // 2


def _adjacency_threshold(traj):
    if not np.isfinite(traj.speed_bound):
        raise PreconditionViolated("residuals need finite declared constants L, M")
    return traj.tau * traj.speed_bound


def normal_cone_residual(traj, t):
    """Per-particle defect of the normal-cone condition over the window at t.

    Interior particles must move with the field; boundary-adjacent particles
    may additionally deviate along the inward normal direction (the reaction
    of the set), so only the tangential part and any outward part count.
    """
    idx, k = _projection_window(traj, t)
    X = traj.positions[idx]
    cloud = ParticleCloud(X)
    field_vel = traj.field.evaluate_many(cloud, X)
    v_win = traj.window_velocity(k)
    shape = traj.moving_set.at(traj.times[idx])
    thresh = _adjacency_threshold(traj)
    sd = np.atleast_1d(shape.signed_distance(X))

    n = len(X)
    res = np.full(n, np.nan)
    boundary = np.abs(sd) <= thresh
    skipped = np.zeros(n, dtype=bool)
    diff = v_win - field_vel
    interior = ~boundary
    res[interior] = np.linalg.norm(diff[interior], axis=-1)
    for i in np.nonzero(boundary)[0]:
        try:
            _, normal = shape.nearest_boundary(X[i])
        except (NonSmoothPoint, OutOfReach):
            skipped[i] = True
            continue
        along = float(diff[i] @ normal)
        tangential = diff[i] - along * normal
        res[i] = float(np.linalg.norm(tangential)) + max(0.0, along)
    return ResidualReport(res, boundary, skipped)


def noflux_residual(traj, t, fd_step=1e-6):
    """Defect of the no-flux identity against space-time normals of graph C.

    For boundary-riding particles the space-time outward normal (xi, eta) is
    taken from central differences of the signed distance in (t, x); the
    residual is |xi + v . eta| with the window-averaged velocity.  Interior
    particles are excluded from the report mask.
    """
    idx, k = _projection_window(traj, t)
    X = traj.positions[idx]
    v_win = traj.window_velocity(k)
    tm = float(traj.times[idx])
    shape = traj.moving_set.at(tm)
    thresh = _adjacency_threshold(traj)
    sd = np.atleast_1d(shape.signed_distance(X))

    n, d = X.shape
    res = np.full(n, np.nan)
    boundary = np.abs(sd) <= thresh
    skipped = np.zeros(n, dtype=bool)
    shape_plus = traj.moving_set.at(tm + fd_step)
    shape_minus = traj.moving_set.at(tm - fd_step)
    for i in np.nonzero(boundary)[0]:
        x = X[i]
        xi = (float(shape_plus.signed_distance(x)) - float(shape_minus.signed_distance(x))) \
            / (2.0 * fd_step)
        eta = np.zeros(d)
        for j in range(d):
            e = np.zeros(d)
            e[j] = fd_step
            eta[j] = (float(shape.signed_distance(x + e)) - float(shape.signed_distance(x - e))) \
                / (2.0 * fd_step)
        norm = float(np.hypot(xi, np.linalg.norm(eta)))
        if norm < 1e-9:
            skipped[i] = True
            continue
        res[i] = abs(xi + float(v_win[i] @ eta)) / norm
    return ResidualReport(res, boundary, skipped)


# ---------------------------------------------------------------------------
# invariant reports (rows shaped for the diagnostics CSV)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckRow:
    t: float
    name: str
    value: float
    bound: float
    ok: bool


def support_report(traj):
    """Max distance to C(t): exact at even mesh times, bounded between."""
    rows = []
    slack = _adjacency_threshold(traj) if np.isfinite(traj.speed_bound) else np.inf
    for i, t in enumerate(traj.times):
        shape = traj.moving_set.at(t)
        worst = float(np.max(shape.distance(traj.positions[i])))
        bound = SUPPORT_TOL if i % 2 == 0 else slack + SUPPORT_TOL
        rows.append(CheckRow(float(t), "support", worst, bound, worst <= bound))
    return rows


def speed_report(traj):
    """Recorded per-interval speeds against the scheme bound 2(L+M).

    Also counts how often the tighter limit bound 2L+M holds; that count is
    informational and never fails the check.
    """
    rows = []
    tight = 2.0 * traj.lipschitz_l + traj.lipschitz_m
    tight_hits = 0
    total = 0
    for i in range(len(traj.velocities)):
        speeds = np.linalg.norm(traj.velocities[i], axis=-1)
        worst = float(np.max(speeds))
        bound = traj.speed_bound + SPEED_SLACK
        rows.append(CheckRow(float(traj.times[i]), "speed", worst, bound, worst <= bound))
        tight_hits += int(np.sum(speeds <= tight + SPEED_SLACK))
        total += len(speeds)
    rows.append(CheckRow(traj.horizon, "speed_tight_fraction",
                         tight_hits / max(total, 1), 1.0, True))
    return rows


def w2_lipschitz_report(traj, sampled_pairs=128, seed=0):
    """W2(rho_t, rho_s) <= 2(L+M)|t-s| + slack on mesh pairs.

    Consecutive pairs are certified through the identity coupling (an upper
    bound on the distance); the exact solver is consulted only when the
    coupling bound alone would fail, and for a random sample of far pairs.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    rate = traj.speed_bound
    rows = []
    for i in range(len(traj.times) - 1):
        gap = traj.positions[i + 1] - traj.positions[i]
        coupling = float(np.sqrt(np.mean(np.sum(gap * gap, axis=-1))))
        bound = rate * traj.tau + W2_SLACK
        value = coupling
        if value > bound:
            value = w2_distance(ParticleCloud(traj.positions[i]),
                                ParticleCloud(traj.positions[i + 1]))
        rows.append(CheckRow(float(traj.times[i + 1]), "w2_lipschitz", value, bound,
                             value <= bound))
    m = len(traj.times)
    n_pairs = min(sampled_pairs, m * (m - 1) // 2)
    for _ in range(n_pairs):
        i, j = sorted(rng.choice(m, size=2, replace=False))
        if i == j:
            continue
        dist = w2_distance(ParticleCloud(traj.positions[i]),
                           ParticleCloud(traj.positions[j]))
        bound = rate * float(traj.times[j] - traj.times[i]) + W2_SLACK
        rows.append(CheckRow(float(traj.times[j]), "w2_lipschitz_pair", dist, bound,
                             dist <= bound))
    return rows


def residual_report(traj, which="cone", window_stride=1):
    """Residual maxima over projection windows, as CSV-ready rows."""
    fn = normal_cone_residual if which == "cone" else noflux_residual
    rows = []
    for k in range(0, len(traj.velocities) // 2, window_stride):
        t = float(traj.times[2 * k + 1])
        report = fn(traj, t)
        rows.append(CheckRow(t, f"{which}_residual", report.max, np.nan, True))
    return rows


def stability_gap(traj_a, traj_b, samples=4096, workspace=None, hausdorff_seed=0):
    """Slack of the continuous-dependence estimate along two trajectories.

    Returns (times, slack) where slack(t) = RHS(t) - 0.5 W2(rho_t, rho~_t)^2
    with RHS = (r(0) + (6L+2M) int_0^t Delta) exp((4L + (3L+M)/(2r)) t) and
    Delta the sampled Hausdorff distance between the two regions.  The series
    must stay above -1e-6 when the estimate holds.
    """
    if len(traj_a.times) != len(traj_b.times) or traj_a.tau != traj_b.tau:
        raise ConstantMismatch("trajectories live on different meshes")
    if not traj_a.shares_constants_with(traj_b):
        raise ConstantMismatch("trajectories do not share L, M, reach, field")
    if not np.allclose(traj_a.positions[0], traj_b.positions[0]):
        raise ConstantMismatch("trajectories must share the initial cloud")
    if workspace is None:
        workspace = Workspace((-8.0, -8.0), (8.0, 8.0))
    lip_l = traj_a.lipschitz_l
    lip_m = traj_a.lipschitz_m
    reach = traj_a.reach

    times = traj_a.times
    r_series = np.empty(len(times))
    delta = np.empty(len(times))
    for i, t in enumerate(times):
        dist = w2_distance(ParticleCloud(traj_a.positions[i]),
                           ParticleCloud(traj_b.positions[i]))
        r_series[i] = 0.5 * dist * dist
        delta[i] = hausdorff(traj_a.moving_set.at(t), traj_b.moving_set.at(t),
                             samples=samples, workspace=workspace, seed=hausdorff_seed)
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (delta[1:] + delta[:-1])
                                                * np.diff(times))])
    growth = 4.0 * lip_l + (3.0 * lip_l + lip_m) / (2.0 * reach)
    with np.errstate(over="ignore"):
        rhs = (r_series[0] + (6.0 * lip_l + 2.0 * lip_m) * integral) * np.exp(growth * times)
    slack = rhs - r_series
    return np.asarray(times), slack
