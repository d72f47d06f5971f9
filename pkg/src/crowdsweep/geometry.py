"""Prox-regular sets and moving viability regions.

Every shape answers distance / projection / normal queries against the *set*
(the region particles must stay in), not against the obstacle that was removed
from it.  Signed distances are negative inside the set and positive outside,
so ``distance = max(signed_distance, 0)`` vanishes exactly on the set.

All queries are pure functions of immutable descriptors and are safe to call
from any number of threads.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonSmoothPoint, OutOfReach, PreconditionViolated, TimeOutOfHorizon
from .validation import check_point, check_positions, check_rng

BOUNDARY_TOL = 1e-6
AMBIGUITY_TOL = 1e-9
FD_STEP = 1e-6  # finite-difference step for signed distances, workspace units


@dataclass(frozen=True)
class Workspace:
    """Axis-aligned box bounding all sampling (Hausdorff, probes, rendering)."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or any(a >= b for a, b in zip(lo, hi)):
            raise PreconditionViolated(f"degenerate workspace {lo}..{hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    @property
    def extent(self):
        return max(b - a for a, b in zip(self.lo, self.hi))

    def grid(self, n_per_axis):
        axes = [np.linspace(a, b, n_per_axis) for a, b in zip(self.lo, self.hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def sample(self, n, rng):
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return lo + rng.random((n, self.dim)) * (hi - lo)

    def contains(self, X):
        X = np.asarray(X, dtype=float)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((X >= lo) & (X <= hi), axis=-1)


def _as_points(X):
    """Return (points, was_single) with points shaped (N, d)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        return X[None, :], True
    return X, False


class ProxRegularSet:
    """Base class: a closed set with single-valued projection near itself."""

    #: analytic reach of the shape; scenarios may declare a smaller guard
    reach = math.inf

    def signed_distance(self, X):
        raise NotImplementedError

    def distance(self, X):
        """Distance to the set; zero for interior and boundary points."""
        return np.maximum(self.signed_distance(X), 0.0)

    def contains(self, X, tol=AMBIGUITY_TOL):
        return self.signed_distance(X) <= tol

    def project_points(self, X, guard=None):
        """Project points onto the set.  Points already inside are returned as is.

        ``guard``: optional radius; queries with distance >= guard raise
        ``OutOfReach``.  Independently, queries whose nearest point is genuinely
        ambiguous always raise (a point is never picked silently).
        """
        raise NotImplementedError

    def project(self, x, guard=None):
        x = check_point(x)
        return self.project_points(x[None, :], guard=guard)[0]

    def nearest_boundary(self, x):
        """Nearest boundary point and the outward unit normal there.

        Works from both sides of the boundary; raises ``OutOfReach`` when the
        nearest boundary point is ambiguous and ``NonSmoothPoint`` where the
        boundary has no unique normal.
        """
        raise NotImplementedError

    def outward_normal(self, x, tol=BOUNDARY_TOL):
        """Outward unit proximal normal at a boundary point."""
        x = check_point(x)
        if abs(float(self.signed_distance(x[None, :])[0])) > tol:
            raise PreconditionViolated("outward_normal requires a boundary point")
        _, n = self.nearest_boundary(x)
        return n

    def boundary_points(self, n, workspace):
        """Deterministic boundary samples clipped to the workspace."""
        raise NotImplementedError

    def sample_points(self, n, workspace, rng):
        """Mix of boundary and interior samples of the set within the workspace."""
        rng = check_rng(rng)
        n_boundary = max(n // 2, 1)
        pts = [self.boundary_points(n_boundary, workspace)]
        need = n - len(pts[0])
        if need > 0:
            # rejection from the box; complements accept nearly everything
            cand = workspace.sample(4 * need + 64, rng)
            inside = cand[self.contains(cand)]
            pts.append(inside[:need])
        out = np.concatenate(pts, axis=0)
        return out

    def descriptor(self):
        """Hashable description; equal descriptors mean equal sets."""
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, ProxRegularSet) and self.descriptor() == other.descriptor()

    def __hash__(self):
        return hash(self.descriptor())


class HalfSpace(ProxRegularSet):
    """{x : n.x <= c} for a unit normal n."""

    def __init__(self, normal, offset):
        normal = check_point(normal, name="normal")
        norm = float(np.linalg.norm(normal))
        if norm < 1e-12:
            raise PreconditionViolated("half-space normal must be nonzero")
        self.normal = normal / norm
        self.offset = float(offset) / norm

    def signed_distance(self, X):
        X, _ = _as_points(X)
        return X @ self.normal - self.offset

    def project_points(self, X, guard=None):
        X, _ = _as_points(X)
        sd = X @ self.normal - self.offset
        _check_guard(self, sd, guard)
        return X - np.maximum(sd, 0.0)[:, None] * self.normal

    def nearest_boundary(self, x):
        sd = float(x @ self.normal - self.offset)
        return x - sd * self.normal, self.normal.copy()

    def boundary_points(self, n, workspace):
        if len(self.normal) != 2:
            raise NotImplementedError("boundary sampling is 2-d only")
        t = np.array([-self.normal[1], self.normal[0]])
        anchor = self.offset * self.normal
        half = workspace.extent
        s = np.linspace(-half, half, n)
        pts = anchor[None, :] + s[:, None] * t[None, :]
        return pts[workspace.contains(pts)]

    def descriptor(self):
        return ("halfspace", tuple(np.round(self.normal, 15)), round(self.offset, 15))


class Ball(ProxRegularSet):
    """Closed ball, the set itself (convex, infinite reach)."""

    def __init__(self, center, radius):
        self.center = check_point(center, name="center")
        self.radius = float(radius)
        if self.radius <= 0:
            raise PreconditionViolated("ball radius must be positive")

    def signed_distance(self, X):
        X, _ = _as_points(X)
        return np.linalg.norm(X - self.center, axis=-1) - self.radius

    def project_points(self, X, guard=None):
        X, _ = _as_points(X)
        d = X - self.center
        r = np.linalg.norm(d, axis=-1)
        sd = r - self.radius
        _check_guard(self, sd, guard)
        out = X.copy()
        outside = sd > 0
        out[outside] = self.center + d[outside] * (self.radius / r[outside])[:, None]
        return out

    def nearest_boundary(self, x):
        d = x - self.center
        r = float(np.linalg.norm(d))
        if r < AMBIGUITY_TOL:
            raise OutOfReach("ball center is equidistant from the whole boundary", point=x)
        u = d / r
        return self.center + self.radius * u, u

    def boundary_points(self, n, workspace):
        ang = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
        pts = self.center + self.radius * np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        return pts[workspace.contains(pts)]

    def descriptor(self):
        return ("ball", tuple(np.round(self.center, 15)), round(self.radius, 15))


class BallComplement(ProxRegularSet):
    """Complement of an open ball; reach equals the radius."""

    def __init__(self, center, radius):
        self.center = check_point(center, name="center")
        self.radius = float(radius)
        if self.radius <= 0:
            raise PreconditionViolated("ball radius must be positive")

    @property
    def reach(self):
        return self.radius

    def signed_distance(self, X):
        X, _ = _as_points(X)
        return self.radius - np.linalg.norm(X - self.center, axis=-1)

    def project_points(self, X, guard=None):
        X, _ = _as_points(X)
        d = X - self.center
        r = np.linalg.norm(d, axis=-1)
        sd = self.radius - r
        _check_guard(self, sd, guard)
        if np.any(r < AMBIGUITY_TOL):
            idx = int(np.argmax(r < AMBIGUITY_TOL))
            raise OutOfReach("query at the ball center has no unique projection",
                             point=X[idx], index=idx)
        out = X.copy()
        inside = sd > 0
        out[inside] = self.center + d[inside] * (self.radius / r[inside])[:, None]
        return out

    def nearest_boundary(self, x):
        d = x - self.center
        r = float(np.linalg.norm(d))
        if r < AMBIGUITY_TOL:
            raise OutOfReach("query at the ball center has no unique projection", point=x)
        u = d / r
        return self.center + self.radius * u, -u

    def boundary_points(self, n, workspace):
        ang = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
        pts = self.center + self.radius * np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        return pts[workspace.contains(pts)]

    def descriptor(self):
        return ("ball_complement", tuple(np.round(self.center, 15)), round(self.radius, 15))


class Box(ProxRegularSet):
    """Axis-aligned box (convex)."""

    def __init__(self, lo, hi):
        self.lo = check_point(lo, name="lo")
        self.hi = check_point(hi, name="hi")
        if np.any(self.lo >= self.hi):
            raise PreconditionViolated("box must satisfy lo < hi componentwise")

    def signed_distance(self, X):
        X, _ = _as_points(X)
        q = np.maximum(self.lo - X, X - self.hi)
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
        inside = np.minimum(np.max(q, axis=-1), 0.0)
        return outside + inside

    def project_points(self, X, guard=None):
        X, _ = _as_points(X)
        _check_guard(self, self.signed_distance(X), guard)
        return np.clip(X, self.lo, self.hi)

    def nearest_boundary(self, x):
        q = np.maximum(self.lo - x, x - self.hi)
        if float(np.max(q)) > 0:  # outside: normal from the clip direction
            p = np.clip(x, self.lo, self.hi)
            d = x - p
            active = np.abs(d) > AMBIGUITY_TOL
            if int(np.sum(active)) > 1:
                raise NonSmoothPoint("box corner has no unique normal")
            return p, d / np.linalg.norm(d)
        # inside: nearest face
        gaps = np.concatenate([x - self.lo, self.hi - x])
        order = np.argsort(gaps)
        if abs(gaps[order[0]] - gaps[order[1]]) < AMBIGUITY_TOL:
            raise NonSmoothPoint("equidistant from two box faces")
        k = int(order[0])
        d = len(x)
        n = np.zeros(d)
        p = x.copy()
        if k < d:
            n[k] = -1.0
            p[k] = self.lo[k]
        else:
            n[k - d] = 1.0
            p[k - d] = self.hi[k - d]
        return p, n

    def boundary_points(self, n, workspace):
        (x0, y0), (x1, y1) = self.lo, self.hi
        per_side = max(n // 4, 2)
        s = np.linspace(0.0, 1.0, per_side, endpoint=False)
        sides = [
            np.stack([x0 + s * (x1 - x0), np.full_like(s, y0)], axis=-1),
            np.stack([np.full_like(s, x1), y0 + s * (y1 - y0)], axis=-1),
            np.stack([x1 - s * (x1 - x0), np.full_like(s, y1)], axis=-1),
            np.stack([np.full_like(s, x0), y1 - s * (y1 - y0)], axis=-1),
        ]
        pts = np.concatenate(sides, axis=0)
        return pts[workspace.contains(pts)]

    def descriptor(self):
        return ("box", tuple(np.round(self.lo, 15)), tuple(np.round(self.hi, 15)))


def _rotation(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def _ellipse_nearest_first_quadrant(a1, a2, q1, q2):
    """Nearest point of the ellipse (a1, a2) for queries folded into q1, q2 >= 0.

    Safeguarded Newton on the stationarity condition of the squared distance,
    seeded at the angular parameter of the query.  Returns boundary parameters
    theta with g(theta) = 0 to 1e-12 residual.
    """
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    lo = np.zeros_like(q1)
    hi = np.full_like(q1, math.pi / 2)
    theta = np.arctan2(a1 * q2, a2 * q1)
    theta = np.clip(theta, 1e-12, math.pi / 2 - 1e-12)
    aa = a1 * a1 - a2 * a2
    done = np.zeros(q1.shape, dtype=bool)
    for _ in range(64):
        st, ct = np.sin(theta), np.cos(theta)
        g = a1 * q1 * st - a2 * q2 * ct - aa * st * ct
        # converged entries are frozen so safeguarding cannot move them again
        done |= np.abs(g) < 1e-12
        if np.all(done):
            break
        dg = a1 * q1 * ct + a2 * q2 * st - aa * (ct * ct - st * st)
        lo = np.where(~done & (g < 0), theta, lo)
        hi = np.where(~done & (g > 0), theta, hi)
        step = np.where(np.abs(dg) > 1e-300, g / np.where(dg == 0, 1.0, dg), 0.0)
        cand = theta - step
        bad = (cand <= lo) | (cand >= hi) | ~np.isfinite(cand)
        moved = np.where(bad, 0.5 * (lo + hi), cand)
        theta = np.where(done, theta, moved)
    return theta


class EllipseComplement(ProxRegularSet):
    """Complement of an open elliptic obstacle with a rigid pose.

    ``semi_axes`` are the obstacle's semi-axes in its body frame, ``angle`` the
    rotation of that frame.  Reach is the smallest boundary radius of
    curvature, min(a)**2 / max(a).
    """

    def __init__(self, center, semi_axes, angle=0.0):
        self.center = check_point(center, name="center", dim=2)
        self.semi_axes = check_point(semi_axes, name="semi_axes", dim=2)
        if np.any(self.semi_axes <= 0):
            raise PreconditionViolated("semi-axes must be positive")
        self.angle = float(angle)
        self._rot = _rotation(self.angle)

    @property
    def reach(self):
        a, b = max(self.semi_axes), min(self.semi_axes)
        return b * b / a

    def _to_body(self, X):
        return (X - self.center) @ self._rot  # rot.T applied row-wise

    def _to_world(self, P):
        return P @ self._rot.T + self.center

    def implicit(self, X):
        """(p1/a1)**2 + (p2/a2)**2 - 1; negative inside the obstacle."""
        X, single = _as_points(X)
        P = self._to_body(X)
        a1, a2 = self.semi_axes
        val = (P[:, 0] / a1) ** 2 + (P[:, 1] / a2) ** 2 - 1.0
        return val[0] if single else val

    def _nearest_on_boundary(self, X):
        """Nearest ellipse-boundary point for arbitrary queries (body fold)."""
        P = self._to_body(X)
        a1, a2 = self.semi_axes
        s1 = np.where(P[:, 0] < 0, -1.0, 1.0)
        s2 = np.where(P[:, 1] < 0, -1.0, 1.0)
        q1, q2 = np.abs(P[:, 0]), np.abs(P[:, 1])
        theta = _ellipse_nearest_first_quadrant(a1, a2, q1, q2)
        B = np.stack([s1 * a1 * np.cos(theta), s2 * a2 * np.sin(theta)], axis=-1)
        return self._to_world(B), P

    def _medial_mask(self, P):
        """Body-frame queries lying on the obstacle's medial axis (ambiguous)."""
        a1, a2 = self.semi_axes
        inside = (P[:, 0] / a1) ** 2 + (P[:, 1] / a2) ** 2 < 1.0
        if a1 == a2:
            return inside & (np.linalg.norm(P, axis=-1) < AMBIGUITY_TOL)
        if a1 > a2:
            along, across = P[:, 0], P[:, 1]
            span = (a1 * a1 - a2 * a2) / a1
        else:
            along, across = P[:, 1], P[:, 0]
            span = (a2 * a2 - a1 * a1) / a2
        return inside & (np.abs(across) < AMBIGUITY_TOL) & (np.abs(along) < span)

    def signed_distance(self, X):
        X, single = _as_points(X)
        nearest, P = self._nearest_on_boundary(X)
        dist = np.linalg.norm(X - nearest, axis=-1)
        a1, a2 = self.semi_axes
        inside_obstacle = (P[:, 0] / a1) ** 2 + (P[:, 1] / a2) ** 2 < 1.0
        sd = np.where(inside_obstacle, dist, -dist)
        return sd[0] if single else sd

    def project_points(self, X, guard=None):
        X, _ = _as_points(X)
        nearest, P = self._nearest_on_boundary(X)
        inside_obstacle = self.implicit(X) < 0
        dist = np.where(inside_obstacle, np.linalg.norm(X - nearest, axis=-1), 0.0)
        _check_guard(self, dist, guard, already_distance=True)
        medial = self._medial_mask(P)
        if np.any(medial):
            idx = int(np.argmax(medial))
            raise OutOfReach("query on the obstacle medial axis has two nearest points",
                             point=X[idx], index=idx)
        out = X.copy()
        out[inside_obstacle] = nearest[inside_obstacle]
        return out

    def nearest_boundary(self, x):
        nearest, P = self._nearest_on_boundary(x[None, :])
        if bool(self._medial_mask(P)[0]):
            raise OutOfReach("query on the obstacle medial axis has two nearest points", point=x)
        p = nearest[0]
        pb = self._to_body(p[None, :])[0]
        a1, a2 = self.semi_axes
        grad_body = np.array([2 * pb[0] / a1 ** 2, 2 * pb[1] / a2 ** 2])
        grad_world = self._rot @ grad_body
        n = -grad_world / np.linalg.norm(grad_world)  # outward of the complement
        return p, n

    def boundary_points(self, n, workspace):
        ang = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
        a1, a2 = self.semi_axes
        body = np.stack([a1 * np.cos(ang), a2 * np.sin(ang)], axis=-1)
        pts = self._to_world(body)
        return pts[workspace.contains(pts)]

    def descriptor(self):
        return ("ellipse_complement", tuple(np.round(self.center, 15)),
                tuple(np.round(self.semi_axes, 15)), round(self.angle % (2 * math.pi), 15))


class WallWithExit(ProxRegularSet):
    """Complement of a thickened pair of rays: a wall with one gap.

    The wall lives on the line ``x1 = wall_x``; the skeleton is the pair of rays
    with |x2 - exit_center| >= exit_half_width, thickened by ``thickness``.
    Capsule (rounded-end) geometry keeps every boundary point smooth, so the
    reach is exactly ``thickness``.
    """

    def __init__(self, wall_x, exit_half_width, thickness, exit_center=0.0):
        self.wall_x = float(wall_x)
        self.exit_half_width = float(exit_half_width)
        self.thickness = float(thickness)
        self.exit_center = float(exit_center)
        if self.thickness <= 0 or self.exit_half_width <= 0:
            raise PreconditionViolated("wall thickness and exit half-width must be positive")
        if self.thickness >= self.exit_half_width:
            raise PreconditionViolated("exit must be wider than the wall thickness")

    @property
    def reach(self):
        return self.thickness

    def _skeleton_delta(self, X):
        """Vector from the nearest skeleton point to each query."""
        dx = X[:, 0] - self.wall_x
        y = X[:, 1] - self.exit_center
        b = self.exit_half_width
        gap_top = np.maximum(b - y, 0.0)    # below the top ray start
        gap_bot = np.maximum(y + b, 0.0)    # above the bottom ray start
        d_top = np.hypot(dx, gap_top)
        d_bot = np.hypot(dx, gap_bot)
        use_top = d_top <= d_bot
        dy = np.where(use_top, -gap_top, gap_bot)
        return np.stack([dx, dy], axis=-1), np.where(use_top, d_top, d_bot)

    def signed_distance(self, X):
        X, single = _as_points(X)
        _, d = self._skeleton_delta(X)
        sd = self.thickness - d
        return sd[0] if single else sd

    def project_points(self, X, guard=None):
        X, _ = _as_points(X)
        delta, d = self._skeleton_delta(X)
        sd = self.thickness - d
        _check_guard(self, sd, guard)
        if np.any(d < AMBIGUITY_TOL):
            idx = int(np.argmax(d < AMBIGUITY_TOL))
            raise OutOfReach("query on the wall skeleton has no unique projection",
                             point=X[idx], index=idx)
        out = X.copy()
        inside_wall = sd > 0
        scale = self.thickness / d[inside_wall]
        out[inside_wall] = X[inside_wall] + delta[inside_wall] * (scale - 1.0)[:, None]
        return out

    def nearest_boundary(self, x):
        delta, d = self._skeleton_delta(x[None, :])
        d = float(d[0])
        if d < AMBIGUITY_TOL:
            raise OutOfReach("query on the wall skeleton has no unique projection", point=x)
        u = delta[0] / d
        p = x + u * (self.thickness - d)
        return p, -u

    def boundary_points(self, n, workspace):
        t = self.thickness
        b = self.exit_half_width
        y_hi = workspace.hi[1]
        y_lo = workspace.lo[1]
        per = max(n // 6, 4)
        pts = []
        for sign_ray in (1.0, -1.0):
            start = self.exit_center + sign_ray * b
            end = y_hi if sign_ray > 0 else y_lo
            ys = np.linspace(start, end, per)
            for side in (-1.0, 1.0):
                pts.append(np.stack([np.full_like(ys, self.wall_x + side * t), ys], axis=-1))
            ang = np.linspace(0.0, math.pi, per)
            cap = np.stack([self.wall_x + t * np.cos(ang),
                            start - sign_ray * t * np.sin(ang)], axis=-1)
            pts.append(cap)
        pts = np.concatenate(pts, axis=0)
        return pts[workspace.contains(pts)]

    def descriptor(self):
        return ("wall_with_exit", round(self.wall_x, 15), round(self.exit_half_width, 15),
                round(self.thickness, 15), round(self.exit_center, 15))


class IntersectionSet(ProxRegularSet):
    """Finite intersection of prox-regular constituents.

    Projection follows the nearest feasible per-constituent candidate; when the
    constituents are geometrically separated (all bundled scenarios) that
    candidate is the exact projection.  A sampled alternating-projection
    fallback covers interacting constituents.
    """

    def __init__(self, parts):
        parts = list(parts)
        if len(parts) < 1:
            raise PreconditionViolated("intersection needs at least one part")
        self.parts = parts

    @property
    def reach(self):
        return min(p.reach for p in self.parts)

    def signed_distance(self, X):
        X, single = _as_points(X)
        sd = np.max(np.stack([p.signed_distance(X) for p in self.parts], axis=0), axis=0)
        return sd[0] if single else sd

    def project_points(self, X, guard=None):
        X, _ = _as_points(X)
        sd = self.signed_distance(X)
        _check_guard(self, sd, guard)
        out = X.copy()
        violated = sd > AMBIGUITY_TOL
        for i in np.nonzero(violated)[0]:
            out[i] = self._project_one(X[i], guard)
        return out

    def _project_one(self, x, guard):
        candidates = []
        for p in self.parts:
            if float(p.signed_distance(x[None, :])[0]) > AMBIGUITY_TOL:
                cand = p.project(x, guard=guard)
                if self.contains(cand[None, :], tol=1e-9)[0]:
                    candidates.append(cand)
        if candidates:
            dists = [np.linalg.norm(c - x) for c in candidates]
            return candidates[int(np.argmin(dists))]
        return self._project_alternating(x, guard)

    def _project_alternating(self, x, guard):
        # constituents interact near x: alternate projections until feasible
        y = x.copy()
        for _ in range(256):
            moved = False
            for p in self.parts:
                if float(p.signed_distance(y[None, :])[0]) > 1e-12:
                    y = p.project(y, guard=guard)
                    moved = True
            if not moved:
                return y
        raise OutOfReach("alternating projection onto the intersection did not converge",
                         point=x)

    def nearest_boundary(self, x):
        sds = np.array([float(p.signed_distance(x[None, :])[0]) for p in self.parts])
        order = np.argsort(-sds)
        active = np.abs(sds - sds[order[0]]) < BOUNDARY_TOL
        if int(np.sum(active)) > 1:
            raise NonSmoothPoint("two constituents are active at this point")
        return self.parts[int(order[0])].nearest_boundary(x)

    def boundary_points(self, n, workspace):
        per = max(n // len(self.parts), 8)
        pts = []
        for p in self.parts:
            cand = p.boundary_points(per, workspace)
            if len(cand) == 0:
                continue
            others = [q for q in self.parts if q is not p]
            keep = np.ones(len(cand), dtype=bool)
            for q in others:
                keep &= q.contains(cand, tol=1e-9)
            pts.append(cand[keep])
        if not pts:
            return np.zeros((0, workspace.dim))
        return np.concatenate(pts, axis=0)

    def descriptor(self):
        return ("intersection", tuple(sorted(p.descriptor() for p in self.parts)))


def _check_guard(shape, sd, guard, already_distance=False):
    if guard is None:
        return
    d = sd if already_distance else np.maximum(sd, 0.0)
    d = np.atleast_1d(d)
    over = d >= guard
    if np.any(over):
        idx = int(np.argmax(over))
        raise OutOfReach(
            f"distance {float(d[idx]):.6g} exceeds the projection guard {guard:.6g}",
            index=idx)


def fd_normal(shape, x, h=FD_STEP):
    """Outward normal from central finite differences of the signed distance."""
    x = check_point(x)
    g = np.zeros_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (float(shape.signed_distance(x + e)) - float(shape.signed_distance(x - e))) / (2 * h)
    norm = np.linalg.norm(g)
    if norm < 1e-12:
        raise NonSmoothPoint("signed-distance gradient vanished")
    return g / norm


def hausdorff(a, b, samples=4096, workspace=None, seed=0):
    """Sampled symmetric Hausdorff distance between two sets.

    Sample points are drawn from each set (boundary plus interior, clipped to
    the workspace); distances to the *other* set are exact, so the only error
    is the sampling density on the suprema.  Identical descriptors short-cut
    to zero.
    """
    if a.descriptor() == b.descriptor():
        return 0.0
    if workspace is None:
        workspace = Workspace((-8.0, -8.0), (8.0, 8.0))
    rng = check_rng(seed)
    pts_a = a.sample_points(samples, workspace, rng)
    pts_b = b.sample_points(samples, workspace, rng)
    d_ab = float(np.max(b.distance(pts_a))) if len(pts_a) else 0.0
    d_ba = float(np.max(a.distance(pts_b))) if len(pts_b) else 0.0
    return max(d_ab, d_ba)


class MovingSet:
    """Time-parameterized prox-regular viability region C(t).

    ``shape_at`` maps a time to a shape descriptor; rigid motions keep a common
    reach across the horizon.  ``lipschitz_m`` is the declared Hausdorff
    Lipschitz constant; ``declared_reach`` the declared common reach (defaults
    to the analytic reach at t = 0).
    """

    HORIZON_SLACK = 1e-3  # allows finite differencing at the horizon edges

    def __init__(self, shape_at, horizon, lipschitz_m, declared_reach=None, label=""):
        self._shape_at = shape_at
        self.horizon = float(horizon)
        self.lipschitz_m = float(lipschitz_m)
        self.label = label
        if self.horizon <= 0:
            raise PreconditionViolated("horizon must be positive")
        if self.lipschitz_m < 0:
            raise PreconditionViolated("declared M must be nonnegative")
        base = shape_at(0.0)
        self.declared_reach = float(declared_reach) if declared_reach is not None else base.reach
        if self.declared_reach <= 0:
            raise PreconditionViolated("declared reach must be positive")

    def at(self, t):
        t = float(t)
        if t < -self.HORIZON_SLACK or t > self.horizon + self.HORIZON_SLACK:
            raise TimeOutOfHorizon(f"t={t} outside [0, {self.horizon}]")
        return self._shape_at(t)

    def check_lipschitz(self, pairs=16, samples=512, workspace=None, seed=0, tol=None):
        """Sampled Hausdorff-Lipschitz validation of the declared M.

        Returns the worst observed ratio; raises nothing (callers decide).
        """
        rng = check_rng(seed)
        worst = 0.0
        for _ in range(pairs):
            t, s = sorted(rng.uniform(0.0, self.horizon, size=2))
            if t == s:
                continue
            d = hausdorff(self.at(t), self.at(s), samples=samples,
                          workspace=workspace, seed=int(rng.integers(2**31)))
            worst = max(worst, d / (t - s + 1e-15))
        return worst


def static_set(shape, horizon):
    """A viability region that does not move."""
    return MovingSet(lambda t: shape, horizon, lipschitz_m=0.0, label="static")


def translating_halfspace(normal, offset0, speed, horizon):
    """Half-space whose boundary advances along its normal at the given speed.

    ``speed`` > 0 shrinks the set ({n.x <= offset0 - speed*t}).
    """
    normal = check_point(normal, name="normal")
    unit = normal / np.linalg.norm(normal)

    def shape_at(t):
        return HalfSpace(unit, offset0 - speed * t)

    return MovingSet(shape_at, horizon, lipschitz_m=abs(speed), label="halfspace")


def moving_ellipse_complement(center0, velocity, semi_axes, horizon,
                              angle0=0.0, spin=0.0):
    """Ellipse obstacle complement under rigid translation and rotation."""
    center0 = check_point(center0, name="center0", dim=2)
    velocity = check_point(velocity, name="velocity", dim=2)
    semi_axes = check_point(semi_axes, name="semi_axes", dim=2)
    a_max = float(np.max(semi_axes))
    m = float(np.linalg.norm(velocity)) + abs(spin) * a_max

    def shape_at(t):
        return EllipseComplement(center0 + velocity * t, semi_axes, angle0 + spin * t)

    return MovingSet(shape_at, horizon, lipschitz_m=m, label="ellipse")


def composite_moving_set(moving_sets, horizon, declared_reach=None):
    """Intersection of several moving regions with a shared horizon."""
    ms = list(moving_sets)
    m = sum(x.lipschitz_m for x in ms)
    reach = declared_reach if declared_reach is not None else min(x.declared_reach for x in ms)

    def shape_at(t):
        return IntersectionSet([x.at(t) for x in ms])

    return MovingSet(shape_at, horizon, lipschitz_m=m, declared_reach=reach, label="composite")


def check_reach_ball_condition(shape, r, boundary_samples=96, set_samples=512,
                               workspace=None, seed=0, tol=1e-9):
    """Sampled r-ball test: <v, y-x> <= |x-y|^2 / (2 r) for boundary x, set y.

    Returns None when the declared reach passes, else a witnessing
    (x, v, y, lhs, rhs) tuple.  Fails fast at scenario load.
    """
    if workspace is None:
        workspace = Workspace((-8.0, -8.0), (8.0, 8.0))
    rng = check_rng(seed)
    xs = shape.boundary_points(boundary_samples, workspace)
    ys = shape.sample_points(set_samples, workspace, rng)
    if len(xs) == 0 or len(ys) == 0:
        return None
    for x in xs:
        try:
            _, v = shape.nearest_boundary(x)
        except (NonSmoothPoint, OutOfReach):
            continue
        lhs = (ys - x) @ v
        rhs = np.sum((ys - x) ** 2, axis=-1) / (2.0 * r)
        bad = lhs > rhs + tol
        if np.any(bad):
            j = int(np.argmax(lhs - rhs))
            return (x, v, ys[j], float(lhs[j]), float(rhs[j]))
    return None
