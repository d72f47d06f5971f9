"""Equal-weight empirical measures: exact quadratic transport, geodesics, projection.

A cloud of N points represents the measure (1/N) sum of Dirac masses.  All
metric operations are permutation-invariant; assignments are solved exactly
(shortest augmenting path via scipy), never approximated, because acceptance
checks compare against brute-force optima.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .errors import SizeMismatch
from .validation import check_positions, check_unit_interval


@dataclass(frozen=True)
class ParticleCloud:
    """Ordered positions of an equal-weight empirical probability measure."""

    points: np.ndarray

    def __post_init__(self):
        pts = check_positions(self.points, name="points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    def translated(self, shift):
        return ParticleCloud(self.points + np.asarray(shift, dtype=float))

    def permuted(self, order):
        return ParticleCloud(self.points[np.asarray(order, dtype=int)])


@dataclass(frozen=True)
class Assignment:
    """Optimal matching between two equal-size clouds.

    ``permutation[i]`` is the target index matched to source point i; ``cost``
    is the mean squared matched distance, so the transport distance is its
    square root.  ``target`` keeps the matched cloud's points for geodesics.
    """

    permutation: np.ndarray
    cost: float
    target: np.ndarray = field(repr=False)


def w2(a, b):
    """Exact quadratic Wasserstein distance and optimal assignment.

    Returns ``(distance, Assignment)``; raises ``SizeMismatch`` for clouds of
    different cardinality.
    """
    if a.n != b.n:
        raise SizeMismatch(f"clouds have {a.n} and {b.n} particles")
    sq = cdist(a.points, b.points, metric="sqeuclidean")
    rows, cols = linear_sum_assignment(sq)
    perm = np.empty(a.n, dtype=int)
    perm[rows] = cols
    cost = float(sq[rows, cols].sum() / a.n)
    return float(np.sqrt(max(cost, 0.0))), Assignment(perm, cost, b.points)


def w2_distance(a, b):
    """Distance only, for callers that do not need the plan."""
    return w2(a, b)[0]


def geodesic(a, plan, t):
    """Displacement interpolation along an optimal assignment.

    ``plan`` must come from ``w2(a, b)``; t = 0 reproduces ``a`` and t = 1 the
    matched cloud.  Constant speed: the distance between parameters s and t is
    |t - s| times the endpoint distance.
    """
    t = check_unit_interval(t, name="t")
    matched = plan.target[plan.permutation]
    return ParticleCloud((1.0 - t) * a.points + t * matched)


def project_measure(cloud, shape, guard=None):
    """Push the cloud forward through the metric projection onto the set.

    The result is the unique closest measure supported in the set; the squared
    transport cost to it is the mean squared point distance.  ``OutOfReach``
    from an ambiguous particle propagates with its index.
    """
    return ParticleCloud(shape.project_points(cloud.points, guard=guard))


def plan_inner_product(plan, u, v, a_points, b_points):
    """2 * integral of <u(x) - v(y), x - y> against the matched plan."""
    sigma = plan.permutation
    diff_v = u - v[sigma]
    diff_x = a_points - b_points[sigma]
    return 2.0 * float(np.sum(diff_v * diff_x) / len(a_points))


def w2_derivative_check(traj_a, traj_b, t, h):
    """Residual of the squared-distance derivative identity at time t.

    Compares the centered finite difference of the squared distance over 2h
    with twice the plan-integrated inner product of velocity and displacement.
    Diagnostic only; both trajectories must carry velocities at t.
    """
    d0 = w2_distance(traj_a.cloud_at(t - h), traj_b.cloud_at(t - h))
    d1 = w2_distance(traj_a.cloud_at(t + h), traj_b.cloud_at(t + h))
    fd = (d1 * d1 - d0 * d0) / (2.0 * h)
    ca = traj_a.cloud_at(t)
    cb = traj_b.cloud_at(t)
    _, plan = w2(ca, cb)
    ua = traj_a.velocity_at(t)
    vb = traj_b.velocity_at(t)
    inner = plan_inner_product(plan, ua, vb, ca.points, cb.points)
    return abs(fd - inner)
