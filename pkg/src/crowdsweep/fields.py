"""Nonlocal velocity functionals and probing of their declared constants.

A field maps (cloud, point) to a velocity.  Pairwise terms are summed directly
in index order, O(N^2), which is exact, deterministic, and fast enough for the
particle counts used here (N <= ~2000).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DeclaredBoundViolated, DriftSingularity, ParameterOutOfRange
from .transport import ParticleCloud, w2_distance
from .validation import check_point, check_rng


# ---------------------------------------------------------------------------
# drifts
# ---------------------------------------------------------------------------

class ConstantDrift:
    """Spatially constant drift velocity."""

    def __init__(self, vector):
        self.vector = check_point(vector, name="drift vector")

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        return np.broadcast_to(self.vector, X.shape).copy()

    def descriptor(self):
        return ("constant", tuple(self.vector))


class ExitParabolaDrift:
    """Drift whose field lines are the parabolas x2 = C (1 + x1^2).

    w(x) = -(1 / (2|x|)) * (1 + x1^2, 2 x1 x2).  Singular at the origin: the
    singularity is fenced with an error, not smoothed, since smoothing would
    silently change the model.
    """

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        r = np.linalg.norm(X, axis=-1)
        if np.any(r < 1e-9):
            idx = int(np.argmax(r < 1e-9))
            raise DriftSingularity(f"drift evaluated at |x|={r[idx]:.3g} < 1e-9")
        out = np.stack([1.0 + X[..., 0] ** 2, 2.0 * X[..., 0] * X[..., 1]], axis=-1)
        return -out / (2.0 * r[..., None])

    def descriptor(self):
        return ("exit_parabola",)


class LinearDrift:
    """w(x) = matrix @ x, handy for closed-form integrator checks."""

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=float)

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        return X @ self.matrix.T

    def descriptor(self):
        return ("linear", tuple(map(tuple, self.matrix)))


def _resolve_drift(drift):
    if drift is None:
        return ConstantDrift(np.zeros(2))
    if isinstance(drift, (list, tuple, np.ndarray)):
        return ConstantDrift(drift)
    return drift


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

class NonlocalField:
    """Base interface: velocity of the crowd measure at a point."""

    kind = "abstract"

    #: declared bound and Lipschitz constant; probed at scenario load
    declared_l = math.inf

    def evaluate_many(self, cloud, X):
        raise NotImplementedError

    def evaluate(self, cloud, x):
        x = check_point(x)
        return self.evaluate_many(cloud, x[None, :])[0]

    def descriptor(self):
        raise NotImplementedError


def _pairwise_sq(X, Y):
    """Squared distances |x_i - y_j|^2 through the inner-product identity."""
    sq = (X * X).sum(axis=1)[:, None] + (Y * Y).sum(axis=1)[None, :] - 2.0 * (X @ Y.T)
    return np.maximum(sq, 0.0)


def morse_kernel(diff, attract_strength, repel_strength, attract_range, repel_range):
    """Attraction/repulsion kernel applied to displacement vectors.

    K(x) = -A_a x / (2 a^2) exp(-|x|^2 / (2 a^2))
           + A_r x / (2 r^2) exp(-|x|^2 / (2 r^2));
    odd in x, so K(0) = 0 and a particle exerts no force on itself.
    """
    diff = np.asarray(diff, dtype=float)
    sq = np.sum(diff * diff, axis=-1)
    return diff * _morse_coef(sq, attract_strength, repel_strength,
                              attract_range, repel_range)[..., None]


def _morse_coef(sq, attract_strength, repel_strength, attract_range, repel_range):
    a2 = 2.0 * attract_range ** 2
    r2 = 2.0 * repel_range ** 2
    return (-attract_strength / a2) * np.exp(-sq / a2) \
        + (repel_strength / r2) * np.exp(-sq / r2)


class MorseField(NonlocalField):
    """Drift plus mean-field attraction/repulsion kernel."""

    kind = "morse"

    def __init__(self, attract_strength, repel_strength, attract_range, repel_range,
                 drift=None, declared_l=math.inf):
        if attract_range <= 0 or repel_range <= 0:
            raise ParameterOutOfRange("interaction ranges must be positive")
        self.attract_strength = float(attract_strength)
        self.repel_strength = float(repel_strength)
        self.attract_range = float(attract_range)
        self.repel_range = float(repel_range)
        self.drift = _resolve_drift(drift)
        self.declared_l = float(declared_l)

    def evaluate_many(self, cloud, X):
        X = np.asarray(X, dtype=float)
        Y = cloud.points
        # sum_j coef_ij (x_i - y_j) without materializing the (N, M, d) tensor
        coef = _morse_coef(_pairwise_sq(X, Y), self.attract_strength,
                           self.repel_strength, self.attract_range, self.repel_range)
        interaction = (X * coef.sum(axis=1)[:, None] - coef @ Y) / cloud.n
        return self.drift(X) + interaction

    def descriptor(self):
        return ("morse", self.attract_strength, self.repel_strength,
                self.attract_range, self.repel_range, self.drift.descriptor())


def congestion_bump(r, radius, normalizer):
    """Smooth bump supported on [0, radius): (1/beta) exp(1 / ((r/radius)^2 - 1)).

    The exponent is evaluated only where r/radius < 1 - 1e-12; at the support
    edge it tends to -inf, so the bump vanishes smoothly.
    """
    r = np.asarray(r, dtype=float)
    return _bump_from_sq(np.square(r), radius, normalizer)


def _bump_from_sq(r_sq, radius, normalizer):
    scaled_sq = r_sq / (radius * radius)
    out = np.zeros_like(scaled_sq)
    inside = scaled_sq < (1.0 - 1e-12) ** 2
    out[inside] = np.exp(1.0 / (scaled_sq[inside] - 1.0)) / normalizer
    return out


class CongestionField(NonlocalField):
    """Drift saturated by the local crowd density.

    The speed at x is the drift speed scaled by psi(density), where the density
    is the mean of a smooth bump over neighbor distances and
    psi(s) = 1 - (2/pi) arctan(kappa s^2) maps into [0, 1].
    """

    kind = "congestion"

    def __init__(self, radius, saturation, normalizer, drift=None, declared_l=math.inf):
        if radius <= 0 or normalizer <= 0:
            raise ParameterOutOfRange("bump radius and normalizer must be positive")
        self.radius = float(radius)
        self.saturation = float(saturation)
        self.normalizer = float(normalizer)
        self.drift = _resolve_drift(drift) if drift is not None else ExitParabolaDrift()
        self.declared_l = float(declared_l)

    def density(self, cloud, X):
        X = np.asarray(X, dtype=float)
        sq = _pairwise_sq(X, cloud.points)
        return _bump_from_sq(sq, self.radius, self.normalizer).mean(axis=1)

    def saturation_factor(self, s):
        return 1.0 - (2.0 / math.pi) * np.arctan(self.saturation * np.square(s))

    def evaluate_many(self, cloud, X):
        X = np.asarray(X, dtype=float)
        psi = self.saturation_factor(self.density(cloud, X))
        return self.drift(X) * psi[:, None]

    def descriptor(self):
        return ("congestion", self.radius, self.saturation, self.normalizer,
                self.drift.descriptor())


class DriftField(NonlocalField):
    """A drift alone; the cloud is ignored."""

    kind = "custom-drift"

    def __init__(self, drift=None, declared_l=math.inf):
        self.drift = _resolve_drift(drift)
        self.declared_l = float(declared_l)

    def evaluate_many(self, cloud, X):
        return self.drift(np.asarray(X, dtype=float))

    def descriptor(self):
        return ("custom-drift", self.drift.descriptor())


# ---------------------------------------------------------------------------
# probing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeEstimates:
    sup_bound: float
    lip_x: float
    lip_w2: float


def probe_constants(field, workspace, samples=200, seed=0, cloud_size=24,
                    enforce_declared=True):
    """Empirical bound / Lipschitz estimates over random clouds and points.

    Estimates must not exceed the declared constant; the witnessing sample is
    reported otherwise.  Used to validate scenarios at load time.
    """
    if samples < 100:
        raise ParameterOutOfRange("probe needs at least 100 samples")
    rng = check_rng(seed)
    sup_bound = 0.0
    lip_x = 0.0
    lip_w2 = 0.0
    witness = None
    for _ in range(samples):
        n = int(rng.integers(1, cloud_size + 1))
        cloud_a = ParticleCloud(workspace.sample(n, rng))
        cloud_b = ParticleCloud(workspace.sample(n, rng))
        x, y = workspace.sample(2, rng)
        va_x = field.evaluate(cloud_a, x)
        va_y = field.evaluate(cloud_a, y)
        vb_x = field.evaluate(cloud_b, x)
        mag = float(np.linalg.norm(va_x))
        if mag > sup_bound:
            sup_bound, witness = mag, (cloud_a, x, mag)
        gap = float(np.linalg.norm(x - y))
        if gap > 1e-9:
            est = float(np.linalg.norm(va_x - va_y)) / gap
            if est > lip_x:
                lip_x, witness = est, (cloud_a, (x, y), est)
        dist = w2_distance(cloud_a, cloud_b)
        if dist > 1e-9:
            est = float(np.linalg.norm(va_x - vb_x)) / dist
            if est > lip_w2:
                lip_w2, witness = est, ((cloud_a, cloud_b), x, est)
    estimates = ProbeEstimates(sup_bound, lip_x, lip_w2)
    if enforce_declared:
        worst = max(sup_bound, lip_x, lip_w2)
        if worst > field.declared_l:
            raise DeclaredBoundViolated(
                f"probed constant {worst:.6g} exceeds declared {field.declared_l:.6g}",
                witness=witness)
    return estimates
