"""Repulsive point dynamics on the line and the backward heat residual.

N distinct points repel pairwise with velocity 2/(x_k - x_j) summed over
partners, which is gradient descent for the logarithmic interaction
Hamiltonian sum_{j != k} log 1/|x_j - x_k|.  A hand-rolled embedded
Runge-Kutta 5(4) pair integrates the system forward with step rejection
tied to ordering and a collision floor; monitors report the Hamiltonian,
the inverse-square interaction energy, and the squared velocity norm.

The companion check `backward_heat_residual` measures how well a transform
family H(lambda, z) satisfies d/dlambda H = -d^2/dz^2 H by central finite
differences, which holds identically for every measure family evaluated by
this package.

The ODE side works in float64 (numpy); the integrator tolerances sit far
above roundoff, and the closed-form two-particle check pins the accuracy.
The heat residual works in arbitrary precision since its second difference
divides by h^2.
"""

from dataclasses import dataclass

import mpmath
import numpy as np
from mpmath import mpf

from .measures import eval_H
from .precision import DomainError, PrecisionContext, PrecisionLossError

__all__ = [
    "FlowState",
    "CollisionError",
    "velocities",
    "monitors",
    "integrate_flow",
    "backward_heat_residual",
]


class CollisionError(DomainError):
    """Raised when the integrator cannot keep the configuration apart."""


# ---------------------------------------------------------------------------
# state and monitors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlowState:
    """Snapshot of the point configuration at one flow time.

    positions are strictly ascending; hamiltonian and energy are the
    interaction sums over ordered pairs (each unordered pair counted
    twice, matching the two-sided sum convention).
    """

    t: float
    positions: tuple
    hamiltonian: float
    energy: float

    @classmethod
    def make(cls, t, positions) -> "FlowState":
        xs = tuple(float(x) for x in positions)
        if not xs:
            raise DomainError("need at least one position")
        if not all(np.isfinite(xs)):
            raise DomainError("positions must be finite")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise DomainError("positions must be strictly ascending")
        ham, en = _interaction_sums(np.array(xs))
        return cls(t=float(t), positions=xs, hamiltonian=ham, energy=en)

    @property
    def n(self) -> int:
        return len(self.positions)


def _interaction_sums(x: np.ndarray):
    """(hamiltonian, energy) over ordered pairs of distinct indices."""
    n = len(x)
    if n < 2:
        return 0.0, 0.0
    iu, ju = np.triu_indices(n, 1)
    gaps = x[ju] - x[iu]
    ham = -2.0 * float(np.log(gaps).sum())
    en = 2.0 * float((gaps**-2).sum())
    return ham, en


def velocities(positions) -> np.ndarray:
    """Pairwise repulsion velocity 2 * sum_{j != k} 1/(x_k - x_j)."""
    x = np.asarray(positions, dtype=float)
    d = x[:, None] - x[None, :]
    np.fill_diagonal(d, np.inf)
    return 2.0 * (1.0 / d).sum(axis=1)


def monitors(state: FlowState):
    """Recompute (hamiltonian, energy, velocity_norm_sq) from positions."""
    x = np.array(state.positions, dtype=float)
    if len(set(state.positions)) != len(state.positions):
        raise DomainError("positions must be distinct")
    ham, en = _interaction_sums(x)
    v = velocities(x)
    return ham, en, float((v**2).sum())


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

# Dormand-Prince 5(4) coefficients.  The first row of _B5 doubles as the
# last stage's weights (FSAL property is not exploited; clarity wins at
# these problem sizes).
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (
    5179 / 57600,
    0.0,
    7571 / 16695,
    393 / 640,
    -92097 / 339200,
    187 / 2100,
    1 / 40,
)

_MIN_STEP_FRACTION = 1e-14
_COLLISION_FLOOR_FRACTION = 1e-8


def _rk_step(x, dt):
    """One embedded step: returns (x5, err_vector)."""
    k = []
    for row in _A:
        xi = x.copy()
        for a, ki in zip(row, k):
            if a:
                xi = xi + dt * a * ki
        k.append(velocities(xi))
    x5 = x + dt * sum(b * ki for b, ki in zip(_B5, k))
    x4 = x + dt * sum(b * ki for b, ki in zip(_B4, k))
    return x5, x5 - x4


def integrate_flow(initial: FlowState, t_end, step_control=1e-10, checkpoints=32):
    """Integrate the repulsion forward from initial.t to t_end.

    step_control is the mixed absolute/relative local error tolerance of
    the embedded pair.  checkpoints is either a count (evenly spaced
    output times ending at t_end) or an explictly ascending sequence of
    times inside (initial.t, t_end].  The returned list starts with the
    initial state and appends one recomputed state per checkpoint.

    Steps are rejected when the local error exceeds the tolerance, when
    the proposed configuration breaks strict ordering, or when any gap
    falls under the collision floor (1e-8 of the initial minimum gap);
    if rejection drives the step under the minimum the integration stops
    with the near-collision time in the error.
    """
    t0 = float(initial.t)
    t_end = float(t_end)
    if not t_end > t0:
        raise DomainError("t_end must exceed the initial time (forward flow only)")
    tol = float(step_control)
    if not tol > 0:
        raise DomainError("step_control must be positive")

    start = FlowState.make(t0, initial.positions)
    x = np.array(start.positions, dtype=float)
    n = len(x)

    if isinstance(checkpoints, (int, np.integer)):
        if checkpoints < 1:
            raise DomainError("need at least one checkpoint")
        times = list(np.linspace(t0, t_end, int(checkpoints) + 1)[1:])
    else:
        times = [float(s) for s in checkpoints]
        if not times or any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError("checkpoint times must be ascending")
        if times[0] <= t0 or times[-1] > t_end + 1e-12 * max(1.0, abs(t_end)):
            raise DomainError("checkpoint times must lie inside (initial.t, t_end]")

    if n == 1:
        return [start] + [FlowState.make(s, x) for s in times]

    floor = _COLLISION_FLOOR_FRACTION * float(np.diff(x).min())
    span = t_end - t0
    dt_min = _MIN_STEP_FRACTION * max(1.0, span)

    out = [start]
    t = t0
    dt = min(span / 64.0, 0.25 * float(np.diff(x).min()) ** 2)
    for target in times:
        while t < target:
            dt = min(dt, target - t)
            if dt < dt_min:
                raise CollisionError(
                    "step underflow near t=%.12g: minimum gap %.3e is at the "
                    "collision floor %.3e" % (t, float(np.diff(x).min()), floor)
                )
            x5, err = _rk_step(x, dt)
            scale = tol + tol * np.abs(x5)
            with np.errstate(invalid="ignore"):
                err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
            ordered = bool(np.all(np.diff(x5) > floor))
            if np.isfinite(err_norm) and err_norm <= 1.0 and ordered:
                t += dt
                x = x5
                grow = 5.0 if err_norm == 0.0 else 0.9 * err_norm ** (-1 / 5)
                dt *= min(5.0, max(0.2, grow))
            elif not np.isfinite(err_norm) or not ordered:
                dt *= 0.2
            else:
                dt *= max(0.2, min(0.5, 0.9 * err_norm ** (-1 / 5)))
        out.append(FlowState.make(target, x))
    return out


# ---------------------------------------------------------------------------
# backward heat residual
# ---------------------------------------------------------------------------


def backward_heat_residual(measure, lam, z, h, ctx: PrecisionContext = None) -> mpf:
    """|central-difference d/dlambda H + central second difference in z|.

    Every transform family in this package satisfies the backward heat
    equation d/dlambda H = -d^2/dz^2 H exactly, so the returned residual
    is pure discretization error of size O(h^2) times the local scale of
    H.  Both lambda +/- h must stay inside the entireness range of the
    measure.
    """
    ctx = ctx or PrecisionContext()
    with ctx.workdps():
        lam = mpf(lam)
        z = mpmath.mpmathify(z)
        h = mpf(h)
        if h <= 0:
            raise DomainError("h must be positive")
        # the z-direction divides by h^2, losing about 2*log10(1/h) digits
        lost = float(-2 * mpmath.log10(h))
        if lost > mpmath.mp.dps - 5:
            raise PrecisionLossError(
                "h=%s cancels %.0f of %d working digits in the second "
                "difference; shrink h less or raise the working precision"
                % (mpmath.nstr(h, 6), lost, mpmath.mp.dps)
            )
        d_lam = (
            eval_H(measure, lam + h, z, ctx).value
            - eval_H(measure, lam - h, z, ctx).value
        ) / (2 * h)
        d_zz = (
            eval_H(measure, lam, z + h, ctx).value
            - 2 * eval_H(measure, lam, z, ctx).value
            + eval_H(measure, lam, z - h, ctx).value
        ) / (h * h)
        return abs(d_lam + d_zz)
