"""Time integration of the reaction-diffusion system on a network.

For interior vertices ``x``::

    u_t(x) = Lap_p u(x) + lam |u(x)|^(q-1) u(x)

and on the boundary the algebraic condition ``B[u] = 0`` holds at all
times.  Only interior values are integrated; boundary values are re-solved
from them (:func:`graphpde.boundary.fill_boundary`) at every stage.

The scheme is the Dormand-Prince 5(4) pair with a PI step-size controller.
A run ends at the horizon, at blow-up (max over S of u above
``blowup_threshold`` while strictly growing over the last 10 accepted
steps), at extinction (``sum_S u^2 <= extinction_threshold``, after which
the state is set to zero), or with a step failure when the step size drops
below ``dt_min`` first.

Accepted states are clipped at zero from below.  The exact solution with
nonnegative data stays nonnegative, and the clip only removes round-off
undershoot near extinction for ``p < 2``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .boundary import BoundarySolveConfig, DEFAULT_CONFIG, boundary_residual, fill_boundary
from .network import Network, degree, validate
from .operators import phi_p

__all__ = [
    "BlowupRate",
    "IntegratorConfig",
    "Outcome",
    "ProblemSpec",
    "Trajectory",
    "estimate_blowup_rate",
    "fit_blowup_time",
    "integrate",
    "rhs",
    "sample_on_grid",
    "write_trajectory",
]

log = logging.getLogger(__name__)

BLEW_UP = "BlewUp"
EXTINCT = "Extinct"
RAN_TO_HORIZON = "RanToHorizon"
STEP_FAILURE = "StepFailure"


@dataclass(frozen=True)
class ProblemSpec:
    """Everything needed to pose the initial-boundary value problem.

    ``u0`` is stored as a full vertex vector whose boundary entries have been
    re-solved from the interior entries, so ``B[u0] = 0`` holds on load.
    """

    net: Network
    p: float
    q: float
    lam: float
    u0: np.ndarray

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"p must be > 1, got {self.p}")
        if not self.q > 0:
            raise ValueError(f"q must be > 0, got {self.q}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be > 0, got {self.lam}")
        problems = validate(self.net)
        if problems:
            raise ValueError("invalid network: " + "; ".join(problems))
        u0 = self.net.vector(self.u0)
        if np.any(u0 < 0) or not np.all(np.isfinite(u0)):
            raise ValueError("initial data must be finite and nonnegative")
        u0 = fill_boundary(self.net, u0, self.p)
        u0.setflags(write=False)
        object.__setattr__(self, "u0", u0)

    @property
    def interior_u0(self) -> np.ndarray:
        return self.u0[self.net.interior_idx]


@dataclass(frozen=True)
class IntegratorConfig:
    t_horizon: float = 10.0
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    dt_init: float = 1e-4
    dt_min: float = 1e-14
    blowup_threshold: float = 1e8
    extinction_threshold: float = 1e-16
    snapshot_stride: int = 1
    max_steps: int = 2_000_000

    def __post_init__(self):
        for name in ("t_horizon", "rel_tol", "abs_tol", "dt_init", "dt_min",
                     "blowup_threshold", "extinction_threshold"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.dt_min < self.dt_init:
            raise ValueError("dt_min must be smaller than dt_init")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be >= 1")


@dataclass(frozen=True)
class Outcome:
    kind: str  # BlewUp | Extinct | RanToHorizon | StepFailure
    t_est: float | None = None
    message: str = ""

    def __str__(self) -> str:
        if self.t_est is None:
            return self.kind
        return f"{self.kind}({self.t_est:.17g})"


@dataclass
class Trajectory:
    """Retained snapshots plus a per-step record of ``max_S u``.

    ``states`` rows are full vertex vectors.  ``step_times`` / ``step_max``
    hold every accepted step regardless of ``snapshot_stride``; the blow-up
    fit uses them.
    """

    times: np.ndarray
    states: np.ndarray
    outcome: Outcome
    step_times: np.ndarray = field(repr=False)
    step_max: np.ndarray = field(repr=False)
    n_accepted: int = 0
    n_rejected: int = 0

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def rhs(spec: ProblemSpec, u) -> np.ndarray:
    """Time derivative on the interior for a boundary-consistent full vector ``u``."""
    net = spec.net
    u = net.vector(u)
    S = net.interior_idx
    d = u[None, :] - u[S][:, None]
    lap = (phi_p(d, spec.p) * net.w[S]).sum(axis=1)
    return lap + spec.lam * phi_p(u[S], spec.q + 1.0)


class _System:
    """Interior-only right-hand side with the boundary solve folded in."""

    def __init__(self, spec: ProblemSpec, bcfg: BoundarySolveConfig):
        net = spec.net
        self.net = net
        self.S = net.interior_idx
        self.wS = np.ascontiguousarray(net.w[self.S])
        self.pm1 = spec.p - 1.0
        self.q = spec.q
        self.lam = spec.lam
        self.p = spec.p
        self.bcfg = bcfg
        self.u = spec.u0.copy()

    def full(self, y: np.ndarray) -> np.ndarray:
        u = self.u.copy()
        u[self.S] = y
        return fill_boundary(self.net, u, self.p, self.bcfg)

    def __call__(self, y: np.ndarray) -> np.ndarray:
        u = self.full(y)
        d = u[None, :] - y[:, None]
        lap = (np.sign(d) * np.abs(d) ** self.pm1 * self.wS).sum(axis=1)
        return lap + self.lam * np.sign(y) * np.abs(y) ** self.q


# Dormand-Prince 5(4); the system is autonomous so the nodes c_i are not needed
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = _B - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 5.0
_BETA = 0.08  # PI memory exponent
_ALPHA = 0.2 - 0.75 * _BETA
_GROWTH_WINDOW = 10


def _growing(step_max: list[float]) -> bool:
    if len(step_max) < _GROWTH_WINDOW + 1:
        return False
    tail = step_max[-(_GROWTH_WINDOW + 1):]
    return all(b > a for a, b in zip(tail, tail[1:]))


def integrate(
    spec: ProblemSpec,
    cfg: IntegratorConfig,
    bcfg: BoundarySolveConfig = DEFAULT_CONFIG,
) -> Trajectory:
    """Integrate from ``spec.u0`` until horizon, blow-up, extinction or failure."""
    f = _System(spec, bcfg)
    y = spec.interior_u0.astype(float).copy()
    t = 0.0
    h = min(cfg.dt_init, cfg.t_horizon)
    k = np.empty((7, y.size))
    k[0] = f(y)
    err_prev = 1e-4

    times = [0.0]
    states = [f.full(y)]
    step_t = [0.0]
    step_m = [float(y.max()) if y.size else 0.0]
    n_acc = n_rej = 0
    outcome: Outcome | None = None

    def record(t_now: float, u_full: np.ndarray, force: bool = False) -> None:
        if force or n_acc % cfg.snapshot_stride == 0:
            if times[-1] == t_now:
                states[-1] = u_full
            else:
                times.append(t_now)
                states.append(u_full)

    nontrivial = bool(np.any(y != 0))

    while outcome is None:
        if t >= cfg.t_horizon:
            outcome = Outcome(RAN_TO_HORIZON, None, f"reached t = {t:.17g}")
            break
        if n_acc + n_rej >= cfg.max_steps:
            outcome = Outcome(STEP_FAILURE, None, f"step budget {cfg.max_steps} exhausted at t = {t:.17g}")
            break
        last = h >= cfg.t_horizon - t
        if last:
            h = cfg.t_horizon - t
        for s in range(1, 7):
            ys = y + h * np.dot(_A[s], k[:s])
            k[s] = f(ys)
        y_new = ys  # stage 7 is evaluated at the 5th-order solution
        err = h * np.dot(_E, k)
        scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        e = float(np.sqrt(np.mean((err / scale) ** 2))) if y.size else 0.0
        if not (np.all(np.isfinite(y_new)) and math.isfinite(e)):
            e = math.inf

        if e <= 1.0:
            t = cfg.t_horizon if last else t + h
            n_acc += 1
            clipped = bool(np.any(y_new < 0))
            y = np.maximum(y_new, 0.0)
            k[0] = f(y) if clipped else k[6]
            m = float(y.max())
            step_t.append(t)
            step_m.append(m)
            l2 = float(np.dot(y, y))
            # zero data is an equilibrium, not an extinction
            if nontrivial and l2 <= cfg.extinction_threshold:
                zero = np.zeros(spec.net.n)
                record(t, zero, force=True)
                outcome = Outcome(EXTINCT, t, f"sum u^2 = {l2:.3g} at t = {t:.17g}")
                break
            u_full = f.full(y)
            if m >= cfg.blowup_threshold and _growing(step_m):
                record(t, u_full, force=True)
                try:
                    t_est = fit_blowup_time(np.array(step_t), np.array(step_m), spec.q)[0]
                except ValueError:
                    t_est = t
                outcome = Outcome(BLEW_UP, t_est, f"max u = {m:.3g} at t = {t:.17g}")
                break
            record(t, u_full, force=(t >= cfg.t_horizon))
            fac = _SAFETY * max(e, 1e-10) ** (-_ALPHA) * err_prev ** _BETA
            h *= min(_FAC_MAX, max(_FAC_MIN, fac))
            err_prev = max(e, 1e-4)
        else:
            n_rej += 1
            fac = _SAFETY * e ** (-0.2) if math.isfinite(e) else _FAC_MIN
            h *= min(1.0, max(_FAC_MIN, fac))

        if outcome is None and h < cfg.dt_min:
            u_full = f.full(y)
            record(t, u_full, force=True)
            why = "max u growing" if _growing(step_m) else "max u not growing"
            outcome = Outcome(STEP_FAILURE, None, f"dt < dt_min at t = {t:.17g} ({why})")

    traj = Trajectory(
        np.array(times),
        np.array(states),
        outcome,
        np.array(step_t),
        np.array(step_m),
        n_acc,
        n_rej,
    )
    log.info("integrate: %s after %d accepted / %d rejected steps", outcome, n_acc, n_rej)
    return traj


def sample_on_grid(spec: ProblemSpec, cfg: IntegratorConfig, times, bcfg: BoundarySolveConfig = DEFAULT_CONFIG):
    """Solution at prescribed times, restarting the integrator at each one.

    The system is autonomous, so each segment starts from the previous end
    state.  Stops early on blow-up or step failure; after extinction the
    remaining rows are zero.

    Returns ``(times_reached, states, outcome)`` with ``states`` full vertex
    vectors, the first row being ``u0`` at ``times[0] = 0``.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or times[0] != 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must start at 0 and increase strictly")
    rows = [spec.u0.copy()]
    cur = spec
    outcome = Outcome(RAN_TO_HORIZON, None, "")
    for k in range(1, times.size):
        seg = integrate(cur, replace(cfg, t_horizon=times[k] - times[k - 1]), bcfg)
        outcome = seg.outcome
        if outcome.kind == EXTINCT:
            rows.extend(np.zeros(spec.net.n) for _ in range(times.size - k))
            outcome = Outcome(EXTINCT, times[k - 1] + outcome.t_est, outcome.message)
            break
        if outcome.kind != RAN_TO_HORIZON:
            break
        rows.append(seg.final)
        cur = ProblemSpec(spec.net, spec.p, spec.q, spec.lam, seg.final)
    return times[: len(rows)], np.array(rows), outcome


# -- blow-up time and rate ----------------------------------------------------


def _final_decade(step_t: np.ndarray, step_m: np.ndarray) -> np.ndarray:
    """Indices of the final strictly growing run with max u within a decade of the last."""
    n = len(step_m)
    i = n - 1
    while i > 0 and step_m[i - 1] < step_m[i] and step_m[i - 1] >= step_m[-1] / 10.0:
        i -= 1
    return np.arange(i, n)


def _golden_min(fun, a: float, b: float, tol: float = 1e-12, max_iter: int = 200) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def fit_blowup_time(step_t: np.ndarray, step_m: np.ndarray, q: float):
    """Extrapolated blow-up time from the last decade of growth of max u.

    Fits ``log max u = c - log(T - t) / (q - 1)`` over the final decade and
    picks ``T`` by golden-section search on the fit residual.  The search
    variable is ``log(T - t_last)``, seeded by linear extrapolation of
    ``max u^(1-q)`` to zero.

    Returns ``(T, c, idx)`` with ``idx`` the indices used.
    """
    if not q > 1:
        raise ValueError("blow-up fit needs q > 1")
    idx = _final_decade(step_t, step_m)
    if len(idx) < 3:
        raise ValueError("not enough growth data for a fit")
    t = step_t[idx]
    m = step_m[idx]
    t_last = t[-1]
    back = t_last - t  # exact for the last point
    y = np.log(m)
    k = -1.0 / (q - 1.0)

    z = m ** (1.0 - q)
    slope = (z[-1] - z[-2]) / (t[-1] - t[-2])
    delta0 = -z[-1] / slope if slope < 0 else max(t[-1] - t[-2], 1e-300)

    def sse(log_delta: float) -> float:
        x = np.log(math.exp(log_delta) + back)
        r = y - k * x
        return float(np.sum((r - r.mean()) ** 2))

    ld0 = math.log(delta0)
    ld = _golden_min(sse, ld0 - 7.0, ld0 + 7.0)
    delta = math.exp(ld)
    x = np.log(delta + back)
    c = float(np.mean(y - k * x))
    return t_last + delta, c, idx


@dataclass(frozen=True)
class BlowupRate:
    """Fitted blow-up rate against its predicted limit.

    ``limit_estimate`` is the fitted value of ``(T - t)^(1/(q-1)) max u``
    near ``T``; ``theoretical`` is ``(1/(lam (q-1)))^(1/(q-1))``.
    ``lower_ok`` / ``upper_ok`` report the two-sided envelope check over the
    final decade of growth (``upper_ok`` only where the upper envelope is
    defined).
    """

    limit_estimate: float
    theoretical: float
    t_blowup: float
    alpha: float
    times: np.ndarray = field(repr=False)
    max_u: np.ndarray = field(repr=False)
    lower: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)
    lower_ok: bool = True
    upper_ok: bool = True
    rel_tol: float = 1e-6

    @property
    def relative_error(self) -> float:
        return abs(self.limit_estimate - self.theoretical) / self.theoretical


def estimate_blowup_rate(traj: Trajectory, spec: ProblemSpec, rel_tol: float = 1e-6) -> BlowupRate:
    """Blow-up rate of ``max_S u`` from a blown-up trajectory.

    Envelopes checked at every step in the final decade of growth, with
    ``d = T - t``::

        lower(d) = (lam (q-1) d)^(-1/(q-1))
        upper(d) = (lam (q-1) d - alpha d^((2q-p)/(q-1)))^(-1/(q-1))
        alpha    = lam^((q-p+1)/(q-1)) max_S deg (q-1)^((2q-p)/(q-1))

    ``upper`` is only defined where its bracket is positive (NaN elsewhere).
    Both comparisons allow a relative slack ``rel_tol``, since ``T`` itself
    is estimated.
    """
    if traj.outcome.kind != BLEW_UP:
        raise ValueError(f"trajectory did not blow up ({traj.outcome})")
    p, q, lam = spec.p, spec.q, spec.lam
    if not q > 1:
        raise ValueError("blow-up rate needs q > 1")
    T, c, idx = fit_blowup_time(traj.step_times, traj.step_max, q)
    t = traj.step_times[idx]
    m = traj.step_max[idx]
    d = T - t
    theo = (1.0 / (lam * (q - 1.0))) ** (1.0 / (q - 1.0))
    limit = math.exp(c)
    net = spec.net
    dmax = max(degree(net, x) for x in net.interior)
    e = (2.0 * q - p) / (q - 1.0)
    alpha = lam ** ((q - p + 1.0) / (q - 1.0)) * dmax * (q - 1.0) ** e
    lower = (lam * (q - 1.0) * d) ** (-1.0 / (q - 1.0))
    bracket = lam * (q - 1.0) * d - alpha * d ** e
    with np.errstate(invalid="ignore", divide="ignore"):
        upper = np.where(bracket > 0, np.abs(bracket) ** (-1.0 / (q - 1.0)), np.nan)
    lower_ok = bool(np.all(m >= lower * (1.0 - rel_tol)))
    have = np.isfinite(upper)
    upper_ok = bool(np.all(m[have] <= upper[have] * (1.0 + rel_tol)))
    return BlowupRate(limit, theo, T, alpha, t, m, lower, upper, lower_ok, upper_ok, rel_tol)


# -- export ---------------------------------------------------------------------


def write_trajectory(traj: Trajectory, spec: ProblemSpec, csv_path: str | Path,
                     meta_path: str | Path | None = None, extra: dict | None = None) -> None:
    """Write snapshots as CSV and outcome metadata as JSON.

    CSV header: ``t,u_<label>...,max_u,l2_sq`` where ``max_u`` and ``l2_sq``
    are taken over interior vertices.  Numbers use 17 significant digits.

    The JSON sidecar (``<csv stem>.meta.json`` by default) holds ``outcome``,
    ``t_est``, ``message``, ``p``, ``q``, ``lambda``, ``n_accepted``,
    ``n_rejected``, ``n_snapshots`` and any ``extra`` keys.
    """
    net = spec.net
    csv_path = Path(csv_path)
    S = net.interior_idx
    with csv_path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", *[f"u_{v}" for v in net.labels], "max_u", "l2_sq"])
        for t, u in zip(traj.times, traj.states):
            uS = u[S]
            row = [t, *u, uS.max(), float(np.dot(uS, uS))]
            wr.writerow([f"{float(v):.17g}" for v in row])
    if meta_path is None:
        meta_path = csv_path.with_suffix(".meta.json")
    meta = {
        "outcome": traj.outcome.kind,
        "t_est": traj.outcome.t_est,
        "message": traj.outcome.message,
        "p": spec.p,
        "q": spec.q,
        "lambda": spec.lam,
        "n_accepted": traj.n_accepted,
        "n_rejected": traj.n_rejected,
        "n_snapshots": int(len(traj.times)),
    }
    if extra:
        meta.update(extra)
    Path(meta_path).write_text(json.dumps(meta, indent=2) + "\n")


def boundary_residuals(spec: ProblemSpec, u) -> np.ndarray:
    """``|B[u](z)|`` for every boundary vertex, in boundary order."""
    return np.array([abs(boundary_residual(spec.net, u, z, spec.p)) for z in spec.net.boundary])
