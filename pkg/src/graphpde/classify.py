"""A-priori regime classification from the blow-up / global / extinction theorems.

:func:`classify` evaluates every theorem whose parameter range contains the
problem, records each hypothesis check with the numbers that went into it,
and derives a single regime:

``BlowUp``
    finite-time blow-up is certified, with an upper bound on ``T``.
``Extinction``
    finite-time extinction is certified, with an upper bound on ``T``.
``GlobalBounded``
    global existence with a uniform bound on ``sum_S u^2``.
``GlobalGrowing``
    global existence with a growth envelope (or, in the critical case
    below the first eigenvalue, a decaying one).
``Indeterminate``
    no hypothesis is met; the report lists the near misses.

A certified blow-up or extinction outranks a global-existence result.

Theorem ids used in ``fired``:

=========================  =================================================
``trivial-data``           ``u0 = 0`` on S, the zero solution
``neumann``                ``sigma = 0``: blow-up iff ``q > 1``
``large-data-blowup``      ``p-1 < q``, ``q > 1``, large ``max u0``
``global-bound``           ``q < p-1``: uniform l2 bound
``global-existence``       ``p-1 <= q <= 1``: global with growth envelope
``small-data-extinction``  ``p-1 < q``, ``1 < p < 2``, small data
``critical-blowup``        ``p-1 = q > 1``, compare ``lam`` with ``lambda_p0``
``critical-extinction``    ``p-1 = q < 1``, compare ``lam`` with ``lambda_p0``
=========================  =================================================
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import ProblemSpec
from .eigen import RESIDUAL_TOL, EigenPair
from .network import Network, degree

__all__ = [
    "CRITICAL_TOL",
    "EigenRequiredError",
    "Regime",
    "RegimeReport",
    "TheoremCheck",
    "blowup_threshold_initial_data",
    "blowup_threshold_lambda",
    "classify",
    "extinction_threshold_lambda",
    "l2_envelope",
    "local_existence_t0",
    "max_interior_degree",
]

# |lam - lambda_p0| below this counts as equality in the critical case
CRITICAL_TOL = 10.0 * RESIDUAL_TOL


class Regime(str, enum.Enum):
    BLOW_UP = "BlowUp"
    GLOBAL_BOUNDED = "GlobalBounded"
    GLOBAL_GROWING = "GlobalGrowing"
    EXTINCTION = "Extinction"
    INDETERMINATE = "Indeterminate"


class EigenRequiredError(ValueError):
    """A branch needs the first eigenvalue but none was supplied."""


@dataclass(frozen=True)
class TheoremCheck:
    theorem: str
    holds: bool
    values: dict = field(default_factory=dict)
    note: str = ""

    def to_dict(self) -> dict:
        return {"theorem": self.theorem, "holds": self.holds, "values": dict(self.values), "note": self.note}


@dataclass
class RegimeReport:
    """Outcome of :func:`classify`.

    ``fired`` holds the checks whose hypotheses are met; ``near_misses`` the
    ones evaluated for this parameter range that were not.
    """

    regime: Regime
    fired: list[TheoremCheck] = field(default_factory=list)
    near_misses: list[TheoremCheck] = field(default_factory=list)
    blowup_time_upper: float | None = None
    extinction_time_upper: float | None = None
    global_l2_bound: float | None = None
    lambda_p0_used: float | None = None

    @property
    def theorems(self) -> list[str]:
        return [c.theorem for c in self.fired]

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "blowup_time_upper": self.blowup_time_upper,
            "extinction_time_upper": self.extinction_time_upper,
            "global_l2_bound": self.global_l2_bound,
            "lambda_p0_used": self.lambda_p0_used,
            "fired": [c.to_dict() for c in self.fired],
            "near_misses": [c.to_dict() for c in self.near_misses],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_json_default)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj).__name__}")


# -- threshold formulas -----------------------------------------------------------


def max_interior_degree(net: Network) -> float:
    return max(degree(net, x) for x in net.interior)


def blowup_threshold_initial_data(net: Network, p: float, q: float, lam: float) -> float:
    """``(max_S deg / lam)^(1/(q-p+1))``: larger ``max_S u0`` forces blow-up."""
    if not (p > 1 and q > p - 1):
        raise ValueError(f"need q > p-1 > 0, got p={p}, q={q}")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return (max_interior_degree(net) / lam) ** (1.0 / (q - p + 1.0))


def blowup_threshold_lambda(net: Network, p: float, q: float, u0) -> float:
    """``max_S deg / (max_S u0)^(q-p+1)``: larger ``lam`` forces blow-up."""
    if not (p > 1 and q > p - 1):
        raise ValueError(f"need q > p-1 > 0, got p={p}, q={q}")
    m = float(net.vector(u0)[net.interior_idx].max())
    if not m > 0:
        raise ValueError("initial data vanishes on the interior")
    return max_interior_degree(net) / m ** (q - p + 1.0)


def extinction_threshold_lambda(net: Network, p: float, q: float, u0, lambda_p0: float) -> float:
    """``lambda_p0 / (|S|^((1-q)/2) (sum_S u0^2)^((q-p+1)/2))``.

    Smaller ``lam`` certifies extinction (``1 < p < 2``, ``q > p-1``).
    Returns 0 when ``lambda_p0 = 0``.
    """
    if not (1 < p < 2):
        raise ValueError(f"need 1 < p < 2, got p={p}")
    if not q > p - 1:
        raise ValueError(f"need q > p-1, got p={p}, q={q}")
    if lambda_p0 < 0:
        raise ValueError("lambda_p0 must be nonnegative")
    if lambda_p0 == 0:
        return 0.0
    uS = net.vector(u0)[net.interior_idx]
    l2 = float(np.dot(uS, uS))
    if l2 == 0:
        return math.inf
    n = len(uS)
    return lambda_p0 / (n ** ((1.0 - q) / 2.0) * l2 ** ((q - p + 1.0) / 2.0))


def local_existence_t0(spec: ProblemSpec) -> float:
    """Local existence time ``max u0 / (w0 (4 max u0)^(p-1) + lam (2 max u0)^q)``.

    ``w0`` is the largest weighted degree over S.
    """
    m = float(spec.interior_u0.max())
    if not m > 0:
        raise ValueError("initial data vanishes on the interior")
    w0 = max_interior_degree(spec.net)
    return m / (w0 * (4.0 * m) ** (spec.p - 1.0) + spec.lam * (2.0 * m) ** spec.q)


def l2_envelope(spec: ProblemSpec, t) -> np.ndarray:
    """Growth envelope for ``sum_S u^2`` when ``p-1 <= q <= 1`` and ``sigma != 0``.

    ``q < 1``: ``(Y0^((1-q)/2) + lam |S|^((1-q)/2) (1-q) t)^(2/(1-q))``;
    ``q = 1``: ``Y0 e^(2 lam t)``, with ``Y0 = sum_S u0^2``.
    """
    q, lam = spec.q, spec.lam
    if not (spec.p - 1 <= q <= 1):
        raise ValueError("envelope needs p-1 <= q <= 1")
    t = np.asarray(t, dtype=float)
    uS = spec.interior_u0
    y0 = float(np.dot(uS, uS))
    if q == 1:
        return y0 * np.exp(2.0 * lam * t)
    n = len(uS)
    return (y0 ** ((1.0 - q) / 2.0) + lam * n ** ((1.0 - q) / 2.0) * (1.0 - q) * t) ** (2.0 / (1.0 - q))


# -- branches -------------------------------------------------------------------


@dataclass
class _Ctx:
    spec: ProblemSpec
    eigen: EigenPair | None
    n: int
    sum_u0: float
    l2_u0: float
    max_u0: float

    def lambda_p0(self, branch: str) -> float:
        if self.eigen is None:
            raise EigenRequiredError(f"branch {branch!r} needs the first eigenpair (lambda_p0)")
        return self.eigen.lambda_p0


def _neumann(c: _Ctx) -> TheoremCheck:
    q, lam = c.spec.q, c.spec.lam
    vals = {"q": q, "sum_u0": c.sum_u0}
    if q > 1:
        T = c.sum_u0 ** (1.0 - q) / (lam * (q - 1.0) * c.n ** (1.0 - q))
        vals["T_upper"] = T
        return TheoremCheck("neumann", True, vals, "blow-up for every nontrivial u0")
    vals["growth"] = "exponential" if q == 1 else "polynomial"
    return TheoremCheck("neumann", True, vals, "global; sum_S u grows")


def _large_data_blowup(c: _Ctx) -> TheoremCheck:
    net, p, q, lam = c.spec.net, c.spec.p, c.spec.q, c.spec.lam
    dmax = max_interior_degree(net)
    thr = blowup_threshold_initial_data(net, p, q, lam)
    vals = {"max_u0": c.max_u0, "threshold": thr, "max_degree": dmax,
            "lambda_threshold": blowup_threshold_lambda(net, p, q, c.spec.u0)}
    holds = c.max_u0 > thr
    if holds:
        c0 = 1.0 - dmax / lam * c.max_u0 ** (p - 1.0 - q)
        vals["C0"] = c0
        vals["T_upper"] = c.max_u0 ** (1.0 - q) / (c0 * lam * (q - 1.0))
    return TheoremCheck("large-data-blowup", holds, vals)


def _global_bound(c: _Ctx) -> TheoremCheck:
    p, q, lam = c.spec.p, c.spec.q, c.spec.lam
    l0 = c.lambda_p0("global-bound")
    e = 2.0 / (p - q - 1.0)
    terms = [
        (lam * c.n ** ((p - 2.0) / 2.0) / l0) ** e,
        (lam * c.n ** ((p - q - 1.0) / 2.0) / l0) ** e,
        (lam * c.n ** ((1.0 - q) / 2.0) / l0) ** e,
    ]
    bound = max([c.sum_u0, *terms])
    bound_sq = max([c.l2_u0, *terms])
    vals = {"lambda_p0": l0, "sum_u0": c.sum_u0, "sum_u0_sq": c.l2_u0,
            "terms": terms, "bound": bound, "bound_sum_u0_sq": bound_sq}
    return TheoremCheck("global-bound", True, vals, "bound uses sum_S u0; bound_sum_u0_sq uses sum_S u0^2")


def _global_existence(c: _Ctx) -> TheoremCheck:
    q = c.spec.q
    vals = {"sum_u0_sq": c.l2_u0, "growth": "exponential" if q == 1 else "polynomial"}
    return TheoremCheck("global-existence", True, vals, "see l2_envelope")


def _small_data_extinction(c: _Ctx) -> TheoremCheck:
    p, q, lam = c.spec.p, c.spec.q, c.spec.lam
    l0 = c.lambda_p0("small-data-extinction")
    y = c.l2_u0
    a = (q - p + 1.0) / 2.0
    lhs = lam * c.n ** ((1.0 - q) / 2.0) * y ** a
    stated = lam * c.n ** 0.5 * y ** a
    case2 = lam * y ** a
    vals = {
        "lambda_p0": l0,
        "lhs": lhs,
        "lambda_threshold": extinction_threshold_lambda(c.spec.net, p, q, c.spec.u0, l0),
        "lhs_sqrt_S": stated,
        "lhs_no_S": case2,
    }
    # remark bound as printed; negative when its own hypothesis fails
    vals["T_upper_remark"] = y ** ((2.0 - p) / 2.0) / ((2.0 - p) * (l0 - stated))
    holds = lhs < l0 and y > 0
    if holds:
        vals["T_upper"] = y ** ((2.0 - p) / 2.0) / ((2.0 - p) * (l0 - lhs))
    return TheoremCheck("small-data-extinction", holds, vals)


def _critical_blowup(c: _Ctx) -> tuple[TheoremCheck, Regime]:
    spec = c.spec
    p, lam = spec.p, spec.lam
    l0 = c.lambda_p0("critical-blowup")
    phi = c.eigen.phi0
    S = spec.net.interior_idx
    M, m = float(phi[S].max()), float(phi[S].min())
    gamma = spec.net.boundary_idx[spec.net.mu_arr > 0]
    u0_sg = spec.u0[np.concatenate([S, gamma])]
    vals = {"lambda_p0": l0, "M": M, "m": m, "gap": lam - l0}
    if abs(lam - l0) <= CRITICAL_TOL:
        k = float(u0_sg.max()) / m
        vals["l2_bound"] = c.n * (k * M) ** 2
        return TheoremCheck("critical-blowup", True, vals, "lam = lambda_p0: bounded"), Regime.GLOBAL_BOUNDED
    if lam < l0:
        k = float(u0_sg.max()) / m
        vals["l2_bound"] = c.n * (k * M) ** 2
        return TheoremCheck("critical-blowup", True, vals, "lam < lambda_p0: global, decaying"), Regime.GLOBAL_BOUNDED
    t0 = local_existence_t0(spec)
    umin = float(u0_sg.min())
    vals["t0"] = t0
    vals["min_u0"] = umin
    coef = (p - 2.0) * (lam - l0) * m ** (p - 2.0)
    vals["T_upper_remark_second"] = t0 + M ** (p - 2.0) / (coef * (2.0 * c.max_u0) ** (p - 2.0))
    if umin > 0:
        # comparison started at t = 0 is admissible once u0 > 0 on S and Gamma
        vals["T_upper"] = (M / umin) ** (p - 2.0) / coef
        note = "T_upper from the eigenfunction subsolution started at t = 0"
    else:
        vals["T_upper"] = vals["T_upper_remark_second"]
        note = "u0 vanishes somewhere on S or Gamma; T_upper is the printed estimate (unverified)"
    return TheoremCheck("critical-blowup", True, vals, note), Regime.BLOW_UP


def _critical_extinction(c: _Ctx) -> TheoremCheck:
    p, lam = c.spec.p, c.spec.lam
    l0 = c.lambda_p0("critical-extinction")
    vals = {"lambda_p0": l0, "gap": l0 - lam}
    holds = lam < l0 - CRITICAL_TOL
    if holds:
        d = (2.0 - p) * (l0 - lam)
        vals["T_upper"] = c.sum_u0 ** ((2.0 - p) / 2.0) / d
        vals["T_upper_sum_u0_sq"] = c.l2_u0 ** ((2.0 - p) / 2.0) / d
    return TheoremCheck("critical-extinction", holds, vals)


def classify(spec: ProblemSpec, eigen: EigenPair | None = None) -> RegimeReport:
    """Predicted regime of ``spec`` (see module docstring).

    ``eigen`` must be the first eigenpair for ``spec.net`` at ``spec.p``; it
    is needed whenever ``sigma != 0`` and the parameters fall in the
    bounded, extinction or critical ranges.
    """
    if eigen is not None and not math.isclose(eigen.p, spec.p, rel_tol=0, abs_tol=1e-12):
        raise ValueError(f"eigenpair is for p={eigen.p}, problem has p={spec.p}")
    net, p, q = spec.net, spec.p, spec.q
    uS = spec.interior_u0
    c = _Ctx(spec, eigen, len(uS), float(uS.sum()), float(np.dot(uS, uS)), float(uS.max()))
    rep = RegimeReport(Regime.INDETERMINATE)

    if c.max_u0 == 0:
        rep.fired.append(TheoremCheck("trivial-data", True, {}, "u = 0 for all t"))
        rep.regime = Regime.GLOBAL_BOUNDED
        rep.global_l2_bound = 0.0
        return rep

    if net.sigma_vanishes:
        chk = _neumann(c)
        rep.fired.append(chk)
        if q > 1:
            rep.regime = Regime.BLOW_UP
            rep.blowup_time_upper = chk.values["T_upper"]
        else:
            rep.regime = Regime.GLOBAL_GROWING
        return rep

    checks: list[TheoremCheck] = []
    blowup = extinction = None
    global_kind = None
    crit = abs(q - (p - 1.0)) <= 1e-12

    if not crit and q > p - 1 and q > 1:
        chk = _large_data_blowup(c)
        checks.append(chk)
        if chk.holds:
            blowup = chk.values["T_upper"]
    if q < p - 1 and not crit:
        chk = _global_bound(c)
        checks.append(chk)
        rep.global_l2_bound = chk.values["bound"]
        global_kind = Regime.GLOBAL_BOUNDED
    if p - 1 <= q <= 1 or (crit and q <= 1):
        checks.append(_global_existence(c))
        global_kind = Regime.GLOBAL_GROWING
    if not crit and q > p - 1 and 1 < p < 2:
        chk = _small_data_extinction(c)
        checks.append(chk)
        if chk.holds:
            extinction = chk.values["T_upper"]
    if crit and q > 1:
        chk, kind = _critical_blowup(c)
        checks.append(chk)
        if kind is Regime.BLOW_UP:
            blowup = chk.values["T_upper"]
        else:
            global_kind = kind
            rep.global_l2_bound = chk.values["l2_bound"]
    if crit and q < 1:
        chk = _critical_extinction(c)
        checks.append(chk)
        if chk.holds:
            extinction = chk.values["T_upper"]

    if eigen is not None and any("lambda_p0" in ch.values for ch in checks):
        rep.lambda_p0_used = eigen.lambda_p0
    rep.fired = [ch for ch in checks if ch.holds]
    rep.near_misses = [ch for ch in checks if not ch.holds]

    if blowup is not None and extinction is not None:
        rep.regime = Regime.INDETERMINATE  # contradictory certificates
    elif blowup is not None:
        rep.regime = Regime.BLOW_UP
        rep.blowup_time_upper = blowup
    elif extinction is not None:
        rep.regime = Regime.EXTINCTION
        rep.extinction_time_upper = extinction
    elif global_kind is not None:
        rep.regime = global_kind
    return rep
