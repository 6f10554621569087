"""Boundary values from the mixed boundary condition.

Given interior values, the value ``g`` at a boundary vertex ``z`` solves

    psi(g) = sum_{x in S} phi_p(g - u(x)) a(x) + b phi_p(g) = 0,

with ``a(x) = w(z, x)`` and ``b = sigma(z) / mu(z)`` (the condition divided
through by ``mu(z)``).  ``psi`` is continuous, strictly increasing and onto,
so the root is unique and any bracketing method converges.  The solver uses
false position (Illinois variant) with bisection as a fallback.  Newton is
avoided on purpose: for ``1 < p < 2`` the derivative of ``psi`` is unbounded
at kinks.

Dirichlet vertices (``mu = 0``) return 0 exactly.  A vertex with a single
interior neighbour has the closed form ``g = u / (1 + (b/a)^(1/(p-1)))``,
which covers the Neumann (``g = u``) and the single-edge Robin case.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .network import Network
from .operators import p_normal_derivative, phi_p

__all__ = [
    "BoundarySolveConfig",
    "BracketError",
    "bisect_increasing",
    "boundary_residual",
    "fill_boundary",
    "psi",
    "solve_boundary_value",
]


class BracketError(RuntimeError):
    """No sign change found (only reachable with NaN or inf inputs)."""


@dataclass(frozen=True)
class BoundarySolveConfig:
    """Root-finding controls.

    With ``polish`` set, the search continues past ``abs_tol`` down to
    floating-point resolution.  This keeps ``|B[u]|`` small when the root
    sits close to a neighbour value and ``p`` is near 1, where ``psi`` is
    very steep.  Either way the search stops as soon as
    ``|psi| <= residual_tol``.
    """

    abs_tol: float = 1e-12
    max_bracket_doublings: int = 100
    polish: bool = True
    residual_tol: float = 1e-14

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_bracket_doublings < 0:
            raise ValueError("max_bracket_doublings must be nonnegative")
        if self.residual_tol < 0:
            raise ValueError("residual_tol must be nonnegative")


DEFAULT_CONFIG = BoundarySolveConfig()


def psi(gamma: float, interior_values: Sequence[tuple[float, float]], b: float, p: float) -> float:
    """``sum phi_p(gamma - u) a + b phi_p(gamma)`` over ``(u, a)`` pairs."""
    if p <= 1:
        raise ValueError(f"p must be > 1, got {p}")
    if b < 0 or any(a < 0 for _, a in interior_values):
        raise ValueError("weights must be nonnegative")
    if b == 0 and not any(a > 0 for _, a in interior_values):
        raise ValueError("psi is not bijective: all weights are zero")
    s = b * phi_p(gamma, p)
    for u, a in interior_values:
        s += a * phi_p(gamma - u, p)
    return float(s)


def bisect_increasing(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    abs_tol: float = 1e-12,
    max_doublings: int = 100,
    polish: bool = False,
    f_tol: float = 0.0,
) -> float:
    """Root of an increasing function by safeguarded bracketing.

    The bracket ``[lo, hi]`` is widened by doubling until
    ``f(lo) <= 0 <= f(hi)``.  The search stops once the bracket is narrower
    than ``abs_tol`` (or, with ``polish``, once it cannot be split further in
    floating point), or as soon as ``|f| <= f_tol``; of the final candidates
    the one with the smallest ``|f|`` is returned.
    """
    flo, fhi = f(lo), f(hi)
    k = 0
    while not (flo <= 0.0 <= fhi):
        if math.isnan(flo) or math.isnan(fhi) or k >= max_doublings:
            raise BracketError(f"no sign change on [{lo}, {hi}] (f = {flo}, {fhi})")
        width = max(hi - lo, 1.0)
        if flo > 0.0:
            lo -= width
            flo = f(lo)
        if fhi < 0.0:
            hi += width
            fhi = f(hi)
        k += 1
    if abs(flo) <= f_tol and -flo <= fhi:
        return lo
    if abs(fhi) <= f_tol:
        return hi
    # Illinois false position; a step that fails to halve the bracket is
    # followed by a plain bisection step, so the width at least halves every
    # two evaluations
    slo, shi = flo, fhi  # secant weights, scaled down on repeated retention
    last = 0
    secant = True
    while polish or hi - lo > abs_tol:
        half = 0.5 * (lo + hi)
        if half <= lo or half >= hi:
            break
        mid = half
        if secant:
            s = (lo * shi - hi * slo) / (shi - slo)
            if lo < s < hi:
                mid = s
        width = hi - lo
        fm = f(mid)
        if abs(fm) <= f_tol:
            return mid
        if fm < 0.0:
            lo, flo, slo = mid, fm, fm
            if last < 0:
                shi *= 0.5
            last = -1
        else:
            hi, fhi, shi = mid, fm, fm
            if last > 0:
                slo *= 0.5
            last = 1
        secant = hi - lo <= 0.5 * width
    return lo if -flo <= fhi else hi


def _solve(values, weights, b: float, p: float, cfg: BoundarySolveConfig) -> float:
    """Root of psi for interior neighbour ``values`` with weights ``a``."""
    if len(values) == 1:
        u, a = float(values[0]), float(weights[0])
        if b == 0.0:
            return u
        return u / (1.0 + (b / a) ** (1.0 / (p - 1.0)))
    pm1 = p - 1.0
    pairs = list(zip(map(float, values), map(float, weights)))

    def f(g: float) -> float:
        s = b * math.copysign(abs(g) ** pm1, g) if b else 0.0
        for v, a in pairs:
            d = g - v
            s += a * math.copysign(abs(d) ** pm1, d)
        return s

    lo = min(0.0, min(v for v, _ in pairs))
    hi = max(0.0, max(v for v, _ in pairs))
    if lo == hi:
        return lo
    return bisect_increasing(f, lo, hi, cfg.abs_tol, cfg.max_bracket_doublings, cfg.polish, cfg.residual_tol)


def solve_boundary_value(
    net: Network,
    u,
    z: str,
    p: float,
    cfg: BoundarySolveConfig = DEFAULT_CONFIG,
) -> float:
    """Boundary value at ``z`` that makes ``B[u](z) = 0``.

    Only the interior entries of ``u`` are read.  ``u`` may be a full
    vector or a mapping over (at least) the interior labels.
    """
    if p <= 1:
        raise ValueError(f"p must be > 1, got {p}")
    zi = net.idx(z)
    if not net.is_boundary[zi]:
        raise ValueError(f"{z} is not a boundary vertex")
    k = int(np.searchsorted(net.boundary_idx, zi))
    mu, sigma = net.mu_arr[k], net.sigma_arr[k]
    if mu == 0.0:
        return 0.0
    nbr, wts = net.boundary_neighbors()[k]
    if len(nbr) == 0:
        raise ValueError(f"boundary vertex {z} has no interior neighbor")
    u = net.vector(u)
    vals = u[nbr]
    if not np.all(np.isfinite(vals)):
        raise BracketError(f"non-finite interior values next to {z}")
    return _solve(vals, wts, sigma / mu, p, cfg)


def fill_boundary(net: Network, u, p: float, cfg: BoundarySolveConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Copy of ``u`` with every boundary entry re-solved from the interior."""
    out = np.array(net.vector(u), dtype=float)
    nbrs = net.boundary_neighbors()
    for k, zi in enumerate(net.boundary_idx):
        mu = net.mu_arr[k]
        if mu == 0.0:
            out[zi] = 0.0
            continue
        nbr, wts = nbrs[k]
        out[zi] = _solve(out[nbr], wts, net.sigma_arr[k] / mu, p, cfg)
    return out


def boundary_residual(net: Network, u, z: str, p: float) -> float:
    """``B[u](z) = mu(z) dnu(z) + sigma(z) phi_p(u(z))`` (unscaled)."""
    u = net.vector(u)
    zi = net.idx(z)
    return net.mu[z] * p_normal_derivative(net, u, z, p) + net.sigma[z] * phi_p(u[zi], p)
