"""Discrete calculus on a :class:`~graphpde.network.Network`.

All sums run over the full vertex set and rely on ``w(x, y) = 0`` for
non-neighbours.  Vertex functions are plain float vectors in the network's
vertex order; mappings ``label -> value`` are accepted wherever a vector is.

The odd power ``phi_p(t) = |t|^(p-2) t`` is continued by ``phi_p(0) = 0``,
which is also the limit for ``1 < p < 2``.

The directional derivative is implemented with the kernel
``|u(y) - u(x)|^(p-2)``; no theorem depends on it.
"""

from __future__ import annotations

import numpy as np

from .network import Network

__all__ = [
    "directional_derivative",
    "green_identity_residuals",
    "p_gradient",
    "p_laplacian",
    "p_laplacian_all",
    "p_normal_derivative",
    "phi_p",
]


def _check_p(p: float) -> None:
    if not p > 1:
        raise ValueError(f"p must be > 1, got {p}")


def phi_p(t, p: float):
    """``|t|^(p-2) t`` with the value 0 at ``t = 0``.

    Works elementwise on arrays; returns a Python float for scalar input.
    """
    _check_p(p)
    t_arr = np.asarray(t, dtype=float)
    out = np.sign(t_arr) * np.abs(t_arr) ** (p - 1.0)
    if out.ndim == 0:
        return float(out)
    return out


def _pairwise_phi(u: np.ndarray, p: float) -> np.ndarray:
    # entry [x, y] = phi_p(u(y) - u(x))
    return phi_p(u[None, :] - u[:, None], p)


def p_laplacian_all(net: Network, u, p: float) -> np.ndarray:
    """Discrete p-Laplacian at every vertex, as a vector."""
    u = net.vector(u)
    return (_pairwise_phi(u, p) * net.w).sum(axis=1)


def p_laplacian(net: Network, u, x: str, p: float) -> float:
    """``sum_y phi_p(u(y) - u(x)) w(x, y)``."""
    _check_p(p)
    u = net.vector(u)
    i = net.idx(x)
    return float(np.dot(phi_p(u - u[i], p), net.w[i]))


def p_normal_derivative(net: Network, u, z: str, p: float) -> float:
    """Outward p-normal derivative at boundary vertex ``z``.

    ``sum_{y in S} phi_p(u(z) - u(y)) w(z, y)``
    """
    _check_p(p)
    zi = net.idx(z)
    if not net.is_boundary[zi]:
        raise ValueError(f"{z} is not a boundary vertex")
    u = net.vector(u)
    S = net.interior_idx
    return float(np.dot(phi_p(u[zi] - u[S], p), net.w[zi, S]))


def directional_derivative(net: Network, u, x: str, y: str, p: float) -> float:
    """p-directional derivative of ``u`` at ``x`` towards ``y``."""
    _check_p(p)
    u = net.vector(u)
    i, j = net.idx(x), net.idx(y)
    return phi_p(u[j] - u[i], p) * float(np.sqrt(net.w[i, j]))


def p_gradient(net: Network, u, x: str, p: float) -> np.ndarray:
    """Vector of directional derivatives at ``x`` over all vertices."""
    _check_p(p)
    u = net.vector(u)
    i = net.idx(x)
    return phi_p(u - u[i], p) * np.sqrt(net.w[i])


def green_identity_residuals(net: Network, f, g, p: float) -> tuple[float, float]:
    """Absolute residuals of the two summation-by-parts identities.

    (i)  ``2 sum_x g(x) (-Lap_p f)(x) = sum_{x,y} phi_p(f(y)-f(x)) (g(y)-g(x)) w``
    (ii) ``2 sum_x f(x) (-Lap_p f)(x) = sum_{x,y} |f(y)-f(x)|^p w``

    The left sides go through :func:`p_laplacian_all`; the right sides are
    direct double sums, so a small residual cross-checks the operator.
    """
    f = net.vector(f)
    g = net.vector(g)
    lap = p_laplacian_all(net, f, p)
    df = f[None, :] - f[:, None]
    dg = g[None, :] - g[:, None]
    rhs1 = float((phi_p(df, p) * dg * net.w).sum())
    rhs2 = float((np.abs(df) ** p * net.w).sum())
    r1 = abs(2.0 * float(np.dot(g, -lap)) - rhs1)
    r2 = abs(2.0 * float(np.dot(f, -lap)) - rhs2)
    return r1, r2
