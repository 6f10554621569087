"""Random networks and problems shared by the test modules."""

from __future__ import annotations

import numpy as np

from graphpde.network import Network


def random_network(rng: np.random.Generator, n_interior: int, n_boundary: int,
                   extra_edge_prob: float = 0.3, dirichlet_prob: float = 0.2,
                   neumann_prob: float = 0.2) -> Network:
    """Connected network with random weights and boundary coefficients.

    Interior vertices are joined by a random spanning tree plus extra edges;
    each boundary vertex gets one to three interior neighbours.
    """
    S = [f"s{i}" for i in range(n_interior)]
    B = [f"b{i}" for i in range(n_boundary)]
    edges = {}
    for i in range(1, n_interior):
        j = int(rng.integers(0, i))
        edges[(S[j], S[i])] = rng.uniform(0.2, 3.0)
    for i in range(n_interior):
        for j in range(i + 1, n_interior):
            if (S[i], S[j]) not in edges and rng.random() < extra_edge_prob:
                edges[(S[i], S[j])] = rng.uniform(0.2, 3.0)
    for z in B:
        k = int(rng.integers(1, min(3, n_interior) + 1))
        for x in rng.choice(S, size=k, replace=False):
            edges[(str(x), z)] = rng.uniform(0.2, 3.0)
    coef = {}
    for z in B:
        r = rng.random()
        if r < dirichlet_prob:
            coef[z] = (0.0, rng.uniform(0.5, 2.0))
        elif r < dirichlet_prob + neumann_prob:
            coef[z] = (rng.uniform(0.5, 2.0), 0.0)
        else:
            coef[z] = (rng.uniform(0.5, 2.0), rng.uniform(0.1, 2.0))
    return Network.from_edges(S, B, [(x, y, w) for (x, y), w in edges.items()], coef)


def random_values(rng: np.random.Generator, net: Network, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    return rng.uniform(lo, hi, net.n)


def dense_p2_eigenvalue(net: Network) -> float:
    """Smallest eigenvalue for p = 2 with the Gamma values eliminated exactly.

    The quotient is ``u^T A u / |u_S|^2`` with ``A = L + diag(sigma/mu)`` on
    ``S + Gamma``; minimising over ``u_Gamma`` leaves the Schur complement.
    """
    S = list(net.interior_idx)
    G = [int(z) for z, mu in zip(net.boundary_idx, net.mu_arr) if mu > 0]
    idx = S + G
    W = net.w
    L = np.diag(W.sum(axis=1)) - W
    A = L[np.ix_(idx, idx)].copy()
    for k, zi in enumerate(net.boundary_idx):
        if net.mu_arr[k] > 0:
            j = idx.index(int(zi))
            A[j, j] += net.sigma_arr[k] / net.mu_arr[k]
    n = len(S)
    Ass, Asg, Agg = A[:n, :n], A[:n, n:], A[n:, n:]
    schur = Ass - Asg @ np.linalg.solve(Agg, Asg.T) if len(G) else Ass
    return float(np.linalg.eigvalsh(schur)[0])
