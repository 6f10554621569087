"""Weighted networks with an interior/boundary split.

A :class:`Network` holds an ordered vertex list, a dense symmetric weight
matrix and, for every boundary vertex ``z``, the coefficients ``mu(z)`` and
``sigma(z)`` of the mixed boundary condition

    mu(z) * (p-normal derivative of u at z) + sigma(z) * |u(z)|^(p-2) u(z) = 0.

``mu = 0`` is a Dirichlet vertex, ``sigma = 0`` a Neumann vertex and both
positive a Robin vertex.

Weights are stored densely, so memory and every operator sweep cost
O(|V|^2).  Edges joining two boundary vertices may appear in the input but
are dropped from the *effective* weight matrix :attr:`Network.w` that every
operator uses.

Graph file format
-----------------
Plain text, ``#`` starts a comment, blank lines are ignored.  Three
sections, in this order::

    [vertices]
    x1 interior
    x5 boundary

    [edges]
    x1 x5 1.0          # x y weight, each unordered pair at most once

    [boundary]
    x5 1.0 1.0         # z mu sigma, one line per boundary vertex

Labels are whitespace-free tokens.  The vertex order of the file is the
order of every vector and matrix.  Self-loops and duplicate edges are parse
errors.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "GammaSet",
    "GraphFormatError",
    "Network",
    "degree",
    "dump_network",
    "load_network",
    "parse_network",
    "serialize_network",
    "validate",
]


class GraphFormatError(ValueError):
    """Raised for malformed graph files."""


@dataclass(frozen=True)
class GammaSet:
    """Boundary vertices with ``mu(z) > 0`` (the non-Dirichlet boundary)."""

    gamma: tuple[str, ...]

    def __contains__(self, z: object) -> bool:
        return z in self.gamma

    def __iter__(self):
        return iter(self.gamma)

    def __len__(self) -> int:
        return len(self.gamma)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class Network:
    """Finite weighted graph with interior vertices ``S`` and boundary ``dS``.

    Parameters
    ----------
    labels : sequence of str
        Vertex labels in storage order.
    weights : (n, n) array_like
        Edge weights; ``weights[i, j] > 0`` means ``labels[i] ~ labels[j]``.
    boundary : iterable of str
        Labels of the boundary vertices; every other vertex is interior.
    mu, sigma : mapping str -> float
        Boundary coefficients, one entry per boundary vertex.

    The constructor only checks shapes and label consistency; use
    :func:`validate` for the full list of structural invariants.
    """

    __slots__ = (
        "labels",
        "weights",
        "mu",
        "sigma",
        "is_boundary",
        "index",
        "interior_idx",
        "boundary_idx",
        "w",
        "mu_arr",
        "sigma_arr",
        "_cache",
    )

    def __init__(
        self,
        labels: Sequence[str],
        weights,
        boundary: Iterable[str],
        mu: Mapping[str, float],
        sigma: Mapping[str, float],
    ):
        labels = tuple(str(v) for v in labels)
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate vertex labels")
        W = np.array(weights, dtype=float, copy=True)
        n = len(labels)
        if W.shape != (n, n):
            raise ValueError(f"weights must have shape ({n}, {n}), got {W.shape}")
        index = {v: i for i, v in enumerate(labels)}
        bset = set(boundary)
        unknown = bset - index.keys()
        if unknown:
            raise ValueError(f"unknown boundary vertices: {sorted(unknown)}")
        for name, coef in (("mu", mu), ("sigma", sigma)):
            extra = set(coef) - bset
            if extra:
                raise ValueError(f"{name} given for non-boundary vertices: {sorted(extra)}")

        is_b = np.array([v in bset for v in labels], dtype=bool)
        b_idx = np.flatnonzero(is_b)
        # boundary-boundary edges never enter an operator
        w = W.copy()
        w[np.ix_(b_idx, b_idx)] = 0.0

        self.labels = labels
        self.weights = _readonly(W)
        self.mu = {labels[i]: float(mu.get(labels[i], 0.0)) for i in b_idx}
        self.sigma = {labels[i]: float(sigma.get(labels[i], 0.0)) for i in b_idx}
        self.is_boundary = _readonly(is_b)
        self.index = index
        self.interior_idx = _readonly(np.flatnonzero(~is_b))
        self.boundary_idx = _readonly(b_idx)
        self.w = _readonly(w)
        self.mu_arr = _readonly(np.array([self.mu[labels[i]] for i in b_idx], dtype=float))
        self.sigma_arr = _readonly(np.array([self.sigma[labels[i]] for i in b_idx], dtype=float))
        self._cache = {}

    # -- convenience -------------------------------------------------------

    @classmethod
    def from_edges(
        cls,
        interior: Sequence[str],
        boundary: Sequence[str],
        edges: Iterable[tuple[str, str, float]],
        coefficients: Mapping[str, tuple[float, float]],
    ) -> "Network":
        """Build from an edge list; ``coefficients[z] = (mu, sigma)``."""
        labels = list(interior) + list(boundary)
        index = {v: i for i, v in enumerate(labels)}
        W = np.zeros((len(labels), len(labels)))
        for x, y, wt in edges:
            W[index[x], index[y]] = W[index[y], index[x]] = float(wt)
        mu = {z: c[0] for z, c in coefficients.items()}
        sigma = {z: c[1] for z, c in coefficients.items()}
        return cls(labels, W, boundary, mu, sigma)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def interior(self) -> tuple[str, ...]:
        return tuple(self.labels[i] for i in self.interior_idx)

    @property
    def boundary(self) -> tuple[str, ...]:
        return tuple(self.labels[i] for i in self.boundary_idx)

    @property
    def gamma(self) -> GammaSet:
        return GammaSet(tuple(z for z in self.boundary if self.mu[z] > 0))

    @property
    def sigma_vanishes(self) -> bool:
        """True when ``sigma == 0`` on the whole boundary (pure Neumann)."""
        return bool(np.all(self.sigma_arr == 0.0))

    def idx(self, x: str) -> int:
        try:
            return self.index[x]
        except KeyError:
            raise KeyError(f"unknown vertex {x!r}") from None

    def vector(self, u) -> np.ndarray:
        """Return ``u`` as a float vector in vertex order.

        Accepts a sequence of length ``n`` or a mapping label -> value
        (missing labels read as 0).
        """
        if isinstance(u, Mapping):
            out = np.zeros(self.n)
            for k, v in u.items():
                out[self.idx(k)] = float(v)
            return out
        out = np.asarray(u, dtype=float)
        if out.shape != (self.n,):
            raise ValueError(f"expected a vector of length {self.n}, got shape {out.shape}")
        return out

    def boundary_neighbors(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per boundary vertex: (interior neighbour indices, weights)."""
        nb = self._cache.get("bnb")
        if nb is None:
            nb = []
            for zi in self.boundary_idx:
                row = self.w[zi, self.interior_idx]
                keep = row > 0
                nb.append((self.interior_idx[keep], row[keep]))
            self._cache["bnb"] = nb
        return nb

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.labels == other.labels
            and np.array_equal(self.is_boundary, other.is_boundary)
            and self.weights.tobytes() == other.weights.tobytes()
            and self.mu == other.mu
            and self.sigma == other.sigma
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (
            f"Network(|S|={len(self.interior_idx)}, |dS|={len(self.boundary_idx)}, "
            f"edges={int(np.count_nonzero(np.triu(self.weights)))})"
        )


def degree(net: Network, x: str) -> float:
    """Weighted degree ``sum_y w(x, y)`` of vertex ``x``."""
    return float(net.w[net.idx(x)].sum())


def validate(net: Network) -> list[str]:
    """Return every violated structural invariant (empty list means ok)."""
    out: list[str] = []
    W = net.weights
    n = net.n
    if len(net.interior_idx) == 0:
        out.append("no interior vertices")
    if not np.all(np.isfinite(W)):
        out.append("non-finite weight")
    if np.any(np.diag(W) != 0):
        for i in np.flatnonzero(np.diag(W) != 0):
            out.append(f"self-loop at {net.labels[i]}")
    if np.any(W < 0):
        i, j = np.argwhere(W < 0)[0]
        out.append(f"negative weight ({net.labels[i]}, {net.labels[j]})")
    asym = np.argwhere(np.triu(W != W.T, 1))
    for i, j in asym:
        out.append(f"asymmetric weight ({net.labels[i]}, {net.labels[j]})")

    # connectivity on the effective (operator) graph
    if n:
        adj = (net.w > 0) | (net.w.T > 0)
        seen = np.zeros(n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(adj[i] & ~seen):
                seen[j] = True
                stack.append(j)
        if not seen.all():
            missing = [net.labels[i] for i in np.flatnonzero(~seen)]
            out.append(f"disconnected: unreachable {missing}")

    for zi in net.boundary_idx:
        z = net.labels[zi]
        if not np.any(net.w[zi, net.interior_idx] > 0):
            out.append(f"boundary vertex {z} has no interior neighbor")
        m, s = net.mu[z], net.sigma[z]
        if m < 0 or s < 0 or not (np.isfinite(m) and np.isfinite(s)):
            out.append(f"negative or non-finite boundary coefficient at {z}")
        elif m + s <= 0:
            out.append(f"degenerate boundary coefficient at {z} (mu + sigma = 0)")
    return out


# -- file format ------------------------------------------------------------

_SECTIONS = ("vertices", "edges", "boundary")


def parse_network(text: str) -> Network:
    """Parse the three-section graph format (see module docstring)."""
    section = None
    seen_sections: list[str] = []
    labels: list[str] = []
    bnd: list[str] = []
    edges: dict[frozenset, tuple[str, str, float]] = {}
    coef: dict[str, tuple[float, float]] = {}

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in _SECTIONS:
                raise GraphFormatError(f"line {lineno}: unknown section [{name}]")
            if name in seen_sections:
                raise GraphFormatError(f"line {lineno}: repeated section [{name}]")
            seen_sections.append(name)
            section = name
            continue
        tok = line.split()
        try:
            if section == "vertices":
                if len(tok) != 2 or tok[1] not in ("interior", "boundary"):
                    raise GraphFormatError("expected '<label> interior|boundary'")
                if tok[0] in labels:
                    raise GraphFormatError(f"duplicate vertex {tok[0]}")
                labels.append(tok[0])
                if tok[1] == "boundary":
                    bnd.append(tok[0])
            elif section == "edges":
                if len(tok) != 3:
                    raise GraphFormatError("expected '<x> <y> <weight>'")
                x, y, wt = tok[0], tok[1], float(tok[2])
                if x == y:
                    raise GraphFormatError(f"self-loop at {x}")
                for v in (x, y):
                    if v not in labels:
                        raise GraphFormatError(f"unknown vertex {v}")
                key = frozenset((x, y))
                if key in edges:
                    raise GraphFormatError(f"duplicate edge {x} {y}")
                edges[key] = (x, y, wt)
            elif section == "boundary":
                if len(tok) != 3:
                    raise GraphFormatError("expected '<z> <mu> <sigma>'")
                z = tok[0]
                if z not in bnd:
                    raise GraphFormatError(f"{z} is not a boundary vertex")
                if z in coef:
                    raise GraphFormatError(f"duplicate coefficients for {z}")
                coef[z] = (float(tok[1]), float(tok[2]))
            else:
                raise GraphFormatError("content outside of a section")
        except GraphFormatError as exc:
            raise GraphFormatError(f"line {lineno}: {exc}") from None
        except ValueError as exc:
            raise GraphFormatError(f"line {lineno}: {exc}") from None

    missing = [z for z in bnd if z not in coef]
    if missing:
        raise GraphFormatError(f"no boundary coefficients for {missing}")
    index = {v: i for i, v in enumerate(labels)}
    W = np.zeros((len(labels), len(labels)))
    for x, y, wt in edges.values():
        W[index[x], index[y]] = W[index[y], index[x]] = wt
    return Network(
        labels,
        W,
        bnd,
        {z: c[0] for z, c in coef.items()},
        {z: c[1] for z, c in coef.items()},
    )


def serialize_network(net: Network) -> str:
    """Inverse of :func:`parse_network`; floats are written with ``repr``."""
    lines = ["[vertices]"]
    for i, v in enumerate(net.labels):
        lines.append(f"{v} {'boundary' if net.is_boundary[i] else 'interior'}")
    lines += ["", "[edges]"]
    n = net.n
    for i in range(n):
        for j in range(i + 1, n):
            if net.weights[i, j] != 0:
                lines.append(f"{net.labels[i]} {net.labels[j]} {float(net.weights[i, j])!r}")
    lines += ["", "[boundary]"]
    for z in net.boundary:
        lines.append(f"{z} {net.mu[z]!r} {net.sigma[z]!r}")
    return "\n".join(lines) + "\n"


def load_network(path: str | Path) -> Network:
    return parse_network(Path(path).read_text())


def dump_network(net: Network, path: str | Path) -> None:
    Path(path).write_text(serialize_network(net))
