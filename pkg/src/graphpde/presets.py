"""Built-in experiments on the six-vertex demonstration graph.

Interior ``x1..x4``, boundary ``x5, x6``; edges (weight)::

    x1-x2 (2)  x1-x3 (2)  x2-x4 (2)  x3-x4 (1)  x1-x5 (1)  x4-x6 (2)

Two boundary settings are used: pure Neumann (``mu = 1, sigma = 0`` at both
boundary vertices) and the mixed one with a Robin vertex ``x5``
(``mu = sigma = 1``) and a Neumann vertex ``x6`` (``mu = 1, sigma = 0``).
In the mixed setting the boundary condition reduces to
``u(x5) = u(x1) / 2`` and ``u(x6) = u(x4)``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .network import Network

__all__ = ["PRESETS", "Preset", "U0_TABLE", "U1_TABLE", "get_preset", "paper_graph"]

INTERIOR = ("x1", "x2", "x3", "x4")
BOUNDARY = ("x5", "x6")
EDGES = (
    ("x1", "x2", 2.0),
    ("x1", "x3", 2.0),
    ("x2", "x4", 2.0),
    ("x3", "x4", 1.0),
    ("x1", "x5", 1.0),
    ("x4", "x6", 2.0),
)

# initial-data rows over x1..x6
U0_TABLE = (2.0, 1.0, 0.0, 1.0, 1.0, 1.0)
U1_TABLE = (2.0, 1.0, 1.0, 2.0, 1.0, 2.0)


def paper_graph(neumann: bool = False) -> Network:
    """The demonstration graph with Neumann or mixed boundary coefficients."""
    if neumann:
        coef = {"x5": (1.0, 0.0), "x6": (1.0, 0.0)}
    else:
        coef = {"x5": (1.0, 1.0), "x6": (1.0, 0.0)}
    return Network.from_edges(INTERIOR, BOUNDARY, EDGES, coef)


@dataclass(frozen=True)
class Preset:
    name: str
    p: float
    q: float
    lam: float
    u0: tuple[float, ...]
    neumann: bool
    horizon: float
    expected: str  # outcome shown in the figure: "blowup" | "global" | "extinction"
    caption: str

    def network(self) -> Network:
        return paper_graph(self.neumann)


_NEU_SMALL = (0.0, 0.0, 0.0, 0.1, 0.0, 0.1)
_SEVENS = (7.0,) * 6

PRESETS: dict[str, Preset] = {
    p.name: p
    for p in (
        Preset("fig2", 3.0, 2.0, 2.0, _NEU_SMALL, True, 30.0, "blowup",
               "Neumann boundary, q > 1: blow-up from small data"),
        Preset("fig3", 3.0, 0.5, 2.0, _SEVENS, True, 20.0, "global",
               "Neumann boundary, q <= 1: global solution from large data"),
        Preset("fig4-left", 1.5, 2.0, 3.0, U0_TABLE, False, 2.0, "blowup",
               "p-1 < q, lambda = 3: blow-up"),
        Preset("fig4-right", 1.5, 2.0, 0.1, U0_TABLE, False, 40.0, "extinction",
               "p-1 < q, lambda = 0.1: extinction"),
        Preset("fig5-left", 1.3, 0.8, 0.18, U0_TABLE, False, 40.0, "extinction",
               "p-1 < q < 1, data u0: extinction"),
        Preset("fig5-right", 1.3, 0.8, 0.18, U1_TABLE, False, 40.0, "global",
               "p-1 < q < 1, data u1: no extinction"),
        Preset("fig6-left", 3.0, 0.5, 2.0, U0_TABLE, False, 10.0, "global",
               "q < p-1 (p=3, q=0.5): bounded solution"),
        Preset("fig6-right", 3.0, 1.5, 2.0, U0_TABLE, False, 3.0, "global",
               "q < p-1 (p=3, q=1.5): bounded solution"),
        Preset("fig7-left", 2.7, 1.7, 0.07, U1_TABLE, False, 200.0, "blowup",
               "critical p-1 = q > 1, lambda = 0.07 above the first eigenvalue: blow-up"),
        Preset("fig7-right", 2.7, 1.7, 0.05, U1_TABLE, False, 200.0, "global",
               "critical p-1 = q > 1, lambda = 0.05 below the first eigenvalue: global"),
        Preset("fig8-left", 1.4, 0.4, 0.1, U1_TABLE, False, 60.0, "extinction",
               "critical p-1 = q < 1, lambda = 0.1 below the first eigenvalue: extinction"),
        Preset("fig8-right", 1.4, 0.4, 0.3, U1_TABLE, False, 60.0, "global",
               "critical p-1 = q < 1, lambda = 0.3 above the first eigenvalue: global"),
    )
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
