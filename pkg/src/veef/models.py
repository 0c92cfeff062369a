"""Coupling graphs, time grids, and baseline control schedules.

A lattice of N spin-1/2 sites is described by a :class:`CouplingGraph`: an
edge list with per-axis coupling strengths (J^x, J^y, J^z), dimensionless,
multiplying Pauli operators (see veef.state for the convention), with the
unit coupling setting the unit of energy and hence of inverse time.
Time-dependent local fields h^x_n(t), h^z_n(t) live on a piecewise-constant
:class:`TimeGrid` and are stored in a :class:`ControlSchedule`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CHAIN_KINDS = {
    "ising": (0.0, 0.0, 1.0),
    "xy": (1.0, 1.0, 0.0),
    "heisenberg": (1.0, 1.0, 1.0),
}


@dataclass(frozen=True)
class TimeGrid:
    """Piecewise-constant control grid over a total evolution time.

    The controls are held constant on each of ``n_slices`` slices of duration
    ``dt = total_time / n_slices``; each slice is integrated with
    ``trotter_substeps`` symmetric Trotter steps of size ``dt / trotter_substeps``.
    """

    total_time: float
    n_slices: int
    trotter_substeps: int = 2

    def __post_init__(self):
        if self.total_time < 0:
            raise ValueError(f"total_time must be >= 0, got {self.total_time}")
        if self.n_slices < 0:
            raise ValueError(f"n_slices must be >= 0, got {self.n_slices}")
        if self.n_slices > 0 and self.total_time <= 0:
            raise ValueError("total_time must be > 0 when n_slices > 0")
        if self.trotter_substeps < 1:
            raise ValueError(f"trotter_substeps must be >= 1, got {self.trotter_substeps}")

    @property
    def dt(self) -> float:
        """Duration of one control slice."""
        if self.n_slices == 0:
            return 0.0
        return self.total_time / self.n_slices

    @property
    def trotter_dt(self) -> float:
        """Duration of one Trotter substep."""
        return self.dt / self.trotter_substeps

    @property
    def times(self) -> np.ndarray:
        """Slice boundary times, ``n_slices + 1`` values from 0 to total_time."""
        return np.linspace(0.0, self.total_time, self.n_slices + 1)

    @staticmethod
    def from_slice_duration(total_time: float, slice_dt: float = 0.02,
                            trotter_substeps: int = 2) -> "TimeGrid":
        """Grid with slices of (approximately) the requested duration.

        The default slice_dt=0.02 with 2 substeps gives a Trotter step of 0.01,
        small enough that the splitting error is far below optimization
        tolerances for total times of order 10.
        """
        n_slices = max(1, round(total_time / slice_dt))
        return TimeGrid(total_time, n_slices, trotter_substeps)


@dataclass(frozen=True)
class CouplingGraph:
    """Two-body interaction graph: edges (m, n, J^x, J^y, J^z) with m < n.

    Duplicate pairs and self-loops are rejected.  Connectivity is *not*
    enforced here (edge-free graphs are useful in tests); the builders below
    only ever emit connected graphs, which is what genuine entropy saturation
    requires.
    """

    n_sites: int
    edges: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError(f"n_sites must be >= 1, got {self.n_sites}")
        norm = []
        seen = set()
        for e in self.edges:
            m, n, jx, jy, jz = e
            if m == n:
                raise ValueError(f"self-loop on site {m}")
            if not (0 <= m < self.n_sites and 0 <= n < self.n_sites):
                raise ValueError(f"edge ({m},{n}) out of range for {self.n_sites} sites")
            if m > n:
                m, n = n, m
            if (m, n) in seen:
                raise ValueError(f"duplicate edge ({m},{n})")
            seen.add((m, n))
            norm.append((int(m), int(n), float(jx), float(jy), float(jz)))
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def is_connected(self) -> bool:
        if self.n_sites == 1:
            return True
        adj = [[] for _ in range(self.n_sites)]
        for m, n, *_ in self.edges:
            adj[m].append(n)
            adj[n].append(m)
        seen = {0}
        stack = [0]
        while stack:
            for v in adj[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.n_sites


@dataclass(frozen=True)
class ControlSchedule:
    """Piecewise-constant fields h^alpha_n(t_k), shape (n_slices, n_sites, 2).

    The last axis is ordered (x, z): ``values[k, n, 0]`` is h^x on site n
    during slice k, ``values[k, n, 1]`` is h^z.
    """

    values: np.ndarray
    grid: TimeGrid

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 3 or v.shape[2] != 2:
            raise ValueError(f"values must have shape (K, N, 2), got {v.shape}")
        if v.shape[0] != self.grid.n_slices:
            raise ValueError(
                f"schedule has {v.shape[0]} slices but grid has {self.grid.n_slices}")
        if v.size and not np.all(np.isfinite(v)):
            raise ValueError("schedule contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_sites(self) -> int:
        return self.values.shape[1]

    def with_values(self, values: np.ndarray) -> "ControlSchedule":
        return ControlSchedule(np.array(values, dtype=float), self.grid)


def build_chain(kind: str, n_sites: int, periodic: bool = True) -> CouplingGraph:
    """Nearest-neighbour chain with Ising (J^z), XY (J^x=J^y) or Heisenberg
    (J^x=J^y=J^z) unit couplings; ``periodic`` adds the (0, N-1) wrap bond."""
    key = kind.lower()
    if key not in CHAIN_KINDS:
        raise ValueError(f"unknown chain kind {kind!r}; expected one of {sorted(CHAIN_KINDS)}")
    if n_sites < 2:
        raise ValueError(f"a chain needs at least 2 sites, got {n_sites}")
    jx, jy, jz = CHAIN_KINDS[key]
    edges = [(n, n + 1, jx, jy, jz) for n in range(n_sites - 1)]
    if periodic and n_sites > 2:
        edges.append((0, n_sites - 1, jx, jy, jz))
    return CouplingGraph(n_sites, tuple(edges))


def build_random_graph(n_sites: int, edge_probability: float, interaction_kind: str = "ising",
                       seed: int = 0, max_retries: int = 1000) -> CouplingGraph:
    """Erdos-Renyi graph over all site pairs, resampled until connected.

    Each of the C(N,2) pairs is included independently with probability
    ``edge_probability``; included edges carry the unit couplings of
    ``interaction_kind``.  Sampling is deterministic under ``seed``.  Raises
    RuntimeError if no connected sample is found within ``max_retries`` draws
    (a disconnected graph is never returned silently).  Note the conditioning:
    when p is near the connectivity threshold, rejecting disconnected draws
    pushes the average edge count somewhat above the unconditional C(N,2) p.
    """
    if not 0 < edge_probability <= 1:
        raise ValueError(f"edge_probability must be in (0, 1], got {edge_probability}")
    if n_sites < 2:
        raise ValueError(f"need at least 2 sites, got {n_sites}")
    key = interaction_kind.lower()
    if key not in CHAIN_KINDS:
        raise ValueError(f"unknown interaction kind {interaction_kind!r}")
    jx, jy, jz = CHAIN_KINDS[key]
    pairs = [(m, n) for m in range(n_sites) for n in range(m + 1, n_sites)]
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        mask = rng.random(len(pairs)) < edge_probability
        edges = tuple((m, n, jx, jy, jz) for (m, n), keep in zip(pairs, mask) if keep)
        graph = CouplingGraph(n_sites, edges)
        if graph.is_connected():
            return graph
    raise RuntimeError(
        f"no connected graph with p={edge_probability} on {n_sites} sites "
        f"after {max_retries} draws")


def expected_edge_probability(n_sites: int) -> float:
    """Probability giving an expected edge count of N: p = 2/(N-1).

    C(N,2) * 2/(N-1) = N, matching the sparse-but-connected random lattices
    used in the long-range interaction runs.
    """
    return 2.0 / (n_sites - 1)


def baseline_schedule(kind: str, grid: TimeGrid, n_sites: int, *,
                      hx: float = 0.0, hz: float = 0.0,
                      scale: float = 1.0, seed: int = 0) -> ControlSchedule:
    """Reference (non-optimized) field schedules.

    kind="zero"      all fields vanish;
    kind="constant"  every slice and site gets (hx, hz);
    kind="random"    i.i.d. uniform on [-scale, scale] per slice/site/axis,
                     drawn deterministically from ``seed``.
    """
    shape = (grid.n_slices, n_sites, 2)
    key = kind.lower()
    if key == "zero":
        values = np.zeros(shape)
    elif key == "constant":
        values = np.empty(shape)
        values[:, :, 0] = hx
        values[:, :, 1] = hz
    elif key == "random":
        rng = np.random.default_rng(seed)
        values = rng.uniform(-scale, scale, size=shape)
    else:
        raise ValueError(f"unknown schedule kind {kind!r}")
    return ControlSchedule(values, grid)
