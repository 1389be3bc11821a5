"""Coupling topologies of one optical mode and N mechanical modes.

Nodes are the optical mode ``c`` and mechanical modes ``m1..mN``.  A
configuration keeps any subset of the edges ``c-mj`` and ``mi-mj`` such that
every mechanical mode is connected to ``c``.  Configurations are identified up
to relabeling of the mechanical modes.

Edges are listed phonon edges first, then optomechanical edges.  The sort key
of a labeled graph is ``(number of missing edges, missing-edge bits)`` and
the canonical form is its minimum over all relabelings.  Sorting by this key
puts the complete graph first and groups configurations by edge count.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .darkmode import Tolerances, analyze
from .dynamics import final_phonon_numbers
from .errors import TooLarge
from .network import NetworkSpec

MAX_N = 6


@lru_cache(maxsize=None)
def edge_list(N: int) -> tuple:
    """All candidate edges in encoding order. ``0`` is ``c``; ``j`` is ``mj``."""
    phonon = [(i, j) for i in range(1, N + 1) for j in range(i + 1, N + 1)]
    optomech = [(0, j) for j in range(1, N + 1)]
    return tuple(phonon + optomech)


def _label(e: tuple) -> str:
    a, b = e
    return f"{'c' if a == 0 else f'm{a}'}-m{b}"


def is_connected(N: int, edges) -> bool:
    adj = {v: set() for v in range(N + 1)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen, stack = {0}, [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == N + 1


@lru_cache(maxsize=None)
def _perm_tables(N: int) -> tuple:
    # for each relabeling, the image index of every edge
    E = edge_list(N)
    index = {e: i for i, e in enumerate(E)}
    tables = []
    for perm in itertools.permutations(range(1, N + 1)):
        row = []
        for a, b in E:
            a2 = 0 if a == 0 else perm[a - 1]
            b2 = perm[b - 1]
            row.append(index[(min(a2, b2), max(a2, b2))])
        tables.append(tuple(row))
    return tuple(tables)


def _mask(N: int, edges) -> int:
    index = {e: i for i, e in enumerate(edge_list(N))}
    m = 0
    for a, b in edges:
        m |= 1 << index[(min(a, b), max(a, b))]
    return m


def _key(N: int, mask: int) -> tuple:
    L = len(edge_list(N))
    bits = tuple(0 if mask >> i & 1 else 1 for i in range(L))
    return (sum(bits),) + bits


def _orbit(N: int, mask: int) -> set:
    L = len(edge_list(N))
    present = [i for i in range(L) if mask >> i & 1]
    return {sum(1 << t[i] for i in present) for t in _perm_tables(N)}


def _edges_of(N: int, mask: int) -> frozenset:
    return frozenset(e for i, e in enumerate(edge_list(N)) if mask >> i & 1)


def canonicalize(N: int, edges) -> tuple[frozenset, tuple]:
    """Return the canonical representative edge set and its key.

    Brute force over all ``N!`` relabelings of the mechanical modes.
    """
    best = min(_orbit(N, _mask(N, edges)), key=lambda m: _key(N, m))
    return _edges_of(N, best), _key(N, best)


@dataclass(frozen=True)
class ConfigGraph:
    """One coupling topology in canonical form.

    Attributes
    ----------
    N : int
    optomech : frozenset of int
        Mechanical modes ``j`` with a ``c-mj`` edge.
    phonon : frozenset of (int, int)
        Pairs ``(i, j)``, ``i < j``, with an ``mi-mj`` edge.
    key : tuple
        Canonical sort key.
    config_id : int
        1-based position in the sorted enumeration (0 if not assigned).
    """

    N: int
    optomech: frozenset
    phonon: frozenset
    key: tuple
    config_id: int = 0

    @property
    def edges(self) -> frozenset:
        return frozenset({(0, j) for j in self.optomech} | set(self.phonon))

    @property
    def n_edges(self) -> int:
        return len(self.optomech) + len(self.phonon)

    def encoding(self) -> str:
        """Space-separated edge labels in encoding order."""
        return " ".join(_label(e) for e in edge_list(self.N) if e in self.edges)

    @classmethod
    def from_edges(cls, N: int, edges, config_id: int = 0) -> "ConfigGraph":
        """Canonicalize an arbitrary labeled edge set."""
        canon, key = canonicalize(N, edges)
        return cls(N, frozenset(b for a, b in canon if a == 0),
                   frozenset(e for e in canon if e[0] != 0), key, config_id)


def enumerate_configs(N: int) -> list[ConfigGraph]:
    """All connected topologies up to mechanical relabeling, sorted by key.

    Raises
    ------
    TooLarge
        For ``N`` outside ``1..6``.
    """
    if not 1 <= N <= MAX_N:
        raise TooLarge(f"enumeration supports 1 <= N <= {MAX_N}, got {N}")
    L = len(edge_list(N))
    visited = set()
    reps = {}
    for mask in range(1, 1 << L):
        if mask in visited or bin(mask).count("1") < N:
            continue
        if not is_connected(N, _edges_of(N, mask)):
            continue
        orbit = _orbit(N, mask)
        visited |= orbit
        best = min(orbit, key=lambda m: _key(N, m))
        reps[_key(N, best)] = _edges_of(N, best)
    out = []
    for i, key in enumerate(sorted(reps), start=1):
        canon = reps[key]
        out.append(ConfigGraph(N, frozenset(b for a, b in canon if a == 0),
                               frozenset(e for e in canon if e[0] != 0), key, i))
    return out


def instantiate(config: ConfigGraph, g: float = 0.1, eta: float = 0.09,
                omega_m: float = 1.0, delta1: float = 1.0, kappa: float = 0.1,
                gamma: float = 1e-5, nbar: float = 1e3) -> NetworkSpec:
    """Network with value ``g`` on present ``c-mj`` edges and ``eta`` on present ``mi-mj`` edges."""
    N = config.N
    G = np.zeros((1, N), dtype=complex)
    for j in config.optomech:
        G[0, j - 1] = g
    H = np.zeros((N, N), dtype=complex)
    for i, j in config.phonon:
        H[i - 1, j - 1] = H[j - 1, i - 1] = eta
    return NetworkSpec.create(delta=[delta1], omega=np.full(N, omega_m), g=G, eta=H,
                              kappa=kappa, gamma=gamma, nbar=nbar)


# Reference verdicts for N = 4: (dark modes exist, dark count, cools) per row.
_REF_ROWS = (
    "3 2 2 2 1 1 3 1 2 0 2 2 1 1 1 0 2 2 2 1 1 2 2 1 0 0 1 0 0 "
    "1 2 1 1 3 1 0 1 1 0 0 2 2 1 1 1 1 1 2 2 0 0 2 1 1 1 2 1 3"
)
REFERENCE_DARK_COUNTS_N4 = tuple(int(x) for x in _REF_ROWS.split())
REFERENCE_TABLE_N4 = tuple(
    (i + 1, c > 0, c, c == 0) for i, c in enumerate(REFERENCE_DARK_COUNTS_N4)
)
# Row ranges of the reference table sharing one edge count.
REFERENCE_BLOCKS_N4 = {10: (1, 1), 9: (2, 3), 8: (4, 8), 7: (9, 19), 6: (20, 34),
                       5: (35, 49), 4: (50, 58)}


@dataclass(frozen=True)
class ScanGrid:
    """Cooling scan over optical decay and detuning."""

    kappas: tuple = tuple(np.round(np.linspace(0.02, 0.5, 13), 12))
    deltas: tuple = tuple(np.round(np.linspace(0.85, 1.15, 7), 12))
    g: float = 0.1
    eta: float = 0.09
    omega_m: float = 1.0
    gamma: float = 1e-5
    nbar: float = 1e3
    ref_kappa: float = 0.1
    ref_delta: float = 1.0


@dataclass(frozen=True)
class ConfigVerdict:
    """Dark count and cooling outcome of one configuration.

    ``cools`` is true when some grid point is stable with every ``n_f < 1``.
    ``best_max_nf`` is the smallest ``max_j n_f`` over stable grid points.
    """

    config: ConfigGraph
    dark_count: int
    cools: bool
    best_max_nf: float
    best_kappa: float
    best_delta: float
    n_f_ref: tuple
    unstable_points: int

    @property
    def config_id(self) -> int:
        return self.config.config_id

    @property
    def has_dark(self) -> bool:
        return self.dark_count > 0


def config_verdict(config: ConfigGraph, grid: ScanGrid = ScanGrid(),
                   tolerances: Tolerances | None = None) -> ConfigVerdict:
    """Dark count at the reference point plus a cooling scan over ``grid``."""
    def spec(k, d):
        return instantiate(config, grid.g, grid.eta, grid.omega_m, d, k, grid.gamma, grid.nbar)

    dark = analyze(spec(grid.ref_kappa, grid.ref_delta), tolerances).dark_count
    ref = final_phonon_numbers(spec(grid.ref_kappa, grid.ref_delta))
    n_ref = tuple(float(x) for x in ref.n_f) if ref.stable else ()
    best = (np.inf, np.nan, np.nan)
    unstable = 0
    for k in grid.kappas:
        for d in grid.deltas:
            res = final_phonon_numbers(spec(k, d))
            if not res.stable:
                unstable += 1
                continue
            m = float(res.n_f.max())
            if m < best[0]:
                best = (m, float(k), float(d))
    return ConfigVerdict(config, dark, bool(best[0] < 1.0), best[0], best[1], best[2],
                         n_ref, unstable)


def _verdict_job(args):
    return config_verdict(*args)


def table_of_verdicts(N: int = 4, grid: ScanGrid = ScanGrid(),
                      tolerances: Tolerances | None = None, jobs: int = 1) -> list[ConfigVerdict]:
    """Verdict for every configuration, in enumeration order.

    ``jobs > 1`` spreads configurations over worker processes; the output
    order does not depend on it.
    """
    configs = enumerate_configs(N)
    work = [(c, grid, tolerances) for c in configs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_verdict_job, work))
    return [_verdict_job(w) for w in work]


@dataclass(frozen=True)
class ReferenceComparison:
    """Agreement of computed verdicts with the N = 4 reference table.

    Row numbers inside one edge-count block are not fixed by the reference,
    so dark counts are compared as per-block multisets.
    """

    block_counts_match: dict
    first_row_match: bool
    last_row_match: bool
    verdict_mismatches: tuple

    @property
    def counts_match(self) -> bool:
        return all(self.block_counts_match.values()) and self.first_row_match and self.last_row_match


def compare_with_reference(verdicts: list[ConfigVerdict]) -> ReferenceComparison:
    by_edges: dict[int, list[ConfigVerdict]] = {}
    for v in verdicts:
        by_edges.setdefault(v.config.n_edges, []).append(v)
    blocks = {}
    mismatches = []
    for ne, (lo, hi) in REFERENCE_BLOCKS_N4.items():
        ours = sorted(v.dark_count for v in by_edges.get(ne, []))
        ref = sorted(REFERENCE_DARK_COUNTS_N4[lo - 1:hi])
        blocks[ne] = ours == ref
    for v in verdicts:
        if v.cools != (v.dark_count == 0):
            mismatches.append(v.config_id)
    first = verdicts[0].dark_count == REFERENCE_DARK_COUNTS_N4[0]
    last = verdicts[-1].dark_count == REFERENCE_DARK_COUNTS_N4[-1]
    return ReferenceComparison(blocks, first, last, tuple(mismatches))
