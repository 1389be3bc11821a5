"""Dark-mode counting and construction in the normal-mode basis.

Vector convention
-----------------
Dark and bright vectors are *amplitude* vectors ``d`` over the type-b normal
modes: ``d`` is dark when ``C_AB @ d == 0``.  The corresponding mode operator
is ``sum_j conj(d_j) B_j``; :func:`mode_coefficients` converts.  The
hybridization chain is built directly on mode coefficients, because its
recursion is stated in that form.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionViolated, ZeroCouplingInGroup
from .network import NetworkSpec
from .spectral import ArrowheadForm, to_normal_form

ENV_PREFIX = "DARKMODE_LAB_TOL_"


@dataclass(frozen=True)
class Tolerances:
    """Relative thresholds used by the dark-mode analysis.

    Attributes
    ----------
    tol_deg : float
        Frequencies within ``tol_deg * max|Omega|`` are one degeneracy group.
    tol_rank : float
        Singular values at or below ``tol_rank * sigma_max`` are dropped.
    tol_cpl : float
        Columns with norm at or below ``tol_cpl * ||C_AB||_F`` are uncoupled.
    """

    tol_deg: float = 1e-8
    tol_rank: float = 1e-10
    tol_cpl: float = 1e-10

    def __post_init__(self):
        for name in ("tol_deg", "tol_rank", "tol_cpl"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val >= 0):
                raise ValueError(f"{name} must be a non-negative finite number")

    @classmethod
    def from_env(cls, environ=None, **overrides) -> "Tolerances":
        """Read ``DARKMODE_LAB_TOL_DEG`` etc.; explicit non-None overrides win."""
        env = os.environ if environ is None else environ
        kw = {}
        for name in ("tol_deg", "tol_rank", "tol_cpl"):
            if overrides.get(name) is not None:
                kw[name] = float(overrides[name])
                continue
            raw = env.get(ENV_PREFIX + name[4:].upper())
            if raw is not None:
                try:
                    kw[name] = float(raw)
                except ValueError:
                    raise ValueError(f"{ENV_PREFIX}{name[4:].upper()}={raw!r} is not a number")
        return cls(**kw)


def mode_coefficients(vectors: np.ndarray) -> np.ndarray:
    """Convert amplitude vectors to mode-operator coefficients (and back)."""
    return np.conj(vectors)


@dataclass(frozen=True)
class DegeneracyGroup:
    frequency: float
    members: tuple


@dataclass(frozen=True)
class DegeneracyPartition:
    """Ordered groups of (numerically) equal type-b normal frequencies."""

    groups: tuple

    def __len__(self):
        return len(self.groups)

    def __iter__(self):
        return iter(self.groups)

    def sizes(self) -> list[int]:
        return [len(g.members) for g in self.groups]


def partition_degeneracies(Omega, tol_deg: float = 1e-8,
                           scale: float | None = None) -> DegeneracyPartition:
    """Split ascending frequencies into maximal runs of near-equal values.

    Consecutive gaps at or below ``tol_deg * scale`` join a run; ``scale``
    defaults to ``max|Omega|`` (1 if that is zero).  Each group's frequency
    is its mean.
    """
    Omega = np.asarray(Omega, dtype=float)
    if scale is None:
        scale = float(np.abs(Omega).max(initial=0.0)) or 1.0
    thr = tol_deg * scale
    # tied values may be reordered by the gauge tie-break
    if np.any(np.diff(Omega) < -thr):
        raise PreconditionViolated("Omega must be ascending")
    groups = []
    start = 0
    for i in range(1, len(Omega) + 1):
        if i == len(Omega) or Omega[i] - Omega[i - 1] > thr:
            idx = tuple(range(start, i))
            groups.append(DegeneracyGroup(float(Omega[start:i].mean()), idx))
            start = i
    return DegeneracyPartition(tuple(groups))


@dataclass(frozen=True)
class HybridizationChain:
    """Recursive bright/dark construction for a single type-a mode.

    All vectors are mode coefficients over the group members (in member
    order).  ``bright_intermediates[j]`` is the bright mode of the first
    ``j+1`` members; ``dark_modes[j]`` is the mode that decouples when member
    ``j+2`` is added.  ``cumulative_norms[j]`` is the coupling of the
    intermediate bright mode.
    """

    members: tuple
    bright_intermediates: np.ndarray
    dark_modes: np.ndarray
    cumulative_norms: np.ndarray

    @property
    def bright(self) -> np.ndarray:
        return self.bright_intermediates[-1]


def hybridization_chain(form: ArrowheadForm, group, tol: float | None = None) -> HybridizationChain:
    """Build the bright mode and ``l-1`` dark modes of one degenerate group.

    Parameters
    ----------
    form : ArrowheadForm
        Must have ``M == 1``.
    group : sequence of int or DegeneracyGroup
        Member indices into ``form.Omega``; the recursion follows this order.
    tol : float, optional
        Absolute coupling threshold; default ``1e-10 * ||C_AB||_F``.

    Raises
    ------
    PreconditionViolated
        If ``M != 1``.
    ZeroCouplingInGroup
        If a member is uncoupled.  Strip such columns first; they are dark
        on their own.
    """
    if form.M != 1:
        raise PreconditionViolated("hybridization chain needs exactly one type-a mode")
    members = tuple(getattr(group, "members", group))
    G = np.asarray(form.C_AB[0, list(members)], dtype=complex)
    if tol is None:
        tol = 1e-10 * np.linalg.norm(form.C_AB)
    if len(members) == 0 or np.any(np.abs(G) <= tol):
        raise ZeroCouplingInGroup("group contains an uncoupled member")
    l = len(members)
    bright = np.zeros((l, l), dtype=complex)
    dark = np.zeros((max(l - 1, 0), l), dtype=complex)
    norms = np.zeros(l)
    norms[0] = abs(G[0])
    bright[0, 0] = G[0] / norms[0]
    for j in range(1, l):
        prev = norms[j - 1]
        norms[j] = np.hypot(prev, abs(G[j]))
        e = np.zeros(l, dtype=complex)
        e[j] = 1.0
        bright[j] = (prev * bright[j - 1] + G[j] * e) / norms[j]
        dark[j - 1] = (np.conj(G[j]) * bright[j - 1] - prev * e) / norms[j]
    return HybridizationChain(members, bright, dark, norms)


def _orthonormalize_against(v: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    # two passes of modified Gram-Schmidt for stability
    for _ in range(2):
        for q in basis:
            v = v - np.vdot(q, v) * q
    return v


def gram_schmidt_bright_subspace(C_sub, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bright basis and dark complement of one degenerate group.

    The coupling of type-a mode ``k`` to the group is the vector
    ``conj(C_sub[k])`` in amplitude space; these are orthogonalized in row
    order.  A row whose residual is at most ``tol`` times the largest row
    norm is linearly dependent and skipped.  The dark complement continues
    Gram-Schmidt over the unit vectors.

    Returns
    -------
    bright : ndarray, shape (r, l)
    dark : ndarray, shape (l - r, l)
        Rows are orthonormal amplitude vectors; ``C_sub @ dark.T == 0``.
    """
    C_sub = np.atleast_2d(np.asarray(C_sub, dtype=complex))
    l = C_sub.shape[1]
    rows = np.conj(C_sub)
    ref = np.linalg.norm(rows, axis=1).max(initial=0.0)
    bright: list[np.ndarray] = []
    if ref > 0:
        for x in rows:
            v = _orthonormalize_against(x.copy(), bright)
            nv = np.linalg.norm(v)
            if nv > tol * ref and len(bright) < l:
                bright.append(v / nv)
    full = list(bright)
    dark: list[np.ndarray] = []
    for j in range(l):
        if len(full) == l:
            break
        e = np.zeros(l, dtype=complex)
        e[j] = 1.0
        v = _orthonormalize_against(e, full)
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            v = v / nv
            full.append(v)
            dark.append(v)
    shape = (0, l)
    return (np.array(bright) if bright else np.zeros(shape, complex),
            np.array(dark) if dark else np.zeros(shape, complex))


def _svd_rank(X: np.ndarray, rel: float, floor: float) -> tuple[int, np.ndarray]:
    if X.size == 0:
        return 0, np.zeros((0, X.shape[1]), complex)
    _, s, Vh = np.linalg.svd(X)
    thr = max(rel * s[0], floor)
    r = int(np.sum(s > thr)) if s[0] > floor else 0
    return r, Vh


@dataclass(frozen=True)
class DarkModeReport:
    """Outcome of the dark-mode analysis of one arrowhead form.

    Attributes
    ----------
    partition : DegeneracyPartition
    group_ranks : tuple of int
        Rank of the ``M x |group|`` coupling sub-matrix, per group.
    bright_count, dark_count : int
    dark_vectors : ndarray, shape (dark_count, N)
        Orthonormal amplitude vectors with ``C_AB @ d == 0``.
    dark_groups : tuple of int
        Group index of each dark vector.
    bright_vectors : tuple of ndarray
        Per group, an ``(R_s, N)`` array of orthonormal bright vectors.
    zero_columns : tuple of int
        Uncoupled normal modes.
    tolerances : Tolerances
    """

    partition: DegeneracyPartition
    group_ranks: tuple
    bright_count: int
    dark_count: int
    dark_vectors: np.ndarray
    dark_groups: tuple
    bright_vectors: tuple
    zero_columns: tuple
    tolerances: Tolerances = field(default_factory=Tolerances)

    @property
    def N(self) -> int:
        return self.dark_vectors.shape[1]

    def all_bright_vectors(self) -> np.ndarray:
        rows = [b for b in self.bright_vectors if len(b)]
        return np.vstack(rows) if rows else np.zeros((0, self.N), complex)

    def to_dict(self) -> dict:
        def cv(X):
            return [[[float(z.real), float(z.imag)] for z in row] for row in X]

        return {
            "N": self.N,
            "dark_count": self.dark_count,
            "bright_count": self.bright_count,
            "groups": [
                {"frequency": g.frequency, "members": [int(m) for m in g.members],
                 "rank": int(r)}
                for g, r in zip(self.partition.groups, self.group_ranks)
            ],
            "zero_columns": [int(j) for j in self.zero_columns],
            "dark_vectors": cv(self.dark_vectors),
            "dark_groups": [int(s) for s in self.dark_groups],
            "bright_vectors": [cv(b) for b in self.bright_vectors],
            "tolerances": {"tol_deg": self.tolerances.tol_deg,
                           "tol_rank": self.tolerances.tol_rank,
                           "tol_cpl": self.tolerances.tol_cpl},
        }


def count_dark_modes(form: ArrowheadForm, tolerances: Tolerances | None = None) -> DarkModeReport:
    """Count and construct the type-b dark modes of an arrowhead form.

    The count is ``N - sum_s rank(C_AB[:, group_s])`` with ranks taken from
    singular values.  Uncoupled columns are dark verbatim.  For a single
    type-a mode the remaining members of each group go through
    :func:`hybridization_chain`; otherwise through
    :func:`gram_schmidt_bright_subspace`.
    """
    tol = tolerances or Tolerances()
    C = np.asarray(form.C_AB, dtype=complex)
    M, N = C.shape
    part = partition_degeneracies(form.Omega, tol.tol_deg)
    fro = np.linalg.norm(C)
    cpl_abs = tol.tol_cpl * fro
    colnorm = np.linalg.norm(C, axis=0)
    zero = tuple(int(j) for j in np.flatnonzero(colnorm <= cpl_abs))

    ranks = []
    dark_rows: list[np.ndarray] = []
    dark_groups: list[int] = []
    bright_per_group = []
    for s, grp in enumerate(part.groups):
        mem = list(grp.members)
        nz = [j for j in mem if j not in zero]
        for j in mem:
            if j in zero:
                e = np.zeros(N, complex)
                e[j] = 1.0
                dark_rows.append(e)
                dark_groups.append(s)
        sub = C[:, nz]
        r, Vh = _svd_rank(sub, tol.tol_rank, cpl_abs)
        ranks.append(r)
        b_local, d_local = _group_bases(form, nz, sub, r, Vh, tol, cpl_abs)
        for v in d_local:
            e = np.zeros(N, complex)
            e[nz] = v
            dark_rows.append(e)
            dark_groups.append(s)
        B = np.zeros((len(b_local), N), complex)
        if len(b_local):
            B[:, nz] = b_local
        bright_per_group.append(B)

    bright = int(sum(ranks))
    dark_vecs = np.array(dark_rows) if dark_rows else np.zeros((0, N), complex)
    return DarkModeReport(part, tuple(ranks), bright, N - bright, dark_vecs,
                          tuple(dark_groups), tuple(bright_per_group), zero, tol)


def _group_bases(form, nz, sub, r, Vh, tol, cpl_abs):
    l = len(nz)
    if l == 0:
        z = np.zeros((0, 0), complex)
        return z, z
    if form.M == 1 and r == 1:
        chain = hybridization_chain(form, nz, tol=cpl_abs)
        return (mode_coefficients(chain.bright[None, :]),
                mode_coefficients(chain.dark_modes))
    b, d = gram_schmidt_bright_subspace(sub, tol.tol_rank)
    if len(b) == r:
        return b, d
    # Gram-Schmidt and SVD disagree only at the rank threshold; SVD decides
    return Vh[:r], Vh[r:]


def analyze(spec: NetworkSpec, tolerances: Tolerances | None = None) -> DarkModeReport:
    """Normal form followed by :func:`count_dark_modes`."""
    return count_dark_modes(to_normal_form(spec), tolerances)


def dark_count(spec: NetworkSpec, tolerances: Tolerances | None = None) -> int:
    return analyze(spec, tolerances).dark_count


@dataclass(frozen=True)
class XiInvarianceReport:
    """Dark counts across random type-a hopping resamplings.

    ``max_coupling_deviation`` is the largest change of ``C_AB`` (Frobenius)
    from the baseline, showing that the couplings themselves do move.
    ``max_dark_projector_deviation`` measures the dark subspace drift.
    """

    dark_count: int
    counts: tuple
    constant: bool
    max_coupling_deviation: float
    max_dark_projector_deviation: float


def random_hermitian_hopping(n: int, scale: float, rng: np.random.Generator,
                             real: bool = False) -> np.ndarray:
    """Random Hermitian matrix with zero diagonal and entries of size ``scale``."""
    X = rng.normal(size=(n, n))
    if not real:
        X = X + 1j * rng.normal(size=(n, n))
    X = np.triu(X, 1) * scale
    return X + X.conj().T


def xi_invariance_check(spec: NetworkSpec, trials: int = 50, seed=None,
                        tolerances: Tolerances | None = None,
                        scale: float | None = None) -> XiInvarianceReport:
    """Resample the type-a hopping matrix and recount dark modes.

    Parameters
    ----------
    spec : NetworkSpec
    trials : int
        Number of random ``xi`` draws.
    seed : int or Generator, optional
    scale : float, optional
        Magnitude of resampled entries; defaults to ``max|xi|`` or 0.1.
    """
    rng = np.random.default_rng(seed)
    base_form = to_normal_form(spec)
    base = count_dark_modes(base_form, tolerances)
    if scale is None:
        scale = float(np.abs(spec.xi).max(initial=0.0)) or 0.1
    P0 = base.dark_vectors.T @ base.dark_vectors.conj()
    counts, dev_c, dev_p = [], 0.0, 0.0
    for _ in range(trials):
        xi = random_hermitian_hopping(spec.M, scale, rng)
        form = to_normal_form(spec.replace(xi=xi))
        rep = count_dark_modes(form, tolerances)
        counts.append(rep.dark_count)
        dev_c = max(dev_c, float(np.linalg.norm(form.C_AB - base_form.C_AB)))
        if rep.dark_count == base.dark_count:
            P = rep.dark_vectors.T @ rep.dark_vectors.conj()
            dev_p = max(dev_p, float(np.linalg.norm(P - P0)))
    return XiInvarianceReport(base.dark_count, tuple(counts),
                              all(c == base.dark_count for c in counts), dev_c, dev_p)
