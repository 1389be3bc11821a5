"""Normal-mode (arrowhead) form and the single-apex secular equation.

Each intra-type sub-network is diagonalized separately.  In the resulting
normal-mode basis the full coefficient matrix becomes a (thick) arrowhead

    [[diag(Delta), C_AB     ],
     [C_AB^+,      diag(Omega)]]

with ``C_AB = U_a g U_b^+``.  Rows of ``U_a`` and ``U_b`` hold the expansion
coefficients of the normal modes over the bare modes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EigensolverFailure, PreconditionViolated
from .network import NetworkSpec, build_coefficient_matrix

EIG_RESIDUAL_RTOL = 1e-10
_TIE_RTOL = 1e-12
_DOMINANT_RTOL = 1e-12


def _dominant_index(row: np.ndarray) -> int:
    mags = np.abs(row)
    return int(np.flatnonzero(mags >= mags.max() * (1.0 - _DOMINANT_RTOL))[0])


def normal_modes(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalize a Hermitian block.

    Returns
    -------
    freqs : ndarray
        Ascending eigenvalues.  Numerical ties are ordered by the lowest bare
        index carrying the dominant coefficient.
    U : ndarray
        Unitary whose rows are the normal-mode coefficients, so that
        ``U @ H @ U.conj().T`` is diagonal.  Each row's largest-magnitude
        entry is real and positive.

    Raises
    ------
    EigensolverFailure
        If LAPACK fails or the eigenpair residual exceeds ``1e-10 * ||H||``.
    """
    H = np.asarray(H, dtype=complex)
    n = H.shape[0]
    try:
        w, W = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    norm = np.linalg.norm(H, 2) if n else 0.0
    resid = np.linalg.norm(H @ W - W * w, axis=0).max() if n else 0.0
    if not np.isfinite(resid) or resid > EIG_RESIDUAL_RTOL * max(norm, np.finfo(float).tiny):
        raise EigensolverFailure(f"eigenpair residual {resid:.3e} exceeds tolerance")

    U = W.conj().T
    for r in range(n):
        k = _dominant_index(U[r])
        U[r] *= np.conj(U[r, k]) / abs(U[r, k])
        U[r, k] = abs(U[r, k])

    tie = _TIE_RTOL * max(np.abs(w).max(initial=0.0), 1.0)
    keys = []
    group = 0
    for r in range(n):
        if r > 0 and w[r] - w[r - 1] > tie:
            group += 1
        keys.append((group, _dominant_index(U[r])))
    order = sorted(range(n), key=lambda r: keys[r])
    return w[order], U[order]


@dataclass(frozen=True, eq=False)
class ArrowheadForm:
    """Normal-mode representation of a two-component network.

    Attributes
    ----------
    Delta : ndarray, shape (M,)
        Type-a normal frequencies, ascending.
    Omega : ndarray, shape (N,)
        Type-b normal frequencies, ascending.
    C_AB : ndarray, shape (M, N)
        Effective couplings ``G_kj`` between normal modes ``A_k`` and ``B_j``.
    U_a, U_b : ndarray
        Unitaries with normal-mode coefficients as rows.
    """

    Delta: np.ndarray
    Omega: np.ndarray
    C_AB: np.ndarray
    U_a: np.ndarray
    U_b: np.ndarray

    @property
    def M(self) -> int:
        return len(self.Delta)

    @property
    def N(self) -> int:
        return len(self.Omega)

    def matrix(self) -> np.ndarray:
        """Reassembled (M+N) arrowhead coefficient matrix."""
        M, N = self.M, self.N
        H = np.zeros((M + N, M + N), dtype=complex)
        H[:M, :M] = np.diag(self.Delta)
        H[M:, M:] = np.diag(self.Omega)
        H[:M, M:] = self.C_AB
        H[M:, :M] = self.C_AB.conj().T
        return H

    def to_dict(self) -> dict:
        def cm(X):
            return [[[float(z.real), float(z.imag)] for z in row] for row in X]

        return {
            "M": self.M,
            "N": self.N,
            "Delta": [float(x) for x in self.Delta],
            "Omega": [float(x) for x in self.Omega],
            "C_AB": cm(self.C_AB),
            "U_a": cm(self.U_a),
            "U_b": cm(self.U_b),
        }

    @classmethod
    def from_arrowhead(cls, Delta, Omega, C_AB) -> "ArrowheadForm":
        """Wrap an arrowhead that is already in normal-mode form.

        ``Omega`` must be ascending; the unitaries are identities.
        """
        Delta = np.asarray(Delta, dtype=float).reshape(-1)
        Omega = np.asarray(Omega, dtype=float).reshape(-1)
        C = np.asarray(C_AB, dtype=complex).reshape(len(Delta), len(Omega))
        if np.any(np.diff(Omega) < 0):
            raise PreconditionViolated("Omega must be ascending")
        return cls(Delta, Omega, C, np.eye(len(Delta), dtype=complex),
                   np.eye(len(Omega), dtype=complex))


def to_normal_form(spec: NetworkSpec) -> ArrowheadForm:
    """Diagonalize both sub-networks and return the arrowhead form.

    Raises
    ------
    InvalidSpec
        For an invalid spec.
    EigensolverFailure
        For numerically pathological blocks.
    """
    cm = build_coefficient_matrix(spec)
    Delta, U_a = normal_modes(cm.H_a)
    Omega, U_b = normal_modes(cm.H_b)
    C = U_a @ cm.C_ab @ U_b.conj().T
    return ArrowheadForm(Delta, Omega, C, U_a, U_b)


def effective_couplings(spec: NetworkSpec) -> np.ndarray:
    """Effective coupling matrix ``C_AB`` of ``spec`` in the package gauge."""
    return to_normal_form(spec).C_AB


def two_by_three_spec(g22: float, g23: float, delta: float = 1.0, xi: float = 0.08,
                      eta: float = 0.09, g: float = 0.1, kappa: float = 0.1,
                      gamma: float = 1e-5, nbar: float = 1e3) -> NetworkSpec:
    """Two optical modes, three mutually coupled mechanical modes.

    ``g11 = g12 = g13 = g21 = g``; ``g22`` and ``g23`` are free.  Defaults are
    the reference working point with all mechanical frequencies at 1.
    """
    G = np.array([[g, g, g], [g, g22, g23]], dtype=complex)
    E = eta * (np.ones((3, 3)) - np.eye(3))
    X = np.array([[0.0, xi], [xi, 0.0]])
    return NetworkSpec.create(delta=[delta, delta], omega=[1.0, 1.0, 1.0], g=G, xi=X,
                              eta=E, kappa=kappa, gamma=gamma, nbar=nbar)


@dataclass(frozen=True)
class SecularDiagnostics:
    """Roots of the single-apex secular equation and their quality.

    Attributes
    ----------
    eigenvalues : ndarray, shape (N+1,)
        Ascending roots of ``f``.
    residuals : ndarray
        ``|f(lambda_i)|`` divided by the scale of the terms in ``f``.
    interlacing : bool
        Whether ``lambda_1 < Omega_1 < lambda_2 < ... < Omega_N < lambda_{N+1}``.
    """

    eigenvalues: np.ndarray
    residuals: np.ndarray
    interlacing: bool


def secular_function(lam, Delta1: float, Omega: np.ndarray, G: np.ndarray):
    """``f(lambda) = lambda - Delta1 + sum_j |G_j|^2 / (Omega_j - lambda)``."""
    w = np.abs(G) ** 2
    lam = np.asarray(lam, dtype=float)
    return lam - Delta1 + np.sum(w / (Omega - lam[..., None]), axis=-1)


def _secular_scale(lam: float, Delta1: float, Omega, G) -> float:
    return abs(lam) + abs(Delta1) + float(np.sum(np.abs(G) ** 2 / np.abs(Omega - lam)))


def _bisect(f, lo: float, hi: float) -> float:
    # f increases on (lo, hi) with f(lo) < 0 < f(hi) in the limit sense
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def secular_diagnostics(form: ArrowheadForm, tol_cpl: float | None = None,
                        tol_deg: float | None = None) -> SecularDiagnostics:
    """Solve the secular equation of a single-apex arrowhead by bisection.

    Each interval between consecutive ``Omega`` holds exactly one root; the
    two outer roots are bracketed by Gershgorin bounds.

    Parameters
    ----------
    form : ArrowheadForm
        Must have ``M == 1``.
    tol_cpl, tol_deg : float, optional
        Absolute thresholds below which a coupling counts as zero and two
        frequencies as equal.  Defaults follow :class:`darkmode.Tolerances`.

    Raises
    ------
    PreconditionViolated
        If ``M != 1``, a coupling vanishes or two ``Omega`` coincide.
    """
    if form.M != 1:
        raise PreconditionViolated("secular equation needs exactly one type-a mode")
    Delta1 = float(form.Delta[0])
    Omega = np.asarray(form.Omega, dtype=float)
    G = np.asarray(form.C_AB[0])
    N = len(Omega)
    if tol_cpl is None:
        tol_cpl = 1e-10 * np.linalg.norm(G)
    if tol_deg is None:
        tol_deg = 1e-8 * np.abs(Omega).max()
    if np.any(np.abs(G) <= tol_cpl):
        raise PreconditionViolated("zero effective coupling; use dark-mode analysis")
    if N > 1 and np.any(np.diff(Omega) <= tol_deg):
        raise PreconditionViolated("degenerate type-b frequencies; use dark-mode analysis")

    def f(x):
        return float(secular_function(x, Delta1, Omega, G))

    radius = float(np.sum(np.abs(G)))
    colmax = float(np.abs(G).max())
    lo_bound = min(Delta1 - radius, Omega[0] - colmax) - 1.0
    hi_bound = max(Delta1 + radius, Omega[-1] + colmax) + 1.0
    edges = [lo_bound, *Omega.tolist(), hi_bound]
    roots = np.array([_bisect(f, edges[i], edges[i + 1]) for i in range(N + 1)])
    resid = np.array([abs(f(x)) / _secular_scale(x, Delta1, Omega, G) for x in roots])
    seq = np.empty(2 * N + 1)
    seq[0::2] = roots
    seq[1::2] = Omega
    return SecularDiagnostics(roots, resid, bool(np.all(np.diff(seq) > 0)))
