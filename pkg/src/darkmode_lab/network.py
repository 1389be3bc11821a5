"""Network specification, validation, JSON I/O and the bare-mode coefficient matrix.

A two-component network has ``M`` type-a modes and ``N`` type-b modes.  The
Hamiltonian (in units of a reference frequency ``omega_ref``) is

    H = sum_k delta_k a_k^+ a_k + sum_j omega_j b_j^+ b_j
        + sum_{k<k'} (xi_kk' a_k^+ a_k' + h.c.)
        + sum_{j<j'} (eta_jj' b_j^+ b_j' + h.c.)
        + sum_{k,j} (g_kj a_k^+ b_j + h.c.)

and the coefficient matrix ``H`` is the (M+N)x(M+N) Hermitian matrix with
``H = (a^+, b^+) H (a, b)^T``.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import DimensionMismatch, InvalidSpec, ParseError

HERMITIAN_RTOL = 1e-12

SPEC_KEYS = ("M", "N", "omega_ref", "delta", "omega", "xi", "eta", "g",
             "kappa", "gamma", "nbar")


def _frozen(x, dtype) -> np.ndarray:
    arr = np.array(x, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    """Full parameterization of an (M+N)-mode linear bosonic network.

    Parameters
    ----------
    M, N : int
        Number of type-a and type-b modes.
    delta : array_like, shape (M,)
        Type-a detunings.
    omega : array_like, shape (N,)
        Type-b frequencies.
    xi : array_like, shape (M, M)
        Type-a hopping matrix, Hermitian with zero diagonal.
    eta : array_like, shape (N, N)
        Type-b hopping matrix, Hermitian with zero diagonal.
    g : array_like, shape (M, N)
        Inter-type coupling matrix.
    kappa, gamma : array_like
        Decay rates of the type-a and type-b modes.
    nbar : array_like, shape (N,)
        Thermal occupations of the type-b baths.
    omega_ref : float
        Reference frequency all other entries are measured in.

    Notes
    -----
    Arrays are stored read-only so instances can be shared freely.  Use
    :meth:`replace` to derive modified copies.
    """

    M: int
    N: int
    delta: np.ndarray
    omega: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    g: np.ndarray
    kappa: np.ndarray
    gamma: np.ndarray
    nbar: np.ndarray
    omega_ref: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "omega_ref", float(self.omega_ref))
        for name in ("delta", "omega", "kappa", "gamma", "nbar"):
            object.__setattr__(self, name, _frozen(getattr(self, name), float))
        for name in ("xi", "eta", "g"):
            object.__setattr__(self, name, _frozen(getattr(self, name), complex))

    @classmethod
    def create(cls, delta, omega, g, xi=None, eta=None, kappa=None, gamma=None,
               nbar=None, omega_ref=1.0) -> "NetworkSpec":
        """Build a spec with zero defaults for the optional fields.

        ``g`` fixes the shape (M, N); scalars for ``kappa``, ``gamma`` and
        ``nbar`` are broadcast.
        """
        g = np.atleast_2d(np.asarray(g, dtype=complex))
        M, N = g.shape
        delta = np.broadcast_to(np.asarray(delta, dtype=float), (M,))
        omega = np.broadcast_to(np.asarray(omega, dtype=float), (N,))
        xi = np.zeros((M, M), complex) if xi is None else xi
        eta = np.zeros((N, N), complex) if eta is None else eta
        kappa = np.broadcast_to(np.asarray(0.0 if kappa is None else kappa, float), (M,))
        gamma = np.broadcast_to(np.asarray(0.0 if gamma is None else gamma, float), (N,))
        nbar = np.broadcast_to(np.asarray(0.0 if nbar is None else nbar, float), (N,))
        return cls(M, N, delta, omega, xi, eta, g, kappa, gamma, nbar, omega_ref)

    def replace(self, **changes) -> "NetworkSpec":
        """Return a copy with the given fields replaced."""
        return dataclasses.replace(self, **changes)

    def __eq__(self, other):
        if not isinstance(other, NetworkSpec):
            return NotImplemented
        if (self.M, self.N, self.omega_ref) != (other.M, other.N, other.omega_ref):
            return False
        for name in SPEC_KEYS[3:]:
            a, b = getattr(self, name), getattr(other, name)
            if a.shape != b.shape or not np.array_equal(a, b):
                return False
        return True

    __hash__ = None


@dataclass(frozen=True)
class Violation:
    """One violated invariant. ``index`` is 1-based, matching printed notation."""

    field: str
    message: str
    index: tuple = ()

    def __str__(self):
        if self.index:
            return f"{self.message} at ({','.join(str(i) for i in self.index)})"
        return self.message


@dataclass(frozen=True)
class ValidationReport:
    """Every violated invariant of a spec. Empty means valid."""

    violations: tuple = field(default_factory=tuple)

    def __bool__(self):
        return bool(self.violations)

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def messages(self) -> list[str]:
        return [str(v) for v in self.violations]


def _check_hermitian(name: str, X: np.ndarray) -> list[Violation]:
    out = []
    scale = np.linalg.norm(X)
    tol = HERMITIAN_RTOL * scale if scale > 0 else 0.0
    n = X.shape[0]
    for i in range(n):
        if abs(X[i, i]) > tol:
            out.append(Violation(name, f"{name} diagonal not zero", (i + 1, i + 1)))
    for i in range(n):
        for j in range(i + 1, n):
            if abs(X[i, j] - np.conj(X[j, i])) > tol:
                out.append(Violation(name, f"{name} not Hermitian", (i + 1, j + 1)))
    return out


def validate_spec(spec: NetworkSpec) -> ValidationReport:
    """Collect every violated invariant of ``spec``.

    Returns
    -------
    ValidationReport
        Empty for a valid network.  Never raises on malformed content.
    """
    v: list[Violation] = []
    M, N = spec.M, spec.N
    if M < 1:
        v.append(Violation("M", "M must be at least 1"))
    if N < 1:
        v.append(Violation("N", "N must be at least 1"))
    shapes = {
        "delta": (M,), "omega": (N,), "xi": (M, M), "eta": (N, N), "g": (M, N),
        "kappa": (M,), "gamma": (N,), "nbar": (N,),
    }
    shape_ok = True
    for name, shp in shapes.items():
        arr = getattr(spec, name)
        if arr.shape != shp:
            shape_ok = False
            v.append(Violation(name, f"{name} has shape {arr.shape}, expected {shp}"))
        elif not np.all(np.isfinite(arr)):
            v.append(Violation(name, f"{name} contains non-finite entries"))
    if not (math.isfinite(spec.omega_ref) and spec.omega_ref > 0):
        v.append(Violation("omega_ref", "omega_ref must be positive and finite"))
    if not shape_ok:
        return ValidationReport(tuple(v))
    v += _check_hermitian("xi", spec.xi)
    v += _check_hermitian("eta", spec.eta)
    for name, label in (("kappa", "negative decay rate"), ("gamma", "negative decay rate"),
                        ("nbar", "negative thermal occupation")):
        for i, x in enumerate(getattr(spec, name)):
            if x < 0:
                v.append(Violation(name, f"{label} {name}", (i + 1,)))
    return ValidationReport(tuple(v))


def ensure_valid(spec: NetworkSpec) -> None:
    """Raise :class:`InvalidSpec` if ``spec`` has any violation."""
    report = validate_spec(spec)
    if report:
        raise InvalidSpec(report.violations)


@dataclass(frozen=True, eq=False)
class CoefficientMatrix:
    """Bare-mode coefficient matrix with its block layout.

    ``H[a, a]`` is the type-a block, ``H[b, b]`` the type-b block and
    ``H[a, b]`` the inter-type coupling block, with ``a = slice(0, M)`` and
    ``b = slice(M, M+N)``.
    """

    H: np.ndarray
    M: int
    N: int

    @property
    def a(self) -> slice:
        return slice(0, self.M)

    @property
    def b(self) -> slice:
        return slice(self.M, self.M + self.N)

    @property
    def H_a(self) -> np.ndarray:
        return self.H[self.a, self.a]

    @property
    def H_b(self) -> np.ndarray:
        return self.H[self.b, self.b]

    @property
    def C_ab(self) -> np.ndarray:
        return self.H[self.a, self.b]


def build_coefficient_matrix(spec: NetworkSpec) -> CoefficientMatrix:
    """Assemble the bare-mode coefficient matrix.

    The upper triangle is filled from ``xi``, ``eta`` and ``g``; the lower
    triangle is its Hermitian completion.

    Raises
    ------
    InvalidSpec
        If :func:`validate_spec` reports any violation.
    """
    ensure_valid(spec)
    M, N = spec.M, spec.N
    H = np.zeros((M + N, M + N), dtype=complex)
    iu_a = np.triu_indices(M, 1)
    iu_b = np.triu_indices(N, 1)
    H[iu_a] = spec.xi[iu_a]
    H[M + iu_b[0], M + iu_b[1]] = spec.eta[iu_b]
    H[:M, M:] = spec.g
    H = H + H.conj().T
    H[np.arange(M), np.arange(M)] = spec.delta
    H[M + np.arange(N), M + np.arange(N)] = spec.omega
    H.setflags(write=False)
    return CoefficientMatrix(H, M, N)


# JSON serialization

def _encode_complex(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def spec_to_dict(spec: NetworkSpec) -> dict[str, Any]:
    """Plain-JSON view of a spec; complex numbers become ``[re, im]``."""
    return {
        "M": spec.M,
        "N": spec.N,
        "omega_ref": spec.omega_ref,
        "delta": spec.delta.tolist(),
        "omega": spec.omega.tolist(),
        "xi": [[_encode_complex(z) for z in row] for row in spec.xi],
        "eta": [[_encode_complex(z) for z in row] for row in spec.eta],
        "g": [[_encode_complex(z) for z in row] for row in spec.g],
        "kappa": spec.kappa.tolist(),
        "gamma": spec.gamma.tolist(),
        "nbar": spec.nbar.tolist(),
    }


def _decode_number(x, key: str, allow_complex: bool):
    if isinstance(x, bool):
        raise ParseError("boolean is not a number", field=key)
    if isinstance(x, (int, float)):
        return complex(x) if allow_complex else float(x)
    if allow_complex and isinstance(x, list) and len(x) == 2 and all(
            isinstance(t, (int, float)) and not isinstance(t, bool) for t in x):
        return complex(float(x[0]), float(x[1]))
    kind = "number or [re, im] pair" if allow_complex else "real number"
    raise ParseError(f"expected {kind}, got {x!r}", field=key)


def _decode_vector(data, key: str, length: int) -> np.ndarray:
    if not isinstance(data, list):
        raise ParseError("expected a list", field=key)
    if len(data) != length:
        raise DimensionMismatch(f"expected {length} entries, got {len(data)}", field=key)
    return np.array([_decode_number(x, key, False) for x in data], dtype=float)


def _decode_matrix(data, key: str, rows: int, cols: int) -> np.ndarray:
    if not isinstance(data, list):
        raise ParseError("expected a nested list", field=key)
    if len(data) != rows:
        raise DimensionMismatch(f"expected {rows} rows, got {len(data)}", field=key)
    out = np.zeros((rows, cols), dtype=complex)
    for i, row in enumerate(data):
        if not isinstance(row, list):
            raise ParseError(f"row {i + 1} is not a list", field=key)
        if len(row) != cols:
            raise DimensionMismatch(f"row {i + 1}: expected {cols} entries, got {len(row)}",
                                    field=key)
        for j, x in enumerate(row):
            out[i, j] = _decode_number(x, key, True)
    return out


def spec_from_dict(data: Any) -> NetworkSpec:
    """Inverse of :func:`spec_to_dict` with schema enforcement.

    Raises
    ------
    ParseError
        Missing or unknown keys, or wrongly typed entries.
    DimensionMismatch
        Array lengths inconsistent with ``M`` and ``N``.
    """
    if not isinstance(data, dict):
        raise ParseError("top level must be an object")
    unknown = sorted(set(data) - set(SPEC_KEYS))
    if unknown:
        raise ParseError("unknown key", field=unknown[0])
    for key in SPEC_KEYS:
        if key not in data:
            raise ParseError("missing required key", field=key)
    M, N = data["M"], data["N"]
    for key, val in (("M", M), ("N", N)):
        if isinstance(val, bool) or not isinstance(val, int) or val < 1:
            raise ParseError("expected a positive integer", field=key)
    omega_ref = _decode_number(data["omega_ref"], "omega_ref", False)
    return NetworkSpec(
        M=M, N=N, omega_ref=omega_ref,
        delta=_decode_vector(data["delta"], "delta", M),
        omega=_decode_vector(data["omega"], "omega", N),
        xi=_decode_matrix(data["xi"], "xi", M, M),
        eta=_decode_matrix(data["eta"], "eta", N, N),
        g=_decode_matrix(data["g"], "g", M, N),
        kappa=_decode_vector(data["kappa"], "kappa", M),
        gamma=_decode_vector(data["gamma"], "gamma", N),
        nbar=_decode_vector(data["nbar"], "nbar", N),
    )


def loads_spec(text: str) -> NetworkSpec:
    """Parse a spec from a JSON string."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    return spec_from_dict(data)


def dumps_spec(spec: NetworkSpec) -> str:
    """Serialize a spec to a JSON string with stable key order."""
    return json.dumps(spec_to_dict(spec), indent=2) + "\n"


def load_spec(path) -> NetworkSpec:
    """Read a spec file. Raises :class:`ParseError` on any format problem."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    return loads_spec(text)


def save_spec(spec: NetworkSpec, path) -> None:
    """Write a spec file; floats use shortest round-trip repr, so reload is exact."""
    Path(path).write_text(dumps_spec(spec))


def nonzero_pattern(X: np.ndarray, tol: float = 0.0) -> set[tuple[int, int]]:
    """Index pairs of entries with magnitude above ``tol``."""
    return {(int(i), int(j)) for i, j in zip(*np.nonzero(np.abs(X) > tol))}

