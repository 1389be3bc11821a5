"""Parameter grids over a network spec and their CSV rendering.

Parameter paths name a spec field with optional 1-based indices:
``kappa`` (all entries), ``kappa[1]``, ``omega[2]``, ``eta[1,2]``, ``g[2,3]``.
Setting an off-diagonal entry of ``xi`` or ``eta`` also sets its Hermitian
partner.
"""

from __future__ import annotations

import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .darkmode import Tolerances, analyze
from .dynamics import final_phonon_numbers
from .network import NetworkSpec

_PATH = re.compile(r"^\s*(delta|omega|xi|eta|g|kappa|gamma|nbar)\s*(?:\[\s*(\d+)\s*(?:,\s*(\d+)\s*)?\])?\s*$")
_VECTORS = {"delta", "omega", "kappa", "gamma", "nbar"}
_HERMITIAN = {"xi", "eta"}
SIG_DIGITS = 12


def parse_path(path: str) -> tuple[str, tuple]:
    """Split ``'eta[1,2]'`` into ``('eta', (0, 1))`` (0-based)."""
    m = _PATH.match(path)
    if not m:
        raise ValueError(f"bad parameter path {path!r}")
    name = m.group(1)
    idx = tuple(int(x) - 1 for x in m.group(2, 3) if x is not None)
    if any(i < 0 for i in idx):
        raise ValueError(f"indices in {path!r} are 1-based")
    if idx and (len(idx) == 1) != (name in _VECTORS):
        raise ValueError(f"wrong number of indices for {name!r} in {path!r}")
    return name, idx


def apply_path(spec: NetworkSpec, path: str, value) -> NetworkSpec:
    """Return ``spec`` with the field at ``path`` set to ``value``."""
    name, idx = parse_path(path)
    arr = np.array(getattr(spec, name))
    if not idx:
        if name in _VECTORS:
            arr[:] = value
        else:
            raise ValueError(f"matrix field {name!r} needs indices")
    else:
        if any(i >= n for i, n in zip(idx, arr.shape)):
            raise ValueError(f"index out of range in {path!r}")
        arr[idx] = value
        if name in _HERMITIAN and len(idx) == 2:
            arr[idx[1], idx[0]] = np.conj(value)
    return spec.replace(**{name: arr})


@dataclass(frozen=True)
class Axis:
    path: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        parse_path(self.path)
        if self.count < 1:
            raise ValueError("axis count must be positive")
        if self.count == 1 and self.start != self.stop:
            raise ValueError("a single-point axis needs start == stop")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SweepPlan:
    """One or two swept parameters plus fixed overrides, on a base spec."""

    spec: NetworkSpec
    axes: tuple
    overrides: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ValueError("a sweep has one or two axes")

    def base(self) -> NetworkSpec:
        s = self.spec
        for path, val in self.overrides:
            s = apply_path(s, path, val)
        return s

    def points(self) -> list[tuple]:
        """Grid points in row-major order (first axis slowest)."""
        grids = [ax.values() for ax in self.axes]
        if len(grids) == 1:
            return [(float(x),) for x in grids[0]]
        return [(float(x), float(y)) for x in grids[0] for y in grids[1]]

    def spec_at(self, point) -> NetworkSpec:
        s = self.base()
        for ax, val in zip(self.axes, point):
            s = apply_path(s, ax.path, val)
        return s


@dataclass(frozen=True)
class SweepRow:
    params: tuple
    stable: bool
    n_f: tuple
    dark_count: int


def evaluate(spec: NetworkSpec, params=(), tolerances: Tolerances | None = None,
             method: str = "kronecker") -> SweepRow:
    res = final_phonon_numbers(spec, method=method)
    n_f = tuple(float(x) for x in res.n_f) if res.stable else (float("nan"),) * spec.N
    return SweepRow(tuple(params), res.stable, n_f, analyze(spec, tolerances).dark_count)


def _job(args):
    plan, point, tol, method = args
    return evaluate(plan.spec_at(point), point, tol, method)


def run_sweep(plan: SweepPlan, tolerances: Tolerances | None = None, jobs: int = 1,
              method: str = "kronecker") -> list[SweepRow]:
    """Evaluate every grid point; output is in grid order for any ``jobs``."""
    work = [(plan, p, tolerances, method) for p in plan.points()]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_job, work, chunksize=max(1, len(work) // (4 * jobs))))
    return [_job(w) for w in work]


def fmt(x: float) -> str:
    """Number with 12 significant digits; ``nan`` for missing values."""
    if x != x:
        return "nan"
    s = format(float(x), f".{SIG_DIGITS}g")
    return "0" if s == "-0" else s


def csv_header(N: int) -> str:
    return ",".join(["param1", "param2", "stable"] + [f"n_f_{j}" for j in range(1, N + 1)]
                    + ["dark_count"])


def csv_row(row: SweepRow) -> str:
    p = [fmt(v) for v in row.params] + [""] * (2 - len(row.params))
    return ",".join(p + ["true" if row.stable else "false"] + [fmt(x) for x in row.n_f]
                    + [str(row.dark_count)])


def render_csv(rows: list[SweepRow], N: int) -> str:
    return "\n".join([csv_header(N)] + [csv_row(r) for r in rows]) + "\n"
