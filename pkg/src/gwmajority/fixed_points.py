"""Fixed points of the scalar undecided-mass map and their basins.

A *source* is either an arity ``n`` (the map f_n) or an offspring law (the
mixture f = sum q_n f_n; the shifted geometric law uses its closed form).
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, TextIO, Union

import numpy as np

from .errors import DomainError
from .offspring import NAry, OffspringDistribution, ShiftedGeometric, SupportParity, support_parity
from .roots import bracket_roots, find_root
from .uniform import GWMixture, eval_fn, eval_fn_derivative, geometric_f_closed, geometric_f_derivative

EPS_CLASSIFY = 1e-9
SCAN_POINTS = 10_000
GRID_POINTS = 2_001
DEGENERATE_TOL = 1e-12
DERIV_SLACK = 1e-12

Source = Union[int, OffspringDistribution]


class Classification(str, enum.Enum):
    LINEARLY_ATTRACTING = "LinearlyAttracting"
    NEUTRAL_SUSPECT = "NeutralSuspect"
    REPELLING = "Repelling"


class BasinCertificate(str, enum.Enum):
    MONOTONE_INCREASING = "MonotoneIncreasing"
    DERIV_POSITIVE_AT_ALPHA = "DerivPositiveAtAlpha"
    MINMAX_CONTRACTION = "MinMaxContraction"
    NONE = "None"


@dataclass(frozen=True)
class ScalarMap:
    label: str
    f: Callable
    df: Callable
    d2f: Callable
    parity: SupportParity
    n: Optional[int] = None


def scalar_map(source: Source) -> ScalarMap:
    if isinstance(source, NAry):
        source = source.n
    if isinstance(source, (int, np.integer)):
        n = int(source)
        if n < 2:
            raise DomainError(f"arity must be >= 2, got {n}")
        return ScalarMap(
            f"n={n}",
            lambda t: eval_fn(n, t),
            lambda t: eval_fn_derivative(n, 1, t),
            lambda t: eval_fn_derivative(n, 2, t),
            SupportParity.ALL_EVEN if n % 2 == 0 else SupportParity.ALL_ODD,
            n,
        )
    if isinstance(source, ShiftedGeometric):
        p = float(source.p)
        return ScalarMap(
            source.spec(),
            lambda t: geometric_f_closed(p, t),
            lambda t: geometric_f_derivative(p, t, 1),
            lambda t: geometric_f_derivative(p, t, 2),
            SupportParity.MIXED,
        )
    if isinstance(source, OffspringDistribution):
        mix = GWMixture.of(source)
        return ScalarMap(
            source.spec(),
            lambda t: mix.derivative(0, t),
            lambda t: mix.derivative(1, t),
            lambda t: mix.derivative(2, t),
            support_parity(source),
        )
    raise TypeError(f"unsupported source {source!r}")


def find_alpha(f: Callable, bracket: tuple[float, float], df: Optional[Callable] = None) -> float:
    """Root of f(t) - t in ``bracket``; raises NoBracketError without a sign change."""
    lo, hi = bracket
    dg = (lambda t: df(t) - 1.0) if df is not None else None
    return find_root(lambda t: f(t) - t, lo, hi, dg)


def alpha_n(n: int) -> float:
    """Fixed point of f_n in (0, 1/2) without a grid scan.

    f_n(t) - t is positive just above 0 (f_n(0) > 0 for even n, f_n'(0) > 1
    for odd n >= 3) and negative at 1/2 where f_n(1/2) = xi_{2n} < 1/2.
    """
    fmap = scalar_map(n)
    lo = 0.0 if n % 2 == 0 else 1e-9
    return find_alpha(fmap.f, (lo, 0.5), fmap.df)


def scan_fixed_points(fmap: ScalarMap, points: int = SCAN_POINTS) -> list[float]:
    """Every fixed point in (0, 1) revealed by a sign change of f(t) - t on
    an interior grid, refined and sorted."""
    grid_lo, grid_hi = 1.0 / (points + 1), points / (points + 1)
    brackets = bracket_roots(lambda t: fmap.f(t) - t, grid_lo, grid_hi, points)
    return sorted(find_alpha(fmap.f, br, fmap.df) for br in brackets)


def classify(df: Callable, alpha: float, eps: float = EPS_CLASSIFY) -> Classification:
    d = abs(df(alpha))
    if d < 1 - eps:
        return Classification.LINEARLY_ATTRACTING
    if d > 1 + eps:
        return Classification.REPELLING
    return Classification.NEUTRAL_SUSPECT


def _xhat(fmap: ScalarMap) -> Optional[float]:
    lo, hi = 0.0, 1.0
    if fmap.df(lo) >= 0 or fmap.df(hi) <= 0:
        return None
    return find_root(fmap.df, lo, hi, fmap.d2f)


def find_xhat(n: int) -> float:
    """Minimiser of f_n for even n."""
    if n % 2 or n < 2:
        raise DomainError(f"minimiser is defined for even n >= 2, got {n}")
    return _xhat(scalar_map(n))


@dataclass(frozen=True)
class Preimages:
    a: float
    b: float
    degenerate: bool = False


def _preimages(fmap: ScalarMap, xhat: float) -> Optional[Preimages]:
    m = fmap.f(xhat)
    if abs(m - xhat) <= DEGENERATE_TOL:
        return Preimages(xhat, xhat, True)
    if m > xhat or fmap.f(0.0) < xhat:
        return None
    g = lambda t: fmap.f(t) - xhat
    a = find_root(g, 0.0, xhat, fmap.df)
    b = find_root(g, xhat, 1.0, fmap.df)
    return Preimages(a, b)


def find_preimages(n: int) -> Optional[Preimages]:
    """Solutions a < xhat < b of f_n(t) = xhat, or None when f_n(xhat) > xhat.

    For n = 2 the two coincide with xhat and the result is flagged degenerate.
    """
    return _preimages(scalar_map(n), find_xhat(n))


@dataclass(frozen=True)
class FixedPointReport:
    source: str
    alpha: float
    derivative_at_alpha: float
    classification: Classification
    xhat: Optional[float]
    f_at_xhat: Optional[float]
    a_point: Optional[float]
    b_point: Optional[float]
    basin_certificate: BasinCertificate
    degenerate: bool = False
    fixed_points: tuple = ()
    exploratory: bool = False
    derivative_at_a: Optional[float] = None
    derivative_at_b: Optional[float] = None
    notes: tuple = field(default=())

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["classification"] = self.classification.value
        out["basin_certificate"] = self.basin_certificate.value
        out["fixed_points"] = list(self.fixed_points)
        out["notes"] = list(self.notes)
        return out


def _certificate(fmap: ScalarMap, alpha: float, pre: Optional[Preimages]) -> BasinCertificate:
    grid = np.linspace(0.0, 1.0, GRID_POINTS)
    if np.all(fmap.df(grid) > 0):
        return BasinCertificate.MONOTONE_INCREASING
    # convex and nondecreasing at alpha: the orbit is monotone after one step
    if np.all(fmap.d2f(grid) > 0) and fmap.df(alpha) >= -DERIV_SLACK:
        return BasinCertificate.DERIV_POSITIVE_AT_ALPHA
    if pre is not None and not pre.degenerate:
        if max(abs(fmap.df(pre.a)), abs(fmap.df(pre.b))) < 1:
            return BasinCertificate.MINMAX_CONTRACTION
    return BasinCertificate.NONE


def geometric_alpha_closed(p: float) -> float:
    if not 0 < p < 1:
        raise DomainError(f"geometric parameter must lie in (0, 1), got {p}")
    return (-3 * p + math.sqrt(p * (p + 8))) / (4 * (1 - p))


def fixed_point_report(source: Source) -> FixedPointReport:
    fmap = scalar_map(source)
    notes = []
    if isinstance(source, ShiftedGeometric):
        alpha = geometric_alpha_closed(float(source.p))
        fixed = (alpha,)
    else:
        fixed = tuple(scan_fixed_points(fmap))
        if not fixed:
            raise DomainError(f"no fixed point of {fmap.label} found in (0, 1)")
        # smallest fixed point; unique for pure odd or even support
        alpha = fixed[0]
        if len(fixed) > 1:
            notes.append(f"{len(fixed)} fixed points found on the scan grid")
    exploratory = fmap.parity is SupportParity.MIXED
    if exploratory:
        notes.append("mixed-parity support: exploratory")
    d_alpha = float(fmap.df(alpha))
    cls = classify(fmap.df, alpha)
    if cls is Classification.NEUTRAL_SUSPECT:
        notes.append("derivative modulus within tolerance of 1")
    xhat = _xhat(fmap) if fmap.parity is not SupportParity.ALL_ODD else None
    f_xhat = float(fmap.f(xhat)) if xhat is not None else None
    pre = _preimages(fmap, xhat) if xhat is not None else None
    return FixedPointReport(
        source=fmap.label,
        alpha=alpha,
        derivative_at_alpha=d_alpha,
        classification=cls,
        xhat=xhat,
        f_at_xhat=f_xhat,
        a_point=pre.a if pre else None,
        b_point=pre.b if pre else None,
        basin_certificate=_certificate(fmap, alpha, pre),
        degenerate=bool(pre and pre.degenerate),
        fixed_points=fixed,
        exploratory=exploratory,
        derivative_at_a=float(fmap.df(pre.a)) if pre else None,
        derivative_at_b=float(fmap.df(pre.b)) if pre else None,
        notes=tuple(notes),
    )


def basin_certificate(source: Union[Source, FixedPointReport]) -> BasinCertificate:
    if isinstance(source, FixedPointReport):
        return source.basin_certificate
    return fixed_point_report(source).basin_certificate


TABLE_HEADER = ("n", "xhat_n", "f_n(xhat_n)", "alpha_n", "f'_n(alpha_n)", "a_n", "b_n", "f'_n(a_n)", "f'_n(b_n)")


@dataclass(frozen=True)
class TableRow:
    n: int
    xhat: float
    f_xhat: float
    alpha: float
    d_alpha: float
    a: Optional[float]
    b: Optional[float]
    d_a: Optional[float]
    d_b: Optional[float]

    def cells(self) -> tuple:
        return (self.n, self.xhat, self.f_xhat, self.alpha, self.d_alpha, self.a, self.b, self.d_a, self.d_b)


def table_rows(ns: Iterable[int]) -> list[TableRow]:
    rows = []
    for n in ns:
        if n % 2 or n < 2:
            raise DomainError(f"table rows are defined for even n >= 2, got {n}")
        rep = fixed_point_report(n)
        rows.append(
            TableRow(
                n, rep.xhat, rep.f_at_xhat, rep.alpha, rep.derivative_at_alpha,
                rep.a_point, rep.b_point, rep.derivative_at_a, rep.derivative_at_b,
            )
        )
    return rows


def write_table_csv(rows: Iterable[TableRow], fh: TextIO, digits: int = 17) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TABLE_HEADER)
    for row in rows:
        w.writerow(
            [row.n] + ["" if v is None else format(v, f".{digits}g") for v in row.cells()[1:]]
        )


def read_table_csv(fh: TextIO) -> list[TableRow]:
    reader = csv.reader(fh)
    header = tuple(next(reader))
    if header != TABLE_HEADER:
        raise ValueError(f"unexpected table header {header}")
    out = []
    for r in reader:
        vals = [None if c == "" else float(c) for c in r[1:]]
        out.append(TableRow(int(r[0]), *vals))
    return out


def iterate_scalar(f: Callable, t0: float, max_steps: int = 10_000, tol: float = 1e-13) -> tuple[float, bool, int]:
    """(last value, converged, steps) for t_{m+1} = f(t_m)."""
    t = t0
    for step in range(1, max_steps + 1):
        nxt = f(t)
        if abs(nxt - t) < tol:
            return nxt, True, step
        t = nxt
    return t, False, max_steps


def settles_on_period_two(f: Callable, t0, steps: int = 2_000, tol: float = 1e-10):
    """True where the orbit ends on a genuine 2-cycle (f(f(t)) = t but f(t) != t).

    ``t0`` may be an array of seeds when ``f`` is vectorised; the result then
    has the same shape.
    """
    t = np.asarray(t0, dtype=float)
    for _ in range(steps):
        t = f(t)
    ft = f(t)
    out = (np.abs(f(ft) - t) < tol) & (np.abs(ft - t) > tol)
    return bool(out) if out.ndim == 0 else out
