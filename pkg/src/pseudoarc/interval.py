"""Simplicial maps between linear graphs and exact piecewise-linear maps of [0, 1].

A simplicial map I_m -> I_n is stored as its vertex values v_0..v_m. Large
maps can be represented lazily (see ``LazyMap``); they answer point queries
without ever materializing the value array.

PL maps keep exact ``Fraction`` breakpoints in canonical form: interior
breakpoints that are collinear with their neighbours are dropped, so two
PL maps are equal iff their breakpoint lists are equal.
"""
import bisect
import json
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from .errors import (ConcatMismatch, DegenerateCodomain, DomainMismatch,
                     IncludeOutOfRange, InvalidPLMap, ParseError,
                     RangeViolation, StepViolation, TooLarge)

ZERO = Fraction(0)
ONE = Fraction(1)


def rational(x):
    """Parse ints, Fractions and "p/q" strings. Floats are rejected."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ParseError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"not a rational: {x!r}") from None
    raise ParseError(f"not an exact rational: {x!r}")


def fmt(q):
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# simplicial maps

def _as_array(values):
    vals = [int(v) for v in values]
    if vals and (max(vals) > 2 ** 62 or min(vals) < -2 ** 62):
        return np.array(vals, dtype=object)
    return np.array(vals, dtype=np.int64)


class SimplicialMap:
    """Materialized simplicial map I_m -> I_n."""

    __slots__ = ("codomain_size", "values", "_bps")
    lazy = False

    def __init__(self, codomain_size, values):
        arr = values if isinstance(values, np.ndarray) else _as_array(values)
        arr.setflags(write=False)
        self.codomain_size = int(codomain_size)
        self.values = arr
        self._bps = None

    @property
    def m(self):
        return len(self.values) - 1

    @property
    def n(self):
        return self.codomain_size

    def at(self, i):
        if i < 0 or i > self.m:
            raise DomainMismatch(f"index {i} outside I_{self.m}", index=int(i))
        return int(self.values[i])

    def tolist(self):
        return [int(v) for v in self.values]

    @property
    def surjective(self):
        if len(self.values) == 0:
            return False
        return int(self.values.min()) == 0 and int(self.values.max()) == self.codomain_size

    @property
    def breakpoints(self):
        """Indices i where the slope changes, plus both endpoints."""
        if self._bps is None:
            v = self.values
            if len(v) <= 2:
                self._bps = tuple(range(len(v)))
            else:
                d = np.diff(v.astype(np.int64) if v.dtype == object else v)
                inner = np.nonzero(d[1:] != d[:-1])[0] + 1
                self._bps = (0, *[int(i) for i in inner], self.m)
        return self._bps

    def reversed(self):
        return SimplicialMap(self.codomain_size, self.values[::-1].copy())

    def materialize(self, bound=None):
        return self

    def __eq__(self, other):
        if not isinstance(other, SimplicialMap):
            return NotImplemented
        return (self.codomain_size == other.codomain_size
                and len(self.values) == len(other.values)
                and bool(np.all(self.values == other.values)))

    def __hash__(self):
        return hash((self.codomain_size, tuple(self.tolist())))

    def __repr__(self):
        vals = self.tolist()
        body = vals if len(vals) <= 12 else vals[:6] + ["..."] + vals[-3:]
        return f"SimplicialMap(I_{self.m} -> I_{self.n}, {body})"

    def to_json(self):
        return {"codomain_size": self.codomain_size, "values": self.tolist()}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        return build_simplicial(obj["codomain_size"], obj["values"])


def build_simplicial(codomain_size, values):
    if codomain_size < 0:
        raise RangeViolation("codomain size must be >= 0", codomain_size=codomain_size)
    vals = [int(v) for v in values]
    if not vals:
        raise RangeViolation("a simplicial map needs at least one vertex")
    for i, v in enumerate(vals):
        if v < 0 or v > codomain_size:
            raise RangeViolation(f"value {v} at vertex {i} outside [0, {codomain_size}]",
                                 index=i, value=v)
    for i in range(len(vals) - 1):
        if abs(vals[i + 1] - vals[i]) > 1:
            raise StepViolation(f"step {vals[i]} -> {vals[i + 1]} at vertex {i}",
                                index=i, values=[vals[i], vals[i + 1]])
    return SimplicialMap(codomain_size, vals)


def identity(n):
    return SimplicialMap(n, np.arange(n + 1, dtype=np.int64))


def concat(s, t):
    """s followed by t; the shared vertex s(m) = t(0) is kept once."""
    if s.codomain_size != t.codomain_size:
        raise ConcatMismatch("codomain sizes differ",
                             codomain_sizes=[s.codomain_size, t.codomain_size])
    if s.at(s.m) != t.at(0):
        raise ConcatMismatch(f"s ends at {s.at(s.m)} but t starts at {t.at(0)}",
                             endpoints=[s.at(s.m), t.at(0)])
    if s.lazy or t.lazy:
        return LazyConcat([s, t])
    return SimplicialMap(s.codomain_size, np.concatenate([s.values, t.values[1:]]))


def include(m, k, n):
    """The inclusion e^n_{m,k}: i -> i + k from I_m into I_n."""
    if m < 0 or k < 0 or m + k > n:
        raise IncludeOutOfRange(f"e^{n}_({m},{k}) needs m + k <= n", m=m, k=k, n=n)
    return SimplicialMap(n, np.arange(k, k + m + 1, dtype=np.int64))


def reverse(m):
    """The inversion r_m: i -> m - i."""
    return SimplicialMap(m, np.arange(m, -1, -1, dtype=np.int64))


def combinators(kind, *args):
    if kind == "concat":
        return concat(*args)
    if kind == "include":
        return include(*args)
    if kind == "reverse":
        (arg,) = args
        return arg.reversed() if hasattr(arg, "reversed") else reverse(arg)
    raise ValueError(f"unknown combinator {kind!r}")


# ---------------------------------------------------------------------------
# lazy simplicial maps

class LazyMap:
    """A simplicial map answering point queries without a value array."""

    lazy = True
    m = 0
    codomain_size = 0

    @property
    def n(self):
        return self.codomain_size

    def at(self, i):
        raise NotImplementedError

    def materialize(self, bound=10 ** 7):
        if self.m + 1 > bound:
            raise TooLarge(f"{self.m + 1} vertices exceed the bound {bound}",
                           size=self.m + 1, bound=bound)
        return SimplicialMap(self.codomain_size, [self.at(i) for i in range(self.m + 1)])

    def reversed(self):
        return LazyPiece(self, reverse=True)

    def __repr__(self):
        return f"{type(self).__name__}(I_{self.m} -> I_{self.codomain_size})"


class LazyPiece(LazyMap):
    """v -> offset + sign * sub(i), optionally with the domain reversed."""

    def __init__(self, sub, offset=0, sign=1, reverse=False, codomain_size=None):
        self.sub = sub
        self.offset = offset
        self.sign = sign
        self.rev = reverse
        self.m = sub.m
        self.codomain_size = sub.codomain_size if codomain_size is None else codomain_size

    def at(self, i):
        j = self.m - i if self.rev else i
        return self.offset + self.sign * self.sub.at(j)


class LazyConcat(LazyMap):
    def __init__(self, parts, codomain_size=None):
        self.parts = list(parts)
        self.starts = [0]
        for p in self.parts:
            self.starts.append(self.starts[-1] + p.m)
        self.m = self.starts[-1]
        self.codomain_size = self.parts[0].codomain_size if codomain_size is None else codomain_size

    def at(self, i):
        if i < 0 or i > self.m:
            raise DomainMismatch(f"index {i} outside I_{self.m}", index=i)
        k = bisect.bisect_right(self.starts, i) - 1
        k = min(k, len(self.parts) - 1)
        return self.parts[k].at(i - self.starts[k])


class LazyCompose(LazyMap):
    def __init__(self, outer, inner):
        self.outer = outer
        self.inner = inner
        self.m = inner.m
        self.codomain_size = outer.codomain_size

    def at(self, i):
        return self.outer.at(self.inner.at(i))


def compose(outer, inner):
    """outer o inner, for simplicial maps or PL maps."""
    if isinstance(outer, PLMap) and isinstance(inner, PLMap):
        return compose_pl(outer, inner)
    if inner.codomain_size != outer.m:
        raise DomainMismatch(f"inner codomain I_{inner.codomain_size} is not outer domain I_{outer.m}",
                             inner_codomain=inner.codomain_size, outer_domain=outer.m)
    if outer.lazy or inner.lazy:
        return LazyCompose(outer, inner)
    return SimplicialMap(outer.codomain_size, outer.values[inner.values])


# ---------------------------------------------------------------------------
# PL maps

class PLMap:
    """Exact piecewise-linear map on [0, 1]; breakpoints kept in canonical form.

    ``bounded=False`` lifts the [0, 1] value constraint (used for circle lifts).
    """

    __slots__ = ("xs", "ys", "bounded")

    def __init__(self, points, bounded=True):
        pts = [(rational(x), rational(y)) for x, y in points]
        if len(pts) < 2:
            raise InvalidPLMap("need at least two breakpoints")
        if pts[0][0] != 0 or pts[-1][0] != 1:
            raise InvalidPLMap("breakpoints must start at x=0 and end at x=1")
        for (a, _), (b, _) in zip(pts, pts[1:]):
            if not a < b:
                raise InvalidPLMap("x coordinates must be strictly increasing")
        if bounded:
            for _, y in pts:
                if y < 0 or y > 1:
                    raise InvalidPLMap(f"value {y} outside [0, 1]")
        xs, ys = _canonical(pts)
        self.xs = xs
        self.ys = ys
        self.bounded = bounded

    @classmethod
    def _raw(cls, xs, ys, bounded=True):
        obj = object.__new__(cls)
        obj.xs, obj.ys = _canonical(list(zip(xs, ys)))
        obj.bounded = bounded
        return obj

    @property
    def points(self):
        return list(zip(self.xs, self.ys))

    def __call__(self, x):
        xs = self.xs
        k = bisect.bisect_right(xs, x) - 1
        if k >= len(xs) - 1:
            if x == xs[-1]:
                return self.ys[-1]
            raise DomainMismatch(f"{x} outside [0, 1]")
        if k < 0:
            raise DomainMismatch(f"{x} outside [0, 1]")
        x0, x1 = xs[k], xs[k + 1]
        if x == x0:
            return self.ys[k]
        y0, y1 = self.ys[k], self.ys[k + 1]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def __eq__(self, other):
        if not isinstance(other, PLMap):
            return NotImplemented
        return self.xs == other.xs and self.ys == other.ys

    def __hash__(self):
        return hash((self.xs, self.ys))

    def __repr__(self):
        pts = ", ".join(f"({fmt(x)}, {fmt(y)})" for x, y in self.points[:8])
        more = ", ..." if len(self.xs) > 8 else ""
        return f"PLMap([{pts}{more}])"

    @property
    def surjective(self):
        return min(self.ys) == 0 and max(self.ys) == 1

    def to_csv(self):
        return "".join(f"{fmt(x)},{fmt(y)}\n" for x, y in self.points)

    @classmethod
    def from_csv(cls, text, bounded=True):
        pts = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            a, b = line.split(",")
            pts.append((rational(a), rational(b)))
        return cls(pts, bounded=bounded)

    def to_json(self):
        return {"breakpoints": [[fmt(x), fmt(y)] for x, y in self.points]}

    @classmethod
    def from_json(cls, obj, bounded=True):
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls([(rational(x), rational(y)) for x, y in obj["breakpoints"]], bounded=bounded)


def _canonical(pts):
    xs = [pts[0][0]]
    ys = [pts[0][1]]
    for x, y in pts[1:]:
        if len(xs) >= 2:
            # drop the previous point if it lies on the segment to the new one
            x0, y0, x1, y1 = xs[-2], ys[-2], xs[-1], ys[-1]
            if (y1 - y0) * (x - x0) == (y - y0) * (x1 - x0):
                xs[-1] = x
                ys[-1] = y
                continue
        xs.append(x)
        ys.append(y)
    return tuple(xs), tuple(ys)


def pl_identity():
    return PLMap([(0, 0), (1, 1)])


def pl_constant(c):
    return PLMap([(0, c), (1, c)])


def tent():
    return PLMap([(0, 0), (Fraction(1, 2), 1), (1, 0)])


def compose_pl(outer, inner):
    """Exact outer o inner; breakpoints at inner breakpoints and at inner-preimages
    of outer breakpoints."""
    oxs = outer.xs
    lo_bound, hi_bound = oxs[0], oxs[-1]
    out_x = []
    ixs, iys = inner.xs, inner.ys
    for k in range(len(ixs) - 1):
        x0, x1, y0, y1 = ixs[k], ixs[k + 1], iys[k], iys[k + 1]
        if y0 < lo_bound or y0 > hi_bound or y1 < lo_bound or y1 > hi_bound:
            raise DomainMismatch("inner map leaves the domain of the outer map")
        out_x.append(x0)
        if y0 != y1:
            lo, hi = (y0, y1) if y0 < y1 else (y1, y0)
            a = bisect.bisect_right(oxs, lo)
            b = bisect.bisect_left(oxs, hi)
            cuts = oxs[a:b]
            if y0 > y1:
                cuts = cuts[::-1]
            slope = (x1 - x0) / (y1 - y0)
            out_x.extend(x0 + (t - y0) * slope for t in cuts)
    out_x.append(ixs[-1])
    out_y = [outer(inner(x)) for x in out_x]
    return PLMap._raw(out_x, out_y, bounded=outer.bounded)


def _merged_xs(f, g):
    return sorted(set(f.xs) | set(g.xs))


def sup_dist(f, g):
    """Exact sup |f - g|; f - g is PL so the sup sits at a merged breakpoint."""
    return max(abs(f(x) - g(x)) for x in _merged_xs(f, g))


def sup_dist_witness(f, g):
    best = (Fraction(-1), None)
    for x in _merged_xs(f, g):
        d = abs(f(x) - g(x))
        if d > best[0]:
            best = (d, x)
    return best


@dataclass(frozen=True)
class Modulus:
    """Exact Lipschitz modulus. delta(eps) = eps / L, capped at 1."""

    lipschitz: Fraction

    def delta(self, eps):
        eps = rational(eps)
        if self.lipschitz == 0:
            return ONE
        return min(ONE, eps / self.lipschitz)

    def witnesses(self, eps, delta):
        """True iff |x - y| < delta forces |f(x) - f(y)| < eps."""
        return rational(delta) * self.lipschitz <= rational(eps)


def modulus(f):
    L = ZERO
    for k in range(len(f.xs) - 1):
        s = abs((f.ys[k + 1] - f.ys[k]) / (f.xs[k + 1] - f.xs[k]))
        if s > L:
            L = s
    return Modulus(L)


# ---------------------------------------------------------------------------
# realization

def realize(s):
    """Geometric realization: breakpoints i/m -> s(i)/n."""
    if s.lazy:
        return LazyRealization(s)
    m, n = s.m, s.codomain_size
    if n == 0:
        return pl_constant(0)
    if m == 0:
        raise DegenerateCodomain("a one-vertex domain realizes as a point, not on [0, 1]",
                                 value=s.at(0))
    vals = s.tolist()
    return PLMap._raw([Fraction(i, m) for i in range(m + 1)],
                      [Fraction(v, n) for v in vals])


class LazyRealization:
    """Realization of a (possibly lazy) simplicial map, evaluated pointwise."""

    def __init__(self, s):
        if s.codomain_size == 0 or s.m == 0:
            raise DegenerateCodomain("lazy realization needs m, n >= 1")
        self.s = s

    def __call__(self, x):
        s = self.s
        t = Fraction(x) * s.m
        i = t.numerator // t.denominator
        if i >= s.m:
            return Fraction(s.at(s.m), s.codomain_size)
        frac_part = t - i
        a = s.at(i)
        if frac_part == 0:
            return Fraction(a, s.codomain_size)
        b = s.at(i + 1)
        return (a + (b - a) * frac_part) / s.codomain_size

    @property
    def lipschitz(self):
        # slopes are multiples of m/n; canonical inputs have no stutters
        return Fraction(self.s.m, self.s.codomain_size)


# ---------------------------------------------------------------------------
# SVG

def simplicial_to_svg(s, title=None, stroke="black"):
    """SVG polyline through (i, s(i)) in grid coordinates."""
    pts = " ".join(f"{i},{v}" for i, v in enumerate(s.tolist()))
    m, n = max(s.m, 1), max(s.codomain_size, 1)
    head = f"<title>{title}</title>" if title else ""
    return (f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1 -1 {m + 2} {n + 2}" '
            f'width="{20 * (m + 2)}" height="{20 * (n + 2)}">{head}'
            f'<g transform="translate(0,{n}) scale(1,-1)">'
            f'<polyline fill="none" stroke="{stroke}" stroke-width="0.1" points="{pts}"/>'
            f"</g></svg>\n")


def pl_to_svg(f, stroke="black"):
    """SVG polyline for a PL map, in integer coordinates over the common
    denominator grid when it is small, else in unit coordinates."""
    den = 1
    for q in f.xs + f.ys:
        den = lcm(den, q.denominator)
    if den <= 10 ** 6:
        pts = " ".join(f"{int(x * den)},{int(y * den)}" for x, y in f.points)
        size = den
    else:
        pts = " ".join(f"{float(x)!r},{float(y)!r}" for x, y in f.points)
        size = 1
    return (f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size} {size}">'
            f'<g transform="translate(0,{size}) scale(1,-1)">'
            f'<polyline fill="none" stroke="{stroke}" points="{pts}"/></g></svg>\n')


def parse_svg_polyline(text):
    """Points of the first polyline in an SVG document, as integer pairs."""
    import re
    m = re.search(r'points="([^"]*)"', text)
    if not m:
        raise ParseError("no polyline in SVG")
    out = []
    for tok in m.group(1).split():
        a, b = tok.split(",")
        out.append((int(a), int(b)))
    return out
