"""Circle self-maps as exact PL lifts, measured in turns (circumference 1).

A ``CircleMap`` stores a lift L on [0, 1] with L(1) = L(0) + d for an integer
degree d; the circle map itself is L mod 1. Extending L to all of R by
L(x + k) = L(x) + k d is what makes composition work.
"""
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import interval as iv
from .crooked import canonical_crooked
from .errors import (DomainMismatch, GridTooCoarse, InvalidPLMap, NotCrooked,
                     PreconditionViolated, TooLarge)

HALF = Fraction(1, 2)


def _floor(q):
    return q.numerator // q.denominator


class CircleMap:
    """Circle map given by a lift; the lift is shifted so that L(0) lies in [0, 1)."""

    __slots__ = ("lift", "degree")

    def __init__(self, points):
        pts = [(iv.rational(x), iv.rational(y)) for x, y in points]
        if not pts:
            raise InvalidPLMap("empty lift")
        shift = _floor(pts[0][1])
        pts = [(x, y - shift) for x, y in pts]
        d = pts[-1][1] - pts[0][1]
        if d.denominator != 1:
            raise InvalidPLMap(f"lift offset {d} is not an integer")
        self.lift = iv.PLMap(pts, bounded=False)
        self.degree = int(d)

    @classmethod
    def from_lift(cls, f):
        return cls(f.points)

    def lift_at(self, x):
        """Extended lift on R."""
        x = iv.rational(x)
        k = _floor(x)
        return self.lift(x - k) + k * self.degree

    def __call__(self, x):
        y = self.lift_at(x)
        return y - _floor(y)

    @property
    def breakpoints(self):
        return self.lift.xs

    @property
    def surjective(self):
        if self.degree != 0:
            return True
        return max(self.lift.ys) - min(self.lift.ys) >= 1

    def __eq__(self, other):
        return isinstance(other, CircleMap) and self.lift == other.lift

    def __hash__(self):
        return hash(self.lift)

    def __repr__(self):
        return f"CircleMap(degree={self.degree}, {self.lift!r})"

    def to_json(self):
        return {"degree": self.degree, "lift": self.lift.to_json()["breakpoints"]}

    @classmethod
    def from_json(cls, obj):
        c = cls([(iv.rational(x), iv.rational(y)) for x, y in obj["lift"]])
        if "degree" in obj and int(obj["degree"]) != c.degree:
            raise InvalidPLMap("stated degree disagrees with the lift")
        return c

    def to_csv(self):
        return self.lift.to_csv()

    @classmethod
    def from_csv(cls, text):
        return cls.from_lift(iv.PLMap.from_csv(text, bounded=False))


def degree(c):
    return c.degree


def power_map(d):
    """z -> z^d."""
    return CircleMap([(0, 0), (1, d)])


def rotation(c, t):
    """c followed by rotation by t turns."""
    t = iv.rational(t)
    return CircleMap([(x, y + t) for x, y in c.lift.points])


def rogers_tent():
    return CircleMap([(0, 0), (HALF, 1), (1, 0)])


def compose_circle(outer, inner):
    """outer o inner, by composing the extended lifts."""
    if not isinstance(outer, CircleMap) or not isinstance(inner, CircleMap):
        raise DomainMismatch("compose_circle expects two CircleMaps")
    oxs = outer.lift.xs
    ixs, iys = inner.lift.xs, inner.lift.ys
    xs = []
    for k in range(len(ixs) - 1):
        x0, x1, y0, y1 = ixs[k], ixs[k + 1], iys[k], iys[k + 1]
        xs.append(x0)
        if y0 == y1:
            continue
        lo, hi = min(y0, y1), max(y0, y1)
        cuts = {b + shift for shift in range(_floor(lo), _floor(hi) + 1) for b in oxs}
        cuts = sorted((t for t in cuts if lo < t < hi), reverse=y0 > y1)
        slope = (x1 - x0) / (y1 - y0)
        xs.extend(x0 + (t - y0) * slope for t in cuts)
    xs.append(ixs[-1])
    return CircleMap([(x, outer.lift_at(inner.lift(x))) for x in xs])


def _circ(q):
    """Distance from q to the nearest integer."""
    r = q - _floor(q)
    return min(r, 1 - r)


def circle_dist(c1, c2):
    """Exact sup over the circle of the circular distance between c1 and c2."""
    xs = sorted(set(c1.lift.xs) | set(c2.lift.xs))
    deltas = [c1.lift(x) - c2.lift(x) for x in xs]
    best = max(_circ(d) for d in deltas)
    # the difference is linear between merged breakpoints: crossing a
    # half-integer there means the distance reaches 1/2
    for a, b in zip(deltas, deltas[1:]):
        lo, hi = min(a, b), max(a, b)
        h = _floor(lo - HALF) + 1  # least half-integer offset above lo - 1/2
        if lo <= h + HALF <= hi:
            return HALF
    return best


def close_degree_check(c1, c2):
    """Close maps (under 1/2 turn apart) must have equal degree."""
    d = circle_dist(c1, c2)
    degs = (c1.degree, c2.degree)
    close = d < HALF
    if close:
        assert degs[0] == degs[1], f"maps at distance {d} with degrees {degs}"
    return {"distance": d, "degrees": degs, "close": close}


# ---------------------------------------------------------------------------
# circular simplicial maps

class CircularSimplicialMap:
    """Map Z_m -> Z_n given by an integer lift u_0..u_m, u_m = u_0 + n * winding.

    Consecutive lift values differ by at most 1.
    """

    def __init__(self, n, lift):
        u = np.asarray([int(x) for x in lift], dtype=np.int64)
        if n < 1:
            raise PreconditionViolated("codomain order must be >= 1")
        if len(u) < 2:
            raise PreconditionViolated("need at least one domain vertex")
        if np.any(np.abs(np.diff(u)) > 1):
            raise PreconditionViolated("lift steps must be at most 1")
        w, r = divmod(int(u[-1] - u[0]), n)
        if r:
            raise PreconditionViolated("lift does not close up on Z_n")
        self.n = n
        self.u = u
        self.winding = w
        self.u.flags.writeable = False

    @property
    def m(self):
        return len(self.u) - 1

    @property
    def values(self):
        return (self.u[:-1] % self.n).tolist()

    def to_circle_map(self):
        m, n = self.m, self.n
        return CircleMap([(Fraction(i, m), Fraction(int(v), n)) for i, v in enumerate(self.u)])

    def to_json(self):
        return {"n": self.n, "lift": self.u.tolist(), "winding": self.winding}

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["n"]), obj["lift"])


def winding_map(m, n):
    """Discrete z -> z: v_i = floor(i n / m)."""
    return CircularSimplicialMap(n, [i * n // m for i in range(m + 1)])


@dataclass(frozen=True)
class CircularCheck:
    crooked: bool
    arc: tuple = None      # (i, length): the forward arc i -> i + length fails

    def __bool__(self):
        return self.crooked


def is_circularly_crooked(s):
    """Crookedness on every arc of the cyclic domain.

    For the forward arc from i to j = i + k (0 < k < m) there must be positions
    i <= j' <= i' <= j along the arc with v(j') adjacent to v(j) and v(i')
    adjacent to v(i). Both arcs between two vertices are covered because both
    orders of the pair are visited.
    """
    n, m = s.n, s.m
    v = np.asarray(s.values, dtype=np.int64)
    vv = np.concatenate([v, v])
    pos = np.arange(m)
    # nxt[b]: least position >= t whose value is within 1 of b (cyclically)
    nxt = np.full(n, 2 * m, dtype=np.int64)
    found = None
    for t in range(2 * m - 1, -1, -1):
        a = int(vv[t])
        for b in {(a - 1) % n, a, (a + 1) % n}:
            nxt[b] = t
        if t >= m:
            continue
        window = vv[t:t + m]
        first = nxt[window]
        d = np.abs(window - v[t]) % n
        close = np.minimum(d, n - d) <= 1
        last = np.maximum.accumulate(np.where(close, pos + t, -1))
        bad = np.nonzero(first[1:] > last[1:])[0]
        if len(bad):
            found = (t, int(bad[0]) + 1)
    if found is not None:
        return CircularCheck(False, found)
    return CircularCheck(True)


CIRCLE_DOMAIN_LIMIT = 60000


def _degree_one_lift(n, a):
    """Climb along c_{n+a}, then come back down a levels along a reversed c_a."""
    up = np.asarray(canonical_crooked(n + a).tolist(), dtype=np.int64)
    if a == 0:
        return up
    down = n + a - np.asarray(canonical_crooked(a).tolist(), dtype=np.int64)
    return np.concatenate([up, down[1:]])


def crooked_circle_map(n, d, zero_degree=False, limit=CIRCLE_DOMAIN_LIMIT):
    """Degree-d circle map whose avatar at order n is circularly crooked.

    The degree-1 lift overshoots: it climbs n + a levels along c_{n+a} and then
    descends a levels, with a = max(0, n - 4) raised until the checker accepts.
    Degree d precomposes with z -> z^d (the d-fold cyclic cover of the domain).
    ``zero_degree`` returns c_n followed by its reverse instead.
    Returns (CircleMap, CircularSimplicialMap, CircularCheck).
    """
    if n < 1:
        raise PreconditionViolated("n must be >= 1")
    if zero_degree:
        base = np.asarray(canonical_crooked(n).tolist(), dtype=np.int64)
        s = CircularSimplicialMap(n, np.concatenate([base, base[::-1][1:]]))
        chk = is_circularly_crooked(s)
        if not chk:
            raise NotCrooked("degree-0 pattern failed the circular check", arc=list(chk.arc))
        return s.to_circle_map(), s, chk
    if d == 0:
        raise PreconditionViolated("d must be nonzero (use zero_degree for degree 0)")
    a = max(0, n - 4)
    while True:
        base = _degree_one_lift(n, a)
        m = (len(base) - 1) * abs(d)
        if m > limit:
            raise TooLarge(f"circle domain {m} exceeds the limit {limit}", n=n, degree=d)
        sign = 1 if d > 0 else -1
        pieces = [sign * (base[:-1] + k * n) for k in range(abs(d))]
        s = CircularSimplicialMap(n, np.concatenate(pieces + [np.array([sign * abs(d) * n])]))
        chk = is_circularly_crooked(s)
        if chk:
            return s.to_circle_map(), s, chk
        a += 1


# ---------------------------------------------------------------------------
# Rogers witness geometry

def _near_set(grid, tau_units=1):
    """Grid points (a, b) with circular distance of f(a/grid), g(b/grid) below
    1/2 - tau, f = z^2 and g the Rogers tent; everything in units of 1/grid."""
    G = grid
    a = np.arange(G)
    b = np.arange(G)
    fa = (2 * a) % G
    gb = np.where(2 * b <= G, 2 * b, 2 * G - 2 * b) % G
    diff = np.abs(fa[:, None] - gb[None, :]) % G
    dist = np.minimum(diff, G - diff)
    # dist / G < 1/2 - tau  <=>  2 dist < G - 2 tau_units
    return 2 * dist < G - 2 * tau_units, dist


def _torus_components(mask, diagonal=False):
    """Connected components of mask on the torus (4-connected unless diagonal)."""
    from scipy import ndimage
    structure = np.ones((3, 3), dtype=int) if diagonal else None
    lab, k = ndimage.label(mask, structure=structure)
    parent = list(range(k + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def glue(r1, r2):
        both = (r1 > 0) & (r2 > 0)
        for p, q in set(zip(r1[both].tolist(), r2[both].tolist())):
            a, b = find(p), find(q)
            if a != b:
                parent[a] = b

    glue(lab[0, :], lab[-1, :])
    glue(lab[:, 0], lab[:, -1])
    if diagonal:
        glue(lab[0, 1:], lab[-1, :-1])
        glue(lab[0, :-1], lab[-1, 1:])
        glue(lab[1:, 0], lab[:-1, -1])
        glue(lab[:-1, 0], lab[1:, -1])
        glue(lab[:1, :1].ravel(), lab[-1:, -1:].ravel())
        glue(lab[:1, -1:].ravel(), lab[-1:, :1].ravel())
    roots = {}
    remap = np.zeros(k + 1, dtype=np.int64)
    for x in range(1, k + 1):
        r = find(x)
        remap[x] = roots.setdefault(r, len(roots) + 1)
    return remap[lab], len(roots)


def _longest_gap(covered):
    """Longest cyclic run of False in a boolean array; (start, length)."""
    G = len(covered)
    if covered.all():
        return None
    if not covered.any():
        return (0, G)
    start = int(np.argmax(covered))          # rotate so that index 0 is covered
    rolled = np.roll(covered, -start)
    best, run, run_start = (0, 0), 0, 0
    for i, c in enumerate(rolled.tolist() + [True]):
        if not c:
            if run == 0:
                run_start = i
            run += 1
        else:
            if run > best[1]:
                best = (run_start, run)
            run = 0
    return ((best[0] + start) % G, best[1])


def _report(lab, k, grid):
    comps = []
    for c in range(1, k + 1):
        pts = lab == c
        entry = {"size": int(pts.sum())}
        for axis, name in ((0, "first"), (1, "second")):
            covered = pts.any(axis=1 - axis)
            gap = _longest_gap(covered)
            if gap is None:
                entry[name] = {"covers": True, "missed": None}
            else:
                entry[name] = {"covers": False,
                               "missed": {"start": Fraction(gap[0], grid),
                                          "length": Fraction(gap[1], grid)}}
        comps.append(entry)
    return comps


def rogers_witness_check(grid, check_stability=True):
    """Components of the near-commuting set for f = z^2, g = tent on a grid.

    Point (a, b) stands for (x, y) = (a/grid, b/grid); it is in the set when
    f(x) and g(y) are less than 1/2 - 1/grid apart on the circle. For each
    component the report lists, per projection, whether it covers the circle
    and the longest missed arc.
    """
    if grid < 64:
        raise PreconditionViolated("grid must be at least 64")
    mask, dist = _near_set(grid)
    lab, k = _torus_components(mask)
    out = {"grid": grid, "tau": Fraction(1, grid), "components": k,
           "per_component": _report(lab, k, grid)}
    exact = dist == 0
    elab, ek = _torus_components(exact, diagonal=True)
    out["exact"] = {"components": ek, "per_component": _report(elab, ek, grid)}
    if check_stability:
        mask2, _ = _near_set(2 * grid)
        _, k2 = _torus_components(mask2)
        out["refined_components"] = k2
        if k2 != k:
            raise GridTooCoarse("component count changes under refinement",
                                grid=grid, components=k, refined=k2)
    return out
