"""Factorization algorithms for crooked interval maps.

Every public routine verifies its own output before returning it: exact
composition equality for simplicial results, exact rational distance (or an
exact rational upper bound built from exactly computed pieces) for PL results.
Maps that would exceed the materialization bound stay lazy.
"""
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor

import numpy as np

from . import crooked as ck
from . import interval as iv
from .errors import (CertificateTooWeak, EpsilonTooSmall, NotCrooked,
                     NotSurjective, PreconditionViolated)

MEMORY_BOUND = ck.MEMORY_BOUND
EXACT_CHECK_LIMIT = 20000     # vertex count up to which PL results are checked by full composition
SPOT_CHECKS = 200
LAZY_ABOVE = 10 ** 5          # intermediate factors above this size stay lazy


# ---------------------------------------------------------------------------
# cofactor: s o s' = c_n

def _check_cofactor_input(s):
    n, m = s.codomain_size, s.m
    if s.at(0) != 0 or s.at(m) != n:
        raise PreconditionViolated("need s(0) = 0 and s(m) = n",
                                   endpoints=[s.at(0), s.at(m)])
    seen = {}
    for b in s.breakpoints:
        v = s.at(b)
        if v in seen:
            raise PreconditionViolated(f"break-points {seen[v]} and {b} both map to {v}",
                                       pair=[seen[v], b])
        seen[v] = b


class _CofactorTree:
    """Block decomposition of s along the recursion of c_n.

    A view (lo, hi, rev, shift, k) is the restriction of s to [lo, hi], read
    backwards when rev, minus shift, into I_k. Its cofactor sends I_crn(k) to
    absolute indices of s.
    """

    def __init__(self, values):
        self.v = np.asarray(values, dtype=np.int64)
        self._parts = {}
        self._arrays = {}

    def local(self, view):
        lo, hi, rev, shift, _ = view
        seg = self.v[lo:hi + 1]
        if rev:
            seg = seg[::-1]
        return seg - shift

    @staticmethod
    def absolute(view, k):
        lo, hi, rev, _, _ = view
        return hi - k if rev else lo + k

    def parts(self, view):
        got = self._parts.get(view)
        if got is not None:
            return got
        lo, hi, rev, shift, k = view
        seg = self.local(view)
        L = len(seg) - 1
        tops = [int(t) for t in np.nonzero(seg == k - 1)[0] if t != L - 1]
        b1 = tops[0] if tops else L - 1
        ones = [int(t) for t in np.nonzero(seg == 1)[0] if t != 1]
        b2 = ones[0] if ones else 1

        def sub(x1, x2, backward, dshift, dk):
            if rev:
                return (hi - x2, hi - x1, not backward, shift + dshift, k - dk)
            return (lo + x1, lo + x2, backward, shift + dshift, k - dk)

        got = (sub(0, b1, False, 0, 1),
               sub(min(b1, b2), max(b1, b2), b2 > b1, 1, 2),
               sub(b2, L, False, 1, 1))
        self._parts[view] = got
        return got

    def array(self, view):
        got = self._arrays.get(view)
        if got is not None:
            return got
        k = view[4]
        if k <= 1:
            got = np.array([self.absolute(view, t) for t in range(k + 1)], dtype=np.int64)
        else:
            a, b, c = (self.array(p) for p in self.parts(view))
            got = np.concatenate([a, b[::-1][1:], c[1:]])
        self._arrays[view] = got
        return got

    def at(self, view, i):
        while view[4] > 1:
            k = view[4]
            head, mid = ck.crn(k - 1), ck.crn(k - 2)
            a, b, c = self.parts(view)
            if i <= head:
                view = a
            elif i <= head + mid:
                view, i = b, mid - (i - head)
            else:
                view, i = c, i - head - mid
        return self.absolute(view, i)


class LazyCofactor(iv.LazyMap):
    def __init__(self, tree, view, m):
        self.tree = tree
        self.view = view
        self.m = ck.crn(view[4])
        self.codomain_size = m

    def at(self, i):
        return self.tree.at(self.view, i)


def cofactor_to_canonical(s, bound=MEMORY_BOUND):
    """s' with s o s' = c_n, for s with s(0)=0, s(m)=n and injective on break-points."""
    if s.lazy:
        s = s.materialize(bound)
    _check_cofactor_input(s)
    n, m = s.codomain_size, s.m
    tree = _CofactorTree(s.values)
    root = (0, m, False, 0, n)
    if ck.crn(n) + 1 <= bound:
        out = iv.SimplicialMap(m, tree.array(root))
        if iv.compose(s, out) != ck.canonical_crooked(n):
            raise AssertionError("cofactor failed verification")
        return out
    out = LazyCofactor(tree, root, m)
    _spot_check(lambda i: s.at(out.at(i)), lambda i: ck.eval_point(n, i), out.m)
    return out


def _spot_check(lhs, rhs, m, count=SPOT_CHECKS, seed=0):
    rng = random.Random(seed)
    idx = {0, m} | {rng.randint(0, m) for _ in range(count)}
    for i in sorted(idx):
        if lhs(i) != rhs(i):
            raise AssertionError(f"identity fails at index {i}")
    return len(idx)


# ---------------------------------------------------------------------------
# factor through the canonical map: s = c_n o s'

def factor_through_canonical(s, check=True):
    """s' with c_n o s' = s for a crooked simplicial surjection s."""
    if not s.surjective:
        raise PreconditionViolated("s must be surjective")
    if check:
        chk = ck.is_crooked(s)
        if not chk.crooked:
            raise NotCrooked("s is not crooked", pair=list(chk.pair))
    n = s.codomain_size
    vals = _ftc(np.asarray(s.values, dtype=np.int64), n)
    out = iv.build_simplicial(ck.crn(n), vals)
    if iv.compose(ck.canonical_crooked(n), out) != s:
        raise AssertionError("factorization failed verification")
    return out


def _join(pieces):
    return np.concatenate([pieces[0]] + [p[1:] for p in pieces[1:]])


def _ftc(v, n):
    if n == 0:
        return np.zeros(len(v), dtype=np.int64)
    if n == 1:
        return v.copy()
    ext = np.nonzero((v == 0) | (v == n))[0]
    sweeps = np.nonzero(v[ext][1:] != v[ext][:-1])[0]
    pieces = []
    first = ext[sweeps[0]]
    if first > 0:
        pieces.append(_connector(v[:first + 1], n))
    for idx, k in enumerate(sweeps):
        a, b = ext[k], ext[k + 1]
        pieces.append(_sweep(v[a:b + 1], n))
        if idx + 1 < len(sweeps):
            nxt = ext[sweeps[idx + 1]]
            if nxt > b:
                pieces.append(_connector(v[b:nxt + 1], n))
    last = ext[sweeps[-1] + 1]
    if last < len(v) - 1:
        pieces.append(_connector(v[last:], n))
    return _join(pieces)


def _connector(w, n):
    # w touches only one of the extremes 0, n
    if w.max() < n:
        return _ftc(w, int(w.max()))
    low = int(w.min())
    k = n - low
    return _ftc(w - low, k) + (ck.crn(n) - ck.crn(k))


def _sweep(w, n):
    if w[0] == n:
        return _sweep_up(w[::-1].copy(), n)[::-1].copy()
    return _sweep_up(w, n)


def _sweep_up(w, n):
    # unique minimum 0 at the start, unique maximum n at the end
    b1 = int(np.nonzero(w == n - 1)[0][0])
    b2 = int(np.nonzero(w == 1)[0][-1])
    if b1 > b2:
        raise NotCrooked("sweep is not crooked", pair=[b2, b1])
    head, mid = ck.crn(n - 1), ck.crn(n - 2)
    s0 = _ftc(w[:b1 + 1], n - 1)
    s1 = _ftc(w[b1:b2 + 1] - 1, n - 2)
    s2 = _ftc(w[b2:] - 1, n - 1)
    return _join([s0, head + (mid - s1), (ck.crn(n) - head) + s2])


# ---------------------------------------------------------------------------
# q o c_N for the rounding map q: I_N -> I_n, factored lazily

def rounding(N, n):
    """Monotone simplicial surjection I_N -> I_n, k -> floor(k n / N + 1/2)."""
    if not 0 <= n <= N:
        raise PreconditionViolated("rounding needs 0 <= n <= N", N=N, n=n)
    return iv.SimplicialMap(n, [(2 * k * n + N) // (2 * N) for k in range(N + 1)])


class RoundedCanonicalFactor(iv.LazyMap):
    """s' with c_n o s' = q o c_N for monotone q: I_N -> I_n with unit steps.

    The domain splits along the three blocks of c_N; each block of q o c_N is
    again a monotone image of a smaller canonical map, embedded into c_n at
    offset 0, at the middle block (reversed), or at the last block.
    """

    def __init__(self, q, N=None, start=0):
        self.q = q
        self.start = start
        self.N = q.m if N is None else N
        self.m = ck.crn(self.N)
        self.codomain_size = ck.crn(self._level(self.N))
        self._memo = {}

    def _level(self, k):
        return self.q.at(self.start + k) - self.q.at(self.start)

    def _plan(self, a, M):
        key = (a, M)
        got = self._memo.get(key)
        if got is not None:
            return got
        q = self.q
        base = q.at(a)
        n = q.at(a + M) - base
        lo_step = q.at(a + 1) - base
        top = q.at(a + M - 1) - base == n
        P, head = ck.crn(n), ck.crn(n - 1) if n >= 1 else 0
        mid = ck.crn(n - 2) if n >= 2 else 0
        # (child key, value offset, value sign) per block
        first = ((a, M - 1), 0, 1)
        if lo_step == 0:
            middle = ((a + 1, M - 2), 0, 1)
            last = ((a + 1, M - 1), 0, 1)
        else:
            middle = ((a + 1, M - 2), head + mid, -1) if not top else ((a + 1, M - 2), P - head, 1)
            last = ((a + 1, M - 1), P - head, 1)
        got = (n, first, middle, last)
        self._memo[key] = got
        return got

    def at(self, i):
        a, M = self.start, self.N
        off, sign = 0, 1
        while True:
            n = self.q.at(a + M) - self.q.at(a)
            if n == 0:
                return off
            if n == 1:
                val = self.q.at(a + ck.eval_point(M, i)) - self.q.at(a)
                return off + sign * val
            if n == M:
                return off + sign * i
            _, first, middle, last = self._plan(a, M)
            head, mid = ck.crn(M - 1), ck.crn(M - 2)
            if i <= head:
                (a, M), o, sg = first
            elif i <= head + mid:
                (a, M), o, sg = middle
                i = mid - (i - head)
            else:
                (a, M), o, sg = last
                i -= head + mid
            off, sign = off + sign * o, sign * sg


def factor_rounded_canonical(N, n, q=None):
    q = rounding(N, n) if q is None else q
    return RoundedCanonicalFactor(q)


# ---------------------------------------------------------------------------
# simplicial approximation

def _grid_values(f, m):
    return [f(Fraction(k, m)) for k in range(m + 1)]


def _cell_ranges(f, m, vals):
    lo = [min(vals[k], vals[k + 1]) for k in range(m)]
    hi = [max(vals[k], vals[k + 1]) for k in range(m)]
    for x, y in zip(f.xs, f.ys):
        k = floor(x * m)
        if 0 < x < 1 and x * m != k:
            lo[k] = min(lo[k], y)
            hi[k] = max(hi[k], y)
    return lo, hi


def simplicial_approximate(f, n, eps, m=None):
    """Simplicial s: I_m -> I_n with sup|realize(s) - f| < eps (exact).

    Works at eps_w = min(eps, 1/n) so that allowed levels of touching cells are
    adjacent. Each vertex takes a level allowed for both adjacent cells; ties go
    to the level nearest to f at the vertex, then the previous vertex's level,
    then the lower level.
    """
    eps = iv.rational(eps)
    if n < 1 or eps <= Fraction(1, 2 * n):
        raise EpsilonTooSmall(f"need eps > 1/(2n) = {Fraction(1, 2 * max(n, 1))}",
                              epsilon=eps, n=n)
    ew = min(eps, Fraction(1, n))
    slack = 2 * ew - Fraction(1, n)
    L = iv.modulus(f).lipschitz
    if m is None:
        m = max(1, floor(2 * L / slack) + 1)
    while True:
        s = _approx_on_grid(f, n, ew, m)
        if s is not None:
            break
        m *= 2
    if not iv.sup_dist(iv.realize(s), f) < eps:
        raise AssertionError("simplicial approximation failed verification")
    return s


def _approx_on_grid(f, n, ew, m):
    vals = _grid_values(f, m)
    lo, hi = _cell_ranges(f, m, vals)
    allowed = []
    for k in range(m):
        a = max(0, floor(n * (hi[k] - ew)) + 1)
        b = min(n, ceil(n * (lo[k] + ew)) - 1)
        allowed.append((a, b))
    out = []
    prev = None
    for k in range(m + 1):
        cells = [c for c in (k - 1, k) if 0 <= c < m]
        a = max(allowed[c][0] for c in cells)
        b = min(allowed[c][1] for c in cells)
        if a > b:
            return None
        target = n * vals[k]
        cands = sorted(range(max(a, floor(target)), min(b, ceil(target)) + 1)) or [a if target < a else b]
        cands.sort(key=lambda j: (abs(j - target), j != prev, j))
        prev = cands[0]
        out.append(prev)
    return iv.build_simplicial(n, out)


def approximate_realization(t, n):
    """q o t for the rounding q: I_N -> I_n; within 1/(2n) of realize(t)."""
    q = rounding(t.codomain_size, n)
    return iv.compose(q, t), q


def rounding_distance(q):
    N, n = q.m, q.codomain_size
    return max(abs(Fraction(k, N) - Fraction(q.at(k), n)) for k in range(N + 1))


# ---------------------------------------------------------------------------
# composition chains of PL and lazy maps

class Chain:
    """Composite factors[0] o factors[1] o ...; evaluated right to left."""

    def __init__(self, factors):
        flat = []
        for f in factors:
            flat.extend(f.factors if isinstance(f, Chain) else [f])
        self.factors = flat

    def __call__(self, x):
        for f in reversed(self.factors):
            x = f(x)
        return x

    def exact(self, limit=EXACT_CHECK_LIMIT):
        """The composite as a PLMap when every factor is small enough, else None."""
        out = None
        for f in reversed(self.factors):
            if isinstance(f, iv.LazyRealization):
                if f.s.m + 1 > limit:
                    return None
                f = iv.realize(f.s.materialize())
            if len(f.xs) > limit:
                return None
            out = f if out is None else iv.compose_pl(f, out)
        return out

    def __repr__(self):
        return "Chain(" + " o ".join(type(f).__name__ for f in self.factors) + ")"


def realize_any(s):
    return iv.LazyRealization(s) if s.lazy else iv.realize(s)


# ---------------------------------------------------------------------------
# crooked approximation: g o g' close to realize(c_n)

def _endpoint_fixers(g):
    p0 = next(x for x, y in g.points if y == 0)
    p1 = next(x for x, y in g.points if y == 1)
    out = []
    for path in ([p0, 0, 1, p1], [p0, 1, 0, p1]):
        ys = [path[0]]
        for y in path[1:]:
            if y != ys[-1]:
                ys.append(y)
        k = len(ys) - 1
        out.append(iv.PLMap([(Fraction(i, k), y) for i, y in enumerate(ys)]))
    return out


def _turning_indices(ys):
    """Indices of ys (plateaus collapsed to their first point) where direction changes."""
    keep = [0]
    for i in range(1, len(ys)):
        if ys[i] != ys[keep[-1]]:
            keep.append(i)
    turns = [keep[0]]
    for a, b, c in zip(keep, keep[1:], keep[2:]):
        if (ys[b] - ys[a]) * (ys[c] - ys[b]) < 0:
            turns.append(b)
    if keep[-1] != turns[-1]:
        turns.append(keep[-1])
    return turns


def snap(G0, n):
    """Grid-snapped PL map h close to G0, or None if n is too coarse.

    Turning values go to pairwise distinct levels (0 and n only at the ends) in
    the same order as the true values; between turns h passes through G0's
    crossings of the intermediate levels.
    """
    xs, ys = G0.xs, G0.ys
    turns = _turning_indices(ys)
    if len(turns) < 2 or ys[turns[0]] != 0 or ys[turns[-1]] != 1:
        return None
    inner = turns[1:-1]
    levels = {turns[0]: 0, turns[-1]: n}
    order = sorted(inner, key=lambda t: (ys[t], t))
    want = [min(n - 1, max(1, round(n * ys[i]))) for i in order]
    # distinct and order preserving: push up, then push down from the top
    for k in range(1, len(want)):
        want[k] = max(want[k], want[k - 1] + 1)
    for k in range(len(want) - 1, -1, -1):
        cap = n - 1 if k == len(want) - 1 else want[k + 1] - 1
        want[k] = min(want[k], cap)
    if want and want[0] < 1:
        return None
    levels.update(zip(order, want))
    pts = []
    for t, u in zip(turns, turns[1:]):
        pts.append((xs[t], Fraction(levels[t], n)))
        ja, jb = levels[t], levels[u]
        step = 1 if jb > ja else -1
        seg_x = xs[t:u + 1]
        seg_y = ys[t:u + 1]
        end = xs[u] if u != turns[-1] else Fraction(1)
        for j in range(ja + step, jb, step):
            x = _crossing(seg_x, seg_y, Fraction(j, n), step)
            if x is not None and pts[-1][0] < x < end:
                pts.append((x, Fraction(j, n)))
    # a final plateau at 1 is absorbed into the last segment
    pts.append((Fraction(1), Fraction(1)))
    return iv.PLMap(pts)


def _crossing(xs, ys, level, step):
    # first x on a weakly monotone piece where the value reaches level
    for k in range(len(xs) - 1):
        y0, y1 = ys[k], ys[k + 1]
        if (step > 0 and y0 <= level <= y1) or (step < 0 and y1 <= level <= y0):
            if y0 == y1:
                return xs[k]
            return xs[k] + (level - y0) * (xs[k + 1] - xs[k]) / (y1 - y0)
    return None


@dataclass
class CrookedApproximation:
    n: int
    g_prime: Chain
    eta: Fraction
    g0_prime: iv.PLMap
    h_prime: iv.PLMap
    h_snap: iv.PLMap
    s: iv.SimplicialMap
    cofactor: object
    verification: dict = field(default_factory=dict)


def _snap_data(G0, n):
    h = snap(G0, n)
    if h is None:
        return None
    levels = [int(y * n) for y in h.ys]
    # rescale so that h o h' is the realization of a unit-step simplicial map
    marks = [0]
    for a, b in zip(levels, levels[1:]):
        marks.append(marks[-1] + abs(b - a))
    m = marks[-1]
    h_prime = iv.PLMap([(Fraction(k, m), x) for k, x in zip(marks, h.xs)])
    vals = []
    for a, b in zip(levels, levels[1:]):
        step = 1 if b > a else -1
        vals.extend(range(a, b, step))
    vals.append(levels[-1])
    s = iv.build_simplicial(n, vals)
    return h, h_prime, s, iv.sup_dist(h, G0)


def crooked_approximate(g, eps, n_min=1, n_max=100000, bound=MEMORY_BOUND, exact_limit=EXACT_CHECK_LIMIT):
    """(n, g') with sup|g o g' - realize(c_n)| < eps, for the least feasible n >= n_min."""
    eps = iv.rational(eps)
    if not g.surjective:
        raise NotSurjective("g must be surjective")
    fixers = sorted(_endpoint_fixers(g), key=lambda p: len(iv.compose_pl(g, p).xs))
    g0p = fixers[0]
    G0 = iv.compose_pl(g, g0p)
    n = max(1, n_min)
    while n <= n_max:
        data = _snap_data(G0, n)
        if data is not None and data[3] < eps:
            break
        n += 1
    else:
        raise PreconditionViolated("no grid found below n_max", n_max=n_max)
    h, h_prime, s, eta = data
    sc = cofactor_to_canonical(s, bound=min(bound, LAZY_ABOVE))
    g_prime = Chain([g0p, h_prime, realize_any(sc)])
    out = CrookedApproximation(n, g_prime, eta, g0p, h_prime, h, s, sc)
    out.verification = _verify_approximation(g, out, eps, exact_limit)
    return out


def _verify_approximation(g, ap, eps, exact_limit):
    rec = {"bound": ap.eta}
    # realize(c_n) = h o h' o realize(s''), so the distance is at most sup|h - G0|
    if ck.crn(ap.n) + 1 <= exact_limit:
        lhs = iv.compose_pl(g, ap.g_prime.exact(limit=exact_limit))
        d = iv.sup_dist(lhs, iv.realize(ck.canonical_crooked(ap.n)))
        rec["method"] = "exact"
        rec["distance"] = d
        if not (d <= ap.eta and d < eps):
            raise AssertionError("crooked approximation failed exact verification")
    else:
        rec["method"] = "bound"
        rec["spot_checks"] = _spot_check(lambda i: ap.s.at(ap.cofactor.at(i)),
                                         lambda i: ck.eval_point(ap.n, i), ck.crn(ap.n))
        if not ap.eta < eps:
            raise AssertionError("crooked approximation bound too weak")
    return rec


# ---------------------------------------------------------------------------
# the crookedness factorization pipeline

@dataclass
class Resolution:
    h: Chain
    s: object
    s_prime: object
    bound: Fraction
    distance: Fraction = None
    record: dict = field(default_factory=dict)


@dataclass
class FactorizationPlan:
    g: iv.PLMap
    epsilon: Fraction
    n: int
    delta: Fraction
    eps_prime: Fraction
    approximation: CrookedApproximation
    exact_limit: int = EXACT_CHECK_LIMIT

    def resolve(self, cert):
        return _resolve(self, cert)

    __call__ = resolve


def crooked_factorize(g, eps, exact_limit=EXACT_CHECK_LIMIT):
    """delta > 0 and a resolver: any delta-crooked f gives h with f close to g o h."""
    eps = iv.rational(eps)
    if eps <= 0:
        raise PreconditionViolated("eps must be positive")
    if not g.surjective:
        raise NotSurjective("g must be surjective")
    n0 = ceil(2 / eps)
    ap = crooked_approximate(g, eps / 2, n_min=n0, exact_limit=exact_limit)
    n = ap.n
    return FactorizationPlan(g, eps, n, Fraction(1, 4 * n), Fraction(5, 8 * n), ap, exact_limit)


def _resolve(plan, cert):
    if cert.epsilon > plan.delta:
        raise CertificateTooWeak(f"certificate {cert.epsilon} exceeds delta {plan.delta}",
                                 certificate=cert.epsilon, delta=plan.delta)
    n = plan.n
    ap = plan.approximation
    p = cert.provenance
    rec = {}
    if p.rule == "canonical":
        N = p.data["n"]
        q = rounding(N, n)
        d1 = rounding_distance(q)
        s = iv.compose(q, ck.CanonicalLazy(N))
        s_prime = RoundedCanonicalFactor(q)
        if s.m + 1 <= plan.exact_limit:
            s, s_prime = s.materialize(), s_prime.materialize()
            if iv.compose(ck.canonical_crooked(n), s_prime) != s:
                raise AssertionError("rounded factorization failed verification")
            rec["factor_check"] = "exact"
        else:
            rec["factor_check"] = _spot_check(lambda i: ck.eval_point(n, s_prime.at(i)), s.at, s.m, seed=1)
        rec["route"] = "rounded-canonical"
    elif p.rule == "combinatorial":
        t = p.data["avatar"]
        q = rounding(t.codomain_size, n)
        d1 = rounding_distance(q)
        s = iv.compose(q, t)
        s_prime = factor_through_canonical(s)
        rec["route"] = "rounded"
    else:
        f = cert.subject
        s = simplicial_approximate(f, n, plan.eps_prime)
        d1 = iv.sup_dist(f, iv.realize(s))
        s_prime = factor_through_canonical(s)
        rec["route"] = "grid"
    # f ~ realize(s) = realize(c_n) o realize(s') and g o h = (g o g') o realize(s')
    bound = d1 + ap.eta
    h = Chain([ap.g0_prime, ap.h_prime, realize_any(iv.compose(ap.cofactor, s_prime))])
    rec["d_f_s"] = d1
    rec["eta"] = ap.eta
    rec["sampled_max"] = _sampled_distance(cert.subject, plan.g, h, s.m)
    out = Resolution(h, s, s_prime, bound, record=rec)
    if not rec["sampled_max"] <= bound:
        raise AssertionError("sampled distance exceeds the bound")
    if not bound < plan.epsilon:
        raise AssertionError("factorization bound not below eps")
    if s.m + 1 <= plan.exact_limit and ck.crn(n) + 1 <= plan.exact_limit:
        hx = h.exact(limit=plan.exact_limit)
        if hx is not None and isinstance(cert.subject, iv.PLMap):
            out.distance = iv.sup_dist(cert.subject, iv.compose_pl(plan.g, hx))
            rec["distance_method"] = "composition"
    if out.distance is None and rec["route"] == "rounded-canonical":
        out.distance = rounded_canonical_distance(plan, p.data["n"])
        rec["distance_method"] = "block-recursion"
    if out.distance is not None and not (out.distance <= bound and out.distance < plan.epsilon):
        raise AssertionError("factorization failed exact verification")
    return out


def _cell_sup(P, k, k2, v, v2, N, K):
    """sup over a domain cell where the level runs k -> k2 (over N) and the
    argument of P runs v -> v2 (over K), both linearly."""
    ts = {Fraction(0), Fraction(1)}
    if v != v2:
        a, b = Fraction(min(v, v2), K), Fraction(max(v, v2), K)
        ts |= {(x - Fraction(v, K)) / Fraction(v2 - v, K) for x in P.xs if a < x < b}
    return max(abs(Fraction(k, N) + t * Fraction(k2 - k, N) - P(Fraction(v, K) + t * Fraction(v2 - v, K)))
               for t in ts)


def _type_bounds(P, qv, sv, N, K):
    """(lower, upper) for the sup from cell types alone.

    W runs from 0 to K with unit steps, so every edge (v, v+1) is crossed,
    and a crossing forces the level edge to be the jump of q between s(v)
    and s(v+1): those cells give the lower bound. Cells constant in W peak
    at a vertex (k, v) with q(k) = s(v); the largest such vertex error over
    all candidates gives the upper bound.
    """
    lo, hi = {}, {}
    for k, L in enumerate(qv):
        lo.setdefault(L, k)
        hi[L] = k
    best = Fraction(0)
    for v in range(K):
        L, L2 = sv[v], sv[v + 1]
        k, k2 = (hi[L], hi[L] + 1) if L2 == L + 1 else (lo[L], lo[L] - 1)
        best = max(best, _cell_sup(P, k, k2, v, v + 1, N, K))
    worst = max(abs(Fraction(k, N) - P(Fraction(v, K)))
                for v in range(K + 1) for k in range(lo[sv[v]], hi[sv[v]] + 1))
    return best, max(best, worst)


def rounded_canonical_distance(plan, N):
    """Exact sup|f - g o h| for f = realize(c_N) on the rounded-canonical route.

    With W = cofactor o s' and P = g o g0' o h', g o h = P o realize(W). On a
    domain cell c_N takes one unit step and W at most one, so the error on a
    cell is a function of (level edge, W edge). The domain of c_N splits into
    the three blocks of its recursion; s' follows the same blocks into the
    blocks of c_n, and the cofactor splits along those into its own views.
    The sup is therefore a max over a memoized recursion on (level block,
    cofactor view), which never touches the crn(N) cells one by one.
    """
    ap = plan.approximation
    n, s = plan.n, ap.s
    K = s.m
    q = rounding(N, n)
    qv, sv = q.tolist(), s.tolist()
    if any(b - a not in (0, 1) for a, b in zip(qv, qv[1:])) or any(abs(b - a) != 1 for a, b in zip(sv, sv[1:])):
        raise AssertionError("rounding or snapped map without unit steps")
    P = iv.compose_pl(plan.g, iv.compose_pl(ap.g0_prime, ap.h_prime))
    tree = _CofactorTree(s.values)
    sp = RoundedCanonicalFactor(q)
    memo = {}

    def vertex(c, v):
        return abs(Fraction(c, N) - P(Fraction(v, K)))

    def block(a, M, view):
        key = (a, M, view)
        got = memo.get(key)
        if got is not None:
            return got
        nb = qv[a + M] - qv[a]
        if view[4] != nb:
            raise AssertionError("cofactor view does not match the block level")
        if M == 0:
            got = Fraction(0)
        elif nb == 0:
            v = tree.at(view, 0)
            got = max(vertex(a, v), vertex(a + M, v))
        elif nb == 1:
            w = (tree.at(view, 0), tree.at(view, 1))
            got = max(_cell_sup(P, a + c, a + c + 1, w[qv[a + c] - qv[a]], w[qv[a + c + 1] - qv[a]], N, K)
                      for c in range(M))
        elif nb == M:
            cv = ck.canonical_crooked(M).tolist()
            w = tree.array(view)
            got = max(_cell_sup(P, a + cv[j], a + cv[j + 1], int(w[j]), int(w[j + 1]), N, K)
                      for j in range(len(cv) - 1))
        else:
            _, *children = sp._plan(a, M)
            parts = tree.parts(view)
            head, mid = ck.crn(nb - 1), ck.crn(nb - 2)
            got = Fraction(0)
            for (a2, M2), o, sg in children:
                nb2 = qv[a2 + M2] - qv[a2]
                if (o, sg) == (0, 1):
                    sub = view if nb2 == nb else parts[0]
                elif sg == -1:
                    sub = parts[1]
                else:
                    sub = parts[2]
                got = max(got, block(a2, M2, sub))
        memo[key] = got
        return got

    root = (0, K, False, 0, n)
    d = block(0, N, root)
    lower, upper = _type_bounds(P, qv, sv, N, K)
    if not lower <= d <= upper:
        raise AssertionError("block recursion disagrees with the cell-type bounds")
    return d


def _sampled_distance(f, g, h, m, count=SPOT_CHECKS, seed=2):
    """Exact |f - g o h| at the vertices i/m for random i (plus both ends)."""
    rng = random.Random(seed)
    idx = {0, m} | {rng.randint(0, m) for _ in range(count)}
    return max(abs(f(Fraction(i, m)) - g(h(Fraction(i, m)))) for i in idx)


# ---------------------------------------------------------------------------
# amalgamation in the interval category

@dataclass
class Amalgam:
    f_prime: object
    g_prime: object
    bound: Fraction
    distance: Fraction = None
    n: int = None


def amalgamate_interval(f, g, eps, exact_limit=EXACT_CHECK_LIMIT):
    """(f', g') with sup|f o f' - g o g'| < eps.

    Both sides are driven close to the same canonical crooked map, so the
    distance is at most the sum of the two snapping errors.
    """
    eps = iv.rational(eps)
    if not (f.surjective and g.surjective):
        raise NotSurjective("both maps must be surjective")
    if f == g:
        idm = iv.pl_identity()
        return Amalgam(idm, idm, Fraction(0), Fraction(0))
    n = 1
    while True:
        af = crooked_approximate(f, eps / 2, n_min=n, exact_limit=exact_limit)
        ag = crooked_approximate(g, eps / 2, n_min=af.n, exact_limit=exact_limit)
        if ag.n == af.n:
            break
        n = ag.n
    out = Amalgam(af.g_prime, ag.g_prime, af.eta + ag.eta, n=af.n)
    fx, gx = af.g_prime.exact(exact_limit), ag.g_prime.exact(exact_limit)
    if fx is not None and gx is not None:
        out.distance = iv.sup_dist(iv.compose_pl(f, fx), iv.compose_pl(g, gx))
        if not out.distance < eps:
            raise AssertionError("amalgam failed exact verification")
    elif not out.bound < eps:
        raise AssertionError("amalgam bound not below eps")
    return out
