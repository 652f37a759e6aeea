"""Acceptance suite: one PASS/FAIL line per criterion, printed in the summary."""
import math
import random
import time
from contextlib import contextmanager
from fractions import Fraction as F

from pseudoarc import circle as cm
from pseudoarc import crooked as ck
from pseudoarc import factor as fc
from pseudoarc import game as gm
from pseudoarc import interval as iv
from pseudoarc import supernatural as sn

from .conftest import ACCEPTANCE
from .helpers import (canonical_oracle, crooked_oracle, pell_oracle, random_breakpoint_injective,
                      random_pl_surjection, random_surjection, random_walk_map)

C5 = [0, 1, 2, 1, 2, 3, 2, 1, 2, 3, 2, 3, 4, 3, 2, 3, 2, 1, 2, 3, 2, 3, 4, 3, 2, 3, 4, 3, 4, 5]


@contextmanager
def criterion(num, title, budget=None):
    info = {}
    t0 = time.perf_counter()
    try:
        yield info
        dt = time.perf_counter() - t0
        if budget is not None:
            assert dt < budget, f"took {dt:.2f}s, budget {budget}s"
    except BaseException as exc:
        dt = time.perf_counter() - t0
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        line = f"criterion {num}: FAIL  {title} ({dt:.2f}s) {msg[:160]}"
        ACCEPTANCE.append(line)
        print(line)
        raise
    note = " ".join(f"{k}={v}" for k, v in info.items())
    line = f"criterion {num}: PASS  {title} ({dt:.2f}s) {note}".rstrip()
    ACCEPTANCE.append(line)
    print(line)


def compose_lists(outer, inner):
    return [outer[v] for v in inner]


# 1 -------------------------------------------------------------------------

def test_c5_sequence():
    with criterion(1, "c_5 sequence"):
        assert ck.canonical_crooked(5).tolist() == C5
        best = math.inf
        for _ in range(5):
            t = time.perf_counter()
            ck.canonical_crooked(5)
            best = min(best, time.perf_counter() - t)
        assert best < 1e-3, f"best of 5 took {best * 1e3:.3f} ms"


# 2 -------------------------------------------------------------------------

def test_pell_chain_and_lewis_minc():
    with criterion(2, "crn and Lewis-Minc orders", budget=0.01) as info:
        assert [ck.crn(n) for n in range(6)] == [0, 1, 2, 5, 12, 29]
        assert ck.crn(5) + 1 == len(C5)
        m = [1]
        for _ in range(3):
            m.append(ck.crn(2 * m[-1]))
        assert m == [1, 2, 12, 543339720]
        assert m == [1] + [pell_oracle(2 * x) for x in m[:-1]]
        info["m"] = m


# 3 -------------------------------------------------------------------------

def _agree(s):
    got = ck.is_crooked(s)
    bad = crooked_oracle(s.tolist())
    return got.crooked == (bad is None) and (bad is None or tuple(got.pair) == bad)


def test_checker_matches_oracle():
    with criterion(3, "is_crooked agrees with the quantifier oracle", budget=60) as info:
        disagree = []
        for n in range(7):
            if not _agree(ck.canonical_crooked(n)):
                disagree.append(("c", n))
        rng = random.Random(3)
        kinds = {"walk": 0, "surjection": 0, "crooked": 0}
        crooked_seen = 0
        for k in range(500):
            r = k % 5
            if r < 2:
                s = random_walk_map(rng, rng.randint(1, 200), rng.randint(1, 12))
                kinds["walk"] += 1
            elif r < 4:
                s = random_surjection(rng, rng.randint(1, 10))
                while s.m > 200:
                    s = random_surjection(rng, rng.randint(1, 10))
                kinds["surjection"] += 1
            else:
                # c_n after a random walk stays crooked; keep m <= 200
                n = rng.randint(1, 5)
                t = random_walk_map(rng, rng.randint(1, 200), ck.crn(n))
                s = iv.build_simplicial(n, compose_lists(canonical_oracle(n), t.tolist()))
                kinds["crooked"] += 1
            crooked_seen += crooked_oracle(s.tolist()) is None
            if not _agree(s):
                disagree.append(s.tolist())
        assert not disagree, f"{len(disagree)} disagreements"
        info.update(kinds)
        info["crooked_instances"] = crooked_seen


# 4 -------------------------------------------------------------------------

def test_canonical_maps_are_crooked():
    with criterion(4, "c_n crooked for n <= 10", budget=120) as info:
        for n in range(11):
            assert ck.is_crooked(ck.canonical_crooked(n)).crooked, n
        info["m_10"] = ck.crn(10)


# 5 -------------------------------------------------------------------------

def test_factorization_round_trips():
    with criterion(5, "factor and cofactor round trips", budget=60) as info:
        rng = random.Random(5)
        done = 0
        while done < 100:
            n = rng.randint(0, 5)
            q = random_walk_map(rng, rng.randint(0, 40), ck.crn(n))
            s = iv.build_simplicial(n, compose_lists(canonical_oracle(n), q.tolist()))
            if not s.surjective:
                continue
            sp = fc.factor_through_canonical(s)
            assert iv.compose(ck.canonical_crooked(n), sp) == s
            assert compose_lists(canonical_oracle(n), sp.tolist()) == s.tolist()
            done += 1
        for _ in range(50):
            s = random_breakpoint_injective(rng, rng.randint(0, 6), rng.randint(0, 4))
            sp = fc.cofactor_to_canonical(s)
            n = s.codomain_size
            assert iv.compose(s, sp) == ck.canonical_crooked(n)
            assert compose_lists(s.tolist(), sp.tolist()) == canonical_oracle(n)
        info["factor"] = 100
        info["cofactor"] = 50


# 6 -------------------------------------------------------------------------

def test_crooked_factorization_end_to_end():
    with criterion(6, "crooked factorization within eps", budget=120) as info:
        rng = random.Random(6)
        gs = [iv.pl_identity(), iv.tent()] + [random_pl_surjection(rng, rng.randint(3, 6)) for _ in range(5)]
        worst = F(0)
        methods = set()
        for g in gs:
            for eps in (F(1, 4), F(1, 10)):
                plan = fc.crooked_factorize(g, eps)
                assert plan.delta > 0
                N = gm.least_crooked_order(plan.delta)
                res = plan.resolve(ck.certify_canonical(N, plan.delta))
                assert res.distance is not None, "no exact distance"
                assert res.distance < eps, (res.distance, eps)
                worst = max(worst, res.distance / eps)
                methods.add(res.record["distance_method"])
        info["worst_ratio"] = f"{float(worst):.3f}"
        info["methods"] = ",".join(sorted(methods))


# 7 -------------------------------------------------------------------------

def _entry(y0, y1, c, eps):
    """Open band |y - c| < eps along y0 -> y1, as parameters (lo, hi) or None."""
    if y0 == y1:
        return (F(-1), F(2)) if abs(y0 - c) < eps else None
    a, b = (c - eps - y0) / (y1 - y0), (c + eps - y0) / (y1 - y0)
    lo, hi = min(a, b), max(a, b)
    if lo < 1 and hi > 0:
        return lo, hi
    return None


def arc_violation(ys, i, j, eps):
    """Exact continuous test on the arc [i/m, j/m] of the PL map with vertex
    values ys (already scaled to [0, 1]). True when no y' <= x' exist with
    f(y') close to f(b) and f(x') close to f(a), closeness strict."""
    if i >= j:
        return False
    fa, fb = ys[i], ys[j]
    inf_b = None
    for k in range(i, j):
        band = _entry(ys[k], ys[k + 1], fb, eps)
        if band:
            inf_b = k + max(band[0], F(0))
            break
    sup_a = None
    for k in range(j - 1, i - 1, -1):
        band = _entry(ys[k], ys[k + 1], fa, eps)
        if band:
            sup_a = k + min(band[1], F(1))
            break
    # both sets are relatively open and contain an endpoint, so a common
    # point exists exactly when inf B < sup A
    return not (inf_b < sup_a)


def pair_replays(vals, i, j):
    """Combinatorial witness replay: (i, j) admits no i <= j' <= i' <= j."""
    for jp in range(i, j + 1):
        if abs(vals[jp] - vals[j]) <= 1:
            for ip in range(jp, j + 1):
                if abs(vals[ip] - vals[i]) <= 1:
                    return False
    return True


def _sandwich_maps(rng, n):
    yield ck.canonical_crooked(n)
    yield ck.canonical_crooked(n, reversed=True)
    yield iv.identity(n)
    for _ in range(4):
        t = random_walk_map(rng, rng.randint(1, 40), ck.crn(n))
        yield iv.build_simplicial(n, compose_lists(canonical_oracle(n), t.tolist()))
    for _ in range(6):
        yield random_walk_map(rng, rng.randint(1, 40), n)
        yield random_surjection(rng, n)


def test_sandwich_soundness():
    with criterion(7, "sandwich decider vs arc oracle") as info:
        rng = random.Random(7)
        counts = {"Certified": 0, "Refuted": 0, "Indeterminate": 0}
        bad = []
        for n in range(1, 7):
            grid = {F(1, 2 * n), F(1, n), F(1, n) + F(1, 1000), F(5, 4 * n), F(3, 2 * n),
                    F(3, 2 * n) + F(1, 1000), F(2, n), F(1)}
            for s in _sandwich_maps(rng, n):
                vals = s.tolist()
                ys = [F(v, n) for v in vals]
                m = len(vals) - 1
                for eps in sorted(grid):
                    v = ck.eps_crooked_decide(s, eps)
                    counts[v.kind] += 1
                    if v.kind == "Certified":
                        if any(arc_violation(ys, i, j, eps) for i in range(m + 1) for j in range(i + 1, m + 1)):
                            bad.append(("certified", vals, eps))
                    elif v.kind == "Refuted":
                        i, j = v.pair
                        if not (pair_replays(vals, i, j) and arc_violation(ys, i, j, eps)):
                            bad.append(("refuted", vals, eps, v.pair))
        assert not bad, f"{len(bad)} disagreements, first {bad[0]}"
        info.update(counts)


# 8 -------------------------------------------------------------------------

def _circle_data(rng, pieces=4, max_degree=3):
    d = rng.randint(-max_degree, max_degree)
    xs = sorted({F(rng.randint(1, 59), 60) for _ in range(pieces - 1)})
    y0 = F(rng.randint(-30, 30), 20)
    pts = [(F(0), y0)] + [(x, F(rng.randint(-60, 60), 20)) for x in xs] + [(F(1), y0 + d)]
    return pts, d


def _perturb(rng, pts, d):
    """Nearby lift: same breakpoints, values moved by < 1/2, degree d + {-1,0,1}."""
    d2 = d + rng.choice((-1, 0, 0, 0, 1))
    y0 = pts[0][1] + F(rng.randint(-9, 9), 20)
    mid = [(x, y + F(rng.randint(-9, 9), 20)) for x, y in pts[1:-1]]
    extra = [(F(rng.randint(1, 59), 60), None)]
    out = [(F(0), y0)] + mid + [(F(1), y0 + d2)]
    xs = {x for x, _ in out}
    for x, _ in extra:
        if x not in xs:
            lift = iv.PLMap(pts, bounded=False)
            out.append((x, lift(x) + F(rng.randint(-9, 9), 20)))
    return sorted(out), d2


def test_degree_properties():
    with criterion(8, "degree multiplicative and stable", budget=30) as info:
        rng = random.Random(8)
        for _ in range(100):
            (pf, df), (pg, dg) = _circle_data(rng), _circle_data(rng)
            f, g = cm.CircleMap(pf), cm.CircleMap(pg)
            h = cm.compose_circle(f, g)
            assert h.degree == f.degree * g.degree == df * dg
            for k in range(9):
                x = F(k, 8)
                assert h(x) == f(g(x))
        close = tried = 0
        while close < 500:
            tried += 1
            pf, df = _circle_data(rng)
            pg, dg = _perturb(rng, pf, df)
            f, g = cm.CircleMap(pf), cm.CircleMap(pg)
            d = cm.circle_dist(f, g)
            sampled = max(cm._circ(f(F(k, 120)) - g(F(k, 120))) for k in range(121))
            assert sampled <= d
            if d < F(1, 2):
                close += 1
                assert df == dg, (pf, pg, d)
        info["close_pairs"] = close
        info["tried"] = tried


# 9 -------------------------------------------------------------------------

def test_rogers_witness_geometry():
    with criterion(9, "two components, each missing an arc on the squaring side", budget=60) as info:
        rep = cm.rogers_witness_check(720)
        assert rep["components"] == 2
        assert rep["refined_components"] == 2
        for comp in rep["per_component"]:
            assert not comp["first"]["covers"], comp
        info["missed"] = ",".join(str(c["first"]["missed"]["length"]) for c in rep["per_component"])
        info["exact_missed"] = ",".join(str(c["first"]["missed"]["length"])
                                        for c in rep["exact"]["per_component"])


# 10 ------------------------------------------------------------------------

PRIMES = (2, 3, 5, 7, 11, 13)
EXPS = (0, 1, 2, 3, sn.INF)


def _random_super(rng, zero_rate=0.05):
    if rng.random() < zero_rate:
        return sn.Supernatural.of_zero()
    exc = {p: rng.choice(EXPS) for p in rng.sample(PRIMES, rng.randint(0, 4))}
    return sn.Supernatural(rng.choice((0, 0, 0, 1, sn.INF)), exc)


def _leq_oracle(s, t):
    if t.zero:
        return True
    if s.zero:
        return False
    return all(s(p) <= t(p) for p in PRIMES + (101,))


def test_type_arithmetic():
    with criterion(10, "solve round trips and prefix-cut invariance") as info:
        rng = random.Random(10)
        for _ in range(500):
            s = _random_super(rng)
            s2 = s * _random_super(rng)
            assert sn.leq(s, s2) and _leq_oracle(s, s2)
            t = sn.multiplication_solve(s, s2)
            assert t is not sn.NoSolution and t * s == s2, (s, s2)
        nosol = 0
        for _ in range(500):
            s, s2 = _random_super(rng, 0.1), _random_super(rng, 0.1)
            t = sn.multiplication_solve(s, s2)
            ok = _leq_oracle(s, s2)
            assert sn.leq(s, s2) == ok
            assert (t is sn.NoSolution) == (not ok)
            if ok:
                assert t * s == s2
            nosol += t is sn.NoSolution
        for _ in range(200):
            prefix = tuple(rng.randint(-6, 6) for _ in range(rng.randint(0, 5)))
            cycle = tuple(rng.randint(-6, 6) for _ in range(rng.randint(1, 3)))
            spec = sn.DegreeSequenceSpec(prefix, cycle)
            k = rng.randint(0, 10)
            assert sn.type_of_sequence(spec) == sn.type_of_sequence(spec.tail(k))
        info["no_solution_cases"] = nosol


# 11 ------------------------------------------------------------------------

def test_game_horizon():
    with criterion(11, "game engine horizon", budget=120) as info:
        two_inf = sn.Supernatural.power_inf([2])
        runs = {}

        def both(key, *args, **kw):
            a = gm.play(*args, **kw)
            b = gm.play(*args, **kw)
            assert a.dumps() == b.dumps(), f"{key} play is not deterministic"
            runs[key] = a
            return a

        fin = both("finsurj", "finsurj", gm.random_strategy(), gm.split_strategy(), 6, seed=11)
        assert gm.verify_transcript(fin, ["splits_every_point"]).ok
        circ = both("circle", "circle", gm.scripted_degrees({2: 3}), gm.solenoid_strategy(two_inf), 6,
                    seed=11, config={"S": two_inf.to_json()})
        v = gm.verify_transcript(circ, ["type_budget"])
        assert v.blame == [{"prime": 3, "move": 2, "mover": "Eve"}], v.blame
        inter = both("interval", "interval", gm.identity_strategy(), gm.crooked_strategy(), 6, seed=11)
        v = gm.verify_transcript(inter, ["crooked_schedule"])
        got = sorted(c["n"] for c in v.certificates if c["check"] == "crooked_schedule")
        info["certified"] = got
        missing = [n for n in range(7) if n not in got]
        assert not missing, f"no eps_n-crooked certificate for n in {missing}"
