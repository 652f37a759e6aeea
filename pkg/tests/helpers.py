"""Random instance generators and brute-force oracles shared by the tests.

The oracles here are deliberately naive: they follow the defining
quantifiers literally and share no code with the library routines they check.
"""
import random
from fractions import Fraction

from pseudoarc import interval as iv


def walk(rng, start, target, stutter=0.2):
    """Monotone unit path from start to target with random repeated values."""
    out = []
    v = start
    step = 1 if target > start else -1
    while v != target:
        if rng.random() < stutter:
            out.append(v)
        v += step
        out.append(v)
    return out


def random_surjection(rng, n, waypoints=4, stutter=0.2):
    """Simplicial surjection onto I_n through random waypoints (0 and n included)."""
    pts = [rng.randint(0, n) for _ in range(waypoints)]
    pts.insert(rng.randint(0, len(pts)), 0)
    pts.insert(rng.randint(0, len(pts)), n)
    vals = [pts[0]]
    for p in pts[1:]:
        vals.extend(walk(rng, vals[-1], p, stutter))
    return iv.build_simplicial(n, vals)


def random_walk_map(rng, m, n):
    vals = [rng.randint(0, n)]
    for _ in range(m):
        vals.append(min(n, max(0, vals[-1] + rng.choice((-1, 0, 1)))))
    return iv.build_simplicial(n, vals)


def random_breakpoint_injective(rng, n, turns=3):
    """s with s(0)=0, s(m)=n, unit steps and pairwise distinct turning values."""
    while True:
        inner = rng.sample(range(1, n), min(turns, max(0, n - 1))) if n > 1 else []
        levels = [0] + inner + [n]
        # keep alternation: drop points that do not turn
        ok = all((b - a) * (c - b) < 0 for a, b, c in zip(levels, levels[1:], levels[2:]))
        if ok:
            break
        turns = max(0, turns - 1)
    vals = [0]
    for p in levels[1:]:
        vals.extend(walk(rng, vals[-1], p, stutter=0))
    return iv.build_simplicial(n, vals)


def random_pl_surjection(rng, k, den=12):
    """PL surjection with k breakpoints, values on a 1/den grid, hitting 0 and 1."""
    xs = sorted(rng.sample(range(1, 10 * k), k - 2))
    xs = [Fraction(0)] + [Fraction(x, 10 * k) for x in xs] + [Fraction(1)]
    ys = [Fraction(rng.randint(0, den), den) for _ in xs]
    i0, i1 = rng.sample(range(len(xs)), 2)
    ys[i0], ys[i1] = Fraction(0), Fraction(1)
    return iv.PLMap(list(zip(xs, ys)))


def crooked_oracle(values):
    """Literal check: for all i <= j exist i <= j' <= i' <= j with the endpoint
    values adjacent. Returns the lexicographically least failing pair."""
    m = len(values) - 1
    for i in range(m + 1):
        for j in range(i, m + 1):
            found = False
            for jp in range(i, j + 1):
                if abs(values[jp] - values[j]) > 1:
                    continue
                for ip in range(jp, j + 1):
                    if abs(values[ip] - values[i]) <= 1:
                        found = True
                        break
                if found:
                    break
            if not found:
                return (i, j)
    return None


def canonical_oracle(n):
    """c_n unfolded from its defining concatenation, on plain lists."""
    c = [[0], [0, 1]]
    for k in range(2, n + 1):
        a, b = c[k - 1], c[k - 2]
        c.append(a + [1 + x for x in reversed(b)][1:] + [1 + x for x in a][1:])
    return c[n]


def pell_oracle(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, 2 * b + a
    return a
