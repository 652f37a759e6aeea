"""Banach-Mazur games on inverse sequences, with referee, strategies and verifiers.

Move n is a map f_n: X_{n+1} -> X_n. Eve makes the even moves, Odd the odd
ones. f_{n,m} = f_n o ... o f_{m-1} maps X_m to X_n; f_{n,n} is the identity.
"""
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import circle as cm
from . import crooked as ck
from .factor import Chain
from . import interval as iv
from . import supernatural as sn
from .errors import DepthTooLarge, InvalidMove, ParseError, ScheduleExhausted

ONE = Fraction(1)


# ---------------------------------------------------------------------------
# backends

@dataclass(frozen=True)
class FinMap:
    """Surjection {0..len(values)-1} -> {0..codomain-1}."""

    values: tuple
    codomain: int

    @property
    def domain(self):
        return len(self.values)

    def __call__(self, i):
        return self.values[i]

    @property
    def surjective(self):
        return set(self.values) == set(range(self.codomain))

    def to_json(self):
        return {"values": list(self.values), "codomain": self.codomain}

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(int(v) for v in obj["values"]), int(obj["codomain"]))


class DiscreteModulus:
    """Every map between discrete spaces is (eps, 1)-continuous."""

    lipschitz = None

    def delta(self, eps):
        return ONE

    def witnesses(self, eps, delta):
        return iv.rational(delta) <= 1


class Backend:
    name = "abstract"
    metric_enriched = False

    def compose(self, g, f):
        raise NotImplementedError

    def dist(self, f, g):
        raise NotImplementedError

    def lipschitz(self, f):
        """Exact Lipschitz constant, or None for discrete spaces."""
        return None

    def modulus(self, maps):
        """Modulus of the composite of ``maps`` (outermost first)."""
        L = ONE
        for f in maps:
            lf = self.lipschitz(f)
            if lf is None:
                return DiscreteModulus()
            L *= lf
        return iv.Modulus(L)

    def identity(self, obj=None):
        raise NotImplementedError

    def validate(self, f, codomain):
        """None when f may be played onto ``codomain`` (None = unconstrained)."""
        raise NotImplementedError

    def domain_of(self, f):
        return None

    def map_to_json(self, f):
        return f.to_json()

    def map_from_json(self, obj):
        raise NotImplementedError


class IntervalPL(Backend):
    name = "interval"

    def compose(self, g, f):
        return iv.compose_pl(g, f)

    def dist(self, f, g):
        return iv.sup_dist(f, g)

    def lipschitz(self, f):
        return iv.modulus(f).lipschitz

    def identity(self, obj=None):
        return iv.pl_identity()

    def validate(self, f, codomain):
        if not isinstance(f, iv.PLMap) or not f.bounded:
            return "not a PL self-map of [0, 1]"
        if not f.surjective:
            return "not surjective"
        return None

    def map_from_json(self, obj):
        return iv.PLMap.from_json(obj)


class FinSurj(Backend):
    name = "finsurj"
    metric_enriched = True

    def compose(self, g, f):
        return FinMap(tuple(g.values[v] for v in f.values), g.codomain)

    def dist(self, f, g):
        return 0 if f == g else 1

    def identity(self, obj=1):
        return FinMap(tuple(range(obj)), obj)

    def validate(self, f, codomain):
        if not isinstance(f, FinMap):
            return "not a finite map"
        if codomain is not None and f.codomain != codomain:
            return f"codomain {f.codomain} does not match the previous domain {codomain}"
        if not f.surjective:
            return "not surjective"
        return None

    def domain_of(self, f):
        return f.domain

    def map_from_json(self, obj):
        return FinMap.from_json(obj)


class CirclePL(Backend):
    name = "circle"

    def compose(self, g, f):
        return cm.compose_circle(g, f)

    def dist(self, f, g):
        return cm.circle_dist(f, g)

    def lipschitz(self, f):
        return iv.modulus(f.lift).lipschitz

    def identity(self, obj=None):
        return cm.power_map(1)

    def validate(self, f, codomain):
        if not isinstance(f, cm.CircleMap):
            return "not a circle map"
        if not f.surjective:
            return "not surjective"
        return None

    def map_from_json(self, obj):
        return cm.CircleMap.from_json(obj)


BACKENDS = {"interval": IntervalPL, "finsurj": FinSurj, "circle": CirclePL}


def backend(name):
    try:
        return BACKENDS[name]()
    except KeyError:
        raise ParseError(f"unknown backend {name!r}") from None


# ---------------------------------------------------------------------------
# epsilon schedules

@dataclass
class EpsilonSchedule:
    """eps[n] for every object so far; witnesses[(k, n)] is the Lipschitz bound
    of f_{k,n} (None for discrete) showing (eps_k / 2^(n-k), eps_n)-continuity."""

    eps: list
    witnesses: dict = field(default_factory=dict)

    def copy(self):
        return EpsilonSchedule(list(self.eps), dict(self.witnesses))

    def check(self):
        """Replay every witness; returns the failing pairs."""
        bad = []
        for (k, n), L in self.witnesses.items():
            mod = DiscreteModulus() if L is None else iv.Modulus(L)
            if not mod.witnesses(self.eps[k] / 2 ** (n - k), self.eps[n]):
                bad.append((k, n))
        return bad

    def to_json(self):
        return {"epsilons": [iv.fmt(e) for e in self.eps],
                "witnesses": [{"from": k, "to": n, "lipschitz": None if L is None else iv.fmt(L)}
                              for (k, n), L in sorted(self.witnesses.items())]}

    @classmethod
    def from_json(cls, obj):
        w = {(int(d["from"]), int(d["to"])): None if d["lipschitz"] is None else iv.rational(d["lipschitz"])
             for d in obj.get("witnesses", [])}
        return cls([iv.rational(e) for e in obj["epsilons"]], w)


def epsilon_schedule_step(schedule, maps, back):
    """Extend the schedule after the move maps[-1] = f_n.

    eps_{n+1} = min over k <= n of the modulus of f_{k,n+1} at eps_k / 2^(n+1-k),
    capped at eps_n / 2.
    """
    n = len(maps) - 1
    out = schedule.copy()
    best = schedule.eps[n] / 2
    for k in range(n + 1):
        mod = back.modulus(maps[k:n + 1])
        d = mod.delta(schedule.eps[k] / 2 ** (n + 1 - k))
        best = min(best, d)
        out.witnesses[(k, n + 1)] = mod.lipschitz
    if best <= 0:
        raise ScheduleExhausted("epsilon update produced a non-positive value", move=n)
    out.eps.append(best)
    return out


# ---------------------------------------------------------------------------
# transcripts

@dataclass
class Move:
    index: int
    mover: str
    map: object
    ref: str
    avatar: dict = None

    @property
    def degree(self):
        return getattr(self.map, "degree", None)


def mover_of(n):
    return "Eve" if n % 2 == 0 else "Odd"


@dataclass
class GameTranscript:
    backend: str
    moves: list = field(default_factory=list)
    schedule: EpsilonSchedule = None
    config: dict = field(default_factory=dict)
    certificates: list = field(default_factory=list)
    blame: list = field(default_factory=list)
    aborted: dict = None

    @property
    def maps(self):
        return [mv.map for mv in self.moves]

    def tail(self, k=1):
        """The play with its first k moves deleted (schedule shifted with it)."""
        moves = [Move(mv.index - k, mv.mover, mv.map, mv.ref, mv.avatar) for mv in self.moves[k:]]
        sch = EpsilonSchedule(self.schedule.eps[k:],
                              {(a - k, b - k): L for (a, b), L in self.schedule.witnesses.items() if a >= k})
        return GameTranscript(self.backend, moves, sch, dict(self.config, shifted=k))

    def to_json(self):
        back = backend(self.backend)
        return {
            "backend": self.backend,
            "config": self.config,
            "moves": [{"index": mv.index, "mover": mv.mover, "map_ref": mv.ref,
                       "epsilon": iv.fmt(self.schedule.eps[mv.index]),
                       "map": back.map_to_json(mv.map), "avatar": mv.avatar}
                      for mv in self.moves],
            "schedule": self.schedule.to_json(),
            "certificates": self.certificates,
            "blame": self.blame,
            "aborted": self.aborted,
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        back = backend(obj["backend"])
        moves = [Move(int(d["index"]), d["mover"], back.map_from_json(d["map"]), d["map_ref"], d.get("avatar"))
                 for d in obj["moves"]]
        return cls(obj["backend"], moves, EpsilonSchedule.from_json(obj["schedule"]),
                   obj.get("config", {}), obj.get("certificates", []), obj.get("blame", []),
                   obj.get("aborted"))


@dataclass
class GameState:
    backend: Backend
    transcript: GameTranscript
    n: int

    @property
    def epsilon(self):
        return self.transcript.schedule.eps[self.n]

    @property
    def current_object(self):
        """Size of X_n for finite backends (None before the first move)."""
        if self.n == 0:
            return None
        return self.backend.domain_of(self.transcript.moves[-1].map)

    @property
    def degree_so_far(self):
        d = 1
        for mv in self.transcript.moves:
            d *= mv.map.degree
        return d


def play(back, eve, odd, rounds, seed=0, eps0=1, config=None):
    """Alternate eve and odd for ``rounds`` rounds (2 * rounds moves).

    A strategy is called as strategy(state, rng) and returns (map, ref, avatar).
    An invalid move aborts the play with InvalidMove naming the mover; the
    partial transcript is attached to the error as ``transcript``.
    """
    if isinstance(back, str):
        back = backend(back)
    if rounds < 1:
        raise ParseError("rounds must be >= 1")
    cfg = {"seed": seed, "rounds": rounds, "eve": getattr(eve, "label", "custom"),
           "odd": getattr(odd, "label", "custom")}
    cfg.update(config or {})
    tr = GameTranscript(back.name, [], EpsilonSchedule([iv.rational(eps0)]), cfg)
    for n in range(2 * rounds):
        mover = mover_of(n)
        strat = eve if mover == "Eve" else odd
        rng = random.Random(f"{seed}:{n}")
        state = GameState(back, tr, n)
        f, ref, avatar = strat(state, rng)
        reason = back.validate(f, state.current_object)
        if reason is not None:
            tr.aborted = {"move": n, "mover": mover, "reason": reason}
            err = InvalidMove(f"{mover} made an invalid move {n}: {reason}", mover=mover, move=n,
                              reason=reason)
            err.transcript = tr
            raise err
        tr.moves.append(Move(n, mover, f, ref, avatar))
        tr.schedule = epsilon_schedule_step(tr.schedule, tr.maps, back)
    return tr


# ---------------------------------------------------------------------------
# strategies

def _labelled(label):
    def wrap(fn):
        fn.label = label
        return fn
    return wrap


def identity_strategy():
    @_labelled("identity")
    def strat(state, rng):
        obj = state.current_object
        if obj is None and isinstance(state.backend, FinSurj):
            obj = 1
        return state.backend.identity(obj), "identity", None
    return strat


def random_pl_surjection(rng, k=4, den=8):
    xs = sorted(rng.sample(range(1, 4 * k), k - 2))
    xs = [Fraction(0)] + [Fraction(x, 4 * k) for x in xs] + [Fraction(1)]
    ys = [Fraction(rng.randint(0, den), den) for _ in xs]
    a, b = rng.sample(range(len(xs)), 2)
    ys[a], ys[b] = Fraction(0), Fraction(1)
    return iv.PLMap(list(zip(xs, ys)))


def random_fin_surjection(rng, codomain, extra):
    vals = list(range(codomain)) + [rng.randrange(codomain) for _ in range(extra)]
    rng.shuffle(vals)
    return FinMap(tuple(vals), codomain)


def random_strategy(max_extra=4):
    """Eve's random moves: PL surjections, finite surjections adding at most
    ``max_extra`` points, or circle maps of degree +-1, +-2."""
    @_labelled("random")
    def strat(state, rng):
        back = state.backend
        if isinstance(back, IntervalPL):
            return random_pl_surjection(rng), "random", None
        if isinstance(back, FinSurj):
            cod = state.current_object or rng.randint(1, max_extra)
            return random_fin_surjection(rng, cod, rng.randint(0, max_extra)), "random", None
        d = rng.choice((1, -1, 2, -2))
        c = cm.rotation(cm.power_map(d), Fraction(rng.randint(0, 7), 8))
        return c, f"power:{d}", None
    return strat


def scripted_degrees(script):
    """Circle moves z -> z^d at the listed move indices, identity elsewhere."""
    script = {int(k): int(v) for k, v in script.items()}

    @_labelled("script:" + ",".join(f"{k}={v}" for k, v in sorted(script.items())))
    def strat(state, rng):
        d = script.get(state.n, 1)
        return cm.power_map(d), f"power:{d}", None
    return strat


def least_crooked_order(eps):
    """Least N with 1/N < eps."""
    eps = iv.rational(eps)
    return eps.denominator // eps.numerator + 1


def crooked_strategy(max_n=8):
    """Odd plays the realization of c_N with the least N such that 1/N < eps_n,
    but never above ``max_n``."""
    @_labelled(f"crooked(max_n={max_n})")
    def strat(state, rng):
        N = min(least_crooked_order(state.epsilon), max_n)
        f = iv.realize(ck.canonical_crooked(N))
        return f, f"canonical:{N}", {"canonical": N}
    return strat


def split_strategy():
    """Odd plays the projection X_n x 2 -> X_n."""
    @_labelled("split")
    def strat(state, rng):
        k = state.current_object
        return FinMap(tuple(i // 2 for i in range(2 * k)), k), "split", None
    return strat


def zigzag_primes():
    """2, 3, 2, 5, 3, 2, 7, 5, 3, 2, ... (every prime infinitely often)."""
    primes = []
    p = 1
    while True:
        p += 1
        while not sn.is_prime(p):
            p += 1
        primes.append(p)
        for q in reversed(primes):
            yield q


def prime_enumeration(universe=None, count=64):
    if universe is None:
        gen = zigzag_primes()
        return [next(gen) for _ in range(count)]
    universe = sorted(universe)
    out = []
    j = 1
    while len(out) < count:
        out.extend(reversed(universe[:j]))
        j = min(j + 1, len(universe))
    return out[:count]


def _exponent(k, p):
    if k == 0:
        return sn.INF
    e = 0
    k = abs(k)
    while k % p == 0:
        k //= p
        e += 1
    return e


def solenoid_strategy(s, enumeration=None, max_n=5):
    """At move n = 2k+1 Odd plays a crooked degree-1 circle map, composed with
    z -> z^p for p = enumeration[k] when the exponent of p in |deg f_{0,n}| is
    still below s(p)."""
    enum = list(enumeration) if enumeration is not None else prime_enumeration()

    @_labelled(f"solenoid({s!r})")
    def strat(state, rng):
        k = state.n // 2
        p = enum[k % len(enum)]
        N = min(least_crooked_order(state.epsilon), max_n)
        d = 1
        if not s.zero and _exponent(state.degree_so_far, p) < s(p):
            d = p
        c, avatar, chk = cm.crooked_circle_map(N, d)
        return c, f"crooked_circle:{N}:{d}", {"circle_order": N, "degree": d, "prime": p,
                                               "certified": bool(chk)}
    return strat


def odd_strategy(kind, **kw):
    if kind == "crooked":
        return crooked_strategy(**kw)
    if kind == "split":
        return split_strategy()
    if kind == "solenoid":
        return solenoid_strategy(**kw)
    if kind == "identity":
        return identity_strategy()
    raise ParseError(f"unknown strategy {kind!r}")


# ---------------------------------------------------------------------------
# verification

@dataclass
class BlameLedger:
    s: object
    last_ok: dict            # prime -> maximal n with exponent of |deg f_{0,n}| <= s(p)
    entries: list            # failures at the horizon

    def tally(self):
        out = {"Eve": 0, "Odd": 0}
        for e in self.entries:
            out[e["mover"]] += 1
        return out


def blame_ledger(degrees, s):
    """Per-prime blame for a finite degree sequence against representative s."""
    if s.zero:
        return BlameLedger(s, {}, [])
    N = len(degrees)
    entries, last_ok = [], {}
    zero_at = next((i for i, d in enumerate(degrees) if d == 0), None)
    primes = sorted({p for d in degrees if d != 0 for p in sn.factorize(d)})
    for p in primes:
        sp = s(p)
        e, ok = 0, 0
        for n in range(N + 1):
            if n > 0:
                e = e + _exponent(degrees[n - 1], p) if e != sn.INF else e
            if e <= sp:
                ok = n
        last_ok[p] = ok
        if ok < N:
            entries.append({"prime": p, "move": ok, "mover": mover_of(ok)})
    if zero_at is not None:
        # every prime with finite s(p) fails at the zero move (or earlier)
        entries.append({"prime": "all", "move": zero_at, "mover": mover_of(zero_at)})
    return BlameLedger(s, last_ok, entries)


def _certify_crooked_schedule(tr, back):
    maps = tr.maps
    eps = tr.schedule.eps
    L = [back.lipschitz(f) for f in maps]
    avatar_ok = {}
    for k, mv in enumerate(tr.moves):
        if mv.avatar and "canonical" in mv.avatar:
            N = int(mv.avatar["canonical"])
            avatar_ok[k] = N if iv.realize(ck.canonical_crooked(N)) == mv.map else None
    certs, viols = [], []
    for n in range(len(maps)):
        done = False
        Lnk = ONE
        for k in range(n, len(maps)):
            if k > n:
                Lnk *= L[k - 1]
            N = avatar_ok.get(k)
            if not N:
                continue
            delta = eps[n] / Lnk
            if delta <= Fraction(1, N):
                continue
            base = ck.certify_simplicial(ck.canonical_crooked(N), delta)
            cert = base
            if k > n:
                cert = ck.propagate_right(Chain(maps[n:k]), iv.Modulus(Lnk), base, eps[n])
            ck.replay(cert)
            certs.append({"check": "crooked_schedule", "n": n, "n_prime": k + 1, "via_move": k,
                          "canonical": N, "epsilon": iv.fmt(eps[n]), "certificate": cert.to_json()})
            done = True
            break
        if not done:
            viols.append({"check": "crooked_schedule", "n": n, "epsilon": iv.fmt(eps[n]),
                          "reason": "no later crooked move is fine enough for eps_n"})
    return certs, viols


def _certify_splits(tr):
    maps = tr.maps
    certs, viols = [], []
    for n in range(len(maps)):
        comp = maps[n]
        first_split = {}
        for np_ in range(n + 1, len(maps) + 1):
            if np_ > n + 1:
                comp = FinMap(tuple(comp.values[v] for v in maps[np_ - 1].values), comp.codomain)
            counts = [0] * comp.codomain
            for v in comp.values:
                counts[v] += 1
            for x, c in enumerate(counts):
                if c >= 2 and x not in first_split:
                    first_split[x] = np_
        unsplit = [x for x in range(maps[n].codomain) if x not in first_split]
        if unsplit:
            viols.append({"check": "splits_every_point", "n": n, "unsplit": unsplit})
        else:
            certs.append({"check": "splits_every_point", "n": n,
                          "n_prime": max(first_split.values())})
    return certs, viols


@dataclass
class Verification:
    certificates: list
    violations: list
    blame: list = field(default_factory=list)
    tally: dict = None

    @property
    def ok(self):
        return not self.violations

    def to_json(self):
        return {"certificates": self.certificates, "violations": self.violations,
                "blame": self.blame, "tally": self.tally, "ok": self.ok}


def recompute_schedule(tr, back):
    sch = EpsilonSchedule([tr.schedule.eps[0]])
    maps = tr.maps
    for n in range(len(maps)):
        sch = epsilon_schedule_step(sch, maps[:n + 1], back)
    return sch


def verify_transcript(tr, checks=("crooked_schedule",), s=None):
    """Attach certificates and list violations; never a final win verdict."""
    back = backend(tr.backend)
    certs, viols = [], []
    for k, n in tr.schedule.check():
        viols.append({"check": "schedule", "pair": [k, n]})
    if tr.config.get("shifted") is None and tr.schedule.eps != recompute_schedule(tr, back).eps:
        viols.append({"check": "schedule", "reason": "recorded epsilons differ from the recomputed ones"})
    out = Verification(certs, viols)
    for c in checks:
        if c == "crooked_schedule":
            a, b = _certify_crooked_schedule(tr, back)
        elif c == "splits_every_point":
            a, b = _certify_splits(tr)
        elif c == "type_budget":
            if s is None:
                s = sn.Supernatural.from_json(tr.config["S"])
            led = blame_ledger([mv.map.degree for mv in tr.moves], s)
            out.blame = led.entries
            out.tally = led.tally()
            a, b = [{"check": "type_budget", "last_ok": {str(p): n for p, n in led.last_ok.items()}}], []
        else:
            raise ParseError(f"unknown check {c!r}")
        certs.extend(a)
        viols.extend(b)
    tr.certificates = certs
    tr.blame = out.blame
    return out


# ---------------------------------------------------------------------------
# Lewis-Minc sequence

MAX_DEPTH = 3


@dataclass
class LewisMinc:
    m: list
    eps: list
    maps: list


def lewis_minc(k, max_depth=MAX_DEPTH):
    """m_0 = 1, m_{n+1} = crn(2 m_n); f_n is the realization of c_{2 m_n}
    with eps_n = 1 / m_n.  Maps stay symbolic above the memory bound."""
    if k < 0:
        raise ParseError("k must be >= 0")
    if k > max_depth:
        raise DepthTooLarge(f"depth {k} exceeds the configured depth {max_depth}", k=k,
                            max_depth=max_depth)
    m = [1]
    for _ in range(k):
        m.append(ck.crn(2 * m[-1]))
    eps = [Fraction(1, x) for x in m]
    maps = []
    for n in range(k + 1):
        N = 2 * m[n]
        size = ck.crn(N) + 1 if N <= ck.CRN_INDEX_LIMIT else None
        materialized = size is not None and size <= ck.MEMORY_BOUND
        if N <= ck.CRN_INDEX_LIMIT:
            lip = Fraction(ck.crn(N), N)
        else:
            lip = f"crn({N})/{N}"
        maps.append({
            "n": n, "canonical": N, "materialized": materialized,
            "lipschitz": lip,
            "certificate": ck.certify_canonical(N, eps[n]),
            "map": iv.realize(ck.canonical_crooked(N)) if materialized else None,
        })
    return LewisMinc(m, eps, maps)
