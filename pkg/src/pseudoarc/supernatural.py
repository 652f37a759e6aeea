"""Supernatural numbers, their types, and the type of a degree sequence.

A supernatural number assigns an exponent in N u {inf} to every prime. Only
eventually-constant ones are represented: a default exponent plus finitely
many exceptions. The zero number is a separate value.
"""
from dataclasses import dataclass
from functools import reduce
from math import inf

from .errors import IncoherentData, ParseError

INF = inf


def is_prime(p):
    if not isinstance(p, int) or p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    k = 3
    while k * k <= p:
        if p % k == 0:
            return False
        k += 2
    return True


def factorize(k):
    """Prime factorization of |k| as a dict; k must be nonzero."""
    k = abs(int(k))
    out = {}
    p = 2
    while p * p <= k:
        while k % p == 0:
            out[p] = out.get(p, 0) + 1
            k //= p
        p += 1 if p == 2 else 2
    if k > 1:
        out[k] = out.get(k, 0) + 1
    return out


def _exp_str(e):
    return "inf" if e == INF else str(e)


def _exp_parse(x):
    if isinstance(x, str):
        if x.strip() in ("inf", "∞"):
            return INF
        try:
            x = int(x)
        except ValueError:
            raise ParseError(f"bad exponent {x!r}") from None
    if isinstance(x, bool) or not isinstance(x, int) or x < 0:
        raise ParseError(f"bad exponent {x!r}")
    return x


class Supernatural:
    """Eventually-constant prime-exponent function, or zero."""

    __slots__ = ("zero", "default", "exceptions")

    def __init__(self, default=0, exceptions=None, zero=False):
        self.zero = bool(zero)
        if self.zero:
            self.default, self.exceptions = None, {}
            return
        default = _exp_parse(default) if default != INF else INF
        exc = {}
        for p, e in (exceptions or {}).items():
            p = int(p)
            if not is_prime(p):
                raise ParseError(f"{p} is not prime")
            e = e if e == INF else _exp_parse(e)
            if e != default:
                exc[p] = e
        self.default = default
        self.exceptions = exc

    # constructors -------------------------------------------------------
    @classmethod
    def of_zero(cls):
        return cls(zero=True)

    @classmethod
    def one(cls):
        return cls(0)

    @classmethod
    def of_int(cls, k):
        if k == 0:
            return cls.of_zero()
        return cls(0, factorize(k))

    @classmethod
    def power_inf(cls, primes):
        """P^inf for a finite set of primes."""
        return cls(0, {p: INF for p in primes})

    # queries ----------------------------------------------------------
    def __call__(self, p):
        if self.zero:
            raise ValueError("the zero supernatural has no exponents")
        return self.exceptions.get(p, self.default)

    def _primes(self, other=None):
        ps = set(self.exceptions)
        if other is not None:
            ps |= set(other.exceptions)
        return ps

    def is_finite(self):
        return not self.zero and self.default == 0 and all(e != INF for e in self.exceptions.values())

    def value(self):
        """The natural number, when finite."""
        if not self.is_finite():
            raise ValueError("not a natural number")
        return reduce(lambda a, pe: a * pe[0] ** pe[1], self.exceptions.items(), 1)

    def __eq__(self, other):
        if not isinstance(other, Supernatural):
            return NotImplemented
        if self.zero or other.zero:
            return self.zero == other.zero
        return self.default == other.default and self.exceptions == other.exceptions

    def __hash__(self):
        if self.zero:
            return hash("zero")
        return hash((self.default, frozenset(self.exceptions.items())))

    def __mul__(self, other):
        return mul(self, other)

    def __le__(self, other):
        return leq(self, other)

    def __repr__(self):
        if self.zero:
            return "0"
        parts = [f"{p}^{'∞' if e == INF else e}" if e != 1 else str(p)
                 for p, e in sorted(self.exceptions.items()) if e != 0]
        if self.default:
            parts.append(f"(others)^{'∞' if self.default == INF else self.default}")
        return "·".join(parts) or "1"

    def to_json(self):
        if self.zero:
            return {"zero": True}
        return {"default": _exp_str(self.default),
                "exceptions": {str(p): _exp_str(e) for p, e in sorted(self.exceptions.items())}}

    @classmethod
    def from_json(cls, obj):
        if obj.get("zero"):
            return cls.of_zero()
        if "default" not in obj:
            raise ParseError("supernatural needs 'zero' or 'default'")
        return cls(_exp_parse(obj["default"]),
                   {int(p): _exp_parse(e) for p, e in obj.get("exceptions", {}).items()})


# ---------------------------------------------------------------------------
# arithmetic

def mul(s, t):
    if s.zero or t.zero:
        return Supernatural.of_zero()
    ps = s._primes(t)
    return Supernatural(s.default + t.default, {p: s(p) + t(p) for p in ps})


def product(items):
    return reduce(mul, items, Supernatural.one())


def leq(s, t):
    """Divisibility order: s <= t iff t = u * s for some u.

    Zero is the top element: everything divides 0, and 0 divides only 0.
    """
    if t.zero:
        return True
    if s.zero:
        return False
    if s.default > t.default:
        return False
    return all(s(p) <= t(p) for p in s._primes(t))


class _NoSolution:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "NoSolution"

    def __bool__(self):
        return False

    def to_json(self):
        return {"solution": None}


NoSolution = _NoSolution()


def multiplication_solve(s, t):
    """Least u with u * s = t, or NoSolution.

    Off the infinity fiber of s the exponent is t(p) - s(p); on it, 0.
    """
    if s.zero:
        return Supernatural.of_zero() if t.zero else NoSolution
    if t.zero:
        return Supernatural.of_zero()
    if not leq(s, t):
        return NoSolution

    def diff(a, b):
        return 0 if a == INF else b - a

    return Supernatural(diff(s.default, t.default),
                        {p: diff(s(p), t(p)) for p in s._primes(t)})


def sn_arith(op, *args):
    if op == "mul":
        return reduce(mul, args)
    if op == "leq":
        return leq(*args)
    if op == "product":
        return sequence_product(*args)
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# prime sets and degree sets

@dataclass(frozen=True)
class PrimeSet:
    """Finite set of primes, or the complement of one (``cofinite=True``)."""

    primes: frozenset = frozenset()
    cofinite: bool = False

    def __contains__(self, p):
        return (p in self.primes) != self.cofinite

    @classmethod
    def parse(cls, text):
        """'2,3' or 'all' or 'all-5,7' (all primes except 5 and 7); '' is empty."""
        text = text.strip()
        if text.startswith("all"):
            rest = text[3:].lstrip("-\\ ")
            ex = [int(x) for x in rest.split(",") if x.strip()]
            return cls(frozenset(ex), True)
        ps = [int(x) for x in text.split(",") if x.strip()]
        for p in ps:
            if not is_prime(p):
                raise ParseError(f"{p} is not prime")
        return cls(frozenset(ps), False)

    def to_json(self):
        if self.cofinite:
            return {"cofinite": True, "excluded": sorted(self.primes)}
        return {"primes": sorted(self.primes)}


def degree_set_membership(x, P):
    """Integer k: k != 0 with all prime factors in P.  Supernatural t: the
    primes with positive exponent all lie in P (zero is never a member)."""
    if isinstance(x, Supernatural):
        if x.zero:
            return False
        if x.default > 0:
            # support is cofinite: P must be cofinite and miss none of it
            if not P.cofinite:
                return False
            return all(x(p) == 0 for p in P.primes)
        return all(p in P for p, e in x.exceptions.items() if e != 0)
    k = int(x)
    if k == 0:
        return False
    return all(p in P for p in factorize(k))


# ---------------------------------------------------------------------------
# types

def type_equiv(s, t):
    """Same infinity fiber and only finitely many disagreeing primes."""
    if s.zero or t.zero:
        return s.zero == t.zero
    return _type_key(s) == _type_key(t)


def _type_key(s):
    if s.zero:
        return ("zero",)
    if s.default == INF:
        fiber_complement = frozenset(p for p, e in s.exceptions.items() if e != INF)
        return (INF, fiber_complement)
    return (s.default, frozenset(p for p, e in s.exceptions.items() if e == INF))


class TypeClass:
    """The ~-class of a supernatural number."""

    __slots__ = ("rep",)

    def __init__(self, rep):
        self.rep = rep

    def __eq__(self, other):
        if not isinstance(other, TypeClass):
            return NotImplemented
        return type_equiv(self.rep, other.rep)

    def __hash__(self):
        return hash(_type_key(self.rep))

    @property
    def is_zero(self):
        return self.rep.zero

    def canonical(self):
        """Simplest representative: exceptions kept only where they change the fiber."""
        s = self.rep
        if s.zero:
            return s
        if s.default == INF:
            return Supernatural(INF, {p: 0 for p, e in s.exceptions.items() if e != INF})
        return Supernatural(s.default, {p: INF for p, e in s.exceptions.items() if e == INF})

    def __repr__(self):
        return f"[{self.canonical()!r}]"

    def to_json(self):
        return {"type": self.canonical().to_json(), "representative": self.rep.to_json()}


@dataclass(frozen=True)
class DegreeSequenceSpec:
    """Degrees prefix + cycle repeated forever."""

    prefix: tuple = ()
    cycle: tuple = (1,)

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(x) for x in self.prefix))
        object.__setattr__(self, "cycle", tuple(int(x) for x in self.cycle))
        if not self.cycle:
            raise ParseError("cycle must be non-empty")

    def degree(self, k):
        if k < len(self.prefix):
            return self.prefix[k]
        return self.cycle[(k - len(self.prefix)) % len(self.cycle)]

    def tail(self, k):
        """The spec with the first k degrees dropped."""
        if k <= len(self.prefix):
            return DegreeSequenceSpec(self.prefix[k:], self.cycle)
        r = (k - len(self.prefix)) % len(self.cycle)
        return DegreeSequenceSpec((), self.cycle[r:] + self.cycle[:r])

    def to_json(self):
        return {"prefix": list(self.prefix), "cycle": list(self.cycle)}

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(obj.get("prefix", ())), tuple(obj.get("cycle", (1,))))


def sequence_product(spec):
    """prod_k |deg_k| over the whole sequence."""
    if 0 in spec.cycle or 0 in spec.prefix:
        return Supernatural.of_zero()
    cyc = {}
    for d in spec.cycle:
        for p in factorize(d):
            cyc[p] = INF
    return mul(product(Supernatural.of_int(d) for d in spec.prefix), Supernatural(0, cyc))


def type_of_sequence(spec):
    """Type of the limit of a circle sequence with the given degrees."""
    if 0 in spec.cycle:
        return TypeClass(Supernatural.of_zero())
    n0 = 0
    for k, d in enumerate(spec.prefix):
        if d == 0:
            n0 = k + 1
    return TypeClass(sequence_product(spec.tail(n0)))


def type_of_map_data(sX, m0, sY, n0, f0_degree):
    """The multiplication induced by a map between two circle sequences.

    The caller vouches that f0 o u_{m0,inf} is within 1/2 turn of
    v_{n0,inf} o f; only the arithmetic is checked here.
    """
    x = sequence_product(sX.tail(m0))
    y = sequence_product(sY.tail(n0))
    target = mul(Supernatural.of_int(abs(f0_degree)), x)
    t = multiplication_solve(y, target)
    if t is NoSolution:
        raise IncoherentData("degree data do not divide", source=y.to_json(), target=target.to_json())
    return t
