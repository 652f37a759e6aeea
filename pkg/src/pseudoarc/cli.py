"""Command line entry point: ``pseudoarc <group> <command> ...``.

Every command prints JSON on stdout (rationals as "num/den"). Domain errors are
printed as JSON on stderr with exit status 2; verification violations give
exit status 1.
"""
import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import circle as cm
from . import crooked as ck
from . import factor as fc
from . import game as gm
from . import interval as iv
from . import supernatural as sn
from .errors import DomainError, ParseError

CONFIG_ENV = "PSEUDOARC_CONFIG"


@dataclass
class Config:
    memory_bound: int = ck.MEMORY_BOUND
    primes: str = "all"          # prime universe: "all", "2,3" or "all-5,7"
    format: str = "json"
    seed: int = 0

    def __post_init__(self):
        if self.memory_bound <= 0:
            raise ParseError("memory_bound must be positive")
        if self.format not in ("json", "csv", "svg"):
            raise ParseError(f"unknown format {self.format!r}")
        sn.PrimeSet.parse(self.primes)

    def to_json(self):
        return asdict(self)

    @classmethod
    def from_json(cls, obj):
        return cls(**obj)

    @classmethod
    def load(cls, path=None):
        path = path or os.environ.get(CONFIG_ENV)
        if not path:
            return cls()
        return cls.from_json(json.loads(Path(path).read_text()))


def to_jsonable(x):
    if isinstance(x, Fraction):
        return iv.fmt(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if hasattr(x, "to_json"):
        return to_jsonable(x.to_json())
    return x


def emit(obj, out=None):
    text = json.dumps(to_jsonable(obj))
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# input helpers

def _read(path):
    return sys.stdin.read() if path == "-" else Path(path).read_text()


def load_simplicial(path):
    obj = json.loads(_read(path))
    if isinstance(obj, list):
        return iv.build_simplicial(max(obj), obj)
    return iv.SimplicialMap.from_json(obj)


def load_pl(path, bounded=True):
    text = _read(path)
    if text.lstrip().startswith("{"):
        return iv.PLMap.from_json(json.loads(text), bounded=bounded)
    return iv.PLMap.from_csv(text, bounded=bounded)


def load_circle(path):
    text = _read(path)
    if text.lstrip().startswith("{"):
        return cm.CircleMap.from_json(json.loads(text))
    return cm.CircleMap.from_csv(text)


def parse_supernatural(text):
    """JSON, or a product such as "2^inf*3", "1", "0"."""
    text = text.strip()
    if text.startswith("{"):
        return sn.Supernatural.from_json(json.loads(text))
    if text == "0":
        return sn.Supernatural.of_zero()
    exc = {}
    for part in text.replace("·", "*").split("*"):
        part = part.strip()
        if not part or part == "1":
            continue
        base, _, e = part.partition("^")
        e = sn._exp_parse(e) if e else 1
        for p, k in sn.factorize(int(base)).items():
            exc[p] = exc.get(p, 0) + k * e if e != sn.INF else sn.INF
    return sn.Supernatural(0, exc)


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()] if text else []


# ---------------------------------------------------------------------------
# commands

def cmd_crooked(a, cfg):
    if a.cmd == "gen":
        emit(ck.canonical_crooked(a.n, reversed=a.reversed, bound=cfg.memory_bound).tolist())
    elif a.cmd == "crn":
        emit([ck.crn(k) for k in range(a.n + 1)])
    elif a.cmd == "eval":
        emit({"n": a.n, "index": a.i, "value": ck.eval_point_iterative(a.n, a.i)})
    elif a.cmd == "check":
        chk = ck.is_crooked(load_simplicial(a.file))
        emit({"crooked": chk.crooked, "pair": list(chk.pair) if chk.pair else None})
    elif a.cmd == "decide":
        emit(ck.eps_crooked_decide(load_simplicial(a.file), iv.rational(a.eps)))
    elif a.cmd == "lewis-minc":
        lm = gm.lewis_minc(a.k)
        emit({"m": lm.m, "epsilon": lm.eps,
              "maps": [{k: v for k, v in d.items() if k not in ("map",)} for d in lm.maps]})
    return 0


def cmd_factorize(a, cfg):
    if a.cmd == "canonical":
        emit(fc.factor_through_canonical(load_simplicial(a.file)))
    elif a.cmd == "cofactor":
        emit(fc.cofactor_to_canonical(load_simplicial(a.file), bound=cfg.memory_bound))
    elif a.cmd == "eps":
        g = load_pl(a.g)
        plan = fc.crooked_factorize(g, iv.rational(a.eps))
        N = gm.least_crooked_order(plan.delta)
        res = plan.resolve(ck.certify_canonical(N, plan.delta))
        emit({"epsilon": plan.epsilon, "delta": plan.delta, "n": plan.n, "canonical": N,
              "bound": res.bound, "distance": res.distance})
    elif a.cmd == "amalgamate":
        am = fc.amalgamate_interval(load_pl(a.f), load_pl(a.g), iv.rational(a.eps))
        emit({"bound": am.bound, "distance": am.distance, "n": am.n})
    return 0


def cmd_circle(a, cfg):
    if a.cmd == "degree":
        emit({"degree": cm.degree(load_circle(a.file))})
    elif a.cmd == "dist":
        emit(cm.close_degree_check(load_circle(a.file1), load_circle(a.file2)))
    elif a.cmd == "crooked":
        c, s, chk = cm.crooked_circle_map(a.n, a.deg, zero_degree=a.zero)
        emit({"map": c, "avatar": s, "certified": chk.crooked})
    elif a.cmd == "rogers":
        emit(cm.rogers_witness_check(a.grid))
    return 0


def cmd_type(a, cfg):
    if a.cmd == "of":
        spec = sn.DegreeSequenceSpec(_ints(a.prefix), _ints(a.cycle) or [1])
        emit(sn.type_of_sequence(spec))
    elif a.cmd == "solve":
        t = sn.multiplication_solve(parse_supernatural(a.s), parse_supernatural(a.t))
        emit(t)
    elif a.cmd == "mul":
        emit(sn.mul(parse_supernatural(a.s), parse_supernatural(a.t)))
    elif a.cmd == "leq":
        emit({"leq": sn.leq(parse_supernatural(a.s), parse_supernatural(a.t))})
    elif a.cmd == "equiv":
        emit({"equivalent": sn.type_equiv(parse_supernatural(a.s), parse_supernatural(a.t))})
    elif a.cmd == "member":
        P = sn.PrimeSet.parse(a.primes)
        x = int(a.k) if a.k is not None else parse_supernatural(a.t)
        emit({"member": sn.degree_set_membership(x, P)})
    return 0


def _eve(spec):
    if spec == "identity":
        return gm.identity_strategy()
    if spec == "random":
        return gm.random_strategy()
    if spec.startswith("script:"):
        pairs = [p.split("=") for p in spec[len("script:"):].split(",") if p]
        return gm.scripted_degrees({int(k): int(v) for k, v in pairs})
    raise ParseError(f"unknown Eve strategy {spec!r}")


def _verify_file(args):
    path, checks, s_text = args
    tr = gm.GameTranscript.from_json(Path(path).read_text())
    s = parse_supernatural(s_text) if s_text else None
    v = gm.verify_transcript(tr, checks, s=s)
    return path, v.to_json()


def cmd_bm(a, cfg):
    if a.cmd == "play":
        seed = cfg.seed if a.seed is None else a.seed
        kw, extra = {}, {}
        if a.odd == "crooked":
            kw["max_n"] = a.max_n or 8
        elif a.odd == "solenoid":
            s = parse_supernatural(a.S or "1")
            P = sn.PrimeSet.parse(cfg.primes)
            if P.cofinite:
                enum = [p for p in gm.prime_enumeration(count=512) if p in P][:64]
            else:
                enum = gm.prime_enumeration(P.primes)
            kw.update(s=s, enumeration=enum, max_n=a.max_n or 5)
            extra["S"] = s.to_json()
        tr = gm.play(a.backend, _eve(a.eve), gm.odd_strategy(a.odd, **kw), a.rounds, seed=seed,
                     config=extra)
        emit(tr, a.out)
        return 0
    if a.cmd == "verify":
        checks = a.check or ["crooked_schedule"]
        jobs = [(p, checks, a.S) for p in a.files]
        if a.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(a.jobs) as ex:
                results = list(ex.map(_verify_file, jobs))
        else:
            results = [_verify_file(j) for j in jobs]
        ok = all(r["ok"] for _, r in results)
        if len(results) == 1:
            emit(results[0][1])
        else:
            emit({p: r for p, r in results})
        return 0 if ok else 1
    return 0


def cmd_figure(a, cfg):
    from . import figures as fg
    if a.what in ("c5", "canonical"):
        n = 5 if a.what == "c5" else a.n
        s = ck.canonical_crooked(n)
        svg = fg.canonical_svg(n)
        if a.svg:
            Path(a.svg).write_text(svg)
        else:
            sys.stdout.write(svg)
        if a.csv:
            Path(a.csv).write_text(fg.simplicial_csv(s))
        if a.plot:
            fg.plot_simplicial(s, a.plot, title=f"c_{n}")
    elif a.what == "rogers":
        out = a.plot or a.svg or "rogers.svg"
        text = fg.rogers_figure(a.grid, out)
        if a.csv:
            Path(a.csv).write_text(text)
        else:
            sys.stdout.write(text)
    elif a.what == "circle":
        c, _, _ = cm.crooked_circle_map(a.n, a.deg)
        fg.plot_circle_lift(c, a.plot or a.svg or "circle.svg")
        text = c.to_csv()
        if a.csv:
            Path(a.csv).write_text(text)
        else:
            sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser():
    p = argparse.ArgumentParser(prog="pseudoarc", description=__doc__.splitlines()[0])
    p.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    sub = p.add_subparsers(dest="group", required=True)

    c = sub.add_parser("crooked", help="canonical crooked maps and crookedness checks")
    cs = c.add_subparsers(dest="cmd", required=True)
    x = cs.add_parser("gen")
    x.add_argument("n", type=int)
    x.add_argument("--reversed", action="store_true")
    cs.add_parser("crn").add_argument("n", type=int)
    x = cs.add_parser("eval")
    x.add_argument("n", type=int)
    x.add_argument("i", type=int)
    cs.add_parser("check").add_argument("file")
    x = cs.add_parser("decide")
    x.add_argument("file")
    x.add_argument("--eps", required=True)
    cs.add_parser("lewis-minc").add_argument("k", type=int)

    f = sub.add_parser("factorize", help="factorization through canonical maps")
    fs = f.add_subparsers(dest="cmd", required=True)
    fs.add_parser("canonical").add_argument("file")
    fs.add_parser("cofactor").add_argument("file")
    x = fs.add_parser("eps")
    x.add_argument("--g", required=True, help="PL map as CSV or JSON")
    x.add_argument("--eps", required=True)
    x = fs.add_parser("amalgamate")
    x.add_argument("--f", required=True)
    x.add_argument("--g", required=True)
    x.add_argument("--eps", required=True)

    ci = sub.add_parser("circle", help="circle maps")
    cis = ci.add_subparsers(dest="cmd", required=True)
    cis.add_parser("degree").add_argument("file")
    x = cis.add_parser("dist")
    x.add_argument("file1")
    x.add_argument("file2")
    x = cis.add_parser("crooked")
    x.add_argument("--n", type=int, required=True)
    x.add_argument("--deg", type=int, default=1)
    x.add_argument("--zero", action="store_true", help="degree-0 pattern")
    cis.add_parser("rogers").add_argument("--grid", type=int, default=720)

    t = sub.add_parser("type", help="supernatural numbers and types")
    ts = t.add_subparsers(dest="cmd", required=True)
    x = ts.add_parser("of")
    x.add_argument("--prefix", default="")
    x.add_argument("--cycle", default="1")
    for name in ("solve", "mul", "leq", "equiv"):
        x = ts.add_parser(name)
        x.add_argument("s")
        x.add_argument("t")
    x = ts.add_parser("member")
    x.add_argument("--k")
    x.add_argument("--t")
    x.add_argument("--primes", required=True, help="'2,3', 'all' or 'all-5,7'")

    b = sub.add_parser("bm", help="Banach-Mazur games")
    bs = b.add_subparsers(dest="cmd", required=True)
    x = bs.add_parser("play")
    x.add_argument("--backend", choices=sorted(gm.BACKENDS), required=True)
    x.add_argument("--odd", choices=["crooked", "split", "solenoid", "identity"], required=True)
    x.add_argument("--eve", default="random", help="identity | random | script:MOVE=DEG,...")
    x.add_argument("--rounds", type=int, default=4)
    x.add_argument("--seed", type=int)
    x.add_argument("--S", help="type bound for solenoid games, e.g. 2^inf")
    x.add_argument("--max-n", type=int)
    x.add_argument("--out")
    x = bs.add_parser("verify")
    x.add_argument("files", nargs="+")
    x.add_argument("--check", action="append",
                   choices=["crooked_schedule", "splits_every_point", "type_budget"])
    x.add_argument("--S")
    x.add_argument("--jobs", type=int, default=1)

    g = sub.add_parser("figure", help="figures (SVG/PNG) with CSV data")
    g.add_argument("what", choices=["c5", "canonical", "rogers", "circle"])
    g.add_argument("--n", type=int, default=5)
    g.add_argument("--deg", type=int, default=1)
    g.add_argument("--grid", type=int, default=720)
    g.add_argument("--svg", help="exact SVG output (c5/canonical) or figure path")
    g.add_argument("--plot", help="matplotlib rendering (.svg, .png, .pdf)")
    g.add_argument("--csv", help="CSV data output")
    return p


COMMANDS = {"crooked": cmd_crooked, "factorize": cmd_factorize, "circle": cmd_circle,
            "type": cmd_type, "bm": cmd_bm, "figure": cmd_figure}


def main(argv=None):
    parser = build_parser()
    a = parser.parse_args(argv)
    try:
        cfg = Config.load(a.config)
        return COMMANDS[a.group](a, cfg)
    except DomainError as e:
        print(json.dumps(to_jsonable(e.to_json())), file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as e:
        print(json.dumps({"error": "InputError", "message": str(e)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
