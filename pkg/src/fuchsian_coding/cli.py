"""Command-line entry point: ``fuchsian-coding <subcommand> ...``.

Exit codes: 0 ok, 1 verification failure, 2 usage or input error.
"""

import argparse
import csv
import io
import sys
from dataclasses import dataclass

import numpy as np

from . import coding as cd
from . import dynamics as dy
from . import oracle as orc
from . import parry as pa
from . import suites
from .scheme import CATALOG, SchemeError, load_scheme, validate_scheme

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    scheme: str
    n: int
    radius: int
    action: str
    out: str
    csv: str
    tol: float
    seed: int
    suite: list
    audit: bool
    words: bool
    word: str = None
    svg: str = None


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _scheme(cfg):
    try:
        return load_scheme(cfg.scheme)
    except (OSError, SchemeError, ValueError) as exc:
        raise UsageError(f"cannot load scheme {cfg.scheme!r}: {exc}") from None


def _coding(cfg):
    s = _scheme(cfg)
    rep = validate_scheme(s)
    if not rep.ok:
        raise UsageError("scheme is invalid:\n" + rep.to_text())
    return cd.build_coding(s)


def _table(rows, header):
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    fmt = lambda r: "  ".join(str(x).ljust(w) for x, w in zip(r, widths)).rstrip()
    return "\n".join([fmt(header), fmt(["-" * w for w in widths])] + [fmt(r) for r in rows]) + "\n"


def _csv(rows, header):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# -- subcommands ---------------------------------------------------------------

def cmd_validate(cfg):
    s = _scheme(cfg)
    rep = validate_scheme(s)
    print(rep.to_text())
    return EXIT_OK if rep.ok else EXIT_FAIL


def coding_summary(c):
    pd = pa.parry_for(c)
    counts = c.counts_by_kind()
    return {
        "scheme": c.scheme.name,
        "states": len(c),
        "counts_by_kind": {k: v for k, v in counts.items() if v},
        "start": len(c.start_set),
        "final": len(c.final_set),
        "reversible": cd.check_reversibility(c),
        "strongly_connected": cd.strongly_connected(c),
        "period": cd.period(c),
        "positivity_index": cd.positivity_index(c),
        "lambda": round(float(pd.lam), 12),
    }


def cmd_coding(cfg):
    c = _coding(cfg)
    summ = coding_summary(c)
    rows = [[k, v] for k, v in summ["counts_by_kind"].items()] + [["total", summ["states"]]]
    text = _table(rows, ["type", "states"])
    for k in ("start", "final", "reversible", "strongly_connected", "period", "positivity_index", "lambda"):
        text += f"{k}: {summ[k]}\n"
    sys.stdout.write(text)
    if cfg.csv:
        _emit(_csv(rows, ["type", "states"]), cfg.csv)
    if cfg.out:
        _emit(c.to_json() + "\n", cfg.out)
    ok = summ["reversible"] and summ["strongly_connected"] and summ["period"] == 1
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sphere(cfg):
    c = _coding(cfg)
    name = c.scheme.name
    n_max = cfg.n or 5
    try:
        real = orc.realize_group(name)
    except orc.OracleError:
        real = None
    rows, ok = [], True
    if real is None:
        print(f"# no geometric oracle for {name}: counts-only mode", file=sys.stderr)
        rows = [[n, c.path_count(n), "", ""] for n in range(1, n_max + 1)]
    else:
        cap = orc.MAX_RADIUS.get(name)
        if cap is not None and n_max > cap:
            raise UsageError(f"--n {n_max} beyond the oracle range {cap} for {name}")
        ball = orc.cayley_ball(real, n_max)
        sizes = ball.sphere_sizes()
        for n in range(1, n_max + 1):
            k = c.path_count(n)
            rows.append([n, k, sizes[n], str(k == sizes[n]).lower()])
            ok = ok and k == sizes[n]
        if cfg.words:
            listing = [[int(i), int(ball.distance[i]), "".join(ball.word(i))] for i in range(len(ball))]
            _emit(_csv(listing, ["element_id", "distance", "word"]), cfg.out or "-")
            return EXIT_OK if ok else EXIT_FAIL
    _emit(_csv(rows, ["n", "coded_count", "oracle_count", "equal"]), cfg.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_parry(cfg):
    c = _coding(cfg)
    pd = pa.parry_for(c)
    rows = [[str(st), f"{pd.h[i]:.15g}", f"{pd.alpha[i]:.15g}", f"{pd.stationary[i]:.15g}"]
            for i, st in enumerate(c.states)]
    print(f"# lambda = {pd.lam:.15g}, iterations = {pd.iterations}", file=sys.stderr)
    _emit(_csv(rows, ["state", "h", "alpha", "p"]), cfg.out)
    d1, d2 = pa.parry_inv_deviation(pd, c.involution)
    return EXIT_OK if max(d1, d2) <= (cfg.tol or 1e-12) else EXIT_FAIL


def _action(cfg, s):
    name = cfg.action or "trivial"
    try:
        if name in dy.ACTIONS:
            return dy.load_catalog_action(name, s)
        return dy.load_action(s, name)
    except (OSError, dy.ActionError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot load action {name!r}: {exc}") from None


def cmd_simulate(cfg):
    c = _coding(cfg)
    a = _action(cfg, c.scheme)
    m = dy.MarkovSystem(a, c)
    rng = np.random.default_rng(cfg.seed)
    f = rng.random(a.size)
    rows = dy.convergence_experiment(m, f, cfg.n or 5)
    _emit(dy.convergence_csv(rows), cfg.out)
    return EXIT_OK


def cmd_verify(cfg):
    names = cfg.suite or list(suites.QUICK)
    if names == ["all"]:
        names = list(suites.SUITES)
    unknown = [n for n in names if n not in suites.SUITES]
    if unknown:
        raise UsageError(f"unknown suite(s) {unknown}; choose from {sorted(suites.SUITES)} or all")
    ok = True
    for n in names:
        r = suites.SUITES[n]()
        print(r.line(), flush=True)
        ok = ok and r.ok
    return EXIT_OK if ok else EXIT_FAIL


def cmd_oracle(cfg):
    s = _scheme(cfg)
    try:
        real = orc.realize_group(s.name)
        ball = orc.cayley_ball(real, cfg.radius or 4)
    except orc.OracleError as exc:
        raise UsageError(str(exc)) from None
    if cfg.audit:
        try:
            dev = real.relator_audit()
        except orc.OracleError as exc:
            print(f"relator audit failed: {exc}", file=sys.stderr)
            return EXIT_FAIL
        print(f"# relator audit: max deviation {dev:.3e}", file=sys.stderr)
        print(f"# separation: {orc.separation_audit(ball):.6f}", file=sys.stderr)
    if cfg.word is not None:
        from .walker import Tessellation, thick_path_svg

        word = tuple(cfg.word)
        if any(e not in s.labels for e in word):
            raise UsageError(f"word {cfg.word!r} uses unknown labels")
        try:
            ball.dist_of_key(real.key(word))
        except orc.OracleError:
            raise UsageError(f"word {cfg.word!r} lies outside the ball of radius {ball.radius}") from None
        tp = orc.brute_thickened(real, ball, (), word)
        _emit(tp.to_json() + "\n", cfg.out)
        if cfg.svg:
            _emit(thick_path_svg(tp, Tessellation(s, real.key)), cfg.svg)
        return EXIT_OK
    rows = [[int(i), int(ball.distance[i]), "".join(ball.word(i))] for i in range(len(ball))]
    _emit(_csv(rows, ["element_id", "distance", "word"]), cfg.out)
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "coding": cmd_coding,
    "sphere": cmd_sphere,
    "verify": cmd_verify,
    "parry": cmd_parry,
    "simulate": cmd_simulate,
    "oracle": cmd_oracle,
}


def build_parser():
    p = argparse.ArgumentParser(prog="fuchsian-coding",
                                description="Symmetric Markov coding of Fuchsian groups.")
    p.add_argument("subcommand", choices=sorted(COMMANDS))
    src = p.add_mutually_exclusive_group()
    src.add_argument("--scheme", help="scheme JSON file or catalog name")
    src.add_argument("--catalog", choices=CATALOG, help="catalog scheme")
    p.add_argument("--n", type=int, default=None, help="length / radius bound")
    p.add_argument("--radius", type=int, default=None, help="oracle ball radius")
    p.add_argument("--action", default=None, help="catalog action name or action JSON file")
    p.add_argument("--out", default=None, help="output path ('-' for stdout)")
    p.add_argument("--csv", default=None, help="also write a CSV summary here")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--suite", action="append", default=None,
                   help="verify suite (repeatable), or 'all'")
    p.add_argument("--audit", action="store_true", help="oracle: print relator and separation audits")
    p.add_argument("--words", action="store_true", help="sphere: list ball elements with words")
    p.add_argument("--word", default=None, help="oracle: print the thickened path from R to wR")
    p.add_argument("--svg", default=None, help="oracle --word: write a schematic level diagram")
    return p


def parse_config(argv):
    ns = build_parser().parse_args(argv)
    scheme = ns.scheme or ns.catalog or CATALOG[1]
    for k in ("n", "radius"):
        v = getattr(ns, k)
        if v is not None and v < 1:
            raise UsageError(f"--{k} must be positive")
    return RunConfig(ns.subcommand, scheme, ns.n, ns.radius, ns.action, ns.out, ns.csv,
                     ns.tol, ns.seed, ns.suite, ns.audit, ns.words, ns.word, ns.svg)


def main(argv=None):
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[cfg.subcommand](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
