"""Command-line front end.

    graphprod words --graph g.json --word a,b,a [--against b,a]
    graphprod fock  --graph g.json --vertices v.json --cutoff 3 --report moments
    graphprod rd    --preset z2free3 --radius 12 --k 1

Every option can also come from a JSON file passed with ``--config``; keys are
the option names with dashes replaced by underscores, and flags given on the
command line win.  ``graph`` and ``vertices`` in a config may be inline objects
or paths relative to the config file.

Exit codes: 0 success, 2 unparsable input, 3 domain error, 4 budget exceeded.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .errors import BudgetError, ConfigError, NotEquivalentError
from .expectations import (
    commutation_suite,
    freeness_check,
    intersection_check,
    intersection_csv,
    intersection_sweep,
    modular_spectrum_csv,
    moment_suite,
    suite_csv,
)
from .fock import FockSpace
from .io import graph_from_dict, groups_from_vertices, load_graph, read_json, vertices_from_dict
from .rd import PRESETS, custom_preset, preset, run_experiment
from .words import is_reduced, normalize, reduce, sigma

EXIT_OK, EXIT_PARSE, EXIT_DOMAIN, EXIT_BUDGET = 0, 2, 3, 4
REPORTS = ("moments", "commutators", "freeness", "intersection", "modular-spectrum")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="graphprod", description="Graph products of finite-dimensional algebras.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="JSON file with option values")
        p.add_argument("--out", help="write output here instead of stdout")

    w = sub.add_parser("words", help="normal form, reducedness and letter matching")
    common(w)
    w.add_argument("--graph")
    w.add_argument("--word", help="comma-separated vertex names")
    w.add_argument("--against", help="second word for the letter-matching permutation")

    f = sub.add_parser("fock", help="numerical suites on the truncated Fock space (CSV)")
    common(f)
    f.add_argument("--graph")
    f.add_argument("--vertices")
    f.add_argument("--cutoff", type=int)
    f.add_argument("--report", choices=REPORTS)
    f.add_argument("--modular-spectrum", action="store_const", const=True, default=None,
                   help="shorthand for --report modular-spectrum")
    f.add_argument("--instances", "--samples", dest="instances", type=int)
    f.add_argument("--seed", type=int)
    f.add_argument("--vertex", help="vertex for the freeness report")
    f.add_argument("--max-reach", type=int)
    f.add_argument("--first", help="first vertex subset for the intersection report")
    f.add_argument("--second", help="second vertex subset for the intersection report")

    r = sub.add_parser("rd", help="compressed convolution norm tables (CSV)")
    common(r)
    r.add_argument("--preset", choices=PRESETS)
    r.add_argument("--graph", help="graph of finite groups instead of a preset")
    r.add_argument("--vertices")
    r.add_argument("--radius", "--R", dest="radius", type=int)
    r.add_argument("--k", help="support lengths, comma-separated")
    r.add_argument("--l", help="column shells, comma-separated")
    r.add_argument("--m", help="row shells, comma-separated")
    r.add_argument("--trials", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--orders", help="cyclic orders for the clique and free presets")
    return ap


DEFAULTS = {
    "words": {"against": None},
    "fock": {"report": "moments", "instances": None, "seed": 0, "vertex": None, "max_reach": None,
             "first": None, "second": None, "modular_spectrum": False},
    "rd": {"preset": None, "graph": None, "vertices": None, "radius": None, "k": None, "l": None,
           "m": None, "trials": 64, "seed": 0, "orders": None},
}


def _merge_config(args: argparse.Namespace) -> tuple[dict, Path]:
    opts = {k: v for k, v in vars(args).items() if k not in ("config", "command")}
    base = Path.cwd()
    if args.config:
        cfg = read_json(args.config)
        if not isinstance(cfg, dict):
            raise ConfigError("config: expected a JSON object")
        base = Path(args.config).resolve().parent
        for key, value in cfg.items():
            if key not in opts:
                raise ConfigError(f"config: unknown option {key!r} for '{args.command}'")
            if opts[key] is None:
                opts[key] = value
    for key, value in DEFAULTS.get(args.command, {}).items():
        if opts.get(key) is None:
            opts[key] = value
    return opts, base


def _require(opts, key):
    if opts.get(key) is None:
        raise ConfigError(f"missing required option --{key.replace('_', '-')}")
    return opts[key]


def _int(opts, key, minimum=None):
    value = opts.get(key)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        try:
            value = int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"--{key.replace('_', '-')} must be an integer") from None
    if minimum is not None and value < minimum:
        raise ConfigError(f"--{key.replace('_', '-')} must be at least {minimum}")
    return value


def _list(value, cast=str) -> list | None:
    if value is None:
        return None
    items = value if isinstance(value, list) else [t for t in str(value).split(",") if t.strip() != ""]
    try:
        return [cast(t.strip() if isinstance(t, str) else t) for t in items]
    except (TypeError, ValueError):
        raise ConfigError(f"cannot parse the list {value!r}") from None


def _graph(opts, base):
    src = _require(opts, "graph")
    return graph_from_dict(src) if isinstance(src, dict) else load_graph(base / src)


def _vertices(opts, base, graph):
    src = _require(opts, "vertices")
    return vertices_from_dict(src if isinstance(src, dict) else read_json(base / src), graph)


def _word(graph, value, what):
    letters = _list(value) or []
    unknown = [v for v in letters if v not in graph.vertices]
    if unknown:
        raise ConfigError(f"{what}: {unknown!r} are not vertices of the graph")
    return tuple(letters)


def _show(w) -> str:
    return ",".join(map(str, w)) if w else "(empty)"


def cmd_words(opts, base) -> str:
    g = _graph(opts, base)
    w = _word(g, _require(opts, "word"), "--word")
    lines = [f"minimal: {_show(normalize(g, w))}; reduced: {str(is_reduced(g, w)).lower()}"]
    if opts.get("against") is not None:
        w2 = _word(g, opts["against"], "--against")
        r1, r2 = reduce(g, w), reduce(g, w2)
        perm = sigma(g, r1, r2)
        lines.append(f"sigma: {_show(r1)} -> {_show(r2)}: {_show(perm.mapping)}")
    return "\n".join(lines) + "\n"


def cmd_fock(opts, base) -> str:
    g = _graph(opts, base)
    algebras = _vertices(opts, base, g)
    cutoff = _int(opts, "cutoff", 0)
    if cutoff is None:
        raise ConfigError("missing required option --cutoff")
    seed = _int(opts, "seed", 0)
    instances = _int(opts, "instances", 1)
    report = "modular-spectrum" if opts.get("modular_spectrum") else opts["report"]
    if report not in REPORTS:
        raise ConfigError(f"unknown report {report!r}")
    space = FockSpace(g, algebras, cutoff)
    if report == "moments":
        return suite_csv(moment_suite(space, instances or 50, seed), "vacuum_moment_of_reduced_operator")
    if report == "commutators":
        return suite_csv(commutation_suite(space, instances or 200, seed), "commutation_residual")
    if report == "freeness":
        v = opts.get("vertex")
        v = g.vertices[0] if v is None else _word(g, [str(v)], "--vertex")[0]
        return freeness_check(space, v, instances or 500, seed, _int(opts, "max_reach", 2)).to_csv()
    if report == "intersection":
        first, second = opts.get("first"), opts.get("second")
        if first is None and second is None:
            return intersection_csv(space, intersection_sweep(space, instances or 3, seed))
        V0 = _word(g, _require(opts, "first"), "--first")
        V1 = _word(g, _require(opts, "second"), "--second")
        return intersection_csv(space, [intersection_check(space, V0, V1, instances or 10, seed,
                                                           reconstruct=True)])
    return modular_spectrum_csv(space)


def cmd_rd(opts, base) -> str:
    radius = _int(opts, "radius", 1)
    if opts.get("graph") is not None:
        if opts.get("preset") is not None:
            raise ConfigError("give either --preset or --graph, not both")
        g = _graph(opts, base)
        groups = groups_from_vertices(_vertices(opts, base, g))
        if radius is None:
            raise ConfigError("--radius is required with --graph")
        p = custom_preset(g, groups, radius)
    else:
        name = _require(opts, "preset")
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}")
        p = preset(name, radius, _list(opts.get("orders"), int))
    ks, ls, ms = (_list(opts.get(key), int) for key in ("k", "l", "m"))
    for key, values in (("k", ks), ("l", ls), ("m", ms)):
        if values is not None and any(x < 0 for x in values):
            raise ConfigError(f"--{key} values must be nonnegative")
    trials = _int(opts, "trials", 1)
    seed = _int(opts, "seed", 0)
    exp = run_experiment(p, trials, seed, ks, ls, ms)
    print(f"clique hypothesis: {p.clique_hypothesis()}", file=sys.stderr)
    return exp.to_csv()


COMMANDS = {"words": cmd_words, "fock": cmd_fock, "rd": cmd_rd}


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.buffer.write(text.encode("utf-8"))
        sys.stdout.flush()


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        opts, base = _merge_config(args)
        _emit(COMMANDS[args.command](opts, base), opts.get("out"))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NotEquivalentError as exc:
        print(f"not equivalent: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
