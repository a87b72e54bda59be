"""Command line interface and the end-to-end decomposition pipeline.

Pipeline: reduce the input to its concise core, dispatch trivial shapes
directly (zero, scalar, matrix, R at or above the fiber bound), otherwise
run the chosen search on the core, then lift the witness back through the
reduction transforms.  The auto rule picks the 3-axis algorithm only when
its predicted cost exponent is strictly lower.

File formats (JSON, human-diffable):
  tensor  {"field": p, "dims": [n0, ...], "data": [row-major ints]}
  cpd     {"field": p, "rank": R, "factors": [factor d as n_d rows of R]}

Subcommands: gen, decompose, rank, verify, scramble, report.  Reports are
JSON on stdout; progress goes to stderr.  Exit codes: 0 found/true,
1 none/false, 2 input error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from math import prod
from typing import Optional

from .errors import CpdSearchError, SearchInputError
from .field import GF
from .matrix import Mat
from .tensor import Cpd, Tensor, cpd_verify
from .preprocess import concise_reduce, lift_cpd, rank_lower_bound, trivial_cpd
from .search_general import (SearchConfig, SearchOutcome, SearchStats,
                             search_general)
from .search_3d import search_3d
from .oracle import oracle_decompose
from . import instances

PROGRESS_INTERVAL = 10 ** 6

# ------------------------------------------------------------- file I/O

def tensor_to_obj(t: Tensor) -> dict:
    return {"field": t.field.p, "dims": list(t.dims), "data": list(t.data)}


def tensor_from_obj(obj) -> Tensor:
    try:
        f = GF(int(obj["field"]))
        dims = tuple(int(n) for n in obj["dims"])
        data = tuple(int(x) for x in obj["data"])
    except (KeyError, TypeError, ValueError) as e:
        raise SearchInputError(f"malformed tensor object: {e}")
    return Tensor(f, dims, data)


def cpd_to_obj(c: Cpd) -> dict:
    return {"field": c.field.p, "rank": c.rank,
            "factors": [[list(m.row(i)) for i in range(m.rows)]
                        for m in c.factors]}


def cpd_from_obj(obj) -> Cpd:
    try:
        f = GF(int(obj["field"]))
        rank_ = int(obj["rank"])
        factors = []
        for rows in obj["factors"]:
            factors.append(Mat.from_rows(
                f, [tuple(int(x) for x in row) for row in rows], cols=rank_))
    except (KeyError, TypeError, ValueError) as e:
        raise SearchInputError(f"malformed cpd object: {e}")
    c = Cpd(f, tuple(factors))
    if c.rank != rank_:
        raise SearchInputError(f"declared rank {rank_} != factor width {c.rank}")
    return c


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _emit(obj, path: Optional[str]):
    text = json.dumps(obj, indent=1)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# ------------------------------------------------------------- pipeline

def predicted_exponents(dims, R: int):
    """(general cost exponent, 3-axis cost exponent or None)."""
    n0 = dims[0]
    e_gen = min(R, sum(dims[2:])) + (R - n0) * sum(dims[1:])
    e_3d = None
    if len(dims) == 3:
        r_star = R // n0 + 1
        e_3d = (n0 + dims[2] + (R - n0 + 1 - r_star) * (dims[1] + dims[2])
                + r_star * r_star)
    return e_gen, e_3d


def _choose_algorithm(dims, R: int, algorithm: str) -> str:
    if algorithm != "auto":
        return algorithm
    if len(dims) == 3 and R - dims[0] >= 1:
        e_gen, e_3d = predicted_exponents(dims, R)
        if e_3d < e_gen:
            return "three-d"
    return "general"


def decompose_tensor(t: Tensor, R: int, algorithm: str = "auto",
                     config: Optional[SearchConfig] = None):
    """Decide rank(t) <= R; returns (SearchOutcome, path label).

    The witness CPD is lifted back to t (so cpd_verify(t, .) holds).
    algorithm: auto | general | three-d | oracle."""
    if R < 0:
        raise SearchInputError("rank threshold must be >= 0")
    if algorithm not in ("auto", "general", "three-d", "oracle"):
        raise SearchInputError(f"unknown algorithm {algorithm!r}")
    cfg = config or SearchConfig()
    t0 = time.perf_counter()
    red = concise_reduce(t)
    lb = rank_lower_bound(red)
    f = t.field

    def done(outcome: SearchOutcome, label: str):
        stats = SearchStats(outcome.stats.states_tested,
                            outcome.stats.good_pairs,
                            time.perf_counter() - t0)
        cpd = outcome.cpd
        if cpd is not None:
            cpd = lift_cpd(red, cpd)
        return SearchOutcome(cpd, stats), label

    if R < lb:
        return done(SearchOutcome(None, SearchStats()), "bound")
    core = red.reduced
    if red.is_zero:
        empty = Cpd(f, (Mat.zeros(f, 0, 0),))
        return done(SearchOutcome(empty, SearchStats()), "zero")
    if core.dims == (1,):
        scalar = Cpd(f, (Mat(f, 1, 1, (core.data[0],)),))
        return done(SearchOutcome(scalar, SearchStats()), "scalar")
    if core.ndim == 2:
        n = core.dims[0]
        m = Mat(f, n, core.dims[1], core.data)
        pair = Cpd(f, (m, Mat.identity(f, core.dims[1])))
        return done(SearchOutcome(pair, SearchStats()), "matrix")
    if R >= prod(core.dims[1:]):
        return done(SearchOutcome(trivial_cpd(core), SearchStats()), "fiber")
    label = _choose_algorithm(core.dims, R, algorithm)
    if label == "oracle":
        return done(oracle_decompose(core, R), "oracle")
    if label == "three-d":
        return done(search_3d(core, R, cfg), "three-d")
    return done(search_general(core, R, cfg), "general")


def tensor_rank(t: Tensor, algorithm: str = "auto",
                config: Optional[SearchConfig] = None):
    """Smallest R admitting a CPD, by running the pipeline for
    R = lower bound, +1, ... until Found.  Returns (R, SearchOutcome)
    with work counters accumulated across all attempts."""
    t0 = time.perf_counter()
    red = concise_reduce(t)
    states = 0
    pairs = 0
    R = rank_lower_bound(red)
    while True:
        out, _ = decompose_tensor(t, R, algorithm, config)
        states += out.stats.states_tested
        pairs += out.stats.good_pairs
        if out.found:
            stats = SearchStats(states, pairs, time.perf_counter() - t0)
            return R, SearchOutcome(out.cpd, stats)
        R += 1


# ------------------------------------------------------------ reporting

def _report_obj(outcome: SearchOutcome, rank_: Optional[int]) -> dict:
    obj = {"status": "found" if outcome.found else "none",
           "rank": rank_,
           "stats": {"states": outcome.stats.states_tested,
                     "elapsed_ms": round(outcome.stats.elapsed * 1000.0, 3)}}
    if outcome.found:
        obj["cpd"] = cpd_to_obj(outcome.cpd)
    return obj


def _search_config(args) -> SearchConfig:
    shard = None
    if getattr(args, "shard", None):
        try:
            i_s, n_s = args.shard.split("/")
            shard = (int(i_s), int(n_s))
        except ValueError:
            raise SearchInputError(f"bad --shard {args.shard!r}, expected i/n")
        if not (0 <= shard[0] < shard[1]):
            raise SearchInputError(f"bad --shard {args.shard!r}: need 0 <= i < n")
    return SearchConfig(count_states=getattr(args, "count_states", False),
                        shard=shard,
                        threads=getattr(args, "threads", 1),
                        progress_interval=PROGRESS_INTERVAL)


# ---------------------------------------------------------- subcommands

def cmd_gen(args) -> int:
    f = GF(args.field)
    if args.kind == "mmt":
        if len(args.params) != 3 or any(x < 1 for x in args.params):
            raise SearchInputError("gen mmt needs three positive ints: m k n")
        t = instances.mmt(*args.params, f)
    elif args.kind == "lysikov":
        if args.params:
            raise SearchInputError("gen lysikov takes no positional params")
        t = instances.lysikov(f)
    else:
        if not args.dims:
            raise SearchInputError("gen random needs --dims n0,n1,...")
        try:
            dims = tuple(int(x) for x in args.dims.split(","))
        except ValueError:
            raise SearchInputError(f"bad --dims {args.dims!r}")
        if not dims or any(n < 1 for n in dims):
            raise SearchInputError("bad --dims: lengths must be >= 1")
        t = instances.random_tensor(dims, f, args.seed)
    _emit(tensor_to_obj(t), args.output)
    return 0


def cmd_decompose(args) -> int:
    t = tensor_from_obj(_load_json(args.tensor))
    out, _ = decompose_tensor(t, args.R, args.algorithm, _search_config(args))
    rank_ = out.cpd.rank if out.found else None
    print(json.dumps(_report_obj(out, rank_)))
    if args.output and out.found:
        _emit(cpd_to_obj(out.cpd), args.output)
    return 0 if out.found else 1


def cmd_rank(args) -> int:
    t = tensor_from_obj(_load_json(args.tensor))
    R, out = tensor_rank(t, args.algorithm, _search_config(args))
    print(json.dumps(_report_obj(out, R)))
    if args.output:
        _emit(cpd_to_obj(out.cpd), args.output)
    return 0


def cmd_verify(args) -> int:
    t = tensor_from_obj(_load_json(args.tensor))
    c = cpd_from_obj(_load_json(args.cpd))
    ok = cpd_verify(t, c)
    if args.json:
        print(json.dumps({"ok": ok}))
    else:
        print("true" if ok else "false")
    return 0 if ok else 1


def cmd_scramble(args) -> int:
    t = tensor_from_obj(_load_json(args.tensor))
    res = instances.scramble(t, args.seed)
    _emit(tensor_to_obj(res.tensor), args.output)
    side = {"field": t.field.p,
            "transforms": [[list(m.row(i)) for i in range(m.rows)]
                           for m in res.transforms]}
    _emit(side, args.output + ".transforms.json")
    return 0


def _report_rows(full: bool, threads: int):
    f2 = GF(2)
    t222 = instances.mmt(2, 2, 2, f2)
    lys = instances.lysikov(f2)
    diag4 = Tensor(f2, (4, 4, 4),
                   tuple(1 if q in (0, 21, 42, 63) else 0 for q in range(64)))
    rows = [
        ("mmt(2,2,2)", t222, 6, "general", True),
        ("mmt(2,2,2)", t222, 7, "general", False),
        ("diagonal-4", diag4, 4, "three-d", False),
    ]
    if full:
        rows += [
            ("lysikov", lys, 7, "general", True),
            ("lysikov", lys, 7, "three-d", False),
            ("lysikov", lys, 8, "general", False),
        ]
    out = []
    for name, t, R, algorithm, count in rows:
        cfg = SearchConfig(count_states=count, threads=threads,
                           progress_interval=PROGRESS_INTERVAL)
        outcome, label = decompose_tensor(t, R, algorithm, cfg)
        out.append({
            "instance": name,
            "dims": "x".join(str(n) for n in t.dims),
            "field": t.field.p,
            "R": R,
            "algorithm": label,
            "count_states": int(count),
            "status": "found" if outcome.found else "none",
            "rank": outcome.cpd.rank if outcome.found else "",
            "states": outcome.stats.states_tested,
            "good_pairs": outcome.stats.good_pairs,
            "elapsed_ms": round(outcome.stats.elapsed * 1000.0, 1),
        })
    return out


def cmd_report(args) -> int:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(args.output, exist_ok=True)
    rows = _report_rows(args.full, args.threads)
    csv_path = os.path.join(args.output, "report.csv")
    fields = ["instance", "dims", "field", "R", "algorithm", "count_states",
              "status", "rank", "states", "good_pairs", "elapsed_ms"]
    with open(csv_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)

    labels = [f"{r['instance']}\nR={r['R']} {r['algorithm']}"
              + (" (count)" if r["count_states"] else "") for r in rows]
    for key, fname, title in (
            ("states", "states.png", "completion tests per run"),
            ("elapsed_ms", "elapsed.png", "wall time per run (ms)")):
        fig, ax = plt.subplots(figsize=(1.8 * len(rows) + 2, 4))
        vals = [max(r[key], 1) for r in rows]
        ax.bar(range(len(rows)), vals, color="#4878a8")
        ax.set_yscale("log")
        ax.set_xticks(range(len(rows)))
        ax.set_xticklabels(labels, fontsize=7)
        ax.set_title(title)
        fig.tight_layout()
        fig.savefig(os.path.join(args.output, fname), dpi=120)
        plt.close(fig)
    print(json.dumps({"csv": csv_path,
                      "figures": [os.path.join(args.output, "states.png"),
                                  os.path.join(args.output, "elapsed.png")],
                      "rows": len(rows)}))
    return 0


# --------------------------------------------------------------- parser

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cpdsearch",
        description="Exact tensor rank decision and CPD search over prime fields.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a benchmark tensor file")
    p.add_argument("kind", choices=["mmt", "lysikov", "random"])
    p.add_argument("params", nargs="*", type=int,
                   help="mmt: m k n; others: none")
    p.add_argument("--field", type=int, required=True, metavar="P")
    p.add_argument("--dims", help="random: comma-separated lengths")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    common = dict(algorithm=lambda p: p.add_argument(
        "--algorithm", default="auto",
        choices=["auto", "general", "three-d", "oracle"]))

    p = sub.add_parser("decompose", help="decide rank(T) <= R, emit witness")
    p.add_argument("tensor")
    p.add_argument("R", type=int)
    common["algorithm"](p)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--shard", metavar="I/N")
    p.add_argument("--count-states", action="store_true",
                   help="scan the whole stream even after a witness")
    p.add_argument("-o", "--output", help="write witness CPD JSON here")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("rank", help="smallest R admitting a CPD")
    p.add_argument("tensor")
    common["algorithm"](p)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-o", "--output", help="write witness CPD JSON here")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("verify", help="check a CPD file against a tensor file")
    p.add_argument("tensor")
    p.add_argument("cpd")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scramble", help="random invertible change of basis")
    p.add_argument("tensor")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_scramble)

    p = sub.add_parser("report", help="run benchmarks, write CSV and figures")
    p.add_argument("-o", "--output", required=True, metavar="DIR")
    p.add_argument("--full", action="store_true",
                   help="include the slower benchmark rows")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CpdSearchError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
