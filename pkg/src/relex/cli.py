"""Command line: ``relex {group,tower,cayley,spectra,embed,detect,certify}``.

Exit codes: 0 success, 2 invalid input, 3 resource limit, 4 violated property.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__
from . import cache as K
from . import cayley as C
from . import detect as D
from . import embed as E
from . import groups as G
from . import kernels
from . import spectra as S
from . import tower as T
from .config import ExperimentConfig, child_seed, parse_range
from .errors import RelexError, ResourceLimit, ValidationError
from .report import clean, dumps, timestamp, write_json, write_jsonl

log = logging.getLogger("relex")

DEFAULTS = ExperimentConfig(family="sl2-surrogate").to_dict()
# compression profiles above this order switch to sampled pairs
EXHAUSTIVE_LIMIT = 4096
SAMPLED_PAIRS = 10 ** 6


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def _common(p, family=True, n=True):
    p.add_argument("--config", help="JSON experiment config (flags override it)")
    if family:
        p.add_argument("--family", choices=T.FAMILIES)
        p.add_argument("--lamp", choices=("z2", "z2n"))
    if n:
        p.add_argument("--n", help="level, range a..b or list a,b")
    p.add_argument("--cap", type=int, help="largest group order to enumerate")
    p.add_argument("--seed", type=int)
    p.add_argument("--output", "-o", help="report path (default: stdout)")
    p.add_argument("--cache-dir", help="cache directory (RELEX_CACHE_DIR overrides)")
    p.add_argument("--convention", choices=("ordered", "unordered"))
    p.add_argument("--count-loops", dest="count_loops", action="store_true", default=None)
    p.add_argument("--no-count-loops", dest="count_loops", action="store_false")
    p.add_argument("--lazy", action="store_true", default=None)


def build_parser():
    ap = _Parser(prog="relex", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"relex {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("group", help="construct and enumerate a family member")
    _common(p)
    p.add_argument("--m", type=int)
    p.add_argument("--emit", choices=("report", "cache"), default="report")

    p = sub.add_parser("tower", help="the 2-tower H_0, ..., H_levels")
    _common(p, family=False, n=False)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--levels", type=int, default=2)
    p.add_argument("--emit", choices=("report", "cache"), default="report")

    p = sub.add_parser("cayley", help="Cayley graph statistics and exports")
    _common(p)
    p.add_argument("--export", help="edge-list path (u v label)")
    p.add_argument("--format", choices=("edges", "dot", "csr"), default="edges")

    p = sub.add_parser("spectra", help="relative gaps, Poincare and Cheeger constants, interpolation")
    p.add_argument("what", choices=("relgap", "poincare", "cheeger", "interpolate", "curved"))
    _common(p)
    p.add_argument("--tol", type=float)
    p.add_argument("--method", choices=("auto", "dense", "lanczos"), default="auto")
    p.add_argument("--form", choices=("element", "partition", "far-pairs"), default="partition")
    p.add_argument("--y", type=int, help="element index for --form element")
    p.add_argument("--radius", type=int, default=2, help="distance threshold for --form far-pairs")
    p.add_argument("--graph", help="cycle:N, path:N or complete:N instead of a family")
    p.add_argument("--mode", choices=("exact", "alpha-exact", "sweep"), default="exact")
    p.add_argument("--alpha", type=float)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--theta", type=float)
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--modulus", default="sqrt", help="sqrt or power:a (Delta(eps) = eps^a)")

    p = sub.add_parser("embed", help="embeddings and their compression")
    p.add_argument("what", choices=("compression", "sandwich", "truncate"))
    _common(p)
    p.add_argument("--emb", choices=("wreath", "spectral", "truncated"), default="wreath")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--samples", type=int)
    p.add_argument("--csv", help="write the embedding table as CSV")

    p = sub.add_parser("detect", help="giant fibers and the subset-Poincare refuter")
    p.add_argument("what", choices=("fiber", "expander", "refute"))
    _common(p)
    p.add_argument("--expander-n", type=int, default=512)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--lam-target", type=float, default=0.1)
    p.add_argument("--trials", type=int)
    p.add_argument("--strict", action="store_true")

    p = sub.add_parser("certify", help="run acceptance checks 1-13")
    p.add_argument("--config", help=argparse.SUPPRESS)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", "-o")
    p.add_argument("--only", help="comma-separated check numbers")
    return ap


def resolve(args) -> dict:
    """Merge defaults < config file < explicit flags; RELEX_CACHE_DIR wins for the cache dir."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(ExperimentConfig.load(args.config).to_dict())
    for key in ("family", "lamp", "m", "convention", "lazy", "count_loops", "cap", "seed", "trials", "tol",
                "output", "cache_dir"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if getattr(args, "n", None) is not None:
        cfg["n"] = parse_range(args.n)
    env = os.environ.get("RELEX_CACHE_DIR")
    if env:
        cfg["cache_dir"] = env
    return cfg


def _conventions(cfg):
    return dict(convention=cfg["convention"], lazy=bool(cfg["lazy"]), count_loops=bool(cfg["count_loops"]))


def _instance(cfg, n):
    return T.box_family(cfg["family"], n, lamp=cfg["lamp"], m=cfg["m"], cap=cfg["cap"])


def _enumerate(cfg, n):
    inst = _instance(cfg, n)
    idx = None
    path = _cache_path(cfg, n)
    if path and os.path.exists(path) and isinstance(inst.rep, G.ArrayGroup):
        idx = K.load_group(path, inst.rep, gens=inst.gens, seed=cfg["seed"])
        log.info("loaded %s from cache", path)
    if idx is None:
        idx = inst.enumerate(cap=cfg["cap"])
    return inst, idx


def _cache_path(cfg, n):
    if not cfg.get("cache_dir"):
        return None
    return os.path.join(cfg["cache_dir"], f"{cfg['family']}-n{n}-{cfg['lamp']}.cache")


def _atomic_export(fn, path):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    os.close(fd)
    try:
        fn(tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


# ---------------------------------------------------------------------------
# subcommands


def cmd_group(args, cfg):
    rows = []
    for n in cfg["n"]:
        inst = _instance(cfg, n)
        row = dict(family=inst.family, n=n, log2_order=inst.log2_order, order=inst.order,
                   generators=list(inst.gen_names), surrogate=inst.surrogate, notes=inst.notes)
        if inst.enumerable:
            inst, idx = _enumerate(cfg, n)
            row.update(order=idx.order, order_verified=True, diameter=idx.diameter,
                       ball_sizes=idx.ball_sizes().tolist(), labels=len(idx.label_names))
            if args.emit == "cache":
                path = _cache_path(cfg, n) or f"{inst.family}-n{n}.cache"
                K.save_group(path, idx, inst.family, dict(n=n, lamp=cfg["lamp"], m=cfg["m"]))
                row["cache"] = path
        else:
            row["order_verified"] = False
        rows.append(row)
    return dict(instances=rows)


def cmd_tower(args, cfg):
    t = T.build_tower(args.m, args.levels, cfg["cap"])
    rows = []
    for k, rep in enumerate(t.reps):
        row = dict(level=k, log2_order=rep.log2_order)
        if k < len(t.indices) and t.indices[k] is not None:
            row["order"] = t.indices[k].order
            if k + 1 < len(t.reps):
                row["rank_next"] = T.rank(t.indices[k].order, args.m)
        rows.append(row)
    out = dict(m=args.m, levels=args.levels, tower=rows)
    if args.emit == "cache":
        # Schreier data of the top level over the largest enumerated base
        level = max(k for k, ix in enumerate(t.indices) if ix is not None)
        sd = T.SchreierData.build(t.indices[level], args.m)
        d = cfg.get("cache_dir") or "."
        path = os.path.join(d, f"h-tower-m{args.m}-level{level + 1}.cache")
        K.save_tower(path, sd, dict(m=args.m, level=level + 1))
        out["cache"] = path
    return out


def cmd_cayley(args, cfg):
    rows = []
    for n in cfg["n"]:
        inst, idx = _enumerate(cfg, n)
        cay = C.build_cayley(idx, count_loops=cfg["count_loops"])
        row = dict(family=inst.family, n=n, order=cay.n, degree=cay.regular_degree(),
                   loop_labels=len(cay.loop_labels), connected=cay.connected, diameter=idx.diameter)
        if cay.n <= 1 << 14:
            row["girth"] = cay.girth()
        if args.export:
            path = args.export if len(cfg["n"]) == 1 else f"{args.export}.n{n}"
            fn = dict(edges=cay.export_edges, dot=cay.export_dot, csr=cay.export_csr)[args.format]
            _atomic_export(fn, path)
            row["export"] = path
        rows.append(row)
    return dict(instances=rows)


def _small_graph(spec):
    try:
        kind, size = spec.split(":")
        size = int(size)
    except ValueError as exc:
        raise ValidationError(f"--graph expects kind:N, got {spec!r}") from exc
    makers = dict(cycle=C.cycle_graph, path=C.path_graph, complete=C.complete_graph)
    if kind not in makers:
        raise ValidationError(f"unknown graph kind {kind!r}")
    return makers[kind](size)


def _modulus(text):
    if text == "sqrt":
        return math.sqrt
    if text.startswith("power:"):
        a = float(text.split(":", 1)[1])
        return lambda e: e ** a
    raise ValidationError("--modulus must be sqrt or power:a")


def cmd_spectra(args, cfg):
    if args.what == "interpolate":
        if args.theta is None:
            raise ValidationError("interpolate needs --theta")
        return S.interpolation_n0(args.p, args.theta, args.c).to_dict()
    if args.what == "curved":
        if args.theta is None:
            raise ValidationError("curved needs --theta")
        return S.curved_n0(_modulus(args.modulus), args.theta, args.c).to_dict()
    if args.what == "cheeger" and args.graph:
        return dict(graph=args.graph, **S.cheeger(_small_graph(args.graph), args.mode, args.alpha).to_dict())
    rows = []
    for n in cfg["n"]:
        inst, idx = _enumerate(cfg, n)
        cay = C.build_cayley(idx, count_loops=cfg["count_loops"])
        row = dict(family=inst.family, n=n, order=idx.order, **_conventions(cfg))
        if args.what == "relgap":
            H = inst.normal_members(idx)
            rep = S.relative_gap(cay, H, lazy=cfg["lazy"], method=args.method, tol=cfg["tol"], seed=cfg["seed"])
            row.update(rep.to_dict())
        elif args.what == "poincare":
            H = inst.normal_members(idx)
            if args.form == "element":
                y = args.y if args.y is not None else int(inst.normal_generator_indices(idx)[0])
                spec = S.FormSpec("element", y=y, convention=cfg["convention"])
            elif args.form == "partition":
                spec = S.FormSpec("partition", partition=C.coset_partition(idx, H), convention=cfg["convention"])
            else:
                spec = S.FormSpec("measure", measure=S.measure_on_far_pairs(cay.all_pairs(), args.radius),
                                  convention=cfg["convention"])
            row.update(form=args.form, **S.poincare_constant(cay, spec).to_dict())
        else:
            row.update(S.cheeger(cay, args.mode, args.alpha).to_dict())
        rows.append(row)
    return dict(instances=rows)


def _embedding(args, inst, idx, cay):
    rep = inst.rep
    if args.emb == "spectral":
        return E.spectral_embedding(cay, min(args.dim, cay.n - 1))
    if not hasattr(rep, "lamp_rows"):
        raise ValidationError("--emb wreath/truncated needs a wreath family")
    psi = E.wreath_euclidean(rep.lamp_rows(idx.elements), int(rep.A.radices[0]))
    if args.emb == "wreath":
        return psi
    N = inst.normal_members(idx)
    r = max(1, int(math.ceil(np.sqrt(np.sum(psi.coords[N] ** 2, axis=1)).max())))
    table, _ = E.truncate_fiberwise(cay, psi.coords, N, r)
    return table


def cmd_embed(args, cfg):
    rows = []
    for n in cfg["n"]:
        inst, idx = _enumerate(cfg, n)
        cay = C.build_cayley(idx, count_loops=cfg["count_loops"])
        row = dict(family=inst.family, n=n, order=idx.order, emb=args.emb)
        if args.what == "sandwich":
            rep = inst.rep
            if not hasattr(rep, "lamp_rows"):
                raise ValidationError("sandwich needs a wreath family")
            lamps = rep.lamp_rows(idx.elements)
            mod = int(rep.A.radices[0])
            pairs = None
            if args.samples:
                rng = np.random.default_rng(child_seed(cfg["seed"], 9, n))
                pairs = rng.integers(idx.order, size=(2, args.samples))
            row.update(E.sandwich_check(E.wreath_euclidean(lamps, mod), lamps, mod, pairs=pairs).to_dict())
        else:
            table = _embedding(args, inst, idx, cay)
            samples = args.samples or (SAMPLED_PAIRS if cay.n > EXHAUSTIVE_LIMIT else None)
            # sampled pairs use d(g, h) = |g^-1 h| instead of an all-pairs matrix
            D_ = cay.dist if samples else cay.all_pairs()
            prof = E.compression_profile(table, D_, samples=samples, seed=cfg["seed"])
            row.update(dim=table.dim, lipschitz=E.edge_stretch(cay, table.coords), profile=prof.to_list(), mode=prof.mode,
                       pairs=prof.pairs)
            if args.csv:
                path = args.csv if len(cfg["n"]) == 1 else f"{args.csv}.n{n}"
                _atomic_export(table.to_csv, path)
                row["csv"] = path
        rows.append(row)
    return dict(instances=rows)


def cmd_detect(args, cfg):
    seed = cfg["seed"]
    if args.what == "expander":
        X = D.random_expander(args.expander_n, args.d, args.lam_target, seed=seed)
        return X.to_dict()
    if args.what == "refute":
        fam = cfg["family"] if args.family else "sl2-wreath-haagerup"
        ns = cfg["n"] if args.n else [1, 2]
        rows = []
        for n in ns:
            a = D.refuter_instance(n, lamp=cfg["lamp"] if args.lamp else "z2", family=fam)
            rows.append(dict(family=fam, n=n, order=a.graph.n, r=a.r, value=a.value, phi_lipschitz=a.phi.K))
        vals = [r["value"] for r in rows]
        return dict(instances=rows, strictly_increasing=all(b > a for a, b in zip(vals, vals[1:])))
    n = cfg["n"][0]
    inst, idx = _enumerate(cfg, n)
    st = D.fiber_setup(inst, idx)
    trials = cfg["trials"] if args.trials is None else args.trials
    out = []
    for t in range(trials):
        s = child_seed(seed, 11, t)
        X = D.random_expander(args.expander_n, args.d, args.lam_target, seed=s)
        h = D.bfs_walk_map(X.graph, st.cay, seed=s)
        r = D.find_fiber(X, h, st.cay, st.N, st.psi, st.q_of, st.q_dist, st.phi, st.n_dist, strict=args.strict)
        out.append({"seed": s, "|X|": X.n, "bound": r.bound, "fiber_size": r.size, "fiber_diam": r.fiber_diameter,
                    "y": r.y, "measured_bound": r.measured_bound, "r": r.r, "r_prime": r.r_prime,
                    "degenerate": r.degenerate})
    return dict(jsonl=out)


def cmd_certify(args, cfg):
    from . import acceptance

    nums = [int(x) for x in args.only.split(",")] if args.only else None
    if nums and any(not 1 <= k <= 13 for k in nums):
        raise ValidationError("certify runs checks 1-13")
    t0 = time.perf_counter()
    started = timestamp()

    def progress(res):
        print(res.line(), file=sys.stderr)

    results = acceptance.run_checks(cfg["seed"], nums, progress=progress)
    return dict(
        checks=[r.to_dict() for r in results],
        passed=all(r.passed for r in results),
        backend=kernels.BACKEND,
        timestamp=started,
        timing=dict({str(r.number): r.seconds for r in results}, total=time.perf_counter() - t0),
    )


COMMANDS = dict(group=cmd_group, tower=cmd_tower, cayley=cmd_cayley, spectra=cmd_spectra, embed=cmd_embed,
                detect=cmd_detect, certify=cmd_certify)


def run(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            logging.getLogger("relex").setLevel(logging.INFO)
        cfg = resolve(args)
        t0 = time.perf_counter()
        body = COMMANDS[args.command](args, cfg)
        failed = args.command == "certify" and not body["passed"]
        if args.command != "certify":
            body = dict(command=args.command, version=__version__, config=_echo(cfg), **_conventions(cfg), **body,
                        timestamp=timestamp(), wall_clock_s=time.perf_counter() - t0)
        else:
            body = dict(command="certify", version=__version__, seed=cfg["seed"], **_conventions(cfg), **body)
        _emit(body, cfg.get("output"))
        return 4 if failed else 0
    except RelexError as exc:
        msg = str(exc)
        if isinstance(exc, ResourceLimit) and exc.largest_feasible is not None:
            msg += f" (largest feasible n = {exc.largest_feasible})"
        print(f"relex: error: {msg}", file=sys.stderr)
        return exc.exit_code
    except KeyboardInterrupt:  # pragma: no cover
        return 130


def _echo(cfg):
    return {k: v for k, v in cfg.items() if k != "output"}


def _emit(body, path):
    rows = body.pop("jsonl", None)
    if rows is not None:
        if path:
            write_jsonl(path, rows)
        else:
            for r in rows:
                sys.stdout.write(json.dumps(clean(r), sort_keys=True) + "\n")
        return
    if path:
        write_json(path, body)
    else:
        sys.stdout.write(dumps(body))


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
