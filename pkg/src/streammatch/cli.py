"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from contextlib import contextmanager
from typing import Optional, Sequence

from . import __version__
from .bench import format_table, per_edge_spread, run_bench
from .certificate import (
    build_discard_forest,
    check_discard_sums,
    check_dual_feasible,
    check_eviction_ratio,
    check_exponential_growth,
    check_push_lemma,
    check_skips,
    check_trace_identity,
    DualCertificate,
    phi_from_trace,
    upper_bound,
)
from .compaction import ThresholdFilter, quantize
from .core import EVICTED, EdgeRecord, RemapTable
from .engine import MODES, EngineConfig
from .oracle import MODELS, ORDERS, WEIGHT_LAWS, StreamSpec, generate_stream
from .pipeline import run_pipeline, verify_run
from .streamio import EdgeReader, StreamFormatError, read_trace, write_edges, write_trace

log = logging.getLogger("streammatch")

EXIT_OK, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@contextmanager
def _open_in(path: str):
    if path == "-":
        yield sys.stdin
        return
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot open {path}: {exc.strerror}") from None
    with fh:
        yield fh


@contextmanager
def _open_out(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
        return
    try:
        fh = open(path, "w", encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None
    with fh:
        yield fh


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False)


def _slack(r) -> str:
    return "-" if r.checked == 0 else f"{r.worst_slack:.3g}"


def _engine_config(args, trace: bool) -> EngineConfig:
    mode = args.mode
    if mode == "exp" and args.epsilon == 0:
        # exp with eps = 0 is the basic algorithm
        log.info("--mode exp --epsilon 0 runs as --mode basic")
        mode = "basic"
    try:
        return EngineConfig(
            epsilon=args.epsilon,
            mode=mode,
            beta_override=args.beta,
            trace_enabled=trace,
            phi_backend=args.phi_backend,
            n_bound=args.threshold_n,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_run(args) -> int:
    cfg = _engine_config(args, trace=bool(args.trace or args.verify))
    if args.quantize and cfg.epsilon <= 0:
        raise UsageError("--quantize needs --epsilon > 0")
    t0 = time.perf_counter()
    with _open_in(args.input) as fh:
        reader = EdgeReader(fh)
        res = run_pipeline(reader, cfg, quantize=args.quantize, threshold_n=args.threshold_n,
                           keep_edges=args.verify)
    elapsed = time.perf_counter() - t0
    run, table = res.run, res.table
    status = EXIT_OK
    report = {
        "config": {
            "mode": cfg.mode,
            "epsilon": cfg.epsilon,
            "beta": cfg.beta,
            "quantize": args.quantize,
            "threshold_n": args.threshold_n,
            "phi_backend": cfg.phi_backend,
            "seed": args.seed,
        },
        "matching": {
            "edges": [[table.raw(e.u), table.raw(e.v), e.w] for e in run.matching.edges],
            "size": len(run.matching),
            "weight": run.matching.total_weight,
        },
        "certificate": {
            "epsilon": run.certificate.epsilon,
            "phi_sum": run.certificate.phi_sum,
            "upper_bound": upper_bound(run.certificate),
        },
        "stats": run.stats.to_dict(),
    }
    if cfg.phi_backend == "compact":
        store = run.phi_store
        report["compact_phi"] = {
            "bits_per_vertex": store.bits_per_vertex,
            "bytes_per_vertex": store.bytes_per_vertex(),
            "window_width": store.width,
            "w_max_exponent": store.w_max_exponent,
            "max_small_mass": max(store.small_mass, default=0.0),
        }
    if args.verify:
        reports = verify_run(res)
        report["verification"] = [r.to_dict() for r in reports]
        if not res.ok:
            status = EXIT_VERIFY
    if args.timing:
        seen = max(run.stats.edges_seen, 1)
        report["timing"] = {"seconds": elapsed, "ns_per_edge": elapsed * 1e9 / seen}
    if args.trace:
        header = {
            "mode": cfg.mode,
            "epsilon": cfg.epsilon,
            "beta": cfg.beta,
            "quantize": args.quantize,
            "threshold_n": args.threshold_n,
            "phi_backend": cfg.phi_backend,
            "edges": run.stats.edges_seen,
            "matching_weight_engine": res.engine_matching.total_weight,
            "version": __version__,
        }
        with _open_out(args.trace) as fh:
            write_trace(fh, header, run.trace, table)

    if args.json:
        print(_dump(report))
    else:
        st = run.stats
        print(f"mode={cfg.mode} eps={cfg.epsilon:g} beta={cfg.beta if cfg.beta is not None else '-'}")
        print(f"matching: {len(run.matching)} edges, weight {run.matching.total_weight:.6g}")
        print(f"certificate: sum(phi)={run.certificate.phi_sum:.6g} upper bound={upper_bound(run.certificate):.6g}")
        print(f"edges: seen={st.edges_seen} pushed={st.edges_pushed} skipped={st.edges_skipped} "
              f"evicted={st.edges_evicted} dropped={st.edges_dropped} self-loops={st.self_loops_rejected}")
        print(f"peak stack={st.peak_stack_size} peak queue={st.peak_queue_size}")
        for r in res.verification:
            print(f"check {r.name}: {'PASS' if r.ok else 'FAIL'} (worst slack {_slack(r)})")
    return status


def cmd_gen(args) -> int:
    try:
        spec = StreamSpec(
            model=args.model, n=args.n, m=args.m, weight_law=args.weight_law, w_max=args.w_max,
            epsilon=args.epsilon, order=args.order, seed=args.seed, beta=args.beta,
        )
        edges = generate_stream(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    n = 1 + max((max(e.u, e.v) for e in edges), default=-1)
    with _open_out(args.output) as fh:
        fh.write(f"# spec {spec.to_json()}\n")
        write_edges(fh, edges, n=n)
    if args.output not in (None, "-"):
        print(f"wrote {len(edges)} edges on {n} vertices to {args.output}", file=sys.stderr)
    return EXIT_OK


def _replay_edges(path: str, header: dict) -> list[EdgeRecord]:
    eps = header["epsilon"]
    threshold = ThresholdFilter(header.get("threshold_n"), eps) if header.get("threshold_n") else None
    out = []
    with _open_in(path) as fh:
        for e in EdgeReader(fh):
            if e.u == e.v:
                continue
            if threshold is not None and not threshold(e):
                continue
            if header.get("quantize"):
                e = EdgeRecord(e.u, e.v, quantize(e.w, eps).value)
            out.append(e)
    return out


def cmd_verify(args) -> int:
    with _open_in(args.trace) as fh:
        header, raw_trace = read_trace(fh)
    if header.get("phi_backend", "dense") != "dense":
        raise UsageError("trace verification is defined for the dense phi backend only")
    eps = header["epsilon"]
    raw_edges = _replay_edges(args.stream, header)
    decisions = [ev for ev in raw_trace if ev.decision != EVICTED]
    if len(decisions) != len(raw_edges):
        raise UsageError(f"stream has {len(raw_edges)} edges but the trace decides {len(decisions)}")
    for ev in decisions:
        e = raw_edges[ev.pos] if ev.pos < len(raw_edges) else None
        if e is None or tuple(e) != tuple(ev.edge):
            raise UsageError(f"trace event {ev.seq} does not match stream edge {ev.pos}")

    table = RemapTable()
    edges = [EdgeRecord(table.remap(e.u), table.remap(e.v), e.w) for e in raw_edges]
    trace = [
        type(ev)(ev.seq, ev.pos, EdgeRecord(table.remap(ev.edge.u), table.remap(ev.edge.v), ev.edge.w),
                 ev.decision, ev.leftover, ev.phi_u_before, ev.phi_v_before, ev.evictor)
        for ev in raw_trace
    ]
    cert = DualCertificate.from_phi(phi_from_trace(trace), eps)
    reports = [
        check_dual_feasible(cert, edges),
        check_push_lemma(trace),
        check_exponential_growth(trace, eps),
        check_skips(trace, eps),
        check_trace_identity(trace, cert),
    ]
    if header.get("mode") == "capped":
        try:
            forest = build_discard_forest(trace)
        except ValueError as exc:
            raise UsageError(f"malformed eviction events: {exc}") from None
        reports.append(check_eviction_ratio(trace, eps))
        reports.append(check_discard_sums(forest, trace, eps))
    ok = all(r.ok for r in reports)
    out = {"pass": ok, "checks": [r.to_dict() for r in reports], "upper_bound": upper_bound(cert)}
    if args.json:
        print(_dump(out))
    else:
        for r in reports:
            print(f"{r.name:<20} {'PASS' if r.ok else 'FAIL'}  worst slack {_slack(r)}  ({r.checked} checked)")
        print("all checks passed" if ok else "VERIFICATION FAILED")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_bench(args) -> int:
    try:
        base = StreamSpec(model=args.model, weight_law=args.weight_law, w_max=args.w_max,
                          epsilon=args.epsilons[0], order=args.order, seed=args.seed, n=args.n or 4)
        rows = run_bench(base, args.sizes, args.modes, args.epsilons, args.density, args.repeats)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    spreads = {}
    for r in rows:
        key = f"{r.mode}:{r.epsilon:g}"
        if key not in spreads:
            spreads[key] = per_edge_spread(rows, r.mode, r.epsilon)
    figures = []
    if args.plot_dir:
        from .plotting import render_bench_figures

        figures = render_bench_figures(rows, args.plot_dir, args.plot_format)
    if args.json:
        print(_dump({"rows": [r.to_dict() for r in rows], "per_edge_spread": spreads, "figures": figures}))
    else:
        print(format_table(rows))
        for key, s in spreads.items():
            print(f"per-edge time spread {key}: {s:.2f}x")
        for f in figures:
            print(f"figure: {f}")
    return EXIT_OK


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _epsilon(text: str) -> float:
    value = float(text)
    if not (value >= 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError("epsilon must be a non-negative real")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="streammatch", description="Single-pass maximum weight matching.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an engine over an edge stream")
    r.add_argument("input", nargs="?", default="-", help="edge stream file ('-' for stdin)")
    r.add_argument("--mode", choices=MODES, default="capped")
    r.add_argument("--epsilon", type=_epsilon, default=0.25)
    r.add_argument("--beta", type=_positive_int, default=None, help="override the queue capacity")
    r.add_argument("--quantize", action="store_true", help="round weights down to powers of 1+eps")
    r.add_argument("--threshold-n", type=_positive_int, default=None,
                   help="vertex-count bound; enables the small-edge filter")
    r.add_argument("--phi-backend", choices=("dense", "compact"), default="dense")
    r.add_argument("--trace", metavar="PATH", help="write a JSON-lines decision trace")
    r.add_argument("--verify", action="store_true", help="check the certificate and trace lemmas")
    r.add_argument("--seed", type=_seed, default=0)
    r.add_argument("--json", action="store_true")
    r.add_argument("--timing", action="store_true", help="include wall-clock timing in the report")
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("gen", help="generate an edge stream")
    g.add_argument("--model", choices=MODELS, default="gnm_random")
    g.add_argument("--n", type=int, default=16)
    g.add_argument("--m", type=int, default=32)
    g.add_argument("--weight-law", choices=WEIGHT_LAWS, default="uniform")
    g.add_argument("--w-max", type=float, default=100.0)
    g.add_argument("--epsilon", type=_epsilon, default=0.25)
    g.add_argument("--beta", type=_positive_int, default=None)
    g.add_argument("--order", choices=ORDERS, default=None)
    g.add_argument("--seed", type=_seed, default=0)
    g.add_argument("-o", "--output", default=None)
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", help="check a stream against a trace from 'run --trace'")
    v.add_argument("stream")
    v.add_argument("trace")
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="throughput and space over generated streams")
    b.add_argument("--model", choices=MODELS, default="gnm_random")
    b.add_argument("--sizes", type=_positive_int, nargs="+", default=[10_000, 100_000])
    b.add_argument("--modes", choices=MODES, nargs="+", default=["exp", "capped"])
    b.add_argument("--epsilons", type=_epsilon, nargs="+", default=[0.25])
    b.add_argument("--n", type=int, default=None, help="vertex count for non-gnm models")
    b.add_argument("--density", type=float, default=8.0, help="edges per vertex for gnm streams")
    b.add_argument("--weight-law", choices=WEIGHT_LAWS, default="uniform")
    b.add_argument("--w-max", type=float, default=100.0)
    b.add_argument("--order", choices=ORDERS, default=None)
    b.add_argument("--seed", type=_seed, default=0)
    b.add_argument("--repeats", type=_positive_int, default=1)
    b.add_argument("--json", action="store_true")
    b.add_argument("--plot-dir", default=None, help="write throughput/space figures here")
    b.add_argument("--plot-format", choices=("png", "svg", "pdf"), default="png")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, StreamFormatError) as exc:
        print(f"streammatch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
