"""Command-line front end.

Subcommands: ``outage`` and ``throughput`` for single-point queries,
``sweep`` for config-driven CSV generation, ``hbar`` to dump the high-SNR
coefficient table, and ``selftest`` to run the oracle cross-checks.

All SNR arguments are in dB and converted once at this boundary
(gbar = 10^{dB/10}); the library APIs underneath are strictly linear.
The default Monte Carlo seed comes from the ``XPHARQ_SEED`` environment
variable; an explicit ``--seed`` flag overrides it.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

from .asymptotic import (
    build_hbar_table,
    hbar_eval,
    outage_asymptotic_general,
)
from .bounds import ir_outage_chain, outage_lower, outage_upper_ir
from .core import PowerProfile, RateSchedule
from .exact import (
    outage_k1,
    outage_k2_exact,
    outage_k2_via_foxh,
    upper_incomplete_gamma_complex,
)
from .quadrature import hbar_quadrature, xp_outage_quadrature
from .simulate import (
    SimConfig,
    estimate_outage,
    estimate_throughput,
    throughput_analytical,
    xp_outage_chain,
)
from .sweep import ConfigError, db_to_linear, emit_gnuplot, parse_config, run_sweep, write_csv

_RARE_EVENT_FLOOR = 100


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v.strip()) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _resolve_seed(flag_value) -> int:
    if flag_value is not None:
        return int(flag_value)
    env = os.environ.get("XPHARQ_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SystemExit(f"XPHARQ_SEED must be an integer, got {env!r}")
    return 0


def _point(parser: argparse.ArgumentParser, args) -> tuple[RateSchedule, PowerProfile]:
    try:
        rates = RateSchedule(args.rates)
    except ValueError as exc:
        parser.error(f"--rates: {exc}")
    snr_db = args.snr_db
    if len(snr_db) == 1:
        snr_db = snr_db * rates.K
    if len(snr_db) != rates.K:
        parser.error(f"--snr-db needs 1 or {rates.K} entries, got {len(snr_db)}")
    args.snr_db = snr_db  # echo the per-round values in the output record
    return rates, PowerProfile([db_to_linear(v) for v in snr_db])


def _fmt(x: float) -> str:
    return "%.9g" % x


def _cmd_outage(parser, args) -> int:
    rates, powers = _point(parser, args)
    k_rounds = rates.K
    method = args.method
    if args.scheme == "inr" and method not in ("upper", "mc"):
        parser.error(f"scheme inr supports methods upper and mc, not {method}")
    if method == "exact" and k_rounds > 2:
        parser.error(f"method exact supports K <= 2, got K={k_rounds}")
    if method == "asymptotic" and k_rounds < 2:
        parser.error("method asymptotic needs K >= 2")
    if method in ("oracle", "upper") and k_rounds > 4:
        parser.error(f"method {method} supports K <= 4, got K={k_rounds}")

    seed = _resolve_seed(args.seed)
    start = time.perf_counter()
    if method == "exact":
        if k_rounds == 1:
            value, unc = outage_k1(rates.rates[0], powers.snr_bars[0]), 0.0
        else:
            est = outage_k2_exact(rates, powers, tol=args.tol)
            value, unc = est.value, est.uncertainty
    elif method == "asymptotic":
        value, unc = outage_asymptotic_general(rates, powers), 0.0
    elif method == "lower":
        value, unc = outage_lower(rates, powers), 0.0
    elif method == "upper":
        est = outage_upper_ir(rates, powers)
        value, unc = est.value, est.uncertainty
    elif method == "oracle":
        est = xp_outage_quadrature(rates, powers, tol=args.tol)
        value, unc = est.value, est.uncertainty
    else:
        cfg = SimConfig(
            scheme=args.scheme,
            rates=rates,
            powers=powers,
            trials=args.trials,
            seed=seed,
            workers=args.workers,
        )
        est = estimate_outage(cfg)
        value, unc = est.value, est.uncertainty
        failures = round(value * args.trials)
        if failures < _RARE_EVENT_FLOOR:
            print(
                f"warning: only {failures} outage events observed (<{_RARE_EVENT_FLOOR}); "
                "the confidence interval is unreliable in this rare-event regime — "
                "use the asymptotic or quadrature methods here",
                file=sys.stderr,
            )
    elapsed = time.perf_counter() - start
    print(
        f"outage scheme={args.scheme} method={method} K={k_rounds} "
        f"rates={','.join(_fmt(r) for r in rates.rates)} "
        f"snr_db={','.join(_fmt(v) for v in args.snr_db)} "
        f"value={_fmt(value)} uncertainty={_fmt(unc)} seconds={elapsed:.3f}"
    )
    if method == "upper":
        low = outage_lower(rates, powers)
        gap = (value - low) / value if value > 0 else math.nan
        print(f"bound-gap lower={_fmt(low)} upper={_fmt(value)} relative_gap={_fmt(gap)}")
    return 0


def _cmd_throughput(parser, args) -> int:
    rates, powers = _point(parser, args)
    seed = _resolve_seed(args.seed)
    start = time.perf_counter()
    if args.method == "analytical":
        if rates.K > 4:
            parser.error("analytical throughput chain supports K <= 4")
        if args.scheme == "xp":
            chain = xp_outage_chain(rates, powers)
        else:
            chain = ir_outage_chain(rates, powers)
        value, unc = throughput_analytical(args.scheme, rates, powers, chain), 0.0
        provenance = " chain=" + ",".join(_fmt(p) for p in chain)
    else:
        cfg = SimConfig(
            scheme=args.scheme,
            rates=rates,
            powers=powers,
            trials=args.trials,
            seed=seed,
            workers=args.workers,
        )
        est = estimate_throughput(cfg)
        value, unc = est.value, est.uncertainty
        provenance = ""
    elapsed = time.perf_counter() - start
    print(
        f"throughput scheme={args.scheme} method={args.method} K={rates.K} "
        f"rates={','.join(_fmt(r) for r in rates.rates)} "
        f"snr_db={','.join(_fmt(v) for v in args.snr_db)} "
        f"value={_fmt(value)} uncertainty={_fmt(unc)} seconds={elapsed:.3f}"
        f"{provenance}"
    )
    return 0


def _cmd_sweep(parser, args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
    except OSError as exc:
        parser.error(f"cannot read config: {exc}")
    except ConfigError as exc:
        parser.error(str(exc))
    if args.gnuplot is not None and args.out == "-":
        parser.error("--gnuplot needs a real --out path for the script to reference")
    seed = int(args.seed) if args.seed is not None else None
    rows = run_sweep(cfg, workers=args.workers, seed=seed)
    if args.out == "-":
        write_csv(rows, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh)
    if args.gnuplot is not None:
        with open(args.gnuplot, "w", encoding="utf-8") as fh:
            fh.write(emit_gnuplot(cfg, args.out))
    return 0


def _cmd_hbar(parser, args) -> int:
    try:
        rates = RateSchedule(args.rates)
    except ValueError as exc:
        parser.error(f"--rates: {exc}")
    if rates.K < 2:
        parser.error("the coefficient table needs K >= 2")
    table = build_hbar_table(rates)
    print(f"K = {table.K}")
    for k in range(1, table.K + 1):
        for i, c in enumerate(table.coeffs[k - 1]):
            print(f"c[k={k},i={i}] = {c!r}")
    for k in range(1, table.K + 1):
        print(f"hbar[K={table.K},k={k}]({_fmt(args.x)}) = {hbar_eval(table, k, args.x)!r}")
    return 0


def _cmd_selftest(parser, args) -> int:
    from scipy.special import kv

    from .exact import FoxHParams11, foxh_h11_incomplete

    failures = 0

    def check(name: str, ok: bool, detail: str) -> None:
        nonlocal failures
        if ok:
            print(f"PASS {name}: {detail}")
        else:
            failures += 1
            print(f"FAIL {name}: {detail}")

    g = upper_incomplete_gamma_complex(1.0, 0.7)
    ref = math.exp(-0.7)
    check(
        "incomplete-gamma-exponential",
        abs(g.real - ref) <= 1e-12 * ref and abs(g.imag) <= 1e-13,
        f"Gamma(1, 0.7) = {g.real!r} vs e^-0.7 = {ref!r}",
    )

    z = 1.0
    h = foxh_h11_incomplete(FoxHParams11(z=z, b=0.0))
    bessel = 2.0 * math.sqrt(z) * float(kv(1, 2.0 * math.sqrt(z)))
    check(
        "contour-bessel-degenerate",
        abs(h - bessel) <= 1e-6 * bessel,
        f"H(z=1, b=0) = {h!r} vs 2 sqrt(z) K1 = {bessel!r}",
    )

    rates = RateSchedule([1.0, 1.0])
    powers = PowerProfile([10.0, 10.0])
    p_exact = outage_k2_exact(rates, powers).value
    p_oracle = xp_outage_quadrature(rates, powers).value
    p_foxh = outage_k2_via_foxh(rates, powers).value
    spread = max(p_exact, p_oracle, p_foxh) - min(p_exact, p_oracle, p_foxh)
    check(
        "two-round-triangulation",
        spread <= 1e-6 * p_exact,
        f"exact={p_exact!r} oracle={p_oracle!r} contour={p_foxh!r}",
    )

    r3 = RateSchedule([1.0, 1.0, 1.0])
    table = build_hbar_table(r3)
    rec = hbar_eval(table, 1, 1.0)
    orc = hbar_quadrature(r3)
    closed = 12.0 * math.log(2.0) ** 2 - 4.0 * math.log(2.0) + 1.0
    check(
        "hbar-recursion-vs-oracle",
        abs(rec - orc) <= 1e-8 * abs(orc) and abs(rec - closed) <= 1e-9 * closed,
        f"recursion={rec!r} nested={orc!r} closed={closed!r}",
    )

    g3 = PowerProfile([10.0, 10.0, 10.0])
    low = outage_lower(r3, g3)
    mid = xp_outage_quadrature(r3, g3).value
    up = outage_upper_ir(r3, g3).value
    check(
        "bound-sandwich",
        low <= mid <= up,
        f"lower={low!r} xp={mid!r} upper={up!r}",
    )

    cfg1 = SimConfig(scheme="xp", rates=rates, powers=powers, trials=200_000, seed=7)
    cfg4 = SimConfig(scheme="xp", rates=rates, powers=powers, trials=200_000, seed=7, workers=4)
    e1 = estimate_outage(cfg1)
    e4 = estimate_outage(cfg4)
    check(
        "mc-worker-determinism",
        e1.value == e4.value,
        f"workers=1 -> {e1.value!r}, workers=4 -> {e4.value!r}",
    )

    print("selftest:", "ok" if failures == 0 else f"{failures} failure(s)")
    return 0 if failures == 0 else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xpharq",
        description="Outage and throughput of cross-packet HARQ over Rayleigh fading",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_point_args(p, methods, default_method):
        p.add_argument("--scheme", choices=("xp", "inr"), default="xp")
        p.add_argument("--method", choices=methods, default=default_method)
        p.add_argument("--rates", type=_float_list, required=True,
                       help="per-round rates, comma-separated (bits/channel-use)")
        p.add_argument("--snr-db", type=_float_list, required=True,
                       help="per-round average SNR in dB (single value broadcasts)")
        p.add_argument("--trials", type=int, default=100_000)
        p.add_argument("--seed", type=int, default=None,
                       help="Monte Carlo seed (default: $XPHARQ_SEED, else 0)")
        p.add_argument("--workers", type=int, default=1)

    p_out = sub.add_parser("outage", help="single-point outage probability")
    add_point_args(p_out, ("exact", "asymptotic", "lower", "upper", "mc", "oracle"), "exact")
    p_out.add_argument("--tol", type=float, default=1e-10)

    p_thr = sub.add_parser("throughput", help="single-point throughput")
    add_point_args(p_thr, ("analytical", "mc"), "analytical")

    p_sweep = sub.add_parser("sweep", help="config-driven CSV sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", default="-", help="output CSV path ('-' = stdout)")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_sweep.add_argument("--gnuplot", default=None, metavar="PATH",
                         help="also write a gnuplot script that plots the CSV")

    p_hbar = sub.add_parser("hbar", help="dump the high-SNR coefficient table")
    p_hbar.add_argument("--rates", type=_float_list, required=True)
    p_hbar.add_argument("--x", type=float, default=1.0)

    sub.add_parser("selftest", help="run oracle cross-checks")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "outage":
        return _cmd_outage(parser, args)
    if args.command == "throughput":
        return _cmd_throughput(parser, args)
    if args.command == "sweep":
        return _cmd_sweep(parser, args)
    if args.command == "hbar":
        return _cmd_hbar(parser, args)
    return _cmd_selftest(parser, args)


if __name__ == "__main__":
    raise SystemExit(main())
