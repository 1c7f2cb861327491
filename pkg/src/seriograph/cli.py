"""Command-line entry points: sample, order, estimate, test, experiment."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io as sio
from .error_rooting import build_schedule, epsilon_for_delta, refine_all
from .errors import AllCellsFailedError, ConfigError, SeriographError
from .estimation import estimate_graphon
from .graphon import graphon_from_config, sample_graph
from .harness import ExperimentConfig, run_experiment
from .ordering import write_ranking
from .robinson import lambda_statistic


def _add_family_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", default="boundary", help="graphon family (boundary|constant)")
    p.add_argument("--p", type=float, default=0.8, help="noise rate of the boundary family")
    p.add_argument("--alpha", type=float, default=0.0, help="decay rate")
    p.add_argument("--r", type=float, default=0.3, help="radius of the boundary family")
    p.add_argument("--value", type=float, default=0.5, help="level of the constant family")


def _add_alg_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=0.3)
    p.add_argument("--log-factor-scale", type=float, default=1.0, dest="log_factor_scale")
    p.add_argument("--m1", type=float, default=1.0)
    p.add_argument(
        "--literal-schedule",
        action="store_true",
        help="build the requested round count even if stages degenerate",
    )


def _graphon_spec(args) -> dict:
    if args.family == "boundary":
        return {"family": "boundary", "p": args.p, "alpha": args.alpha, "r": args.r}
    if args.family == "constant":
        return {"family": "constant", "value": args.value}
    raise ConfigError(f"unknown family {args.family!r}")


def _apply_config_file(args: argparse.Namespace) -> argparse.Namespace:
    """Values in --config override the corresponding flags."""
    if getattr(args, "config", None):
        overrides = sio.read_json(args.config)
        for key, val in overrides.items():
            setattr(args, key, val)
    return args


def _load_or_sample(args):
    if getattr(args, "graph", None):
        g = sio.read_graph(args.graph, oracle_path=getattr(args, "oracle", None), seed=args.seed)
        return g, None
    spec = _graphon_spec(args)
    w = graphon_from_config(spec)
    return sample_graph(w, args.n, args.seed), w


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="seriograph")
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("sample", help="sample a graph and write its edge list")
    _add_family_flags(ps)
    ps.add_argument("--n", type=int, required=True)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--out", required=True)
    ps.add_argument("--oracle-out", dest="oracle_out", default=None)
    ps.add_argument("--config", default=None)

    po = sub.add_parser("order", help="recover the vertex ordering of a graph")
    _add_family_flags(po)
    _add_alg_flags(po)
    po.add_argument("--graph", default=None, help="read this edge-list file instead of sampling")
    po.add_argument("--oracle", default=None)
    po.add_argument("--n", type=int, default=None)
    po.add_argument("--seed", type=int, default=0)
    po.add_argument("--out", required=True, help="ranking file; schedule JSON lands beside it")
    po.add_argument("--config", default=None)

    pe = sub.add_parser("estimate", help="block-model estimate of the kernel at latent positions")
    _add_family_flags(pe)
    _add_alg_flags(pe)
    pe.add_argument("--graph", default=None)
    pe.add_argument("--oracle", default=None)
    pe.add_argument("--n", type=int, default=None)
    pe.add_argument("--seed", type=int, default=0)
    pe.add_argument("--m", type=int, default=None, help="block count; default from the power rule")
    pe.add_argument("--m-delta", type=float, default=0.05, dest="m_delta")
    pe.add_argument("--out", required=True, help="matrix file; metadata JSON lands beside it")
    pe.add_argument("--config", default=None)

    pt = sub.add_parser("test", help="interval-triple statistic of a graph")
    _add_family_flags(pt)
    _add_alg_flags(pt)
    pt.add_argument("--graph", default=None)
    pt.add_argument("--oracle", default=None)
    pt.add_argument("--n", type=int, default=None)
    pt.add_argument("--seed", type=int, default=0)
    pt.add_argument("--mu-exponent", type=float, default=0.25, dest="mu_exponent")
    pt.add_argument("--stride", type=int, default=None)
    pt.add_argument("--out", required=True)
    pt.add_argument("--config", default=None)

    px = sub.add_parser("experiment", help="run an (n, seed) sweep from a config file")
    px.add_argument("--config", required=True)
    px.add_argument("--out", default=None)
    px.add_argument("--seed", type=int, default=None, help="single-seed override")

    args = parser.parse_args(argv)
    try:
        args = _apply_config_file(args)
        return _dispatch(args)
    except (ConfigError, SeriographError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3 if isinstance(exc, AllCellsFailedError) else 2


def _dispatch(args) -> int:
    if args.command == "sample":
        w = graphon_from_config(_graphon_spec(args))
        g = sample_graph(w, args.n, args.seed)
        sio.write_graph(g, args.out)
        if args.oracle_out:
            sio.write_oracle(g, args.oracle_out)
        print(f"wrote {args.out}: n={g.n}, edges={g.edge_count()}")
        return 0

    if args.command == "order":
        g, w = _load_or_sample(args)
        alpha = w.alpha if w is not None else args.alpha
        epsilon, _ = epsilon_for_delta(args.delta, alpha)
        schedule = build_schedule(
            g.n,
            alpha,
            args.gamma,
            epsilon,
            m1=args.m1,
            log_factor_scale=args.log_factor_scale,
            auto_rounds=not args.literal_schedule,
        )
        warnings: list = []
        sigma = refine_all(g, schedule, seed=args.seed, warnings_out=warnings)
        write_ranking(sigma, args.out)
        sio.write_json(
            {"schedule": schedule.to_dict(), "warnings": warnings, "seed": args.seed},
            str(args.out) + ".schedule.json",
        )
        print(f"wrote {args.out} ({g.n} vertices)")
        return 0

    if args.command == "estimate":
        g, w = _load_or_sample(args)
        alpha = w.alpha if w is not None else args.alpha
        m = args.m
        if m is None:
            import math

            m = math.ceil(g.n ** (1.0 / (alpha + 1.0) - 3.0 * args.m_delta))
        est = estimate_graphon(
            g,
            m,
            alpha,
            args.delta,
            args.gamma,
            args.seed,
            m1=args.m1,
            log_factor_scale=args.log_factor_scale,
            auto_rounds=not args.literal_schedule,
        )
        sio.write_matrix(est.theta, args.out)
        sio.write_json(
            {
                "m": est.m,
                "q": est.q,
                "seed": args.seed,
                "parameters": {
                    "alpha": alpha,
                    "delta": args.delta,
                    "gamma": args.gamma,
                    "m1": args.m1,
                    "log_factor_scale": args.log_factor_scale,
                },
                "clamp_warnings": list(est.clamp_warnings),
            },
            str(args.out) + ".meta.json",
        )
        print(f"wrote {args.out} (m={m})")
        return 0

    if args.command == "test":
        g, w = _load_or_sample(args)
        alpha = w.alpha if w is not None else args.alpha
        mu = g.n ** -args.mu_exponent
        report = lambda_statistic(
            g,
            mu,
            alpha,
            args.delta,
            args.gamma,
            stride=args.stride,
            seed=args.seed,
            m1=args.m1,
            log_factor_scale=args.log_factor_scale,
            auto_rounds=not args.literal_schedule,
        )
        payload = report.to_dict()
        payload["seed"] = args.seed
        payload["parameters"] = {
            "alpha": alpha,
            "delta": args.delta,
            "gamma": args.gamma,
            "mu_exponent": args.mu_exponent,
            "m1": args.m1,
            "log_factor_scale": args.log_factor_scale,
        }
        sio.write_json(payload, args.out)
        print(f"wrote {args.out} (lambda_hat={report.lambda_hat:.6g})")
        return 0

    if args.command == "experiment":
        raw = sio.read_json(args.config)
        if args.out:
            raw["output_path"] = args.out
        if args.seed is not None:
            raw["seeds"] = [args.seed]
        known = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        config = ExperimentConfig(**raw)
        results = run_experiment(config)
        ok = sum(1 for r in results if r.value is not None)
        print(f"{ok}/{len(results)} cells succeeded" + (
            f"; wrote {config.output_path}" if config.output_path else ""
        ))
        return 0

    raise ConfigError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
