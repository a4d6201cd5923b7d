"""Command line entry points: batch, online, taguchi, check."""

from __future__ import annotations

import argparse
import sys

from . import checks
from .harness import ALGORITHMS, SimulationConfig, emit, emit_text, run_batch, run_online, run_taguchi


def _add_common(parser):
    parser.add_argument("--config", help="JSON config file (flags override its values)")
    parser.add_argument("--algorithm", choices=ALGORITHMS, default="pgra")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", help="output file; stdout when omitted")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--d", type=int, help="candidate paths per request")
    parser.add_argument("--beam", type=int, help="beam width")
    parser.add_argument("--requests", type=int, help="requests per batch")
    parser.add_argument("--nodes", type=int, choices=(6, 9, 12, 15), help="total satellites (3 planes)")


def _load_config(args, mode: str) -> SimulationConfig:
    if args.config:
        with open(args.config) as fh:
            config = SimulationConfig.from_json(fh.read())
    else:
        config = SimulationConfig()
    config.mode = mode
    if args.nodes is not None:
        config = config.with_nodes(args.nodes)
    if args.d is not None:
        config.num_paths = args.d
    if args.beam is not None:
        config.beam_width = args.beam
    if args.requests is not None:
        config.requests = args.requests
    if getattr(args, "slots", None) is not None:
        config.slots = args.slots
    return config


def _write(results, args) -> None:
    if args.out:
        emit(results, args.format, args.out)
        print(f"wrote {len(results)} rows to {args.out}")
    else:
        sys.stdout.write(emit_text(results, args.format))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="satchain",
        description="Service-chain placement experiments on satellite edge networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    batch = sub.add_parser("batch", help="one slot, one batch of requests")
    _add_common(batch)

    online = sub.add_parser("online", help="slotted simulation with arrivals and expiries")
    _add_common(online)
    online.add_argument("--slots", type=int, help="number of slots")

    taguchi = sub.add_parser("taguchi", help="paths-by-beam orthogonal sweep")
    _add_common(taguchi)
    taguchi.add_argument("--repetitions", type=int, default=10)
    taguchi.add_argument("--d-levels", default="1,2,4,8", help="comma-separated path-count levels")
    taguchi.add_argument("--b-levels", default="1,2,4,8", help="comma-separated beam-width levels")
    taguchi.add_argument("--m-values", default="10,20,30", help="comma-separated request counts")

    check = sub.add_parser("check", help="run the built-in property suites")
    check.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)

    if args.command == "batch":
        config = _load_config(args, "batch")
        _write([run_batch(config, args.algorithm, args.seed)], args)
        return 0
    if args.command == "online":
        config = _load_config(args, "online")
        _write(run_online(config, args.algorithm, args.seed), args)
        return 0
    if args.command == "taguchi":
        config = _load_config(args, "batch")
        levels = lambda text: tuple(int(v) for v in text.split(","))
        result = run_taguchi(
            config,
            d_levels=levels(args.d_levels),
            b_levels=levels(args.b_levels),
            m_values=levels(args.m_values),
            repetitions=args.repetitions,
            seed=args.seed,
        )
        text = result.to_csv_text() if args.format == "csv" else result.to_json_text()
        if args.out:
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
            print(f"wrote sweep table to {args.out}")
        else:
            sys.stdout.write(text)
        return 0
    if args.command == "check":
        failures = 0
        for name, ok, detail in checks.run_all(args.seed):
            print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
            failures += 0 if ok else 1
        return 1 if failures else 0
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
