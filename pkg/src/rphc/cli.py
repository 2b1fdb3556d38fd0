"""``rphc`` command line."""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional

from .bench import RunConfig, bench, load_suite, run_algorithm
from .data import CsvFormatError, format_labels, ingest_csv
from .evaluate import cut, preservation
from .partition import MIN_PTS_DEFAULT, ROUNDS_FACTOR_DEFAULT
from .slc import C_F_DEFAULT

EXIT_USAGE = 2
EXIT_INCOMPLETE = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rphc", description="Hierarchical clustering with random projections.")
    p.add_argument("--input", metavar="PATH", help="numeric CSV, one point per row, optional header")
    p.add_argument("--linkage", choices=("slc", "alc"), default="slc")
    p.add_argument("--mode", choices=("fixed", "parameter-free", "oracle"), default="parameter-free")
    p.add_argument("--min-pts", type=int, metavar="K",
                   help=f"partition set size threshold (fixed mode, default {MIN_PTS_DEFAULT}); "
                        "starting value in parameter-free mode")
    p.add_argument("--rounds-factor", type=float, default=ROUNDS_FACTOR_DEFAULT, metavar="R",
                   help="partition rounds = ceil(R log2 N)")
    p.add_argument("--cf", type=float, default=C_F_DEFAULT, metavar="F",
                   help="co-occurrence fraction above which a pair counts as frequent")
    p.add_argument("--seed", type=int, default=0, metavar="S")
    p.add_argument("--output", metavar="PATH", help="output file (default: stdout)")
    p.add_argument("--format", default="merges", metavar="{merges|labels:K|summary}")
    p.add_argument("--compare-oracle", action="store_true", help="also run the exact algorithm and report preservation")
    p.add_argument("--newick", metavar="PATH", help="additionally write the dendrogram in Newick format")
    p.add_argument("--bench", metavar="SUITE.toml", help="run a benchmark suite and write its CSV report")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")

    if args.bench:
        report = bench(load_suite(args.bench))
        _emit(report.to_csv(), args.output)
        sys.stderr.write(report.summary())
        return 0

    if not args.input:
        parser.error("--input is required unless --bench is given")
    try:
        cfg = RunConfig(linkage=args.linkage, mode=args.mode, min_pts=args.min_pts, rounds_factor=args.rounds_factor,
                        c_f=args.cf, seed=args.seed, input=args.input, output=args.output,
                        output_format=args.format, compare_oracle=args.compare_oracle)
    except ValueError as e:
        parser.error(str(e))
    try:
        ds = ingest_csv(cfg.input)
    except (OSError, CsvFormatError) as e:
        print(f"rphc: cannot read {cfg.input}: {e}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg, ds, newick=args.newick)


def run(cfg: RunConfig, ds, newick: Optional[str] = None) -> int:
    hc, wall = run_algorithm(ds, cfg.linkage, cfg.mode, min_pts=cfg.min_pts, rounds_factor=cfg.rounds_factor,
                             c_f=cfg.c_f, seed=cfg.seed)
    summary = {
        "algorithm": hc.info.get("algorithm", f"{cfg.linkage}-{cfg.mode}"),
        "n": ds.n,
        "d": ds.d,
        "seed": cfg.seed,
        "complete": str(hc.complete).lower(),
        "merges": len(hc),
        "n_distances": hc.info.get("n_distances"),
        "wall_time": f"{wall:.6f}",
    }
    if cfg.mode == "fixed":
        summary["min_pts"] = cfg.min_pts
    if cfg.mode == "parameter-free":
        summary["final_min_pts"] = hc.info.get("final_min_pts")
        summary["doublings"] = hc.info.get("doublings")
    if cfg.compare_oracle and hc.complete:
        oracle, _ = run_algorithm(ds, cfg.linkage, "oracle")
        summary["preservation"] = f"{preservation(hc, oracle).average:.12g}"

    k = cfg.label_k
    if cfg.output_format == "summary":
        _emit("".join(f"{key}={val}\n" for key, val in summary.items()), cfg.output)
    elif k is not None:
        # labels need a complete dendrogram; the incomplete case is reported below
        if k > ds.n:
            print(f"rphc: labels:{k} exceeds the number of points ({ds.n})", file=sys.stderr)
            return EXIT_USAGE
        if hc.complete:
            _emit(format_labels(cut(hc, k).labels), cfg.output)
    else:
        _emit(hc.to_csv(), cfg.output)
        if "preservation" in summary:
            print(f"preservation={summary['preservation']}", file=sys.stderr)
    if newick and hc.complete:
        with open(newick, "w", encoding="utf-8") as fh:
            fh.write(hc.to_newick() + "\n")

    if not hc.complete:
        print(f"rphc: incomplete dendrogram: {len(hc)} of {ds.n - 1} merges found with min_pts={cfg.min_pts}; "
              "increase --min-pts or use --mode parameter-free", file=sys.stderr)
        return EXIT_INCOMPLETE
    return 0


if __name__ == "__main__":
    sys.exit(main())
