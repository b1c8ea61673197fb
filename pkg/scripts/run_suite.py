"""Run a catalog suite and write one JSON report per instance plus a summary table.

    python3 scripts/run_suite.py --suite quick --outdir results/quick --jobs 4
"""

import argparse
import json
from dataclasses import dataclass, replace
from pathlib import Path

from conormal import cli
from conormal.config import RunConfig
from conormal.report import dumps, make_report


@dataclass(frozen=True)
class SuiteRun:
    suite: str = "quick"
    outdir: str = "results"
    run: RunConfig = RunConfig()


def summarize(rec: dict) -> str:
    dims = rec["dims"]
    h1 = dims.get("h1", {})
    parts = [f"{rec['label']:<28}", f"{rec['details'].get('command', ''):<9}", f"{rec['status']:<11}"]
    if h1:
        parts.append("h1 " + " ".join(f"{k}:{v}" for k, v in sorted(h1.items(), key=lambda kv: int(kv[0]))))
    for key in ("gaussian_wedge_kernel", "corank", "first_order"):
        if key in dims:
            parts.append(f"{key}={dims[key]}")
    if rec["flags"]:
        parts.append("flags=" + ",".join(rec["flags"]))
    return "  ".join(parts)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--suite", default="quick", choices=sorted(cli.SUITES))
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--cache-dir", default=None)
    args = ap.parse_args(argv)
    cfg = SuiteRun(args.suite, args.outdir, replace(RunConfig(), jobs=args.jobs, cache_dir=args.cache_dir))

    records, code = cli.cmd_catalog(cfg.suite, cfg.run)
    out = Path(cfg.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for i, rec in enumerate(records):
        name = f"{i:02d}-{rec['details']['command']}-{rec['label'].replace(':', '_').replace(',', '-').replace('=', '')}.json"
        (out / name).write_text(dumps(make_report(rec["details"]["command"], cfg.run.echo(), [rec], 0)))
        print(summarize(rec))
    (out / "summary.json").write_text(json.dumps({"suite": cfg.suite, "exit_code": code, "n": len(records)}) + "\n")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
