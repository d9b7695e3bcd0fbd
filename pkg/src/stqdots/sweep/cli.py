"""Command-line entry point: ``stqdots <spectrum|exchange|couplings|crosstalk> --config FILE``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .. import __version__
from ..integrals import MODES, QuadratureError
from ..manybody import EigensolverError
from ..orbitals import DegenerateBasisError
from .config import ConfigError, config_dict, parse_config, serialize_config
from .runner import RUNNERS, SCHEMA_VERSION, to_csv

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_PARTIAL = 0, 2, 3, 4

log = logging.getLogger("stqdots")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stqdots", description="Four-dot singlet-triplet qubit sweeps.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in RUNNERS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or "").splitlines()[0])
        p.add_argument("--config", required=True, type=Path, help="run configuration (INI)")
        p.add_argument("--out", type=Path, help="CSV path; overrides [output] csv")
        p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
        p.add_argument("--mode", choices=MODES, help="Hamiltonian assembly; overrides [model] mode")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        cfg = parse_config(args.config.read_text())
        if args.mode:
            cfg = cfg.with_mode(args.mode)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        out = args.out or (Path(cfg.csv) if cfg.csv else None)
        if out is None:
            raise ConfigError("no output path: pass --out or set [output] csv")
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_CONFIG
    except ConfigError as exc:
        log.error("%s: %s", args.config, exc)
        return EXIT_CONFIG

    t0 = time.perf_counter()
    try:
        result = RUNNERS[args.command](cfg, threads=args.threads)
    except ConfigError as exc:
        log.error("%s: %s", args.config, exc)
        return EXIT_CONFIG
    except (QuadratureError, EigensolverError, DegenerateBasisError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    wall = time.perf_counter() - t0

    code = EXIT_PARTIAL if result.masked else EXIT_OK
    out.write_text(to_csv(result))
    meta = {
        "command": args.command,
        "version": __version__,
        "schema": SCHEMA_VERSION,
        "config": config_dict(cfg),
        "config_text": serialize_config(cfg),
        "threads": args.threads,
        "rows": len(result.rows),
        "masked_rows": result.masked,
        "notes": result.notes,
        "wall_time_s": wall,
        "exit_code": code,
    }
    Path(str(out) + ".json").write_text(json.dumps(meta, indent=2) + "\n")
    log.info("wrote %d rows to %s (%.2f s)", len(result.rows), out, wall)
    if result.masked:
        log.warning("%d row(s) carry masked values", result.masked)
    return code


if __name__ == "__main__":
    sys.exit(main())
