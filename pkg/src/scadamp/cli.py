"""``scadamp`` command-line tool.

    scadamp <experiment> [--config FILE.json] [--out FILE.csv] [--seed N] [--threads N]

Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import shutil
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import EXPERIMENTS, ConfigError, make_config, render_csv, run_unit, units
from .penalty import DegenerateCurvature

log = logging.getLogger("scadamp")

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="scadamp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"scadamp {__version__}")
    sub = ap.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name in EXPERIMENTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON file of sweep settings")
        sp.add_argument("--out", type=Path, help="output CSV path")
        sp.add_argument("--seed", type=int, help="base seed (overrides the config)")
        sp.add_argument("--threads", type=int, default=1, help="worker processes")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def _plain(v):
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _parts_dir(out: Path, echo: str) -> Path:
    parts = out.with_name(out.name + ".parts")
    stamp = parts / "config.json"
    if parts.exists():
        if not stamp.exists() or stamp.read_text() != echo:
            raise ConfigError(f"{parts} holds partial results of a different sweep; remove it")
    else:
        parts.mkdir(parents=True)
        _atomic_write(stamp, echo)
    return parts


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        raw = {}
        if args.config is not None:
            try:
                raw = json.loads(args.config.read_text())
            except (OSError, json.JSONDecodeError) as e:
                raise ConfigError(f"cannot read config: {e}") from None
            if not isinstance(raw, dict):
                raise ConfigError("config must be a JSON object")
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg = make_config(args.experiment, raw, base_seed=args.seed)
        out = args.out or Path(cfg.output_path or f"{cfg.experiment}.csv")
        echo = cfg.echo()
        out.parent.mkdir(parents=True, exist_ok=True)
        parts = _parts_dir(out, echo)
    except ConfigError as e:
        print(f"scadamp: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    todo = units(cfg)
    names = [parts / f"unit-{i:06d}.json" for i in range(len(todo))]
    pending = [i for i, n in enumerate(names) if not n.exists()]
    if len(pending) < len(todo):
        log.info("resuming: %d of %d grid points already done", len(todo) - len(pending), len(todo))

    def save(i, rows):
        rows = [{k: _plain(v) for k, v in r.items()} for r in rows]
        _atomic_write(names[i], json.dumps(rows))
        log.info("finished grid point %d/%d %s", i + 1, len(todo), todo[i])

    try:
        if args.threads > 1 and len(pending) > 1:
            with ProcessPoolExecutor(max_workers=args.threads) as pool:
                futs = {i: pool.submit(run_unit, cfg, todo[i]) for i in pending}
                for i in pending:
                    save(i, futs[i].result())
        else:
            for i in pending:
                save(i, run_unit(cfg, todo[i]))
    except (ArithmeticError, DegenerateCurvature, np.linalg.LinAlgError) as e:
        print(f"scadamp: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC

    rows = []
    for n in names:
        rows.extend(json.loads(n.read_text()))
    text = render_csv(cfg, rows, __version__)
    _atomic_write(out, text)
    shutil.rmtree(parts)
    log.info("wrote %s (%d rows, sha256 %s)", out, len(rows),
             hashlib.sha256(text.encode()).hexdigest()[:12])
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
