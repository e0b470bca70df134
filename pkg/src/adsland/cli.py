"""Command-line front end: ``adsland <scenario> [--config FILE] [overrides]``.

Exit status: 0 all checks pass, 1 a check failed, 2 configuration error,
3 internal or I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3
THREAD_ENV = "ADSLAND_THREADS"

log = logging.getLogger("adsland")


def _parser():
    from .scenarios import SCENARIOS

    p = argparse.ArgumentParser(prog="adsland", description=__doc__.splitlines()[0])
    p.add_argument("scenario", choices=SCENARIOS)
    p.add_argument("--config", help="JSON scenario configuration")
    p.add_argument("--alpha", type=float, help="landslide angle")
    p.add_argument("--curvature", type=float, dest="K", help="surface curvature K < -1")
    p.add_argument("--fixture", help="named fixture")
    p.add_argument("--out", help="output directory (default adsland-out)")
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                   help="override a check tolerance (repeatable)")
    p.add_argument("--format", action="append", dest="formats", choices=("json", "csv", "text"),
                   help="report formats to write (repeatable, default json)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _threads(cfg_threads):
    env = os.environ.get(THREAD_ENV)
    if env is None:
        return cfg_threads
    try:
        return int(env)
    except ValueError:
        from .errors import ConfigError

        raise ConfigError(f"{THREAD_ENV} must be an integer, got {env!r}") from None


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    from .errors import CheckFailure, ConfigError, IoError
    from .report import emit_report, format_text
    from .scenarios import build_config, load_config, run

    try:
        data = load_config(args.config) if args.config else {}
        if data.get("scenario", args.scenario) != args.scenario:
            raise ConfigError(f"config is for scenario {data['scenario']!r}, not {args.scenario!r}")
        data["scenario"] = args.scenario
        for key in ("alpha", "K", "fixture", "out"):
            val = getattr(args, key)
            if val is not None:
                data[key] = val
        if args.formats:
            data["formats"] = args.formats
        tol = dict(data.get("tol", {}))
        for item in args.tol:
            name, sep, val = item.partition("=")
            if not sep:
                raise ConfigError(f"--tol expects NAME=VALUE, got {item!r}")
            try:
                tol[name] = float(val)
            except ValueError:
                raise ConfigError(f"bad tolerance value in {item!r}") from None
        data["tol"] = tol
        data["threads"] = _threads(int(data.get("threads", 1)))
        cfg = build_config(data)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if os.path.exists(cfg.out) and not os.path.isdir(cfg.out):
            raise IoError(f"output path {cfg.out} exists and is not a directory")
        report = run(cfg)
        emit_report(report, cfg.out, cfg.formats)
        sys.stdout.write(format_text(report))
        if not report.passed:
            raise CheckFailure(", ".join(c.name for c in report.checks if not c.passed))
    except CheckFailure as exc:
        print(f"check failure: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - every other failure maps to the internal-error code
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
