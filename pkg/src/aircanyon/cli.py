"""Command-line front end: ``extract``, ``classify`` and ``report``.

Exit codes: 0 success, 1 unreadable or malformed input, 2 validation
findings or unresolved ids, 64 usage error, 78 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Optional, Sequence

from . import __version__
from .citygml import CityGMLError, ParseError, ValidationError, load_city, validate_model
from .config import ConfigError, RunConfig, config_from_snapshot, load_config
from .export import (InventoryError, build_inventory, canyons_from_inventory, dumps,
                     report_document, report_geojson, report_text, write_atomic)
from .ontology import AmbientWindConditions, MeteorologicalConditions, ThermalConditions, validate_instance

EX_OK = 0
EX_INPUT = 1
EX_INVALID = 2
EX_USAGE = 64
EX_CONFIG = 78

log = logging.getLogger("aircanyon")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _err(msg: str) -> None:
    print(f"aircanyon: {msg}", file=sys.stderr)


def _read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def cmd_extract(args, cfg: RunConfig) -> int:
    try:
        model = load_city(args.city)
    except OSError as exc:
        _err(f"cannot read {args.city}: {exc}")
        return EX_INPUT
    except ParseError as exc:
        _err(f"{args.city}: {exc}")
        return EX_INPUT
    except ValidationError as exc:
        _err(f"{args.city}: {exc}")
        return EX_INVALID
    findings = validate_model(model)
    if findings:
        for f in findings:
            _err(f"validation: {f}")
        return EX_INVALID
    out = args.out or cfg.inventory_out
    if not out:
        raise UsageError("extract needs --out (or output.inventory in the config)")
    _emit(dumps(build_inventory(model, cfg)), out)
    return EX_OK


def _scenario(args) -> MeteorologicalConditions:
    wind: dict = {}
    thermal = None
    if args.scenario:
        doc = _read_json(args.scenario)
        wind = dict(doc.get("wind", {}))
        thermal = doc.get("thermal")
    if args.wind_speed is not None:
        wind["speed"] = args.wind_speed
    if args.wind_dir is not None:
        wind["direction_from"] = args.wind_dir
    if args.turbulence is not None:
        wind["turbulence_intensity"] = args.turbulence
    if args.thermal:
        doc = _read_json(args.thermal)
        thermal = doc.get("thermal", doc)
    if "speed" not in wind or "direction_from" not in wind:
        raise UsageError("wind speed and direction are required (--wind-speed/--wind-dir or --scenario)")
    try:
        met = MeteorologicalConditions(
            AmbientWindConditions(**wind),
            ThermalConditions(**thermal) if thermal is not None else None,
        )
    except TypeError as exc:
        raise UsageError(f"bad scenario: {exc}") from None
    problems = validate_instance(met)
    if problems:
        raise UsageError("; ".join(problems))
    return met


def cmd_classify(args, cfg: RunConfig) -> int:
    met = _scenario(args)
    try:
        inv = _read_json(args.canyons)
    except (OSError, json.JSONDecodeError) as exc:
        _err(f"cannot read inventory {args.canyons}: {exc}")
        return EX_INPUT
    try:
        model, canyons = canyons_from_inventory(inv, cfg)
    except (InventoryError, CityGMLError) as exc:
        _err(f"{args.canyons}: {exc}")
        return EX_INVALID
    out = args.out or cfg.report_out
    if not out:
        raise UsageError("classify needs --out (or output.report in the config)")
    _emit(dumps(report_document(model, canyons, met, cfg)), out)
    return EX_OK


def cmd_report(args) -> int:
    try:
        doc = _read_json(args.input)
    except (OSError, json.JSONDecodeError) as exc:
        _err(f"cannot read report {args.input}: {exc}")
        return EX_INPUT
    if doc.get("kind") != "canyon-report":
        _err(f"{args.input}: not a canyon report")
        return EX_INVALID
    try:
        if args.format == "geojson":
            text = dumps(report_geojson(doc))
        else:
            config_from_snapshot(doc.get("config", {}))
            text = report_text(doc)
    except (InventoryError, CityGMLError, ConfigError) as exc:
        _err(f"{args.input}: {exc}")
        return EX_INVALID
    _emit(text, args.out)
    return EX_OK


def _wind_dir(text: str) -> float:
    v = float(text)
    if not 0 <= v < 360:
        raise argparse.ArgumentTypeError(f"wind direction must be in [0, 360), got {text}")
    return v


def _non_negative(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="aircanyon", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("extract", help="detect street canyons in a city file")
    e.add_argument("--city", required=True, help="CityGML-lite XML or its JSON twin")
    e.add_argument("--config")
    e.add_argument("--out")

    c = sub.add_parser("classify", help="classify canyons under a wind scenario")
    c.add_argument("--canyons", required=True, help="inventory written by extract")
    c.add_argument("--wind-speed", type=_non_negative, help="m/s")
    c.add_argument("--wind-dir", type=_wind_dir, help="degrees the wind blows from, [0, 360)")
    c.add_argument("--turbulence", type=_non_negative)
    c.add_argument("--thermal", help="JSON file with thermal conditions")
    c.add_argument("--scenario", help="JSON {wind: {...}, thermal: {...}}")
    c.add_argument("--config")
    c.add_argument("--out")

    r = sub.add_parser("report", help="render a canyon report")
    r.add_argument("--in", dest="input", required=True)
    r.add_argument("--format", choices=("text", "geojson"), default="text")
    r.add_argument("--out")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "report":
            return cmd_report(args)
        try:
            cfg = load_config(args.config)
        except ConfigError as exc:
            _err(f"config: {exc}")
            return EX_CONFIG
        if args.command == "extract":
            return cmd_extract(args, cfg)
        return cmd_classify(args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        _err(str(exc))
        return EX_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        _err(str(exc))
        return EX_INPUT


if __name__ == "__main__":
    sys.exit(main())
