"""Command line entry point: ``tract-eroder {setback,analyze,plotdata}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .geo_ingest import (
    IngestError,
    RecordError,
    join_population,
    load_geojson,
    parse_population_table,
    parse_tract_boundaries,
)
from .metrics import MetricsError, cdf_csv, empirical_cdf, format_summary, read_tracts_csv, tracts_csv
from .pipeline import ErosionSettings, analyze_city, city_geojson, manifest, write_json
from .propagation import (
    BUILDING_LOSS_DB,
    DEFAULT_BOUNDARY_LIMIT_DBM,
    DEFAULT_EIRP_DBM,
    DEFAULT_FREQ_MHZ,
    DEPLOYMENT_CLASSES,
    SetbackError,
    SetbackSpec,
    fspl_distance,
    required_path_loss,
    setback_for_deployment,
)

log = logging.getLogger("tract_eroder")

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2
OUTPUT_FORMATS = ("csv", "geojson", "cdf", "summary")
JOBS_ENV = "TRACT_ERODER_JOBS"


@dataclass
class RunConfig:
    kml: list[str]
    population: str
    out: str
    deployment: str | None = None
    setback_m: float | None = None
    spacing_m: float | None = None
    raster_res_m: float | None = None
    formats: list[str] = field(default_factory=lambda: list(OUTPUT_FORMATS))
    lenient: bool = False
    strict_join: bool = False
    jobs: int = 1
    city: str | None = None
    vintage: str | None = None
    id_field: str = "GEOID"
    geoid_column: str = "GEOID"
    population_column: str = "POPULATION"
    solve_all_points: bool = False

    def __post_init__(self):
        if (self.deployment is None) == (self.setback_m is None):
            raise ValueError("exactly one of deployment class and explicit set-back must be given")

    def resolved_setback(self) -> float:
        if self.setback_m is not None:
            if self.setback_m <= 0:
                raise SetbackError("set-back distance must be positive")
            return self.setback_m
        return setback_for_deployment(self.deployment)


def _default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def cmd_setback(args) -> int:
    overrides = {
        "eirp_dbm": args.eirp_dbm,
        "boundary_limit_dbm": args.limit_dbm,
        "freq_mhz": args.freq_mhz,
    }
    try:
        if args.building_loss_db is not None:
            specs = [SetbackSpec(deployment_class="custom", building_loss_db=args.building_loss_db, **overrides)]
        else:
            specs = [SetbackSpec.for_class(c, **overrides) for c in DEPLOYMENT_CLASSES]
        rows = []
        for spec in specs:
            loss = required_path_loss(spec)
            rows.append((spec.deployment_class, spec.building_loss_db, loss, fspl_distance(loss, spec.freq_mhz)))
    except SetbackError as exc:
        print(f"tract-eroder setback: {exc}", file=sys.stderr)
        return EXIT_FATAL
    print(f"{'deployment':<20}{'building_loss_db':>18}{'path_loss_db':>14}{'setback_m':>12}")
    for name, bl, pl, dist in rows:
        print(f"{name:<20}{bl:>18.1f}{pl:>14.1f}{dist:>12.1f}")
    return EXIT_OK


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_tracts(paths, cfg: RunConfig, errors: list):
    tracts, seen = [], set()
    for path in paths:
        text = _read_text(path)
        if Path(path).suffix.lower() in (".geojson", ".json"):
            batch = load_geojson(json.loads(text))
        else:
            batch = parse_tract_boundaries(text, cfg.id_field, cfg.lenient, errors)
        for t in batch:
            if t.geoid in seen:
                err = RecordError(f"duplicate tract identifier across inputs ({path})", t.geoid)
                if not cfg.lenient:
                    raise err
                errors.append(err)
                continue
            seen.add(t.geoid)
            tracts.append(t)
    return tracts


def run_analyze(cfg: RunConfig) -> int:
    errors: list[RecordError] = []
    try:
        setback = cfg.resolved_setback()
        tracts = _load_tracts(cfg.kml, cfg, errors)
        popmap = parse_population_table(
            _read_text(cfg.population), cfg.geoid_column, cfg.population_column, cfg.lenient, errors
        )
    except (OSError, IngestError, SetbackError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return EXIT_FATAL
    if not tracts:
        log.error("no tracts parsed from %s", ", ".join(cfg.kml))
        return EXIT_FATAL
    try:
        joined = join_population(tracts, popmap, strict=cfg.strict_join)
        settings = ErosionSettings(setback, cfg.spacing_m, cfg.raster_res_m, cfg.solve_all_points)
        city = cfg.city or Path(cfg.kml[0]).stem
        analysis = analyze_city(city, joined.tracts, settings, cfg.jobs, cfg.lenient)
    except (IngestError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_FATAL
    errors.extend(analysis.skipped)

    report = analysis.report
    report.metadata["census_vintage"] = cfg.vintage or "unspecified"
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if "csv" in cfg.formats:
            (out / "tracts.csv").write_text(tracts_csv(report.records), encoding="utf-8")
        if "cdf" in cfg.formats:
            (out / "cdf_alp.csv").write_text(cdf_csv(report.alp_cdf), encoding="utf-8")
            (out / "cdf_pctas.csv").write_text(cdf_csv(report.pctas_cdf), encoding="utf-8")
        if "summary" in cfg.formats:
            (out / "summary.txt").write_text(format_summary(report), encoding="utf-8")
        if "geojson" in cfg.formats:
            write_json(out / "allowed.geojson", city_geojson(analysis))
        config = asdict(cfg)
        doc = manifest(analysis, settings, config)
        doc["census_vintage"] = report.metadata["census_vintage"]
        doc["aggregates"] = report.aggregates()
        doc["input_errors"] = [str(e) for e in errors]
        write_json(out / "manifest.json", doc)
    except OSError as exc:
        log.error("cannot write outputs: %s", exc)
        return EXIT_FATAL
    print(format_summary(report), end="")
    return EXIT_PARTIAL if errors else EXIT_OK


def cmd_analyze(args) -> int:
    try:
        cfg = RunConfig(
            kml=args.kml,
            population=args.population,
            out=args.out,
            deployment=args.deployment,
            setback_m=args.setback_m,
            spacing_m=args.spacing_m,
            raster_res_m=args.raster_res_m,
            formats=args.formats,
            lenient=args.lenient,
            strict_join=args.strict_join,
            jobs=args.jobs,
            city=args.city,
            vintage=args.vintage,
            id_field=args.id_field,
            geoid_column=args.geoid_column,
            population_column=args.population_column,
            solve_all_points=args.all_points,
        )
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_FATAL
    return run_analyze(cfg)


def _run_dirs(root: Path) -> list[Path]:
    if (root / "tracts.csv").is_file():
        return [root]
    if not root.is_dir():
        return []
    return sorted(p for p in root.iterdir() if (p / "tracts.csv").is_file())


def _series(path: Path, city: str, metric: str, cdf) -> None:
    lines = [f"# city: {city}", f"# metric: {metric}", "# value cum_prob"]
    lines += [f"{v!r} {p!r}" for v, p in cdf.rows()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_plotdata(args) -> int:
    runs = [d for root in args.out for d in _run_dirs(Path(root))]
    if not runs:
        log.error("no analyze output (tracts.csv) found under %s", ", ".join(args.out))
        return EXIT_FATAL
    for run in runs:
        city = run.name
        man = run / "manifest.json"
        if man.is_file():
            city = json.loads(man.read_text(encoding="utf-8")).get("city", city)
        try:
            records = read_tracts_csv((run / "tracts.csv").read_text(encoding="utf-8"))
            alp_cdf = empirical_cdf(r.alp for r in records)
            pctas_cdf = empirical_cdf(r.pctas for r in records)
        except (MetricsError, ValueError, KeyError) as exc:
            log.error("%s: %s", run / "tracts.csv", exc)
            return EXIT_FATAL
        _series(run / "cdf_alp.dat", city, "alp", alp_cdf)
        _series(run / "cdf_pctas.dat", city, "pctas", pctas_cdf)
        print(f"{city}: {run / 'cdf_alp.dat'} {run / 'cdf_pctas.dat'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tract-eroder", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("setback", help="print set-back distances per deployment class")
    p.add_argument("--eirp-dbm", type=float, default=DEFAULT_EIRP_DBM)
    p.add_argument("--limit-dbm", type=float, default=DEFAULT_BOUNDARY_LIMIT_DBM)
    p.add_argument("--building-loss-db", type=float, default=None,
                   help="custom building loss; prints a single row instead of the three classes")
    p.add_argument("--freq-mhz", type=float, default=DEFAULT_FREQ_MHZ)
    p.set_defaults(func=cmd_setback)

    p = sub.add_parser("analyze", help="erode tracts and write per-tract metrics")
    p.add_argument("--kml", nargs="+", required=True, help="tract boundary KML (or toolkit GeoJSON) files")
    p.add_argument("--population", required=True, help="population CSV")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--deployment", choices=[c.replace("_", "-") for c in BUILDING_LOSS_DB])
    group.add_argument("--setback-m", type=float)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--spacing-m", type=float, default=None, help="densification spacing (default d/2)")
    p.add_argument("--raster-res-m", type=float, default=None, help="raster oracle pitch (default d/20)")
    p.add_argument("--formats", nargs="+", choices=OUTPUT_FORMATS, default=list(OUTPUT_FORMATS))
    p.add_argument("--lenient", action="store_true", help="skip bad records instead of failing")
    p.add_argument("--strict-join", action="store_true", help="fail when tracts and population rows do not match")
    p.add_argument("--jobs", type=int, default=_default_jobs(), help=f"worker processes (default ${JOBS_ENV} or 1)")
    p.add_argument("--city", default=None, help="city label (default: first input file name)")
    p.add_argument("--vintage", default=None, help="census boundary vintage recorded in the outputs")
    p.add_argument("--id-field", default="GEOID", help="KML extended-data field holding the tract id")
    p.add_argument("--geoid-column", default="GEOID")
    p.add_argument("--population-column", default="POPULATION")
    p.add_argument("--all-points", action="store_true",
                   help="move every densified point, not just original vertices")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("plotdata", help="write two-column CDF series from analyze output")
    p.add_argument("--out", nargs="+", required=True, help="analyze output directory, or a parent of several")
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
