"""Batch command-line driver.

    scadda cluster --spatial s.csv --temporal t.csv --out run/result [options]
    scadda synth --seed 42 --out data/toy
    scadda sample-grid --grid burned.csv --n 5000 --seed 42 --out samples.csv

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal error.
"""
import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .cluster import ClusterParams, cluster
from .density import ALGORITHMS, RESCALE_FORMS, BandwidthSpec
from .geodesy import METRICS
from .io import (
    DEFAULT_SEED,
    DataError,
    generate_toy_dataset,
    load_grid_csv,
    load_spatial_csv,
    load_temporal_csv,
    sample_from_grid,
    write_labels_csv,
    write_spatial_csv,
    write_summary,
    write_temporal_csv,
)
from .warp import WarpWindow

log = logging.getLogger("scadda")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def _bool(text):
    key = str(text).strip().lower()
    if key in ("1", "true", "yes", "on"):
        return True
    if key in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _optional_float(text):
    key = str(text).strip().lower()
    return None if key in ("", "auto", "none") else float(key)


# name -> (parser, default, help)
RUN_OPTIONS = {
    "spatial": (str, None, "CSV with header id,lat,lon"),
    "temporal": (str, None, "CSV with header id,t1,...,tM"),
    "out": (str, None, "output prefix; writes <out>_labels.csv and <out>_summary.csv"),
    "s_limit": (_optional_float, None,
                "maximum intra-cluster spatial distance, km for orthodromic and degrees "
                "for euclidean (default: coordinate-spread heuristic)"),
    "t_limit": (_optional_float, None,
                "maximum intra-cluster temporal (DTW) distance "
                "(default: mean of the DTW matrix)"),
    "minimum_neighbors": (int, 5, "minimum neighbours for non-outlier status"),
    "steepness": (float, 1.0, "logistic steepness k of the density rescaling"),
    "window_param": (WarpWindow.parse, WarpWindow(),
                     "Sakoe-Chiba half-width: cells if >= 1, fraction of series length if < 1, "
                     "or 'none'"),
    "distance_measure": (str, "orthodromic", f"one of {', '.join(METRICS)}"),
    "outlier_perc": (float, 100.0,
                     "maximum outlier percentage; below 100 enables pseudo-cluster passes"),
    "z_score": (_bool, False, "z-normalise each time series"),
    "algorithm": (str, "scadda", f"one of {', '.join(ALGORITHMS)}"),
    "bandwidth": (BandwidthSpec.parse, BandwidthSpec(), "scott, silverman, or a positive number"),
    "rescale_form": (str, "mean_of_weights", f"one of {', '.join(RESCALE_FORMS)}"),
    "robust_z": (_bool, False, "use median/MAD instead of mean/std when z_score is on"),
    "workers": (int, 1, "threads for the distance matrices (never changes the output)"),
}
PARAM_KEYS = (
    "s_limit", "t_limit", "minimum_neighbors", "steepness", "window_param",
    "distance_measure", "outlier_perc", "z_score", "algorithm", "bandwidth",
    "rescale_form", "robust_z",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_config(path):
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    for num, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in RUN_OPTIONS:
            raise ConfigError(f"{path}:{num}: unknown key {key!r}")
        out[key] = value
    return out


def resolve_config(args):
    """Defaults, then the config file, then explicit flags."""
    raw = read_config(args.config) if args.config else {}
    for key in RUN_OPTIONS:
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
    cfg = {}
    for key, (parse, default, _) in RUN_OPTIONS.items():
        if key not in raw:
            cfg[key] = default
            continue
        try:
            cfg[key] = parse(raw[key])
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
    for key in ("spatial", "temporal", "out"):
        if not cfg[key]:
            raise ConfigError(f"missing required setting {key!r}")
    return cfg


def format_config(cfg):
    def text(v):
        if v is None:
            return "auto"
        if isinstance(v, bool):
            return str(v).lower()
        return str(v)
    return "\n".join(f"{k} = {text(v)}" for k, v in cfg.items())


def cmd_cluster(args):
    cfg = resolve_config(args)
    try:
        params = ClusterParams(**{k: cfg[k] for k in PARAM_KEYS})
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    log.info("effective configuration:\n%s", format_config(cfg))

    spatial = load_spatial_csv(cfg["spatial"])
    if spatial.dropped:
        log.warning("dropped %d rows with missing coordinates", spatial.dropped)
    temporal = load_temporal_csv(cfg["temporal"], spatial.ids)
    result = cluster(spatial.points, temporal.series, params, workers=cfg["workers"])
    log.info("limits used: s_limit = %r, t_limit = %r",
             result.params.s_limit, result.params.t_limit)

    out = Path(cfg["out"])
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    write_labels_csv(f"{out}_labels.csv", spatial.ids, result.labels)
    write_summary(f"{out}_summary.csv", result.labels, temporal.series,
                  result.pseudo_labels, result.cap_unreachable)
    n_pseudo = int(result.pseudo.sum())
    print(f"clusters: {result.n_clusters} ({n_pseudo} pseudo)  "
          f"outliers: {int((result.labels == 0).sum())} ({100 * result.outlier_fraction:.2f}%)")
    if result.cap_unreachable:
        log.warning("outlier cap of %g%% could not be reached after %d passes",
                    params.outlier_perc, result.passes)
    return EXIT_OK


def cmd_synth(args):
    spatial, temporal, truth = generate_toy_dataset(args.seed)
    prefix = Path(args.out)
    if prefix.parent != Path(""):
        prefix.parent.mkdir(parents=True, exist_ok=True)
    write_spatial_csv(f"{prefix}_spatial.csv", spatial)
    write_temporal_csv(f"{prefix}_temporal.csv", temporal)
    write_labels_csv(f"{prefix}_truth.csv", spatial.ids, truth, column="truth")
    print(f"wrote {len(spatial)} points to {prefix}_spatial.csv")
    return EXIT_OK


def cmd_sample_grid(args):
    if args.n < 1:
        raise ConfigError(f"--n must be >= 1, got {args.n}")
    grid = load_grid_csv(args.grid, args.cell_size)
    table = sample_from_grid(grid, args.n, args.seed)
    write_spatial_csv(args.out, table)
    print(f"wrote {len(table)} samples to {args.out}")
    return EXIT_OK


def build_parser():
    p = _Parser(prog="scadda", description="Density-rescaled spatio-temporal DBSCAN.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="warnings only")

    c = sub.add_parser("cluster", parents=[common], help="cluster spatial + temporal CSV inputs")
    c.add_argument("--config", help="key = value file; flags override its entries")
    for key, (_, default, text) in RUN_OPTIONS.items():
        if key in ("spatial", "temporal", "out"):
            text += " (required here or in --config)"
        elif default is not None:
            text += f" (default: {str(default).lower() if isinstance(default, bool) else default})"
        if key in ("z_score", "robust_z"):
            c.add_argument(f"--{key}", nargs="?", const="true", default=None,
                           metavar="BOOL", help=text)
        else:
            c.add_argument(f"--{key}", default=None, help=text)
    c.set_defaults(func=cmd_cluster)

    s = sub.add_parser("synth", parents=[common], help="write the eight-Gaussian test dataset")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed (default: 42)")
    s.add_argument("--out", required=True, help="output prefix")
    s.set_defaults(func=cmd_synth)

    g = sub.add_parser("sample-grid", parents=[common], help="resample locations from a lat,lon,value grid")
    g.add_argument("--grid", required=True, help="CSV with header lat,lon,value (cell centres)")
    g.add_argument("--n", type=int, required=True, help="number of samples")
    g.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed (default: 42)")
    g.add_argument("--out", required=True, help="output spatial CSV")
    g.add_argument("--cell-size", type=float, default=None,
                   help="cell size in degrees (inferred from the centres if omitted)")
    g.set_defaults(func=cmd_sample_grid)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", force=True)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"scadda: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ValueError, OSError) as exc:
        print(f"scadda: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # invariant violations and bugs
        print(f"scadda: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
