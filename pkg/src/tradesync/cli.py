"""Command line entry point: ``tradesync {detect,simulate,generate}``.

Exit codes: 0 success, 2 bad configuration, 3 input files that cannot be
read or parsed, 4 failure while running.
"""
from __future__ import annotations

import argparse
import hashlib
import logging
import math
import shutil
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__, generators
from .community import Partition, optimize_modularity, read_partition_csv, write_partition_csv
from .dynamics import (DEFAULT_B, DEFAULT_MAX_CYCLES, DEFAULT_SAMPLE_INTERVAL,
                       DEFAULT_SYNC_FRACTION, ReplicaError, build_coupling, run_replica)
from .io import (fit_report, write_cascades_csv, write_fit_json, write_histogram_csv,
                 write_order_parameter_csv, write_raster_csv, write_scatter_csv)
from .metrics import (Histogram, default_fit_range, fit_power_law, r_alpha_vs_r_scatter,
                      samples_from_result, sync_time_distribution)
from .netcore import EdgeListError, Network, load_edge_list, summarize, write_edge_list, write_summary_csv

log = logging.getLogger("tradesync")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INGEST = 3
EXIT_RUNTIME = 4


class ConfigError(ValueError):
    pass


class IngestError(RuntimeError):
    pass


@dataclass
class RunConfig:
    network_path: str = ""
    b: float = DEFAULT_B
    replicas: int = 1000
    base_seed: int = 0
    sync_fraction: float = DEFAULT_SYNC_FRACTION
    max_cycles: float = DEFAULT_MAX_CYCLES
    sample_interval: float = DEFAULT_SAMPLE_INTERVAL
    # "detect", "none" or "file:<path>"
    partition_source: str = "none"
    output_dir: str = "out"
    parallelism: int = 1
    delimiter: str | None = None
    bin_width: float = 50.0
    restarts: int = 10
    save_replicas: bool = False

    def validate(self) -> "RunConfig":
        if not self.network_path:
            raise ConfigError("no network given (--network)")
        if not (self.b > 0 and math.isfinite(self.b)):
            raise ConfigError(f"b must be positive, got {self.b}")
        if self.replicas < 1:
            raise ConfigError("replicas must be >= 1")
        if not 0 < self.sync_fraction <= 1:
            raise ConfigError("sync_fraction must be in (0, 1]")
        if not self.max_cycles > 0:
            raise ConfigError("max_cycles must be positive")
        if not self.sample_interval > 0:
            raise ConfigError("sample_interval must be positive")
        if not self.bin_width > 0:
            raise ConfigError("bin_width must be positive")
        if self.parallelism < 1:
            raise ConfigError("jobs must be >= 1")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")
        src = self.partition_source
        if not (src in ("detect", "none") or (src.startswith("file:") and len(src) > 5)):
            raise ConfigError(f"bad partition source {src!r}")
        return self

    @property
    def seeds(self) -> list[int]:
        return [self.base_seed + k for k in range(self.replicas)]


# config-file key / flag dest -> RunConfig field
_KEYS = {
    "network": "network_path", "b": "b", "replicas": "replicas", "seed": "base_seed",
    "sync_fraction": "sync_fraction", "max_cycles": "max_cycles",
    "sample_interval": "sample_interval", "out": "output_dir", "jobs": "parallelism",
    "delimiter": "delimiter", "bin_width": "bin_width", "restarts": "restarts",
    "save_replicas": "save_replicas",
}


def _as_bool(value: str) -> bool:
    if value.lower() in ("1", "true", "yes", "on"):
        return True
    if value.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(value)


def _coerce(name: str, value: str):
    kind = {f.name: f.type for f in fields(RunConfig)}[name]
    try:
        if kind == "bool":
            return _as_bool(value)
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {value!r}") from None
    return value


def read_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines into RunConfig field values."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    out = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "partition":
            out["partition_source"] = f"file:{value}"
        elif key == "detect_communities":
            try:
                detect = _as_bool(value)
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: bad value for detect_communities") from None
            if detect:
                out["partition_source"] = "detect"
        elif key in _KEYS:
            out[_KEYS[key]] = _coerce(_KEYS[key], value)
        elif key in {f.name for f in fields(RunConfig)}:
            out[key] = _coerce(key, value)
        else:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    return out


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    for dest, name in _KEYS.items():
        v = getattr(args, dest, None)
        if v is not None:
            values[name] = v
    if getattr(args, "partition", None):
        values["partition_source"] = f"file:{args.partition}"
    if getattr(args, "detect_communities", False):
        values["partition_source"] = "detect"
    return RunConfig(**values).validate()


def _load(cfg: RunConfig) -> Network:
    try:
        return load_edge_list(cfg.network_path, delimiter=cfg.delimiter)
    except (FileNotFoundError, EdgeListError) as exc:
        raise IngestError(str(exc)) from exc


def _partition(cfg: RunConfig, net: Network) -> Partition | None:
    src = cfg.partition_source
    if src == "none":
        return None
    if src == "detect":
        return optimize_modularity(net, rng_seed=cfg.base_seed, restarts=cfg.restarts)
    try:
        return read_partition_csv(net, src[len("file:"):])
    except (FileNotFoundError, ValueError) as exc:
        raise IngestError(str(exc)) from exc


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class _Outputs:
    """Tracks written files so a failed run leaves nothing half-written behind."""

    def __init__(self, root: Path):
        self.root = root
        self.created_root = not root.exists()
        self.files: list[Path] = []
        self.dirs: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.root / name
        for parent in reversed(p.relative_to(self.root).parents):
            d = self.root / parent
            if not d.exists():
                d.mkdir(parents=True)
                self.dirs.append(d)
        self.files.append(p)
        return p

    def cleanup(self):
        for p in self.files:
            p.unlink(missing_ok=True)
        for d in reversed(self.dirs):
            if d.exists() and not any(d.iterdir()):
                d.rmdir()
        if self.created_root and self.root.exists():
            shutil.rmtree(self.root, ignore_errors=True)


def _summary_extra(part: Partition) -> dict:
    return {"q": part.q, "m": part.m_communities,
            "sizes": " ".join(str(s) for s in sorted(part.sizes, reverse=True))}


def cmd_detect(cfg: RunConfig) -> dict:
    net = _load(cfg)
    part = optimize_modularity(net, rng_seed=cfg.base_seed, restarts=cfg.restarts)
    out = _Outputs(Path(cfg.output_dir))
    out.root.mkdir(parents=True, exist_ok=True)
    try:
        write_partition_csv(net, part, out.path("partition.csv"))
        summary = summarize(net)
        write_summary_csv(summary, out.path("summary.csv"), _summary_extra(part))
    except Exception:
        out.cleanup()
        raise
    log.info("N=%d D=%.4f Q=%.4f M=%d sizes=%s", summary.n, summary.density, part.q,
             part.m_communities, sorted(part.sizes, reverse=True))
    return {"summary": summary, "partition": part}


def _simulate_task(task):
    net, seed, kwargs, cascades_path = task
    try:
        res = run_replica(net, seed=seed, **kwargs)
    except Exception as exc:  # noqa: BLE001 - re-raised with seed attribution
        raise ReplicaError(seed, exc) from exc
    if cascades_path is not None:
        write_cascades_csv(res, cascades_path)
    sizes = np.bincount([c.size for c in res.cascades], minlength=net.n_nodes + 1)[1:]
    return res.sync_time, sizes


class _SyncOnly:
    def __init__(self, sync_time):
        self.sync_time = sync_time


def cmd_simulate(cfg: RunConfig) -> dict:
    net = _load(cfg)
    part = _partition(cfg, net)
    out = _Outputs(Path(cfg.output_dir))
    out.root.mkdir(parents=True, exist_ok=True)
    try:
        return _simulate(cfg, net, part, out)
    except Exception:
        out.cleanup()
        raise


def _simulate(cfg: RunConfig, net: Network, part: Partition | None, out: _Outputs) -> dict:
    seeds = cfg.seeds
    kwargs = dict(b=cfg.b, sync_fraction=cfg.sync_fraction, max_cycles=cfg.max_cycles,
                  coupling=build_coupling(net))
    if part is not None:
        write_partition_csv(net, part, out.path("partition.csv"))

    # replica 0 carries the time series; the rest only feed the histograms
    first = run_replica(net, seed=seeds[0], sample_interval=cfg.sample_interval,
                        partition=part, **kwargs)
    cascade_paths = [out.path(f"replicas/cascades_seed{s}.csv") if cfg.save_replicas else None
                     for s in seeds]
    if cascade_paths[0] is not None:
        write_cascades_csv(first, cascade_paths[0])
    sync_times = [first.sync_time]
    size_counts = np.bincount([c.size for c in first.cascades], minlength=net.n_nodes + 1)[1:]
    tasks = [(net, s, dict(kwargs, sample_interval=None), p)
             for s, p in zip(seeds[1:], cascade_paths[1:])]
    if tasks:
        if cfg.parallelism > 1:
            with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
                rest = list(pool.map(_simulate_task, tasks,
                                     chunksize=max(1, len(tasks) // (4 * cfg.parallelism))))
        else:
            rest = [_simulate_task(t) for t in tasks]
        for t, counts in rest:
            sync_times.append(t)
            size_counts += counts

    sync_hist = sync_time_distribution([_SyncOnly(t) for t in sync_times], cfg.bin_width)
    size_hist = Histogram(np.arange(1, net.n_nodes + 2, dtype=float), size_counts)
    try:
        report = fit_report(fit_power_law(size_hist, default_fit_range(net.n_nodes)))
    except ValueError as exc:
        report = fit_report(None, str(exc))

    write_histogram_csv(sync_hist, out.path("sync_time_hist.csv"))
    write_histogram_csv(size_hist, out.path("cascade_size_hist.csv"))
    write_fit_json(report, out.path("power_law_fit.json"))
    assignment = None if part is None else part.assignment
    write_raster_csv(first, out.path("raster.csv"), net.node_ids, assignment)
    write_order_parameter_csv(first, out.path("order_parameter.csv"))
    write_scatter_csv(r_alpha_vs_r_scatter(samples_from_result(first)), out.path("scatter.csv"))

    manifest = out.path("manifest.txt")
    _write_manifest(manifest, cfg, out, sync_hist)
    log.info("%d replicas, %d synchronized, %d censored", len(seeds),
             len(seeds) - sync_hist.censored, sync_hist.censored)
    return {"sync_hist": sync_hist, "size_hist": size_hist, "fit": report, "first": first,
            "files": [p for p in out.files if p != manifest]}


def _write_manifest(path: Path, cfg: RunConfig, out: _Outputs, sync_hist: Histogram) -> None:
    # where and how wide the run was does not change any output
    cfg_items = {k: v for k, v in asdict(cfg).items() if k not in ("parallelism", "output_dir")}
    lines = ["# tradesync simulate manifest", f"version={__version__}"]
    lines += [f"{k}={v}" for k, v in cfg_items.items()]
    net_path = Path(cfg.network_path)
    lines.append(f"network_sha256={_sha256(net_path)}")
    seeds = cfg.seeds
    lines.append(f"seeds={seeds[0]}..{seeds[-1]}")
    lines.append(f"synchronized={cfg.replicas - sync_hist.censored}")
    lines.append(f"censored={sync_hist.censored}")
    lines.append("[files]")
    for p in sorted(out.files, key=lambda q: q.relative_to(out.root).as_posix()):
        if p == path:
            continue
        lines.append(f"{_sha256(p)}  {p.relative_to(out.root).as_posix()}")
    path.write_text("\n".join(lines) + "\n")


def cmd_generate(kind: str, params: dict, seed: int, out_path: str | Path) -> dict:
    out_path = Path(out_path)
    truth = None
    if kind == "complete":
        net = generators.complete(params["n"], params.get("weight", 1.0))
    elif kind == "planted_blocks":
        net, truth = generators.planted_blocks(params["blocks"], params["block_size"],
                                               params.get("intra", 10.0), params.get("inter", 0.1))
    elif kind == "random_sparse":
        net = generators.random_sparse(params["n"], params["density"], seed)
    else:
        raise ConfigError(f"unknown kind {kind!r}")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_edge_list(net, out_path)
    result = {"network": net, "path": out_path}
    if truth is not None:
        truth_path = out_path.with_name(out_path.stem + ".partition.csv")
        write_partition_csv(net, truth, truth_path)
        result["partition"] = truth
        result["partition_path"] = truth_path
    return result


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tradesync", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def run_flags(sp, simulate: bool):
        sp.add_argument("--config", help="key=value file; flags override it")
        sp.add_argument("--network", help="edge-list file: 'source target weight' per line")
        sp.add_argument("--delimiter", help="field delimiter (default: whitespace)")
        sp.add_argument("--seed", type=int, help="base seed (default 0)")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--restarts", type=int, help="optimizer restarts (default 10)")
        if not simulate:
            return
        sp.add_argument("--b", type=float, help="dissipation parameter (default 3)")
        sp.add_argument("--replicas", type=int, help="number of replicas (default 1000)")
        sp.add_argument("--sync-fraction", dest="sync_fraction", type=float,
                        help="cascade fraction that counts as synchronized (default 0.9)")
        sp.add_argument("--max-cycles", dest="max_cycles", type=float, help="default 1e4")
        sp.add_argument("--sample-interval", dest="sample_interval", type=float,
                        help="order-parameter sampling step in cycles (default 0.1)")
        sp.add_argument("--bin-width", dest="bin_width", type=float,
                        help="sync-time histogram bin width (default 50)")
        group = sp.add_mutually_exclusive_group()
        group.add_argument("--partition", help="partition CSV (node_label,community_id)")
        group.add_argument("--detect-communities", dest="detect_communities", action="store_true",
                           default=None)
        sp.add_argument("--jobs", type=int, help="worker processes (default 1)")
        sp.add_argument("--save-replicas", dest="save_replicas", action="store_true", default=None,
                        help="also write one cascade CSV per replica")

    run_flags(sub.add_parser("detect", help="community detection and network summary"), False)
    run_flags(sub.add_parser("simulate", help="run the oscillator ensemble"), True)

    g = sub.add_parser("generate", help="write a synthetic edge list")
    g.add_argument("kind", choices=["complete", "planted_blocks", "random_sparse"])
    g.add_argument("--out", required=True, help="edge-list file to write")
    g.add_argument("--n", type=int)
    g.add_argument("--weight", type=float, default=1.0)
    g.add_argument("--blocks", type=int, default=4)
    g.add_argument("--block-size", dest="block_size", type=int, default=10)
    g.add_argument("--intra", type=float, default=10.0)
    g.add_argument("--inter", type=float, default=0.1)
    g.add_argument("--density", type=float)
    g.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        if args.command == "generate":
            params = {k: getattr(args, k) for k in
                      ("n", "weight", "blocks", "block_size", "intra", "inter", "density")}
            needed = {"complete": ["n"], "random_sparse": ["n", "density"], "planted_blocks": []}
            missing = [k for k in needed[args.kind] if params[k] is None]
            if missing:
                raise ConfigError(f"{args.kind} needs --{' --'.join(missing)}")
            try:
                cmd_generate(args.kind, params, args.seed, args.out)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        else:
            cfg = config_from_args(args)
            if args.command == "detect":
                cmd_detect(cfg)
            else:
                cmd_simulate(cfg)
    except ConfigError as exc:
        print(f"tradesync: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IngestError as exc:
        print(f"tradesync: input error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except Exception as exc:  # noqa: BLE001 - mapped to the runtime exit code
        print(f"tradesync: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
