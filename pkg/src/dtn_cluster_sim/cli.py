"""Scenario configuration and batch orchestration.

A JSON config file names the inputs (a trace/profile pair on disk, or
synthetic-generator parameters), the router settings and the sweep axes
(category counts x seeds). `run_sweep` executes one simulation per sweep
point and lays the results out as:

    out/
      config.json            effective config echo (reproduces the sweep)
      summary.csv            one row per run
      runs/n<cat>_s<seed>/   per_message.csv, clustering.txt (k-means mode)

Exit status: 0 all runs fine, 1 any run failed, 2 config error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .clustering import dump_clustering
from .metrics import build_report, per_message_csv, summary_header, summary_row
from .sim_engine import RouterConfig, Scenario, ScheduleConfig, run
from .trace_model import (InterestProfile, SyntheticParams, generate_synthetic_trace,
                          parse_contact_trace, parse_interest_profiles,
                          serialize_contact_trace, serialize_profiles,
                          validate_scenario)

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


class UnknownKey(ConfigError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown config key: {name}")


class MissingRequired(ConfigError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"missing required config key: {name}")


class ConflictingSources(ConfigError):
    def __init__(self):
        super().__init__("config sets both a trace file and synthetic parameters")


_TOP_KEYS = {
    "trace", "trace_format", "profiles", "out", "router", "mode", "strict",
    "threshold", "k_clusters", "buffer_capacity", "ttl",
    "max_transfers_per_contact", "message_count", "message_interval",
    "track_final", "categories", "seeds", "synthetic",
}
_SYNTH_KEYS = {
    "node_count", "duration", "contact_rate", "interest_prob",
    "mean_contact_duration", "shared_interest_bias",
}


@dataclass
class RunConfig:
    categories: list[int]
    seeds: list[int] = field(default_factory=lambda: [0])
    trace: str | None = None
    trace_format: str = "tabular"
    profiles: str | None = None
    out: str | None = None
    router: str = "cluster"
    mode: str = "exact"
    strict: bool = False
    threshold: float = 0.5
    k_clusters: int | None = None
    buffer_capacity: int | None = 50
    ttl: float | None = None
    max_transfers_per_contact: int | None = None
    message_count: int = 20
    message_interval: float | None = None
    track_final: bool = False
    synthetic: dict | None = None

    def router_config(self) -> RouterConfig:
        return RouterConfig(
            kind=self.router, mode=self.mode, strict=self.strict,
            threshold=self.threshold, k_clusters=self.k_clusters,
            buffer_capacity=self.buffer_capacity, ttl=self.ttl,
            max_transfers_per_contact=self.max_transfers_per_contact,
        )

    def schedule_config(self) -> ScheduleConfig:
        return ScheduleConfig(count=self.message_count,
                              interval=self.message_interval,
                              track_final=self.track_final)

    def effective(self) -> dict:
        """Everything needed to reproduce the sweep (the output directory
        is not part of the results, so it is not echoed)."""
        return {
            "trace": self.trace,
            "trace_format": self.trace_format,
            "profiles": self.profiles,
            "router": self.router,
            "mode": self.mode,
            "strict": self.strict,
            "threshold": self.threshold,
            "k_clusters": self.k_clusters,
            "buffer_capacity": self.buffer_capacity,
            "ttl": self.ttl,
            "max_transfers_per_contact": self.max_transfers_per_contact,
            "message_count": self.message_count,
            "message_interval": self.message_interval,
            "track_final": self.track_final,
            "categories": list(self.categories),
            "seeds": list(self.seeds),
            "synthetic": dict(self.synthetic) if self.synthetic is not None else None,
        }


def _require(condition: bool, error: ConfigError):
    if not condition:
        raise error


def _int_list(value, name: str) -> list[int]:
    if (not isinstance(value, list) or not value
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in value)):
        raise ConfigError(f"{name} must be a non-empty list of integers")
    return list(value)


def parse_config(path, overrides: dict | None = None) -> RunConfig:
    """Load a JSON config file; non-None overrides win over file values."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")

    for key in data:
        if key not in _TOP_KEYS:
            raise UnknownKey(key)
    synthetic = data.get("synthetic")
    if synthetic is not None:
        if not isinstance(synthetic, dict):
            raise ConfigError("synthetic must be an object")
        for key in synthetic:
            if key not in _SYNTH_KEYS:
                raise UnknownKey(f"synthetic.{key}")
        for key in ("node_count", "duration", "contact_rate", "interest_prob"):
            if key not in synthetic:
                raise MissingRequired(f"synthetic.{key}")

    overrides = overrides or {}
    if overrides.get("seed") is not None:
        data["seeds"] = [overrides["seed"]]
    if overrides.get("categories") is not None:
        data["categories"] = overrides["categories"]
    for key in ("router", "mode", "strict", "out"):
        if overrides.get(key) is not None:
            data[key] = overrides[key]

    _require("categories" in data, MissingRequired("categories"))
    config = RunConfig(
        categories=_int_list(data["categories"], "categories"),
        seeds=_int_list(data.get("seeds", [0]), "seeds"),
        trace=data.get("trace"),
        trace_format=data.get("trace_format", "tabular"),
        profiles=data.get("profiles"),
        out=data.get("out"),
        router=data.get("router", "cluster"),
        mode=data.get("mode", "exact"),
        strict=bool(data.get("strict", False)),
        threshold=float(data.get("threshold", 0.5)),
        k_clusters=data.get("k_clusters"),
        buffer_capacity=data.get("buffer_capacity", 50),
        ttl=data.get("ttl"),
        max_transfers_per_contact=data.get("max_transfers_per_contact"),
        message_count=int(data.get("message_count", 20)),
        message_interval=data.get("message_interval"),
        track_final=bool(data.get("track_final", False)),
        synthetic=synthetic,
    )
    if any(c < 1 for c in config.categories):
        raise ConfigError("categories must be >= 1")
    if config.trace is not None and config.synthetic is not None:
        raise ConflictingSources()
    if config.trace is None and config.synthetic is None:
        raise MissingRequired("trace or synthetic")
    if config.router not in ("cluster", "epidemic"):
        raise ConfigError(f"unknown router: {config.router!r}")
    if config.mode not in ("exact", "kmeans"):
        raise ConfigError(f"unknown mode: {config.mode!r}")
    if config.trace_format not in ("tabular", "one_events"):
        raise ConfigError(f"unknown trace_format: {config.trace_format!r}")
    return config


def sniff_profile_arity(text: str) -> int:
    """Interest-vector length implied by the first data line of a profile file."""
    for line in text.splitlines():
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            return len(stripped.split()) - 1
    return 0


def adapt_profiles(profiles: list[InterestProfile], n: int) -> list[InterestProfile]:
    """Fit profiles to a scenario with n categories: extra bits are cut,
    missing bits filled with zeros."""
    out = []
    changed = False
    for p in profiles:
        bits = p.interests
        if len(bits) > n:
            bits = bits[:n]
            changed = True
        elif len(bits) < n:
            bits = bits + (0,) * (n - len(bits))
            changed = True
        out.append(InterestProfile(p.node, bits))
    if changed:
        log.info("profiles adapted to %d categories (truncate/zero-pad)", n)
    return out


def _load_file_inputs(config: RunConfig):
    trace_text = Path(config.trace).read_text(encoding="utf-8")
    trace = parse_contact_trace(trace_text, fmt=config.trace_format)
    profiles: list[InterestProfile] = []
    if config.profiles is not None:
        profile_text = Path(config.profiles).read_text(encoding="utf-8")
        arity = sniff_profile_arity(profile_text)
        profiles = parse_interest_profiles(profile_text, arity)
    return trace, profiles


def _synthetic_params(config: RunConfig, n_categories: int) -> SyntheticParams:
    s = config.synthetic
    return SyntheticParams(
        node_count=s["node_count"],
        duration=s["duration"],
        contact_rate=s["contact_rate"],
        n_categories=n_categories,
        interest_prob=s["interest_prob"],
        mean_contact_duration=s.get("mean_contact_duration", 10.0),
        shared_interest_bias=s.get("shared_interest_bias", 1.0),
    )


def build_scenario(config: RunConfig, n_categories: int, seed: int,
                   file_inputs=None) -> Scenario:
    """Materialize one sweep point."""
    if config.synthetic is not None:
        trace, profiles = generate_synthetic_trace(
            _synthetic_params(config, n_categories), seed)
    else:
        trace, profiles = file_inputs if file_inputs is not None \
            else _load_file_inputs(config)
        profiles = adapt_profiles(profiles, n_categories)
    return Scenario(
        trace=trace,
        profiles=tuple(profiles),
        n_categories=n_categories,
        router=config.router_config(),
        schedule=config.schedule_config(),
        seed=seed,
    )


def run_sweep(config: RunConfig) -> int:
    """Run every (n_categories, seed) pair and write the output tree."""
    if config.out is None:
        raise MissingRequired("out")
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(
        json.dumps(config.effective(), sort_keys=True, indent=2) + "\n",
        encoding="utf-8")

    file_inputs = None
    if config.synthetic is None:
        file_inputs = _load_file_inputs(config)

    rows = [summary_header()]
    failures = 0
    for cat in sorted(set(config.categories)):
        for seed in sorted(set(config.seeds)):
            run_id = f"n{cat}_s{seed}"
            try:
                scenario = build_scenario(config, cat, seed, file_inputs)
                result = run(scenario)
                report = build_report(result, run_id)
            except Exception as exc:  # surface errors with run coordinates
                print(f"run {run_id} failed: {exc}", file=sys.stderr)
                failures += 1
                continue
            run_dir = out / "runs" / run_id
            run_dir.mkdir(parents=True, exist_ok=True)
            (run_dir / "per_message.csv").write_text(
                per_message_csv(result.records), encoding="utf-8")
            if result.clustering is not None:
                (run_dir / "clustering.txt").write_text(
                    dump_clustering(result.clustering), encoding="utf-8")
            rows.append(summary_row(report))
    (out / "summary.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    return 1 if failures else 0


def _first_point(config: RunConfig) -> tuple[int, int]:
    return sorted(set(config.categories))[0], sorted(set(config.seeds))[0]


def cmd_run(args) -> int:
    config = parse_config(args.config, _overrides(args))
    return run_sweep(config)


def cmd_validate(args) -> int:
    config = parse_config(args.config, _overrides(args))
    cat, seed = _first_point(config)
    scenario = build_scenario(config, cat, seed)
    report = validate_scenario(scenario.trace, scenario.profiles)
    for line in report.lines():
        print(line)
    return 0 if report.ok else 1


def cmd_gen_trace(args) -> int:
    config = parse_config(args.config, _overrides(args))
    if config.synthetic is None:
        raise MissingRequired("synthetic")
    if config.out is None:
        raise MissingRequired("out")
    cat, seed = _first_point(config)
    trace, profiles = generate_synthetic_trace(_synthetic_params(config, cat), seed)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    trace_path = out / "trace.txt"
    profile_path = out / "profiles.txt"
    trace_path.write_text(serialize_contact_trace(trace), encoding="utf-8")
    profile_path.write_text(serialize_profiles(profiles), encoding="utf-8")
    print(trace_path)
    print(profile_path)
    return 0


def _overrides(args) -> dict:
    categories = None
    if getattr(args, "categories", None):
        categories = [int(v) for v in args.categories.split(",") if v.strip()]
    return {
        "seed": getattr(args, "seed", None),
        "router": getattr(args, "router", None),
        "mode": getattr(args, "mode", None),
        "strict": True if getattr(args, "strict", None) else None,
        "categories": categories,
        "out": getattr(args, "out", None),
    }


def _add_common_flags(parser):
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--seed", type=int, default=None,
                        help="replace the seed sweep with this single seed")
    parser.add_argument("--router", choices=["cluster", "epidemic"], default=None)
    parser.add_argument("--mode", choices=["exact", "kmeans"], default=None)
    parser.add_argument("--strict", action="store_true", default=None,
                        help="close the whole contact on the first non-member peer")
    parser.add_argument("--categories", default=None,
                        help="comma-separated category counts, e.g. 1,5,10")
    parser.add_argument("--out", default=None, help="output directory")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dtn-cluster-sim",
        description="Trace-driven simulator for interest-group message "
                    "dissemination in delay tolerant networks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler in (("run", cmd_run),
                          ("validate", cmd_validate),
                          ("gen-trace", cmd_gen_trace)):
        p = sub.add_parser(name)
        _add_common_flags(p)
        p.set_defaults(handler=handler)

    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
