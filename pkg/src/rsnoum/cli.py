"""Command line entry point: experiment configs, threshold tables and result files.

Config files are flat ``key = value`` lines with dotted sections::

    scenario.preset = case2
    scenario.snr_db = 25
    sweep.runs = 50
    sweep.t_grid = [0, 0.5, 1]
    base_seed = 7

Values are read as JSON where possible and as bare strings otherwise.  ``#``
starts a comment.  ``RSNOUM_BASE_SEED`` in the environment overrides
``base_seed``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .calibration import ThresholdTable, calibrate_thresholds
from .channel import PRESETS, ChannelConfig, preset
from .errors import CalibrationError, ConfigError
from .region import RateRegion, Scenario, SweepConfig, build_region, lemma1_table
from .waveform import BANDWIDTH_MHZ, FrameConfig

log = logging.getLogger(__name__)

SEED_ENV = "RSNOUM_BASE_SEED"
EXIT_OK, EXIT_CONFIG, EXIT_CALIBRATION, EXIT_IO = 0, 2, 3, 4

SWEEP_COLUMNS = ["t", "mcs_c", "mcs_1", "mcs_2", "p_common_both", "p_priv1", "p_priv2",
                 "rc_bpshz", "r1_bpshz", "r2_bpshz", "sum_mbps"]
BARS_COLUMNS = ["t", "mcs_c", "mcs_1", "mcs_2", "common_mbps", "private1_mbps", "private2_mbps",
                "sum_mbps", "common_share"]


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "results"
    sweep_csv: str = "sweep.csv"
    region_json: str = "region.json"
    bars_csv: str = "bars.csv"


@dataclass(frozen=True)
class ExperimentConfig:
    channel: ChannelConfig = field(default_factory=lambda: PRESETS["case1"])
    preset: str | None = "case1"
    sweep: SweepConfig = SweepConfig()
    phy: FrameConfig = FrameConfig()
    base_seed: int = 0
    p_total: float = 1.0
    thresholds: str | None = None
    output: OutputConfig = OutputConfig()

    def scenario(self, table: ThresholdTable | None = None) -> Scenario:
        return Scenario(self.channel, self.base_seed, self.p_total, self.phy, table)


# -- config parsing -------------------------------------------------------------

def _value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _field_names(cls) -> set[str]:
    return {f.name for f in fields(cls)}


def _build(cls, key: str, values: dict):
    try:
        return cls(**values)
    except ConfigError as exc:
        raise ConfigError(f"{key}.{exc.key}", str(exc).split(": ", 1)[-1]) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, str(exc)) from None


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a config document, filling in defaults."""
    sections: dict[str, dict[str, Any]] = {"scenario": {}, "sweep": {}, "phy": {}, "output": {}}
    top: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        section, dot, name = key.partition(".")
        if dot:
            if section not in sections:
                raise ConfigError(key, "unknown section")
            sections[section][name] = _value(raw.strip())
        else:
            top[key] = _value(raw.strip())

    unknown = set(top) - {"base_seed", "thresholds"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")

    scen = dict(sections["scenario"])
    p_total = scen.pop("p_total", 1.0)
    # An empty scenario section means the default preset; any explicit
    # channel field without a preset describes a custom channel.
    name = scen.pop("preset", None if scen else ExperimentConfig.preset)
    bad = set(scen) - _field_names(ChannelConfig)
    if bad:
        raise ConfigError(f"scenario.{sorted(bad)[0]}", "unknown key")
    if name is None:
        channel = _build(ChannelConfig, "scenario", scen)
    else:
        if not isinstance(name, str):
            raise ConfigError("scenario.preset", "must be a preset name")
        try:
            channel = preset(name, **scen)
        except ConfigError as exc:
            key = "scenario.preset" if exc.key == "scenario" else f"scenario.{exc.key}"
            raise ConfigError(key, str(exc).split(": ", 1)[-1]) from None
    if not isinstance(p_total, (int, float)) or isinstance(p_total, bool) or not p_total > 0:
        raise ConfigError("scenario.p_total", "must be a positive number")

    sweep_vals = dict(sections["sweep"])
    for key in set(sweep_vals) - _field_names(SweepConfig):
        raise ConfigError(f"sweep.{key}", "unknown key")
    for key in ("t_grid", "mcs_indices"):
        if key in sweep_vals and not isinstance(sweep_vals[key], list):
            raise ConfigError(f"sweep.{key}", "must be a list")
    if "runs" in sweep_vals and (not isinstance(sweep_vals["runs"], int) or isinstance(sweep_vals["runs"], bool)):
        raise ConfigError("sweep.runs", "must be an integer")
    sweep = _build(SweepConfig, "sweep", sweep_vals)

    for key in set(sections["phy"]) - _field_names(FrameConfig):
        raise ConfigError(f"phy.{key}", "unknown key")
    phy = _build(FrameConfig, "phy", sections["phy"])
    for key in set(sections["output"]) - _field_names(OutputConfig):
        raise ConfigError(f"output.{key}", "unknown key")
    output = OutputConfig(**{k: str(v) for k, v in sections["output"].items()})

    seed = top.get("base_seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("base_seed", "must be a non-negative integer")
    table = top.get("thresholds")
    return ExperimentConfig(channel, name, sweep, phy, seed, float(p_total),
                            None if table is None else str(table), output)


def format_config(cfg: ExperimentConfig) -> str:
    """Serialize a config so that ``parse_config`` gives it back."""
    lines = []
    if cfg.preset is not None:
        lines.append(f"scenario.preset = {json.dumps(cfg.preset)}")
    lines += [f"scenario.{k} = {json.dumps(v)}" for k, v in asdict(cfg.channel).items()]
    lines.append(f"scenario.p_total = {json.dumps(cfg.p_total)}")
    lines += [f"sweep.{k} = {json.dumps(list(v) if isinstance(v, tuple) else v)}"
              for k, v in asdict(cfg.sweep).items()]
    lines += [f"phy.{k} = {json.dumps(v)}" for k, v in asdict(cfg.phy).items()]
    lines += [f"output.{k} = {json.dumps(v)}" for k, v in asdict(cfg.output).items()]
    lines.append(f"base_seed = {cfg.base_seed}")
    if cfg.thresholds is not None:
        lines.append(f"thresholds = {json.dumps(cfg.thresholds)}")
    return "\n".join(lines) + "\n"


def apply_env(cfg: ExperimentConfig, environ: Mapping[str, str] | None = None) -> ExperimentConfig:
    environ = os.environ if environ is None else environ
    raw = environ.get(SEED_ENV)
    if raw is None:
        return cfg
    try:
        seed = int(raw)
    except ValueError:
        raise ConfigError(SEED_ENV, f"must be an integer, got {raw!r}") from None
    if seed < 0:
        raise ConfigError(SEED_ENV, "must be non-negative")
    return replace(cfg, base_seed=seed)


def load_config(path: str | os.PathLike, environ: Mapping[str, str] | None = None) -> ExperimentConfig:
    return apply_env(parse_config(Path(path).read_text()), environ)


# -- threshold tables -------------------------------------------------------------

def save_thresholds(table: ThresholdTable, path: str | os.PathLike) -> None:
    _atomic_write(Path(path), json.dumps(table.to_dict(), indent=1) + "\n")


def load_thresholds(path: str | os.PathLike | None = None) -> ThresholdTable:
    """Read a threshold table; without a path, the one shipped with the package."""
    try:
        if path is None:
            text = resources.files("rsnoum").joinpath("data/thresholds.json").read_text()
        else:
            text = Path(path).read_text()
    except FileNotFoundError as exc:
        raise CalibrationError(f"threshold table not found: {exc.filename or path}") from None
    try:
        return ThresholdTable.from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise CalibrationError(f"threshold table is not valid JSON: {exc}") from None


# -- result files ---------------------------------------------------------------

def _num(x: float) -> float | None:
    """Six significant digits; NaN and infinities become null."""
    x = float(x)
    return float(f"{x:.6g}") if math.isfinite(x) else None


def _fmt(x) -> str:
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    return f"{float(x):.6g}"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([[_fmt(v) for v in row] for row in rows])
    return buf.getvalue()


def sweep_csv(region: RateRegion) -> str:
    rows = []
    for row in region.rows:
        r = row.rates
        rows.append([row.t, *row.plan.indices, *r.success_probs, r.r_c, r.r_1, r.r_2,
                     BANDWIDTH_MHZ * (r.r_c + r.r_1 + r.r_2)])
    return _csv(SWEEP_COLUMNS, rows)


def bars_csv(region: RateRegion) -> str:
    rows = []
    for rec in region.per_t:
        r = rec.rates
        total = rec.sum_rate
        rows.append([rec.t, *rec.plan.indices, BANDWIDTH_MHZ * r.r_c, BANDWIDTH_MHZ * r.r_1,
                     BANDWIDTH_MHZ * r.r_2, BANDWIDTH_MHZ * total, r.r_c / total if total > 0 else 0.0])
    return _csv(BARS_COLUMNS, rows)


def _point(p) -> dict:
    return {"r_mult": _num(p.r_mult), "r_uni": _num(p.r_uni)}


def region_document(region: RateRegion) -> dict:
    per_t = []
    for rec in region.per_t:
        r = rec.rates
        per_t.append({
            "t": _num(rec.t),
            "mcs": list(rec.plan.indices),
            "success_probs": [_num(p) for p in r.success_probs],
            "r_c": _num(r.r_c), "r_1": _num(r.r_1), "r_2": _num(r.r_2),
            "sum_rate": _num(rec.sum_rate),
            "segment": [_point(rec.mulp), _point(rec.unicast_end)],
        })
    lemma = [{
        "r_0": _num(res.r_0), "feasible": res.feasible, "t_0": None if res.t_0 is None else _num(res.t_0),
        "mulp_uni": _num(res.mulp_uni), "rsma_uni": _num(res.rsma_uni), "margin": _num(res.margin),
        "holds": res.holds, "strict": res.strict,
    } for res in lemma1_table(region)]
    return {
        "units": "bit/s/Hz",
        "bandwidth_mhz": BANDWIDTH_MHZ,
        "t_star": _num(region.t_star),
        "max_sum_rate": _num(region.max_sum_rate),
        "common_share": _num(region.common_share),
        "rsma_area": _num(region.rsma_area),
        "mulp_area": _num(region.mulp_area),
        "area_gap": _num(region.area_gap),
        "per_t": per_t,
        "hull": [_point(p) for p in region.hull],
        "mulp_hull": [_point(p) for p in region.mulp_hull],
        "landmarks": {k: _point(v) for k, v in sorted(region.landmarks.items())},
        "lemma1": lemma,
    }


def region_json(region: RateRegion) -> str:
    return json.dumps(region_document(region), indent=1) + "\n"


def run_experiment(cfg: ExperimentConfig, out_dir: str | os.PathLike | None = None,
                   write: bool = True) -> RateRegion:
    """Build the region for ``cfg`` and write the three result files."""
    table = None
    if cfg.sweep.mode == "fast":
        table = load_thresholds(cfg.thresholds)
        if table.frame != cfg.phy:
            raise CalibrationError("threshold table was calibrated for a different frame configuration")
    region = build_region(cfg.scenario(table), cfg.sweep)
    if write:
        out = Path(cfg.output.dir if out_dir is None else out_dir)
        _atomic_write(out / cfg.output.sweep_csv, sweep_csv(region))
        _atomic_write(out / cfg.output.region_json, region_json(region))
        _atomic_write(out / cfg.output.bars_csv, bars_csv(region))
    return region


# -- argparse ---------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rsnoum", description="Two-user unicast/multicast rate region simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="sweep power splits and MCS triples, write CSV/JSON results")
    run.add_argument("--config", required=True)
    run.add_argument("--mode", choices=["fast", "full"])
    run.add_argument("--out")

    cal = sub.add_parser("calibrate", help="measure SINR thresholds with the full waveform")
    cal.add_argument("--runs", type=int, default=200)
    cal.add_argument("--seed", type=int, default=0)
    cal.add_argument("--mcs", type=int, nargs="*")
    cal.add_argument("--out", default="thresholds.json")

    sub.add_parser("presets", help="list channel presets")
    return ap


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.mode:
        cfg = replace(cfg, sweep=replace(cfg.sweep, mode=args.mode))
    region = run_experiment(cfg, args.out)
    print(f"t* = {region.t_star:g}, max sum rate {BANDWIDTH_MHZ * region.max_sum_rate:.6g} Mbps, "
          f"common share {region.common_share:.3g}")
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    if args.runs < 100:
        raise ConfigError("runs", "must be at least 100")

    def report(index, entry):
        print(f"MCS {index}: threshold {entry.threshold_db:.3f} dB, width {entry.width_db:.3f} dB", flush=True)

    table = calibrate_thresholds(runs_per_point=args.runs, seed=args.seed, mcs_indices=args.mcs,
                                 progress=report)
    save_thresholds(table, args.out)
    return EXIT_OK


def _cmd_presets(args) -> int:
    print(f"{'name':<8}{'rho':>6}{'pathloss_dB':>13}{'snr_dB':>8}{'csit_var':>10}")
    for name, c in PRESETS.items():
        print(f"{name:<8}{c.rho:>6g}{c.pathloss_delta_db:>13g}{c.snr_db:>8g}{c.csit_error_var:>10g}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    handler = {"run": _cmd_run, "calibrate": _cmd_calibrate, "presets": _cmd_presets}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CalibrationError as exc:
        print(f"calibration error: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
