"""Command-line front end: ``atomwalk {pattern,gtau,linear,validate}``.

Runs are described by a JSON config file; every physics default is the
``gamma = delta = 1, kappa = 0.002, N = 9`` parameter set, so a config of
``{}`` reproduces the tau = 0 pattern of that board.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .lattice import DetectorId, InvalidDetector, WalkParams
from .observables import (
    PatternMatrix,
    TwoPhotonStatistics,
    linear_g_tau,
    linear_pattern,
    tau_grid,
)

FLOAT_FMT = "%.15e"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    gamma: float = 1.0
    kappa: float = 0.002
    delta: float = 1.0
    steps: int = 9
    tau_values: list[float] = field(default_factory=lambda: [0.0])
    detectors: list[list[str]] | None = None
    normalization: str = "raw"
    output_dir: str = "out"
    format: str = "csv"
    tau_max: float = 10.0
    tau_points: int = 500
    oracle_dt: float = 1e-3

    @property
    def params(self) -> WalkParams:
        return WalkParams(gamma=self.gamma, kappa=self.kappa, delta=self.delta, steps=self.steps)

    def detector_pairs(self) -> list[tuple[DetectorId, DetectorId]]:
        return [(DetectorId.parse(a), DetectorId.parse(b)) for a, b in self.detectors or []]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict, text: str | None = None, source: str = "<config>") -> "RunConfig":
        """Build and validate; ``text`` is the raw file, used to locate errors."""

        def fail(key: str, msg: str):
            line = _line_of(text, key) if text else None
            where = f"{source}:{line}" if line else source
            raise ConfigError(f"{where}: {msg}")

        if not isinstance(data, dict):
            raise ConfigError(f"{source}:1: top level must be an object")
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                fail(key, f"unknown key {key!r}")
        cfg = cls(**data)
        for key in ("gamma", "kappa", "delta", "tau_max", "oracle_dt"):
            val = getattr(cfg, key)
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                fail(key, f"{key} must be a number")
            setattr(cfg, key, float(val))
        for key in ("steps", "tau_points"):
            val = getattr(cfg, key)
            if isinstance(val, bool) or not isinstance(val, int):
                fail(key, f"{key} must be an integer")
        if not cfg.gamma > 0:
            fail("gamma", "gamma must be > 0")
        if not cfg.kappa > 0:
            fail("kappa", "kappa must be > 0")
        if cfg.steps < 1:
            fail("steps", "steps must be >= 1")
        if cfg.tau_points < 2 or not cfg.tau_max > 0:
            fail("tau_points" if cfg.tau_points < 2 else "tau_max", "tau grid needs tau_max > 0 and >= 2 points")
        if not cfg.oracle_dt > 0:
            fail("oracle_dt", "oracle_dt must be > 0")
        if not isinstance(cfg.tau_values, list) or not cfg.tau_values:
            fail("tau_values", "tau_values must be a non-empty list")
        try:
            cfg.tau_values = [float(t) for t in cfg.tau_values]
        except (TypeError, ValueError):
            fail("tau_values", "tau_values must contain numbers")
        if any(not t >= 0 for t in cfg.tau_values):
            fail("tau_values", "tau_values must be >= 0")
        if cfg.normalization not in ("raw", "max"):
            fail("normalization", "normalization must be 'raw' or 'max'")
        if cfg.format not in ("csv", "json"):
            fail("format", "format must be 'csv' or 'json'")
        if cfg.detectors is not None:
            ok = isinstance(cfg.detectors, list) and all(
                isinstance(p, list) and len(p) == 2 and all(isinstance(s, str) for s in p) for p in cfg.detectors
            )
            if not ok:
                fail("detectors", 'detectors must be a list of ["x,d", "x,d"] pairs')
            try:
                for a, b in cfg.detector_pairs():
                    for d in (a, b):
                        if abs(d.x) > cfg.steps or (cfg.steps - d.x) % 2:
                            raise InvalidDetector(f"detector {d} is not an output of a {cfg.steps}-step board")
            except InvalidDetector as exc:
                fail("detectors", str(exc))
        return cfg


def _line_of(text: str, key: str) -> int | None:
    needle = json.dumps(key)
    for no, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return no
    return None


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    return RunConfig.from_dict(data, text=text, source=str(path))


# -- serialization -------------------------------------------------------
def _tau_label(tau: float) -> str:
    return f"{tau:g}"


def _pair_label(a: DetectorId, b: DetectorId) -> str:
    return f"{a.x:+d}{a.d}_{b.x:+d}{b.d}"


def pattern_csv(pm: PatternMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x1", "d1", "x2", "d2", "G"])
    for d1, d2, g in pm.rows():
        w.writerow([d1.x, d1.d, d2.x, d2.d, FLOAT_FMT % g])
    return buf.getvalue()


def pattern_json(pm: PatternMatrix) -> str:
    doc = {
        "N": pm.N,
        "tau": pm.tau,
        "normalization": pm.normalization,
        "detectors": [str(d) for d in pm.detectors],
        "values": pm.values.tolist(),
    }
    return json.dumps(doc, indent=2) + "\n"


def table_csv(columns: dict[str, np.ndarray]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = list(columns)
    w.writerow(names)
    for row in zip(*columns.values()):
        w.writerow([FLOAT_FMT % v for v in row])
    return buf.getvalue()


def table_json(columns: dict[str, np.ndarray], **meta) -> str:
    doc = dict(meta)
    doc.update({k: [float(v) for v in vals] for k, vals in columns.items()})
    return json.dumps(doc, indent=2) + "\n"


def _write_all(out_dir: Path, files: dict[str, str], command: str, cfg: RunConfig) -> list[Path]:
    """Write every result plus the metadata sidecar once all content exists."""
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = {
        "artifact_version": __version__,
        "command": command,
        "config": cfg.to_dict(),
        "files": sorted(files),
    }
    files = dict(files)
    files[f"{command}.meta.json"] = json.dumps(meta, indent=2, sort_keys=True) + "\n"
    written = []
    for name in sorted(files):
        p = out_dir / name
        p.write_text(files[name])
        written.append(p)
    return written


def _patterns(stats_fn, taus: list[float], threads: int) -> list[PatternMatrix]:
    if threads <= 1 or len(taus) == 1:
        return [stats_fn(t) for t in taus]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(stats_fn, taus))


def _pattern_files(prefix: str, patterns: list[PatternMatrix], fmt: str) -> dict[str, str]:
    out = {}
    for pm in patterns:
        name = f"{prefix}_tau{_tau_label(pm.tau)}.{fmt}"
        out[name] = pattern_csv(pm) if fmt == "csv" else pattern_json(pm)
    return out


# -- commands ------------------------------------------------------------
def cmd_pattern(cfg: RunConfig, threads: int = 1) -> dict[str, str]:
    stats = TwoPhotonStatistics(cfg.params)
    stats.corr.in_gram, stats.corr.packed_out  # build shared caches before threading
    pms = _patterns(lambda t: stats.pattern(t, cfg.normalization), cfg.tau_values, threads)
    return _pattern_files("pattern", pms, cfg.format)


def cmd_gtau(cfg: RunConfig, threads: int = 1) -> dict[str, str]:
    pairs = cfg.detector_pairs()
    if not pairs:
        raise ConfigError("gtau needs a non-empty 'detectors' list")
    params = cfg.params
    stats = TwoPhotonStatistics(params)
    taus = tau_grid(cfg.tau_max, cfg.tau_points)
    out = {}
    for a, b in pairs:
        cols = {
            "tau": taus,
            "G_nonlinear": np.real(stats.g_curve(a, b)(taus)),
            "G_linear": linear_g_tau(a, b, params, taus),
        }
        name = f"gtau_{_pair_label(a, b)}.{cfg.format}"
        if cfg.format == "csv":
            out[name] = table_csv(cols)
        else:
            out[name] = table_json(cols, pair=[str(a), str(b)])
    return out


def cmd_linear(cfg: RunConfig, threads: int = 1) -> dict[str, str]:
    params = cfg.params
    pms = [linear_pattern(params, t, cfg.normalization) for t in cfg.tau_values]
    out = _pattern_files("linear_pattern", pms, cfg.format)
    taus = tau_grid(cfg.tau_max, cfg.tau_points)
    for a, b in cfg.detector_pairs():
        cols = {"tau": taus, "G_linear": linear_g_tau(a, b, params, taus)}
        name = f"linear_gtau_{_pair_label(a, b)}.{cfg.format}"
        out[name] = table_csv(cols) if cfg.format == "csv" else table_json(cols, pair=[str(a), str(b)])
    return out


def validation_checks(cfg: RunConfig) -> list[dict]:
    """Unitarity, pattern symmetries, linear tau-invariance and oracle agreement."""
    from .oracle import compare_with_symbolic

    params = cfg.params
    stats = TwoPhotonStatistics(params)
    checks = []

    def add(name, value, tol):
        checks.append({"check": name, "value": value, "tolerance": tol, "margin": tol - value, "passed": bool(value <= tol)})

    add("unitarity |P - 1|", abs(stats.total_probability() - 1.0), 1e-6)
    swap = mirror = 0.0
    for tau in cfg.tau_values:
        v = stats.pattern(tau).values
        swap = max(swap, float(np.max(np.abs(v - v.T))))
        pm = PatternMatrix(params.steps, tau, v)
        mirror = max(mirror, float(np.max(np.abs(v - pm.mirrored())) / np.max(np.abs(v))))
    add("pattern swap symmetry", swap, 1e-12)
    add("pattern mirror symmetry (relative)", mirror, 1e-10)
    ref = linear_pattern(params, cfg.tau_values[0], "max").values
    drift = max(float(np.max(np.abs(linear_pattern(params, t, "max").values - ref))) for t in cfg.tau_values)
    add("linear tau invariance", drift, 1e-10)
    report = compare_with_symbolic(params, dt=cfg.oracle_dt)
    for cls, dev in report.items():
        add(f"oracle agreement {cls}", dev, 1e-8)
    return checks


def cmd_validate(cfg: RunConfig, threads: int = 1) -> tuple[dict[str, str], bool]:
    checks = validation_checks(cfg)
    ok = all(c["passed"] for c in checks)
    doc = {"passed": ok, "checks": checks}
    return {"validate_report.json": json.dumps(doc, indent=2) + "\n"}, ok


COMMANDS = {"pattern": cmd_pattern, "gtau": cmd_gtau, "linear": cmd_linear, "validate": cmd_validate}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="atomwalk", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run config (defaults apply when omitted)")
        p.add_argument("--out", help="output directory, overrides output_dir")
        p.add_argument("--tau", help="comma-separated delays, overrides tau_values")
        p.add_argument("--threads", type=int, default=1)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig.from_dict({})
        overrides = cfg.to_dict()
        if args.out:
            overrides["output_dir"] = args.out
        if args.tau:
            try:
                overrides["tau_values"] = [float(t) for t in args.tau.split(",")]
            except ValueError:
                raise ConfigError(f"--tau: cannot parse {args.tau!r}") from None
        cfg = RunConfig.from_dict(overrides, source="--tau" if args.tau else "<config>")
        result = COMMANDS[args.command](cfg, threads=max(1, args.threads))
    except (ConfigError, InvalidDetector) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    ok = True
    if args.command == "validate":
        result, ok = result
    written = _write_all(Path(cfg.output_dir), result, args.command, cfg)
    for p in written:
        print(p)
    if not ok:
        print("validation FAILED", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
