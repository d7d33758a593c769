"""Monte Carlo driver: SNR sweeps of HARQ groups, metrics and CSV output.

Every group draws from its own generator seeded with (master seed, SNR
index, trial index), and per-point results are plain integer sums, so the
output does not depend on how trials are split across worker processes.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .channel import Fading, SnrConvention, snr_to_n0
from .codebook import CodebookError, load_codebook
from .detector import DetectorConfig
from .harq import LinkSetup, run_group
from .ldpc import AlistError, load_alist
from .schedule import InfeasibleScheme, Layout, build_schedule, derive_config, make_interleavers

log = logging.getLogger(__name__)

CSV_COLUMNS = ("snr_db", "trials", "t_total", "t_correct", "throughput", "per", "mean_iters",
               "mean_ttis_per_packet", "ci95_per", "throughput_per_tti")


class ConfigError(ValueError):
    """Invalid experiment configuration (bad field, infeasible scheme, bad data file)."""


@dataclass(frozen=True)
class SchemeConfig:
    K_eq: int = 3
    T: int = 1
    K_in: int = 3
    layout: str = "KScma"


@dataclass
class ExperimentConfig:
    codebook: str = "codebook_4x6.json"
    ldpc: str = "peg_264_r12.alist"
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    N_re: int = 1
    snr_db: list = field(default_factory=lambda: [0.0])
    trials: int = 100
    fading: str = "rayleigh_iid"
    snr_convention: str = "EsN0"
    seed: int = 0
    output: str | None = None
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    base_dir: str | None = field(default=None, compare=False)  # where relative paths resolve

    def __post_init__(self):
        if isinstance(self.scheme, dict):
            self.scheme = _build(SchemeConfig, self.scheme, "scheme")
        if isinstance(self.detector, dict):
            self.detector = _build(DetectorConfig, self.detector, "detector")
        self.snr_db = [float(s) for s in np.atleast_1d(self.snr_db)]
        self.check()

    def check(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials}")
        if not self.snr_db or not all(math.isfinite(s) for s in self.snr_db):
            raise ConfigError("snr_db must be a nonempty list of finite values")
        if int(self.N_re) != self.N_re or self.N_re < 0:
            raise ConfigError(f"N_re must be a nonnegative integer, got {self.N_re}")
        try:
            Fading(self.fading)
            SnrConvention(self.snr_convention)
            Layout(self.scheme.layout)
        except ValueError as e:
            raise ConfigError(str(e)) from None

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("base_dir")
        return d

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _build(cls, d, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object, got {type(d).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(d) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {', '.join(unknown)}")
    try:
        return cls(**d)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from None


def config_from_dict(d: dict, base_dir=None) -> ExperimentConfig:
    d = dict(d)
    d.pop("base_dir", None)
    cfg = _build(ExperimentConfig, d, "config")
    cfg.base_dir = None if base_dir is None else str(base_dir)
    return cfg


def load_config(path) -> ExperimentConfig:
    """Read a JSON experiment config. Raises ConfigError or OSError."""
    path = Path(path)
    text = path.read_text()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from None
    return config_from_dict(d, base_dir=path.parent)


def resolve_data_path(name: str, base_dir=None) -> Path:
    """Explicit paths win; otherwise fall back to the bundled data directory."""
    p = Path(name)
    if p.is_absolute():
        return p
    if base_dir is not None and (Path(base_dir) / p).exists():
        return Path(base_dir) / p
    if p.exists():
        return p
    bundled = Path(str(resources.files("nckscma") / "data")) / p
    if bundled.exists():
        return bundled
    raise FileNotFoundError(f"data file not found: {name}")


def build_link(cfg: ExperimentConfig, snr_db: float) -> LinkSetup:
    """Load data files and derive the scheme. Raises ConfigError / OSError."""
    try:
        cb = load_codebook(resolve_data_path(cfg.codebook, cfg.base_dir))
        code = load_alist(resolve_data_path(cfg.ldpc, cfg.base_dir))
        s = cfg.scheme
        ncfg = derive_config(s.K_eq, s.T, s.K_in, code.N, cb.b)
        schedule = build_schedule(ncfg, s.layout)
    except (CodebookError, AlistError, InfeasibleScheme) as e:
        raise ConfigError(str(e)) from None
    N0 = snr_to_n0(snr_db, cfg.snr_convention, code.rate, cb.b)
    perms = make_interleavers(cfg.seed, cb.J, ncfg.T, ncfg.N)
    return LinkSetup(cb, code, schedule, perms, Fading(cfg.fading), N0, cfg.N_re, cfg.detector)


@dataclass(frozen=True)
class PointMetrics:
    snr_db: float
    trials: int
    t_total: int
    t_correct: int
    iterations: int    # summed over detection rounds
    rounds: int
    ttis: int          # TTIs consumed by all groups
    J: int
    T: int

    @property
    def throughput(self) -> float:
        return compute_throughput(self.t_correct, self.t_total)

    @property
    def per(self) -> float:
        return 1.0 - self.t_correct / self.t_total

    @property
    def mean_iters(self) -> float:
        return self.iterations / self.rounds

    @property
    def mean_ttis_per_packet(self) -> float:
        return self.ttis / (self.trials * self.T)

    @property
    def throughput_per_tti(self) -> float:
        """Correct packets per user per TTI."""
        return self.t_correct / (self.J * self.ttis)

    @property
    def ci95_per(self) -> float:
        p = self.per
        return 1.96 * math.sqrt(p * (1 - p) / self.t_total)

    def row(self) -> dict:
        return {c: getattr(self, c) for c in CSV_COLUMNS}


def compute_throughput(t_correct: int, t_total: int) -> float:
    if t_total < 1:
        raise ValueError("T_total must be at least 1")
    if not 0 <= t_correct <= t_total:
        raise ValueError(f"need 0 <= T_correct <= T_total, got {t_correct}/{t_total}")
    return t_correct / t_total


@lru_cache(maxsize=8)
def _cached_link(cfg_json: str, base_dir, snr_db: float) -> LinkSetup:
    return build_link(config_from_dict(json.loads(cfg_json), base_dir), snr_db)


def _cfg_key(cfg: ExperimentConfig) -> str:
    return json.dumps(cfg.to_dict(), sort_keys=True)


def run_trials(cfg_json: str, base_dir, snr_idx: int, start: int, stop: int) -> np.ndarray:
    """Integer sums (t_total, t_correct, iterations, rounds, ttis) over trials [start, stop)."""
    cfg = json.loads(cfg_json)
    setup = _cached_link(cfg_json, base_dir, float(cfg["snr_db"][snr_idx]))
    seed = int(cfg["seed"])
    acc = np.zeros(5, dtype=np.int64)
    for trial in range(start, stop):
        g = run_group(setup, np.random.default_rng([seed, snr_idx, trial]))
        acc += (len(g.outcomes), sum(o.success for o in g.outcomes), g.iterations, g.rounds, g.ttis)
    return acc


def _chunks(trials: int, workers: int):
    n = max(1, min(trials, 4 * workers))
    edges = np.linspace(0, trials, n + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> list:
    """Run every SNR point; returns one PointMetrics per point."""
    setup = build_link(cfg, cfg.snr_db[0])  # surfaces config errors before any work
    J, T = setup.cb.J, setup.schedule.cfg.T
    key = _cfg_key(cfg)
    jobs = [(i, a, b) for i in range(len(cfg.snr_db)) for a, b in _chunks(cfg.trials, threads)]
    sums = np.zeros((len(cfg.snr_db), 5), dtype=np.int64)
    if threads <= 1:
        for i, a, b in jobs:
            sums[i] += run_trials(key, cfg.base_dir, i, a, b)
            log.info("snr %.2f dB: trials %d..%d done", cfg.snr_db[i], a, b)
    else:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            futs = [(i, ex.submit(run_trials, key, cfg.base_dir, i, a, b)) for i, a, b in jobs]
            for i, f in futs:
                sums[i] += f.result()
    out = []
    for i, snr in enumerate(cfg.snr_db):
        t_total, t_correct, iters, rounds, ttis = (int(v) for v in sums[i])
        m = PointMetrics(snr, cfg.trials, t_total, t_correct, iters, rounds, ttis, J, T)
        assert abs(m.throughput + m.per - 1.0) < 1e-12
        out.append(m)
        log.info("snr %.2f dB: PER %.4g, throughput %.4g", snr, m.per, m.throughput)
    return out


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def format_csv(metrics, cfg: ExperimentConfig | None = None) -> str:
    if not metrics:
        raise ValueError("no metrics to write")
    lines = [f"# version: nckscma {__version__}"]
    if cfg is not None:
        lines.append(f"# seed: {cfg.seed}")
        echo = cfg.to_dict()
        echo.pop("output")  # where the file goes is not part of the experiment
        lines.append(f"# config: {json.dumps(echo, sort_keys=True)}")
    lines.append(",".join(CSV_COLUMNS))
    for m in metrics:
        lines.append(",".join(_fmt(v) for v in m.row().values()))
    return "\n".join(lines) + "\n"


def emit_csv(metrics, path, cfg: ExperimentConfig | None = None) -> Path:
    """Write the metrics table; nothing is created when ``metrics`` is empty."""
    text = format_csv(metrics, cfg)
    path = Path(path)
    if path.parent != Path(""):
        os.makedirs(path.parent, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(text)
    return path


def read_csv(path) -> list:
    """Rows of a metrics CSV as dicts of floats (comment lines skipped)."""
    with open(path) as f:
        lines = [ln.strip() for ln in f if ln.strip() and not ln.startswith("#")]
    header = lines[0].split(",")
    return [dict(zip(header, map(float, ln.split(",")))) for ln in lines[1:]]
