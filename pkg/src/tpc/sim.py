"""Simulation orchestration: configuration, BER frame farm, calibration and
density-evolution drivers, and plot-data emission.

Frames are grouped into fixed blocks.  Blocks are decoded in parallel but
folded into the counters strictly in block order, and the stopping rule is
checked after every block, so results never depend on the worker count.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .channel import RngStream, bpsk, channel_llr, snr_to_sigma
from .codes import BDD_MODES, build_code
from .de import DeConfig, ThresholdResult, find_threshold
from .product import (
    APP_EXTRINSIC,
    APP_LITERAL,
    ECPD,
    GMI,
    HEURISTIC,
    MCPD,
    ORIGINAL,
    REF_CHANNEL,
    REF_INPUT,
    ROWS,
    COLUMNS,
    CalibrationResult,
    CoefficientSchedule,
    ProductCode,
    calibrate_schedule,
    encode_product,
    gmi_cp_decode,
    original_cp_decode,
    pyndiah_schedule,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
PLOT_COLUMNS = ["schema_version", "code", "decoder", "p", "ebn0_db", "ber", "frames", "bit_errors"]
REPORT_COLUMNS = [
    "code", "decoder", "p", "ebn0_db", "frames", "bit_errors", "ber", "frame_errors",
    "info_bit_errors", "info_ber", "empty_list_events", "wall_time_s", "config_hash", "seed",
]

PYNDIAH_DEFAULT = "pyndiah_default"
FROM_FILE = "file"
CALIBRATE = "calibrate"
ALL_ZERO = "all_zero"
RANDOM = "random"

# stream namespaces under the master seed
_SIM_STREAM = 0xB3
_CAL_SEED_SALT = 0xCA11


class ConfigError(ValueError):
    pass


class CalibrationFailed(RuntimeError):
    pass


@dataclass
class SimConfig:
    family: str = "ebch"
    n: int = 64
    t: int = 2
    p: int = 5
    decoder: str = MCPD
    schedule_source: str = CALIBRATE
    schedule_file: str | None = None
    ebn0_db: list[float] = field(default_factory=lambda: [2.0])
    l_max: int = 20
    max_frames: int = 10_000
    min_bit_errors: int = 100
    block_frames: int = 16
    message_mode: str = ALL_ZERO
    seed: int = 1
    workers: int = 1
    out: str = "results"
    pilot_frames: int = 1000
    calibration_reference: str = REF_INPUT
    app_rule: str = APP_EXTRINSIC
    bdd_mode: str = "extended"
    first: str = ROWS
    de_N: int = 100_000
    de_l_max: int = 50
    de_bracket: list[float] = field(default_factory=lambda: [1.5, 3.0])
    de_resolution_db: float = 0.01
    de_error_floor_eps: float = 0.0

    def validate(self) -> "SimConfig":
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.family in ("ebch", "spc"), f"family must be 'ebch' or 'spc', got {self.family!r}")
        need(self.decoder in (ORIGINAL, ECPD, MCPD), f"unknown decoder {self.decoder!r}")
        need(
            self.schedule_source in (PYNDIAH_DEFAULT, FROM_FILE, CALIBRATE),
            f"unknown schedule_source {self.schedule_source!r}",
        )
        need(self.schedule_source != FROM_FILE or self.schedule_file, "schedule_source=file needs schedule_file")
        if self.decoder == ORIGINAL:
            need(self.schedule_source != CALIBRATE, "the original decoder uses a heuristic schedule, not calibration")
        else:
            need(self.schedule_source != PYNDIAH_DEFAULT, "GMI decoders need a gamma/delta schedule")
        need(isinstance(self.ebn0_db, list) and len(self.ebn0_db) > 0, "ebn0_db must be a nonempty list")
        need(self.l_max >= 1, "l_max must be >= 1")
        need(self.min_bit_errors >= 1, "min_bit_errors must be >= 1")
        need(self.max_frames >= 1 and self.block_frames >= 1, "max_frames and block_frames must be >= 1")
        need(self.workers >= 1, "workers must be >= 1")
        need(self.pilot_frames >= 1, "pilot_frames must be >= 1")
        need(self.message_mode in (ALL_ZERO, RANDOM), f"unknown message_mode {self.message_mode!r}")
        need(self.calibration_reference in (REF_INPUT, REF_CHANNEL), "calibration_reference must be input or channel")
        need(self.app_rule in (APP_EXTRINSIC, APP_LITERAL), "app_rule must be extrinsic or literal")
        need(self.bdd_mode in BDD_MODES, f"bdd_mode must be one of {BDD_MODES}")
        need(self.first in (ROWS, COLUMNS), "first must be rows or columns")
        need(len(self.de_bracket) == 2, "de_bracket must be [low, high]")
        need(self.seed >= 0, "seed must be non-negative")
        return self

    # -- (de)serialization ---------------------------------------------------

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, doc: dict) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            cfg = cls(**doc)
        except TypeError as e:
            raise ConfigError(str(e)) from e
        if isinstance(cfg.ebn0_db, (int, float)):
            cfg.ebn0_db = [float(cfg.ebn0_db)]
        return cfg

    @classmethod
    def load(cls, path) -> "SimConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_json(doc)

    def with_overrides(self, items: list[str]) -> "SimConfig":
        """Apply ``key=value`` strings; values are parsed as JSON when possible."""
        doc = self.to_json()
        for item in items:
            if "=" not in item:
                raise ConfigError(f"override must look like key=value, got {item!r}")
            key, raw = item.split("=", 1)
            key = key.strip()
            if key not in doc:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                value = json.loads(raw)
            except json.JSONDecodeError:
                value = raw
            doc[key] = value
        return SimConfig.from_json(doc)

    def config_hash(self) -> str:
        """Hash of everything that influences the counters (not workers or out)."""
        doc = self.to_json()
        doc.pop("workers")
        doc.pop("out")
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]

    def product_code(self) -> ProductCode:
        t = None if self.family == "spc" else self.t
        return ProductCode(build_code(self.family, self.n, t), self.bdd_mode)

    def code_label(self) -> str:
        c = self.product_code().component
        return f"({c.n},{c.k},{c.d})"


# -- BER frame farm ----------------------------------------------------------


@dataclass
class SnrRow:
    ebn0_db: float
    frames: int = 0
    bit_errors: int = 0
    frame_errors: int = 0
    info_bit_errors: int = 0
    empty_list_events: int = 0
    wall_time_s: float = 0.0
    n2: int = 1
    k2: int = 1
    frame_bit_errors: list[int] = field(default_factory=list, repr=False)

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.n2) if self.frames else float("nan")

    @property
    def info_ber(self) -> float:
        return self.info_bit_errors / (self.frames * self.k2) if self.frames else float("nan")


@dataclass
class SimReport:
    code: str
    decoder: str
    p: int
    seed: int
    config_hash: str
    rows: list[SnrRow] = field(default_factory=list)
    schedules: dict[float, CoefficientSchedule] = field(default_factory=dict, repr=False)

    def csv_rows(self) -> list[dict]:
        out = []
        for r in self.rows:
            out.append({
                "code": self.code, "decoder": self.decoder, "p": self.p, "ebn0_db": r.ebn0_db,
                "frames": r.frames, "bit_errors": r.bit_errors, "ber": r.ber,
                "frame_errors": r.frame_errors, "info_bit_errors": r.info_bit_errors,
                "info_ber": r.info_ber, "empty_list_events": r.empty_list_events,
                "wall_time_s": round(r.wall_time_s, 3), "config_hash": self.config_hash, "seed": self.seed,
            })
        return out

    def write_csv(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            wr = csv.DictWriter(fh, REPORT_COLUMNS)
            wr.writeheader()
            for row in self.csv_rows():
                wr.writerow({k: _fmt(v) for k, v in row.items()})


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


@dataclass(frozen=True)
class _BlockJob:
    pc: ProductCode
    decoder: str
    schedule: CoefficientSchedule
    p: int
    l_max: int
    sigma: float
    stream: RngStream
    frames: tuple[int, int]
    message_mode: str
    app_rule: str
    first: str


def _decode_block(job: _BlockJob):
    """Decode frames [lo, hi); returns per-frame (bit errors, info bit errors) and empty events."""
    pc = job.pc
    lo, hi = job.frames
    F = hi - lo
    n, k = pc.n, pc.k
    L = np.empty((F, n, n))
    ref = np.zeros((F, n, n), np.uint8)
    for i, f in enumerate(range(lo, hi)):
        s = job.stream.child(f)
        if job.message_mode == RANDOM:
            msg = s.child(1).generator().integers(0, 2, (k, k), dtype=np.uint8)
            ref[i] = encode_product(pc, msg)
        noise = s.child(0).generator().standard_normal((n, n))
        L[i] = channel_llr(bpsk(ref[i]) + job.sigma * noise, job.sigma)
    if job.decoder == ORIGINAL:
        res = original_cp_decode(pc, L, job.schedule, job.p, job.l_max, first=job.first)
    else:
        res = gmi_cp_decode(
            pc, L, job.schedule, job.p, job.l_max, variant=job.decoder, first=job.first, app_rule=job.app_rule
        )
    err = res.decisions != ref
    bit_err = err.sum(axis=(1, 2)).astype(np.int64)
    info_err = err[:, :k, :k].sum(axis=(1, 2)).astype(np.int64)
    return bit_err, info_err, int(res.empty_list_events)


def _stream_for(seed: int, ebn0_db: float) -> RngStream:
    return RngStream(seed, (_SIM_STREAM, int(round(ebn0_db * 10_000))))


def resolve_schedule(cfg: SimConfig, ebn0_db: float) -> tuple[CoefficientSchedule, CalibrationResult | None]:
    if cfg.schedule_source == PYNDIAH_DEFAULT:
        return pyndiah_schedule(), None
    if cfg.schedule_source == FROM_FILE:
        try:
            sched = CoefficientSchedule.load(cfg.schedule_file)
        except (OSError, ValueError, KeyError) as e:
            raise ConfigError(f"cannot load schedule {cfg.schedule_file}: {e}") from e
        want = HEURISTIC if cfg.decoder == ORIGINAL else GMI
        if sched.kind != want:
            raise ConfigError(f"schedule {cfg.schedule_file} is {sched.kind}, decoder needs {want}")
        if want == GMI and len(sched.pairs) < cfg.l_max:
            raise ConfigError(f"schedule has {len(sched.pairs)} entries, l_max is {cfg.l_max}")
        return sched, None
    cal = run_calibration(cfg, ebn0_db)
    return cal.schedule, cal


def run_calibration(cfg: SimConfig, ebn0_db: float) -> CalibrationResult:
    variant = ECPD if cfg.decoder == ECPD else MCPD
    try:
        return calibrate_schedule(
            cfg.product_code(), ebn0_db, cfg.p, cfg.l_max,
            pilot_frames=cfg.pilot_frames, variant=variant,
            seed=cfg.seed ^ _CAL_SEED_SALT, first=cfg.first, reference=cfg.calibration_reference,
        )
    except ValueError as e:
        raise CalibrationFailed(str(e)) from e


def simulate_ber(cfg: SimConfig) -> SimReport:
    """Per SNR, decode blocks of frames until ``min_bit_errors`` or ``max_frames``."""
    cfg.validate()
    pc = cfg.product_code()
    report = SimReport(cfg.code_label(), cfg.decoder, cfg.p, cfg.seed, cfg.config_hash())
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for snr in cfg.ebn0_db:
            snr = float(snr)
            schedule, _ = resolve_schedule(cfg, snr)
            report.schedules[snr] = schedule
            sigma = snr_to_sigma(snr, pc.rate)
            stream = _stream_for(cfg.seed, snr)
            row = SnrRow(snr, n2=pc.n**2, k2=pc.k**2)
            t0 = time.perf_counter()
            starts = list(range(0, cfg.max_frames, cfg.block_frames))
            jobs = [
                _BlockJob(pc, cfg.decoder, schedule, cfg.p, cfg.l_max, sigma, stream,
                          (s, min(s + cfg.block_frames, cfg.max_frames)), cfg.message_mode, cfg.app_rule, cfg.first)
                for s in starts
            ]
            wave = cfg.workers
            done = False
            for w0 in range(0, len(jobs), wave):
                batch = jobs[w0:w0 + wave]
                results = list(pool.map(_decode_block, batch)) if pool else [_decode_block(j) for j in batch]
                for job, (bit_err, info_err, nempty) in zip(batch, results):
                    row.frames += job.frames[1] - job.frames[0]
                    row.bit_errors += int(bit_err.sum())
                    row.info_bit_errors += int(info_err.sum())
                    row.frame_errors += int((bit_err > 0).sum())
                    row.empty_list_events += nempty
                    row.frame_bit_errors.extend(bit_err.tolist())
                    if row.bit_errors >= cfg.min_bit_errors:
                        done = True
                        break
                if done:
                    break
            row.wall_time_s = time.perf_counter() - t0
            log.info("%.3f dB: %d frames, %d bit errors, BER %.3e", snr, row.frames, row.bit_errors, row.ber)
            report.rows.append(row)
    finally:
        if pool:
            pool.shutdown()
    return report


# -- calibration and density evolution drivers -------------------------------


def calibrate(cfg: SimConfig, out_dir=None) -> dict[float, CalibrationResult]:
    """Calibrate every SNR; writes schedule JSON and a GMI report per SNR."""
    cfg.validate()
    if cfg.decoder == ORIGINAL:
        raise ConfigError("calibration applies to the ecpd and mcpd decoders")
    out = Path(out_dir or cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    results = {}
    for snr in cfg.ebn0_db:
        cal = run_calibration(cfg, float(snr))
        tag = f"{cfg.decoder}_n{cfg.n}_p{cfg.p}_{float(snr):.3f}dB"
        cal.schedule.save(out / f"schedule_{tag}.json")
        (out / f"calibration_{tag}.json").write_text(json.dumps(cal.report(), indent=2) + "\n")
        results[float(snr)] = cal
    return results


def density_evolution(cfg: SimConfig, out_dir=None) -> ThresholdResult:
    cfg.validate()
    if cfg.family != "ebch":
        raise ConfigError("density evolution is implemented for eBCH components")
    spec = cfg.product_code().component
    dcfg = DeConfig(
        N=cfg.de_N, l_max=cfg.de_l_max, p=cfg.p, seed=cfg.seed,
        error_floor_eps=cfg.de_error_floor_eps, bdd_mode=cfg.bdd_mode,
    )
    res = find_threshold(spec, cfg.p, dcfg, tuple(cfg.de_bracket), cfg.de_resolution_db)
    out = Path(out_dir or cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    tag = f"n{cfg.n}_t{cfg.t}_p{cfg.p}"
    (out / f"threshold_{tag}.json").write_text(json.dumps(res.to_json(), indent=2) + "\n")
    with (out / f"trajectory_{tag}.csv").open("w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["ebn0_db", "half_iter", "error_fraction"])
        for snr in sorted(res.trajectory):
            for ell, e in enumerate(res.trajectory[snr], start=1):
                wr.writerow([repr(float(snr)), ell, repr(float(e))])
    return res


# -- plot data ---------------------------------------------------------------


def _plot_rows(report) -> list[dict]:
    rows = report.csv_rows() if isinstance(report, SimReport) else report
    return [
        {
            "schema_version": SCHEMA_VERSION, "code": r["code"], "decoder": r["decoder"],
            "p": int(r["p"]), "ebn0_db": float(r["ebn0_db"]), "ber": float(r["ber"]),
            "frames": int(r["frames"]), "bit_errors": int(r["bit_errors"]),
        }
        for r in rows
    ]


def read_report_csv(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def emit_plot_data(reports, path) -> list[dict]:
    """Merge reports (SimReport objects or parsed CSV rows) into one long-format CSV."""
    merged = []
    for rep in reports:
        merged.extend(_plot_rows(rep))
    merged.sort(key=lambda r: (r["decoder"], r["ebn0_db"]))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        wr = csv.DictWriter(fh, PLOT_COLUMNS)
        wr.writeheader()
        for r in merged:
            wr.writerow({k: _fmt(v) for k, v in r.items()})
    return merged


def read_plot_data(path) -> list[dict]:
    rows = read_report_csv(path)
    for r in rows:
        if int(r["schema_version"]) != SCHEMA_VERSION:
            raise ConfigError(f"unsupported plot-data schema {r['schema_version']}")
    return _plot_rows(rows)
