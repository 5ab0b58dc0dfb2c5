"""Deterministic sweep campaigns and phase-diagram aggregation.

A :class:`SweepPlan` expands into one job per (mu, alpha, A-bin, sample).
Amplitudes are drawn by a counter-based generator (SHA-256 of the plan seed
and the job key), so the job list is identical across platforms, worker
counts, and resume points.  Completed jobs append one line to a CSV journal;
aggregation into per-mu diagrams is a separate pass over the journal, which
makes interrupted sweeps resumable and their outputs auditable.

Pixel fractions follow the crossing coding: each pixel holds the number of
crossing runs divided by the number of valid runs in that (A-bin, alpha)
cell; failed runs reduce the valid count and are reported separately.
"""
from __future__ import annotations

import csv
import hashlib
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field

import numpy as np

from .classifier import (
    CONFINED,
    RunOutcome,
    STATUS_COMPLETED,
    STATUS_EARLY_STOPPED,
    STATUS_FAILED_DOMAIN,
    classify_pde,
)
from .errors import DomainError, IoError, PlanError
from .integrator import StepConfig, gauss_scheme
from .model import critical_amplitude, make_params, normalized_amplitude
from .spectral import GridSpec, initial_state

__all__ = [
    "SweepPlan",
    "SweepJob",
    "PhaseDiagram",
    "ColumnBoundary",
    "DiagramStats",
    "JOURNAL_FIELDS",
    "expand",
    "run_sweep",
    "aggregate_journal",
    "read_journal",
    "diagram_stats",
    "write_diagram_csv",
    "write_diagram_meta",
    "write_diagram_pgm",
    "write_diagram_gnuplot",
    "plan_from_dict",
    "plan_to_dict",
    "mu_tag",
]

A_MODE_RAW = "raw"
A_MODE_NORMALIZED = "normalized"

DEFAULT_MU_VALUES = (2.0**-6, 2.0**-2, 1.0, 2.0)
DEFAULT_ALPHA_EXPONENTS = tuple(range(-20, -1))
DEFAULT_A_INTERVAL = {A_MODE_RAW: (0.04, 0.13), A_MODE_NORMALIZED: (0.5, 1.6)}

JOURNAL_FIELDS = (
    "mu", "alpha_exp", "alpha", "bin_idx", "sample_idx", "A", "A_prime",
    "classification", "first_crossing_time", "energy_drift", "t_final",
    "status", "steps", "wall_ms",
)


def _default_step() -> StepConfig:
    return StepConfig(dt=2.0**-4)


@dataclass(frozen=True)
class SweepPlan:
    """Full description of a campaign; expansion is a pure function of this.

    ``A_interval`` is in raw A units in ``raw`` mode and in A' units
    (A / critical_amplitude(mu)) in ``normalized`` mode; the latter makes one
    interval meaningful across mu values.  When omitted it defaults to
    (0.04, 0.13) raw / (0.5, 1.6) normalized.
    """

    mu_values: tuple = DEFAULT_MU_VALUES
    alpha_exponents: tuple = DEFAULT_ALPHA_EXPONENTS
    A_interval: tuple | None = None
    A_bins: int = 24
    samples_per_bin: int = 32
    t_end: float = 16384.0
    seed: int = 0
    a_mode: str = A_MODE_RAW
    grid: GridSpec = field(default_factory=GridSpec)
    step: StepConfig = field(default_factory=_default_step)

    def __post_init__(self):
        object.__setattr__(self, "mu_values", tuple(float(m) for m in self.mu_values))
        object.__setattr__(self, "alpha_exponents",
                           tuple(int(e) for e in self.alpha_exponents))
        if self.a_mode not in (A_MODE_RAW, A_MODE_NORMALIZED):
            raise PlanError(f"a_mode must be 'raw' or 'normalized', got {self.a_mode!r}")
        if self.A_interval is None:
            object.__setattr__(self, "A_interval", DEFAULT_A_INTERVAL[self.a_mode])
        object.__setattr__(self, "A_interval",
                           (float(self.A_interval[0]), float(self.A_interval[1])))
        if not self.mu_values:
            raise PlanError("mu_values must be non-empty")
        if any(not (m > 0) for m in self.mu_values):
            raise PlanError("every mu must be > 0")
        if len(set(map(repr, self.mu_values))) != len(self.mu_values):
            raise PlanError("mu_values must be distinct")
        if not self.alpha_exponents:
            raise PlanError("alpha_exponents must be non-empty")
        if len(set(self.alpha_exponents)) != len(self.alpha_exponents):
            raise PlanError("alpha_exponents must be distinct")
        lo, hi = self.A_interval
        if not (0.0 <= lo < hi):
            raise PlanError(f"A_interval must satisfy 0 <= lo < hi, got {self.A_interval}")
        if self.A_bins < 1:
            raise PlanError(f"A_bins must be >= 1, got {self.A_bins}")
        if self.samples_per_bin < 1:
            raise PlanError(f"samples_per_bin must be >= 1, got {self.samples_per_bin}")
        if not (self.t_end > 0):
            raise PlanError(f"t_end must be > 0, got {self.t_end}")

    @property
    def job_count(self) -> int:
        return (len(self.mu_values) * len(self.alpha_exponents)
                * self.A_bins * self.samples_per_bin)


@dataclass(frozen=True)
class SweepJob:
    """One classified run: physical parameters plus its position in the plan."""

    mu: float
    alpha: float
    A: float
    A_prime: float
    mu_idx: int
    alpha_idx: int
    alpha_exp: int
    bin_idx: int
    sample_idx: int

    @property
    def key(self):
        return (repr(self.mu), self.alpha_exp, self.bin_idx, self.sample_idx)


def _unit_sample(seed: int, mu_idx: int, alpha_idx: int, bin_idx: int,
                 sample_idx: int) -> float:
    """Uniform [0, 1) draw, a pure function of the seed and the job key."""
    msg = f"{seed}:{mu_idx}:{alpha_idx}:{bin_idx}:{sample_idx}".encode()
    digest = hashlib.sha256(msg).digest()
    return int.from_bytes(digest[:8], "big") / 2.0**64


def expand(plan: SweepPlan) -> list:
    """All jobs of the plan, in lexicographic key order, amplitudes included."""
    lo, hi = plan.A_interval
    width = (hi - lo) / plan.A_bins
    jobs = []
    for mu_idx, mu in enumerate(plan.mu_values):
        crit = critical_amplitude(mu)
        for alpha_idx, exp in enumerate(plan.alpha_exponents):
            alpha = -(2.0**exp)
            for bin_idx in range(plan.A_bins):
                for sample_idx in range(plan.samples_per_bin):
                    x = lo + (bin_idx + _unit_sample(
                        plan.seed, mu_idx, alpha_idx, bin_idx, sample_idx)) * width
                    if plan.a_mode == A_MODE_NORMALIZED:
                        A = x * crit
                        A_prime = x
                    else:
                        A = x
                        A_prime = normalized_amplitude(A, mu)
                    jobs.append(SweepJob(
                        mu=mu, alpha=alpha, A=A, A_prime=A_prime,
                        mu_idx=mu_idx, alpha_idx=alpha_idx, alpha_exp=exp,
                        bin_idx=bin_idx, sample_idx=sample_idx))
    return jobs


# ---------------------------------------------------------------------------
# journal

def _format_row(job: SweepJob, outcome: RunOutcome, wall_ms: float) -> dict:
    valid = not outcome.failed
    return {
        "mu": repr(job.mu),
        "alpha_exp": str(job.alpha_exp),
        "alpha": repr(job.alpha),
        "bin_idx": str(job.bin_idx),
        "sample_idx": str(job.sample_idx),
        "A": repr(job.A),
        "A_prime": repr(job.A_prime),
        "classification": "1" if (valid and outcome.crossed) else "0",
        "first_crossing_time": (
            "" if outcome.first_crossing_time is None
            else repr(outcome.first_crossing_time)),
        "energy_drift": repr(outcome.energy_drift),
        "t_final": repr(outcome.t_final),
        "status": outcome.status,
        "steps": str(outcome.steps),
        "wall_ms": f"{wall_ms:.3f}",
    }


def read_journal(path) -> list:
    """All rows of a journal as dicts; [] if the file does not exist."""
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                return []
            if tuple(reader.fieldnames) != JOURNAL_FIELDS:
                raise IoError(f"{path} is not a sweep journal "
                              f"(header {reader.fieldnames})")
            return list(reader)
    except FileNotFoundError:
        return []
    except OSError as exc:
        raise IoError(f"cannot read journal {path}: {exc}") from exc


def _journal_keys(rows) -> set:
    return {(r["mu"], int(r["alpha_exp"]), int(r["bin_idx"]), int(r["sample_idx"]))
            for r in rows}


def _execute_job(plan: SweepPlan, job: SweepJob):
    """Run one job to completion; failures become outcomes, not exceptions."""
    start = time.perf_counter()
    try:
        params = make_params(alpha=job.alpha, beta=1.0, mu=job.mu, L=1.0)
        state0 = initial_state(job.A, job.mu, plan.grid)
        outcome = classify_pde(state0, params, plan.step, plan.t_end,
                               grid=plan.grid)
    except DomainError:
        # Sampled A >= sqrt(mu): the initial field is not strictly positive,
        # so the run is outside the classifier's domain.  Journal it as a
        # failure (excluded from pixel statistics) instead of aborting.
        outcome = RunOutcome(CONFINED, None, 0.0, 0.0, STATUS_FAILED_DOMAIN, 0)
    wall_ms = (time.perf_counter() - start) * 1e3
    return job, outcome, wall_ms


def run_sweep(plan: SweepPlan, parallelism: int, journal,
              max_jobs: int | None = None) -> list:
    """Execute every job not yet in the journal; aggregate per-mu diagrams.

    The journal is append-only and flushed per record, so an interrupted
    sweep resumes by key: already-journaled jobs are never re-run, and the
    final diagrams are independent of parallelism and interruption history.
    ``max_jobs`` caps how many pending jobs this call executes (the
    deliberate-interruption hook used by the determinism checks).
    """
    if parallelism < 1:
        raise PlanError(f"parallelism must be >= 1, got {parallelism}")
    jobs = expand(plan)
    done = _journal_keys(read_journal(journal))
    pending = [job for job in jobs if job.key not in done]
    if max_jobs is not None:
        pending = pending[:max_jobs]
    try:
        fresh = not done
        with open(journal, "a", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=JOURNAL_FIELDS)
            if fresh and fh.tell() == 0:
                writer.writeheader()
                fh.flush()

            def record(job, outcome, wall_ms):
                writer.writerow(_format_row(job, outcome, wall_ms))
                fh.flush()

            if parallelism == 1 or len(pending) <= 1:
                for job in pending:
                    record(*_execute_job(plan, job))
            else:
                with ProcessPoolExecutor(max_workers=parallelism) as pool:
                    futures = [pool.submit(_execute_job, plan, job)
                               for job in pending]
                    for fut in as_completed(futures):
                        record(*fut.result())
    except OSError as exc:
        raise IoError(f"cannot write journal {journal}: {exc}") from exc
    return aggregate_journal(plan, read_journal(journal))


# ---------------------------------------------------------------------------
# aggregation

@dataclass(frozen=True)
class PhaseDiagram:
    """Per-mu pixel matrix: rows = A bins ascending, columns = alpha ascending.

    ``fractions[b, j]`` is (# crossing) / (# valid) in that pixel, NaN where
    no valid run exists; ``counts`` holds the valid-run numbers and
    ``failures`` the total failed runs for this mu.
    """

    mu: float
    alpha_exponents: tuple
    a_mode: str
    A_interval: tuple
    fractions: np.ndarray
    counts: np.ndarray
    failures: int

    @property
    def bin_centers_prime(self) -> np.ndarray:
        """Pixel-row centers in A' units."""
        lo, hi = self.A_interval
        centers = lo + (np.arange(self.fractions.shape[0]) + 0.5) * (
            (hi - lo) / self.fractions.shape[0])
        if self.a_mode == A_MODE_NORMALIZED:
            return centers
        return centers / critical_amplitude(self.mu)


def aggregate_journal(plan: SweepPlan, rows) -> list:
    """Fold journal rows into one PhaseDiagram per plan mu (plan order).

    Rows that do not belong to the plan's grid of keys are ignored, so a
    journal can safely hold the union of several partial invocations.
    """
    exps = tuple(sorted(plan.alpha_exponents))
    col = {e: j for j, e in enumerate(exps)}
    shape = (plan.A_bins, len(exps))
    diagrams = []
    for mu in plan.mu_values:
        mu_str = repr(mu)
        crossings = np.zeros(shape, dtype=np.int64)
        valid = np.zeros(shape, dtype=np.int64)
        failures = 0
        for r in rows:
            if r["mu"] != mu_str:
                continue
            exp = int(r["alpha_exp"])
            b = int(r["bin_idx"])
            if exp not in col or not (0 <= b < plan.A_bins):
                continue
            if r["status"] in (STATUS_COMPLETED, STATUS_EARLY_STOPPED):
                valid[b, col[exp]] += 1
                crossings[b, col[exp]] += int(r["classification"])
            else:
                failures += 1
        with np.errstate(invalid="ignore"):
            fractions = np.where(valid > 0, crossings / np.maximum(valid, 1), np.nan)
        diagrams.append(PhaseDiagram(
            mu=mu, alpha_exponents=exps, a_mode=plan.a_mode,
            A_interval=plan.A_interval, fractions=fractions, counts=valid,
            failures=failures))
    return diagrams


# ---------------------------------------------------------------------------
# diagram statistics

@dataclass(frozen=True)
class ColumnBoundary:
    """Half-crossing boundary of one alpha column, in A' units.

    ``a_prime`` is None when the column does not bracket the 1/2 level
    (all-confined, all-crossing, or no valid pixels); ``reason`` says which.
    """

    alpha_exp: int
    a_prime: float | None
    reason: str | None = None


@dataclass(frozen=True)
class DiagramStats:
    boundaries: tuple
    mixed_pixels: int
    valid_runs: int
    failed_runs: int


def diagram_stats(d: PhaseDiagram) -> DiagramStats:
    """Boundary estimate per column plus the mixed-pixel count.

    The boundary is the A' at which the crossing fraction first exceeds 1/2
    moving up in A, linearly interpolated between bin centers; a column
    without such a bracket is reported as undefined rather than failing.
    """
    centers = d.bin_centers_prime
    boundaries = []
    for j, exp in enumerate(d.alpha_exponents):
        have = d.counts[:, j] > 0
        if not np.any(have):
            boundaries.append(ColumnBoundary(exp, None, "no-valid-pixels"))
            continue
        cs = centers[have]
        fs = d.fractions[have, j]
        above = fs > 0.5
        if not above.any():
            boundaries.append(ColumnBoundary(exp, None, "all-below-half"))
            continue
        i = int(np.argmax(above))
        if i == 0:
            boundaries.append(ColumnBoundary(exp, None, "boundary-below-range"))
            continue
        f0, f1 = fs[i - 1], fs[i]
        t = (0.5 - f0) / (f1 - f0)
        boundaries.append(ColumnBoundary(exp, float(cs[i - 1] + t * (cs[i] - cs[i - 1]))))
    mixed = int(np.sum((d.counts > 0) & (d.fractions > 0.0) & (d.fractions < 1.0)))
    return DiagramStats(boundaries=tuple(boundaries), mixed_pixels=mixed,
                        valid_runs=int(d.counts.sum()), failed_runs=d.failures)


# ---------------------------------------------------------------------------
# serialization

def mu_tag(mu: float) -> str:
    """Filesystem-safe tag for a mu value (repr with '.'->'p', '-'->'m')."""
    return repr(float(mu)).replace("-", "m").replace(".", "p")


def plan_to_dict(plan: SweepPlan) -> dict:
    sch = plan.step.scheme
    return {
        "mu_values": list(plan.mu_values),
        "alpha_exponents": list(plan.alpha_exponents),
        "A_interval": list(plan.A_interval),
        "A_bins": plan.A_bins,
        "samples_per_bin": plan.samples_per_bin,
        "t_end": plan.t_end,
        "seed": plan.seed,
        "a_mode": plan.a_mode,
        "grid": {"n": plan.grid.n, "dealias_factor": plan.grid.dealias_factor},
        "step": {"dt": plan.step.dt, "stages": sch.stages,
                 "stage_tol": sch.stage_tol,
                 "max_stage_iters": sch.max_stage_iters},
    }


def plan_from_dict(data: dict) -> SweepPlan:
    known = {"mu_values", "alpha_exponents", "A_interval", "A_bins",
             "samples_per_bin", "t_end", "seed", "a_mode", "grid", "step"}
    unknown = set(data) - known
    if unknown:
        raise PlanError(f"unknown plan keys: {sorted(unknown)}")
    kwargs = {}
    for key in ("mu_values", "alpha_exponents", "A_interval"):
        if key in data and data[key] is not None:
            kwargs[key] = tuple(data[key])
    for key in ("A_bins", "samples_per_bin", "seed"):
        if key in data:
            kwargs[key] = int(data[key])
    if "t_end" in data:
        kwargs["t_end"] = float(data["t_end"])
    if "a_mode" in data:
        kwargs["a_mode"] = str(data["a_mode"])
    g = data.get("grid", {})
    unknown = set(g) - {"n", "dealias_factor"}
    if unknown:
        raise PlanError(f"unknown grid keys: {sorted(unknown)}")
    kwargs["grid"] = GridSpec(n=int(g.get("n", 64)),
                              dealias_factor=int(g.get("dealias_factor", 2)))
    s = data.get("step", {})
    unknown = set(s) - {"dt", "stages", "stage_tol", "max_stage_iters"}
    if unknown:
        raise PlanError(f"unknown step keys: {sorted(unknown)}")
    scheme = gauss_scheme(stages=int(s.get("stages", 2)),
                          stage_tol=float(s.get("stage_tol", 1e-12)),
                          max_stage_iters=int(s.get("max_stage_iters", 100)))
    kwargs["step"] = StepConfig(dt=float(s.get("dt", 2.0**-4)), scheme=scheme)
    return SweepPlan(**kwargs)


# ---------------------------------------------------------------------------
# diagram writers

def write_diagram_csv(d: PhaseDiagram, path) -> None:
    """Plain numeric matrix: rows = A bins ascending, columns = alpha ascending;
    missing pixels written as nan."""
    lines = []
    for b in range(d.fractions.shape[0]):
        lines.append(",".join(
            "nan" if math.isnan(f) else repr(float(f)) for f in d.fractions[b]))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_diagram_meta(d: PhaseDiagram, plan: SweepPlan, path,
                       extra: dict | None = None) -> None:
    """JSON sidecar: the resolved plan, this diagram's geometry, and counts."""
    import json

    stats = diagram_stats(d)
    meta = {
        "mu": d.mu,
        "plan": plan_to_dict(plan),
        "columns": {"alpha_exponents_ascending": list(d.alpha_exponents),
                    "alpha": [-(2.0**e) for e in d.alpha_exponents]},
        "rows": {"a_mode": d.a_mode, "A_interval": list(d.A_interval),
                 "order": "A bins ascending",
                 "bin_centers_a_prime": [float(c) for c in d.bin_centers_prime]},
        "counts": d.counts.tolist(),
        "failures": d.failures,
        "mixed_pixels": stats.mixed_pixels,
        "boundaries_a_prime": [
            {"alpha_exp": b.alpha_exp, "a_prime": b.a_prime, "reason": b.reason}
            for b in stats.boundaries],
        "pgm": {"rows": "A bins descending (largest A on top)",
                "value": "round(255 * fraction), 0 where missing",
                "mask": "255 = valid pixel, 0 = missing"},
    }
    if extra:
        meta.update(extra)
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _pgm_bytes(values: np.ndarray) -> bytes:
    h, w = values.shape
    return b"P5\n%d %d\n255\n" % (w, h) + values.astype(np.uint8).tobytes()


def write_diagram_pgm(d: PhaseDiagram, path, mask_path=None) -> None:
    """8-bit P5 heatmap (largest A on top) plus a validity mask."""
    fr = np.flipud(d.fractions)
    counts = np.flipud(d.counts)
    vals = np.where(counts > 0, np.rint(255.0 * np.nan_to_num(fr)), 0.0)
    with open(path, "wb") as fh:
        fh.write(_pgm_bytes(vals))
    if mask_path is not None:
        mask = np.where(counts > 0, 255, 0)
        with open(mask_path, "wb") as fh:
            fh.write(_pgm_bytes(mask))


def write_diagram_gnuplot(d: PhaseDiagram, path) -> None:
    """Nonuniform-matrix file for `plot ... nonuniform matrix with image`:
    x = alpha exponent (log2 of -alpha), y = bin center in A' units."""
    centers = d.bin_centers_prime
    ncol = len(d.alpha_exponents)
    lines = [" ".join([str(ncol)] + [str(e) for e in d.alpha_exponents])]
    for b in range(d.fractions.shape[0]):
        row = [repr(float(centers[b]))]
        row += ["nan" if math.isnan(f) else repr(float(f)) for f in d.fractions[b]]
        lines.append(" ".join(row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
