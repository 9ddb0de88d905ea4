"""Monte Carlo engine: threshold calibration, rate estimation, CFAR sweeps.

Trials are embarrassingly parallel. Each trial draws from its own
counter-derived stream (see :mod:`persymdet.streams`), so every output is a
pure function of ``(plan, master_seed)`` and independent of chunking or
worker count. Heavy linear algebra is evaluated in vectorized chunks; the
chunk kernels are pinned to the public single-trial operations by tests.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy.stats import ks_2samp

from . import detectors, scenario
from .detectors import DetectorKind
from .errors import DegenerateStatisticError
from .statistics import eig2_desc
from .streams import derive_seed, stream_rekeyer

_CHUNK = 4096  # fixed: results must not depend on worker count
_Z95 = 1.959963984540054

DetectorSpec = Union[DetectorKind, str]


def _statistic_name(detector: DetectorSpec) -> str:
    if isinstance(detector, DetectorKind):
        return detector.value
    name = str(detector)
    if name not in detectors.STATISTIC_NAMES:
        raise ValueError(f"unknown detector {name!r}; known: {detectors.STATISTIC_NAMES}")
    return name


def _as_names(detector) -> list:
    if isinstance(detector, (DetectorKind, str)):
        return [_statistic_name(detector)]
    names = [_statistic_name(d) for d in detector]
    if not names:
        raise ValueError("at least one detector is required")
    return names


@dataclass(frozen=True)
class TrialPlan:
    """A batch of Monte Carlo trials for one scenario and one detector."""

    scenario: scenario.ScenarioConfig
    detector: DetectorSpec
    trials: int
    master_seed: int
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class EstimateWithCI:
    """A proportion estimate with its 95% Wilson interval."""

    point: float
    ci95: tuple
    n: int


@dataclass(frozen=True)
class CalibrationResult:
    """A calibrated threshold and the false-alarm rate it achieves."""

    threshold: float
    target_pfa: float
    achieved_pfa_ci: tuple
    trials: int


def wilson_interval(successes: int, trials: int, z: float = _Z95) -> tuple:
    """95% Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(center - half, 0.0)
    hi = 1.0 if successes == trials else min(center + half, 1.0)
    return (lo, hi)


def binomial_band(target: float, trials: int, sigmas: float = 3.0) -> float:
    """Half-width of the ``sigmas``-sigma binomial band around ``target``."""
    return sigmas * math.sqrt(target * (1.0 - target) / trials)


def _psi_batch(model, prim: np.ndarray, sec: np.ndarray):
    """Vectorized canonicalize + assemble + quadratic forms for a chunk.

    Mirrors canonicalize() -> assemble() -> compute_psi() over stacked
    trials; equivalence with that public path is asserted by tests.
    """
    t_t = model.transform.t.T
    v_t = model.transform.v.T
    tr = prim @ t_t
    z1 = tr.real @ v_t
    z2 = tr.imag @ v_t
    trk = sec @ t_t
    z1k = trk.real @ v_t
    z2k = trk.imag @ v_t
    zp = np.stack([z1, z2], axis=-1)
    zs = np.concatenate([z1k, z2k], axis=1)
    s = np.einsum("bkn,bkm->bnm", zs, zs)
    psi0 = np.swapaxes(zp, 1, 2) @ np.linalg.solve(s, zp)
    psi1 = np.swapaxes(zp[:, 1:, :], 1, 2) @ np.linalg.solve(s[:, 1:, 1:], zp[:, 1:, :])
    psi0 = 0.5 * (psi0 + np.swapaxes(psi0, 1, 2))
    psi1 = 0.5 * (psi1 + np.swapaxes(psi1, 1, 2))
    return psi0, psi1


def _draw_batch(cfg, model, start: int, count: int, master_seed: int):
    """Stacked dataset draws for trials ``start .. start + count - 1``.

    Consumes each trial's stream in the same order as
    :func:`persymdet.scenario.sample_dataset` (primary real/imag parts, then
    secondary real/imag parts), just buffered into one normal draw per trial
    so the transform work can be batched.
    """
    n, k = cfg.n, cfg.k
    width = 2 * n + 2 * k * n
    buf = np.empty((count, width))
    rekey = stream_rekeyer()
    for j in range(count):
        buf[j] = rekey(master_seed, start + j).standard_normal(width)
    xp = (buf[:, :n] + 1j * buf[:, n : 2 * n]) * scenario._SQRT_HALF
    xs = (buf[:, 2 * n : 2 * n + k * n] + 1j * buf[:, 2 * n + k * n :]) * scenario._SQRT_HALF
    prim = xp @ model.chol.T
    if cfg.hypothesis == "H1":
        prim = prim + model.alpha * model.steering.entries
    sec = np.sqrt(cfg.gamma) * (xs.reshape(count, k, n) @ model.chol.T)
    return prim, sec


def _run_chunk(cfg, model, names, span, master_seed, with_lam):
    start, stop = span
    prim, sec = _draw_batch(cfg, model, start, stop - start, master_seed)
    psi0, psi1 = _psi_batch(model, prim, sec)
    values = {
        name: detectors._batch_values(name, psi0, psi1, cfg.k, cfg.n, index_base=start)
        for name in names
    }
    lam = None
    if with_lam:
        l1, l2 = eig2_desc(psi0)
        l3, l4 = eig2_desc(psi1)
        lam = np.stack([l1, l2, l3, l4], axis=-1)
    return start, values, lam


def _collect(cfg, names, trials, master_seed, workers, with_lam=False):
    model = scenario._prepare(cfg)
    out = {name: np.empty(trials) for name in names}
    lam = np.empty((trials, 4)) if with_lam else None
    spans = [(a, min(a + _CHUNK, trials)) for a in range(0, trials, _CHUNK)]

    def work(span):
        return _run_chunk(cfg, model, names, span, master_seed, with_lam)

    if workers and workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            results = list(pool.map(work, spans))
    else:
        results = [work(span) for span in spans]
    for start, values, lam_chunk in results:
        for name, arr in values.items():
            out[name][start : start + arr.shape[0]] = arr
        if with_lam:
            lam[start : start + lam_chunk.shape[0]] = lam_chunk
    return out, lam


def statistic_samples(
    cfg: scenario.ScenarioConfig,
    detector,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> dict:
    """Per-trial detector values, keyed by canonical statistic name."""
    names = _as_names(detector)
    out, _ = _collect(cfg, names, int(trials), master_seed, workers)
    return out


def _mis_from_lam(lam: np.ndarray) -> np.ndarray:
    bad = ~(lam[:, 3] > 1e-12 * np.maximum(lam[:, 0], 0.0))
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise DegenerateStatisticError(
            f"trial {idx}: degenerate eigenvalue quadruple {tuple(lam[idx])}"
        )
    return lam[:, :3] / lam[:, 3:4]


def mis_samples(
    cfg: scenario.ScenarioConfig, trials: int, master_seed: int, workers: int = 1
):
    """Per-trial maximal invariants and eigenvalue quadruples.

    Returns ``(t, lam)`` with shapes ``(trials, 3)`` and ``(trials, 4)``.
    """
    if cfg.n < 3:
        raise DegenerateStatisticError(
            "the maximal invariant needs N >= 3 (lambda4 vanishes for N = 2)"
        )
    _, lam = _collect(cfg, [], int(trials), master_seed, workers, with_lam=True)
    return _mis_from_lam(lam), lam


def detector_samples(plan: TrialPlan) -> np.ndarray:
    """Per-trial values of ``plan.detector`` under ``plan.scenario``."""
    name = _statistic_name(plan.detector)
    return statistic_samples(
        plan.scenario, name, plan.trials, plan.master_seed, plan.workers
    )[name]


def _order_statistic_threshold(sorted_values: np.ndarray, target_pfa: float):
    trials = sorted_values.shape[0]
    rank = math.ceil((1.0 - target_pfa) * trials)
    if rank <= 0:
        return -np.inf, trials
    eta = float(sorted_values[rank - 1])
    exceed = trials - int(np.searchsorted(sorted_values, eta, side="left"))
    return eta, exceed


def calibrate_threshold(plan: TrialPlan, target_pfa: float) -> CalibrationResult:
    """Threshold as the ``ceil((1 - pfa) * trials)``-th H0 order statistic."""
    if not 0.0 < target_pfa <= 1.0:
        raise ValueError("target_pfa must be in (0, 1]")
    if plan.scenario.hypothesis != "H0":
        raise ValueError("threshold calibration requires an H0 scenario")
    if plan.trials * target_pfa < 100.0:
        warnings.warn(
            f"{plan.trials} trials is thin for Pfa = {target_pfa:g}; "
            "the rule of thumb is trials >= 100 / Pfa",
            stacklevel=2,
        )
    values = np.sort(detector_samples(plan))
    eta, exceed = _order_statistic_threshold(values, target_pfa)
    return CalibrationResult(
        threshold=eta,
        target_pfa=target_pfa,
        achieved_pfa_ci=wilson_interval(exceed, plan.trials),
        trials=plan.trials,
    )


def estimate_rate(plan: TrialPlan, eta: float) -> EstimateWithCI:
    """Exceedance rate ``P(statistic >= eta)`` with its Wilson interval.

    Estimates Pfa under H0 plans and Pd under H1 plans.
    """
    values = detector_samples(plan)
    count = int(np.count_nonzero(values >= eta))
    return EstimateWithCI(
        point=count / plan.trials,
        ci95=wilson_interval(count, plan.trials),
        n=plan.trials,
    )


@dataclass(frozen=True)
class CfarCell:
    """One (detector, gamma, rho) cell of a CFAR sweep."""

    detector: str
    gamma: float
    rho: float
    estimate: EstimateWithCI
    passed: bool


@dataclass(frozen=True)
class CfarSweepResult:
    cells: tuple
    thresholds: dict
    target_pfa: float
    trials: int

    @property
    def all_passed(self) -> bool:
        return all(cell.passed for cell in self.cells)


def cfar_sweep(
    detector,
    base_scenario: scenario.ScenarioConfig,
    gamma_grid: Sequence[float],
    rho_grid: Sequence[float],
    target_pfa: float,
    trials: int,
    seed: int,
    calibration_trials: Optional[int] = None,
    workers: int = 1,
) -> CfarSweepResult:
    """Empirical CFAR verification over a (gamma, rho) nuisance grid.

    Thresholds are calibrated once at the reference cell (gamma = 1, first
    rho) and the false-alarm rate is re-estimated at every grid cell with
    fresh per-cell seeds. A cell passes when its estimate falls inside the
    3-sigma binomial band around ``target_pfa``. ``detector`` may be a single
    kind/name or a sequence; all requested statistics share each cell's
    trials. ``calibration_trials`` (default: ``trials``) controls the size of
    the calibration sample only.
    """
    names = _as_names(detector)
    gamma_grid = [float(g) for g in gamma_grid]
    rho_grid = [float(r) for r in rho_grid]
    if not gamma_grid or not rho_grid:
        raise ValueError("gamma_grid and rho_grid must be nonempty")
    if not 0.0 < target_pfa < 1.0:
        raise ValueError("target_pfa must be in (0, 1)")
    base = scenario.as_hypothesis(base_scenario, "H0")
    n_cal = int(calibration_trials) if calibration_trials else int(trials)

    from dataclasses import replace

    ref_cfg = replace(base, gamma=1.0, rho=rho_grid[0])
    cal_values, _ = _collect(ref_cfg, names, n_cal, derive_seed(seed, 0), workers)
    thresholds = {}
    for name in names:
        eta, _ = _order_statistic_threshold(np.sort(cal_values[name]), target_pfa)
        thresholds[name] = eta

    per_cell = {}
    for idx, (g, r) in enumerate(product(gamma_grid, rho_grid)):
        is_reference = g == 1.0 and r == rho_grid[0]
        if is_reference:
            values, n_cell = cal_values, n_cal
        else:
            cfg = replace(base, gamma=g, rho=r)
            values, _ = _collect(cfg, names, int(trials), derive_seed(seed, 1 + idx), workers)
            n_cell = int(trials)
        band = binomial_band(target_pfa, n_cell)
        for name in names:
            count = int(np.count_nonzero(values[name] >= thresholds[name]))
            point = count / n_cell
            per_cell[(name, g, r)] = CfarCell(
                detector=name,
                gamma=g,
                rho=r,
                estimate=EstimateWithCI(point, wilson_interval(count, n_cell), n_cell),
                passed=abs(point - target_pfa) <= band,
            )
    cells = tuple(
        per_cell[(name, g, r)]
        for name in names
        for g in gamma_grid
        for r in rho_grid
    )
    return CfarSweepResult(
        cells=cells, thresholds=thresholds, target_pfa=target_pfa, trials=int(trials)
    )


class KsResult(NamedTuple):
    statistic: float
    passed: bool
    threshold: float


_DISTURBANCE_FIELDS = ("n", "k", "rho", "doppler_fc", "cnr_db", "gamma", "nu")


def ancillarity_check(
    scenario_h0: scenario.ScenarioConfig,
    scenario_h1: scenario.ScenarioConfig,
    n_samples: int,
    seed: int,
    component: int = 3,
    workers: int = 1,
) -> KsResult:
    """Two-sample KS test of one MIS component across hypotheses.

    The third component is ancillary: its distribution does not move between
    H0 and H1, so the test passes at the 1% level. Components 1 and 2 shift
    with target strength and serve as negative controls. The scenarios must
    agree on everything but hypothesis and amplitude.
    """
    if scenario_h0.hypothesis != "H0" or scenario_h1.hypothesis != "H1":
        raise ValueError("expected one H0 scenario and one H1 scenario")
    for field in _DISTURBANCE_FIELDS:
        if getattr(scenario_h0, field) != getattr(scenario_h1, field):
            raise ValueError(f"scenarios must match except hypothesis; {field} differs")
    if component not in (1, 2, 3):
        raise ValueError("component must be 1, 2 or 3")
    t0, _ = mis_samples(scenario_h0, n_samples, derive_seed(seed, 0), workers)
    t1, _ = mis_samples(scenario_h1, n_samples, derive_seed(seed, 1), workers)
    a = t0[:, component - 1]
    b = t1[:, component - 1]
    stat = float(ks_2samp(a, b).statistic)
    # 1% critical value c(alpha) sqrt((n + m) / (n m)), c = sqrt(-ln(alpha/2)/2)
    c_crit = math.sqrt(-0.5 * math.log(0.005))
    threshold = c_crit * math.sqrt((a.size + b.size) / (a.size * b.size))
    return KsResult(statistic=stat, passed=stat < threshold, threshold=threshold)


class RocPoint(NamedTuple):
    pfa: float
    pd: EstimateWithCI


def roc_curve(
    detector,
    base_scenario: scenario.ScenarioConfig,
    sinr_db: float,
    pfa_grid: Sequence[float],
    trials: int,
    seed: int,
    workers: int = 1,
) -> list:
    """Empirical receiver operating characteristic at one SINR.

    For each target Pfa the threshold is calibrated on a shared H0 sample
    and the detection probability is estimated on a shared H1 sample, so the
    curve is monotone by construction (asserted anyway).
    """
    name = _statistic_name(detector)
    pfas = [float(p) for p in pfa_grid]
    if not pfas:
        raise ValueError("pfa_grid must be nonempty")
    if any(not 0.0 < p <= 1.0 for p in pfas):
        raise ValueError("every target pfa must lie in (0, 1]")
    h0 = scenario.as_hypothesis(base_scenario, "H0")
    h1 = scenario.as_hypothesis(base_scenario, "H1", sinr_db=float(sinr_db))
    v0 = np.sort(statistic_samples(h0, name, trials, derive_seed(seed, 0), workers)[name])
    v1 = statistic_samples(h1, name, trials, derive_seed(seed, 1), workers)[name]
    points = []
    for pfa in sorted(pfas):
        eta, _ = _order_statistic_threshold(v0, pfa)
        count = int(np.count_nonzero(v1 >= eta))
        points.append(
            RocPoint(pfa, EstimateWithCI(count / trials, wilson_interval(count, trials), trials))
        )
    pds = [p.pd.point for p in points]
    if any(b < a for a, b in zip(pds, pds[1:])):
        raise RuntimeError("detection probability is not monotone in pfa")
    return points
