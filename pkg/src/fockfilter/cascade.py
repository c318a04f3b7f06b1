"""Cascaded Fock filters: Monte Carlo photon-number measurement.

A chain of cavities tuned to n_0, n_1, n_2, ... probes the signal one Fock
component at a time; the stage index of the first detector click samples
(up to a small off-resonant leak) the photon distribution of the input
state.  Trials are reproducible: the RNG stream of trial i is derived from
(rng_seed, i), so any execution order — serial, shuffled, or threaded —
yields identical records.

In terminate-on-first-ON mode every trial walks the same deterministic
all-OFF chain until its first click, so the per-stage click probabilities
are precomputed once and each trial only consumes uniforms.  This is not an
approximation: the records match a stage-by-stage state walk bit for bit
(see tests).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cavity import CavityParams
from .filtering import ProbeDetector, filter_pass, MIN_OUTCOME_PROB
from . import fock

UPDATE_RULES = ("exact", "good_cavity")

# Completeness |p_on + p_off - trace| beyond this aborts the trial.
TRACE_DRIFT_TOL = 1e-6


@dataclass(frozen=True)
class CascadeStage:
    """One filter in the chain, tuned to click on Fock component target_n."""

    target_n: int
    cavity: CavityParams
    probe: ProbeDetector

    def __post_init__(self):
        if self.target_n < 0:
            raise ValueError("target_n must be >= 0")
        detune = abs(self.cavity.psi - self.cavity.chi_t * self.target_n)
        if detune > 1e-12:
            raise ValueError(
                f"stage tuned to n={self.target_n} but psi - chi_t*n = {detune:.3e} "
                "(must vanish within 1e-12)")


@dataclass(frozen=True)
class CascadeConfig:
    """Stage list, sample count, RNG seed and the conditional update rule.

    update_rule "exact" evolves the full conditional state through every
    stage; "good_cavity" uses the tau << chi_t projections (ON -> |n_k><n_k|,
    OFF -> diagonal with n_k removed).  terminate_on_first_on is the
    distribution-estimation mode; switch it off to record every stage.
    """

    stages: tuple
    samples: int
    rng_seed: int
    update_rule: str = "exact"
    terminate_on_first_on: bool = True

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.stages:
            raise ValueError("cascade needs at least one stage")
        targets = [s.target_n for s in self.stages]
        if len(set(targets)) != len(targets):
            raise ValueError(f"stage targets must be pairwise distinct, got {targets}")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if not (0 <= self.rng_seed < 2 ** 64):
            raise ValueError("rng_seed must be a 64-bit unsigned integer")
        if self.update_rule not in UPDATE_RULES:
            raise ValueError(f"update_rule must be one of {UPDATE_RULES}")


def tuned_cascade(n_top, tau, chi_t, alpha, eta, samples, rng_seed,
                  update_rule="exact"):
    """Cascade with one stage per Fock component 0..n_top, shared parameters."""
    probe = ProbeDetector(alpha=alpha, eta=eta)
    stages = tuple(
        CascadeStage(target_n=k, cavity=CavityParams.tuned(k, tau, chi_t), probe=probe)
        for k in range(n_top + 1))
    return CascadeConfig(stages=stages, samples=samples, rng_seed=rng_seed,
                         update_rule=update_rule)


@dataclass(frozen=True)
class MeasurementRecord:
    """Per-stage ON/OFF bits of one trial and the first-ON stage index.

    In terminate-on-first-ON mode the outcome tuple stops at the click (so
    it contains at most one ON); first_on is None when no stage fired.
    """

    outcomes: tuple
    first_on: int | None


def _stage_update(state, stage, rule):
    """(p_on, state_on, p_off, state_off) for one stage on `state`.

    Probabilities are raw traces, so p_on + p_off equals the trace of the
    input state — the completeness check that catches drift mid-cascade.
    """
    if rule == "exact":
        res = filter_pass(state, stage.cavity, stage.probe)
        return res.p_on, res.state_on, res.p_off, res.state_off
    # good-cavity projections: a click collapses onto |n_k><n_k|, silence
    # removes the n_k component and drops coherences
    nk = stage.target_n
    dim = state.shape[0]
    trace = np.trace(state).real
    p_on = float(state[nk, nk].real) if nk < dim else 0.0
    p_off = trace - p_on
    if p_on >= MIN_OUTCOME_PROB:
        on = np.zeros((dim, dim), dtype=complex)
        on[nk, nk] = 1.0
    else:
        on = None
    if p_off >= MIN_OUTCOME_PROB:
        diag = state.diagonal().real.copy()
        if nk < dim:
            diag[nk] = 0.0
        off = np.diag(diag / p_off).astype(complex)
    else:
        off = None
    return p_on, on, p_off, off


def run_cascade_trial(rho, cfg, rng):
    """One Monte Carlo walk through the cascade; draws one uniform per stage.

    The conditional state after each outcome feeds the next stage.  Raises
    NumericalError if probability completeness drifts past 1e-6 at any stage
    or the drawn outcome has no conditional state.
    """
    state = np.asarray(rho, dtype=complex)
    expected_trace = 1.0
    outcomes = []
    first_on = None
    for k, stage in enumerate(cfg.stages):
        p_on, state_on, p_off, state_off = _stage_update(state, stage, cfg.update_rule)
        drift = abs((p_on + p_off) - expected_trace)
        if drift > TRACE_DRIFT_TOL:
            raise fock.NumericalError(
                f"cascade aborted at stage {k} (target n={stage.target_n}): "
                f"probability completeness drifted by {drift:.3e} > {TRACE_DRIFT_TOL:g}")
        clicked = rng.random() < p_on
        outcomes.append(1 if clicked else 0)
        next_state = state_on if clicked else state_off
        if clicked and first_on is None:
            first_on = k
            if cfg.terminate_on_first_on:
                break
        if next_state is None:
            raise fock.NumericalError(
                f"cascade stage {k}: drew an outcome of probability < {MIN_OUTCOME_PROB:g}")
        state = next_state
    return MeasurementRecord(outcomes=tuple(outcomes), first_on=first_on)


def _off_chain_probabilities(rho, cfg):
    """Per-stage ON probability along the all-OFF path (exact chain, no sampling)."""
    state = np.asarray(rho, dtype=complex)
    expected_trace = 1.0
    q = np.empty(len(cfg.stages))
    for k, stage in enumerate(cfg.stages):
        p_on, _, p_off, state_off = _stage_update(state, stage, cfg.update_rule)
        drift = abs((p_on + p_off) - expected_trace)
        if drift > TRACE_DRIFT_TOL:
            raise fock.NumericalError(
                f"cascade chain drifted by {drift:.3e} at stage {k}")
        q[k] = p_on
        if state_off is None and k + 1 < len(cfg.stages):
            raise fock.NumericalError(
                f"all-OFF path dies at stage {k}: OFF probability < {MIN_OUTCOME_PROB:g}")
        state = state_off
    return q


def first_on_distribution(rho, cfg):
    """Analytic first-ON distribution: (probabilities per stage, all-OFF residual).

    P(first_on = k) = q_k prod_{j<k} (1 - q_j) with q_k the exact per-stage
    click probabilities chained along the all-OFF path.
    """
    q = _off_chain_probabilities(rho, cfg)
    survival = np.cumprod(np.concatenate(([1.0], 1.0 - q)))
    return q * survival[:-1], float(survival[-1])


def _count_chunk(q, seed, lo, hi):
    """First-ON counts for trials lo..hi-1; pure function of its arguments."""
    counts = np.zeros(len(q) + 1, dtype=np.int64)  # last slot = all OFF
    for i in range(lo, hi):
        rng = np.random.default_rng((seed, i))
        for k, qk in enumerate(q):
            if rng.random() < qk:
                counts[k] += 1
                break
        else:
            counts[len(q)] += 1
    return counts


@dataclass(frozen=True)
class DistributionEstimate(fock.PhotonDistribution):
    """Monte Carlo photon-distribution estimate with diagnostics.

    values/ci: per-bin estimates and 1-sigma binomial half-widths (floored
    at 1/samples).  theory: the input state's distribution on the same bins.
    expected: the analytic first-ON distribution (what the estimator
    converges to).  all_off: fraction of trials with no click at any stage,
    with its analytic counterpart in all_off_expected.  preparations counts
    signal preparations consumed (one per trial in terminate-on-ON mode).
    """

    theory: np.ndarray | None = None
    expected: np.ndarray | None = None
    counts: np.ndarray | None = None
    all_off: float = 0.0
    all_off_expected: float = 0.0
    samples: int = 0
    preparations: int = 0


def estimate_photon_distribution(spec, n_top, cfg, max_workers=None):
    """Estimate p_n for n = 0..n_top by Monte Carlo over the cascade.

    `spec` may be a StateSpec or a prepared density matrix.  The stages must
    be tuned to 0..n_top in order.  Aggregation is a sum of per-chunk
    counts, so results are independent of worker count and execution order.
    """
    targets = tuple(s.target_n for s in cfg.stages)
    if targets != tuple(range(n_top + 1)):
        raise ValueError(f"stages must cover 0..{n_top} in order, got targets {targets}")
    if not cfg.terminate_on_first_on:
        raise ValueError("distribution estimation requires terminate_on_first_on mode")

    if isinstance(spec, fock.StateSpec):
        rho = fock.make_state(spec)
        theory = fock.analytic_distribution(spec, n_top)
    else:
        rho = np.asarray(spec, dtype=complex)
        theory = fock.photon_distribution(rho).values[:n_top + 1]

    q = _off_chain_probabilities(rho, cfg)
    expected, residual = first_on_distribution(rho, cfg)

    S = cfg.samples
    if max_workers is None or max_workers <= 1:
        counts = _count_chunk(q, cfg.rng_seed, 0, S)
    else:
        step = -(-S // max_workers)
        ranges = [(lo, min(lo + step, S)) for lo in range(0, S, step)]
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            parts = pool.map(lambda r: _count_chunk(q, cfg.rng_seed, *r), ranges)
            counts = sum(parts)

    p_hat = counts[:n_top + 1] / S
    ci = np.maximum(np.sqrt(p_hat * (1.0 - p_hat) / S), 1.0 / S)
    return DistributionEstimate(
        values=p_hat, ci=ci, theory=theory, expected=expected,
        counts=counts[:n_top + 1], all_off=counts[n_top + 1] / S,
        all_off_expected=residual, samples=S, preparations=S)
