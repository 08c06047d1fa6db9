"""Vectorized trial engine.

Estimating empirical rates needs thousands of independent runs; doing that
through the exact per-neuron simulator is needlessly slow.  This engine
simulates batches of trials as dense state matrices against a sparse weight
matrix.  Potentials stay exact because every builder network at desk scale
has integer weights and biases far below 2**52, so float64 sums are exact
and each trial's firing law is identical to the exact engine's; only the
randomness stream differs (seeded numpy Philox here, counter-based hashes
there).  Networks whose coefficients could break float64 exactness fall
back to the exact engine transparently.

Results are deterministic in (network, clamps, rounds, trials, seed) and
independent of how trials are split across batches or worker processes.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse

from .dynamics import SATURATION, ClampSpec, run_schedule
from .errors import InvalidParameterError
from .model import Kind, Network

# Trials per RNG batch. Part of the reproducibility contract: changing it
# changes streams, so it is a constant, not a parameter.
BATCH = 512

# Per-neuron |bias| + sum|w| above which float64 potentials could round.
EXACT_LIMIT = 1 << 52


def _coeff_bound(net: Network) -> int:
    totals = [abs(u.bias) for u in net.neurons]
    for s in net.synapses:
        totals[s.post] += abs(s.weight)
    return max(totals, default=0)


def _normalize_schedule(
    schedule: list[tuple[ClampSpec, int]], n_neurons: int, net: Network
) -> list[tuple[np.ndarray, np.ndarray]]:
    per_round = []
    for clamps, duration in schedule:
        if duration <= 0:
            raise InvalidParameterError(f"window duration must be positive, got {duration}")
        for u, bit in clamps.items():
            if net.neurons[u].kind is not Kind.INPUT:
                raise InvalidParameterError(f"only input neurons may be clamped, got {u}")
        idx = np.fromiter(clamps.keys(), dtype=np.int64, count=len(clamps))
        bv = np.fromiter((float(b) for b in clamps.values()), dtype=np.float64,
                         count=len(clamps))
        per_round.extend([(idx, bv)] * duration)
    return per_round


def trial_states(
    net: Network,
    schedule: list[tuple[ClampSpec, int]],
    trials: int,
    seed: int,
    record: list[int],
) -> np.ndarray:
    """Simulate ``trials`` independent runs; returns bool array (trials, rounds+1, len(record)).

    ``schedule`` is a list of (clamps, duration) windows as in
    :func:`neuroram.dynamics.run_schedule`; a fixed clamp for T+1 rounds is
    ``[(clamps, T + 1)]``.
    """
    if trials <= 0:
        raise InvalidParameterError(f"trials must be positive, got {trials}")
    per_round = _normalize_schedule(schedule, len(net), net)
    rounds = len(per_round) - 1

    if _coeff_bound(net) >= EXACT_LIMIT:
        return _trial_states_exact(net, schedule, trials, seed, record)

    n = len(net)
    w = sparse.csr_matrix(
        (
            np.array([float(s.weight) for s in net.synapses], dtype=np.float64),
            (
                np.array([s.pre for s in net.synapses], dtype=np.int64),
                np.array([s.post for s in net.synapses], dtype=np.int64),
            ),
        ),
        shape=(n, n),
    )
    bias = np.array([float(u.bias) for u in net.neurons], dtype=np.float64)
    inv_lam = float(1 / net.lam)
    rec = np.array(record, dtype=np.int64)

    out = np.empty((trials, rounds + 1, len(record)), dtype=bool)
    for lo in range(0, trials, BATCH):
        hi = min(lo + BATCH, trials)
        b = hi - lo
        gen = np.random.default_rng([seed, lo // BATCH])
        state = np.zeros((b, n), dtype=np.float64)
        idx0, bits0 = per_round[0]
        if idx0.size:
            state[:, idx0] = bits0
        out[lo:hi, 0, :] = state[:, rec] > 0.5
        for t in range(1, rounds + 1):
            pot = state @ w
            pot -= bias
            x = pot * inv_lam
            p = np.where(
                x > SATURATION, 1.0,
                np.where(x < -SATURATION, 0.0, 1.0 / (1.0 + np.exp(-np.clip(x, -SATURATION, SATURATION)))),
            )
            state = (gen.random((b, n)) < p).astype(np.float64)
            idx, bv = per_round[t]
            if idx.size:
                state[:, idx] = bv
            out[lo:hi, t, :] = state[:, rec] > 0.5
    return out


def _trial_states_exact(net, schedule, trials, seed, record):
    # Big-coefficient fallback: one exact run per trial, seeds spread by batch
    # position to stay disjoint from other uses of the root seed.
    rounds = sum(d for _, d in schedule) - 1
    out = np.empty((trials, rounds + 1, len(record)), dtype=bool)
    for k in range(trials):
        trace = run_schedule(net, schedule, seed=((seed << 20) + k) & ((1 << 63) - 1))
        for t, st in enumerate(trace.states):
            out[k, t, :] = [bool(st.fired[u]) for u in record]
    return out


def final_bit_counts(
    net: Network,
    clamps: ClampSpec,
    rounds: int,
    trials: int,
    seed: int,
    neuron: int,
) -> int:
    """Number of trials in which ``neuron`` fired in the final round."""
    states = trial_states(net, [(clamps, rounds + 1)], trials, seed, [neuron])
    return int(states[:, rounds, 0].sum())
