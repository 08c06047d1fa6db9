from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from neuroram.bits import dec
from neuroram.dynamics import run
from neuroram.errors import InvalidParameterError
from neuroram.model import Network, validate
from neuroram.montecarlo import trial_states
from neuroram.similarity import (
    LOCK_INACTIVE, LOCK_OK, LOCK_UNSTABLE,
    build_comparator_gadget, build_similarity, clamps_for, locked_index_check,
    locked_index_values, miss_bound_chain, sample_count, sampling_miss_count,
    similarity_positive_count, test_similarity as run_similarity,
)

LAM = Fraction(1, 32)


@pytest.fixture(scope="module")
def sim16():
    return build_similarity(16, 0.25, 2, LAM)


@pytest.fixture(scope="module")
def sim4():
    return build_similarity(4, 0.5, 2, LAM)


# --- probe count -----------------------------------------------------------

def test_sample_count_examples():
    assert sample_count(16, 0.25, 2) == 23
    assert sample_count(4, 0.5, 2) == 6


def test_sample_count_integer_case():
    # eps = 1 and c*ln(n) integral: exactly c*ln(n) rounded up
    import math
    n = 16
    c = 4 / math.log(n)  # c*ln(n) == 4 exactly up to float error
    assert sample_count(n, 1.0, max(c, 1.0)) == 4


def test_sample_count_rejects_bad_eps():
    with pytest.raises(InvalidParameterError):
        sample_count(16, 0.0)
    with pytest.raises(InvalidParameterError):
        sample_count(16, -0.5)
    with pytest.raises(InvalidParameterError):
        sample_count(16, 0.25, c=0.5)


# --- construction ----------------------------------------------------------

def test_build_validates_and_counts_pairs(sim16):
    net, layout = sim16
    assert validate(net) == []
    assert layout.k == 23
    assert len(layout.units_a) == len(layout.units_b) == 23
    assert len(layout.index) == 23
    assert sorted(net.manifest.values()) == list(range(len(net)))


def test_index_neurons_bias_zero_self_loop_two(sim16):
    net, layout = sim16
    for group in layout.index:
        for y in group:
            assert net.neurons[y].bias == 0
            weights = dict(net.incoming[y])
            assert weights[y] == 2
            assert weights[layout.lock] == -1


def test_lock_reads_every_input_with_weight_two(sim16):
    net, layout = sim16
    weights = dict(net.incoming[layout.lock])
    assert set(weights) == set(layout.x1) | set(layout.x2)
    assert set(weights.values()) == {2}
    assert net.neurons[layout.lock].bias == 1


def test_pairs_share_index_neurons(sim16):
    _, layout = sim16
    for k in range(layout.k):
        assert layout.units_a[k].addr == layout.index[k]
        assert layout.units_b[k].addr == layout.index[k]
        assert layout.units_a[k].start is not None  # delayed clock start


# --- comparator ------------------------------------------------------------

def test_comparator_truth_table():
    net, ids = build_comparator_gadget(LAM)
    for o1, o2 in product((0, 1), repeat=2):
        trace = run(net, {ids["o1"]: o1, ids["o2"]: o2}, 2, seed=5)
        assert trace.fired(1, ids["cmp_any"]) == (o1 | o2)
        assert trace.fired(1, ids["cmp_both"]) == (o1 & o2)
        assert trace.fired(2, ids["out"]) == (o1 ^ o2)


def test_output_integrates_pairs_fires_iff_some_pair_disagrees():
    # Two comparator pairs into one output: exactly-one-active pairs excite,
    # both-active pairs cancel, silent pairs contribute nothing.
    from neuroram.model import Kind, NetworkBuilder, Polarity

    b = NetworkBuilder(LAM)
    pair_outs = [b.add_neuron(f"o{i}", Kind.INPUT, Polarity.EXCITATORY, 0)
                 for i in range(4)]
    out = b.add_neuron("out", Kind.OUTPUT, Polarity.EXCITATORY, 1)
    for k in range(2):
        f_any = b.add_neuron(f"any{k}", Kind.AUXILIARY, Polarity.EXCITATORY, 1)
        f_both = b.add_neuron(f"both{k}", Kind.AUXILIARY, Polarity.INHIBITORY, 3)
        for o in pair_outs[2 * k: 2 * k + 2]:
            b.add_synapse(o, f_any, 2)
            b.add_synapse(o, f_both, 2)
        b.add_synapse(f_any, out, 2)
        b.add_synapse(f_both, out, -2)
    net = b.build()
    for bits in product((0, 1), repeat=4):
        trace = run(net, dict(zip(pair_outs, bits)), 2, seed=3)
        disagreement = (bits[0] ^ bits[1]) or (bits[2] ^ bits[3])
        assert trace.fired(2, out) == int(disagreement), bits


# --- end to end ------------------------------------------------------------

def test_equal_inputs_stay_silent(sim16):
    net, layout = sim16
    x = tuple(int(i % 2 == 0) for i in range(16))
    assert similarity_positive_count(net, layout, x, x, 100, seed=31) <= 1


def test_complement_inputs_detected(sim16):
    net, layout = sim16
    x = tuple(int(i % 3 == 0) for i in range(16))
    far = tuple(1 - b for b in x)
    assert similarity_positive_count(net, layout, x, far, 100, seed=32) >= 99


def test_all_zero_inputs_output_zero(sim16):
    net, layout = sim16
    zero = (0,) * 16
    trace = run(net, clamps_for(layout, zero, zero), layout.read_round, seed=2)
    assert trace.fired(layout.read_round, layout.out) == 0
    assert locked_index_check(trace, layout) == LOCK_INACTIVE


def test_single_run_wrapper():
    x1 = (0, 1, 0, 0)
    assert run_similarity(4, 0.5, x1, x1, seed=9, lam=LAM) == 0
    x2 = (1, 0, 1, 1)
    assert run_similarity(4, 0.5, x1, x2, seed=9, lam=LAM) == 1


# --- locked index ----------------------------------------------------------

def test_lock_holds_over_seeds(sim4):
    net, layout = sim4
    x1, x2 = (1, 0, 1, 0), (1, 1, 0, 0)
    ok = sum(
        locked_index_check(
            run(net, clamps_for(layout, x1, x2), layout.read_round, seed=s), layout
        ) == LOCK_OK
        for s in range(100)
    )
    assert ok >= 99


def test_removing_lock_edges_unlocks(sim4):
    net, layout = sim4
    stripped = [s for s in net.synapses if s.pre != layout.lock]
    loose = Network(net.lam, net.neurons, stripped, net.manifest)
    x1, x2 = (1, 0, 1, 0), (1, 1, 0, 0)
    unstable = sum(
        locked_index_check(
            run(loose, clamps_for(layout, x1, x2), layout.read_round, seed=s), layout
        ) == LOCK_UNSTABLE
        for s in range(30)
    )
    assert unstable >= 25


def test_index_uniformity_total_variation(sim16):
    # Locked values settle in round 1 and hold from round 2; 1e4 seeded trials
    # per probe must sit within TV 0.05 of uniform over {0..15}.
    net, layout = sim16
    x = tuple(int(i % 2) for i in range(16))
    record = [y for group in layout.index for y in group]
    states = trial_states(net, [(clamps_for(layout, x, x), 3)], 10_000, seed=77,
                          record=record)
    log_n = 4
    for k in range(layout.k):
        bits = states[:, 2, k * log_n: (k + 1) * log_n]
        values = (bits @ (1 << np.arange(log_n))).astype(int)
        counts = np.bincount(values, minlength=16)
        tv = 0.5 * np.abs(counts / 10_000 - 1 / 16).sum()
        assert tv < 0.05, f"probe {k}: TV {tv:.4f}"


def test_locked_index_values_match_round_two_bits(sim4):
    net, layout = sim4
    trace = run(net, clamps_for(layout, (1, 0, 0, 0), (1, 0, 0, 0)),
                layout.read_round, seed=13)
    values = locked_index_values(trace, layout)
    assert len(values) == layout.k
    for k, group in enumerate(layout.index):
        assert values[k] == dec(tuple(trace.fired(2, y) for y in group))


# --- sampling bound --------------------------------------------------------

def test_miss_bound_chain_arithmetic():
    miss, target = miss_bound_chain(16, 0.25, 2)
    assert miss == pytest.approx(0.75 ** 23)
    assert target == 16.0 ** -2
    assert miss <= target


def test_sampling_miss_rate_within_three_times_bound():
    k = sample_count(16, 0.25, 2)
    diff = (0, 5, 10, 12)  # ham = eps * n exactly
    misses = sampling_miss_count(16, k, diff, draws=10_000, seed=4)
    assert misses / 10_000 <= 3 * (0.75 ** k)


def test_sampling_miss_requires_difference():
    with pytest.raises(InvalidParameterError):
        sampling_miss_count(16, 5, (), 100, seed=0)
