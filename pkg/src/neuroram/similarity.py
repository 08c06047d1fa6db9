"""Approximate-equality (similarity) testing network.

Distinguishes equal n-bit patterns from patterns at Hamming distance at
least eps*n by probing K = ceil(c*ln(n)/eps) uniformly random positions.
Each probe k owns log2(n) index neurons with bias 0 and a weight-2
self-loop: in round 1 they fire as fair coins, and an inhibitory lock
(bias 1, weight 2 from every input, weight -1 to every index neuron) then
freezes the drawn pattern in place -- the -1 is too weak to silence an
active self-loop (potential 2 - 1 = 1) but keeps silent neurons silent.
The frozen pattern addresses a pair of indexing units, one over each input
pattern; a per-pair comparator (an excitatory OR with bias 1 and an
inhibitory AND with bias 3, both reading the pair outputs with weight 2,
wired +2/-2 into the output) lifts the output exactly when some pair
disagrees.  The output is read at round 5*sqrt(n) + 2.

Because the random index only settles in round 1, each embedded indexing
unit starts its clock through a one-round delay relay, shifting its
internal schedule by one round.  With the fixed read round this leaves the
last of the sqrt(n) read steps unobserved, i.e. probes addressing the last
position of a bucket do not report; the miss-probability analysis absorbs
this as a constant factor on the per-probe hit rate and the false-positive
direction is unaffected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bits import dec
from .dynamics import Trace, default_lambda, run
from .errors import InvalidParameterError
from .model import Kind, Network, NetworkBuilder, Polarity
from .montecarlo import trial_states
from .ramnet import NeuroRamLayout, dimension, graft_indexing_unit

LOCK_OK = "ok"
LOCK_INACTIVE = "lock-inactive"
LOCK_UNSTABLE = "unstable"


@dataclass(frozen=True)
class SimilarityLayout:
    n: int
    eps: float
    c: float
    k: int
    x1: tuple[int, ...]
    x2: tuple[int, ...]
    index: tuple[tuple[int, ...], ...]
    units_a: tuple[NeuroRamLayout, ...]
    units_b: tuple[NeuroRamLayout, ...]
    lock: int
    cmp_any: tuple[int, ...]
    cmp_both: tuple[int, ...]
    out: int

    @property
    def read_round(self) -> int:
        return 5 * dimension(self.n) + 2

    def manifest(self) -> dict[str, int]:
        roles: dict[str, int] = {}
        for i, nid in enumerate(self.x1):
            roles[f"x1[{i}]"] = nid
        for i, nid in enumerate(self.x2):
            roles[f"x2[{i}]"] = nid
        roles["lock"] = self.lock
        for k in range(self.k):
            for j, nid in enumerate(self.index[k]):
                roles[f"idx{k}[{j}]"] = nid
            roles[f"cmp_any[{k}]"] = self.cmp_any[k]
            roles[f"cmp_both[{k}]"] = self.cmp_both[k]
            roles.update(self.units_a[k].manifest(prefix=f"a{k}."))
            roles.update(self.units_b[k].manifest(prefix=f"b{k}."))
        # Unit manifests list the shared data/index neurons under their own
        # prefixes too; drop those aliases in favor of the top-level names.
        for k in range(self.k):
            for pre, unit in ((f"a{k}.", self.units_a[k]), (f"b{k}.", self.units_b[k])):
                for i in range(len(unit.data)):
                    roles.pop(f"{pre}data[{i}]", None)
                for j in range(len(unit.addr)):
                    roles.pop(f"{pre}addr[{j}]", None)
        roles["out"] = self.out
        return roles


def sample_count(n: int, eps: float, c: float = 2.0) -> int:
    """Number of random probes, ceil(c * ln(n) / eps); misses all of eps*n
    differing positions with probability at most n**-c."""
    if not 0 < eps <= 1:
        raise InvalidParameterError(f"eps must be in (0, 1], got {eps}")
    if c < 1:
        raise InvalidParameterError(f"c must be >= 1, got {c}")
    if n < 2:
        raise InvalidParameterError(f"n must be >= 2, got {n}")
    return math.ceil(c * math.log(n) / eps)


def build_similarity(
    n: int,
    eps: float,
    c: float = 2.0,
    lam: Fraction | None = None,
) -> tuple[Network, SimilarityLayout]:
    """Compose K index-generator groups, 2K indexing units, lock, comparators, output."""
    dimension(n)
    if lam is None:
        lam = default_lambda(n)
    k_probes = sample_count(n, eps, c)
    log_n = n.bit_length() - 1

    b = NetworkBuilder(Fraction(lam))
    x1 = tuple(b.add_neuron(f"x1[{i}]", Kind.INPUT, Polarity.EXCITATORY, 0) for i in range(n))
    x2 = tuple(b.add_neuron(f"x2[{i}]", Kind.INPUT, Polarity.EXCITATORY, 0) for i in range(n))

    lock = b.add_neuron("lock", Kind.AUXILIARY, Polarity.INHIBITORY, 1)
    for x in x1 + x2:
        b.add_synapse(x, lock, 2)

    index: list[tuple[int, ...]] = []
    units_a: list[NeuroRamLayout] = []
    units_b: list[NeuroRamLayout] = []
    cmp_any: list[int] = []
    cmp_both: list[int] = []

    out = b.add_neuron("out", Kind.OUTPUT, Polarity.EXCITATORY, 1)

    for k in range(k_probes):
        group = tuple(
            b.add_neuron(f"idx{k}[{j}]", Kind.AUXILIARY, Polarity.EXCITATORY, 0)
            for j in range(log_n)
        )
        for y in group:
            b.add_synapse(y, y, 2)
            b.add_synapse(lock, y, -1)
        index.append(group)

        unit_a = graft_indexing_unit(
            b, x1, group, prefix=f"a{k}.", delayed_start=True, output_kind=Kind.AUXILIARY
        )
        unit_b = graft_indexing_unit(
            b, x2, group, prefix=f"b{k}.", delayed_start=True, output_kind=Kind.AUXILIARY
        )
        units_a.append(unit_a)
        units_b.append(unit_b)

        f_any = b.add_neuron(f"cmp_any[{k}]", Kind.AUXILIARY, Polarity.EXCITATORY, 1)
        f_both = b.add_neuron(f"cmp_both[{k}]", Kind.AUXILIARY, Polarity.INHIBITORY, 3)
        for pair_out in (unit_a.out, unit_b.out):
            b.add_synapse(pair_out, f_any, 2)
            b.add_synapse(pair_out, f_both, 2)
        b.add_synapse(f_any, out, 2)
        b.add_synapse(f_both, out, -2)
        cmp_any.append(f_any)
        cmp_both.append(f_both)

    layout = SimilarityLayout(
        n=n, eps=eps, c=c, k=k_probes, x1=x1, x2=x2,
        index=tuple(index), units_a=tuple(units_a), units_b=tuple(units_b),
        lock=lock, cmp_any=tuple(cmp_any), cmp_both=tuple(cmp_both), out=out,
    )
    return b.build(layout.manifest()), layout


def build_comparator_gadget(lam: Fraction = Fraction(1, 32)) -> tuple[Network, dict[str, int]]:
    """Just the pair comparator, with inputs standing in for the pair outputs."""
    b = NetworkBuilder(Fraction(lam))
    o1 = b.add_neuron("o1", Kind.INPUT, Polarity.EXCITATORY, 0)
    o2 = b.add_neuron("o2", Kind.INPUT, Polarity.EXCITATORY, 0)
    f_any = b.add_neuron("cmp_any", Kind.AUXILIARY, Polarity.EXCITATORY, 1)
    f_both = b.add_neuron("cmp_both", Kind.AUXILIARY, Polarity.INHIBITORY, 3)
    out = b.add_neuron("out", Kind.OUTPUT, Polarity.EXCITATORY, 1)
    for o in (o1, o2):
        b.add_synapse(o, f_any, 2)
        b.add_synapse(o, f_both, 2)
    b.add_synapse(f_any, out, 2)
    b.add_synapse(f_both, out, -2)
    net = b.build()
    ids = {"o1": o1, "o2": o2, "cmp_any": f_any, "cmp_both": f_both, "out": out}
    return net, ids


def clamps_for(layout: SimilarityLayout, x1: tuple[int, ...], x2: tuple[int, ...]) -> dict[int, int]:
    if len(x1) != layout.n or len(x2) != layout.n:
        raise InvalidParameterError(f"both patterns must have {layout.n} bits")
    clamps = {nid: bit for nid, bit in zip(layout.x1, x1)}
    clamps.update({nid: bit for nid, bit in zip(layout.x2, x2)})
    return clamps


def test_similarity(
    n: int,
    eps: float,
    x1: tuple[int, ...],
    x2: tuple[int, ...],
    seed: int,
    c: float = 2.0,
    lam: Fraction | None = None,
) -> int:
    """One run: 1 if the network flags the patterns as far apart, else 0."""
    net, layout = build_similarity(n, eps, c, lam)
    trace = run(net, clamps_for(layout, x1, x2), layout.read_round, seed)
    return trace.fired(layout.read_round, layout.out)


def similarity_positive_count(
    net: Network,
    layout: SimilarityLayout,
    x1: tuple[int, ...],
    x2: tuple[int, ...],
    trials: int,
    seed: int,
) -> int:
    """Trials (vectorized) in which the output fired at the read round."""
    states = trial_states(
        net, [(clamps_for(layout, x1, x2), layout.read_round + 1)], trials, seed, [layout.out]
    )
    return int(states[:, layout.read_round, 0].sum())


def locked_index_check(trace: Trace, layout: SimilarityLayout) -> str:
    """Each probe's index pattern must hold steady from round 2 to the read round."""
    if not trace.fired(1, layout.lock):
        return LOCK_INACTIVE
    last = min(layout.read_round, trace.rounds)
    for group in layout.index:
        for y in group:
            series = trace.series(y)[2 : last + 1]
            if len(set(series)) > 1:
                return LOCK_UNSTABLE
    return LOCK_OK


def locked_index_values(trace: Trace, layout: SimilarityLayout, at_round: int = 2) -> tuple[int, ...]:
    """The index each probe settled on, read at ``at_round``."""
    return tuple(
        dec(tuple(trace.fired(at_round, y) for y in group)) for group in layout.index
    )


def sampling_miss_count(
    n: int,
    probes: int,
    diff_positions: tuple[int, ...],
    draws: int,
    seed: int,
) -> int:
    """Monte-Carlo of the probe argument alone, no network.

    Counts draws in which none of ``probes`` uniform indices lands in
    ``diff_positions``.
    """
    if not diff_positions:
        raise InvalidParameterError("need at least one differing position")
    gen = np.random.default_rng([seed, 0x53414D50])
    diff = np.zeros(n, dtype=bool)
    diff[list(diff_positions)] = True
    idx = gen.integers(0, n, size=(draws, probes))
    hits = diff[idx].any(axis=1)
    return int((~hits).sum())


def miss_bound_chain(n: int, eps: float, c: float = 2.0) -> tuple[float, float]:
    """((1-eps)**K, n**-c); the first is at most the second by construction of K."""
    k = sample_count(n, eps, c)
    return (1.0 - eps) ** k, float(n) ** (-c)
