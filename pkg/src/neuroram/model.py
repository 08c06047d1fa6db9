"""Network data model.

A network is an immutable weighted directed graph of stochastic threshold
units.  Weights and biases are arbitrary-precision integers: the indexing
construction uses powers of two up to ``2**(sqrt(n)+2)``, which overflows
64-bit words for n > 1024, and exact integer potentials are what make the
simulator's probabilities reproducible.  The temperature is a positive
rational; it is the only place floating point enters the dynamics.

Structural rules (checked by :func:`validate`):

* input neurons have in-degree zero,
* every neuron is excitatory (outgoing weights >= 0) or inhibitory
  (outgoing weights <= 0); inputs and outputs are excitatory,
* biases are non-negative integers,
* at most one synapse per ordered pair, and no zero-weight synapses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import InvalidParameterError


class Kind(str, Enum):
    INPUT = "input"
    OUTPUT = "output"
    AUXILIARY = "auxiliary"


class Polarity(str, Enum):
    EXCITATORY = "excitatory"
    INHIBITORY = "inhibitory"


@dataclass(frozen=True)
class Neuron:
    id: int
    name: str
    kind: Kind
    polarity: Polarity
    bias: int


@dataclass(frozen=True)
class Synapse:
    pre: int
    post: int
    weight: int


@dataclass(frozen=True)
class Violation:
    """One structural rule breach; data, not an exception."""

    rule: str
    subject: str
    detail: str

    def __str__(self) -> str:
        return f"{self.rule}: {self.subject}: {self.detail}"


class Network:
    """Immutable network; safe to share across threads and cache.

    ``incoming[v]`` lists ``(pre, weight)`` pairs, which is the access
    pattern of the dynamics.  ``manifest`` maps role names to neuron ids
    when the network came from a builder.
    """

    __slots__ = ("lam", "neurons", "synapses", "manifest", "incoming",
                 "input_ids", "output_ids")

    def __init__(
        self,
        lam: Fraction,
        neurons: Iterable[Neuron],
        synapses: Iterable[Synapse],
        manifest: Mapping[str, int] | None = None,
    ):
        lam = Fraction(lam)
        if lam <= 0:
            raise InvalidParameterError(f"temperature must be positive, got {lam}")
        self.lam = lam
        self.neurons = tuple(neurons)
        if [u.id for u in self.neurons] != list(range(len(self.neurons))):
            raise InvalidParameterError("neuron ids must be dense 0..N-1 in order")
        self.synapses = tuple(synapses)
        self.manifest = dict(manifest) if manifest is not None else None

        incoming: list[list[tuple[int, int]]] = [[] for _ in self.neurons]
        for s in self.synapses:
            if not (0 <= s.pre < len(self.neurons) and 0 <= s.post < len(self.neurons)):
                raise InvalidParameterError(f"synapse {s.pre}->{s.post} out of range")
            incoming[s.post].append((s.pre, s.weight))
        self.incoming = tuple(tuple(lst) for lst in incoming)
        self.input_ids = tuple(u.id for u in self.neurons if u.kind is Kind.INPUT)
        self.output_ids = tuple(u.id for u in self.neurons if u.kind is Kind.OUTPUT)

    def __len__(self) -> int:
        return len(self.neurons)

    def is_input(self, u: int) -> bool:
        return self.neurons[u].kind is Kind.INPUT

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.lam == other.lam
            and self.neurons == other.neurons
            and sorted(self.synapses, key=lambda s: (s.pre, s.post)) ==
                sorted(other.synapses, key=lambda s: (s.pre, s.post))
            and self.manifest == other.manifest
        )

    def __repr__(self) -> str:
        return (f"Network(N={len(self.neurons)}, synapses={len(self.synapses)}, "
                f"lam={self.lam})")


@dataclass
class NetworkBuilder:
    """Accumulates neurons and synapses, then freezes into a Network."""

    lam: Fraction
    _neurons: list[Neuron] = field(default_factory=list)
    _synapses: list[Synapse] = field(default_factory=list)
    _pairs: set[tuple[int, int]] = field(default_factory=set)

    def add_neuron(self, name: str, kind: Kind, polarity: Polarity, bias: int) -> int:
        nid = len(self._neurons)
        self._neurons.append(Neuron(nid, name, kind, polarity, int(bias)))
        return nid

    def add_synapse(self, pre: int, post: int, weight: int) -> None:
        weight = int(weight)
        if weight == 0:
            return
        if (pre, post) in self._pairs:
            raise InvalidParameterError(f"duplicate synapse {pre}->{post}")
        self._pairs.add((pre, post))
        self._synapses.append(Synapse(pre, post, weight))

    def name_of(self, nid: int) -> str:
        return self._neurons[nid].name

    def build(self, manifest: Mapping[str, int] | None = None) -> Network:
        if manifest is None:
            manifest = {u.name: u.id for u in self._neurons}
        return Network(self.lam, self._neurons, self._synapses, manifest)


def validate(net: Network) -> list[Violation]:
    """Check every structural invariant; an empty list means the network is well formed."""
    out: list[Violation] = []
    polarity = {u.id: u.polarity for u in net.neurons}

    for u in net.neurons:
        if u.bias < 0:
            out.append(Violation("bias-sign", u.name, f"bias {u.bias} < 0"))
        if u.kind in (Kind.INPUT, Kind.OUTPUT) and u.polarity is not Polarity.EXCITATORY:
            out.append(Violation("io-polarity", u.name,
                                 f"{u.kind.value} neuron must be excitatory"))

    seen: dict[tuple[int, int], int] = {}
    for s in net.synapses:
        pre = net.neurons[s.pre]
        post = net.neurons[s.post]
        if s.weight == 0:
            out.append(Violation("zero-weight", f"{pre.name}->{post.name}",
                                 "weight 0 encodes an absent synapse"))
        if post.kind is Kind.INPUT:
            out.append(Violation("input-in-degree", f"{pre.name}->{post.name}",
                                 "input neurons take no incoming synapses"))
        if polarity[s.pre] is Polarity.EXCITATORY and s.weight < 0:
            out.append(Violation("polarity-sign", f"{pre.name}->{post.name}",
                                 f"excitatory source with weight {s.weight}"))
        if polarity[s.pre] is Polarity.INHIBITORY and s.weight > 0:
            out.append(Violation("polarity-sign", f"{pre.name}->{post.name}",
                                 f"inhibitory source with weight {s.weight}"))
        key = (s.pre, s.post)
        if key in seen:
            out.append(Violation("duplicate-synapse", f"{pre.name}->{post.name}",
                                 "more than one synapse for an ordered pair"))
        seen[key] = s.weight

    if net.manifest is not None:
        covered = set(net.manifest.values())
        for u in net.neurons:
            if u.id not in covered:
                out.append(Violation("manifest-coverage", u.name,
                                     "neuron missing from manifest"))
    return out
