"""Exact synchronous stochastic dynamics.

A network evolves in discrete rounds as a Markov chain.  The potential of a
non-input neuron in round t is the integer

    pot(u, t) = sum over synapses (v -> u) of w(v, u) * [v fired in t-1] - bias(u)

and u fires in round t with probability sigmoid(pot / lambda).  Potentials
are exact integers; only the sigmoid itself is evaluated in floating point,
with saturation clamping once |pot / lambda| exceeds 40 (error below 5e-18).

A neuron whose potential is exactly 0 fires with probability exactly 1/2,
and with lambda = 1/(c*log2(n)) a unit margin |pot| >= 1 drives the firing
probability within n**(-c*log2(e)) of 0 or 1 — the "with high probability"
regime the network constructions are designed around.

Clamped inputs copy their clamp bit each round.  Unclamped neurons,
including unclamped inputs, fire by the stochastic rule (an isolated
bias-0 neuron is a fair coin; the similarity network uses exactly this as
its randomness source).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from . import rng
from .errors import InvalidParameterError
from .model import Kind, Network

# x = pot/lambda beyond which the sigmoid is clamped to 0 or 1.
SATURATION = 40

ClampSpec = Mapping[int, int]


@dataclass(frozen=True)
class RoundState:
    """Firing pattern of every neuron for one round."""

    fired: tuple[int, ...]
    round: int


@dataclass(frozen=True)
class Trace:
    """States for rounds 0..T of one simulation."""

    states: tuple[RoundState, ...]

    @property
    def rounds(self) -> int:
        return len(self.states) - 1

    def state(self, t: int) -> RoundState:
        return self.states[t]

    def fired(self, t: int, u: int) -> int:
        return self.states[t].fired[u]

    def series(self, u: int) -> tuple[int, ...]:
        """Firing bit of neuron u across all rounds."""
        return tuple(s.fired[u] for s in self.states)

    def fire_rounds(self, u: int) -> tuple[int, ...]:
        return tuple(t for t, s in enumerate(self.states) if s.fired[u])


def default_lambda(n: int) -> Fraction:
    """Temperature 1/(4*log2 n): unit margins misfire with probability < n**-5."""
    k = n.bit_length() - 1
    if n <= 1 or (1 << k) != n:
        raise InvalidParameterError(f"n must be a power of two > 1, got {n}")
    return Fraction(1, 4 * k)


def potential(net: Network, prev: RoundState, u: int) -> int:
    """Exact membrane potential of u computed from the previous round's firing."""
    if net.is_input(u):
        raise InvalidParameterError(f"neuron {u} is an input; inputs have no potential")
    fired = prev.fired
    pot = -net.neurons[u].bias
    for pre, w in net.incoming[u]:
        if fired[pre]:
            pot += w
    return pot


def firing_probability(pot: int, lam: Fraction) -> float:
    """sigmoid(pot / lambda), clamped to exactly 0.0 / 1.0 past the saturation margin."""
    lam = Fraction(lam)
    if lam <= 0:
        raise InvalidParameterError(f"temperature must be positive, got {lam}")
    x = Fraction(pot) / lam
    if x > SATURATION:
        return 1.0
    if x < -SATURATION:
        return 0.0
    return 1.0 / (1.0 + math.exp(-float(x)))


def _check_clamps(net: Network, clamps: ClampSpec) -> None:
    for u, bit in clamps.items():
        if not net.is_input(u):
            raise InvalidParameterError(f"only input neurons may be clamped, got {u}")
        if bit not in (0, 1):
            raise InvalidParameterError(f"clamp bit for {u} must be 0 or 1, got {bit!r}")


def initial_state(net: Network, clamps: ClampSpec) -> RoundState:
    """Round 0: non-input neurons silent, clamped inputs at their bits."""
    _check_clamps(net, clamps)
    bits = [0] * len(net)
    for u, bit in clamps.items():
        bits[u] = bit
    return RoundState(tuple(bits), 0)


def step(net: Network, prev: RoundState, clamps: ClampSpec, seed: int) -> RoundState:
    """Advance one round.

    The draw for neuron u in round t is addressed by (seed, t, u), so the
    result depends only on the previous state, never on how it was reached,
    and repeated calls are bit-identical.
    """
    _check_clamps(net, clamps)
    t = prev.round + 1
    fired = prev.fired
    lam = net.lam
    # Saturation thresholds as exact integers: pot >= hi certainly fires,
    # pot <= -hi certainly does not (given the clamping rule).
    hi = SATURATION * lam
    bits = [0] * len(net)
    for u in net.neurons:
        uid = u.id
        if u.kind is Kind.INPUT:
            if uid in clamps:
                bits[uid] = clamps[uid]
                continue
            pot = -u.bias
        else:
            pot = -u.bias
            for pre, w in net.incoming[uid]:
                if fired[pre]:
                    pot += w
        if pot > hi:
            bits[uid] = 1
            continue
        if pot < -hi:
            continue
        p = 1.0 / (1.0 + math.exp(-float(Fraction(pot) / lam)))
        if rng.unit(seed, t, uid) < p:
            bits[uid] = 1
    return RoundState(tuple(bits), t)


def run(net: Network, clamps: ClampSpec, rounds: int, seed: int) -> Trace:
    """Simulate rounds 0..rounds under a fixed clamp; pure in (net, clamps, rounds, seed)."""
    if rounds < 0:
        raise InvalidParameterError(f"rounds must be >= 0, got {rounds}")
    state = initial_state(net, clamps)
    states = [state]
    for _ in range(rounds):
        state = step(net, state, clamps, seed)
        states.append(state)
    return Trace(tuple(states))


def run_schedule(
    net: Network,
    schedule: Sequence[tuple[ClampSpec, int]],
    seed: int,
) -> Trace:
    """Simulate with piecewise-constant clamps.

    ``schedule`` is a sequence of (clamps, duration) windows; durations are
    in rounds and must be positive.  Round 0 belongs to the first window, so
    the total number of simulated rounds is sum(durations) - 1.
    """
    if not schedule:
        raise InvalidParameterError("schedule must contain at least one window")
    per_round: list[ClampSpec] = []
    for clamps, duration in schedule:
        if duration <= 0:
            raise InvalidParameterError(f"window duration must be positive, got {duration}")
        per_round.extend([clamps] * duration)
    state = initial_state(net, per_round[0])
    states = [state]
    for t in range(1, len(per_round)):
        state = step(net, state, per_round[t], seed)
        states.append(state)
    return Trace(tuple(states))
