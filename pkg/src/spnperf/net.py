"""Stochastic Petri net structure and firing semantics.

A net is a set of places holding integer tokens and a set of timed
transitions with exponentially distributed firing delays.  Arc weights are
kept as dense (place x transition) integer matrices: ``pre`` (tokens
consumed), ``post`` (tokens produced) and ``inh`` (inhibition thresholds,
0 meaning "no inhibitor arc").
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SINGLE_SERVER = "single_server"
INFINITE_SERVER = "infinite_server"
SERVER_SEMANTICS = (SINGLE_SERVER, INFINITE_SERVER)

#: A marking is a tuple of non-negative token counts, one per place.
Marking = tuple


class SpnError(Exception):
    """Base class for net-level errors."""


class DimensionError(SpnError):
    """Marking or matrix size does not match the net."""


class NotEnabledError(SpnError):
    """Attempt to fire or rate a transition that is not enabled."""


@dataclass(frozen=True)
class Place:
    name: str
    tokens: int = 0


@dataclass(frozen=True)
class Transition:
    name: str
    rate: float
    priority: int = 0
    semantics: str = SINGLE_SERVER


def _frozen_int_matrix(m, shape) -> np.ndarray:
    a = np.asarray(m, dtype=np.int64)
    if a.shape != shape:
        raise DimensionError(f"matrix shape {a.shape} != expected {shape}")
    a = a.copy()
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpnNet:
    """Immutable stochastic Petri net.

    ``pre``, ``post`` and ``inh`` are (n_places, n_transitions) integer
    matrices.  ``inh`` defaults to all zeros (no inhibitor arcs).
    """

    places: tuple[Place, ...]
    transitions: tuple[Transition, ...]
    pre: np.ndarray
    post: np.ndarray
    inh: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "places", tuple(self.places))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        shape = (len(self.places), len(self.transitions))
        object.__setattr__(self, "pre", _frozen_int_matrix(self.pre, shape))
        object.__setattr__(self, "post", _frozen_int_matrix(self.post, shape))
        inh = self.inh if self.inh is not None else np.zeros(shape, dtype=np.int64)
        object.__setattr__(self, "inh", _frozen_int_matrix(inh, shape))
        object.__setattr__(
            self, "_place_index", {p.name: i for i, p in enumerate(self.places)}
        )
        object.__setattr__(
            self, "_transition_index", {t.name: i for i, t in enumerate(self.transitions)}
        )

    @property
    def n_places(self) -> int:
        return len(self.places)

    @property
    def n_transitions(self) -> int:
        return len(self.transitions)

    def place_index(self, name: str) -> int:
        try:
            return self._place_index[name]
        except KeyError:
            raise KeyError(f"unknown place {name!r}") from None

    def transition_index(self, name: str) -> int:
        try:
            return self._transition_index[name]
        except KeyError:
            raise KeyError(f"unknown transition {name!r}") from None

    def initial_marking(self) -> Marking:
        return tuple(p.tokens for p in self.places)


def validate_net(net: SpnNet) -> list[str]:
    """Return the list of invariant violations (empty list means the net is ok)."""
    violations = []
    if net.n_places < 1:
        violations.append("net has no places")
    if net.n_transitions < 1:
        violations.append("net has no transitions")

    seen = set()
    for p in net.places:
        if p.name in seen:
            violations.append(f"duplicate name: place {p.name!r}")
        seen.add(p.name)
        if p.tokens < 0:
            violations.append(f"negative initial tokens on place {p.name!r}")
    seen = set()
    for t in net.transitions:
        if t.name in seen:
            violations.append(f"duplicate name: transition {t.name!r}")
        seen.add(t.name)
        if not (t.rate > 0.0 and math.isfinite(t.rate)):
            violations.append(f"non-positive rate on transition {t.name!r}: {t.rate}")
        if t.priority < 0:
            violations.append(f"negative priority on transition {t.name!r}")
        if t.semantics not in SERVER_SEMANTICS:
            violations.append(
                f"unknown server semantics on transition {t.name!r}: {t.semantics!r}"
            )
    for label, mat in (("pre", net.pre), ("post", net.post), ("inh", net.inh)):
        if (mat < 0).any():
            violations.append(f"negative entries in {label} matrix")
    return violations


def _check_marking(net: SpnNet, m: Marking) -> np.ndarray:
    arr = np.asarray(m, dtype=np.int64)
    if arr.shape != (net.n_places,):
        raise DimensionError(
            f"marking length {arr.shape} does not match {net.n_places} places"
        )
    return arr


def marking_enabled(net: SpnNet, m: Marking) -> np.ndarray:
    """Boolean mask of transitions enabled by token counts alone (no priority rule)."""
    arr = _check_marking(net, m)[:, None]
    has_tokens = (arr >= net.pre).all(axis=0)
    not_inhibited = ((net.inh == 0) | (arr < net.inh)).all(axis=0)
    return has_tokens & not_inhibited


def enabled_transitions(net: SpnNet, m: Marking) -> tuple[int, ...]:
    """Indices of enabled transitions.

    Among the marking-enabled transitions only those of maximal priority
    remain enabled (priority masking).
    """
    mask = marking_enabled(net, m)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return ()
    prio = np.array([net.transitions[i].priority for i in idx])
    return tuple(int(i) for i in idx[prio == prio.max()])


def fire(net: SpnNet, m: Marking, t: int) -> Marking:
    """Fire transition ``t`` in marking ``m`` and return the successor marking."""
    if t not in enabled_transitions(net, m):
        raise NotEnabledError(
            f"transition {net.transitions[t].name!r} is not enabled in {m}"
        )
    arr = _check_marking(net, m) - net.pre[:, t] + net.post[:, t]
    assert (arr >= 0).all(), "firing produced a negative token count"
    return tuple(int(x) for x in arr)


def enabling_degree(net: SpnNet, m: Marking, t: int) -> int:
    """Number of concurrent enablings of ``t`` in ``m`` (1 if ``t`` has no inputs)."""
    arr = _check_marking(net, m)
    inputs = np.flatnonzero(net.pre[:, t] > 0)
    if inputs.size == 0:
        return 1
    return int((arr[inputs] // net.pre[inputs, t]).min())


def rate_at(net: SpnNet, m: Marking, t: int) -> float:
    """Effective firing rate of ``t`` in ``m``.

    Single-server transitions fire at their base rate; infinite-server
    transitions scale the base rate by the enabling degree.
    """
    if t not in enabled_transitions(net, m):
        raise NotEnabledError(
            f"transition {net.transitions[t].name!r} is not enabled in {m}"
        )
    tr = net.transitions[t]
    if tr.semantics == INFINITE_SERVER:
        return tr.rate * enabling_degree(net, m, t)
    return tr.rate
