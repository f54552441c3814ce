"""Reachable state-space enumeration and the embedded CTMC.

Breadth-first exploration from the initial marking with first-seen state
numbering, so identical nets always yield identical state orderings.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .net import (
    Marking,
    SpnNet,
    SpnError,
    enabled_transitions,
    fire,
    rate_at,
    validate_net,
)

DEFAULT_MAX_STATES = 1_000_000


class InvalidNetError(SpnError):
    """Exploration was asked to run on a net that fails validation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid net: " + "; ".join(self.violations))


class StateExplosionError(SpnError):
    """State count exceeded the exploration bound."""

    def __init__(self, limit):
        self.limit = limit
        super().__init__(f"state space exceeds max_states={limit}")


@dataclass(frozen=True, eq=False)
class Ctmc:
    """Reachability graph with rate-labeled edges.

    ``states[0]`` is the initial marking.  Edges are
    ``(source, target, rate, transition_index)`` tuples; parallel edges
    from distinct transitions are kept distinct.
    """

    net: SpnNet
    states: tuple[Marking, ...]
    edges: tuple[tuple[int, int, float, int], ...]
    deadlock_states: frozenset[int]

    @property
    def n_states(self) -> int:
        return len(self.states)

    def state_index(self, m: Marking) -> int:
        return self._index[tuple(m)]

    def __post_init__(self):
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})

    def state_array(self) -> np.ndarray:
        """States as an (n_states, n_places) integer array."""
        return np.array(self.states, dtype=np.int64)


def explore(net: SpnNet, max_states: int = DEFAULT_MAX_STATES) -> Ctmc:
    """Enumerate all markings reachable from the initial marking.

    Raises ``InvalidNetError`` for nets failing validation and
    ``StateExplosionError`` once more than ``max_states`` distinct markings
    have been found.  Deadlock markings are recorded, not rejected.
    """
    violations = validate_net(net)
    if violations:
        raise InvalidNetError(violations)

    init = net.initial_marking()
    index = {init: 0}
    states = [init]
    edges = []
    deadlocks = set()
    queue = deque([0])

    while queue:
        s = queue.popleft()
        m = states[s]
        enabled = enabled_transitions(net, m)
        if not enabled:
            deadlocks.add(s)
            continue
        for t in enabled:
            succ = fire(net, m, t)
            j = index.get(succ)
            if j is None:
                if len(states) >= max_states:
                    raise StateExplosionError(max_states)
                j = len(states)
                index[succ] = j
                states.append(succ)
                queue.append(j)
            edges.append((s, j, rate_at(net, m, t), t))

    return Ctmc(
        net=net,
        states=tuple(states),
        edges=tuple(edges),
        deadlock_states=frozenset(deadlocks),
    )


def check_place_invariant(ctmc: Ctmc, weights, expected: int):
    """Check a conservation law over all reachable states.

    Returns ``None`` when every state ``s`` satisfies
    ``sum_p weights[p] * s[p] == expected``, otherwise the first violating
    marking in state order.
    """
    w = np.asarray(weights, dtype=np.int64)
    if w.shape != (ctmc.net.n_places,):
        raise ValueError(
            f"weight vector length {w.shape} does not match {ctmc.net.n_places} places"
        )
    sums = ctmc.state_array() @ w
    bad = np.flatnonzero(sums != expected)
    if bad.size:
        return ctmc.states[int(bad[0])]
    return None
