"""
Trellis Module

Builds the trellis of a systematic generator matrix from its minimal
shift-register realization. States are the register contents reachable from
the all-zero state, renumbered 0..2^nu-1 in ascending register order, so the
zero state is always state 0.

Termination uses a per-state policy: from every state the encoder follows the
shortest input sequence back to zero, then idles on input 0. The tail is
driven by the first source that can reach every state on its own; the
nu-step zeroing sequence of such a source is unique, so the tail is a linear
function of the state and the code stays linear including termination. Only
when no single source suffices are all input blocks used (lowest block first).
Because the policy depends only on the current state, the decoder can
restrict tail steps to exactly the branches the encoder uses.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from gf2core import GeneratorMatrix, ObserverRealization, validate_generator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Trellis:
    """
    Minimal-realization state machine of a systematic (N+M', N, nu) code.

    Attributes:
        N: Number of inputs (sources)
        M_prime: Number of parity outputs
        nu: Memory count; state_count == 2**nu
        next_state: (S, 2^N) next-state table
        parity: (S, 2^N, M') parity bits per branch
        systematic: (2^N, N) systematic bits per input block (bit i of the block)
        register_states: register bitmask of each state index
        incoming: (S, 2^N) flat branch indices (state * 2^N + input) entering
                  each state, sorted by predecessor state then input
        termination_input: (S,) input block the tail policy applies in each state
        termination_source: Source driving the tail, or -1 when all inputs are used
        tail_length: Number of termination steps appended to every codeword
    """
    N: int
    M_prime: int
    nu: int
    next_state: np.ndarray
    parity: np.ndarray
    systematic: np.ndarray
    register_states: Tuple[int, ...]
    incoming: np.ndarray
    termination_input: np.ndarray
    tail_length: int
    termination_source: int = -1

    @property
    def state_count(self) -> int:
        return self.next_state.shape[0]

    @property
    def input_count(self) -> int:
        return self.next_state.shape[1]

    @property
    def width(self) -> int:
        """Bits per trellis step (N systematic + M' parity)."""
        return self.N + self.M_prime

    def branch_outputs(self) -> np.ndarray:
        """(S * 2^N, N + M') output bits of every branch, flat-indexed."""
        S, U = self.state_count, self.input_count
        sys_bits = np.broadcast_to(self.systematic[None, :, :], (S, U, self.N))
        return np.concatenate([sys_bits, self.parity], axis=2).reshape(S * U, self.width)

    def tail_sequence(self, state: int) -> np.ndarray:
        """Input blocks (length tail_length) that drive `state` back to zero."""
        blocks = np.zeros(self.tail_length, dtype=np.int64)
        for t in range(self.tail_length):
            blocks[t] = self.termination_input[state]
            state = self.next_state[state, blocks[t]]
        return blocks


def build_trellis(g: GeneratorMatrix) -> Trellis:
    """
    Build the trellis simulated by the feedback shift-register realization.

    Args:
        g: Systematic generator matrix

    Returns:
        Trellis whose states are the reachable register contents
    """
    report = validate_generator(g)
    realization = ObserverRealization(g)
    N, M_prime = g.N, g.M_prime
    U = 1 << N

    # breadth-first discovery of reachable register contents
    reachable = {0}
    frontier = [0]
    while frontier:
        new_frontier = []
        for reg in frontier:
            for u in range(U):
                nxt, _ = realization.step(reg, u)
                if nxt not in reachable:
                    reachable.add(nxt)
                    new_frontier.append(nxt)
        frontier = new_frontier

    registers = tuple(sorted(reachable))
    index = {reg: i for i, reg in enumerate(registers)}
    S = len(registers)
    nu = S.bit_length() - 1
    if 1 << nu != S or nu != report.minimal_nu:
        raise RuntimeError(f"Reachable state count {S} does not match minimal nu={report.minimal_nu}")

    next_state = np.zeros((S, U), dtype=np.int64)
    parity = np.zeros((S, U, M_prime), dtype=np.uint8)
    for reg, s in index.items():
        for u in range(U):
            nxt, pbits = realization.step(reg, u)
            next_state[s, u] = index[nxt]
            parity[s, u] = [(pbits >> j) & 1 for j in range(M_prime)]

    systematic = np.array([[(u >> i) & 1 for i in range(N)] for u in range(U)], dtype=np.uint8)

    incoming_lists = [[] for _ in range(S)]
    for s in range(S):
        for u in range(U):
            incoming_lists[next_state[s, u]].append(s * U + u)
    in_degrees = {len(lst) for lst in incoming_lists}
    if in_degrees != {U}:
        raise RuntimeError(f"Irregular trellis: in-degrees {sorted(in_degrees)}")
    incoming = np.array(incoming_lists, dtype=np.int64)

    termination_input, tail_length, termination_source = _termination_policy(next_state, N)
    if termination_source < 0:
        logger.warning("%s: no single source reaches every state; termination is not linear",
                       g.label or "generator")

    logger.debug("Built trellis for %s: %d states, tail %d", g.label or "generator", S, tail_length)
    return Trellis(
        N=N,
        M_prime=M_prime,
        nu=nu,
        next_state=next_state,
        parity=parity,
        systematic=systematic,
        register_states=registers,
        incoming=incoming,
        termination_input=termination_input,
        tail_length=tail_length,
        termination_source=termination_source,
    )


def _shortest_paths_home(next_state: np.ndarray, inputs: Sequence[int]) -> Optional[Tuple[np.ndarray, int]]:
    """
    First input of the shortest path from every state back to state 0.

    Only the given input blocks are used, tried in the given order.

    Returns:
        Tuple of (policy, tail_length) with tail_length the largest distance,
        or None if some state cannot reach zero with these inputs
    """
    S = next_state.shape[0]
    distance = np.full(S, -1, dtype=np.int64)
    policy = np.zeros(S, dtype=np.int64)
    distance[0] = 0
    level = 0
    while (distance < 0).any():
        level += 1
        settled = []
        for s in np.flatnonzero(distance < 0):
            for u in inputs:
                if distance[next_state[s, u]] == level - 1:
                    settled.append((s, u))
                    break
        if not settled:
            return None
        for s, u in settled:
            distance[s] = level
            policy[s] = u
    return policy, int(distance.max())


def _termination_policy(next_state: np.ndarray, N: int) -> Tuple[np.ndarray, int, int]:
    """
    Termination policy, preferring a single driving source.

    Returns:
        Tuple of (policy, tail_length, source) where source is -1 when all
        input blocks were needed
    """
    for source in range(N):
        found = _shortest_paths_home(next_state, [0, 1 << source])
        if found is not None:
            return found[0], found[1], source
    found = _shortest_paths_home(next_state, range(next_state.shape[1]))
    if found is None:
        raise RuntimeError("Some trellis states cannot be driven back to zero")
    return found[0], found[1], -1
