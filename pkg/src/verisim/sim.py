"""Discrete-event simulation of proof-of-work mining with block verification.

Each miner finds blocks after exponential waits with rate alpha / t_b.  Found
blocks are delivered to every other node immediately (propagation delay is out
of scope).  A verifying node re-executes every received block whose parent
state it holds, once, and cannot mine meanwhile: its pending find is pushed
back by the verification duration.  Blocks extending known-invalid ancestry
cannot be executed and are rejected for free.  Non-verifiers adopt longer
chains instantly and pay nothing.  At the end the canonical chain is the
longest chain of entirely valid ancestry; only its blocks earn rewards.
"""

import heapq
from dataclasses import dataclass, field

import numpy as np

from verisim.blocks import Block, TxStream, _block_from_stream, make_genesis, summary_stats
from verisim.config import MinerConfig, ScenarioConfig
from verisim.workload import FittedWorkload

BLOCK_REWARD_ETHER = 2.0


@dataclass
class ChainView:
    """One node's view: every known block plus its current head."""

    head: Block
    known: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.head.id not in self.known:
            self.known[self.head.id] = self.head


def fork_choice(view: ChainView, node: MinerConfig, candidate: Block) -> bool:
    """Apply a candidate block to a node's view; returns True when adopted.

    Verifying nodes reject any candidate with an invalid block in its
    ancestry; non-verifying nodes ignore validity.  A candidate replaces the
    head only when strictly longer: ties keep the incumbent.
    """
    if candidate.parent is not None and candidate.parent.id not in view.known:
        raise ValueError(f"candidate {candidate.id} extends an unknown parent")
    view.known[candidate.id] = candidate
    if node.verifies and not candidate.valid_ancestry:
        return False
    if candidate.height > view.head.height:
        view.head = candidate
        return True
    return False


@dataclass(frozen=True)
class MinerOutcome:
    id: str
    alpha: float
    verifies: bool
    produces_invalid: bool
    found_blocks: int
    canonical_blocks: int
    fee_sum: float
    fee_fraction: float
    reward_fraction: float
    relative_gain_pct: float
    # uptime-weighted hash share: the expected block share given the realized
    # verification pauses (a low-variance estimator of the same quantity the
    # fee fraction realizes)
    expected_fraction: float
    expected_gain_pct: float


@dataclass(frozen=True)
class SimResult:
    seed: int
    block_limit: int
    mode: str
    duration: float
    miners: tuple
    total_blocks: int
    canonical_length: int
    stale_blocks: int
    rejected_blocks: int
    total_fees: float
    verification_time_stats: dict

    def miner(self, miner_id: str) -> MinerOutcome:
        for m in self.miners:
            if m.id == miner_id:
                return m
        raise KeyError(miner_id)


class _NodeState:
    __slots__ = ("cfg", "index", "view", "busy_until", "busy_in_window", "next_find", "token", "rate")

    def __init__(self, cfg: MinerConfig, index: int, genesis: Block, known: dict, t_b: float):
        self.cfg = cfg
        self.index = index
        self.view = ChainView(head=genesis, known=known)
        self.busy_until = 0.0
        self.busy_in_window = 0.0
        self.next_find = 0.0
        self.token = 0
        self.rate = cfg.alpha / t_b


def run_simulation(config: ScenarioConfig, workload: FittedWorkload | None = None) -> SimResult:
    """One deterministic simulation run at config.base_seed."""
    config.validate()
    if workload is None:
        if config.workload is None:
            raise ValueError("no workload: set config.workload to a fitted-model file")
        workload = FittedWorkload.load(config.workload)

    root = np.random.SeedSequence(config.base_seed)
    mine_ss, tx_ss = root.spawn(2)
    rng_mine = np.random.default_rng(mine_ss)
    stream = TxStream(workload, config.c, np.random.default_rng(tx_ss), config.block_limit)

    genesis = make_genesis()
    known = {genesis.id: genesis}
    nodes = [_NodeState(m, i, genesis, known, config.t_b) for i, m in enumerate(config.miners)]
    # every parallel cost needed later must be cached before txs are dropped
    verifier_ps = sorted({config.processors_for(n.cfg) for n in nodes if n.cfg.verifies} | {config.p})

    heap = []
    for node in nodes:
        node.next_find = rng_mine.exponential(1.0 / node.rate)
        heapq.heappush(heap, (node.next_find, node.index, node.token))

    blocks = []
    next_id = 1
    while heap:
        t, idx, token = heapq.heappop(heap)
        if t > config.sim_duration:
            break
        node = nodes[idx]
        if token != node.token:
            continue  # stale event: the find was deferred

        block = _block_from_stream(stream, next_id, node.view.head, node.cfg, t)
        next_id += 1
        blocks.append(block)
        if config.mode == "parallel":
            for p in verifier_ps:
                block.parallel_verification_time(p)
        block.drop_txs()

        # the producer adopts its own block without re-executing it
        fork_choice(node.view, node.cfg, block)
        node.next_find = t + rng_mine.exponential(1.0 / node.rate)
        heapq.heappush(heap, (node.next_find, node.index, node.token))

        # re-execution requires the parent's post-state: blocks extending
        # known-invalid ancestry are rejected without cost, while invalid
        # blocks on valid parents cost full verification before rejection
        executable = block.parent.valid_ancestry

        for other in nodes:
            if other.index == idx:
                continue
            if other.cfg.verifies and executable:
                if config.mode == "parallel":
                    cost = block.parallel_verification_time(config.processors_for(other.cfg))
                else:
                    cost = block.seq_verification_time
                start = max(t, other.busy_until)
                other.busy_until = start + cost
                if start < config.sim_duration:
                    other.busy_in_window += min(start + cost, config.sim_duration) - start
                if cost > 0.0:
                    # mining is suspended while verifying: push the pending find back
                    other.token += 1
                    other.next_find += cost
                    heapq.heappush(heap, (other.next_find, other.index, other.token))
            fork_choice(other.view, other.cfg, block)

    uptime = {n.cfg.id: config.sim_duration - n.busy_in_window for n in nodes}
    return _finalize(config, blocks, uptime)


def _finalize(config: ScenarioConfig, blocks: list, uptime: dict) -> SimResult:
    best = None
    for b in blocks:
        if b.valid_ancestry and (best is None or b.height > best.height):
            best = b  # ties keep the earlier block: strict inequality

    canonical_ids = set()
    cursor = best
    while cursor is not None and cursor.height > 0:
        canonical_ids.add(cursor.id)
        cursor = cursor.parent

    found = {m.id: 0 for m in config.miners}
    canon = {m.id: 0 for m in config.miners}
    fees = {m.id: 0.0 for m in config.miners}
    stale = rejected = 0
    for b in blocks:
        found[b.miner_id] += 1
        if b.id in canonical_ids:
            canon[b.miner_id] += 1
            fees[b.miner_id] += b.total_fee
        elif b.valid_ancestry:
            stale += 1
        else:
            rejected += 1

    total_fees = sum(fees.values())
    canonical_length = len(canonical_ids)
    total_reward = total_fees + BLOCK_REWARD_ETHER * canonical_length

    exposure = {m.id: m.alpha * uptime[m.id] for m in config.miners}
    total_exposure = sum(exposure.values())

    miners = []
    for m in config.miners:
        fee_fraction = fees[m.id] / total_fees if total_fees > 0 else 0.0
        reward = fees[m.id] + BLOCK_REWARD_ETHER * canon[m.id]
        reward_fraction = reward / total_reward if total_reward > 0 else 0.0
        expected = exposure[m.id] / total_exposure if total_exposure > 0 else 0.0
        miners.append(
            MinerOutcome(
                id=m.id,
                alpha=m.alpha,
                verifies=m.verifies,
                produces_invalid=m.produces_invalid,
                found_blocks=found[m.id],
                canonical_blocks=canon[m.id],
                fee_sum=fees[m.id],
                fee_fraction=fee_fraction,
                reward_fraction=reward_fraction,
                relative_gain_pct=100.0 * (fee_fraction - m.alpha) / m.alpha,
                expected_fraction=expected,
                expected_gain_pct=100.0 * (expected - m.alpha) / m.alpha,
            )
        )

    if config.mode == "parallel":
        tv = [b.parallel_verification_time(config.p) for b in blocks]
    else:
        tv = [b.seq_verification_time for b in blocks]

    assert stale + rejected + canonical_length == len(blocks)
    return SimResult(
        seed=config.base_seed,
        block_limit=config.block_limit,
        mode=config.mode,
        duration=config.sim_duration,
        miners=tuple(miners),
        total_blocks=len(blocks),
        canonical_length=canonical_length,
        stale_blocks=stale,
        rejected_blocks=rejected,
        total_fees=total_fees,
        verification_time_stats=summary_stats(np.asarray(tv)),
    )
