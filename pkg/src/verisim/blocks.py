"""Block construction under a gas limit and verification-time accounting.

Blocks are filled greedily from a stream of sampled transactions: packing
stops at the first transaction that would exceed the remaining gas (that
transaction is discarded).  Sequential verification costs the sum of the
transactions' CPU times; parallel verification schedules non-conflicting
transactions across p processors (longest first, earliest-free processor)
and runs conflicting ones sequentially afterwards.
"""

from dataclasses import dataclass, field

import numpy as np

from verisim import kernels
from verisim.config import MinerConfig
from verisim.workload import MIN_TX_GAS, FittedWorkload, sample_transaction_arrays


@dataclass
class Block:
    id: int
    height: int
    parent: "Block | None"
    miner_id: str | None
    timestamp: float
    valid: bool
    valid_ancestry: bool
    tx_count: int = 0
    gas_used_total: int = 0
    total_fee: float = 0.0
    seq_verification_time: float = 0.0
    # full per-transaction columns; kept by the public builder, dropped by the
    # simulator once the scalar costs are known
    txs: dict | None = field(default=None, repr=False)
    _par_cache: dict = field(default_factory=dict, repr=False)

    def parallel_verification_time(self, p: int) -> float:
        if p == 1:
            return self.seq_verification_time
        if p not in self._par_cache:
            if self.txs is None:
                raise ValueError("transaction columns were dropped; cache the cost at build time")
            cpu = self.txs["cpu_time"]
            conflicting = self.txs["conflicting"]
            self._par_cache[p] = _parallel_time(cpu, conflicting, p)
        return self._par_cache[p]

    def drop_txs(self):
        """Release the per-transaction columns once scalar costs are cached."""
        self.txs = None


def _parallel_time(cpu: np.ndarray, conflicting: np.ndarray, p: int) -> float:
    makespan = kernels.lpt_makespan(cpu[~conflicting], p)
    return float(makespan + cpu[conflicting].sum())


def verification_time(block: Block, mode: str = "sequential", p: int = 1) -> float:
    """CPU seconds a verifier spends re-executing the block's transactions."""
    if p < 1:
        raise ValueError("processor count must be >= 1")
    if mode == "sequential":
        return block.seq_verification_time
    if mode == "parallel":
        return block.parallel_verification_time(p)
    raise ValueError(f"unknown mode {mode!r}")


def make_genesis() -> Block:
    return Block(id=0, height=0, parent=None, miner_id=None, timestamp=0.0, valid=True, valid_ancestry=True)


class TxStream:
    """Chunked transaction sampler feeding greedy block packing.

    Equivalent to sampling transactions freshly per block (the stream is iid),
    but amortises the draws; cumulative sums make per-block packing a single
    binary search.
    """

    def __init__(
        self,
        workload: FittedWorkload,
        conflict_rate: float,
        rng: np.random.Generator,
        block_limit: int | None = None,
        chunk: int = 1 << 16,
    ):
        self._wl = workload
        self._c = conflict_rate
        self._rng = rng
        self._limit = workload.block_limit if block_limit is None else int(block_limit)
        if self._limit < MIN_TX_GAS:
            raise ValueError("block limit below the minimum transaction gas")
        # packing can never consume more transactions than this per block
        self._max_block_txs = self._limit // MIN_TX_GAS + 2
        self._chunk = max(chunk, 4 * self._max_block_txs)
        self._cols = None
        self._cursor = 0

    @property
    def block_limit(self) -> int:
        return self._limit

    def _refill(self):
        fresh = sample_transaction_arrays(self._wl, self._chunk, self._c, self._rng, self._limit)
        if self._cols is not None and self._cursor < self._cols["used_gas"].size:
            cols = {k: np.concatenate([self._cols[k][self._cursor :], fresh[k]]) for k in fresh}
        else:
            cols = fresh
        self._cursor = 0
        self._cols = cols
        self._gas_csum = np.cumsum(cols["used_gas"])
        self._fee_csum = np.cumsum(cols["used_gas"] * cols["gas_price"])
        self._cpu_csum = np.cumsum(cols["cpu_time"])

    def next_block_txs(self):
        """Columns of the next greedily packed block (may be empty)."""
        if self._cols is None or self._cols["used_gas"].size - self._cursor < self._max_block_txs:
            self._refill()
        base = self._gas_csum[self._cursor - 1] if self._cursor > 0 else 0
        end = int(np.searchsorted(self._gas_csum, base + self._limit, side="right"))
        start = self._cursor
        # skip the first overflowing transaction: packing stops there
        self._cursor = end + 1
        gas = int((self._gas_csum[end - 1] - base) if end > start else 0)
        fee_base = self._fee_csum[start - 1] if start > 0 else 0.0
        cpu_base = self._cpu_csum[start - 1] if start > 0 else 0.0
        return {
            "slice": {k: v[start:end] for k, v in self._cols.items()},
            "tx_count": end - start,
            "gas_used_total": gas,
            "total_fee": float(self._fee_csum[end - 1] - fee_base) if end > start else 0.0,
            "seq_time": float(self._cpu_csum[end - 1] - cpu_base) if end > start else 0.0,
        }


def _block_from_stream(
    stream: TxStream,
    block_id: int,
    parent: Block,
    miner: MinerConfig,
    timestamp: float,
) -> Block:
    packed = stream.next_block_txs()
    valid = not miner.produces_invalid
    return Block(
        id=block_id,
        height=parent.height + 1,
        parent=parent,
        miner_id=miner.id,
        timestamp=timestamp,
        valid=valid,
        valid_ancestry=valid and parent.valid_ancestry,
        tx_count=packed["tx_count"],
        gas_used_total=packed["gas_used_total"],
        total_fee=packed["total_fee"],
        seq_verification_time=packed["seq_time"],
        txs=packed["slice"],
    )


def build_block(miner: MinerConfig, workload: FittedWorkload, block_limit: int, rng_seed: int) -> Block:
    """Build one block for a miner: sample transactions, pack to the gas limit."""
    if block_limit < MIN_TX_GAS:
        raise ValueError("block limit below the minimum transaction gas")
    stream = TxStream(workload, 0.0, np.random.default_rng(rng_seed), block_limit)
    return _block_from_stream(stream, 1, make_genesis(), miner, 0.0)


def measure_verification_times(
    workload: FittedWorkload,
    block_limit: int,
    n_blocks: int,
    seed: int = 0,
    mode: str = "sequential",
    p: int = 1,
    conflict_rate: float = 0.0,
) -> np.ndarray:
    """Verification times of n freshly built blocks (the per-limit statistics source)."""
    stream = TxStream(workload, conflict_rate, np.random.default_rng(seed), block_limit)
    times = np.empty(n_blocks)
    for i in range(n_blocks):
        packed = stream.next_block_txs()
        if mode == "sequential":
            times[i] = packed["seq_time"]
        else:
            times[i] = _parallel_time(packed["slice"]["cpu_time"], packed["slice"]["conflicting"], p)
    return times


def summary_stats(values: np.ndarray) -> dict:
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return {"mean": 0.0, "min": 0.0, "max": 0.0, "median": 0.0, "sd": 0.0}
    return {
        "mean": float(values.mean()),
        "min": float(values.min()),
        "max": float(values.max()),
        "median": float(np.median(values)),
        "sd": float(values.std(ddof=1)) if values.size > 1 else 0.0,
    }
