"""Substitution-channel simulation plus capacity, cost, and rate models.

All randomness flows through numpy's seeded PCG64 generator so that any
corrupted sequence or Monte Carlo table is bit-reproducible from the
seed recorded in its report.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import partial

import numpy as np

from .chunks import (
    ChunkRecord,
    DEFAULT_CHUNK_BASES,
    FileDescriptor,
    encode_file,
    mu_for_segments,
)
from .codebook import CODEWORD_LENGTH, ByteCodebook
from .mldecode import DecodeError, decode_file
from .ternary import parse_dna
from .transcode import codes_to_dna, dna_codes

MODE_COUNT = "count"
MODE_RATE = "rate"

DEFAULT_BASES_PER_GRAM = 1.82e21
DEFAULT_OVERHEAD_BYTES = 22
DEFAULT_COST_PER_BASE_USD = 0.05
MEGABYTE = 1_000_000
HEADER_FIXED_BASES = 3  # two file-id bases plus the parity base


@dataclass(frozen=True)
class ChannelSpec:
    """Substitution channel configuration.

    ``count`` mode flips exactly that many distinct bases in every
    11-base codeword window of a payload; ``rate`` mode flips each base
    independently with the given probability (and, when applied to
    whole records, also reaches the unprotected headers). A substituted
    base is always replaced by a different one.
    """

    mode: str
    count: int = 0
    rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (MODE_COUNT, MODE_RATE):
            raise ValueError(f"unknown channel mode {self.mode!r}")
        if self.count < 0:
            raise ValueError("substitution count must be >= 0")
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError("substitution rate must be in [0, 1]")

    @classmethod
    def fixed_count(cls, count: int, seed: int = 0) -> "ChannelSpec":
        return cls(mode=MODE_COUNT, count=count, seed=seed)

    @classmethod
    def iid_rate(cls, rate: float, seed: int = 0) -> "ChannelSpec":
        return cls(mode=MODE_RATE, rate=rate, seed=seed)

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "ChannelSpec":
        """Parse 'count:N' or 'rate:R'."""
        kind, _, value = text.partition(":")
        kind = kind.strip()
        if kind == MODE_COUNT:
            return cls.fixed_count(int(value), seed)
        if kind == MODE_RATE:
            return cls.iid_rate(float(value), seed)
        raise ValueError(f"channel spec must be 'count:N' or 'rate:R', got {text!r}")

    @property
    def label(self) -> str:
        if self.mode == MODE_COUNT:
            return f"count={self.count}"
        return f"rate={self.rate:g}"


def _substitute(codes: np.ndarray, positions: np.ndarray, rng: np.random.Generator):
    offsets = rng.integers(1, 4, size=len(positions))
    codes[positions] = (codes[positions] + offsets) & 3


def inject_substitutions(
    dna: str, spec: ChannelSpec, rng: np.random.Generator | None = None
) -> str:
    """Apply the channel to one DNA sequence; deterministic given seed.

    Fixed-count mode substitutes exactly ``count`` distinct positions in
    each consecutive 11-base window (a trailing shorter window is
    allowed as long as it still has ``count`` positions).
    """
    dna = parse_dna(dna)
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    if not dna:
        return dna
    codes = dna_codes(dna).copy()
    if spec.mode == MODE_RATE:
        mask = rng.random(len(codes)) < spec.rate
        _substitute(codes, np.flatnonzero(mask), rng)
        return codes_to_dna(codes)
    if spec.count == 0:
        return dna
    positions = []
    for start in range(0, len(codes), CODEWORD_LENGTH):
        width = min(CODEWORD_LENGTH, len(codes) - start)
        if spec.count > width:
            raise ValueError(
                f"cannot substitute {spec.count} positions in a window of {width}"
            )
        picks = rng.choice(width, size=spec.count, replace=False)
        positions.extend(start + int(p) for p in picks)
    _substitute(codes, np.array(positions, dtype=np.int64), rng)
    return codes_to_dna(codes)


def corrupt_records(
    records: list[ChunkRecord],
    spec: ChannelSpec,
    rng: np.random.Generator | None = None,
) -> list[ChunkRecord]:
    """Apply the channel to chunk records.

    Count mode targets payload codeword windows only; rate mode sweeps
    the whole record, headers included (headers carry no ECC, so this
    is how header loss gets exercised).
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    out = []
    for rec in records:
        if spec.mode == MODE_COUNT:
            payload = inject_substitutions(rec.payload_dna, spec, rng)
            header = rec.header_dna
        else:
            payload = inject_substitutions(rec.payload_dna, spec, rng)
            header = inject_substitutions(rec.header_dna, spec, rng)
        out.append(replace(rec, payload_dna=payload, header_dna=header))
    return out


@dataclass(frozen=True)
class MonteCarloRow:
    """Aggregated decode quality for one channel setting."""

    spec: ChannelSpec
    trials: int
    byte_accuracy: float
    parity_failure_rate: float
    file_exact_rate: float

    def to_dict(self) -> dict:
        return {
            "channel": self.spec.label,
            "seed": self.spec.seed,
            "trials": self.trials,
            "byte_accuracy": self.byte_accuracy,
            "parity_failure_rate": self.parity_failure_rate,
            "file_exact_rate": self.file_exact_rate,
        }


def _run_trial(
    records: list[ChunkRecord],
    content: bytes,
    codebook: ByteCodebook,
    spec: ChannelSpec,
    trial: int,
) -> tuple[float, float, float]:
    rng = np.random.default_rng(np.random.SeedSequence((spec.seed, trial)))
    corrupted = corrupt_records(records, spec, rng)
    try:
        result = decode_file(corrupted, codebook)
    except DecodeError:
        return 0.0, 1.0, 0.0
    decoded = result.content
    if content:
        matching = sum(
            a == b for a, b in zip(decoded, content)
        )
        accuracy = matching / len(content)
    else:
        accuracy = 1.0
    parity_failures = sum(not rep.parity_ok for rep in result.per_chunk)
    chunk_count = max(1, len(result.per_chunk) + len(result.unrecoverable_chunks))
    exact = float(decoded == content)
    return accuracy, parity_failures / chunk_count, exact


def monte_carlo_decode(
    fd: FileDescriptor,
    codebook: ByteCodebook,
    grid: list[ChannelSpec],
    trials: int,
    chunk_bases: int = DEFAULT_CHUNK_BASES,
    workers: int = 1,
) -> list[MonteCarloRow]:
    """Encode once, then corrupt and decode ``trials`` times per channel
    setting. Per-trial generators derive from (spec seed, trial index),
    and results reduce in trial order, so the table is reproducible
    regardless of worker count.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    records = encode_file(fd, codebook, chunk_bases)
    rows = []
    for spec in grid:
        runner = partial(_run_trial, records, fd.content, codebook, spec)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(runner, range(trials)))
        else:
            outcomes = [runner(t) for t in range(trials)]
        acc = sum(o[0] for o in outcomes) / trials
        par = sum(o[1] for o in outcomes) / trials
        exact = sum(o[2] for o in outcomes) / trials
        rows.append(
            MonteCarloRow(
                spec=spec,
                trials=trials,
                byte_accuracy=acc,
                parity_failure_rate=par,
                file_exact_rate=exact,
            )
        )
    return rows


@dataclass(frozen=True)
class CapacityParams:
    """Inputs of the storage-density fixed-point equation."""

    chunk_payload_bases: int = DEFAULT_CHUNK_BASES
    code_length: int = CODEWORD_LENGTH
    bases_per_gram: float = DEFAULT_BASES_PER_GRAM
    overhead_bytes: float = DEFAULT_OVERHEAD_BYTES

    def __post_init__(self):
        if self.chunk_payload_bases <= 0 or self.code_length <= 0:
            raise ValueError("chunk and code lengths must be positive")
        if self.chunk_payload_bases % self.code_length:
            raise ValueError("chunk payload must be a multiple of the code length")
        if self.bases_per_gram <= 0:
            raise ValueError("bases per gram must be positive")
        if self.overhead_bytes < 0:
            raise ValueError("overhead bytes must be >= 0")


@dataclass(frozen=True)
class CapacityResult:
    bytes_per_gram: float
    mu: float
    residual: float
    iterations: int

    def to_dict(self) -> dict:
        return {
            "bytes_per_gram": self.bytes_per_gram,
            "mu": self.mu,
            "residual": self.residual,
            "iterations": self.iterations,
        }


class ConvergenceError(RuntimeError):
    """The capacity fixed-point iteration failed to settle."""


CAPACITY_FORMULA = (
    "x = (bases_per_gram * l) / (N * (l + 3 + log3(N * (x + overhead) / l)))"
    " - overhead"
)


def solve_capacity(
    params: CapacityParams = CapacityParams(),
    tolerance: float = 1e-12,
    max_iterations: int = 1000,
) -> CapacityResult:
    """Bytes storable per gram, from damped fixed-point iteration.

    Chunk-index trits grow logarithmically with the byte count, so the
    equation is solved self-consistently: mu = log3(N*(x+overhead)/l).
    """
    l = float(params.chunk_payload_bases)
    n = float(params.code_length)
    c = params.bases_per_gram
    overhead = params.overhead_bytes

    def step(x: float) -> tuple[float, float]:
        mu = math.log(n * (x + overhead) / l, 3)
        return c * l / (n * (l + 3 + mu)) - overhead, mu

    x = c * l / (n * (l + 3))
    mu = 0.0
    for iteration in range(1, max_iterations + 1):
        nxt, mu = step(x)
        if nxt <= 0:
            raise ConvergenceError(f"iterate left the domain: {nxt}")
        if abs(nxt - x) / abs(nxt) < tolerance:
            x = nxt
            fx, mu = step(x)
            return CapacityResult(
                bytes_per_gram=x,
                mu=mu,
                residual=abs(fx - x) / abs(x),
                iterations=iteration,
            )
        x = 0.5 * (x + nxt)
    raise ConvergenceError(f"no convergence after {max_iterations} iterations")


def code_rate(bits_per_symbol: int = 8, code_length: int = CODEWORD_LENGTH) -> float:
    """Information bits carried per DNA base."""
    if code_length < 1:
        raise ValueError("code length must be >= 1")
    return bits_per_symbol / code_length


def synthesis_cost(
    num_bases: int, per_base_usd: float = DEFAULT_COST_PER_BASE_USD
) -> float:
    """Synthesis cost in USD at a flat per-base price."""
    return num_bases * per_base_usd


@dataclass(frozen=True)
class CostRow:
    size_bytes: int
    total_bases: int
    cost_usd: float
    cost_per_mb_usd: float

    def to_dict(self) -> dict:
        return {
            "size_bytes": self.size_bytes,
            "total_bases": self.total_bases,
            "cost_usd": self.cost_usd,
            "cost_per_mb_usd": self.cost_per_mb_usd,
        }


def count_record_bases(
    size_bytes: int,
    extension: str = "",
    chunk_bases: int = DEFAULT_CHUNK_BASES,
) -> int:
    """Total bases emitted for a file of the given size, headers included.

    Pure arithmetic mirror of the encoder: content plus trailer
    codewords, chunked, plus (3 + mu) header bases per chunk.
    """
    if size_bytes < 0:
        raise ValueError("size must be >= 0")
    codewords = size_bytes + 1 + len(str(size_bytes)) + 1 + len(extension) + 1
    payload = codewords * CODEWORD_LENGTH
    segments = max(1, -(-payload // chunk_bases))
    mu = mu_for_segments(segments)
    return payload + segments * (HEADER_FIXED_BASES + mu)


def cost_curve(
    file_sizes: list[int],
    extension: str = "",
    chunk_bases: int = DEFAULT_CHUNK_BASES,
    per_base_usd: float = DEFAULT_COST_PER_BASE_USD,
) -> list[CostRow]:
    """Synthesis cost per size; cost/MB uses decimal megabytes."""
    rows = []
    for size in file_sizes:
        bases = count_record_bases(size, extension, chunk_bases)
        cost = synthesis_cost(bases, per_base_usd)
        per_mb = cost / (size / MEGABYTE) if size else math.inf
        rows.append(
            CostRow(
                size_bytes=size,
                total_bases=bases,
                cost_usd=cost,
                cost_per_mb_usd=per_mb,
            )
        )
    return rows


def rows_to_csv(rows: list) -> str:
    """Render report rows (anything with ``to_dict``) as CSV text."""
    import csv
    import io

    dicts = [row.to_dict() for row in rows]
    if not dicts:
        return ""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(dicts[0]))
    writer.writeheader()
    writer.writerows(dicts)
    return buffer.getvalue()
