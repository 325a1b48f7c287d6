"""Deterministic, splittable random streams.

Every stream is a Philox counter-based generator whose 128-bit key is the first
16 bytes of ``sha256(f"{root_seed}:{stream_label}:{replica_index}")``.  Streams
therefore carry no shared state: replica ``i`` of a Monte Carlo run can be
constructed anywhere, in any order, and always yields the same numbers.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from .errors import ConfigError, EmptyInputError

T = TypeVar("T")

GAUSSIAN_METHOD = "numpy-ziggurat (Generator.standard_normal on Philox4x64)"
SIGN_METHOD = "raw-bits (Philox random_raw, little-endian bit unpacking)"

_MAX_SEED = 2**64


@dataclass(frozen=True)
class SeedSpec:
    root_seed: int
    stream_label: str = "default"
    replica_index: int = 0

    def __post_init__(self):
        if not (0 <= int(self.root_seed) < _MAX_SEED):
            raise ConfigError(f"root_seed must be a 64-bit unsigned integer, got {self.root_seed}")
        if not self.stream_label.isascii() or len(self.stream_label) > 64:
            raise ConfigError("stream_label must be ASCII and at most 64 characters")
        if self.replica_index < 0:
            raise ConfigError("replica_index must be non-negative")

    def replica(self, index: int) -> "SeedSpec":
        return replace(self, replica_index=int(index))

    def labelled(self, label: str) -> "SeedSpec":
        return replace(self, stream_label=label)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SeedSpec":
        return cls(int(data["root_seed"]), str(data.get("stream_label", "default")),
                   int(data.get("replica_index", 0)))


def philox_key(seed: SeedSpec) -> np.ndarray:
    token = f"{seed.root_seed}:{seed.stream_label}:{seed.replica_index}".encode("ascii")
    digest = hashlib.sha256(token).digest()
    return np.frombuffer(digest[:16], dtype="<u8").copy()


def bit_generator(seed: SeedSpec) -> np.random.Philox:
    return np.random.Philox(key=philox_key(seed))


def generator(seed: SeedSpec) -> np.random.Generator:
    return np.random.Generator(bit_generator(seed))


def _check_count(n: int) -> int:
    n = int(n)
    if n <= 0:
        raise EmptyInputError("a stream of length 0 was requested")
    return n


def rademacher_stream(seed: SeedSpec, n: int) -> np.ndarray:
    """Return ``n`` independent signs in {-1, +1} as int8.

    Signs are read bit by bit from the raw 64-bit output, so a longer request is
    always an extension of a shorter one with the same seed.
    """
    n = _check_count(n)
    words = bit_generator(seed).random_raw((n + 63) // 64).astype("<u8")
    bits = np.unpackbits(words.view(np.uint8), bitorder="little")[:n]
    return (2 * bits.astype(np.int8) - 1).astype(np.int8)


def gaussian_stream(seed: SeedSpec, n: int) -> np.ndarray:
    n = _check_count(n)
    return generator(seed).standard_normal(n)


def chunk_sizes(total: int, chunk: int) -> list[int]:
    total = _check_count(total)
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_ordered(fn: Callable[[int], T], indices: Iterable[int], threads: int = 1) -> list[T]:
    """Apply ``fn`` to each index and return results in index order.

    Each call is expected to build its own stream from the index, so the result
    does not depend on ``threads``.
    """
    indices = list(indices)
    if threads <= 1 or len(indices) <= 1:
        return [fn(i) for i in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, indices))


def pairwise_sum(values: Sequence[float]) -> float:
    """Order-fixed pairwise reduction of per-chunk partial sums."""
    vals = [float(v) for v in values]
    if not vals:
        return 0.0
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]
