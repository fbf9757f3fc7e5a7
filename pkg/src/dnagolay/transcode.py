"""Rotation-table transcoding between trit strings and homopolymer-free DNA.

Each trit is encoded as one of the three nucleotides different from the
previously emitted base, which makes two equal adjacent bases impossible
by construction. In the cyclic base order A -> C -> G -> T -> A the rule
is arithmetic:

    next_base = rotate(prev_base, trit + 1)
    trit      = rotate_distance(prev_base, cur_base) - 1

A rotate distance of 0 (cur == prev) has no trit preimage; on decode it
marks channel corruption.

The bulk helpers work on numpy code arrays (A,C,G,T -> 0..3) so that
whole payload streams and header batches convert without per-symbol
Python loops. Wrapping uint8 cumulative sums are exact here because
256 is divisible by 4.
"""

from __future__ import annotations

import numpy as np

from .ternary import DNA_ALPHABET, parse_dna, parse_trits

DEFAULT_PREV_BASE = "A"

BASE_INDEX = {base: i for i, base in enumerate(DNA_ALPHABET)}

#: (prev_base, trit) -> next base; one row per prev, bijective onto the
#: three bases different from prev.
FORWARD = {
    (prev, trit): DNA_ALPHABET[(BASE_INDEX[prev] + trit + 1) % 4]
    for prev in DNA_ALPHABET
    for trit in range(3)
}

#: (prev_base, cur_base) -> trit; exact inverse of FORWARD.
BACKWARD = {(prev, cur): trit for (prev, trit), cur in FORWARD.items()}

_DNA_CHARS = np.frombuffer(DNA_ALPHABET.encode("ascii"), dtype=np.uint8)
_CHAR_TO_CODE = np.full(256, 255, dtype=np.uint8)
for _base, _i in BASE_INDEX.items():
    _CHAR_TO_CODE[ord(_base)] = _i
    _CHAR_TO_CODE[ord(_base.lower())] = _i

_ORD_ZERO = ord("0")


class HomopolymerError(ValueError):
    """A base repeats its predecessor where the code forbids it.

    ``position`` is 1-based; position 1 means the first base equals the
    caller-supplied previous-base context.
    """

    def __init__(self, position: int):
        super().__init__(f"adjacent equal bases at position {position}")
        self.position = position


def trit_codes(trits: str) -> np.ndarray:
    """Trit string -> uint8 array of values 0..2."""
    return np.frombuffer(trits.encode("ascii"), dtype=np.uint8) - _ORD_ZERO


def dna_codes(dna: str) -> np.ndarray:
    """DNA string -> uint8 array of values 0..3."""
    return _CHAR_TO_CODE[np.frombuffer(dna.encode("ascii"), dtype=np.uint8)]


def codes_to_dna(codes: np.ndarray) -> str:
    """uint8 array of values 0..3 -> DNA string."""
    return _DNA_CHARS[codes].tobytes().decode("ascii")


def encode_codes(trit_values: np.ndarray, prev_code: int) -> np.ndarray:
    """Vectorized rotation encode on code arrays."""
    steps = (trit_values + 1).astype(np.uint8)
    return (prev_code + np.cumsum(steps, dtype=np.uint8)) & 3


def decode_codes(base_codes: np.ndarray, prev_code: int) -> np.ndarray:
    """Vectorized rotation decode; the value 3 marks a forbidden repeat."""
    shifted = np.empty_like(base_codes)
    if len(base_codes):
        shifted[0] = prev_code
        shifted[1:] = base_codes[:-1]
    return (base_codes - shifted - 1) & 3


def trits_to_dna(trits: str, prev_base: str = DEFAULT_PREV_BASE) -> str:
    """Encode a trit string as DNA that never repeats a base.

    The output has the input's length, starts with a base different from
    ``prev_base``, and contains no two equal adjacent bases.
    """
    trits = parse_trits(trits)
    prev_base = parse_dna(prev_base)
    if not trits:
        return ""
    return codes_to_dna(encode_codes(trit_codes(trits), BASE_INDEX[prev_base]))


def dna_to_trits(dna: str, prev_base: str = DEFAULT_PREV_BASE) -> str:
    """Exact inverse of :func:`trits_to_dna` under the same context.

    Raises :class:`HomopolymerError` when a base equals its predecessor
    (including the first base equalling ``prev_base``), which cannot
    occur in uncorrupted output of the encoder.
    """
    dna = parse_dna(dna)
    prev_base = parse_dna(prev_base)
    if not dna:
        return ""
    trits = decode_codes(dna_codes(dna), BASE_INDEX[prev_base])
    bad = np.flatnonzero(trits == 3)
    if bad.size:
        raise HomopolymerError(int(bad[0]) + 1)
    return (trits + _ORD_ZERO).tobytes().decode("ascii")


def read_trits_best_effort(
    dna: str, prev_base: str = DEFAULT_PREV_BASE
) -> list[int | None]:
    """Per-position trit reading with ``None`` at unreadable positions.

    Used by the ML decoder's tie-break layer, where an unreadable
    position scores as a mismatch against every candidate.
    """
    dna = parse_dna(dna)
    prev_base = parse_dna(prev_base)
    values = decode_codes(dna_codes(dna), BASE_INDEX[prev_base])
    return [None if v == 3 else int(v) for v in values]


def encode_rows(trit_rows: np.ndarray, prev_code: int) -> np.ndarray:
    """Rotation-encode a (rows, width) trit matrix, one context per row."""
    steps = (trit_rows + 1).astype(np.uint8)
    return (prev_code + np.cumsum(steps, axis=1, dtype=np.uint8)) & 3


def decode_rows(base_rows: np.ndarray, prev_code: int) -> np.ndarray:
    """Rotation-decode a (rows, width) base-code matrix; 3 marks repeats."""
    shifted = np.empty_like(base_rows)
    shifted[:, 0] = prev_code
    shifted[:, 1:] = base_rows[:, :-1]
    return (base_rows - shifted - 1) & 3
