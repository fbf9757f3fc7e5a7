"""Forward pipeline: file bytes -> payload DNA -> indexed chunks -> FASTA.

Layout of one encoded file:

* payload trit stream: codewords of every content byte, then ';', the
  decimal digits of the byte count, ',', the extension characters, and a
  closing ';' (all as codewords). The trailer rides inside the payload
  and is therefore protected by the code.
* the payload stream is rotation-encoded as ONE continuous DNA string
  starting from context 'A', then sliced into chunks of 99 bases
  (9 codewords); only the final chunk may be shorter, and always by a
  multiple of 11.
* each chunk gets a header of 2 file-id trits, mu chunk-index trits and
  one parity trit, rotation-encoded from a fresh 'A' context. Headers
  carry no error correction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .codebook import CODEWORD_LENGTH, ByteCodebook
from .ternary import parse_dna
from .transcode import (
    BASE_INDEX,
    DEFAULT_PREV_BASE,
    decode_rows,
    dna_codes,
    codes_to_dna,
    encode_rows,
    trits_to_dna,
)

DEFAULT_CHUNK_BASES = 99
FILE_ID_TRITS = 2
MAX_FILE_ID = 3**FILE_ID_TRITS - 1
SIZE_SEPARATOR = ";"
EXTENSION_SEPARATOR = ","
FASTA_LINE_WIDTH = 80

# batch header construction pays off once files span many chunks
_HEADER_BATCH_THRESHOLD = 64


class ChunkError(ValueError):
    """Raised for invalid chunking inputs (sizes, ids, indexes)."""


class FastaError(ValueError):
    """Raised for malformed FASTA text; carries a 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class FileDescriptor:
    """A file to encode: raw bytes plus the metadata stored beside them."""

    content: bytes
    extension: str = ""
    file_id: int = 0

    def __post_init__(self):
        if not 0 <= self.file_id <= MAX_FILE_ID:
            raise ChunkError(f"file_id must be 0..{MAX_FILE_ID}, got {self.file_id}")
        for ch in self.extension:
            if ord(ch) > 255:
                raise ChunkError(f"extension character {ch!r} is not a byte")
            if ch in (SIZE_SEPARATOR, EXTENSION_SEPARATOR):
                raise ChunkError(f"extension must not contain {ch!r}")

    @property
    def size_bytes(self) -> int:
        return len(self.content)


@dataclass(frozen=True, slots=True)
class ChunkRecord:
    """One synthesizable DNA segment: payload slice plus its header.

    ``file_id`` and ``chunk_index`` are known at encode time; records
    coming back from :func:`parse_fasta` leave them ``None`` until the
    header is decoded.
    """

    payload_dna: str
    header_dna: str
    file_id: int | None = None
    chunk_index: int | None = None

    @property
    def mu(self) -> int:
        return len(self.header_dna) - FILE_ID_TRITS - 1

    @property
    def total_length(self) -> int:
        return len(self.payload_dna) + len(self.header_dna)

    @property
    def sequence(self) -> str:
        return self.payload_dna + self.header_dna


def int_to_trits(value: int, width: int) -> str:
    """Base-3 digits of ``value``, most significant first, zero padded."""
    if value < 0 or value >= 3**width:
        raise ChunkError(f"{value} does not fit in {width} trits")
    digits = []
    for _ in range(width):
        digits.append(str(value % 3))
        value //= 3
    return "".join(reversed(digits))


def mu_for_segments(segment_count: int) -> int:
    """Number of chunk-index trits: ceil(log3(segments)), at least 1."""
    if segment_count < 1:
        raise ChunkError("segment count must be at least 1")
    mu = 1
    while 3**mu < segment_count:
        mu += 1
    return mu


def build_payload_trits(fd: FileDescriptor, codebook: ByteCodebook) -> str:
    """Concatenated codewords of content plus the metadata trailer."""
    words = codebook.codewords
    parts = [words[b] for b in fd.content]
    parts.append(words[ord(SIZE_SEPARATOR)])
    parts.extend(words[ord(d)] for d in str(fd.size_bytes))
    parts.append(words[ord(EXTENSION_SEPARATOR)])
    parts.extend(words[ord(ch)] for ch in fd.extension)
    parts.append(words[ord(SIZE_SEPARATOR)])
    return "".join(parts)


def segment_payload(payload_dna: str, chunk_bases: int = DEFAULT_CHUNK_BASES) -> list[str]:
    """Slice payload DNA into chunk_bases-long pieces; the last may be short."""
    _check_chunk_bases(chunk_bases)
    if len(payload_dna) % CODEWORD_LENGTH:
        raise ChunkError(
            f"payload length {len(payload_dna)} is not a multiple of {CODEWORD_LENGTH}"
        )
    return [
        payload_dna[i : i + chunk_bases]
        for i in range(0, len(payload_dna), chunk_bases)
    ]


def _check_chunk_bases(chunk_bases: int):
    if chunk_bases < CODEWORD_LENGTH or chunk_bases % CODEWORD_LENGTH:
        raise ChunkError(
            f"chunk size must be a positive multiple of {CODEWORD_LENGTH}, "
            f"got {chunk_bases}"
        )


def parity_trit(id_and_index: str) -> int:
    """Mod-3 sum of the trits at odd (1-based) positions."""
    return sum(int(id_and_index[i]) for i in range(0, len(id_and_index), 2)) % 3


def header_trits(file_id: int, chunk_index: int, mu: int) -> str:
    if not 0 <= file_id <= MAX_FILE_ID:
        raise ChunkError(f"file_id must be 0..{MAX_FILE_ID}, got {file_id}")
    if mu < 1:
        raise ChunkError(f"mu must be at least 1, got {mu}")
    body = int_to_trits(file_id, FILE_ID_TRITS) + int_to_trits(chunk_index, mu)
    return body + str(parity_trit(body))


def make_header_dna(file_id: int, chunk_index: int, mu: int) -> str:
    """Header DNA for one chunk, rotation-encoded from a fresh 'A' context."""
    return trits_to_dna(header_trits(file_id, chunk_index, mu), DEFAULT_PREV_BASE)


def _batch_headers(file_id: int, count: int, mu: int) -> list[str]:
    """All chunk headers of one file in a single vectorized pass."""
    idx = np.arange(count, dtype=np.int64)
    trits = np.empty((count, FILE_ID_TRITS + mu + 1), dtype=np.uint8)
    fid = int_to_trits(file_id, FILE_ID_TRITS)
    trits[:, 0] = int(fid[0])
    trits[:, 1] = int(fid[1])
    rem = idx.copy()
    for pos in range(mu - 1, -1, -1):
        trits[:, FILE_ID_TRITS + pos] = rem % 3
        rem //= 3
    trits[:, -1] = trits[:, :-1:2].sum(axis=1, dtype=np.int64) % 3
    codes = encode_rows(trits, BASE_INDEX[DEFAULT_PREV_BASE])
    blob = codes_to_dna(codes.reshape(-1))
    width = trits.shape[1]
    return [blob[i : i + width] for i in range(0, len(blob), width)]


def encode_file(
    fd: FileDescriptor,
    codebook: ByteCodebook,
    chunk_bases: int = DEFAULT_CHUNK_BASES,
) -> list[ChunkRecord]:
    """Encode a file into chunk records.

    The payload is rotation-encoded as one continuous stream (chunk k
    inherits the last payload base of chunk k-1 as context), so the
    payload stays homopolymer-free across chunk boundaries. Headers use
    a fresh 'A' context each.
    """
    _check_chunk_bases(chunk_bases)
    payload_trits = build_payload_trits(fd, codebook)
    payload_dna = trits_to_dna(payload_trits, DEFAULT_PREV_BASE)
    slices = segment_payload(payload_dna, chunk_bases)
    mu = mu_for_segments(len(slices))
    if len(slices) > _HEADER_BATCH_THRESHOLD:
        headers = _batch_headers(fd.file_id, len(slices), mu)
    else:
        headers = [make_header_dna(fd.file_id, i, mu) for i in range(len(slices))]
    return [
        ChunkRecord(
            payload_dna=part,
            header_dna=headers[i],
            file_id=fd.file_id,
            chunk_index=i,
        )
        for i, part in enumerate(slices)
    ]


def emit_fasta(records: list[ChunkRecord]) -> str:
    """Serialize chunk records as FASTA, sequence wrapped at 80 columns."""
    lines: list[str] = []
    for rec in records:
        seq = rec.sequence
        lines.append(f">f{rec.file_id}_c{rec.chunk_index} len={len(seq)}")
        for i in range(0, len(seq), FASTA_LINE_WIDTH):
            lines.append(seq[i : i + FASTA_LINE_WIDTH])
    if not lines:
        return ""
    return "\n".join(lines) + "\n"


def _infer_mu(lengths: list[int], chunk_bases: int) -> int:
    full_record = max(lengths)
    mu = full_record - chunk_bases - FILE_ID_TRITS - 1
    if len(lengths) == 1 and mu < 1:
        # single short chunk: its payload is below chunk_bases and mu is 1
        mu = 1
    return mu


class _SlowParse(Exception):
    """Internal: fast FASTA split hit something needing line diagnostics."""


def _split_fasta_fast(text: str) -> list[tuple[str, int | None]]:
    """Record sequences via whole-text splits; falls back for anomalies.

    Only handles the shapes :func:`emit_fasta` produces (plus blank
    lines and lower case); anything else defers to the line-by-line
    parser so errors carry line numbers.
    """
    if "\r" in text:
        text = text.replace("\r", "")
    body = text.lstrip("\n")
    if not body.startswith(">"):
        raise _SlowParse
    sequences = []
    for block in body[1:].split("\n>"):
        newline = block.find("\n")
        if newline == -1:
            raise _SlowParse  # record with no sequence line
        seq = block[newline + 1 :].replace("\n", "")
        if not seq:
            raise _SlowParse
        sequences.append(seq)
    joined = "".join(sequences)
    try:
        normalized = parse_dna(joined)
    except ValueError as exc:
        raise _SlowParse from exc
    if normalized != joined:
        out, offset = [], 0
        for seq in sequences:
            out.append(normalized[offset : offset + len(seq)])
            offset += len(seq)
        sequences = out
    return [(seq, None) for seq in sequences]


def _split_fasta_careful(text: str) -> list[tuple[str, int | None]]:
    """Line-by-line FASTA split with 1-based line numbers for errors."""
    sequences: list[tuple[str, int]] = []
    current: list[str] | None = None
    start = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(">"):
            if current is not None:
                sequences.append(("".join(current), start))
            current = []
            start = lineno
            continue
        if current is None:
            raise FastaError("sequence data before any '>' header", lineno)
        try:
            current.append(parse_dna(line))
        except ValueError as exc:
            raise FastaError(str(exc), lineno) from exc
    if current is not None:
        sequences.append(("".join(current), start))
    for seq, lineno in sequences:
        if not seq:
            raise FastaError("record has no sequence data", lineno)
    return sequences


def parse_fasta(text: str, chunk_bases: int = DEFAULT_CHUNK_BASES) -> list[ChunkRecord]:
    """Parse FASTA text back into chunk records (headers undecoded).

    The chunk-index width mu is inferred from record lengths: full
    records have ``chunk_bases`` payload bases, so mu = record length -
    chunk_bases - 3. At most one record (the final, short chunk) may
    deviate, and only downward.
    """
    _check_chunk_bases(chunk_bases)
    if not text.strip():
        return []
    try:
        entries = _split_fasta_fast(text)
    except _SlowParse:
        entries = _split_fasta_careful(text)
    if not entries:
        return []
    sequences = [seq for seq, _ in entries]
    starts = [lineno for _, lineno in entries]

    lengths = [len(s) for s in sequences]
    distinct = sorted(set(lengths))
    if len(distinct) > 2:
        raise FastaError(f"inconsistent record lengths: {distinct}")
    if len(distinct) == 2 and lengths.count(distinct[0]) != 1:
        raise FastaError(
            f"multiple records of non-full length {distinct[0]}; "
            "only the final chunk may be short"
        )
    mu = _infer_mu(lengths, chunk_bases)
    if mu < 1:
        raise FastaError(
            f"record length {max(lengths)} is too short for "
            f"chunk size {chunk_bases}"
        )
    header_len = FILE_ID_TRITS + mu + 1
    records = []
    for seq, start in zip(sequences, starts):
        payload_len = len(seq) - header_len
        if payload_len < CODEWORD_LENGTH or payload_len % CODEWORD_LENGTH:
            raise FastaError(
                f"record length {len(seq)} leaves a payload of {payload_len} "
                f"bases, not a positive multiple of {CODEWORD_LENGTH}",
                start,
            )
        records.append(
            ChunkRecord(payload_dna=seq[:payload_len], header_dna=seq[payload_len:])
        )
    return records


def decode_header(record: ChunkRecord) -> tuple[int, int, bool]:
    """Literal (no ECC) header decode: (file_id, chunk_index, parity_ok).

    Unreadable positions (repeated bases) read as trit 0 and force
    parity_ok False, matching best-effort recovery of damaged headers.
    """
    codes = dna_codes(record.header_dna).reshape(1, -1)
    trits = decode_rows(codes, BASE_INDEX[DEFAULT_PREV_BASE])[0]
    unreadable = bool((trits == 3).any())
    trits = np.where(trits == 3, 0, trits)
    file_id = int(trits[0]) * 3 + int(trits[1])
    chunk_index = 0
    for t in trits[FILE_ID_TRITS:-1]:
        chunk_index = chunk_index * 3 + int(t)
    expected = int(trits[:-1][::2].sum()) % 3
    parity_ok = not unreadable and expected == int(trits[-1])
    return file_id, chunk_index, parity_ok


def with_decoded_header(record: ChunkRecord) -> ChunkRecord:
    file_id, chunk_index, _ = decode_header(record)
    return replace(record, file_id=file_id, chunk_index=chunk_index)
