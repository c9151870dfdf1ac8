"""LDPC encoding/decoding over alist-format parity-check matrices.

Codes are shipped as standard alist files (one per codeword length), built
offline by scripts/gen_ldpc_codes.py with a progressive-edge-growth
construction. Loading a code row-reduces H over GF(2) once: the pivot
columns become parity positions and the free columns carry the information
bits verbatim, so encoding is a packed-bitset matrix-vector product.
Decoding is normalized min-sum belief propagation (scale 0.75, flooding
schedule) through the selected kernel backend.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from ntnlink.backend import kernels
from ntnlink.errors import ConfigurationError, UsageError

MINSUM_ALPHA = 0.75
DEFAULT_MAX_ITERS = 25


def read_alist(path) -> tuple[int, int, np.ndarray, np.ndarray]:
    """Parse an alist file; returns (n, m, chk_ptr, chk_idx) as CSR over checks."""
    with open(path, encoding="ascii") as f:
        tokens = f.read().split()
    it = iter(tokens)
    n = int(next(it))
    m = int(next(it))
    next(it), next(it)  # max column / row degrees
    col_deg = [int(next(it)) for _ in range(n)]
    row_deg = [int(next(it)) for _ in range(m)]
    # column adjacency lists (padded entries are 0 and skipped)
    max_col = max(col_deg)
    for _ in range(n * max_col):
        next(it)
    max_row = max(row_deg)
    chk_ptr = np.zeros(m + 1, dtype=np.int64)
    chk_idx = np.empty(sum(row_deg), dtype=np.int64)
    pos = 0
    for r in range(m):
        seen = 0
        for _ in range(max_row):
            v = int(next(it))
            if v != 0:
                chk_idx[pos] = v - 1  # alist is 1-based
                pos += 1
                seen += 1
        if seen != row_deg[r]:
            raise ConfigurationError(f"alist row {r} degree mismatch in {path}")
    chk_ptr[1:] = np.cumsum(row_deg)
    return n, m, chk_ptr, chk_idx


def write_alist(path, n: int, m: int, chk_ptr: np.ndarray, chk_idx: np.ndarray) -> None:
    cols: list[list[int]] = [[] for _ in range(n)]
    rows: list[list[int]] = []
    for r in range(m):
        members = sorted(int(v) for v in chk_idx[chk_ptr[r]:chk_ptr[r + 1]])
        rows.append(members)
        for v in members:
            cols[v].append(r)
    max_col = max(len(c) for c in cols)
    max_row = max(len(r) for r in rows)
    with open(path, "w", encoding="ascii") as f:
        f.write(f"{n} {m}\n{max_col} {max_row}\n")
        f.write(" ".join(str(len(c)) for c in cols) + "\n")
        f.write(" ".join(str(len(r)) for r in rows) + "\n")
        for c in cols:
            padded = [v + 1 for v in c] + [0] * (max_col - len(c))
            f.write(" ".join(map(str, padded)) + "\n")
        for r in rows:
            padded = [v + 1 for v in r] + [0] * (max_row - len(r))
            f.write(" ".join(map(str, padded)) + "\n")


def _pack_rows(dense: np.ndarray) -> np.ndarray:
    """Pack a boolean (rows, bits) matrix into uint64 words (little-endian
    host assumed, bit j of word w is column w*64+j)."""
    rows, bits = dense.shape
    words = (bits + 63) // 64
    padded = np.zeros((rows, words * 64), dtype=np.uint8)
    padded[:, :bits] = dense
    return np.packbits(padded, axis=1, bitorder="little").view(np.uint64)


@dataclass
class LdpcCode:
    """A loaded, preprocessed code. `free_cols` carry info bits verbatim."""

    name: str
    n: int
    m: int
    chk_ptr: np.ndarray
    chk_idx: np.ndarray
    pivot_cols: np.ndarray = field(repr=False)
    free_cols: np.ndarray = field(repr=False)
    encode_rows: np.ndarray = field(repr=False)   # packed H' over free columns

    @property
    def k(self) -> int:
        return self.n - self.m

    @property
    def rate(self) -> float:
        return self.k / self.n


def _preprocess(name, n, m, chk_ptr, chk_idx) -> LdpcCode:
    # dense GF(2) row echelon over packed 64-bit words
    words = (n + 63) // 64
    hp = np.zeros((m, words), dtype=np.uint64)
    for r in range(m):
        for v in chk_idx[chk_ptr[r]:chk_ptr[r + 1]]:
            hp[r, v >> 6] ^= np.uint64(1) << np.uint64(v & 63)
    pivot_cols = []
    r = 0
    for col in range(n):
        w, bit = col >> 6, np.uint64(col & 63)
        column_bits = (hp[:, w] >> bit) & np.uint64(1)
        candidates = np.nonzero(column_bits[r:])[0]
        if candidates.size == 0:
            continue
        pr = r + int(candidates[0])
        if pr != r:
            hp[[r, pr]] = hp[[pr, r]]
        column_bits = (hp[:, w] >> bit) & np.uint64(1)
        others = np.nonzero(column_bits)[0]
        others = others[others != r]
        hp[others] ^= hp[r]
        pivot_cols.append(col)
        r += 1
        if r == m:
            break
    if r < m:
        raise ConfigurationError(
            f"parity-check matrix {name!r} is rank deficient ({r} < {m})"
        )
    pivot_cols = np.array(pivot_cols, dtype=np.int64)
    mask = np.ones(n, dtype=bool)
    mask[pivot_cols] = False
    free_cols = np.nonzero(mask)[0]
    # reduced rows restricted to the free columns, packed for fast encoding
    dense_free = np.zeros((m, free_cols.size), dtype=np.uint8)
    for j, col in enumerate(free_cols):
        w, bit = col >> 6, np.uint64(col & 63)
        dense_free[:, j] = ((hp[:, w] >> bit) & np.uint64(1)).astype(np.uint8)
    return LdpcCode(name=name, n=n, m=m, chk_ptr=chk_ptr, chk_idx=chk_idx,
                    pivot_cols=pivot_cols, free_cols=free_cols,
                    encode_rows=_pack_rows(dense_free))


@lru_cache(maxsize=16)
def load_code(n_coded: int, data_dir: str | None = None) -> LdpcCode:
    """Load the shipped rate-3/4 code with the given codeword length."""
    fname = f"peg_n{n_coded}_r34.alist"
    if data_dir is not None:
        path = os.path.join(data_dir, fname)
        if not os.path.exists(path):
            raise ConfigurationError(f"no LDPC code file {path!r}")
        n, m, ptr, idx = read_alist(path)
    else:
        res = resources.files("ntnlink.data").joinpath("ldpc").joinpath(fname)
        if not res.is_file():
            raise ConfigurationError(f"no shipped LDPC code for n={n_coded}")
        with resources.as_file(res) as p:
            n, m, ptr, idx = read_alist(p)
    if n != n_coded:
        raise ConfigurationError(f"code file {fname} declares n={n}")
    return _preprocess(fname, n, m, ptr, idx)


def ldpc_encode(info_bits, code: LdpcCode) -> np.ndarray:
    """Systematic encoding: info bits land on the free columns, parity bits
    on the pivot columns, H @ c = 0 over GF(2)."""
    info = np.asarray(info_bits, dtype=np.uint8)
    if info.size != code.k:
        raise UsageError(f"info length {info.size} != code dimension {code.k}")
    packed_info = _pack_rows(info[None, :])[0]
    acc = code.encode_rows & packed_info[None, :]
    parity = (np.bitwise_count(acc).sum(axis=1) & 1).astype(np.uint8)
    codeword = np.empty(code.n, dtype=np.uint8)
    codeword[code.free_cols] = info
    codeword[code.pivot_cols] = parity
    return codeword


def parity_ok(bits, code: LdpcCode) -> bool:
    b = np.asarray(bits, dtype=np.uint8)
    return not np.bitwise_xor.reduceat(b[code.chk_idx], code.chk_ptr[:-1]).any()


def ldpc_decode(llrs, code: LdpcCode, max_iters: int = DEFAULT_MAX_ITERS
                ) -> tuple[np.ndarray, bool]:
    """Normalized min-sum decoding. Positive LLR favours bit 0.

    Returns (info bits, success). Success requires all checks satisfied and
    every posterior LLR nonzero (an all-zero input carries no information and
    must not report success even though the zero word satisfies the checks).
    """
    llr = np.asarray(llrs, dtype=np.float64)
    if llr.size != code.n:
        raise UsageError(f"LLR length {llr.size} != codeword length {code.n}")
    posterior, ok, _ = kernels.minsum_decode(llr, code.chk_ptr, code.chk_idx,
                                             MINSUM_ALPHA, max_iters)
    hard = (posterior < 0).astype(np.uint8)
    success = bool(ok) and not np.any(posterior == 0.0)
    return hard[code.free_cols], success
