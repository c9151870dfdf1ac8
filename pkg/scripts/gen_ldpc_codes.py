#!/usr/bin/env python3
"""Generate the rate-3/4 LDPC codes shipped under src/ntnlink/data/ldpc/.

Construction: progressive edge growth (PEG) with variable-node degree 3.
Variables are connected one edge at a time; the first edge of a variable
goes to a minimum-degree check, later edges go to a check at maximum
distance in the bipartite graph built so far (ties broken by lowest degree,
then lowest index), which maximizes local girth.

One code per codeword length: a slot carries one codeword, so lengths are
(data resource elements per slot) x (bits per symbol) for pilot-bearing
slots (48*12 data REs) and pilot-free slots (48*14 data REs) at QPSK,
16-QAM, and 64-QAM. Rank of H is verified before writing; a deficient seed
is bumped and retried.

Usage: python scripts/gen_ldpc_codes.py [outdir]
"""

import sys
from pathlib import Path

import numpy as np
from numba import njit

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ntnlink.phy.ldpc import _preprocess, write_alist  # noqa: E402
from ntnlink.errors import ConfigurationError  # noqa: E402

VAR_DEGREE = 3
CODE_LENGTHS = (1152, 1344, 2304, 2688, 3456, 4032)  # 48*{12,14}*{2,4,6}


@njit(cache=True)
def _bfs_depths(start_var, n, m, var_deg, var_adj, chk_deg, chk_adj):
    """Depths of all check nodes from one variable node; -1 if unreachable."""
    var_depth = np.full(n, -1, dtype=np.int32)
    chk_depth = np.full(m, -1, dtype=np.int32)
    queue = np.empty(n + m, dtype=np.int32)
    # frontier alternates var -> chk -> var ...
    queue[0] = start_var
    var_depth[start_var] = 0
    head, tail = 0, 1
    is_var_level = True
    level_end = tail
    depth = 0
    while head < tail:
        node = queue[head]
        head += 1
        if is_var_level:
            for e in range(var_deg[node]):
                c = var_adj[node, e]
                if chk_depth[c] < 0:
                    chk_depth[c] = depth + 1
                    queue[tail] = c
                    tail += 1
        else:
            for e in range(chk_deg[node]):
                v = chk_adj[node, e]
                if var_depth[v] < 0:
                    var_depth[v] = depth + 1
                    queue[tail] = v
                    tail += 1
        if head == level_end:
            depth += 1
            is_var_level = not is_var_level
            level_end = tail
    return chk_depth


@njit(cache=True)
def _peg_graph(n, m, var_degree, max_chk_deg, order):
    var_adj = np.full((n, var_degree), -1, dtype=np.int32)
    var_deg = np.zeros(n, dtype=np.int32)
    chk_adj = np.full((m, max_chk_deg), -1, dtype=np.int32)
    chk_deg = np.zeros(m, dtype=np.int32)
    for vi in range(n):
        v = order[vi]
        for _ in range(var_degree):
            if var_deg[v] == 0:
                # first edge: least-loaded check
                best = 0
                for c in range(1, m):
                    if chk_deg[c] < chk_deg[best]:
                        best = c
            else:
                depths = _bfs_depths(v, n, m, var_deg, var_adj, chk_deg, chk_adj)
                best = -1
                best_depth = -2
                for c in range(m):
                    d = depths[c]
                    if d < 0:
                        d = 1 << 30  # unreachable: ideal candidate
                    if d > best_depth or (d == best_depth and best >= 0
                                          and chk_deg[c] < chk_deg[best]):
                        # skip checks already connected to v
                        dup = False
                        for e in range(var_deg[v]):
                            if var_adj[v, e] == c:
                                dup = True
                                break
                        if not dup:
                            best = c
                            best_depth = d
                if best < 0:
                    best = 0
            var_adj[v, var_deg[v]] = best
            var_deg[v] += 1
            chk_adj[best, chk_deg[best]] = v
            chk_deg[best] += 1
    return var_adj, chk_adj, chk_deg


def build_code(n, seed):
    m = n // 4
    avg_deg = VAR_DEGREE * n / m
    max_chk_deg = int(avg_deg) + 4
    order = np.random.default_rng(seed).permutation(n).astype(np.int32)
    _, chk_adj, chk_deg = _peg_graph(n, m, VAR_DEGREE, max_chk_deg, order)
    chk_ptr = np.zeros(m + 1, dtype=np.int64)
    chk_ptr[1:] = np.cumsum(chk_deg)
    chk_idx = np.empty(chk_ptr[-1], dtype=np.int64)
    pos = 0
    for r in range(m):
        members = np.sort(chk_adj[r, :chk_deg[r]])
        chk_idx[pos:pos + chk_deg[r]] = members
        pos += chk_deg[r]
    return m, chk_ptr, chk_idx


def main():
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else \
        Path(__file__).resolve().parent.parent / "src" / "ntnlink" / "data" / "ldpc"
    outdir.mkdir(parents=True, exist_ok=True)
    for n in CODE_LENGTHS:
        for seed in range(100):
            m, chk_ptr, chk_idx = build_code(n, seed)
            try:
                _preprocess(f"n{n}", n, m, chk_ptr, chk_idx)
            except ConfigurationError:
                print(f"n={n}: seed {seed} rank-deficient, retrying")
                continue
            path = outdir / f"peg_n{n}_r34.alist"
            write_alist(path, n, m, chk_ptr, chk_idx)
            print(f"wrote {path} (m={m}, edges={chk_idx.size}, seed={seed})")
            break
        else:
            raise SystemExit(f"could not build a full-rank code for n={n}")


if __name__ == "__main__":
    main()
