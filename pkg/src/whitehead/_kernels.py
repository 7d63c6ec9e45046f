"""Array kernels for word arithmetic.

Words are numpy int64 arrays of nonzero signed letter codes over a rank-n
alphabet: code +i is the i-th generator, -i its inverse (1 <= i <= n).
Every comparison in this package uses the fixed letter order

    gen 1 < gen 2 < ... < gen n < inv 1 < inv 2 < ... < inv n

which is what ``key_codes`` materializes: key(c) = c-1 for positive c and
n-c-1 for negative c, so integer order on keys is the letter order.

The hot kernels are compiled with numba when it is importable.  Setting the
environment variable ``WH_KERNELS=python`` before import forces the plain
interpreted path (the tuple-canonicalization kernel then switches to a
vectorized numpy implementation).  ``HAS_NUMBA`` / ``JIT_ENABLED`` report
what actually happened at import time.
"""

from __future__ import annotations

import os

import numpy as np

_BACKEND = os.environ.get("WH_KERNELS", "numba").strip().lower()

HAS_NUMBA = False
if _BACKEND != "python":
    try:
        from numba import njit as _njit

        HAS_NUMBA = True
    except ImportError:
        HAS_NUMBA = False

JIT_ENABLED = HAS_NUMBA

if JIT_ENABLED:

    def jit(fn):
        return _njit(cache=True)(fn)

else:

    def jit(fn):
        return fn


def as_codes(seq) -> np.ndarray:
    """Coerce a sequence of signed letter codes to the kernel dtype."""
    return np.asarray(seq, dtype=np.int64)


@jit
def free_reduce(w):
    """Freely reduce a code array with a stack pass."""
    out = np.empty(w.shape[0], np.int64)
    top = 0
    for t in range(w.shape[0]):
        c = w[t]
        if top > 0 and out[top - 1] == -c:
            top -= 1
        else:
            out[top] = c
            top += 1
    return out[:top].copy()


@jit
def cyclic_bounds(w):
    """Bounds (lo, hi) with w[lo:hi] cyclically reduced; w must be reduced."""
    lo = 0
    hi = w.shape[0]
    while hi - lo >= 2 and w[lo] == -w[hi - 1]:
        lo += 1
        hi -= 1
    return lo, hi


@jit
def key_codes(w, n):
    """Map signed codes to the 0..2n-1 letter-order keys."""
    out = np.empty(w.shape[0], np.int64)
    for t in range(w.shape[0]):
        c = w[t]
        if c > 0:
            out[t] = c - 1
        else:
            out[t] = n - c - 1
    return out


@jit
def least_rotation(keys):
    """Start index of the lexicographically least rotation of a key array.

    Booth-style two-candidate scan; ties between equal rotations resolve to
    the smaller index, which leaves the rotated content identical anyway.
    """
    m = keys.shape[0]
    if m < 2:
        return 0
    i = 0
    j = 1
    k = 0
    while i < m and j < m and k < m:
        a = keys[(i + k) % m]
        b = keys[(j + k) % m]
        if a == b:
            k += 1
        else:
            if a > b:
                i = i + k + 1
            else:
                j = j + k + 1
            if i == j:
                j += 1
            k = 0
    if i < j:
        return i
    return j


@jit
def substitute(w, flat, off, n):
    """Replace each letter by its image and reduce, in one stack pass.

    flat/off is a substitution table over the 2n+1 slots c+n for
    c in -n..n (slot n, code 0, is always empty); see build_subst_table.
    """
    cap = 0
    for t in range(w.shape[0]):
        s = w[t] + n
        cap += off[s + 1] - off[s]
    out = np.empty(cap, np.int64)
    top = 0
    for t in range(w.shape[0]):
        s = w[t] + n
        for k in range(off[s], off[s + 1]):
            d = flat[k]
            if top > 0 and out[top - 1] == -d:
                top -= 1
            else:
                out[top] = d
                top += 1
    return out[:top].copy()


@jit
def relabel(w, table, n):
    """Apply a signed-letter relabeling table (indexed by c+n)."""
    out = np.empty(w.shape[0], np.int64)
    for t in range(w.shape[0]):
        out[t] = table[w[t] + n]
    return out


def build_subst_table(images, n):
    """Flatten generator images into a (flat, off) substitution table.

    images: list of n code arrays, image of generator i at index i-1.
    The table covers signed codes: the slot for -i holds the reversed
    negated image of i.
    """
    parts = []
    off = np.zeros(2 * n + 2, dtype=np.int64)
    pos = 0
    for s in range(2 * n + 1):
        c = s - n
        if c < 0:
            img = images[-c - 1]
            part = (-img[::-1]).astype(np.int64)
        elif c == 0:
            part = np.empty(0, dtype=np.int64)
        else:
            part = as_codes(images[c - 1])
        parts.append(part)
        pos += len(part)
        off[s + 1] = pos
    flat = np.concatenate(parts) if pos else np.empty(0, dtype=np.int64)
    return flat, off


@jit
def canonical_tuple_loop(flat, off, kinds, tables, n):
    """Lex-least relabeling of a word tuple over a stack of letter tables.

    flat/off: concatenated tuple entries; kinds[k] = 1 marks a cyclic entry,
    which is rotated to its least rotation after each relabeling.  Returns
    the winning signed codes in the same flat layout.
    """
    P = tables.shape[0]
    L = flat.shape[0]
    best = np.empty(L, np.int64)
    best_keys = np.empty(L, np.int64)
    cand = np.empty(L, np.int64)
    cand_keys = np.empty(L, np.int64)
    tmp = np.empty(L, np.int64)
    for p in range(P):
        for t in range(L):
            cand[t] = tables[p, flat[t] + n]
        for t in range(L):
            c = cand[t]
            if c > 0:
                cand_keys[t] = c - 1
            else:
                cand_keys[t] = n - c - 1
        for k in range(off.shape[0] - 1):
            lo = off[k]
            hi = off[k + 1]
            m = hi - lo
            if kinds[k] == 1 and m > 1:
                s = least_rotation(cand_keys[lo:hi])
                if s != 0:
                    for t in range(m):
                        tmp[t] = cand[lo + (s + t) % m]
                    for t in range(m):
                        cand[lo + t] = tmp[t]
                        c = tmp[t]
                        if c > 0:
                            cand_keys[lo + t] = c - 1
                        else:
                            cand_keys[lo + t] = n - c - 1
        if p == 0:
            better = True
        else:
            better = False
            for t in range(L):
                if cand_keys[t] != best_keys[t]:
                    better = cand_keys[t] < best_keys[t]
                    break
        if better:
            for t in range(L):
                best[t] = cand[t]
                best_keys[t] = cand_keys[t]
    return best


def canonical_tuple_numpy(flat, off, kinds, tables, n):
    """Vectorized fallback with the same contract as canonical_tuple_loop."""
    P = tables.shape[0]
    if flat.shape[0] == 0:
        return flat.copy()
    cands = tables[:, flat + n]
    keys = np.where(cands > 0, cands - 1, n - cands - 1)
    for k in range(off.shape[0] - 1):
        lo, hi = int(off[k]), int(off[k + 1])
        m = hi - lo
        if kinds[k] != 1 or m < 2:
            continue
        seg = keys[:, lo:hi]
        dbl = np.concatenate([seg, seg], axis=1)
        rots = np.stack([dbl[:, s:s + m] for s in range(m)], axis=1)
        for p in range(P):
            order = np.lexsort(rots[p].T[::-1])
            s = int(order[0])
            if s:
                cands[p, lo:hi] = np.roll(cands[p, lo:hi], -s)
                keys[p, lo:hi] = rots[p, s]
    order = np.lexsort(keys.T[::-1])
    return cands[int(order[0])].copy()


def canonical_tuple(flat, off, kinds, tables, n):
    if JIT_ENABLED:
        return canonical_tuple_loop(flat, off, kinds, tables, n)
    return canonical_tuple_numpy(flat, off, kinds, tables, n)
