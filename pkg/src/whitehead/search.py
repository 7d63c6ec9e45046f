"""Orbit search: minimization, level-set exploration, certificates.

Two word tuples lie in one automorphism orbit exactly when greedy
descent takes them to the same minimal total length and their minimal
forms are joined by length-preserving Whitehead transforms.  The search
works on canonical forms: each tuple is relabeled by the lex-least
signed letter permutation (cyclic entries re-rotated), which shrinks
the level set by a factor of up to 2^n n! without losing completeness,
since letter permutations are themselves automorphisms.

Every positive answer is returned as a certificate that composes the
descent paths, the breadth-first chain and the relabelings back into a
single automorphism carrying the first tuple to the second, stored as
Whitehead transforms in application order plus one final letter
permutation.  Certificates are verified before being returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np

from . import _kernels
from .bases import (
    Automorphism,
    SignedPermutation,
    WhiteheadTransformDescriptor,
    compose,
    enumerate_signed_permutations,
    enumerate_whitehead_transforms,
    relabel_tables,
    transform_tables,
)
from .errors import LimitExceeded, TheoremViolation
from .lengthfn import (
    DescentResult,
    LengthReport,
    WordSet,
    check_same_shape,
    descend,
    in_coordinates,
    length_report,
)
from .words import CyclicWord, Word


@dataclass(frozen=True)
class SearchLimits:
    """Budgets for the breadth-first searches."""

    max_states: int = 1_000_000


@lru_cache(maxsize=None)
def transforms_by_images(rank: int) -> Dict[tuple, WhiteheadTransformDescriptor]:
    return {
        tuple(w.codes for w in d.images()): d
        for d in enumerate_whitehead_transforms(rank)
    }


def _conjugate_descriptor(
    perm: SignedPermutation, desc: WhiteheadTransformDescriptor
) -> WhiteheadTransformDescriptor:
    """The descriptor of perm^-1 . t . perm, always again a transform."""
    rank = desc.rank
    aut = compose(
        perm.inverse().to_automorphism(),
        compose(desc.to_automorphism(), perm.to_automorphism()),
    )
    key = tuple(w.codes for w in aut.forward)
    found = transforms_by_images(rank).get(key)
    if found is None:
        raise TheoremViolation(
            f"conjugate of {desc!r} by {perm.targets} is not a Whitehead transform"
        )
    return found


class _State:
    """A tuple of coordinate arrays plus fixed kind flags."""

    __slots__ = ("arrays", "key")

    def __init__(self, arrays):
        self.arrays = arrays
        self.key = (
            tuple(len(a) for a in arrays),
            b"".join(a.tobytes() for a in arrays),
        )


def _canonicalize(arrays, kinds_arr, rank) -> _State:
    lens = [len(a) for a in arrays]
    off = np.zeros(len(arrays) + 1, dtype=np.int64)
    np.cumsum(lens, out=off[1:])
    flat = (
        np.concatenate(arrays) if sum(lens) else np.empty(0, dtype=np.int64)
    )
    best = _kernels.canonical_tuple(flat, off, kinds_arr, relabel_tables(rank), rank)
    out = [best[off[k]:off[k + 1]] for k in range(len(arrays))]
    return _State(out)


def _matching_permutation(arrays, kinds_arr, rank, target: _State) -> SignedPermutation:
    """First enumerated permutation carrying arrays onto the target state."""
    perms = enumerate_signed_permutations(rank)
    tables = relabel_tables(rank)
    for idx, perm in enumerate(perms):
        ok = True
        for a, cyc, want in zip(arrays, kinds_arr, target.arrays):
            cand = _kernels.relabel(a, tables[idx], rank)
            if cyc and len(cand) > 1:
                s = int(_kernels.least_rotation(_kernels.key_codes(cand, rank)))
                cand = np.roll(cand, -s)
            if len(cand) != len(want) or not np.array_equal(cand, want):
                ok = False
                break
        if ok:
            return perm
    raise TheoremViolation("no letter permutation matches the canonical form")


def _wrap_state(state: _State, kinds, rank) -> WordSet:
    out = []
    for a, kind in zip(state.arrays, kinds):
        if kind == "cyclic":
            out.append(CyclicWord(rank, a))
        else:
            out.append(Word.from_array(rank, a))
    return WordSet(rank, tuple(out))


def canonical_form(words: WordSet) -> WordSet:
    """Lex-least letter relabeling, cyclic entries at least rotation."""
    kinds = words.kinds()
    kinds_arr = np.array([k == "cyclic" for k in kinds], dtype=np.int64)
    arrays = [w.array() for w in words]
    state = _canonicalize(arrays, kinds_arr, words.rank)
    return _wrap_state(state, kinds, words.rank)


def canonical_with_permutation(words: WordSet) -> Tuple[WordSet, SignedPermutation]:
    """Canonical form plus the first permutation that reaches it."""
    kinds = words.kinds()
    kinds_arr = np.array([k == "cyclic" for k in kinds], dtype=np.int64)
    arrays = [w.array() for w in words]
    state = _canonicalize(arrays, kinds_arr, words.rank)
    perm = _matching_permutation(arrays, kinds_arr, words.rank, state)
    return _wrap_state(state, kinds, words.rank), perm


@dataclass(frozen=True)
class MinimizeResult:
    minimal: WordSet
    basis: Automorphism
    path: Tuple[WhiteheadTransformDescriptor, ...]
    report: LengthReport


def minimize_tuple(words: WordSet) -> MinimizeResult:
    """Descend to a local (hence global) minimum of the length functional."""
    res: DescentResult = descend(words)
    return MinimizeResult(
        in_coordinates(words, res.basis), res.basis, res.path, res.final
    )


def _bfs_level_set(start: WordSet, limits: SearchLimits, target_key=None):
    """Breadth-first walk of the level set from a canonical start state.

    Returns (visited, parents, found_key); parents[key] holds
    (parent_key, transform_index, permutation) to rebuild chains.
    """
    rank = start.rank
    kinds = start.kinds()
    kinds_arr = np.array([k == "cyclic" for k in kinds], dtype=np.int64)
    tables = transform_tables(rank)
    total = sum(len(w) for w in start)

    root = _State([w.array() for w in start])
    visited = {root.key: root}
    parents = {}
    queue = [root]
    while queue:
        next_queue = []
        for state in queue:
            for t_idx, tt in enumerate(tables):
                cand = []
                clen = 0
                for arr, cyc in zip(state.arrays, kinds_arr):
                    img = _kernels.substitute(arr, tt.fwd_flat, tt.fwd_off, rank)
                    if cyc:
                        lo, hi = _kernels.cyclic_bounds(img)
                        img = img[lo:hi]
                    clen += len(img)
                    cand.append(img)
                if clen != total:
                    continue
                canon = _canonicalize(cand, kinds_arr, rank)
                if canon.key in visited:
                    continue
                if len(visited) >= limits.max_states:
                    raise LimitExceeded(
                        f"level-set search exceeded {limits.max_states} states",
                        states=len(visited),
                        limit=limits.max_states,
                    )
                visited[canon.key] = canon
                parents[canon.key] = (state.key, t_idx)
                if target_key is not None and canon.key == target_key:
                    return visited, parents, canon.key
                next_queue.append(canon)
        queue = next_queue
    return visited, parents, None


def level_set_component(words: WordSet, limits: SearchLimits = SearchLimits()):
    """All canonical tuples reachable by length-preserving transforms."""
    start = canonical_form(words)
    visited, _, _ = _bfs_level_set(start, limits)
    kinds = words.kinds()
    return frozenset(
        _wrap_state(s, kinds, words.rank) for s in visited.values()
    )


@dataclass(frozen=True)
class OrbitCertificate:
    """A verified witness that one tuple maps onto another.

    transforms apply first, in list order; the permutation applies last.
    automorphism is their composition.
    """

    transforms: Tuple[WhiteheadTransformDescriptor, ...]
    permutation: SignedPermutation
    automorphism: Automorphism

    def to_json_dict(self) -> dict:
        return {
            "transforms": [d.to_json_dict() for d in self.transforms],
            "permutation": self.permutation.to_json_dict(),
            "images": [w.to_text() for w in self.automorphism.forward],
        }

    @classmethod
    def from_json_dict(cls, rank: int, obj: dict) -> "OrbitCertificate":
        transforms = tuple(
            WhiteheadTransformDescriptor.from_json_dict(rank, d)
            for d in obj["transforms"]
        )
        perm = SignedPermutation.from_json_dict(rank, obj["permutation"])
        aut = _compose_parts(rank, transforms, perm)
        if [w.to_text() for w in aut.forward] != list(obj["images"]):
            raise ValueError("certificate images do not match its factors")
        return cls(transforms, perm, aut)


def _compose_parts(rank, transforms, permutation) -> Automorphism:
    aut = Automorphism.identity(rank)
    for d in transforms:
        aut = compose(d.to_automorphism(), aut)
    return compose(permutation.to_automorphism(), aut)


def verify_certificate(cert: OrbitCertificate, source: WordSet, image: WordSet) -> bool:
    """Certificate factors compose to its automorphism, which maps
    source to image entrywise."""
    aut = _compose_parts(source.rank, cert.transforms, cert.permutation)
    if aut != cert.automorphism:
        return False
    moved = tuple(aut.apply(w) for w in source)
    return moved == image.words


class _CertificateBuilder:
    """Accumulates factors in application order into (transforms, perm)."""

    def __init__(self, rank):
        self.rank = rank
        self.transforms = []
        self.perm = SignedPermutation.identity(rank)

    def push_transform(self, desc: WhiteheadTransformDescriptor):
        self.transforms.append(_conjugate_descriptor(self.perm, desc))

    def push_permutation(self, perm: SignedPermutation):
        self.perm = perm.compose(self.perm)

    def build(self, source: WordSet, image: WordSet) -> OrbitCertificate:
        aut = _compose_parts(self.rank, tuple(self.transforms), self.perm)
        cert = OrbitCertificate(tuple(self.transforms), self.perm, aut)
        if not verify_certificate(cert, source, image):
            raise TheoremViolation("assembled certificate failed verification")
        return cert


def orbit_equivalent(
    s1: WordSet, s2: WordSet, limits: SearchLimits = SearchLimits()
) -> Optional[OrbitCertificate]:
    """Decide whether some automorphism carries s1 to s2 position by
    position, returning a verified certificate when one exists.

    Raises KindMismatch for incomparable shapes and LimitExceeded when
    the level-set walk overruns its state budget.
    """
    check_same_shape(s1, s2)
    rank = s1.rank

    m1 = minimize_tuple(s1)
    m2 = minimize_tuple(s2)
    if m1.report.total != m2.report.total:
        return None

    c2, perm2 = canonical_with_permutation(m2.minimal)
    c1, perm1 = canonical_with_permutation(m1.minimal)

    root = _State([w.array() for w in c1])
    target = _State([w.array() for w in c2])

    chain = []
    if root.key != target.key:
        visited, parents, found = _bfs_level_set(c1, limits, target_key=target.key)
        if found is None:
            return None
        kinds_arr = np.array([k == "cyclic" for k in s1.kinds()], dtype=np.int64)
        key = found
        while key != root.key:
            parent_key, t_idx = parents[key]
            tt = transform_tables(rank)[t_idx]
            cand = []
            for arr, cyc in zip(visited[parent_key].arrays, kinds_arr):
                img = _kernels.substitute(arr, tt.fwd_flat, tt.fwd_off, rank)
                if cyc:
                    lo, hi = _kernels.cyclic_bounds(img)
                    img = img[lo:hi]
                cand.append(img)
            perm = _matching_permutation(cand, kinds_arr, rank, visited[key])
            chain.append((tt.descriptor, perm))
            key = parent_key
        chain.reverse()

    builder = _CertificateBuilder(rank)
    # descent of s1, inverted: the first descent step is undone first
    for desc in m1.path:
        builder.push_transform(desc.inverse())
    builder.push_permutation(perm1)
    for desc, perm in chain:
        builder.push_transform(desc)
        builder.push_permutation(perm)
    builder.push_permutation(perm2.inverse())
    # descent of s2, replayed forward: earliest step applied last
    for desc in reversed(m2.path):
        builder.push_transform(desc)
    return builder.build(s1, s2)
