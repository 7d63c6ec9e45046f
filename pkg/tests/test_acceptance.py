"""End-to-end acceptance checks at desk scale (rank <= 3, short words).

Each check prints one summary line; run ``pytest -s tests/test_acceptance.py``
to see the lines on success.  Stated wall-clock budgets are asserted, so a
pathologically slow environment fails loudly rather than silently dragging.

Every randomized check is seeded and therefore reproducible.
"""

import itertools
import random
import time

from whitehead.bases import (
    Automorphism,
    is_basis,
    signed_permutation_match,
)
from whitehead.cayley_gersten import (
    build_gersten_graph,
    distance,
    is_translator,
    krstic_translator,
    left_geodesic,
    represent,
)
from whitehead.errors import LimitExceeded
from whitehead.lengthfn import (
    WordSet,
    descend,
    in_coordinates,
    is_local_minimum,
    length_report,
    total_length,
)
from whitehead.peak_reduction import Equal, peak_reduce
from whitehead.search import (
    SearchLimits,
    canonical_form,
    level_set_component,
    orbit_equivalent,
    verify_certificate,
)
from whitehead.words import Word, multiply

from helpers import random_automorphism, random_cyclic_word, random_word


def _ok(num, detail):
    print(f"ACCEPTANCE {num}: PASS  ({detail})")


def _random_word_set(rank, rng, max_words=3, max_len=6):
    words = []
    for _ in range(rng.randint(1, max_words)):
        length = rng.randint(1, max_len)
        if rng.random() < 0.5:
            words.append(random_word(rank, length, rng))
        else:
            words.append(random_cyclic_word(rank, length, rng))
    return WordSet(rank, tuple(words))


def test_01_commutator_square_pair_and_single_word_certificate():
    t0 = time.monotonic()
    comm = WordSet.parse(2, ["~abAB"])
    square = WordSet.parse(2, ["~aabb"])
    ident = Automorphism.identity(2)
    assert total_length(comm, ident) == 4 and is_local_minimum(comm, ident)
    assert total_length(square, ident) == 4 and is_local_minimum(square, ident)
    assert orbit_equivalent(comm, square) is None
    t1 = time.monotonic()

    src = WordSet.parse(2, ["abb"])
    dst = WordSet.parse(2, ["a"])
    cert = orbit_equivalent(src, dst)
    assert cert is not None
    assert verify_certificate(cert, src, dst)
    t2 = time.monotonic()

    assert t1 - t0 < 1.0
    assert t2 - t1 < 1.0
    _ok(1, f"negative {t1 - t0:.3f}s, positive {t2 - t1:.3f}s")


def test_02_random_image_pairs_all_yield_certificates():
    rng = random.Random(20260802)
    t0 = time.monotonic()
    for trial in range(200):
        rank = rng.choice([2, 3])
        s = _random_word_set(rank, rng)
        phi = random_automorphism(rank, rng.randint(0, 6), rng)
        t = WordSet(rank, tuple(phi.apply(w) for w in s.words))
        # default limits throughout: the state budget must never be hit
        cert = orbit_equivalent(s, t)
        assert cert is not None, f"trial {trial}: no certificate"
        assert verify_certificate(cert, s, t), f"trial {trial}: bad certificate"
    elapsed = time.monotonic() - t0
    assert elapsed < 120.0
    _ok(2, f"200 pairs certified in {elapsed:.1f}s, default state budget")


def test_03_krstic_translator_always_passes_the_checker():
    rng = random.Random(20260803)
    t0 = time.monotonic()
    for _ in range(500):
        rank = rng.choice([2, 3])
        x = random_automorphism(rank, rng.randint(0, 4), rng)
        y = random_automorphism(rank, rng.randint(0, 4), rng)
        v = krstic_translator(x, y)
        assert is_translator(x, y, v)
    elapsed = time.monotonic() - t0
    assert elapsed < 60.0
    _ok(3, f"500 basis pairs in {elapsed:.1f}s")


def test_04_traversal_marginals_match_length_reports_exactly():
    rng = random.Random(20260804)
    checked = 0
    for _ in range(100):
        rank = rng.choice([2, 3])
        words = _random_word_set(rank, rng, max_words=2, max_len=8)
        x = random_automorphism(rank, rng.randint(0, 3), rng)
        y = random_automorphism(rank, rng.randint(0, 3), rng)
        graph = build_gersten_graph(x, y, krstic_translator(x, y))
        counts = represent(words, graph).counts
        rep_x = length_report(words, x)
        rep_y = length_report(words, y)
        for i in range(1, rank + 1):
            assert counts.x_marginal(i) == rep_x.per_letter[i - 1]
            assert counts.y_marginal(i) == rep_y.per_letter[i - 1]
            checked += 2
    _ok(4, f"{checked} per-letter marginals, exact integer equality")


def test_05_peak_reduction_strictly_descends_to_agreement():
    rng = random.Random(20260805)
    lim = SearchLimits(max_states=200_000)
    t0 = time.monotonic()
    processed = 0
    attempts = 0
    cases = {1: 0, 2: 0}
    while processed < 50:
        attempts += 1
        assert attempts < 4000, "pair generation stalled"
        words = _random_word_set(2, rng, max_words=2, max_len=8)
        x = descend(words, start=random_automorphism(2, rng.randint(0, 4), rng)).basis
        y = descend(words, start=random_automorphism(2, rng.randint(0, 4), rng)).basis
        if total_length(words, x) != total_length(words, y):
            continue
        if signed_permutation_match(x, y) is not None:
            continue
        try:
            d0 = distance(x, y, limits=lim).distance
        except LimitExceeded:
            continue

        cur, d, steps = y, d0, 0
        h0 = total_length(words, y)
        while True:
            res = peak_reduce(x, cur, words, limits=lim)
            if isinstance(res, Equal):
                break
            steps += 1
            assert steps <= d0, "more steps than the initial distance"
            cases[res.case] += 1
            assert total_length(words, res.y_prime) == h0
            # recompute the distance from scratch; the step must shrink it
            nd = distance(x, res.y_prime, limits=lim).distance
            assert nd < d
            cur, d = res.y_prime, nd
        processed += 1
    elapsed = time.monotonic() - t0
    assert elapsed < 300.0
    assert cases[1] > 0
    _ok(
        5,
        f"{processed} pairs, case splits {cases}, "
        f"{attempts} candidates, {elapsed:.1f}s",
    )


def test_06_distance_anchors():
    rng = random.Random(20260806)
    for _ in range(10):
        x = random_automorphism(2, rng.randint(0, 3), rng)
        assert distance(x, x).distance == 0

    ident = Automorphism.identity(2)
    y = Automorphism.from_images(2, [Word.parse(2, "ab"), Word.parse(2, "b")])
    res = distance(ident, y)
    assert res.distance == 1
    assert {w.to_text() or "1" for w in res.witness} == {"1", "b", "ab"}

    one = Automorphism.identity(1)
    neg = Automorphism.from_images(1, [Word.parse(1, "A")])
    assert distance(one, neg).distance == 0
    _ok(6, "d(X,X)=0, d(1,(ab,b))=1 with witness {1,b,ab}, rank-1 d=0")


def _stack_reduce(codes):
    out = []
    for c in codes:
        if out and out[-1] == -c:
            out.pop()
        else:
            out.append(c)
    return tuple(out)


def test_07_products_cancel_and_tree_paths_agree():
    rng = random.Random(20260807)
    for _ in range(1000):
        rank = rng.choice([1, 2, 3])
        u = random_word(rank, rng.randint(0, 12), rng)
        v = random_word(rank, rng.randint(0, 12), rng)
        assert multiply(u, u.inverse()).is_identity()
        prod = multiply(u, v)
        assert prod.codes == _stack_reduce(u.codes + v.codes)
        # left-tree edges multiply on the left, so the geodesic from
        # v^-1 to u spells out u.v
        path = left_geodesic(Automorphism.identity(rank), v.inverse(), u)
        assert len(path) - 1 == len(prod)
    _ok(7, "1000 words: products cancel, geodesic lengths agree")


def _abelian_det(rank, images):
    m = [[0] * rank for _ in range(rank)]
    for j, w in enumerate(images):
        for c in w.codes:
            m[abs(c) - 1][j] += 1 if c > 0 else -1
    if rank == 1:
        return m[0][0]
    if rank == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def _nielsen_pair_is_basis(u, v):
    """Greedy length reduction by elementary pair moves, rank 2 only.

    A generating pair of total length above 2 always admits a strictly
    shortening move, so stalling above that length settles the question.
    """
    cur = (u, v)
    while True:
        a, b = cur
        if a.is_identity() or b.is_identity():
            return False
        if len(a) + len(b) == 2:
            return abs(a.codes[0]) != abs(b.codes[0])
        total = len(a) + len(b)
        nxt = None
        for t in (b, b.inverse()):
            for cand in (multiply(a, t), multiply(t, a)):
                if len(cand) + len(b) < total:
                    nxt = (cand, b)
        for t in (a, a.inverse()):
            for cand in (multiply(b, t), multiply(t, b)):
                if len(a) + len(cand) < total:
                    nxt = (a, cand)
        if nxt is None:
            return False
        cur = nxt


def _all_words(rank, max_len):
    yield Word.identity(rank)
    letters = [c for i in range(1, rank + 1) for c in (i, -i)]
    frontier = [(c,) for c in letters]
    for _ in range(max_len):
        nxt = []
        for codes in frontier:
            yield Word(rank, codes)
            nxt.extend(codes + (c,) for c in letters if c != -codes[-1])
        frontier = nxt


def test_08_basis_test_against_determinant_and_pair_reduction():
    rng = random.Random(20260808)
    basis_hits = 0
    for _ in range(500):
        rank = rng.choice([2, 3])
        images = tuple(
            random_word(rank, rng.randint(0, 6), rng) for _ in range(rank)
        )
        if is_basis(rank, images):
            basis_hits += 1
            assert abs(_abelian_det(rank, images)) == 1
    assert basis_hits > 0

    two = 0
    agree = 0
    short = [w for w in _all_words(2, 6)]
    for u, v in itertools.product(short, short):
        if len(u) + len(v) > 6:
            continue
        two += 1
        expect = _nielsen_pair_is_basis(u, v)
        assert is_basis(2, (u, v)) == expect
        agree += 1
    assert two == agree
    _ok(
        8,
        f"500 random tuples ({basis_hits} bases) vs determinant, "
        f"{two} exhaustive rank-2 pairs vs greedy reduction",
    )


def test_09_commutator_minima_share_one_component():
    rng = random.Random(20260809)
    relator = WordSet.parse(2, ["~abAB"])
    component = level_set_component(relator)
    for _ in range(100):
        start = random_automorphism(2, rng.randint(0, 4), rng)
        basis = descend(relator, start=start).basis
        assert is_local_minimum(relator, basis)
        assert canonical_form(in_coordinates(relator, basis)) in component
    _ok(9, f"100 descents, component size {len(component)}")
