import random
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import overlap_conditions_oracle, random_markers, scan_oracle
from markercoe.graph import rose, theta
from markercoe.marker import (
    MarkerCoe,
    MarkerData,
    MarkerError,
    apply_point,
    apply_prefix,
    check_overlap_conditions,
    cocycle_pair,
    determined_image,
    f_bar,
    f_phi,
    good_representative,
    inner_swap,
    is_valid_marker,
    overlap_violations,
    type_one,
    type_two,
)
from markercoe.words import EpPoint, cyclic_class, enumerate_primitive_classes, is_primitive

R2 = rose(2)
PHI = check_overlap_conditions(R2, type_one((0,), (), (1,)))  # m=a, D={o, b}
A, B = 0, 1


def cls(*w):
    return cyclic_class(None, w)


def test_simple_marker_is_valid():
    assert overlap_violations(R2, PHI.data) == []
    assert PHI.a == (A, A) and PHI.b == (A, B, A)
    assert PHI.contraction == (2, 3)


def test_invalid_marker_reports_subword():
    with pytest.raises(MarkerError) as err:
        check_overlap_conditions(R2, type_one((0,), (), (0,)))
    assert err.value.violations


def test_structural_errors():
    with pytest.raises(MarkerError):
        check_overlap_conditions(R2, type_one((0,), (1,), (1,)))
    with pytest.raises(MarkerError):
        check_overlap_conditions(R2, type_one((), (0,), (1,)))
    with pytest.raises(MarkerError):
        check_overlap_conditions(theta(), type_one((0,), (1,), ()))  # e1 e2 is not a path
    with pytest.raises(MarkerError):
        MarkerData.from_json({"kind": "II", "m": [0], "d": [], "d2": [1]})


def test_type_two_on_theta():
    g = theta()
    # m=e1, m'=f1, D={o, f2 e2}
    data = type_two(0, 2, (), (3, 1))
    assert data.kind == "II"
    assert is_valid_marker(g, data) == overlap_conditions_oracle(data)


@given(st.integers(1, 2), st.lists(st.integers(0, 1), max_size=4), st.lists(st.integers(0, 1), max_size=4))
def test_type_one_validity_matches_definition(mlen, d, d2):
    m = (0,) * mlen
    data = type_one(m, d, d2)
    if tuple(d) == tuple(d2):
        return
    assert is_valid_marker(R2, data) == overlap_conditions_oracle(data)


def test_type_one_validity_exhaustive_rose2():
    words = [w for n in range(0, 4) for w in product((0, 1), repeat=n)]
    for m in [(0,), (1,), (0, 1), (1, 1, 0)]:
        for d, d2 in product(words, repeat=2):
            if d != d2:
                data = type_one(m, d, d2)
                assert is_valid_marker(R2, data) == overlap_conditions_oracle(data)


def test_apply_prefix_examples():
    assert apply_prefix(R2, PHI, (A, A, B), 2) == (A, B)
    assert apply_prefix(R2, PHI, (B, B, B), 2) == (B, B)
    with pytest.raises(MarkerError):
        apply_prefix(R2, PHI, (A, A, B), 3)
    # c|x| = 6 but the last letter depends on the continuation
    with pytest.raises(MarkerError):
        apply_prefix(R2, PHI, (A, B) * 5, 6)


@given(st.lists(st.integers(0, 1), max_size=20).map(tuple), st.lists(st.integers(0, 1), min_size=8, max_size=8))
def test_determined_image_is_shared_by_extensions(x, tail):
    out = determined_image(PHI, x)
    y = x + tuple(tail)
    ext = scan_oracle(PHI.data, lambda i: y[i] if i < len(y) else 0, len(out))
    assert tuple(ext) == out


def test_apply_prefix_twice_recovers_input():
    rng = random.Random(3)
    num, den = PHI.contraction
    for _ in range(200):
        n = rng.randint(6, 30)
        x = tuple(rng.randrange(2) for _ in range(n))
        once = determined_image(PHI, x)
        assert apply_prefix(R2, PHI, x, min(len(once), num * n // den)) == once[:num * n // den]
        back = determined_image(PHI, once)
        assert back == x[:len(back)]
        # the image is never shorter than half the input for this marker
        assert 2 * len(once) >= n - 2


def test_apply_point_examples():
    assert apply_point(PHI, EpPoint.make((), (A,))) == EpPoint.make((), (A, B))
    assert apply_point(PHI, EpPoint.make((), (B,))) == EpPoint.make((), (B,))
    img = apply_point(PHI, EpPoint.make((), (A, A, B)))
    assert img.cyclic_class() == cls(A, A, B)


def test_good_representatives():
    assert good_representative(PHI, cls(A, A, B)) == (A, A, B)
    assert good_representative(PHI, cls(A)) == (A,)
    assert good_representative(PHI, cls(B)) == (B,)


def test_f_phi_examples():
    assert f_phi(PHI, cls(A)) == cls(A, B)
    assert f_phi(PHI, cls(A, B)) == cls(A)
    assert f_phi(PHI, cls(A, A, B)) == cls(A, A, B)
    assert f_bar(PHI, (A,)) == (A, B)
    with pytest.raises(MarkerError):
        f_phi(PHI, cls(A, A))


def test_cocycle_examples():
    assert cocycle_pair(PHI, EpPoint.make((), (A,))) == (0, 2)
    assert cocycle_pair(PHI, EpPoint.make((), (B,))) == (0, 1)
    assert cocycle_pair(PHI, EpPoint.make((), (A, B))) == (1, 1)


def test_inner_swap():
    x, y = EpPoint.make((), (A,)), EpPoint.make((B,), (A,))
    s = inner_swap(x, y)
    assert s.w1[:1] == (A,) and s.w2[:2] == (B, A)
    assert not (s.w1 == s.w2[:len(s.w1)] or s.w2 == s.w1[:len(s.w2)])
    assert s.acts_on_class(cls(A, B)) == cls(A, B)
    assert inner_swap(x, x).identity
    with pytest.raises(MarkerError):
        inner_swap(x, EpPoint.make((), (B,)))


@pytest.fixture(scope="module")
def markers():
    return [(g, [MarkerCoe(m) for m in random_markers(g, 8, seed=21)]) for g in (rose(2), rose(3), theta())]


def _points(g, rng, count):
    classes = enumerate_primitive_classes(g, 5)
    out = []
    for _ in range(count):
        c = rng.choice(classes).rep
        # prefix: random walk ending where the cycle starts
        for _ in range(50):
            n = rng.randint(0, 4)
            pre = []
            v = rng.randrange(g.num_vertices)
            for _ in range(n):
                e = rng.choice(g.out_edges(v))
                pre.append(e)
                v = g.dst[e]
            if v == g.src[c[0]]:
                break
        else:
            pre = []
        out.append(EpPoint.make(tuple(pre), c))
    return out


def test_apply_point_matches_naive_scan(markers):
    rng = random.Random(5)
    for g, phis in markers:
        for phi in phis:
            for x in _points(g, rng, 20):
                y = apply_point(phi, x)
                assert list(y.letters(60)) == scan_oracle(phi.data, lambda i: x.letters(i + 1)[i], 60)


def test_apply_point_is_an_involution(markers):
    rng = random.Random(6)
    for g, phis in markers:
        for phi in phis:
            for x in _points(g, rng, 20):
                assert apply_point(phi, apply_point(phi, x)) == x


def test_cocycle_identity(markers):
    rng = random.Random(7)
    for g, phis in markers:
        for phi in phis:
            for x in _points(g, rng, 20):
                k, l = cocycle_pair(phi, x)
                assert apply_point(phi, x.shift(1)).shift(k) == apply_point(phi, x).shift(l)


def test_f_phi_agrees_with_periodic_points(markers):
    for g, phis in markers:
        for phi in phis:
            for c in enumerate_primitive_classes(g, 7):
                image = f_phi(phi, c)
                assert is_primitive(image.rep)
                assert apply_point(phi, EpPoint.make((), c.rep)).cyclic_class() == image
                assert f_phi(phi, image) == c


def test_json_roundtrip():
    assert MarkerData.from_json(PHI.to_json()) == PHI.data
    assert MarkerData.from_json('{"m": [0], "d": [], "d2": [1]}') == PHI.data
