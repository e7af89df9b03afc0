import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sl3cert.matrix_group import (
    GeneratorSet,
    GroupElement,
    ball,
    elementary,
    identity,
    inverse,
    mul,
    base_generators,
    standard_generators,
    word_product,
)

GENS = standard_generators()
words = st.lists(st.integers(0, 11), max_size=5)


def element(word):
    return word_product(word, GENS.members)


def test_identity():
    e = identity()
    assert e.rows() == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert e.det() == 1
    for g in GENS:
        assert mul(e, g) == g


def test_mul_examples():
    M1, M2, _ = base_generators()
    assert mul(identity(), M1) == M1
    assert mul(M1, inverse(M1)) == identity()
    assert mul(M1, M2).rows() == [[1, 1, 1], [0, 1, 0], [0, 0, 1]]


def test_inverse_examples():
    M1 = base_generators()[0]
    assert inverse(identity()) == identity()
    assert inverse(M1).rows() == [[1, -1, 0], [0, 1, 0], [0, 0, 1]]


def test_rejects_bad_determinant():
    with pytest.raises(ValueError):
        GroupElement.from_rows([[2, 0, 0], [0, 1, 0], [0, 0, 1]])
    with pytest.raises(ValueError):
        GroupElement([1, 2, 3])


def test_general_size_inverse():
    g = mul(elementary(4, 0, 3, 5), elementary(4, 2, 1, -3))
    assert mul(inverse(g), g) == identity(4)
    assert g.det() == 1


@given(words)
def test_inverse_is_left_inverse(word):
    g = element(word)
    assert mul(inverse(g), g) == identity()


@given(words, words)
def test_inverse_anti_homomorphism(w1, w2):
    g, h = element(w1), element(w2)
    assert inverse(mul(g, h)) == mul(inverse(h), inverse(g))
    assert inverse(inverse(g)) == g


def test_standard_generators():
    assert len(GENS) == 12
    assert not GENS.contains_self_inverse
    e = identity()
    # direct check that no generator squares to the identity
    assert all(mul(g, g) != e for g in GENS)
    for i, g in enumerate(GENS):
        assert mul(GENS[GENS.inverse_index[i]], g) == e
        assert g != e
    expected = {elementary(3, i, j, k) for i in range(3) for j in range(3) if i != j for k in (1, -1)}
    assert set(GENS.members) == expected
    assert list(GENS.members) == sorted(GENS.members, key=lambda g: g.entries)


def test_generator_set_needs_inverses():
    with pytest.raises(ValueError):
        GeneratorSet.from_elements(base_generators())


def _brute_ball(radius):
    """Every product of at most ``radius`` generators, by exhaustive enumeration."""
    out = set()
    for length in range(radius + 1):
        for word in itertools.product(range(12), repeat=length):
            out.add(element(word))
    return out


@pytest.mark.parametrize("radius,size", [(0, 1), (1, 13), (2, 121)])
def test_ball_sizes(radius, size):
    assert len(ball(GENS, radius)) == size


def test_ball1_pairwise_distinct():
    members = list(GENS.members) + [identity()]
    assert all(a != b for a, b in itertools.combinations(members, 2))


def test_ball4_matches_exhaustive_enumeration(ball4):
    # 12^4 + ... words; the size is frozen as a regression constant
    assert set(ball4.elements) == _brute_ball(4)
    assert len(ball4) == 5455


def test_ball_order_and_witnesses(ball3):
    assert ball3.elements[0] == identity()
    keys = [(l, g.entries) for l, g in zip(ball3.lengths, ball3.elements)]
    assert keys == sorted(keys)
    for g, word, length in zip(ball3.elements, ball3.words, ball3.lengths):
        assert len(word) == length
        assert word_product(word, GENS.members) == g


def test_balls_nested_with_shared_prefix(ball2, ball3):
    assert ball3.elements[: len(ball2)] == ball2.elements
    assert ball(GENS, 2) == ball2


def test_det_preserved_on_ball4(ball4):
    assert all(g.det() == 1 for g in ball4)
    assert all(inverse(g).det() == 1 for g in ball4)


def test_doubled_ball_contains_quotients(ball2, ball4):
    invs = [inverse(a) for a in ball2]
    assert all(mul(ai, aj) in ball4 for ai in invs for aj in ball2)


def test_ball_rejects_negative_radius():
    with pytest.raises(ValueError):
        ball(GENS, -1)


BALL3 = ball(GENS, 3)


@given(st.lists(st.integers(0, 11), max_size=3))
def test_products_land_in_ball(word):
    g = element(word)
    assert g in BALL3
    assert BALL3.lengths[BALL3.index_of[g]] <= len(word)
