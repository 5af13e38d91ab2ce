import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lifecap.alignment import AlignmentModel, EmptySentenceWarning, RegionSet, align_score, unary_cost
from lifecap.errors import InvalidInputError


def brute_force_score(regions, words):
    total = 0.0
    for r in regions:
        total += max(sum(a * b for a, b in zip(r, w)) for w in words)
    return total


def test_single_region_single_word():
    model = AlignmentModel({"cat": [1.0, 2.0, -1.0]})
    regions = RegionSet([[0.5, 0.5, 2.0]])
    assert align_score(["cat"], regions, model) == pytest.approx(0.5 + 1.0 - 2.0)


def test_small_integer_case_matches_hand_count():
    # region 1 prefers "b" (5), region 2 prefers "c" (3)
    vecs = {"a": [1, 0, 0], "b": [0, 1, 2], "c": [1, 1, -1]}
    regions = [[1, 1, 2], [2, 1, 0]]
    model = AlignmentModel(vecs)
    got = align_score(["a", "b", "c"], RegionSet(regions), model)
    assert got == brute_force_score(regions, vecs.values()) == 5 + 3


def test_zero_vectors_score_zero():
    model = AlignmentModel({"a": [0, 0], "b": [0, 0]})
    assert align_score(["a", "b"], RegionSet([[3, -1], [2, 2]]), model) == 0.0
    assert unary_cost(["a"], RegionSet([[3, -1]]), model) == 0.0


def test_unary_cost_is_negated_score():
    model = AlignmentModel({"a": [3.5]})
    regions = RegionSet([[1.0]])
    assert align_score(["a"], regions, model) == 3.5
    assert unary_cost(["a"], regions, model) == -3.5


def test_argmin_cost_equals_argmax_score(rng):
    model = AlignmentModel({f"w{i}": rng.standard_normal(4) for i in range(6)})
    regions = RegionSet(rng.standard_normal((3, 4)))
    sentences = [[f"w{i}", f"w{(i + 2) % 6}"] for i in range(6)]
    scores = [align_score(s, regions, model) for s in sentences]
    costs = [unary_cost(s, regions, model) for s in sentences]
    assert int(np.argmin(costs)) == int(np.argmax(scores))


def test_dimension_mismatch():
    model = AlignmentModel({"a": [1.0, 0.0]})
    with pytest.raises(InvalidInputError):
        align_score(["a"], RegionSet([[1.0, 0.0, 0.0]]), model)


def test_unembeddable_sentence_warns_and_scores_zero():
    model = AlignmentModel({"a": [1.0]})
    with pytest.warns(EmptySentenceWarning):
        assert align_score(["zzz"], RegionSet([[1.0]]), model) == 0.0


def test_oov_dropped_by_default():
    model = AlignmentModel({"a": [1.0, 1.0]})
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert align_score(["a", "unknown"], RegionSet([[1.0, 0.0]]), model) == 1.0


def test_region_set_validation():
    with pytest.raises(InvalidInputError):
        RegionSet(np.zeros((0, 3)))
    with pytest.raises(InvalidInputError):
        RegionSet([[1.0, np.nan]])


def test_word_vector_file_round_trip(tmp_path, rng):
    model = AlignmentModel({w: rng.standard_normal(3) for w in ["x", "y", "z"]})
    model.save(tmp_path / "wv.txt")
    again = AlignmentModel.load(tmp_path / "wv.txt")
    for w in model.vectors:
        np.testing.assert_array_equal(model.vectors[w], again.vectors[w])


vec = st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=3)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_word_order_and_multiplicity_invariance(data):
    words = data.draw(st.lists(vec, min_size=1, max_size=4))
    regions = data.draw(st.lists(vec, min_size=1, max_size=4))
    model = AlignmentModel({f"w{i}": v for i, v in enumerate(words)})
    sentence = [f"w{i}" for i in range(len(words))]
    shuffled = data.draw(st.permutations(sentence)) + sentence[:1]
    rs = RegionSet(regions)
    assert align_score(sentence, rs, model) == pytest.approx(align_score(shuffled, rs, model))


@settings(max_examples=200, deadline=None)
@given(st.data(), st.integers(1, 8))
def test_adding_a_word_never_lowers_the_score(data, dim):
    v = st.lists(st.floats(-5, 5, allow_nan=False), min_size=dim, max_size=dim)
    words = data.draw(st.lists(v, min_size=2, max_size=6))
    regions = RegionSet(data.draw(st.lists(v, min_size=1, max_size=5)))
    model = AlignmentModel({f"w{i}": w for i, w in enumerate(words)})
    sentence = [f"w{i}" for i in range(len(words))]
    assert align_score(sentence, regions, model) >= align_score(sentence[:-1], regions, model)
