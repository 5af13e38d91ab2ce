import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lifecap.errors import UndefinedScoreError
from lifecap.metrics import EvalPair, bleu_n, cider, meteor, report_from_scores, rouge_l, summarize, tokenize
from lifecap.metrics.bleu import sentence_stats
from lifecap.metrics.cider import document_frequency
from lifecap.metrics.meteor import align, count_chunks, load_synonyms, meteor_sentence
from lifecap.metrics.rouge import lcs_length
from lifecap.metrics.stem import porter_stem
from oracles import lcs_recursive


def pairs(*items):
    return [EvalPair.make(c, refs) for c, refs in items]


class TestTokenize:
    def test_lowercase_and_punctuation(self):
        assert tokenize("A man, sitting at a Table.") == ("a", "man", "sitting", "at", "a", "table")

    def test_inner_punctuation_kept(self):
        assert tokenize("it's a t-shirt!") == ("it's", "a", "t-shirt")

    def test_pure_punctuation_dropped(self):
        assert tokenize("hello , world ...") == ("hello", "world")


class TestPorter:
    # examples printed alongside the original rule definitions
    @pytest.mark.parametrize(
        "word,stem",
        [
            ("caresses", "caress"), ("ponies", "poni"), ("ties", "ti"), ("cats", "cat"),
            ("feed", "feed"), ("agreed", "agre"), ("plastered", "plaster"), ("bled", "bled"),
            ("motoring", "motor"), ("sing", "sing"), ("conflated", "conflat"), ("troubled", "troubl"),
            ("sized", "size"), ("hopping", "hop"), ("tanned", "tan"), ("falling", "fall"),
            ("hissing", "hiss"), ("fizzed", "fizz"), ("failing", "fail"), ("filing", "file"),
            ("happy", "happi"), ("sky", "sky"), ("relational", "relat"), ("conditional", "condit"),
            ("rational", "ration"), ("valenci", "valenc"), ("digitizer", "digit"),
            ("vietnamization", "vietnam"), ("predication", "predic"), ("operator", "oper"),
            ("feudalism", "feudal"), ("decisiveness", "decis"), ("hopefulness", "hope"),
            ("sensibiliti", "sensibl"), ("triplicate", "triplic"), ("formative", "form"),
            ("electrical", "electr"), ("goodness", "good"), ("revival", "reviv"),
            ("allowance", "allow"), ("inference", "infer"), ("adjustable", "adjust"),
            ("replacement", "replac"), ("adoption", "adopt"), ("communism", "commun"),
            ("effective", "effect"), ("bowdlerize", "bowdler"), ("probate", "probat"),
            ("rate", "rate"), ("cease", "ceas"), ("controll", "control"), ("roll", "roll"),
            ("generalizations", "gener"), ("dogs", "dog"), ("running", "run"), ("runs", "run"),
        ],
    )
    def test_reference_examples(self, word, stem):
        assert porter_stem(word) == stem


class TestBleu:
    def test_identity(self):
        p = pairs(("i am eating lunch with friends", ["i am eating lunch with friends"]))
        for n in (1, 2, 3, 4):
            assert bleu_n(p, n) == 1.0

    def test_disjoint(self):
        assert bleu_n(pairs(("x y z", ["a b c"])), 1) == 0.0

    def test_brevity(self):
        # p1 = 1, c = 4, r = 7: BP = exp(1 - 7/4)
        got = bleu_n(pairs(("a man is sitting", ["a man is sitting at a table"])), 1)
        assert abs(got - math.exp(-0.75)) < 1e-9

    def test_clipping(self):
        # "the" is clipped to its single reference occurrence: 1/3, no brevity penalty (c=3 > r=2)
        assert abs(bleu_n(pairs(("the the the", ["the cat"])), 1) - 1 / 3) < 1e-9

    def test_bleu2_hand(self):
        # unigrams 3/3, bigrams: "a b" hit, "b d" miss -> 1/2; c = r = 3
        got = bleu_n(pairs(("a b d", ["a b e d", "a b c"])), 2)
        assert got == pytest.approx(math.sqrt(1.0 * 0.5))

    def test_closest_reference_length(self):
        # refs of length 2 and 6, candidate length 3 -> r = 2, no penalty
        got = bleu_n(pairs(("a b c", ["a b", "a b c d e f"])), 1)
        assert got == pytest.approx(1.0)

    def test_corpus_pools_counts(self):
        p = pairs(("a b", ["a b"]), ("c d", ["c e"]))
        # unigram matches 3 of 4 across the corpus
        assert bleu_n(p, 1) == pytest.approx(0.75)
        assert bleu_n(p, 1, sentence_level=True) == pytest.approx((1.0 + 0.5) / 2)

    def test_empty_corpus(self):
        with pytest.raises(UndefinedScoreError):
            bleu_n([], 1)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.sampled_from("abcde"), min_size=1, max_size=6), st.sampled_from("abcde"), st.integers(1, 4))
    def test_clipped_numerator_never_grows(self, cand, tok, extra):
        ref = ("a", "b", "c", "a")
        cap = ref.count(tok)
        padded = list(cand)
        while padded.count(tok) < cap:
            padded.append(tok)
        before = sentence_stats(tuple(padded), [ref], 1)[0][0]
        after = sentence_stats(tuple(padded + [tok] * extra), [ref], 1)[0][0]
        assert after == before


class TestCider:
    def test_two_pair_hand_computation(self):
        # N = 2; df: a=2, every other reference n-gram 1; L = log 2.
        # pair 1, n=1: cand {a:0, b:2L}, ref {a:0, b:L, c:L}      -> cos 1/sqrt(2)
        #         n=2: cand {ab:L, bb:L}, ref {ab:L, bc:L}         -> cos 1/2
        #         n=3: cand {abb:L}, ref {abc:L}                   -> 0
        # pair 2, n=1: cand {d:L}, ref {a:0, d:L}                  -> 1
        expected = (10 * (1 / math.sqrt(2) + 0.5) / 4 + 10 * 1.0 / 4) / 2
        got = cider(pairs(("a b b", ["a b c"]), ("d", ["a d"])))
        assert abs(got - expected) < 1e-9

    def test_single_pair_corpus_has_zero_idf(self):
        assert cider(pairs(("a man eating", ["a man eating"]))) == 0.0

    def test_self_similarity_with_distinctive_ngrams(self):
        p = pairs(("a b c d", ["a b c d"]), ("e f g h", ["e f g h"]))
        assert cider(p) == pytest.approx(10.0)

    def test_disjoint(self):
        assert cider(pairs(("x y", ["a b"]), ("c d", ["e f"]))) == 0.0

    def test_ubiquitous_ngram_has_zero_weight(self):
        p = pairs(("the", ["the cat"]), ("the", ["the dog"]))
        df = document_frequency(p)
        assert df[("the",)] == 2
        assert cider(p) == 0.0


class TestMeteor:
    def test_stem_stage_hand_value(self):
        # both unigrams align at the stem stage: P = R = 1, one chunk of 2
        expected = 1.0 * (1 - 0.5 * (1 / 2) ** 3)
        got = meteor(pairs(("dogs running", ["dog runs"])))
        assert abs(got - expected) < 1e-9

    def test_identity(self):
        got = meteor_sentence(tokenize("a man sitting"), tokenize("a man sitting"))
        assert got == pytest.approx(1 - 0.5 / 27)

    def test_disjoint(self):
        assert meteor(pairs(("cat", ["dog"]))) == 0.0

    def test_fragmentation(self):
        # 4 matches in 2 chunks: P = R = 1, penalty 0.5 * (2/4)^3
        got = meteor_sentence(tokenize("c d a b"), tokenize("a b c d"))
        assert got == pytest.approx(1 - 0.5 * 0.125)

    def test_partial_hand_value(self):
        # m = 2 of cand 3, ref 4: P = 2/3, R = 1/2, one chunk
        p, r = 2 / 3, 1 / 2
        fmean = 10 * p * r / (r + 9 * p)
        expected = fmean * (1 - 0.5 * (1 / 2) ** 3)
        got = meteor_sentence(tokenize("a man walking"), tokenize("a man is eating"))
        assert abs(got - expected) < 1e-9

    def test_synonym_stage(self, tmp_path):
        f = tmp_path / "syn.txt"
        f.write_text("laptop notebook\n")
        syn = load_synonyms(f)
        assert meteor(pairs(("notebook", ["laptop"]))) == 0.0
        assert meteor(pairs(("notebook", ["laptop"])), synonyms=syn) == pytest.approx(1 - 0.5)

    def test_exact_before_stem(self):
        m = align(("run", "runs"), ("runs", "run"))
        assert m == {0: 1, 1: 0}
        assert count_chunks(m) == 2

    def test_best_reference(self):
        got = meteor(pairs(("a b", ["x y", "a b"])))
        assert got == pytest.approx(1 - 0.5 / 8)


class TestRouge:
    def test_hand_example(self):
        r = p = 3 / 4
        expected = (1 + 1.2**2) * r * p / (r + 1.2**2 * p)
        assert abs(rouge_l(pairs(("a b c d", ["a c d e"]))) - expected) < 1e-9

    def test_identity_and_disjoint(self):
        assert rouge_l(pairs(("a b c", ["a b c"]))) == 1.0
        assert rouge_l(pairs(("a b c", ["d e"]))) == 0.0

    def test_unequal_lengths(self):
        # LCS 2, P = 2/2, R = 2/5
        p, r = 1.0, 0.4
        expected = (1 + 1.44) * r * p / (r + 1.44 * p)
        assert rouge_l(pairs(("a b", ["a x b y z"]))) == pytest.approx(expected)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.sampled_from("abcd"), max_size=8), st.lists(st.sampled_from("abcd"), max_size=8))
    def test_lcs_matches_recursive_oracle(self, a, b):
        assert lcs_length(a, b) == lcs_recursive(tuple(a), tuple(b))
        assert lcs_length(a, a) == len(a)


sentences = st.lists(st.sampled_from("abcdef"), min_size=1, max_size=6).map(" ".join)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(sentences, st.lists(sentences, min_size=1, max_size=3)), min_size=1, max_size=4), st.randoms())
def test_reference_permutation_invariance(corpus, rnd):
    shuffled = [(c, rnd.sample(refs, len(refs))) for c, refs in corpus]
    a, b = summarize(corpus), summarize(shuffled)
    for x, y in zip(a.scores, b.scores):
        assert x == pytest.approx(y, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(sentences, st.lists(sentences, min_size=1, max_size=3)), min_size=1, max_size=4))
def test_score_ranges(corpus):
    rep = summarize(corpus)
    for name in ("bleu1", "bleu2", "bleu3", "bleu4", "meteor", "rouge_l"):
        assert 0.0 <= getattr(rep, name) <= 1.0 + 1e-12
    assert rep.cider >= 0.0


class TestSummarize:
    @pytest.mark.parametrize(
        "scores,mean",
        [
            ((0.669, 0.472, 0.324, 0.218, 0.257, 0.209, 0.462), 0.373),
            ((0.561, 0.354, 0.206, 0.118, 0.143, 0.149, 0.374), 0.272),
            ((0, 0, 0, 0, 0, 0, 0), 0.0),
        ],
    )
    def test_mean(self, scores, mean):
        assert report_from_scores(scores).mean == pytest.approx(mean, abs=5e-4)

    def test_mean_is_naive_average(self):
        rep = report_from_scores([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7])
        assert rep.mean == sum(rep.scores) / 7

    def test_perfect_corpus(self):
        rep = summarize([("i am having dinner with my friends", ["i am having dinner with my friends"])])
        assert rep.bleu1 == rep.bleu4 == rep.rouge_l == 1.0

    def test_table_row(self):
        row = report_from_scores((0.669, 0.472, 0.324, 0.218, 0.257, 0.209, 0.462)).table_row("Lifelog")
        assert row.endswith("0.373")
