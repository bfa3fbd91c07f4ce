import numpy as np
import pytest

from evex.corpus import Mention
from evex.distsup import (
    NONE_LABEL,
    ArgumentCandidate,
    TriggerExample,
    find_occurrences,
    gold_trigger_spans,
    sample_negatives,
)
from evex.errors import ValidationError
from evex.models import (
    ARGUMENT,
    TRIGGER,
    CnnModel,
    Featurizer,
    TrainConfig,
    TriggerPrediction,
    clamped_distance,
    predict_arguments,
    predict_triggers,
    train,
    _to_instance,
)
from evex.neuralnet import PF_CLAMP, PF_DIM, PF_ROWS, LayerStack

from conftest import corpus_of_texts, make_sentence

FIG2_TEXT = "focus on relief and recovery efforts"
FIG2_TOKENS = FIG2_TEXT.split()
RELIEF = FIG2_TOKENS.index("relief")


class TestFeaturizer:
    def test_figure_sentence_distances(self):
        assert clamped_distance(FIG2_TOKENS.index("on"), RELIEF) == -1
        assert clamped_distance(FIG2_TOKENS.index("recovery"), RELIEF) == +2

    def test_own_position_zero(self):
        assert clamped_distance(RELIEF, RELIEF) == 0

    def test_clamped_long_sentence(self):
        assert clamped_distance(99, 0) == PF_CLAMP
        assert clamped_distance(0, 99) == -PF_CLAMP

    def test_trigger_instance_shape(self):
        featurizer = Featurizer(["on", "relief", "recovery"])
        inst = featurizer.featurize_trigger(FIG2_TOKENS, RELIEF)
        assert inst.word_ids.shape == (6,)
        assert list(inst.pf_trigger_ids) == [
            clamped_distance(j, RELIEF) + PF_CLAMP for j in range(6)
        ]
        assert inst.lex_ids.shape == (3,)
        assert inst.pf_arg_ids is None

    def test_unknown_words_map_to_unk(self):
        featurizer = Featurizer(["relief"])
        inst = featurizer.featurize_trigger(FIG2_TOKENS, RELIEF)
        assert inst.word_ids[0] == featurizer.unk_id
        assert inst.word_ids[RELIEF] == 0

    def test_window_padding_at_boundaries(self):
        featurizer = Featurizer(["a", "b"])
        inst = featurizer.featurize_trigger(["a", "b"], 0)
        assert inst.lex_ids[0] == featurizer.pad_id
        inst = featurizer.featurize_trigger(["a", "b"], 1)
        assert inst.lex_ids[2] == featurizer.pad_id

    def test_argument_instance_channels(self):
        featurizer = Featurizer(FIG2_TOKENS)
        inst = featurizer.featurize_argument(FIG2_TOKENS, RELIEF, mention_head=4)
        assert inst.pf_arg_ids is not None
        assert inst.lex_ids.shape == (6,)
        assert inst.pf_arg_ids[4] == PF_CLAMP  # distance 0 at the head

    def test_position_feature_table_shape(self):
        # per-token channel widths: d_word + 5 (+5 for arguments)
        assert PF_DIM == 5
        assert PF_ROWS == 62  # 61 clamped distances + padding row

    def test_mention_identical_to_trigger(self):
        featurizer = Featurizer(FIG2_TOKENS)
        inst = featurizer.featurize_argument(FIG2_TOKENS, RELIEF, RELIEF)
        assert inst.pf_trigger_ids[RELIEF] == PF_CLAMP
        assert inst.pf_arg_ids[RELIEF] == PF_CLAMP

    def test_pf_antisymmetry_before_clamping(self):
        for i in range(8):
            for j in range(8):
                assert (j - i) == -(i - j)
                if abs(i - j) <= PF_CLAMP:
                    assert clamped_distance(j, i) == -clamped_distance(i, j)

    def test_featurization_pure(self):
        featurizer = Featurizer(FIG2_TOKENS)
        a = featurizer.featurize_trigger(FIG2_TOKENS, RELIEF)
        b = featurizer.featurize_trigger(FIG2_TOKENS, RELIEF)
        assert np.array_equal(a.word_ids, b.word_ids)
        assert np.array_equal(a.pf_trigger_ids, b.pf_trigger_ids)

    def test_anchor_out_of_range_rejected(self):
        with pytest.raises(ValidationError):
            Featurizer(["a"]).featurize_trigger(["a"], 5)


def separable_trigger_examples(n: int = 50, seed: int = 0) -> list[TriggerExample]:
    """Label decided entirely by the anchor word: alpha->TypeA, beta->TypeB,
    filler->NONE."""
    rng = np.random.default_rng(seed)
    fillers = ["red", "green", "blue", "old", "new"]
    out = []
    for i in range(n):
        kind = i % 3
        anchor_word = ("alpha", "beta", fillers[i % len(fillers)])[kind]
        label = ("TypeA", "TypeB", NONE_LABEL)[kind]
        tokens = list(rng.choice(fillers, size=4))
        pos = int(rng.integers(0, 5))
        tokens.insert(pos, anchor_word)
        out.append(TriggerExample(
            doc_id=f"d{i}", sentence=0, tok_start=pos, tok_end=pos + 1,
            start=0, end=1, label=label,
            provenance="negative" if label == NONE_LABEL else "distant",
            tokens=tokens,
        ))
    return out


def separable_argument_examples(n: int = 50, seed: int = 0) -> list[ArgumentCandidate]:
    """Role decided by the mention head word."""
    rng = np.random.default_rng(seed)
    heads = [("alice", "Actor", "entity"), ("paris", "Place", "entity"),
             ("tuesday", "Time", "time"), ("pebble", NONE_LABEL, "entity")]
    fillers = ["saw", "near", "the", "a", "with"]
    out = []
    for i in range(n):
        head, label, kind = heads[i % len(heads)]
        tokens = ["raid"] + list(rng.choice(fillers, size=3)) + [head]
        out.append(ArgumentCandidate(
            doc_id=f"d{i}", sentence=0,
            trigger_tok_start=0, trigger_tok_end=1, trigger_start=0, trigger_end=4,
            event_type="Attack",
            mention_tok_start=4, mention_tok_end=5, start=10, end=15,
            mention_kind=kind, label=label, tokens=tokens,
        ))
    return out


def accuracy(model: CnnModel, examples) -> float:
    hits = 0
    for ex in examples:
        probs = model.stack.predict_proba(_to_instance(model.featurizer, ex))
        if model.labels[int(np.argmax(probs))] == ex.label:
            hits += 1
    return hits / len(examples)


SMALL_GRID = TrainConfig(
    epochs=(60,), pos_weights=(1.0,), batch_sizes=(8,), filter_counts=(8,),
    d_word=12, seed=1,
)


class TestTrain:
    def test_overfits_separable_trigger_set(self):
        examples = separable_trigger_examples()
        cfg = TrainConfig(epochs=(200,), pos_weights=(1.0,), batch_sizes=(8,),
                          filter_counts=(8,), d_word=12, seed=1)
        model, report = train(examples, examples, cfg, None, TRIGGER)
        assert accuracy(model, examples) >= 0.98
        assert report["grid"][0]["selected"]

    def test_overfits_separable_argument_set(self):
        examples = separable_argument_examples()
        cfg = TrainConfig(epochs=(200,), pos_weights=(1.0,), batch_sizes=(8,),
                          filter_counts=(8,), d_word=12, seed=1)
        model, _ = train(examples, examples, cfg, None, ARGUMENT)
        assert accuracy(model, examples) >= 0.98

    def test_single_point_grid_selected(self):
        examples = separable_trigger_examples(24)
        model, report = train(examples, examples, SMALL_GRID, None, TRIGGER)
        assert len(report["grid"]) == 1
        assert report["selected"] == 0

    def test_identical_grid_points_tie_break_first(self):
        examples = separable_trigger_examples(24)
        cfg = TrainConfig(epochs=(30, 30), pos_weights=(1.0,), batch_sizes=(8,),
                          filter_counts=(8,), d_word=10, seed=2)
        _, report = train(examples, examples, cfg, None, TRIGGER)
        # identical seeds per grid index differ, but ties on f1 pick the
        # smaller-model/earlier point
        if report["grid"][0]["dev_f1"] == report["grid"][1]["dev_f1"]:
            assert report["selected"] == 0

    def test_tie_prefers_smaller_model(self):
        examples = separable_trigger_examples(24)
        cfg = TrainConfig(epochs=(40,), pos_weights=(1.0,), batch_sizes=(8,),
                          filter_counts=(16, 4), d_word=10, seed=3)
        _, report = train(examples, examples, cfg, None, TRIGGER)
        rows = report["grid"]
        if rows[0]["dev_f1"] == rows[1]["dev_f1"]:
            assert rows[report["selected"]]["filters"] == 4

    def test_single_label_rejected(self):
        examples = [ex for ex in separable_trigger_examples() if ex.label == "TypeA"]
        with pytest.raises(ValidationError):
            train(examples, examples, SMALL_GRID, None, TRIGGER)

    def test_empty_dev_rejected(self):
        examples = separable_trigger_examples(12)
        with pytest.raises(ValidationError):
            train(examples, [], SMALL_GRID, None, TRIGGER)

    def test_deterministic_model_files(self, tmp_path):
        examples = separable_trigger_examples(18)
        cfg = TrainConfig(epochs=(20,), pos_weights=(3.0,), batch_sizes=(8,),
                          filter_counts=(4,), d_word=8, seed=9)
        for name in ("a", "b"):
            model, _ = train(examples, examples, cfg, None, TRIGGER)
            model.save(tmp_path / f"{name}.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_save_load_round_trip(self, tmp_path):
        examples = separable_trigger_examples(18)
        model, _ = train(examples, examples, SMALL_GRID, None, TRIGGER)
        model.save(tmp_path / "m.json")
        loaded = CnnModel.load(tmp_path / "m.json")
        assert loaded.kind == TRIGGER
        assert loaded.labels == model.labels
        for name, param in model.stack.params().items():
            assert np.array_equal(param, loaded.stack.params()[name])


def trigger_fixture_corpus():
    texts = [
        "rebels wounded three people today",
        "the blast destroyed the market",
        "people wounded in the blast",
        "traders sold fruit in the market",
        "three people walked home today",
    ]
    return corpus_of_texts({f"doc{i}": [t] for i, t in enumerate(texts)})


def train_s1_style_model(seed=4):
    corpus = trigger_fixture_corpus()
    lexicons = {"Injury": {"wounded"}, "Attack": {"blast"}}
    positives = find_occurrences(corpus, lexicons)
    negatives = sample_negatives(corpus, lexicons, 3.0, seed, positives)
    examples = positives + negatives
    cfg = TrainConfig(epochs=(120,), pos_weights=(3.0,), batch_sizes=(4,),
                      filter_counts=(8,), d_word=12, seed=seed)
    model, _ = train(examples, examples, cfg, None, TRIGGER)
    return model


class TestPredictTriggers:
    def test_recovers_s1_triggers(self, s1_sentence):
        model = train_s1_style_model()
        predictions = predict_triggers(model, s1_sentence, "d1", 0)
        found = {(p.label, s1_sentence.text[p.start:p.end]) for p in predictions}
        assert ("Injury", "wounded") in found
        assert ("Attack", "blast") in found

    def test_offsets_exact(self, s1_sentence):
        model = train_s1_style_model()
        predictions = {
            p.label: (p.start, p.end) for p in predict_triggers(model, s1_sentence)
        }
        assert predictions["Injury"] == (15, 22)
        assert predictions["Attack"] == (65, 70)

    def test_none_biased_model_predicts_nothing(self, s1_sentence):
        featurizer = Featurizer(["x"])
        stack = LayerStack(
            word_emb=np.zeros((3, 2)),
            pf_trigger=np.zeros((PF_ROWS, PF_DIM)),
            conv_w=np.zeros((2, 3, 2 + PF_DIM)),
            conv_b=np.zeros(2),
            out_w=np.zeros((2, 2 + 3 * 2)),
            out_b=np.array([5.0, 0.0]),
        )
        model = CnnModel(kind=TRIGGER, labels=[NONE_LABEL, "Attack"],
                         featurizer=featurizer, stack=stack)
        assert predict_triggers(model, s1_sentence) == []

    def test_bias_shift_leaves_argmax_unchanged(self, s1_sentence):
        model = train_s1_style_model()
        before = predict_triggers(model, s1_sentence)
        model.stack.out_b += 7.5
        after = predict_triggers(model, s1_sentence)
        assert [(p.start, p.end, p.label) for p in before] == [
            (p.start, p.end, p.label) for p in after
        ]

    def test_adjacent_same_type_tokens_merge(self):
        # hand-built stack reading only the lexical center word: both tokens
        # of "air strike" score as Attack
        vocab = ["air", "strike", "today"]
        featurizer = Featurizer(vocab)
        word_emb = np.zeros((5, 3))
        word_emb[0, 0] = 1.0  # air
        word_emb[1, 1] = 1.0  # strike
        word_emb[2, 2] = 1.0  # today
        out_w = np.zeros((2, 1 + 3 * 3))
        center = 1 + 3  # center slot of the lexical window
        out_w[1, center + 0] = 10.0
        out_w[1, center + 1] = 10.0
        stack = LayerStack(
            word_emb=word_emb,
            pf_trigger=np.zeros((PF_ROWS, PF_DIM)),
            conv_w=np.zeros((1, 3, 3 + PF_DIM)),
            conv_b=np.zeros(1),
            out_w=out_w,
            out_b=np.zeros(2),
        )
        model = CnnModel(kind=TRIGGER, labels=[NONE_LABEL, "Attack"],
                         featurizer=featurizer, stack=stack)
        sent = make_sentence("air strike today")
        predictions = predict_triggers(model, sent, "d", 0)
        assert [(p.tok_start, p.tok_end, p.label) for p in predictions] == [
            (0, 2, "Attack")
        ]
        assert (predictions[0].start, predictions[0].end) == (0, 10)

    def test_wrong_kind_rejected(self, s1_sentence):
        model = train_s1_style_model()
        model.kind = ARGUMENT
        with pytest.raises(ValidationError):
            predict_triggers(model, s1_sentence)


@pytest.fixture(scope="module")
def argument_model():
    examples = separable_argument_examples(60, seed=5)
    cfg = TrainConfig(epochs=(150,), pos_weights=(2.0,), batch_sizes=(8,),
                      filter_counts=(8,), d_word=12, seed=5)
    model, _ = train(examples, examples, cfg, None, ARGUMENT)
    return model


class TestPredictArguments:
    def test_overfit_fixture_roles(self, argument_model):
        model = argument_model
        sent = make_sentence(
            "raid near the town alice",
            mentions=[Mention(19, 24, "entity", "PER")],
        )
        predictions = predict_arguments(model, sent, [(0, 1, "Attack")], "d", 0)
        assert [p.label for p in predictions] == ["Actor"]
        assert predictions[0].event_type == "Attack"
        assert (predictions[0].start, predictions[0].end) == (19, 24)

    def test_no_mentions_empty(self, argument_model):
        sent = make_sentence("raid near the town")
        assert predict_arguments(argument_model, sent, [(0, 1, "Attack")]) == []

    def test_time_constraint(self, argument_model):
        # "tuesday" head strongly indicates Time, but the mention kind is
        # entity, so Time must not be emitted for it
        sent = make_sentence(
            "raid near the town tuesday",
            mentions=[Mention(19, 26, "entity", "X")],
        )
        predictions = predict_arguments(argument_model, sent, [(0, 1, "Attack")])
        assert all(p.label != "Time" for p in predictions)
        relaxed = predict_arguments(
            argument_model, sent, [(0, 1, "Attack")],
            time_for_time_mentions_only=False,
        )
        assert any(p.label == "Time" for p in relaxed)
