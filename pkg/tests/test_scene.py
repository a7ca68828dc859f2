"""Scene state, response mapping, and layered composition."""
import math

import pytest
from hypothesis import given, strategies as st

import holosim.scene as sc

BASE = sc.BaseScene(
    asset_id="shared_portrait",
    channel_defaults={"smile": 0.0, "mouth_open": 0.0, "gaze_follow": 0.0})


def one_hot(name: str) -> tuple[float, ...]:
    idx = sc.EMOTION_CLASSES.index(name)
    return tuple(1.0 if i == idx else 0.0 for i in range(len(sc.EMOTION_CLASSES)))


def peaked(name: str, p: float) -> tuple[float, ...]:
    rest = (1.0 - p) / (len(sc.EMOTION_CLASSES) - 1)
    return tuple(p if c == name else rest for c in sc.EMOTION_CLASSES)


def make_state(uid="u1", emotion=None, audio=None, timestamp_ms=0.0):
    return sc.UserStateVector(
        user_id=uid, position=(0.0, 0.0, 1.5),
        orientation=(1.0, 0.0, 0.0, 0.0), gaze=(0.0, 0.0, 1.0),
        emotion=sc.EmotionDistribution(emotion or one_hot("neutral")),
        audio=audio, timestamp_ms=timestamp_ms)


class TestEmotionDistribution:
    def test_simplex_enforced(self):
        with pytest.raises(ValueError):
            sc.EmotionDistribution((0.5,) * 7)
        with pytest.raises(ValueError):
            sc.EmotionDistribution((1.0, 0.0, 0.0))
        with pytest.raises(ValueError):
            sc.EmotionDistribution((-0.1, 1.1, 0.0, 0.0, 0.0, 0.0, 0.0))

    def test_one_hot_and_confidence(self):
        d = sc.EmotionDistribution.one_hot("happy")
        assert d.top == "happy"
        assert d.confidence == 1.0

    def test_classify_argmax(self):
        d = sc.EmotionDistribution(peaked("sad", 0.7))
        assert sc.classify_emotion(d) == "sad"

    def test_classify_tie_breaks_to_lowest_index(self):
        uniform = sc.EmotionDistribution(tuple(1.0 / 7 for _ in range(7)))
        assert sc.classify_emotion(uniform) == sc.EMOTION_CLASSES[0]

    def test_near_one_sum_within_tolerance(self):
        probs = list(peaked("fear", 0.4))
        probs[0] += 5e-7  # inside SIMPLEX_TOL
        sc.EmotionDistribution(tuple(probs))


class TestUserState:
    def test_unit_norms_enforced(self):
        with pytest.raises(ValueError):
            make_state().__class__(
                user_id="u", position=(0, 0, 0), orientation=(2.0, 0, 0, 0),
                gaze=(0, 0, 1.0), emotion=sc.EmotionDistribution(one_hot("happy")))
        with pytest.raises(ValueError):
            sc.UserStateVector(
                user_id="u", position=(0, 0, 0), orientation=(1.0, 0, 0, 0),
                gaze=(0, 0, 0.5), emotion=sc.EmotionDistribution(one_hot("happy")))

    def test_audio_range(self):
        make_state(audio=(32767, -32768, 0))
        with pytest.raises(ValueError):
            make_state(audio=(40000,))

    def test_has_audio(self):
        assert not make_state().has_audio
        assert not make_state(audio=()).has_audio
        assert make_state(audio=(1, 2)).has_audio


class TestResponseMapping:
    def test_happy_maps_to_smile_with_confidence(self):
        cmd = sc.respond(make_state(emotion=peaked("happy", 0.9)))
        assert cmd.kind is sc.CommandKind.SMILE
        assert cmd.intensity == pytest.approx(0.9)

    def test_neutral_maps_to_neutral_zero_intensity(self):
        cmd = sc.respond(make_state(emotion=peaked("neutral", 0.8)))
        assert cmd.kind is sc.CommandKind.NEUTRAL
        assert cmd.intensity == 0.0

    @pytest.mark.parametrize("name", ["angry", "disgust", "fear", "sad", "surprise"])
    def test_other_classes_map_to_gaze(self, name):
        cmd = sc.respond(make_state(emotion=peaked(name, 0.6)))
        assert cmd.kind is sc.CommandKind.GAZE
        assert cmd.intensity == pytest.approx(0.6)

    def test_audio_dominates_every_class(self):
        for name in sc.EMOTION_CLASSES:
            cmd = sc.respond(make_state(emotion=peaked(name, 0.9), audio=(5, -5)))
            assert cmd.kind is sc.CommandKind.SPEAK_REPLY

    def test_unknown_emotion_rejected(self):
        with pytest.raises(ValueError):
            sc.map_response("bored", False, 0.5)

    def test_mapping_is_total(self):
        for name in sc.EMOTION_CLASSES:
            for has_audio in (False, True):
                cmd = sc.map_response(name, has_audio, 0.5)
                assert isinstance(cmd.kind, sc.CommandKind)


class TestApplyCommand:
    def test_channels(self):
        cmd = sc.ResponseCommand("u", sc.CommandKind.SMILE, 0.7)
        assert sc.apply_command(cmd).blend_weights == {"smile": 0.7}
        cmd = sc.ResponseCommand("u", sc.CommandKind.SPEAK_REPLY, 0.4)
        assert sc.apply_command(cmd).blend_weights == {"mouth_open": 0.4}
        cmd = sc.ResponseCommand("u", sc.CommandKind.GAZE, 0.2)
        assert sc.apply_command(cmd).blend_weights == {"gaze_follow": 0.2}

    def test_neutral_gives_empty_layer(self):
        cmd = sc.ResponseCommand("u", sc.CommandKind.NEUTRAL, 0.0)
        layer = sc.apply_command(cmd)
        assert layer.blend_weights == {}
        assert layer.is_empty


class TestComposition:
    def test_base_defaults_must_be_zero(self):
        with pytest.raises(ValueError):
            sc.BaseScene("a", {"smile": 0.1})

    def test_passive_view_hashes_to_base(self):
        assert sc.compose_view(BASE, None, "u0").digest == BASE.content_hash
        empty = sc.SceneLayer("u0", {})
        assert sc.compose_view(BASE, empty, "u0").digest == BASE.content_hash

    def test_zero_weight_layer_is_identity(self):
        z = sc.SceneLayer("u0", {"smile": 0.0, "gaze_follow": 0.0})
        assert sc.compose_view(BASE, z, "u0").digest == BASE.content_hash

    def test_active_view_differs_and_base_unmodified(self):
        layer = sc.SceneLayer("u1", {"smile": 0.8})
        view = sc.compose_view(BASE, layer, "u1")
        assert view.digest != BASE.content_hash
        assert BASE.channel_defaults["smile"] == 0.0
        assert view.effective_weights["smile"] == 0.8

    def test_foreign_layer_rejected(self):
        layer = sc.SceneLayer("u1", {"smile": 0.8})
        with pytest.raises(ValueError):
            sc.compose_view(BASE, layer, "u2")

    def test_digest_deterministic(self):
        layer = sc.SceneLayer("u1", {"smile": 0.8})
        a = sc.compose_view(BASE, layer, "u1").digest
        b = sc.compose_view(BASE, layer, "u1").digest
        assert a == b

    def test_digest_is_sha256_hex(self):
        digest = BASE.content_hash
        assert len(digest) == 64
        int(digest, 16)

    def test_canonical_json_key_order_invariant(self):
        a = sc.content_digest({"b": 1, "a": 2})
        b = sc.content_digest({"a": 2, "b": 1})
        assert a == b

    @given(st.dictionaries(
        st.sampled_from(["smile", "mouth_open", "gaze_follow"]),
        st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
        max_size=3))
    def test_digest_equals_base_iff_all_weights_zero(self, weights):
        layer = sc.SceneLayer("u1", weights)
        view = sc.compose_view(BASE, layer, "u1")
        unchanged = all(w == 0.0 for w in weights.values())
        assert (view.digest == BASE.content_hash) == unchanged


class TestLatestCommand:
    def test_latest_timestamp_wins(self):
        cmds = [sc.ResponseCommand("u", sc.CommandKind.SMILE, 0.5, 10.0),
                sc.ResponseCommand("u", sc.CommandKind.GAZE, 0.5, 30.0),
                sc.ResponseCommand("u", sc.CommandKind.NEUTRAL, 0.0, 20.0)]
        assert sc.latest_command(cmds).kind is sc.CommandKind.GAZE

    def test_exact_tie_takes_later_list_entry(self):
        cmds = [sc.ResponseCommand("u", sc.CommandKind.SMILE, 0.5, 10.0),
                sc.ResponseCommand("u", sc.CommandKind.GAZE, 0.5, 10.0)]
        assert sc.latest_command(cmds).kind is sc.CommandKind.GAZE

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            sc.latest_command([])


def test_full_pipeline_three_users():
    """Two active users diverge from the shared base; the passive one does not."""
    smile_state = make_state("u1", peaked("happy", 0.9))
    voice_state = make_state("u2", peaked("neutral", 0.8), audio=(120, -340))
    views = {}
    for state in (smile_state, voice_state):
        cmd = sc.respond(state)
        views[state.user_id] = sc.compose_view(
            BASE, sc.apply_command(cmd), state.user_id)
    views["u3"] = sc.compose_view(BASE, None, "u3")
    assert views["u3"].digest == BASE.content_hash
    assert views["u1"].digest != BASE.content_hash
    assert views["u2"].digest != BASE.content_hash
    assert views["u1"].digest != views["u2"].digest
