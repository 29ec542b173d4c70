import wave

import numpy as np
import pytest

from scdselect.corpus import AudioManifest, ManifestEntry
from scdselect.discretizer import (
    AudioError,
    KMeansModel,
    MfccConfig,
    apply_kmeans,
    compute_mfcc,
    discretize_manifest,
    load_kmeans_model,
    num_frames,
    read_wav_mono,
    save_kmeans_model,
    train_kmeans,
)


def write_wav(path, samples, rate=16000):
    pcm = np.round(np.clip(samples, -1.0, 1.0) * 32767).astype("<i2")
    with wave.open(str(path), "wb") as handle:
        handle.setnchannels(1)
        handle.setsampwidth(2)
        handle.setframerate(rate)
        handle.writeframes(pcm.tobytes())


def tone(n, freq=440.0, rate=16000, seed=None):
    t = np.arange(n) / rate
    signal = 0.4 * np.sin(2 * np.pi * freq * t)
    if seed is not None:
        signal += 0.05 * np.random.default_rng(seed).standard_normal(n)
    return signal


class TestMfcc:
    def test_frame_count_formula(self):
        config = MfccConfig()
        # 1 + floor((16000 - 400) / 160) = 98
        assert num_frames(16000, config) == 1 + (16000 - 400) // 160 == 98
        feats = compute_mfcc(tone(16000), config)
        assert feats.shape == (98, 39)

    def test_single_frame_boundary(self):
        config = MfccConfig()
        feats = compute_mfcc(tone(400), config)
        assert feats.shape[0] == 1

    def test_random_lengths_obey_formula(self):
        config = MfccConfig()
        rng = np.random.default_rng(0)
        for _ in range(10):
            n = int(rng.integers(400, 20000))
            expected = 1 + (n - 400) // 160
            assert compute_mfcc(tone(n), config).shape[0] == expected

    def test_zero_signal_is_finite(self):
        feats = compute_mfcc(np.zeros(1600), MfccConfig())
        assert np.isfinite(feats).all()

    def test_too_short_rejected(self):
        with pytest.raises(AudioError, match="shorter"):
            compute_mfcc(tone(399), MfccConfig())

    def test_sample_rate_mismatch_rejected(self):
        with pytest.raises(AudioError, match="does not match"):
            compute_mfcc(tone(16000), MfccConfig(), sample_rate_hz=8000)

    def test_no_deltas_dim(self):
        config = MfccConfig(include_deltas=False)
        assert compute_mfcc(tone(1600), config).shape[1] == 13

    def test_config_validation(self):
        with pytest.raises(ValueError):
            MfccConfig(frame_length_ms=10.0, frame_shift_ms=25.0)
        with pytest.raises(ValueError):
            MfccConfig(num_coeffs=30, num_mel_filters=26)


def two_clouds(n_per=40, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(loc=(-5.0, 0.0), scale=0.1, size=(n_per, 2))
    b = rng.normal(loc=(5.0, 1.0), scale=0.1, size=(n_per, 2))
    return np.vstack([a, b])


class TestKMeans:
    def test_separable_clouds(self):
        features = two_clouds()
        model = train_kmeans(features, k=2, seed=3)
        means = sorted([features[:40].mean(axis=0), features[40:].mean(axis=0)], key=lambda m: m[0])
        got = sorted(model.centroids.tolist(), key=lambda m: m[0])
        np.testing.assert_allclose(got, means, atol=1e-8)

    def test_k_equals_rows(self):
        rng = np.random.default_rng(1)
        features = rng.standard_normal((6, 3))
        model = train_kmeans(features, k=6, seed=0)
        assert model.final_inertia == pytest.approx(0.0, abs=1e-12)

    def test_deterministic_model_bytes(self, tmp_path):
        features = two_clouds(seed=5)
        p1, p2 = tmp_path / "m1.json", tmp_path / "m2.json"
        save_kmeans_model(train_kmeans(features, k=3, seed=11), p1)
        save_kmeans_model(train_kmeans(features, k=3, seed=11), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_fewer_rows_than_k(self):
        with pytest.raises(ValueError, match="at least k"):
            train_kmeans(np.zeros((3, 2)), k=4, seed=0)

    def test_non_finite_rejected(self):
        bad = np.zeros((5, 2))
        bad[0, 0] = np.nan
        with pytest.raises(ValueError, match="finite"):
            train_kmeans(bad, k=2, seed=0)

    def test_inertia_non_increasing_across_iterations(self):
        # Same seed and tol=0 make every run follow one trajectory, so the
        # final inertia after t updates is the iteration-t inertia.
        rng = np.random.default_rng(13)
        features = rng.standard_normal((300, 4))
        inertias = [
            train_kmeans(features, k=6, seed=5, max_iters=t, tol=0.0).final_inertia
            for t in range(1, 9)
        ]
        assert all(b <= a + 1e-9 for a, b in zip(inertias, inertias[1:]))

    def test_reported_inertia_consistent(self):
        rng = np.random.default_rng(8)
        features = rng.standard_normal((200, 5))
        model = train_kmeans(features, k=7, seed=2)
        labels = apply_kmeans(model, features)
        recomputed = float(((features - model.centroids[labels]) ** 2).sum())
        assert recomputed == pytest.approx(model.final_inertia, rel=1e-6)

    def test_model_round_trip_exact(self, tmp_path):
        model = train_kmeans(two_clouds(seed=9), k=4, seed=7)
        path = tmp_path / "model.json"
        save_kmeans_model(model, path, config_echo={"note": "test"})
        loaded, echo = load_kmeans_model(path)
        assert echo == {"note": "test"}
        assert loaded.k == model.k
        assert loaded.iterations_run == model.iterations_run
        assert loaded.final_inertia == model.final_inertia
        np.testing.assert_array_equal(loaded.centroids, model.centroids)


class TestApplyKMeans:
    def _model(self):
        centroids = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [4.0, 4.0]])
        return KMeansModel(k=4, centroids=centroids, feature_dim=2, iterations_run=1, final_inertia=0.0)

    def test_exact_centroid_hit(self):
        model = self._model()
        assert apply_kmeans(model, np.array([[4.0, 4.0]]))[0] == 3

    def test_tie_goes_to_lowest_index(self):
        model = self._model()
        # (1, 0) is equidistant from centroids 0 and 1
        assert apply_kmeans(model, np.array([[1.0, 0.0]]))[0] == 0

    def test_empty_input(self):
        assert apply_kmeans(self._model(), np.empty((0, 2))).shape == (0,)

    def test_dim_mismatch(self):
        with pytest.raises(ValueError, match="features must be"):
            apply_kmeans(self._model(), np.zeros((3, 5)))

    def test_matches_brute_force_nearest(self):
        rng = np.random.default_rng(4)
        model = train_kmeans(rng.standard_normal((120, 3)), k=9, seed=1)
        points = rng.standard_normal((50, 3))
        fast = apply_kmeans(model, points)
        for i, point in enumerate(points):
            dists = [float(((point - c) ** 2).sum()) for c in model.centroids]
            assert fast[i] == int(np.argmin(dists))


class TestDiscretizeManifest:
    @pytest.fixture
    def setup(self, tmp_path):
        paths = []
        for i, n in enumerate([8000, 12000]):
            path = tmp_path / f"a{i}.wav"
            write_wav(path, tone(n, freq=300.0 + 200 * i, seed=i))
            paths.append(path)
        manifest = AudioManifest(
            entries=tuple(ManifestEntry(id=f"utt{i}", audio_path=str(p)) for i, p in enumerate(paths))
        )
        config = MfccConfig()
        frames = np.vstack([compute_mfcc(read_wav_mono(p, 16000), config) for p in paths])
        model = train_kmeans(frames, k=5, seed=0)
        return manifest, model, config, tmp_path

    def test_basic(self, setup):
        manifest, model, config, _ = setup
        corpus = discretize_manifest(manifest, model, config)
        assert len(corpus) == 2
        assert corpus.alphabet_size == 5
        assert corpus.ids == ("utt0", "utt1")
        # 8000 samples at 16 kHz: 0.5 s and 1 + (8000-400)//160 = 48 frames
        assert corpus.sequences[0].duration_s == pytest.approx(0.5)
        assert len(corpus.sequences[0]) == 48

    def test_bad_entry_aborts(self, setup):
        manifest, model, config, tmp_path = setup
        bad = AudioManifest(
            entries=manifest.entries + (ManifestEntry(id="missing", audio_path=str(tmp_path / "nope.wav")),)
        )
        with pytest.raises(AudioError, match="missing"):
            discretize_manifest(bad, model, config)

    def test_skip_bad_downgrades(self, setup, caplog):
        manifest, model, config, tmp_path = setup
        bad = AudioManifest(
            entries=manifest.entries + (ManifestEntry(id="missing", audio_path=str(tmp_path / "nope.wav")),)
        )
        with caplog.at_level("WARNING"):
            corpus = discretize_manifest(bad, model, config, skip_bad=True)
        assert corpus.ids == ("utt0", "utt1")
        assert any("missing" in m for m in caplog.messages)

    def test_duplicate_manifest_id_rejected_upfront(self):
        with pytest.raises(ValueError, match="duplicate"):
            AudioManifest(
                entries=(
                    ManifestEntry(id="x", audio_path="a.wav"),
                    ManifestEntry(id="x", audio_path="b.wav"),
                )
            )

    def test_deterministic_and_thread_invariant(self, setup):
        manifest, model, config, _ = setup
        reference = discretize_manifest(manifest, model, config, max_workers=1)
        again = discretize_manifest(manifest, model, config, max_workers=1)
        threaded = discretize_manifest(manifest, model, config, max_workers=4)
        assert reference == again
        assert reference == threaded

    def test_dim_mismatch_rejected(self, setup):
        manifest, model, _, _ = setup
        with pytest.raises(ValueError, match="dim"):
            discretize_manifest(manifest, model, MfccConfig(include_deltas=False))


class TestReadWav:
    def test_rate_mismatch(self, tmp_path):
        path = tmp_path / "x.wav"
        write_wav(path, tone(4000, rate=8000), rate=8000)
        with pytest.raises(AudioError, match="sample rate"):
            read_wav_mono(path, 16000)

    def test_stereo_rejected(self, tmp_path):
        path = tmp_path / "s.wav"
        pcm = (np.zeros((100, 2)) * 32767).astype("<i2")
        with wave.open(str(path), "wb") as handle:
            handle.setnchannels(2)
            handle.setsampwidth(2)
            handle.setframerate(16000)
            handle.writeframes(pcm.tobytes())
        with pytest.raises(AudioError, match="mono"):
            read_wav_mono(path, 16000)

    def test_round_trip_values(self, tmp_path):
        path = tmp_path / "r.wav"
        samples = tone(1000, seed=3)
        write_wav(path, samples)
        loaded = read_wav_mono(path, 16000)
        assert loaded.shape == (1000,)
        np.testing.assert_allclose(loaded, samples, atol=1e-4)
