"""Audio-to-label discretization: MFCC features plus K-means clustering.

This is the built-in hidden-units path, so the pipeline runs with no external
model: WAV in, MFCC frames out, each frame mapped to its nearest centroid.
Externally produced label files bypass this module entirely.

Everything here is deterministic given (audio bytes, seed, config).
"""

from __future__ import annotations

import json
import logging
import math
import wave
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import AudioManifest, LabelCorpus, LabelSequence

logger = logging.getLogger(__name__)

# Power floor applied before the log so silent input stays finite.
LOG_FLOOR = 1e-10

_ASSIGN_CHUNK = 16384


class AudioError(RuntimeError):
    """An audio file could not be used (unreadable, wrong format, too short)."""


@dataclass(frozen=True)
class MfccConfig:
    """MFCC front-end parameters; defaults are the conventional ASR setup."""

    sample_rate_hz: int = 16000
    frame_length_ms: float = 25.0
    frame_shift_ms: float = 10.0
    num_coeffs: int = 13
    include_deltas: bool = True
    num_mel_filters: int = 26
    preemphasis: float = 0.97

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if not self.frame_length_ms > self.frame_shift_ms > 0:
            raise ValueError("need frame_length_ms > frame_shift_ms > 0")
        if self.num_coeffs > self.num_mel_filters:
            raise ValueError("num_coeffs must not exceed num_mel_filters")
        if not 0.0 <= self.preemphasis < 1.0:
            raise ValueError("preemphasis must be in [0, 1)")

    @property
    def frame_length_samples(self) -> int:
        return int(round(self.sample_rate_hz * self.frame_length_ms / 1000.0))

    @property
    def frame_shift_samples(self) -> int:
        return int(round(self.sample_rate_hz * self.frame_shift_ms / 1000.0))

    @property
    def feature_dim(self) -> int:
        return self.num_coeffs * (3 if self.include_deltas else 1)


def num_frames(n_samples: int, config: MfccConfig) -> int:
    """1 + floor((n_samples - frame_length) / frame_shift); requires one full frame."""
    if n_samples < config.frame_length_samples:
        raise AudioError(
            f"audio of {n_samples} samples is shorter than one "
            f"{config.frame_length_samples}-sample frame"
        )
    return 1 + (n_samples - config.frame_length_samples) // config.frame_shift_samples


def _mel(hz: np.ndarray | float) -> np.ndarray | float:
    return 2595.0 * np.log10(1.0 + hz / 700.0)


def _mel_inv(mel: np.ndarray | float) -> np.ndarray | float:
    return 700.0 * (10.0 ** (mel / 2595.0) - 1.0)


def _mel_filterbank(config: MfccConfig, n_fft: int) -> np.ndarray:
    """Triangular filters (num_mel_filters x n_fft//2+1) from 0 Hz to Nyquist."""
    nyquist = config.sample_rate_hz / 2.0
    mel_points = np.linspace(_mel(0.0), _mel(nyquist), config.num_mel_filters + 2)
    bins = np.floor((n_fft + 1) * _mel_inv(mel_points) / config.sample_rate_hz).astype(int)
    bank = np.zeros((config.num_mel_filters, n_fft // 2 + 1))
    for m in range(1, config.num_mel_filters + 1):
        left, center, right = bins[m - 1], bins[m], bins[m + 1]
        for f in range(left, center):
            bank[m - 1, f] = (f - left) / max(center - left, 1)
        for f in range(center, right):
            bank[m - 1, f] = (right - f) / max(right - center, 1)
    return bank


def _dct_matrix(n_out: int, n_in: int) -> np.ndarray:
    """Orthonormal DCT-II basis, n_out x n_in."""
    grid = np.arange(n_in, dtype=np.float64)
    basis = np.cos(np.pi * np.outer(np.arange(n_out), 2.0 * grid + 1.0) / (2.0 * n_in))
    basis *= math.sqrt(2.0 / n_in)
    basis[0] *= math.sqrt(0.5)
    return basis


def _deltas(feats: np.ndarray, width: int = 2) -> np.ndarray:
    """Regression deltas over +-width frames, edges replicated."""
    padded = np.pad(feats, ((width, width), (0, 0)), mode="edge")
    denom = 2.0 * sum(n * n for n in range(1, width + 1))
    out = np.zeros_like(feats)
    for n in range(1, width + 1):
        out += n * (padded[width + n : width + n + feats.shape[0]] - padded[width - n : width - n + feats.shape[0]])
    return out / denom


def compute_mfcc(
    samples: np.ndarray,
    config: MfccConfig,
    sample_rate_hz: int | None = None,
) -> np.ndarray:
    """MFCC matrix (frames x feature_dim) of one mono PCM signal.

    ``sample_rate_hz``, when given, is validated against the config; the
    samples themselves carry no rate.
    """
    if sample_rate_hz is not None and sample_rate_hz != config.sample_rate_hz:
        raise AudioError(
            f"sample rate {sample_rate_hz} Hz does not match configured "
            f"{config.sample_rate_hz} Hz"
        )
    samples = np.asarray(samples, dtype=np.float64).reshape(-1)
    flen = config.frame_length_samples
    shift = config.frame_shift_samples
    n_out = num_frames(samples.shape[0], config)

    if config.preemphasis > 0:
        samples = np.concatenate(([samples[0]], samples[1:] - config.preemphasis * samples[:-1]))

    idx = shift * np.arange(n_out)[:, None] + np.arange(flen)[None, :]
    frames = samples[idx] * np.hamming(flen)

    n_fft = 1
    while n_fft < flen:
        n_fft *= 2
    power = np.abs(np.fft.rfft(frames, n=n_fft, axis=1)) ** 2 / n_fft
    bank = _mel_filterbank(config, n_fft)
    log_mel = np.log(np.maximum(power @ bank.T, LOG_FLOOR))
    cepstra = log_mel @ _dct_matrix(config.num_coeffs, config.num_mel_filters).T

    if config.include_deltas:
        d1 = _deltas(cepstra)
        d2 = _deltas(d1)
        cepstra = np.concatenate([cepstra, d1, d2], axis=1)
    return cepstra


@dataclass(frozen=True)
class KMeansModel:
    """Trained centroids plus how training went."""

    k: int
    centroids: np.ndarray
    feature_dim: int
    iterations_run: int
    final_inertia: float

    def __post_init__(self):
        centroids = np.asarray(self.centroids, dtype=np.float64)
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if centroids.shape != (self.k, self.feature_dim):
            raise ValueError(
                f"centroids must be {self.k} x {self.feature_dim}, got {centroids.shape}"
            )
        if not np.isfinite(centroids).all():
            raise ValueError("centroids must be finite")
        centroids.flags.writeable = False
        object.__setattr__(self, "centroids", centroids)


def _assign(features: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, float]:
    """Nearest-centroid label per row (lowest index wins ties) and total inertia."""
    n = features.shape[0]
    labels = np.empty(n, dtype=np.int64)
    inertia = 0.0
    cent_sq = np.einsum("ij,ij->i", centroids, centroids)
    for start in range(0, n, _ASSIGN_CHUNK):
        chunk = features[start : start + _ASSIGN_CHUNK]
        d2 = (
            np.einsum("ij,ij->i", chunk, chunk)[:, None]
            + cent_sq[None, :]
            - 2.0 * chunk @ centroids.T
        )
        chunk_labels = np.argmin(d2, axis=1)
        labels[start : start + chunk.shape[0]] = chunk_labels
        inertia += float(np.maximum(d2[np.arange(chunk.shape[0]), chunk_labels], 0.0).sum())
    return labels, inertia


def _kmeanspp_init(features: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = features.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    d2 = np.sum((features - features[chosen[0]]) ** 2, axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            chosen[i] = rng.integers(n)
        else:
            cumulative = np.cumsum(d2)
            draw = rng.random() * total
            chosen[i] = np.searchsorted(cumulative, draw, side="right")
        d2 = np.minimum(d2, np.sum((features - features[chosen[i]]) ** 2, axis=1))
    return features[chosen].copy()


def train_kmeans(
    features: np.ndarray,
    k: int,
    seed: int,
    max_iters: int = 100,
    tol: float = 1e-6,
) -> KMeansModel:
    """Lloyd iterations from a k-means++ start; deterministic given the seed.

    Stops when no centroid moves more than ``tol`` (euclidean) or after
    ``max_iters`` update steps. Empty clusters are re-seeded at the point
    currently farthest from its centroid.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError("features must be a 2-D matrix")
    if not np.isfinite(features).all():
        raise ValueError("features must be finite")
    n, dim = features.shape
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise ValueError(f"need at least k={k} rows, got {n}")

    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(features, k, rng)
    iterations = 0
    for _ in range(max_iters):
        labels, _ = _assign(features, centroids)
        sums = np.zeros((k, dim))
        np.add.at(sums, labels, features)
        sizes = np.bincount(labels, minlength=k)
        empty = np.nonzero(sizes == 0)[0]
        if empty.size:
            point_d2 = np.sum((features - centroids[labels]) ** 2, axis=1)
            farthest = np.argsort(-point_d2, kind="stable")
            for slot, cluster in enumerate(empty):
                donor = farthest[slot]
                sums[cluster] = features[donor]
                sizes[cluster] = 1
        new_centroids = sums / sizes[:, None]
        shift = float(np.sqrt(np.sum((new_centroids - centroids) ** 2, axis=1)).max())
        centroids = new_centroids
        iterations += 1
        if shift < tol:
            break

    _, final_inertia = _assign(features, centroids)
    return KMeansModel(
        k=k,
        centroids=centroids,
        feature_dim=dim,
        iterations_run=iterations,
        final_inertia=final_inertia,
    )


def apply_kmeans(model: KMeansModel, features: np.ndarray) -> np.ndarray:
    """Nearest-centroid label per feature row; empty input gives an empty array."""
    features = np.asarray(features, dtype=np.float64)
    if features.size == 0:
        return np.empty(0, dtype=np.int64)
    if features.ndim != 2 or features.shape[1] != model.feature_dim:
        raise ValueError(
            f"features must be N x {model.feature_dim}, got {features.shape}"
        )
    labels, _ = _assign(features, model.centroids)
    return labels


def save_kmeans_model(model: KMeansModel, path: str | Path, config_echo: dict | None = None) -> None:
    """JSON container with exact float64 round-trip via repr."""
    payload = {
        "k": model.k,
        "feature_dim": model.feature_dim,
        "iterations_run": model.iterations_run,
        "final_inertia": model.final_inertia,
        "centroids": [[float(v) for v in row] for row in model.centroids],
        "config_echo": config_echo or {},
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=None, separators=(",", ":")) + "\n",
        encoding="utf-8",
        newline="\n",
    )


def load_kmeans_model(path: str | Path) -> tuple[KMeansModel, dict]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    model = KMeansModel(
        k=payload["k"],
        centroids=np.array(payload["centroids"], dtype=np.float64),
        feature_dim=payload["feature_dim"],
        iterations_run=payload["iterations_run"],
        final_inertia=payload["final_inertia"],
    )
    return model, payload.get("config_echo", {})


def read_wav_mono(path: str | Path, expected_rate_hz: int) -> np.ndarray:
    """Samples of a 16-bit PCM mono WAV as float64 in [-1, 1)."""
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as handle:
            channels = handle.getnchannels()
            width = handle.getsampwidth()
            rate = handle.getframerate()
            n = handle.getnframes()
            raw = handle.readframes(n)
    except (wave.Error, OSError) as exc:
        raise AudioError(f"{path}: cannot read WAV ({exc})") from exc
    if channels != 1:
        raise AudioError(f"{path}: expected mono audio, got {channels} channels")
    if width != 2:
        raise AudioError(f"{path}: expected 16-bit PCM, got {8 * width}-bit")
    if rate != expected_rate_hz:
        raise AudioError(
            f"{path}: sample rate {rate} Hz does not match expected {expected_rate_hz} Hz"
        )
    return np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0


def _discretize_entry(entry, model: KMeansModel, config: MfccConfig) -> LabelSequence:
    samples = read_wav_mono(entry.audio_path, config.sample_rate_hz)
    try:
        feats = compute_mfcc(samples, config)
    except AudioError as exc:
        raise AudioError(f"{entry.audio_path}: {exc}") from exc
    labels = apply_kmeans(model, feats)
    return LabelSequence(
        id=entry.id,
        duration_s=samples.shape[0] / config.sample_rate_hz,
        labels=labels,
    )


def discretize_manifest(
    manifest: AudioManifest,
    model: KMeansModel,
    config: MfccConfig,
    skip_bad: bool = False,
    max_workers: int = 1,
    source_tag: str = "discretized",
) -> LabelCorpus:
    """One label sequence per manifest entry, in manifest order.

    A failing entry aborts the run unless ``skip_bad`` is set, in which case
    it is logged and omitted. Work is farmed over ``max_workers`` threads;
    output order never depends on completion order.
    """
    if model.feature_dim != config.feature_dim:
        raise ValueError(
            f"model expects {model.feature_dim}-dim features but config produces "
            f"{config.feature_dim}-dim"
        )

    def worker(entry):
        try:
            return _discretize_entry(entry, model, config), None
        except AudioError as exc:
            return None, (entry.id, exc)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(worker, manifest.entries))
    else:
        outcomes = [worker(entry) for entry in manifest.entries]

    sequences = []
    for seq, failure in outcomes:
        if failure is not None:
            utt_id, exc = failure
            if skip_bad:
                logger.warning("skipping %s: %s", utt_id, exc)
                continue
            raise AudioError(f"utterance {utt_id!r}: {exc}") from exc
        sequences.append(seq)

    return LabelCorpus(
        alphabet_size=model.k,
        sequences=tuple(sequences),
        source_tag=source_tag,
    )
