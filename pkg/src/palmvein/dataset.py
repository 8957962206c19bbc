"""Dataset loading, synthetic vein images and feature-matrix assembly."""
from __future__ import annotations

import os
import re
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import DatasetError, ParameterError, PalmVeinError
from .imaging import AheParams, GrayImage, adaptive_hist_eq, encode_pgm, load_image, negative, resize
from .labeled import LabeledDataset
from .pso import WORKERS_ENV
from .wavelet import SubbandSelection, dwt2_forward, extract_features

DEFAULT_LAYOUT = "{hand}/{subject}/{session}_{shot}.bmp"
SYNTH_LAYOUT = "{hand}/{subject}/{session}_{shot}.pgm"

_FIELD_PATTERNS = {"hand": r"[^/]+", "subject": r"\d+", "session": r"\d+", "shot": r"\d+"}


@dataclass(frozen=True)
class ManifestEntry:
    subject: int
    hand: str | None
    session: int
    shot: int
    path: Path


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]
    class_map: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.class_map:
            self.class_map = {s: i for i, s in enumerate(sorted({e.subject for e in self.entries}))}

    @property
    def labels(self) -> np.ndarray:
        return np.array([self.class_map[e.subject] for e in self.entries], dtype=np.int64)

    @property
    def n_classes(self) -> int:
        return len(self.class_map)

    def __len__(self):
        return len(self.entries)


def _layout_regex(layout: str) -> re.Pattern:
    parts = re.split(r"(\{\w+\})", layout)
    out = []
    for part in parts:
        m = re.fullmatch(r"\{(\w+)\}", part)
        if m:
            name = m.group(1)
            out.append(f"(?P<{name}>{_FIELD_PATTERNS.get(name, r'[^/]+')})")
        else:
            out.append(re.escape(part))
    return re.compile("".join(out))


def scan_dataset(root, layout: str = DEFAULT_LAYOUT, hand: str | None = None) -> DatasetManifest:
    """Collect image files under ``root`` whose relative path matches ``layout``.

    ``layout`` is a template with ``{hand}``, ``{subject}``, ``{session}`` and
    ``{shot}`` fields.  Labels are assigned to subjects in ascending id order.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} is not a directory")
    pattern = _layout_regex(layout)
    entries = []
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        m = pattern.fullmatch(path.relative_to(root).as_posix())
        if not m:
            continue
        fields = m.groupdict()
        if hand is not None and fields.get("hand", "").lower() != hand.lower():
            continue
        if "subject" not in fields:
            raise DatasetError(f"layout {layout!r} has no {{subject}} field")
        if not os.access(path, os.R_OK):
            raise DatasetError(f"unreadable image file {path}")
        entries.append(
            ManifestEntry(
                subject=int(fields["subject"]),
                hand=fields.get("hand"),
                session=int(fields.get("session", 0)),
                shot=int(fields.get("shot", 0)),
                path=path,
            )
        )
    if not entries:
        raise DatasetError(f"no images matching {layout!r} under {root}")
    counts: dict[int, int] = {}
    for e in entries:
        counts[e.subject] = counts.get(e.subject, 0) + 1
    if len(counts) < 2:
        raise DatasetError(f"need at least 2 subjects, found {len(counts)}")
    lonely = sorted(s for s, c in counts.items() if c < 2)
    if lonely:
        raise DatasetError(f"subjects with a single image: {lonely}")
    return DatasetManifest(entries)


# ------------------------------------------------------------ synthetic data


@dataclass(frozen=True)
class SynthSpec:
    """Synthetic palm-like images: each class owns a fixed set of dark vein strokes."""

    classes: int = 10
    images_per_class: int = 12
    size: int = 128
    veins: int = 5
    noise_std: float = 8.0
    jitter_std: float = 1.5
    seed: int = 0
    background: float = 128.0

    def __post_init__(self):
        if self.classes < 1 or self.veins < 1:
            raise ParameterError("classes and veins must be positive")
        if self.images_per_class < 2:
            raise ParameterError("images_per_class must be at least 2")
        if self.size < 4 or self.size % 4:
            raise ParameterError(f"size must be a positive multiple of 4, got {self.size}")
        if self.noise_std < 0 or self.jitter_std < 0:
            raise ParameterError("noise_std and jitter_std must be non-negative")


@dataclass(frozen=True, eq=False)
class _Vein:
    points: np.ndarray  # (k, 2) control points as (row, col)
    width: float
    depth: float


def _class_veins(spec: SynthSpec, label: int) -> list[_Vein]:
    rng = np.random.default_rng([spec.seed, label])
    size = spec.size
    veins = []
    for _ in range(spec.veins):
        k = int(rng.integers(3, 8))
        start = rng.uniform(0.1, 0.9, size=2) * size
        heading = rng.uniform(0, 2 * np.pi)
        pts = [start]
        for _ in range(k - 1):
            heading += rng.normal(0.0, 0.5)
            step = size / k * rng.uniform(0.6, 1.0)
            pts.append(np.clip(pts[-1] + step * np.array([np.sin(heading), np.cos(heading)]), 0, size - 1))
        veins.append(_Vein(np.array(pts), width=float(rng.uniform(2, 4)), depth=float(rng.uniform(50, 90))))
    return veins


def _quadratic_curve(points: np.ndarray, spacing: float = 0.25) -> np.ndarray:
    """Dense samples of the quadratic B-spline through the control polygon's midpoints."""
    if len(points) < 3:
        a, b = points[0], points[-1]
        n = max(2, int(np.linalg.norm(b - a) / spacing) + 1)
        return a + np.linspace(0, 1, n)[:, None] * (b - a)
    knots = [points[0]] + [(points[i] + points[i + 1]) / 2 for i in range(1, len(points) - 2)] + [points[-1]]
    samples = []
    for i in range(len(points) - 2):
        p0, ctrl, p1 = knots[i], points[i + 1], knots[i + 1]
        length = np.linalg.norm(ctrl - p0) + np.linalg.norm(p1 - ctrl)
        t = np.linspace(0, 1, max(2, int(length / spacing) + 1))[:, None]
        samples.append((1 - t) ** 2 * p0 + 2 * (1 - t) * t * ctrl + t**2 * p1)
    return np.vstack(samples)


def render_veins(veins: Sequence[_Vein], size: int, background: float) -> np.ndarray:
    darkness = np.zeros((size, size))
    for vein in veins:
        centre = np.rint(_quadratic_curve(vein.points)).astype(int)
        inside = np.all((centre >= 0) & (centre < size), axis=1)
        centre = centre[inside]
        if len(centre) == 0:
            continue
        mask = np.ones((size, size), dtype=bool)
        mask[centre[:, 0], centre[:, 1]] = False
        dist = ndimage.distance_transform_edt(mask)
        profile = np.clip(vein.width / 2 + 0.5 - dist, 0.0, 1.0)
        darkness = np.maximum(darkness, vein.depth * profile)
    return background - darkness


@dataclass
class SyntheticSet:
    images: list[GrayImage]
    labels: np.ndarray
    manifest: DatasetManifest

    def __iter__(self):
        return iter((self.images, self.labels, self.manifest))


def synth_generate(spec: SynthSpec | None = None) -> SyntheticSet:
    """Render ``classes x images_per_class`` noisy, jittered vein images (deterministic under ``seed``)."""
    spec = spec or SynthSpec()
    images, labels, entries = [], [], []
    for label in range(spec.classes):
        skeleton = _class_veins(spec, label)
        for i in range(spec.images_per_class):
            rng = np.random.default_rng([spec.seed, label, i + 1])
            veins = skeleton
            if spec.jitter_std > 0:
                veins = [_Vein(v.points + rng.normal(0, spec.jitter_std, v.points.shape), v.width, v.depth) for v in skeleton]
            img = render_veins(veins, spec.size, spec.background)
            if spec.noise_std > 0:
                img = img + rng.normal(0, spec.noise_std, img.shape)
            images.append(GrayImage.from_float(img))
            labels.append(label)
            session, shot = divmod(i, 4)
            entries.append(
                ManifestEntry(label, "synthetic", session + 1, shot + 1, Path(f"synthetic/{label:03d}/{session + 1}_{shot + 1}.pgm"))
            )
    return SyntheticSet(images, np.array(labels, dtype=np.int64), DatasetManifest(entries))


def write_synthetic(synth: SyntheticSet, root) -> DatasetManifest:
    """Persist images as PGM under ``root`` in :data:`SYNTH_LAYOUT` and return the on-disk manifest."""
    root = Path(root)
    entries = []
    for img, e in zip(synth.images, synth.manifest.entries):
        path = root / e.hand / f"{e.subject:03d}" / f"{e.session}_{e.shot}.pgm"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(encode_pgm(img))
        entries.append(ManifestEntry(e.subject, e.hand, e.session, e.shot, path))
    return DatasetManifest(entries, dict(synth.manifest.class_map))


# ------------------------------------------------------------ feature matrix


@dataclass(frozen=True)
class FeatureConfig:
    ahe: AheParams = field(default_factory=AheParams)
    size: int = 128
    levels: int = 2
    selection: SubbandSelection = SubbandSelection.ALL


def image_features(img: GrayImage, cfg: FeatureConfig) -> np.ndarray:
    """Equalize, invert, resize, then flatten the Haar pyramid of one image."""
    pre = resize(negative(adaptive_hist_eq(img, cfg.ahe)), cfg.size, cfg.size)
    return extract_features(dwt2_forward(pre.pixels, cfg.levels), cfg.selection)


def build_feature_matrix(images, labels=None, cfg: FeatureConfig | None = None) -> LabeledDataset:
    """Stack per-image feature rows in input order.

    ``images`` may be a :class:`DatasetManifest`, a :class:`SyntheticSet`, or
    a sequence of :class:`GrayImage` / file paths with matching ``labels``.
    """
    cfg = cfg or FeatureConfig()
    if isinstance(images, SyntheticSet):
        images, labels = images.images, images.labels
    elif isinstance(images, DatasetManifest):
        images, labels = [e.path for e in images.entries], images.labels
    if labels is None:
        raise ParameterError("labels are required for a plain image sequence")
    images = list(images)

    def one(item) -> np.ndarray:
        if isinstance(item, GrayImage):
            return image_features(item, cfg)
        try:
            return image_features(load_image(item), cfg)
        except PalmVeinError as exc:
            raise type(exc)(f"{item}: {exc}") from exc
        except OSError as exc:
            raise DatasetError(f"{item}: {exc}") from exc

    workers = max(1, int(os.environ.get(WORKERS_ENV, "1") or 1))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, images))
    else:
        rows = [one(item) for item in images]
    X = np.vstack(rows) if rows else np.zeros((0, 0))
    return LabeledDataset(X, np.asarray(labels, dtype=np.int64))


# ---------------------------------------------------------------- cache file

CACHE_MAGIC = b"PVFM"
CACHE_VERSION = 1
_CACHE_HEADER = struct.Struct("<4sIQQ")


def write_feature_cache(path, data: LabeledDataset) -> None:
    """Little-endian: magic, u32 version, u64 n, u64 d, n*d f64 row-major, n i32 labels."""
    n, d = data.X.shape
    with open(path, "wb") as fh:
        fh.write(_CACHE_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, n, d))
        fh.write(np.ascontiguousarray(data.X, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(data.y, dtype="<i4").tobytes())


def read_feature_cache(path) -> LabeledDataset:
    raw = Path(path).read_bytes()
    if len(raw) < _CACHE_HEADER.size:
        raise DatasetError(f"{path}: truncated feature cache header")
    magic, version, n, d = _CACHE_HEADER.unpack_from(raw)
    if magic != CACHE_MAGIC:
        raise DatasetError(f"{path}: bad magic {magic!r}")
    if version != CACHE_VERSION:
        raise DatasetError(f"{path}: unsupported cache version {version}")
    expected = _CACHE_HEADER.size + 8 * n * d + 4 * n
    if len(raw) != expected:
        raise DatasetError(f"{path}: expected {expected} bytes for {n}x{d}, found {len(raw)}")
    off = _CACHE_HEADER.size
    X = np.frombuffer(raw, dtype="<f8", count=n * d, offset=off).reshape(n, d)
    y = np.frombuffer(raw, dtype="<i4", count=n, offset=off + 8 * n * d)
    return LabeledDataset(X.astype(np.float64), y.astype(np.int64))
