"""Procedural street-scene landmarks and a perception-noise simulator.

Each landmark is a static label map built from axis-aligned regions (sky,
buildings, vegetation, fences, poles, sidewalk, road, lane markings), a
grayscale static image rendered from it, and a dynamic image with opaque
vehicle/pedestrian sprites and optional cast shadows. ``degrade`` turns a
sample into the noisy probability map and image a perception front end
would produce.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.ndimage import uniform_filter

from .core import ImageBuffer, ProbabilityMap, SemanticMap, ValidationError

CLASS_NAMES = ("None", "Buildings", "Fences", "Others", "Roadlines", "Road", "Sidewalk", "Vegetation")
NONE, BUILDINGS, FENCES, OTHERS, ROADLINES, ROAD, SIDEWALK, VEGETATION = range(8)

# Base gray level per class; rendered pixels vary by +-JITTER around it.
CLASS_INTENSITY = np.array([210, 100, 145, 170, 245, 55, 125, 80], dtype=np.int16)
JITTER = 8
# Sprite levels avoid every [base - JITTER, base + JITTER] band, so a sprite
# pixel always differs from the static pixel under it.
SPRITE_INTENSITY = (12, 28, 38, 190, 228, 255)
SHADOW_FACTOR = 0.6
BLUR_SIZE = 5


@dataclass(frozen=True)
class WorldSpec:
    seed: int = 0
    height: int = 128
    width: int = 128
    num_classes: int = 8
    num_landmarks: int = 200
    dynamic_objects: Tuple[int, int] = (1, 5)
    shadow: bool = True
    class_names: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if self.num_landmarks < 1:
            raise ValidationError("num_landmarks", f"need at least one landmark, got {self.num_landmarks}")
        if self.num_classes < 2:
            raise ValidationError("num_classes", f"K must be >= 2, got {self.num_classes}")
        if self.height < 8 or self.width < 8:
            raise ValidationError("height", f"frame {self.height}x{self.width} is too small (min 8x8)")
        lo, hi = self.dynamic_objects
        if lo < 0 or hi < lo:
            raise ValidationError("dynamic_objects", f"invalid range {self.dynamic_objects}")
        names = self.class_names
        if names is None:
            names = CLASS_NAMES if self.num_classes == 8 else tuple(f"class{i}" for i in range(self.num_classes))
        if len(names) != self.num_classes:
            raise ValidationError("class_names", f"{len(names)} names for K={self.num_classes}")
        object.__setattr__(self, "class_names", tuple(names))
        object.__setattr__(self, "dynamic_objects", (int(lo), int(hi)))


@dataclass(frozen=True, eq=False)
class LandmarkSample:
    id: int
    static_image: ImageBuffer
    dynamic_image: ImageBuffer
    static_semantics: SemanticMap
    dynamic_mask: np.ndarray = field(repr=False)

    @property
    def static_probs(self) -> ProbabilityMap:
        return ProbabilityMap.one_hot(self.static_semantics)


@dataclass(frozen=True)
class NoiseSpec:
    label_flip_p: float = 0.0
    # Weight of the uniform distribution mixed into the one-hot map.
    prob_temperature: float = 0.0
    image_noise_sigma: float = 0.0
    artifact_blur: bool = False

    def __post_init__(self):
        if not 0.0 <= self.label_flip_p <= 1.0:
            raise ValidationError("label_flip_p", f"must be in [0, 1], got {self.label_flip_p}")
        if not 0.0 <= self.prob_temperature <= 1.0:
            raise ValidationError("prob_temperature", f"must be in [0, 1], got {self.prob_temperature}")
        if not self.image_noise_sigma >= 0.0:
            raise ValidationError("image_noise_sigma", f"must be >= 0, got {self.image_noise_sigma}")


def _rng(seed: int, landmark_id: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(landmark_id)])


def _between(rng, lo: float, hi: float) -> int:
    lo, hi = int(lo), int(hi)
    return int(rng.integers(lo, hi + 1)) if hi > lo else lo


def _ellipse(h: int, w: int, cy: float, cx: float, ry: float, rx: float) -> np.ndarray:
    yy, xx = np.ogrid[:h, :w]
    return ((yy - cy) / max(ry, 0.5)) ** 2 + ((xx - cx) / max(rx, 0.5)) ** 2 <= 1.0


def layout(rng: np.random.Generator, h: int, w: int) -> np.ndarray:
    """Label grid over the 8 street-scene roles."""
    lab = np.full((h, w), NONE, dtype=np.int32)
    horizon = _between(rng, 0.25 * h, 0.45 * h)
    curb = _between(rng, 0.55 * h, 0.72 * h)

    x = _between(rng, -0.1 * w, 0.05 * w)
    while x < w:
        # at least 1 so the sweep advances on tiny frames
        bw = max(1, _between(rng, 0.08 * w, 0.3 * w))
        if rng.random() < 0.8:
            top = _between(rng, 0.03 * h, horizon)
            lab[top:curb, max(x, 0):x + bw] = BUILDINGS
        x += bw + _between(rng, 0, 0.1 * w)

    for _ in range(_between(rng, 1, 3)):
        cy = _between(rng, horizon, curb)
        cx = _between(rng, 0, w - 1)
        ry = _between(rng, 0.04 * h, 0.14 * h)
        rx = _between(rng, 0.05 * w, 0.18 * w)
        lab[_ellipse(h, w, cy, cx, ry, rx) & (np.arange(h)[:, None] < curb)] = VEGETATION

    for _ in range(_between(rng, 0, 2)):
        fh = _between(rng, 0.03 * h, 0.07 * h)
        x0 = _between(rng, 0, 0.8 * w)
        lab[max(curb - fh, 0):curb, x0:x0 + _between(rng, 0.1 * w, 0.35 * w)] = FENCES

    walk = _between(rng, 0.04 * h, 0.1 * h)
    lab[curb:curb + walk] = SIDEWALK
    lab[curb + walk:] = ROAD
    if rng.random() < 0.5:
        lab[h - _between(rng, 0.02 * h, 0.06 * h):] = SIDEWALK

    road_top, road_bot = curb + walk, h
    if road_bot - road_top >= 6:
        ly = (road_top + road_bot) // 2
        thick = max(1, h // 64)
        dash = max(1, _between(rng, 0.04 * w, 0.12 * w))
        gap = _between(rng, 0.03 * w, 0.1 * w)
        x = -_between(rng, 0, dash + gap)
        while x < w:
            lab[ly:ly + thick, max(x, 0):max(x + dash, 0)] = ROADLINES
            x += dash + gap

    for _ in range(_between(rng, 1, 4)):
        pw = _between(rng, 1, max(1, 0.03 * w))
        ph = _between(rng, 0.08 * h, 0.3 * h)
        x0 = _between(rng, 0, w - pw)
        lab[max(curb + walk // 2 - ph, 0):curb + walk // 2, x0:x0 + pw] = OTHERS
        if rng.random() < 0.5:
            sw = _between(rng, 0.03 * w, 0.07 * w)
            sy = max(curb + walk // 2 - ph, 0)
            lab[sy:sy + _between(rng, 2, max(2, 0.05 * h)), max(x0 - sw // 2, 0):x0 + sw // 2 + pw] = OTHERS
    return lab


def render(labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    base = CLASS_INTENSITY[labels % len(CLASS_INTENSITY)]
    noisy = base + rng.integers(-JITTER, JITTER + 1, size=labels.shape)
    return np.clip(noisy, 0, 255).astype(np.uint8)


def add_dynamics(static: np.ndarray, rng: np.random.Generator, count: int, shadow: bool):
    """Paint ``count`` sprites and shadows; returns (pre_shadow, image, sprite mask)."""
    h, w = static.shape
    img = static.copy()
    mask = np.zeros((h, w), dtype=bool)
    shadows = np.zeros((h, w), dtype=bool)
    for _ in range(count):
        level = SPRITE_INTENSITY[int(rng.integers(len(SPRITE_INTENSITY)))]
        if rng.random() < 0.6:
            sh = _between(rng, 0.06 * h, 0.16 * h)
            sw = _between(rng, 0.12 * w, 0.3 * w)
            y0 = _between(rng, 0.45 * h, h - sh // 2)
            x0 = _between(rng, -sw // 2, w - sw // 2)
            region = np.zeros((h, w), dtype=bool)
            region[max(y0, 0):max(y0 + sh, 0), max(x0, 0):max(x0 + sw, 0)] = True
            img[region] = level
            # Window band in a second sprite level.
            wy = max(y0 + sh // 5, 0)
            win = np.zeros((h, w), dtype=bool)
            win[wy:wy + max(1, sh // 4), max(x0 + sw // 6, 0):max(x0 + sw - sw // 6, 0)] = True
            img[win & region] = SPRITE_INTENSITY[(SPRITE_INTENSITY.index(level) + 3) % len(SPRITE_INTENSITY)]
            bottom, cx, rx = y0 + sh, x0 + sw / 2, sw / 2
        else:
            ry = _between(rng, 0.04 * h, 0.1 * h)
            rx = max(1, ry // 3)
            cy = _between(rng, 0.45 * h, h - 1)
            cx = _between(rng, 0, w - 1)
            region = _ellipse(h, w, cy, cx, ry, rx)
            img[region] = level
            bottom = cy + ry
        mask |= region
        if shadow:
            shadows |= _ellipse(h, w, bottom, cx, max(1, 0.02 * h), rx * 1.2)
    pre_shadow = img.copy()
    if shadow:
        dark = shadows & ~mask
        img[dark] = (img[dark] * SHADOW_FACTOR).astype(np.uint8)
    return pre_shadow, img, mask


def generate_landmark(spec: WorldSpec, landmark_id: int) -> LandmarkSample:
    rng = _rng(spec.seed, landmark_id)
    roles = layout(rng, spec.height, spec.width)
    labels = roles % spec.num_classes
    static = render(labels, rng)
    lo, hi = spec.dynamic_objects
    count = int(rng.integers(lo, hi + 1))
    pre_shadow, dynamic, mask = add_dynamics(static, rng, count, spec.shadow)
    if not np.array_equal(pre_shadow != static, mask):
        raise AssertionError(f"landmark {landmark_id}: sprite mask does not match changed pixels")
    return LandmarkSample(
        id=landmark_id,
        static_image=ImageBuffer(static),
        dynamic_image=ImageBuffer(dynamic),
        static_semantics=SemanticMap(labels, spec.num_classes),
        dynamic_mask=mask,
    )


def generate_world(spec: WorldSpec) -> List[LandmarkSample]:
    """All landmarks of ``spec``; each depends only on (seed, id)."""
    return [generate_landmark(spec, i) for i in range(spec.num_landmarks)]


def degrade(
    sample: LandmarkSample,
    noise: NoiseSpec,
    seed: int,
    image_role: str = "static",
) -> Tuple[ProbabilityMap, ImageBuffer]:
    """Simulated perception output for one sample.

    Labels are flipped i.i.d. with ``label_flip_p`` to a uniformly chosen
    other class, one-hot encoded, then mixed with the uniform distribution
    at weight ``prob_temperature``. The image (the static image, or the
    dynamic one when ``image_role == "dynamic"``) is box-blurred inside the
    sprite mask when ``artifact_blur`` is set, then gets rounded Gaussian
    noise clamped to [0, 255].
    """
    if image_role not in ("static", "dynamic"):
        raise ValidationError("image_role", f"expected 'static' or 'dynamic', got {image_role!r}")
    rng = _rng(seed, sample.id)
    sem = sample.static_semantics
    k = sem.num_classes

    flip = rng.random(sem.shape) < noise.label_flip_p
    shift = rng.integers(1, k, size=sem.shape)
    labels = np.where(flip, (sem.labels + shift) % k, sem.labels)
    probs = np.zeros(sem.shape + (k,), dtype=np.float64)
    rows, cols = np.indices(sem.shape)
    probs[rows, cols, labels] = 1.0
    t = noise.prob_temperature
    if t > 0:
        probs = (1.0 - t) * probs + t / k

    src = sample.static_image if image_role == "static" else sample.dynamic_image
    img = src.samples.astype(np.float64)
    if noise.artifact_blur and sample.dynamic_mask.any():
        blurred = uniform_filter(img, size=(BLUR_SIZE, BLUR_SIZE, 1), mode="nearest")
        img[sample.dynamic_mask] = np.floor(blurred[sample.dynamic_mask] + 0.5)
    if noise.image_noise_sigma > 0:
        img = np.floor(img + rng.normal(0.0, noise.image_noise_sigma, size=img.shape) + 0.5)
    return ProbabilityMap(probs), ImageBuffer(np.clip(img, 0, 255).astype(np.uint8))
