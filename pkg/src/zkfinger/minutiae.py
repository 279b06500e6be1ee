"""Fingerprint image processing and minutiae extraction.

Pipeline: enhance (contrast stretch, histogram equalization, median
smoothing) -> binarize (adaptive local mean) -> thin (Zhang-Suen to a
fixpoint) -> extract (crossing number over the skeleton). Minutiae can
also be loaded directly from a text fixture, which is the usual path in
tests and demos.

Convention: ridge pixels are the bright/true ones. All operations are
pure functions over immutable values.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy.ndimage import median_filter, uniform_filter


class ImageError(ValueError):
    pass


class MinutiaeParseError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


class MinutiaKind(enum.Enum):
    RIDGE_ENDING = "E"
    BIFURCATION = "B"


@dataclass(frozen=True)
class Minutia:
    x: float
    y: float
    theta: float  # radians, [0, 2*pi)
    kind: MinutiaKind

    def __post_init__(self):
        if not (0 <= self.theta < 2 * math.pi):
            raise ValueError(f"theta {self.theta} outside [0, 2*pi)")


@dataclass(frozen=True)
class GrayImage:
    pixels: np.ndarray  # uint8, shape (height, width)

    def __post_init__(self):
        arr = self.pixels
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise ImageError("image must be 2-D with positive dimensions")
        if arr.dtype != np.uint8:
            raise ImageError("image pixels must be uint8")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class BinaryImage:
    bits: np.ndarray  # bool, shape (height, width)

    def __post_init__(self):
        arr = self.bits
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise ImageError("image must be 2-D with positive dimensions")
        if arr.dtype != np.bool_:
            raise ImageError("binary image must be boolean")

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]


def load_image(path) -> GrayImage:
    """8-bit grayscale from PNG or binary PGM (P5)."""
    try:
        with Image.open(path) as img:
            arr = np.asarray(img.convert("L"), dtype=np.uint8)
    except (OSError, SyntaxError) as exc:
        raise ImageError(f"cannot read image {path}: {exc}") from exc
    return GrayImage(arr.copy())


def resize_nearest(img: GrayImage, width: int, height: int) -> GrayImage:
    """Nearest-neighbor resample (used for 96x96 -> 400x400 inputs)."""
    if width < 1 or height < 1:
        raise ImageError("target dimensions must be positive")
    rows = (np.arange(height) * img.height // height).clip(0, img.height - 1)
    cols = (np.arange(width) * img.width // width).clip(0, img.width - 1)
    return GrayImage(img.pixels[np.ix_(rows, cols)])


def enhance(img: GrayImage) -> GrayImage:
    """Contrast stretch, then histogram equalization, then 3x3 median.

    The three passes keep constant images constant and full-range
    two-level images unchanged; the order is a documented choice.
    """
    arr = img.pixels.astype(np.float64)

    lo, hi = arr.min(), arr.max()
    if hi > lo:
        arr = (arr - lo) * (255.0 / (hi - lo))
    stretched = np.round(arr).astype(np.uint8)

    hist = np.bincount(stretched.ravel(), minlength=256)
    cdf = np.cumsum(hist).astype(np.float64)
    cdf_min = cdf[np.nonzero(hist)[0][0]]
    total = stretched.size
    if total > cdf_min:
        lut = np.round((cdf - cdf_min) / (total - cdf_min) * 255.0)
    else:
        lut = np.full(256, 255.0)  # single occupied bin
    equalized = lut.astype(np.uint8)[stretched]

    smoothed = median_filter(equalized, size=3, mode="nearest")
    return GrayImage(smoothed)


def binarize(img: GrayImage, window: int = 16) -> BinaryImage:
    """Adaptive local-mean threshold; true marks a ridge pixel.

    A pixel is set when it reaches its neighborhood mean and is not
    itself zero (so empty background never counts as ridge).
    """
    if window < 1:
        raise ImageError("window must be positive")
    arr = img.pixels.astype(np.float64)
    local_mean = uniform_filter(arr, size=window, mode="nearest")
    bits = (arr >= local_mean) & (img.pixels > 0)
    return BinaryImage(bits)


def _neighbor_stack(padded: np.ndarray) -> list:
    """The 8 neighbors of every interior pixel, clockwise from north."""
    return [
        padded[0:-2, 1:-1],  # N
        padded[0:-2, 2:],    # NE
        padded[1:-1, 2:],    # E
        padded[2:, 2:],      # SE
        padded[2:, 1:-1],    # S
        padded[2:, 0:-2],    # SW
        padded[1:-1, 0:-2],  # W
        padded[0:-2, 0:-2],  # NW
    ]


def thin(img: BinaryImage) -> BinaryImage:
    """Zhang-Suen thinning iterated until nothing changes."""
    bits = img.bits.astype(np.uint8)
    while True:
        changed = False
        for step in (0, 1):
            padded = np.pad(bits, 1)
            n = _neighbor_stack(padded)
            neighbor_count = sum(x.astype(np.int32) for x in n)
            cyclic = n + [n[0]]
            transitions = sum(
                ((cyclic[i] == 0) & (cyclic[i + 1] == 1)).astype(np.int32)
                for i in range(8)
            )
            cond = (
                (bits == 1)
                & (neighbor_count >= 2)
                & (neighbor_count <= 6)
                & (transitions == 1)
            )
            if step == 0:
                cond &= (n[0] * n[2] * n[4] == 0) & (n[2] * n[4] * n[6] == 0)
            else:
                cond &= (n[0] * n[2] * n[6] == 0) & (n[0] * n[4] * n[6] == 0)
            if cond.any():
                bits[cond] = 0
                changed = True
        if not changed:
            return BinaryImage(bits.astype(bool))


def crossing_number(skel: BinaryImage) -> np.ndarray:
    """Per-pixel crossing number, zero outside the skeleton."""
    bits = skel.bits.astype(np.int32)
    padded = np.pad(bits, 1)
    n = _neighbor_stack(padded)
    cyclic = n + [n[0]]
    cn = sum(np.abs(cyclic[i] - cyclic[i + 1]) for i in range(8)) // 2
    cn[bits == 0] = 0
    return cn


def _block_orientation(gx: np.ndarray, gy: np.ndarray, x: int, y: int, block: int) -> float:
    """Ridge orientation by doubled-angle least squares over one block."""
    half = block // 2
    y0, y1 = max(0, y - half), min(gx.shape[0], y + half)
    x0, x1 = max(0, x - half), min(gx.shape[1], x + half)
    bx = gx[y0:y1, x0:x1]
    by = gy[y0:y1, x0:x1]
    vx = 2.0 * np.sum(bx * by)
    vy = np.sum(bx * bx - by * by)
    # Gradient normal is rotated a quarter turn from the ridge flow.
    theta = 0.5 * math.atan2(vx, vy) + math.pi / 2
    return theta % (2 * math.pi)


def extract_minutiae(skel: BinaryImage, block: int = 16) -> list:
    """Crossing-number detection: CN 1 is an ending, CN 3 a bifurcation."""
    cn = crossing_number(skel)
    field = skel.bits.astype(np.float64)
    gy, gx = np.gradient(field)
    found = []
    for y, x in np.argwhere((cn == 1) | (cn == 3)):
        kind = MinutiaKind.RIDGE_ENDING if cn[y, x] == 1 else MinutiaKind.BIFURCATION
        theta = _block_orientation(gx, gy, int(x), int(y), block)
        found.append(Minutia(float(x), float(y), theta, kind))
    return found


def remove_spurious(minutiae, skel: BinaryImage, min_dist: float = 8.0, border: int = 10):
    """Drop border minutiae, then both members of every too-close pair."""
    inner = [
        m
        for m in minutiae
        if border <= m.x < skel.width - border and border <= m.y < skel.height - border
    ]
    doomed = set()
    for i in range(len(inner)):
        for j in range(i + 1, len(inner)):
            dx = inner[i].x - inner[j].x
            dy = inner[i].y - inner[j].y
            if math.hypot(dx, dy) < min_dist:
                doomed.add(i)
                doomed.add(j)
    return [m for i, m in enumerate(inner) if i not in doomed]


def load_minutiae(path) -> list:
    """Parse the `x y theta kind` text format; `#` starts a comment."""
    minutiae = []
    with open(path, "r", encoding="ascii") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise MinutiaeParseError(f"line {lineno}: expected 'x y theta kind'")
            try:
                x = float(parts[0])
                y = float(parts[1])
                theta = float(parts[2])
            except ValueError as exc:
                raise MinutiaeParseError(f"line {lineno}: {exc}") from exc
            if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(theta)):
                raise MinutiaeParseError(f"line {lineno}: non-finite value")
            try:
                kind = MinutiaKind(parts[3])
            except ValueError as exc:
                raise MinutiaeParseError(
                    f"line {lineno}: kind must be E or B, got {parts[3]!r}"
                ) from exc
            minutiae.append(Minutia(x, y, theta % (2 * math.pi), kind))
    return minutiae


def save_minutiae(minutiae, path) -> None:
    with open(path, "w", encoding="ascii") as handle:
        for m in minutiae:
            handle.write(f"{m.x:.3f} {m.y:.3f} {m.theta:.6f} {m.kind.value}\n")


def image_to_minutiae(
    img: GrayImage,
    binarize_window: int = 16,
    orientation_block: int = 16,
    min_dist: float = 8.0,
    border: int = 10,
    resize_400: bool = False,
) -> list:
    """Full image pipeline with the documented defaults."""
    if resize_400:
        img = resize_nearest(img, 400, 400)
    skeleton = thin(binarize(enhance(img), window=binarize_window))
    raw = extract_minutiae(skeleton, block=orientation_block)
    return remove_spurious(raw, skeleton, min_dist=min_dist, border=border)
