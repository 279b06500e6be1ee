"""Keyed cancelable templates from minutiae.

Each minutia acts once as a reference: its k nearest neighbors are
described by a rotation-invariant distance and an averaged orientation,
quantized onto a wx x wy grid, flattened to a bit string, transformed by
a t-point DFT, and projected through a user-keyed random matrix with
fewer rows than columns. The projection is the cancelable part: a new
key yields an unrelated template from the same finger, and p < t keeps
the map non-invertible.
"""

import hashlib
import json
import math
import struct
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .minutiae import InsufficientDataError

TEMPLATE_MAGIC = b"KNNT"
TEMPLATE_VERSION = 1


class TemplateError(ValueError):
    pass


class RotatedOffset(NamedTuple):
    chi: float
    gamma: float


class NeighborDescriptor(NamedTuple):
    d: float
    theta_avg: float


@dataclass(frozen=True)
class KnnStructure:
    reference_index: int
    neighbors: tuple  # NeighborDescriptor, ascending by d


@dataclass(frozen=True)
class GridConfig:
    cx: float = 4.0
    cy: float = math.pi / 8
    d_max: float = 100.0

    def __post_init__(self):
        if self.cx <= 0 or self.cy <= 0 or self.d_max <= 0:
            raise TemplateError("grid cell sizes and d_max must be positive")

    @property
    def wx(self) -> int:
        return int(self.d_max // self.cx)

    @property
    def wy(self) -> int:
        return int(2 * math.pi // self.cy)

    @property
    def t(self) -> int:
        return self.wx * self.wy


@dataclass(frozen=True)
class QuantGrid:
    config: GridConfig
    cells: np.ndarray  # bool, shape (wx, wy)


@dataclass(frozen=True)
class ProjectionMatrix:
    p: int
    q: int
    matrix: np.ndarray  # float64, shape (p, q)


@dataclass(frozen=True)
class TemplateParams:
    k: int = 5
    grid: GridConfig = GridConfig()
    p: int = 60

    def digest(self) -> bytes:
        text = (
            f"knns-v1 k={self.k} cx={self.grid.cx!r} cy={self.grid.cy!r} "
            f"dmax={self.grid.d_max!r} p={self.p}"
        )
        return hashlib.sha256(text.encode()).digest()


@dataclass(frozen=True)
class CancelableTemplate:
    entries: np.ndarray  # complex128, shape (N, p)
    t: int
    params_digest: bytes

    @property
    def count(self) -> int:
        return self.entries.shape[0]

    @property
    def p(self) -> int:
        return self.entries.shape[1]

    def to_bytes(self) -> bytes:
        header = TEMPLATE_MAGIC + struct.pack(
            "<BIII", TEMPLATE_VERSION, self.p, self.t, self.count
        )
        body = self.entries.astype(np.complex128).tobytes()  # little-endian f64 pairs
        return header + body + self.params_digest

    @classmethod
    def from_bytes(cls, data: bytes) -> "CancelableTemplate":
        if data[:4] != TEMPLATE_MAGIC:
            raise TemplateError("bad template magic")
        version, p, t, n = struct.unpack_from("<BIII", data, 4)
        if version != TEMPLATE_VERSION:
            raise TemplateError(f"unsupported template version {version}")
        body_size = n * p * 16
        expected = 17 + body_size + 32
        if len(data) != expected:
            raise TemplateError("template length does not match its header")
        entries = np.frombuffer(data[17 : 17 + body_size], dtype=np.complex128)
        return cls(entries.reshape(n, p).copy(), t, data[17 + body_size :])

    def to_debug_json(self) -> str:
        return json.dumps(
            {
                "count": self.count,
                "p": self.p,
                "t": self.t,
                "params_digest": self.params_digest.hex(),
                "entries": [
                    [[z.real, z.imag] for z in row] for row in self.entries
                ],
            },
            indent=2,
        )


def rotated_offset(reference, other) -> RotatedOffset:
    """Offset of `other` in the reference minutia's rotated frame."""
    dx = other.x - reference.x
    dy = other.y - reference.y
    cos_r = math.cos(reference.theta)
    sin_r = math.sin(reference.theta)
    chi = dx * cos_r + dy * sin_r
    gamma = dx * sin_r - dy * cos_r
    return RotatedOffset(chi, gamma)


def neighbor_descriptor(reference, other) -> NeighborDescriptor:
    """Rotation-invariant distance plus circular-mean orientation."""
    chi, gamma = rotated_offset(reference, other)
    d = math.hypot(chi, gamma)
    theta = math.atan2(
        math.sin(other.theta) + math.sin(reference.theta),
        math.cos(other.theta) + math.cos(reference.theta),
    )
    return NeighborDescriptor(d, theta % (2 * math.pi))


def compute_knns(minutiae, k: int) -> list:
    if k < 1:
        raise TemplateError("k must be at least 1")
    if len(minutiae) < 2:
        raise InsufficientDataError("need at least 2 minutiae to build structures")
    structures = []
    for r, ref in enumerate(minutiae):
        described = [
            (neighbor_descriptor(ref, other), j)
            for j, other in enumerate(minutiae)
            if j != r
        ]
        described.sort(key=lambda item: (item[0].d, item[1]))
        structures.append(
            KnnStructure(r, tuple(desc for desc, _ in described[:k]))
        )
    return structures


def quantize(structure: KnnStructure, grid: GridConfig) -> QuantGrid:
    """Mark the (distance, orientation) cell of every neighbor.

    Distances at or past d_max land in the last distance row so the grid
    size never depends on the input.
    """
    cells = np.zeros((grid.wx, grid.wy), dtype=bool)
    for neighbor in structure.neighbors:
        ix = min(int(neighbor.d // grid.cx), grid.wx - 1)
        iy = min(int(neighbor.theta_avg // grid.cy), grid.wy - 1)
        cells[ix, iy] = True
    return QuantGrid(grid, cells)


def to_bitstring(grid: QuantGrid) -> np.ndarray:
    return grid.cells.reshape(-1).copy()  # row-major


def dft(bits: np.ndarray) -> np.ndarray:
    """V[i] = sum_s B[s] * exp(-2*pi*j*i*s/t)."""
    if bits.size < 1:
        raise TemplateError("bit string must be non-empty")
    return np.fft.fft(bits.astype(np.float64))


def derive_projection(key: bytes, p: int, q: int) -> ProjectionMatrix:
    """Standard-normal matrix reproducible from (key, p, q).

    Uniform u64 words come from SHAKE-256 over a domain-separated
    encoding of the inputs; pairs map to normals by the Box-Muller
    transform. Everything downstream is IEEE-754 double arithmetic, so
    the matrix is bit-identical across platforms.
    """
    if not key:
        raise TemplateError("projection key must be non-empty")
    if p >= q:
        raise TemplateError(f"projection must shrink: p={p} must be < q={q}")
    count = p * q
    pairs = (count + 1) // 2
    shake = hashlib.shake_256(
        b"projection-v1" + struct.pack("<I", len(key)) + key + struct.pack("<II", p, q)
    )
    words = np.frombuffer(shake.digest(16 * pairs), dtype="<u8").astype(np.float64)
    u1 = (words[0::2] + 1.0) * 2.0**-64  # in (0, 1]
    u2 = words[1::2] * 2.0**-64
    radius = np.sqrt(-2.0 * np.log(u1))
    normals = np.empty(2 * pairs, dtype=np.float64)
    normals[0::2] = radius * np.cos(2.0 * math.pi * u2)
    normals[1::2] = radius * np.sin(2.0 * math.pi * u2)
    return ProjectionMatrix(p, q, normals[:count].reshape(p, q))


def project(matrix: ProjectionMatrix, v: np.ndarray) -> np.ndarray:
    if matrix.q != v.shape[0]:
        raise TemplateError(
            f"projection expects length {matrix.q}, got {v.shape[0]}"
        )
    return matrix.matrix @ v


def make_template(minutiae, key: bytes, params: TemplateParams = TemplateParams()) -> CancelableTemplate:
    """Full per-minutia pipeline under one shared keyed projection."""
    grid = params.grid
    if params.p >= grid.t:
        raise TemplateError("p must stay below the bit-string length")
    structures = compute_knns(minutiae, params.k)
    projection = derive_projection(key, params.p, grid.t)
    entries = np.empty((len(structures), params.p), dtype=np.complex128)
    for i, structure in enumerate(structures):
        bits = to_bitstring(quantize(structure, grid))
        entries[i] = project(projection, dft(bits))
    return CancelableTemplate(entries, grid.t, params.digest())
