"""Deterministic synthetic sequences with exact ground-truth motion.

A procedural texture is defined on the infinite integer lattice; frame t
samples it bilinearly at (x - t*vx, y - t*vy), so consecutive frames are
exact translations of each other (sub-pixel velocities included).  Optional
additive Gaussian noise is drawn per frame from a splitmix-style counter
hash, making output bit-identical across platforms for equal parameters.

Texture specs:
  checker[:period]  strong two-level checkerboard (default period 16)
  noise[:sigma]     static Gaussian texture riding on mid-gray (default 40)
  gradient          smooth low-complexity sinusoidal shading
  mixed             64x64 mosaic of checker / shading / noise / near-flat
                    cells, spanning the texture-complexity axis
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .frame import Frame

_MIX_CELL = 64


@dataclass(frozen=True)
class SynthParams:
    width: int
    height: int
    frames: int
    velocity: Tuple[float, float] = (0.0, 0.0)
    texture: str = "checker"
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("dimensions must be positive")
        if self.frames < 2:
            raise ValueError("a sequence needs at least 2 frames")
        if not all(np.isfinite(self.velocity)):
            raise ValueError("velocity must be finite")
        _parse_texture(self.texture)  # validate early


@dataclass(eq=False)
class VideoSequence:
    frames: List[Frame]
    fps: Tuple[int, int] = (30, 1)

    def __post_init__(self):
        if not self.frames:
            raise ValueError("sequence must contain at least one frame")
        first = self.frames[0]
        for f in self.frames[1:]:
            if (f.width, f.height, f.has_chroma) != (
                    first.width, first.height, first.has_chroma):
                raise ValueError("frames must share dimensions and colorspace")

    @property
    def width(self):
        return self.frames[0].width

    @property
    def height(self):
        return self.frames[0].height


def _parse_texture(spec: str):
    name, _, arg = spec.partition(":")
    if name == "checker":
        return name, float(arg) if arg else 16.0
    if name == "noise":
        return name, float(arg) if arg else 40.0
    if name in ("gradient", "mixed"):
        if arg:
            raise ValueError(f"texture {name} takes no parameter")
        return name, 0.0
    raise ValueError(f"unknown texture {spec!r}")


# --- splitmix-style counter hashing ------------------------------------------

_GAMMA = np.uint64(0x9E3779B97F4A7C15)


def _splitmix(x):
    with np.errstate(over="ignore"):
        x = (x + _GAMMA).astype(np.uint64)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return x ^ (x >> np.uint64(31))


def _hash_u64(*parts):
    """Mix any number of equally-shaped uint64 arrays/scalars."""
    acc = np.uint64(0x5851F42D4C957F2D)
    for p in parts:
        acc = _splitmix(np.asarray(p, dtype=np.uint64) ^ acc)
    return acc


def _gauss_from_keys(key_a, key_b):
    """Standard-normal deviates via Box-Muller on two hash streams."""
    u1 = (_hash_u64(key_a) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
    u2 = (_hash_u64(key_b) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


def _lattice_key(ix, iy):
    return (iy.astype(np.uint64) << np.uint64(32)) ^ ix.astype(np.uint64)


def _u64(value):
    return np.uint64(int(value) & 0xFFFFFFFFFFFFFFFF)


# --- procedural textures on the integer lattice ------------------------------

def _tex_checker(ix, iy, period):
    par = (np.floor_divide(ix, int(period)) + np.floor_divide(iy, int(period))) & 1
    return np.where(par == 0, 210.0, 45.0)


def _tex_noise(ix, iy, seed, sigma):
    key = _lattice_key(ix, iy)
    g = _gauss_from_keys(_hash_u64(_u64(seed), np.uint64(0x11), key),
                         _hash_u64(_u64(seed), np.uint64(0x22), key))
    return 128.0 + sigma * g


def _tex_gradient(ix, iy):
    return (128.0 + 55.0 * np.sin(2.0 * np.pi * ix / 64.0)
            * np.cos(2.0 * np.pi * iy / 64.0))


def _tex_mixed(ix, iy, seed):
    """Mosaic of cells: 0 checker, 1 shading, 2 static noise, 3 flat.

    Flat cells are featureless on purpose: whatever per-frame sensor noise
    rides on top, motion estimates there are untethered, which is what
    makes the coded motion field carry real entropy."""
    cx = np.floor_divide(ix, _MIX_CELL)
    cy = np.floor_divide(iy, _MIX_CELL)
    h = _hash_u64(_u64(seed), np.uint64(0x33), _lattice_key(cx, cy))
    bucket = (h % np.uint64(100)).astype(np.int64)
    cell_type = np.select(
        [bucket < 25, bucket < 50, bucket < 65],
        [0, 1, 2], default=3)
    out = np.full(ix.shape, 128.0, dtype=np.float64)
    m = cell_type == 0
    if m.any():
        out[m] = _tex_checker(ix[m], iy[m], 20)
    m = cell_type == 1
    if m.any():
        out[m] = (128.0 + 48.0 * np.sin(2.0 * np.pi * ix[m] / 56.0)
                  * np.cos(2.0 * np.pi * iy[m] / 44.0))
    m = cell_type == 2
    if m.any():
        out[m] = _tex_noise(ix[m], iy[m], seed ^ 0x77, 16.0)
    return out


def _texture_at(ix, iy, params: SynthParams):
    name, arg = _parse_texture(params.texture)
    if name == "checker":
        return _tex_checker(ix, iy, arg)
    if name == "noise":
        return _tex_noise(ix, iy, params.seed, arg)
    if name == "gradient":
        return _tex_gradient(ix, iy)
    return _tex_mixed(ix, iy, params.seed)


def synth_generate(params: SynthParams) -> VideoSequence:
    """Render the sequence described by params (mono frames)."""
    w, h = params.width, params.height
    xs = np.arange(w, dtype=np.float64)[None, :]
    ys = np.arange(h, dtype=np.float64)[:, None]
    frames = []
    for t in range(params.frames):
        sx = xs - t * params.velocity[0] + np.zeros((h, 1))
        sy = ys - t * params.velocity[1] + np.zeros((1, w))
        ix0 = np.floor(sx).astype(np.int64)
        iy0 = np.floor(sy).astype(np.int64)
        fx = sx - ix0
        fy = sy - iy0
        v00 = _texture_at(ix0, iy0, params)
        v01 = _texture_at(ix0 + 1, iy0, params)
        v10 = _texture_at(ix0, iy0 + 1, params)
        v11 = _texture_at(ix0 + 1, iy0 + 1, params)
        plane = ((1.0 - fy) * ((1.0 - fx) * v00 + fx * v01)
                 + fy * ((1.0 - fx) * v10 + fx * v11))
        if params.noise_sigma > 0:
            px = np.broadcast_to(np.arange(w, dtype=np.int64)[None, :], (h, w))
            py = np.broadcast_to(np.arange(h, dtype=np.int64)[:, None], (h, w))
            key = _hash_u64(_u64(params.seed), np.uint64(0x44),
                            np.uint64(t), _lattice_key(px, py))
            g = _gauss_from_keys(_hash_u64(key, np.uint64(0x55)),
                                 _hash_u64(key, np.uint64(0x66)))
            plane = plane + params.noise_sigma * g
        frames.append(Frame(np.clip(np.rint(plane), 0, 255).astype(np.uint8)))
    return VideoSequence(frames, (30, 1))
