"""8x8 DCT residual coding with uniform quantization and adaptive contexts.

The encoder-side reconstruction is produced by exactly the decoder's path
(dequantize, inverse transform, add prediction, round, clip), which keeps
the P-frame loop drift-free by construction.
"""

from dataclasses import dataclass

import numpy as np
from scipy.fft import dctn, idctn

from . import _kernels, rangecoder

BLOCK = 8
_NCTX_SIG = 32
_NCTX_MAG = 20


@dataclass(frozen=True)
class Quantizer:
    """Flat quantizer; step = qp/4 for all DCT coefficients."""

    qp: int

    def __post_init__(self):
        if not 1 <= self.qp <= 255:
            raise ValueError("qp must be in [1, 255]")

    @property
    def step(self) -> float:
        return self.qp / 4.0


def _zigzag_order():
    keys = []
    for y in range(BLOCK):
        for x in range(BLOCK):
            d = x + y
            keys.append((d, y if d % 2 == 0 else x, y, x))
    keys.sort()
    order = np.array([y * BLOCK + x for (_, _, y, x) in keys], dtype=np.int64)
    return order


ZIGZAG = _zigzag_order()
INV_ZIGZAG = np.argsort(ZIGZAG)


def _pad_to_blocks(plane):
    h, w = plane.shape
    ph = (-h) % BLOCK
    pw = (-w) % BLOCK
    if ph or pw:
        plane = np.pad(plane, ((0, ph), (0, pw)), mode="edge")
    return plane


def _to_blocks(plane):
    """(H, W) -> (nblocks, 8, 8) in raster block order."""
    h, w = plane.shape
    nbh, nbw = h // BLOCK, w // BLOCK
    return plane.reshape(nbh, BLOCK, nbw, BLOCK).transpose(0, 2, 1, 3).reshape(
        nbh * nbw, BLOCK, BLOCK)


def _from_blocks(blocks, h, w):
    nbh, nbw = h // BLOCK, w // BLOCK
    return blocks.reshape(nbh, nbw, BLOCK, BLOCK).transpose(0, 2, 1, 3).reshape(h, w)


def quantize_plane(residual, q: Quantizer):
    """Forward DCT + quantization of a float residual plane.

    Returns int32 quantized coefficients in zigzag order, (nblocks, 64).
    """
    padded = _pad_to_blocks(np.asarray(residual, dtype=np.float64))
    blocks = _to_blocks(padded)
    coeffs = dctn(blocks, axes=(1, 2), norm="ortho")
    qc = np.rint(coeffs / q.step).astype(np.int32)
    return qc.reshape(-1, BLOCK * BLOCK)[:, ZIGZAG]


def dequantize_plane(qcoeffs, q: Quantizer, h, w):
    """Inverse of quantize_plane: reconstructed residual, cropped to (h, w)."""
    ph = h + ((-h) % BLOCK)
    pw = w + ((-w) % BLOCK)
    raster = np.asarray(qcoeffs, dtype=np.float64)[:, INV_ZIGZAG]
    blocks = raster.reshape(-1, BLOCK, BLOCK) * q.step
    rec = idctn(blocks, axes=(1, 2), norm="ortho")
    return _from_blocks(rec, ph, pw)[:h, :w]


def _coeff_contexts():
    return (rangecoder.new_contexts(1),           # coded-block flag
            rangecoder.new_contexts(_NCTX_SIG),   # significance by position
            rangecoder.new_contexts(1),           # sign
            rangecoder.new_contexts(_NCTX_MAG),   # magnitude prefix
            rangecoder.new_contexts(_NCTX_MAG))   # magnitude suffix


class ResidualEncoder:
    """Multi-plane residual payload under one range-coder stream.

    Planes are coded in call order (luma first, then chroma); luma and
    chroma use separate context banks but share the coder state, so the
    decoder must walk the planes in the same order.
    """

    def __init__(self, cap_bytes):
        self.out = np.empty(cap_bytes, dtype=np.uint8)
        self.st = rangecoder.new_encoder_state()
        _kernels.rc_enc_init(self.st)
        self._banks = {}

    def _bank(self, kind):
        if kind not in self._banks:
            self._banks[kind] = _coeff_contexts()
        return self._banks[kind]

    def encode_plane(self, qcoeffs, kind):
        cbf, sig, sgn, mpfx, msfx = self._bank(kind)
        _kernels.encode_coeff_blocks(
            np.ascontiguousarray(qcoeffs), cbf, sig, sgn, mpfx, msfx,
            self.out, self.st)

    def finish(self) -> bytes:
        n = _kernels.rc_enc_flush(self.st, self.out)
        return bytes(self.out[:n])


class ResidualDecoder:
    def __init__(self, payload: bytes):
        self.data = rangecoder.as_byte_array(payload)
        self.st = rangecoder.new_decoder_state()
        rangecoder.run_decoder(_kernels.rc_dec_init, self.st, self.data)
        self._banks = {}

    def _bank(self, kind):
        if kind not in self._banks:
            self._banks[kind] = _coeff_contexts()
        return self._banks[kind]

    def decode_plane(self, nblocks, kind):
        cbf, sig, sgn, mpfx, msfx = self._bank(kind)
        return rangecoder.run_decoder(
            _kernels.decode_coeff_blocks, self.data, nblocks, BLOCK * BLOCK,
            cbf, sig, sgn, mpfx, msfx, self.st)


def payload_cap(*plane_shapes):
    """Pessimistic payload size: one byte per worst-case bin."""
    total = 64
    for (h, w) in plane_shapes:
        nblocks = ((h + BLOCK - 1) // BLOCK) * ((w + BLOCK - 1) // BLOCK)
        total += nblocks * (1 + 64 * 30)
    return total


def reconstruct_plane(pred_plane, qcoeffs, q: Quantizer):
    """Prediction + dequantized residual, rounded and clipped to 8 bits.

    This is the single reconstruction path shared by encoder and decoder."""
    h, w = pred_plane.shape
    rec = pred_plane.astype(np.float64) + dequantize_plane(qcoeffs, q, h, w)
    return np.clip(np.rint(rec), 0, 255).astype(np.uint8)
