"""Python-facing layer over the numba range coder.

Payloads are self-contained byte strings: the encoder state begins with a
zero headroom byte and the decoder verifies it.  Context banks are plain
int32 arrays of 12-bit probabilities, freshly initialized per payload so
every payload decodes independently given the stream header.
"""

import numpy as np

from . import _kernels
from .errors import CorruptPayload

PROB_INIT = _kernels.PROB_INIT


def new_contexts(*shape) -> np.ndarray:
    return np.full(shape, PROB_INIT, dtype=np.int32)


def new_encoder_state() -> np.ndarray:
    return np.zeros(5, dtype=np.int64)


def new_decoder_state() -> np.ndarray:
    return np.zeros(3, dtype=np.int64)


def as_byte_array(payload: bytes) -> np.ndarray:
    return np.frombuffer(payload, dtype=np.uint8)


class PayloadDecodeError(CorruptPayload):
    pass


def run_decoder(fn, *args):
    """Invoke a numba decode kernel, mapping its ValueErrors to CorruptPayload."""
    try:
        return fn(*args)
    except ValueError as exc:
        raise PayloadDecodeError(str(exc)) from None
