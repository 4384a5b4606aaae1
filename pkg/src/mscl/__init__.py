"""Low-delay video codec with motion-adaptive frame downsampling.

Large motion defeats a range-limited flow estimator; shrinking both frames
before estimation (and optionally coding the down-scaled vectors, rescaling
at the decoder) brings the motion back into range.  This package bundles the
codec, the per-frame factor selection machinery, a deterministic synthetic
sequence generator, and the analysis metrics used to study when the
adaptation helps.
"""

from .adaptive import (AdaptConfig, DownsampleFactor, FACTOR_ONE,
                       all_factors, apply_motion_threshold, decode_side_info,
                       decide_factor, downscale_flow, encode_side_info,
                       evaluate_candidate, rescale_flow, select_factor)
from .blockmatch import (BlockMatchPredictor, FlowPredictorParams,
                         estimate_flow_block, mean_flow_magnitude)
from .codec import (DecodeResult, EncodeResult, decode_sequence,
                    encode_sequence)
from .errors import MsclError
from .frame import (Frame, FlowField, backward_warp, downsample_frame, psnr,
                    resample_frame, upsample_flow_bilinear)
from .metrics import (BdRateResult, RdCurve, bd_rate, scene_complexity,
                      sequence_motion_stats)
from .residual import Quantizer
from .synth import SynthParams, VideoSequence, synth_generate
from .video import read_y4m, write_y4m

__version__ = "0.1.0"
