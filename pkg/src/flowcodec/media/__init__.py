"""Video volumes, frame I/O, synthetic test videos and PSNR."""

from ._metrics import PSNR_CAP, REC601, luma, mse, psnr
from ._synthetic import SyntheticSpec, SyntheticTruth, make_synthetic, warp_wrapped
from ._video import FRAME_PATTERN, VideoVolume, from_uint8, load_video, save_video, to_uint8

__all__ = [
    "VideoVolume", "load_video", "save_video", "to_uint8", "from_uint8", "FRAME_PATTERN",
    "SyntheticSpec", "SyntheticTruth", "make_synthetic", "warp_wrapped",
    "psnr", "mse", "luma", "PSNR_CAP", "REC601",
]
