"""Writes a small RGB source image and its horizontal and vertical flips, made
with Pillow, into ../data. Regenerate with `python3 flip_golden.py`."""

from pathlib import Path

import numpy as np
from PIL import Image

out = Path(__file__).resolve().parent.parent / "data"
out.mkdir(exist_ok=True)
levels = (np.arange(5 * 7 * 3).reshape(5, 7, 3) * 37 % 256).astype(np.uint8)
src = Image.fromarray(levels, "RGB")
src.save(out / "flip_src.png")
src.transpose(Image.Transpose.FLIP_LEFT_RIGHT).save(out / "flip_h_golden.png")
src.transpose(Image.Transpose.FLIP_TOP_BOTTOM).save(out / "flip_v_golden.png")
