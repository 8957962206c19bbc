"""
Preprocessing a palm image
==========================

Every image goes through the same three steps before feature extraction:
contrast-limited adaptive histogram equalization, inversion (so veins
become bright) and a bilinear resize to a square working size.
"""
import tempfile
from pathlib import Path

import numpy as np

from palmvein import AheParams, SynthSpec, adaptive_hist_eq, load_image, negative, resize, synth_generate
from palmvein.imaging import encode_bmp, encode_pgm

# a synthetic palm: a flat background crossed by a few dark vein strokes
synth = synth_generate(SynthSpec(classes=2, images_per_class=2, size=128, seed=3))
img = synth.images[0]
print("raw image", img.pixels.shape, img.pixels.dtype, "range", img.pixels.min(), img.pixels.max())

# equalize in an 8 x 8 grid of tiles; clip_limit caps how far a tile's
# histogram may be stretched
eq = adaptive_hist_eq(img, AheParams(tile_grid=(8, 8), clip_limit=2.0))
print("after equalization, std", round(float(img.pixels.std()), 1), "->", round(float(eq.pixels.std()), 1))

# veins are dark under infrared light; invert so they carry the large values
inv = negative(eq)
assert np.array_equal(inv.pixels.astype(int), 255 - eq.pixels.astype(int))

small = resize(inv, 64, 64)
print("resized to", small.pixels.shape)

# the loader reads 24-bit BMP (as shipped with the PUT database) and binary PGM
with tempfile.TemporaryDirectory() as tmp:
    bmp = Path(tmp) / "palm.bmp"
    bmp.write_bytes(encode_bmp(img.pixels))
    pgm = Path(tmp) / "palm.pgm"
    pgm.write_bytes(encode_pgm(img))
    assert np.array_equal(load_image(bmp).pixels, img.pixels)
    assert np.array_equal(load_image(pgm).pixels, img.pixels)
    print("BMP and PGM round trips are lossless")
