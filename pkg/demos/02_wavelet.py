"""
Haar wavelet features
=====================

A two-level orthonormal Haar transform splits the image into an
approximation band and three detail bands per level.  The transform is
an orthogonal change of basis, so it is invertible and keeps the energy.
"""
import numpy as np

from palmvein import SubbandSelection, dwt2_forward, dwt2_inverse, extract_features

rng = np.random.default_rng(0)
img = rng.uniform(0, 255, (128, 128))

pyr = dwt2_forward(img, levels=2)

# the pyramid is stored as one array in the usual nested-quadrant layout;
# band() slices out a single subband
for level in (2, 1):
    names = ("LL", "LH", "HL", "HH") if level == 2 else ("LH", "HL", "HH")
    for name in names:
        band = pyr.band(name, level)
        print(f"level {level} {name}: shape {band.shape}, energy share {np.sum(band**2) / np.sum(img**2):.4f}")

# perfect reconstruction and Parseval's identity
back = dwt2_inverse(pyr)
print("round-trip RMS error", np.sqrt(np.mean((back - img) ** 2)))
print("energy drift", abs(np.sum(pyr.layout**2) - np.sum(img**2)) / np.sum(img**2))

# feature vectors: every coefficient, only the approximation band, or the deepest level
for sel in SubbandSelection:
    print(f"{sel.value:>14}: {extract_features(pyr, sel).size} features")

# a constant image has all of its energy in LL and none in the details
flat = dwt2_forward(np.full((8, 8), 10.0), levels=2)
print("constant image LL:", flat.band("LL").ravel(), "| detail max", np.abs(flat.band("HH", 1)).max())
