#!/usr/bin/env python
# Zeros ("silent points") and local maxima of a noisy chirp spectrogram
import numpy as np

from gwhf.sampler import Grid, Signal, sample_stft_field
from gwhf.zeros import Disk, classify_critical_points, find_zeros

grid = Grid.disk(8.0, 0.05)
window = Disk(0j, 6.0)
chirp = Signal("chirp", amplitude=4.0, rate=1.0)

for label, signal in (("noise", None), ("chirp + noise", chirp)):
    field = sample_stft_field("gauss", signal, grid, seed=11)
    zeros = find_zeros(field, window)
    crit = classify_critical_points(field, window)
    labels = np.array([z.label for z in crit.zeros])
    print(f"{label:14s} zeros {len(zeros):3d}  maxima {np.sum(labels == 'max'):3d}"
          f"  saddles {np.sum(labels == 'saddle'):3d}")

# the chirp pushes zeros out of the band where its energy concentrates;
# compare counts near the ridge y = -x of the rescaled plane with counts away from it
field = sample_stft_field("gauss", chirp, grid, seed=11)
z = find_zeros(field, window).locations
near = np.abs(z.imag + z.real) < 1.0
print(f"zeros within distance ~0.7 of the ridge: {near.sum()}, elsewhere: {(~near).sum()}")
