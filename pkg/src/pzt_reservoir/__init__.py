"""Simulated PZT reservoir classification benchmark.

Encodes MNIST images and AudioMNIST clips into 1,024-symbol drive streams,
plays them through a simulated nonlinear fading-memory reservoir, and
compares a one-vs-rest logistic readout on the reservoir traces against
readout-only baselines under stratified cross-validation.
"""

from .audio_features import mfcc32
from .baselines import NoiseConfig, features_direct, features_noise, features_summed
from .datasets import (AudioClip, LabeledExample, load_idx_images, load_idx_labels,
                       load_wav, stratified_subsample)
from .encoding import (binarize_fixed, binarize_mean, hilbert_index_to_xy, scan_hilbert,
                       scan_vertical, upsample_nearest, window_encode)
from .evaluation import ExperimentReport, accuracy, kfold_plan, macro_f1, run_experiment
from .readout import ReadoutModel, TrainConfig, decision_scores, predict, train_ovr
from .reservoir import (Reservoir, ReservoirConfig, build_reservoir, delay_to_leak, drive,
                        drive_batch, spectral_radius)

__version__ = "0.1.0"
