"""A simulated reservoir: fading memory, echo state, and delay dependence."""

# %%
import numpy as np

from pzt_reservoir.reservoir import ReservoirConfig, build_reservoir, delay_to_leak, drive

res = build_reservoir(ReservoirConfig(seed=1))
print("spectral radius target", res.config.spectral_radius_target, "leak", round(res.leak, 5))

stream = np.random.default_rng(0).integers(0, 256, 1024).astype(np.uint8)
trace = drive(res, stream)
print("trace", trace.shape, "range", trace.min().round(3), trace.max().round(3))

# %% flip every bit of the first symbol; the difference dies out
flipped = stream.copy()
flipped[0] ^= 0xFF
gap = np.abs(drive(res, flipped) - trace)
for start in (0, 64, 256, 1024, 4096):
    print(f"samples {start:>5}+  max |diff| {gap[start:].max():.2e}")

# %% two different starting states forget where they began
x0, x1 = np.random.default_rng(2).uniform(-1, 1, (2, res.config.n_nodes))
print("tail gap from different initial states:",
      np.abs(drive(res, stream, x0)[-1024:] - drive(res, stream, x1)[-1024:]).max())

# %% longer delays mean larger per-substep leak, i.e. faster state turnover
for d in (5, 10, 20):
    print(f"{d:>2} ns -> leak {delay_to_leak(d, res.config.tau_ns):.4f}")
