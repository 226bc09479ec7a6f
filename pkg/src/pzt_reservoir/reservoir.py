"""Software stand-in for the PZT cube.

The cube is modelled as a leaky, tanh-coupled state system read through a
single nonlinear probe. Each of the 1,024 drive symbols is held for 8
substeps, and every substep emits one output sample, giving 8,192 samples
per example. The inter-symbol delay only changes the leak rate.

Per substep, with pad vector ``u`` of the current symbol::

    x <- (1 - leak) * x + leak * tanh(W @ x + W_in @ u + b)
    y  = tanh(probe @ x)

The state is zeroed before every example (the reset between samples).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numba
import numpy as np

from . import rng
from .encoding import SEQ_LEN, WINDOW, symbol_to_pads
from .errors import ConfigInvalid, InvalidParams, NoConvergence, WrongLength

SUBSTEPS = 8
TRACE_LEN = SEQ_LEN * SUBSTEPS
DELAYS_NS = (5.0, 10.0, 20.0)
_LEAK_FLOOR = 1e-6


@dataclass(frozen=True)
class ReservoirConfig:
    n_nodes: int = 64
    spectral_radius_target: float = 0.95
    input_scale: float = 1.0
    bias_scale: float = 0.1
    tau_ns: float = 20.0
    substeps_per_symbol: int = SUBSTEPS
    delay_ns: float = 10.0
    seed: int = 0

    def validate(self) -> None:
        if self.n_nodes < 1:
            raise ConfigInvalid(f"n_nodes must be >= 1, got {self.n_nodes}")
        if not 0.0 < self.spectral_radius_target < 1.0:
            raise ConfigInvalid(f"spectral_radius_target must lie in (0, 1), got {self.spectral_radius_target}")
        if self.tau_ns <= 0 or self.delay_ns <= 0:
            raise ConfigInvalid("tau_ns and delay_ns must be positive")
        if self.input_scale < 0 or self.bias_scale < 0:
            raise ConfigInvalid("input_scale and bias_scale must be non-negative")
        if self.substeps_per_symbol * SEQ_LEN != TRACE_LEN:
            raise ConfigInvalid(f"substeps_per_symbol must be {SUBSTEPS}")

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class Reservoir:
    config: ReservoirConfig
    weights: np.ndarray = field(repr=False)        # (n, n) recurrent coupling
    input_weights: np.ndarray = field(repr=False)  # (n, 8)
    bias: np.ndarray = field(repr=False)           # (n,)
    probe: np.ndarray = field(repr=False)          # (n,), unit norm
    leak: float = 0.0

    def same_as(self, other: "Reservoir") -> bool:
        return (self.config == other.config and self.leak == other.leak
                and all(np.array_equal(a, b) for a, b in zip(self._arrays(), other._arrays())))

    def _arrays(self):
        return self.weights, self.input_weights, self.bias, self.probe


def delay_to_leak(delay_ns: float, tau_ns: float, substeps: int = SUBSTEPS) -> float:
    """Leak per substep: ``1 - exp(-(delay / substeps) / tau)``, clamped away from 0 and 1."""
    if delay_ns <= 0 or tau_ns <= 0 or substeps <= 0:
        raise InvalidParams(f"delay_ns, tau_ns and substeps must be positive "
                            f"(got {delay_ns}, {tau_ns}, {substeps})")
    leak = -np.expm1(-(delay_ns / substeps) / tau_ns)
    return float(min(max(leak, _LEAK_FLOOR), 1.0 - _LEAK_FLOOR))


def spectral_radius(m, tol: float = 1e-10, max_iter: int = 10_000, block: int = 6,
                    seed: int = 0) -> float:
    """Largest eigenvalue magnitude by orthogonal (subspace) iteration.

    A block of ``block`` vectors is iterated and re-orthonormalised; the
    estimate is the largest Ritz value magnitude of the projected matrix,
    which also handles a dominant complex-conjugate pair. Stops once the
    estimate changes by at most ``tol`` (relative) on three successive steps.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    n = m.shape[0]
    if n == 0 or not np.any(m):
        return 0.0
    p = min(n, block)
    q, _ = np.linalg.qr(rng.generator(seed).standard_normal((n, p)))
    prev = np.inf
    stable = 0
    for _ in range(max_iter):
        z = m @ q
        est = float(np.max(np.abs(np.linalg.eigvals(q.T @ z))))
        if not np.any(z):
            return 0.0
        q, _ = np.linalg.qr(z)
        if abs(est - prev) <= tol * max(est, np.finfo(float).tiny):
            stable += 1
            if stable >= 3:
                return est
        else:
            stable = 0
        prev = est
    raise NoConvergence(f"spectral radius did not settle within {max_iter} iterations")


def build_reservoir(config: ReservoirConfig) -> Reservoir:
    config.validate()
    g = rng.generator(config.seed)
    n = config.n_nodes
    w = g.standard_normal((n, n))
    rho = spectral_radius(w, seed=config.seed)
    if rho == 0.0:
        raise ConfigInvalid("random coupling matrix has zero spectral radius")
    w *= config.spectral_radius_target / rho
    w_in = g.uniform(-config.input_scale, config.input_scale, size=(n, WINDOW))
    b = g.uniform(-config.bias_scale, config.bias_scale, size=n)
    v = g.standard_normal(n)
    v /= np.linalg.norm(v)
    for a in (w, w_in, b, v):
        a.flags.writeable = False
    leak = delay_to_leak(config.delay_ns, config.tau_ns, config.substeps_per_symbol)
    return Reservoir(config, w, w_in, b, v, leak)


@numba.njit(cache=True)
def _run(w, w_in, b, v, leak, pads, substeps, x0, out):
    n = w.shape[0]
    n_pads = w_in.shape[1]
    x = x0.copy()
    drive = np.empty(n)
    pre = np.empty(n)
    keep = 1.0 - leak
    t = 0
    for s in range(pads.shape[0]):
        for i in range(n):
            acc = b[i]
            for p in range(n_pads):
                acc += w_in[i, p] * pads[s, p]
            drive[i] = acc
        for _ in range(substeps):
            for i in range(n):
                acc = drive[i]
                for j in range(n):
                    acc += w[i, j] * x[j]
                pre[i] = acc
            y = 0.0
            for i in range(n):
                x[i] = keep * x[i] + leak * np.tanh(pre[i])
                y += v[i] * x[i]
            out[t] = np.tanh(y)
            t += 1


@numba.njit(cache=True, parallel=True)
def _run_batch(w, w_in, b, v, leak, pads, substeps, out):
    x0 = np.zeros(w.shape[0])
    for k in numba.prange(pads.shape[0]):
        _run(w, w_in, b, v, leak, pads[k], substeps, x0, out[k])


def _check_stream(stream) -> np.ndarray:
    stream = np.asarray(stream)
    if stream.shape[-1:] != (SEQ_LEN,):
        raise WrongLength(f"expected {SEQ_LEN} symbols, got shape {stream.shape}")
    return stream


def drive(r: Reservoir, stream, initial_state=None) -> np.ndarray:
    """Play one 1,024-symbol stream into the reservoir, return the 8,192-sample trace.

    ``initial_state`` defaults to zeros (the reset state); other values are
    only useful for probing the echo-state property.
    """
    stream = _check_stream(stream)
    if stream.ndim != 1:
        raise WrongLength(f"expected a single stream, got shape {stream.shape}")
    x0 = np.zeros(r.config.n_nodes) if initial_state is None else np.asarray(initial_state, np.float64)
    if x0.shape != (r.config.n_nodes,):
        raise ValueError(f"initial_state must have shape ({r.config.n_nodes},)")
    out = np.empty(TRACE_LEN)
    _run(r.weights, r.input_weights, r.bias, r.probe, r.leak,
         symbol_to_pads(stream), r.config.substeps_per_symbol, x0, out)
    return out


def drive_batch(r: Reservoir, streams, threads: int | None = None,
                chunk: int = 256, progress=None) -> np.ndarray:
    """Traces for a ``(count, 1024)`` batch of streams, shape ``(count, 8192)``.

    Work is split across numba threads per example; each trace is computed
    by the same sequential kernel, so results do not depend on ``threads``
    or ``chunk``.
    """
    streams = _check_stream(streams)
    if streams.ndim != 2:
        raise WrongLength(f"expected a 2D batch of streams, got shape {streams.shape}")
    out = np.empty((len(streams), TRACE_LEN))
    prev_threads = numba.get_num_threads()
    if threads is not None:
        numba.set_num_threads(max(1, min(threads, numba.config.NUMBA_NUM_THREADS)))
    try:
        for start in range(0, len(streams), chunk):
            stop = min(start + chunk, len(streams))
            _run_batch(r.weights, r.input_weights, r.bias, r.probe, r.leak,
                       symbol_to_pads(streams[start:stop]), r.config.substeps_per_symbol,
                       out[start:stop])
            if progress is not None:
                progress(stop, len(streams))
    finally:
        numba.set_num_threads(prev_threads)
    return out


def dump_traces(path, traces) -> None:
    """One trace per line, comma-separated, full float precision."""
    with open(path, "w") as f:
        for t in np.atleast_2d(traces):
            f.write(",".join(repr(float(x)) for x in t) + "\n")
