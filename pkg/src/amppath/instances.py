"""Seeded generation of random sensing problems y = A x_o + w, plus the
per-coordinate observables (MSE / FA / DR / MD) of an estimate.

The matrix has iid N(0, 1/n_rows) entries, so columns have asymptotically
unit norm everywhere in the library, including the regimes some source
material states with unnormalized entries (their regularization levels are
then read in this normalized convention).
"""

from __future__ import annotations

import json
import struct
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError
from .priors import Prior
from .rng import open_uniform, standard_normal, substreams

_MAGIC = b"AMPINST1"


@dataclass(frozen=True)
class SparseSpec:
    """Exactly-k-sparse signal: k entries of the given amplitude on a
    uniformly random support, signs random unless random_sign is off."""

    k: int
    amplitude: float = 1.0
    random_sign: bool = True


@dataclass(frozen=True)
class InstanceConfig:
    n_rows: int
    n_cols: int
    signal: Prior | SparseSpec
    noise_variance: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise DimensionError(f"need positive dimensions, got {self.n_rows}x{self.n_cols}")
        if self.n_rows > self.n_cols:
            warnings.warn("n_rows > n_cols: not the undersampled regime", stacklevel=2)
        if isinstance(self.signal, SparseSpec) and not 0 <= self.signal.k <= self.n_cols:
            raise DimensionError(f"sparsity {self.signal.k} outside [0, {self.n_cols}]")
        if self.noise_variance < 0.0:
            raise DimensionError(f"noise variance must be >= 0, got {self.noise_variance}")

    def signal_json(self) -> dict:
        if isinstance(self.signal, SparseSpec):
            return {
                "type": "sparse",
                "k": self.signal.k,
                "amplitude": self.signal.amplitude,
                "random_sign": self.signal.random_sign,
            }
        return {"type": "prior", "atoms": [[v, w] for v, w in self.signal.atoms]}


@dataclass(frozen=True)
class ProblemInstance:
    A: np.ndarray
    x_o: np.ndarray
    w: np.ndarray
    y: np.ndarray
    config: InstanceConfig


@dataclass(frozen=True)
class Observables:
    mse: float
    fa: float
    dr: float
    md: float


def _draw_signal(cfg: InstanceConfig, gen: np.random.Generator) -> np.ndarray:
    N = cfg.n_cols
    if isinstance(cfg.signal, SparseSpec):
        spec = cfg.signal
        x = np.zeros(N)
        if spec.k > 0:
            support = gen.choice(N, size=spec.k, replace=False)
            vals = np.full(spec.k, spec.amplitude, dtype=np.float64)
            if spec.random_sign:
                vals *= np.where(open_uniform(gen, spec.k) < 0.5, -1.0, 1.0)
            x[support] = vals
        return x
    values = np.array([v for v, _ in cfg.signal.atoms])
    cum = np.cumsum([w for _, w in cfg.signal.atoms])
    idx = np.searchsorted(cum, open_uniform(gen, N), side="right")
    return values[np.minimum(idx, len(values) - 1)]


def sample_instance(cfg: InstanceConfig) -> ProblemInstance:
    """Draw one problem instance, bit-reproducible from cfg.seed.

    Matrix, signal, and noise come from independent substreams of the
    master seed, so the matrix is invariant under changes to the signal
    spec or noise level.
    """
    matrix_gen, signal_gen, noise_gen = substreams(cfg.seed, 3)
    n, N = cfg.n_rows, cfg.n_cols
    A = standard_normal(matrix_gen, (n, N)) / np.sqrt(n)
    x_o = _draw_signal(cfg, signal_gen)
    if cfg.noise_variance > 0.0:
        w = np.sqrt(cfg.noise_variance) * standard_normal(noise_gen, n)
    else:
        w = np.zeros(n)
    y = A @ x_o + w
    return ProblemInstance(A=A, x_o=x_o, w=w, y=y, config=cfg)


def compute_observables(x_hat, x_o, zero_tol: float = 0.0) -> Observables:
    """Per-coordinate averages of estimate quality.

    An entry counts as detected when |x_hat_i| > zero_tol; use zero for
    thresholding outputs (exact zeros by construction) and about
    1e-8 * max|x_hat| for iterative solvers that leave numerical dust.
    """
    x_hat = np.asarray(x_hat, dtype=np.float64)
    x_o = np.asarray(x_o, dtype=np.float64)
    if x_hat.shape != x_o.shape or x_hat.ndim != 1:
        raise DimensionError(f"shape mismatch: {x_hat.shape} vs {x_o.shape}")
    if zero_tol < 0.0:
        raise DimensionError(f"zero_tol must be >= 0, got {zero_tol}")
    N = x_hat.size
    detected = np.abs(x_hat) > zero_tol
    truth_nonzero = x_o != 0.0
    return Observables(
        mse=float(np.mean((x_hat - x_o) ** 2)),
        fa=float(np.count_nonzero(detected & ~truth_nonzero)) / N,
        dr=float(np.count_nonzero(detected)) / N,
        md=float(np.count_nonzero(~detected & truth_nonzero)) / N,
    )


def dump_instance(path, instance: ProblemInstance) -> None:
    """Binary dump: magic, (n, N, seed) as little-endian u64, a JSON config
    echo, then A (row-major), x_o, w, y as little-endian float64."""
    cfg = instance.config
    echo = json.dumps(
        {
            "n_rows": cfg.n_rows,
            "n_cols": cfg.n_cols,
            "noise_variance": cfg.noise_variance,
            "seed": cfg.seed,
            "signal": cfg.signal_json(),
        },
        sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<QQQI", cfg.n_rows, cfg.n_cols, cfg.seed, len(echo)))
        fh.write(echo)
        for arr in (instance.A, instance.x_o, instance.w, instance.y):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_instance(path) -> ProblemInstance:
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ValueError(f"{path}: not an instance dump")
        n, N, seed, echo_len = struct.unpack("<QQQI", fh.read(28))
        echo = json.loads(fh.read(echo_len).decode("utf-8"))
        sig = echo["signal"]
        if sig["type"] == "sparse":
            signal = SparseSpec(sig["k"], sig["amplitude"], sig["random_sign"])
        else:
            signal = Prior(tuple((v, w) for v, w in sig["atoms"]))
        cfg = InstanceConfig(n, N, signal, echo["noise_variance"], seed)
        data = np.frombuffer(fh.read(), dtype="<f8")
    sizes = [n * N, N, n, n]
    if data.size != sum(sizes):
        raise ValueError(f"{path}: truncated payload")
    A, x_o, w, y = np.split(data, np.cumsum(sizes)[:-1])
    return ProblemInstance(A=A.reshape(n, N).copy(), x_o=x_o.copy(), w=w.copy(), y=y.copy(), config=cfg)
