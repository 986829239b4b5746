"""Synthetic problem generation and on-disk matrix formats.

The synthetic generator plants an exponentially decaying spectrum,
sigma_j = decay^j, behind uniformly random orthogonal factors, and builds
the right-hand side from a standard-normal planted solution plus a small
off-column-space noise term, so residual and error stay distinguishable.

Matrices travel either as plain CSV (one row per line, comma-separated
decimal floats) or as a little-endian binary format: the 8-byte magic
"DMATRX01", then rows and cols as unsigned 64-bit integers, then
rows x cols IEEE-754 doubles in row-major order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import DimensionError
from .linalg import RngStream, as_matrix, qr_thin
from .solver import Problem

MAGIC = b"DMATRX01"
NOISE_LEVEL = 0.01


def generate_problem(n: int, d: int, decay: float, seed: int) -> Problem:
    """Build the planted-spectrum synthetic least-squares instance.

    a = U diag(decay^1..decay^d) V^T with U (n x d) and V (d x d) drawn
    Haar via QR of Gaussians; b = a x_planted + 0.01 * noise.  Everything
    is a deterministic function of the seed.
    """
    if not (n >= d >= 1):
        raise DimensionError(f"generate_problem: need n >= d >= 1, got n={n}, d={d}")
    if not (0.0 < decay < 1.0):
        raise DimensionError(f"generate_problem: decay must be in (0,1), got {decay}")
    rng = RngStream(seed)
    u, _ = qr_thin(rng.substream(0).gen.standard_normal((n, d)))
    v, _ = qr_thin(rng.substream(1).gen.standard_normal((d, d)))
    sigma = decay ** np.arange(1, d + 1, dtype=np.float64)
    a = (u * sigma) @ v.T
    x_planted = rng.substream(2).gen.standard_normal(d)
    b = a @ x_planted + NOISE_LEVEL * rng.substream(3).gen.standard_normal(n)
    return Problem(a, b)


def save_matrix(path, m, fmt: str = "csv") -> None:
    """Write a matrix as CSV or DMATRX01 binary."""
    m = as_matrix(m, "m")
    path = Path(path)
    if fmt == "csv":
        np.savetxt(path, m, delimiter=",", fmt="%.17g")
    elif fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<QQ", m.shape[0], m.shape[1]))
            fh.write(np.ascontiguousarray(m, dtype="<f8").tobytes())
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")


def load_matrix(path) -> np.ndarray:
    """Read a matrix, sniffing the binary magic and falling back to CSV."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
        if head == MAGIC:
            meta = fh.read(16)
            if len(meta) != 16:
                raise DimensionError(f"{path}: truncated header")
            rows, cols = struct.unpack("<QQ", meta)
            payload = fh.read()
            expected = rows * cols * 8
            if len(payload) != expected:
                raise DimensionError(
                    f"{path}: payload is {len(payload)} bytes, header says {expected}"
                )
            data = np.frombuffer(payload, dtype="<f8").reshape(rows, cols)
            return as_matrix(data, str(path))
    return as_matrix(np.loadtxt(path, delimiter=",", ndmin=2), str(path))


def save_vector(path, v, fmt: str = "csv") -> None:
    """Write a vector as a single-column matrix file."""
    save_matrix(path, np.asarray(v, dtype=np.float64).reshape(-1, 1), fmt)


def load_vector(path) -> np.ndarray:
    """Read a single-column (or single-row) matrix file as a vector."""
    m = load_matrix(path)
    if 1 not in m.shape:
        raise DimensionError(f"{path}: expected a vector, got shape {m.shape}")
    return m.ravel()
