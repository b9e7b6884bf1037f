"""Random regression instances y ~ A x with i.i.d. Gaussian data and design."""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

_HEADER = struct.Struct("<qqdQ")


@dataclass(frozen=True, eq=False)
class Instance:
    """One draw of (y, A).

    ``y`` has i.i.d. N(0, sigma_y^2) entries and ``A`` (M x N, M < N) has
    i.i.d. N(0, 1/M) entries, so columns have unit norm on average.
    """

    y: np.ndarray
    A: np.ndarray
    sigma_y: float
    seed: int

    @property
    def M(self) -> int:
        return self.A.shape[0]

    @property
    def N(self) -> int:
        return self.A.shape[1]

    @property
    def alpha(self) -> float:
        return self.M / self.N

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.sigma_y == other.sigma_y and self.seed == other.seed
                and np.array_equal(self.A, other.A) and np.array_equal(self.y, other.y))


def standard_normals(rng: np.random.Generator, size) -> np.ndarray:
    """Box-Muller transform of the generator's uniform doubles.

    Only ``Generator.random`` is used, so the draws depend on the PCG64 bit
    stream and IEEE arithmetic, not on the library's normal sampler.
    """
    n = int(np.prod(size))
    k = (n + 1) // 2
    u1 = 1.0 - rng.random(k)  # in (0, 1]
    u2 = rng.random(k)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * k)
    z[0::2] = r * np.cos(2.0 * np.pi * u2)
    z[1::2] = r * np.sin(2.0 * np.pi * u2)
    return z[:n].reshape(size)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))


def sample_instance(M: int, N: int, sigma_y: float = 1.0, seed: int = 0) -> Instance:
    """Draw a reproducible instance from a 64-bit seed."""
    if not (0 < M < N):
        raise ValueError(f"need 0 < M < N, got M={M}, N={N}")
    if not sigma_y > 0:
        raise ValueError(f"sigma_y must be positive, got {sigma_y}")
    rng = make_rng(seed)
    y = sigma_y * standard_normals(rng, (M,))
    A = standard_normals(rng, (M, N)) / np.sqrt(M)
    return Instance(y=y, A=A, sigma_y=float(sigma_y), seed=int(seed))


def center_instance(inst: Instance) -> Instance:
    """Subtract the mean of y and the column means of A."""
    y = inst.y - inst.y.mean()
    A = inst.A - inst.A.mean(axis=0, keepdims=True)
    return replace(inst, y=y, A=A)


def normalize_columns(inst: Instance) -> tuple[Instance, np.ndarray]:
    """Rescale every column of A to unit Euclidean norm.

    Returns the new instance and the original column norms, so an estimate
    ``x`` for the normalized design corresponds to ``x / norms`` in the
    original coordinates.
    """
    norms = np.linalg.norm(inst.A, axis=0)
    if np.any(norms == 0):
        raise ValueError("cannot normalize an all-zero column")
    return replace(inst, A=inst.A / norms), norms


def save_instance(inst: Instance, path, fmt: str | None = None) -> None:
    """Write header (M, N, sigma_y, seed), row-major A, then y.

    ``fmt`` is ``"bin"`` (little-endian int64/int64/float64/uint64 header,
    float64 payload) or ``"csv"``; inferred from the suffix when omitted.
    """
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "bin")
    if fmt == "bin":
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(inst.M, inst.N, inst.sigma_y,
                                  inst.seed & 0xFFFFFFFFFFFFFFFF))
            fh.write(np.ascontiguousarray(inst.A, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(inst.y, dtype="<f8").tobytes())
    elif fmt == "csv":
        with open(path, "w") as fh:
            fh.write(f"{inst.M},{inst.N},{inst.sigma_y!r},{inst.seed}\n")
            for row in inst.A:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
            fh.write(",".join(repr(float(v)) for v in inst.y) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def load_instance(path, fmt: str | None = None) -> Instance:
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "bin")
    if fmt == "bin":
        raw = path.read_bytes()
        M, N, sigma_y, seed = _HEADER.unpack_from(raw, 0)
        body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
        if body.size != M * N + M:
            raise ValueError("truncated instance file")
        A = body[: M * N].reshape(M, N).astype(float)
        y = body[M * N:].astype(float)
    elif fmt == "csv":
        lines = path.read_text().strip().splitlines()
        head = lines[0].split(",")
        M, N = int(head[0]), int(head[1])
        sigma_y, seed = float(head[2]), int(head[3])
        A = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:1 + M]])
        y = np.array([float(v) for v in lines[1 + M].split(",")])
        if A.shape != (M, N) or y.shape != (M,):
            raise ValueError("malformed instance file")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return Instance(y=y, A=A, sigma_y=float(sigma_y), seed=int(seed))
