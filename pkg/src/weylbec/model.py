"""Bulk Bloch Hamiltonians: the local form and QWZ-type test families.

All 2x2 matrices here are traceless Hermitian and are stored as the real
triple ``(d, o_re, o_im)`` of the layout::

    [[ d,       o_re + i o_im],
     [ o_re - i o_im,      -d]]

Fields may be numpy arrays, in which case every operation is elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .expr import SurfacePair

#: Hadamard-type conjugation relating the QWZ family to the local form.
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


@dataclass(frozen=True)
class Hermitian2:
    d: np.ndarray | float
    o_re: np.ndarray | float
    o_im: np.ndarray | float

    @property
    def shape(self):
        return np.broadcast_shapes(np.shape(self.d), np.shape(self.o_re), np.shape(self.o_im))

    def norm(self):
        """Positive eigenvalue, i.e. half the spectral gap."""
        return np.sqrt(self.d**2 + self.o_re**2 + self.o_im**2)

    def eigenvalues(self):
        r = self.norm()
        return -r, r

    def matrix(self):
        d = np.broadcast_to(self.d, self.shape)
        o = np.broadcast_to(self.o_re + 1j * np.asarray(self.o_im), self.shape)
        out = np.empty(self.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = d
        out[..., 1, 1] = -d
        out[..., 0, 1] = o
        out[..., 1, 0] = np.conj(o)
        return out

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m)
        return cls(
            0.5 * (m[..., 0, 0] - m[..., 1, 1]).real,
            m[..., 0, 1].real,
            m[..., 0, 1].imag,
        )

    def lower_eigenvector(self):
        """Normalised eigenvector of the negative eigenvalue, shape (..., 2).

        The gauge is fixed by making the largest-modulus component real and
        positive, so the result is a deterministic function of the matrix.
        """
        d = np.asarray(self.d, dtype=float)
        o = np.asarray(self.o_re, dtype=float) + 1j * np.asarray(self.o_im, dtype=float)
        d, o = np.broadcast_arrays(d, o)
        r = np.sqrt(d**2 + np.abs(o) ** 2)
        # Two algebraically equivalent kernels; pick the better-conditioned one.
        v1 = np.stack([o, -(d + r) + 0j], axis=-1)
        v2 = np.stack([(d - r) + 0j, np.conj(o)], axis=-1)
        use1 = (d + r) >= (r - d)
        v = np.where(use1[..., None], v1, v2)
        v = v / np.linalg.norm(v, axis=-1, keepdims=True)
        big = np.argmax(np.abs(v), axis=-1)
        pivot = np.take_along_axis(v, big[..., None], axis=-1)
        v = v * (np.conj(pivot) / np.abs(pivot))
        return v


def local_hamiltonian(a, b, theta) -> Hermitian2:
    """Local model with ``b`` on the diagonal and ``a + exp(i theta)`` above it."""
    a = np.asarray(a, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return Hermitian2(np.asarray(b, dtype=float), a + np.cos(theta), np.sin(theta))


def qwz_hamiltonian(n: int, u: float, kx, ky) -> Hermitian2:
    """``sin(n kx) sx + sin(ky) sy + (u + cos(n kx) + cos(ky)) sz``."""
    kx = np.asarray(kx, dtype=float)
    ky = np.asarray(ky, dtype=float)
    return Hermitian2(u + np.cos(n * kx) + np.cos(ky), np.sin(n * kx), -np.sin(ky))


def conjugate_to_local(n: int, u: float, kx):
    """Local-form data (a, b) of the QWZ family after the Hadamard conjugation.

    ``T^* H_n(kx, ky) T == local_hamiltonian(a, b, ky)``.
    """
    kx = np.asarray(kx, dtype=float)
    a = u + np.cos(n * kx)
    b = np.sin(n * kx)
    if a.shape == ():
        return float(a), float(b)
    return a, b


@dataclass(frozen=True)
class Bands:
    lower: tuple[float, float]
    upper: tuple[float, float]

    def gap_edge(self):
        return self.upper[0]


def essential_spectrum_bands(a: float, b: float) -> Bands:
    """Essential spectrum of the half-space operator at fixed (a, b)."""
    inner = float(np.sqrt(b * b + (abs(a) - 1.0) ** 2))
    outer = float(np.sqrt(b * b + (abs(a) + 1.0) ** 2))
    return Bands((-outer, -inner), (inner, outer))


def gap_edge(a, b):
    """Lower edge of the positive essential band; vanishes only at (+-1, 0)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.sqrt(b * b + (np.abs(a) - 1.0) ** 2)


class BulkModel:
    """A map from T^3 to traceless Hermitian 2x2 matrices (vectorised)."""

    name = "bulk"

    def hamiltonian(self, kx, ky, kz) -> Hermitian2:
        raise NotImplementedError


class LocalFormModel(BulkModel):
    """``H(kx, ky, kz) = local_hamiltonian(a(kx, ky), b(kx, ky), kz)``."""

    def __init__(self, pair: SurfacePair, name: str = "local"):
        self.pair = pair
        self.name = name

    def hamiltonian(self, kx, ky, kz):
        a, b = self.pair.values(kx, ky)
        return local_hamiltonian(a, b, kz)

    def __repr__(self):
        return f"LocalFormModel({self.name!r}: {self.pair})"


class GenericModel(BulkModel):
    def __init__(self, func: Callable[..., Hermitian2], name: str = "generic"):
        self.func = func
        self.name = name

    def hamiltonian(self, kx, ky, kz):
        return self.func(kx, ky, kz)

    def __repr__(self):
        return f"GenericModel({self.name!r})"


def qwz_model(n: int, u: float) -> GenericModel:
    """QWZ family on T^2, lifted to T^3 with kz a dummy coordinate."""
    return GenericModel(lambda kx, ky, kz: qwz_hamiltonian(n, u, kx, ky), name=f"qwz:{n}:{u}")
