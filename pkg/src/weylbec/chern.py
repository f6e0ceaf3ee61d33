"""Lattice (Fukui-Hatsugai-Suzuki) Chern numbers of the lower-band line bundle.

A closed surface is sampled on a rectangular grid of two parameters ``(u, v)``.
Link variables are normalised overlaps of lower eigenvectors between
neighbouring grid points, and the Chern number is the sum of plaquette
phases divided by 2 pi. The pair ``(u, v)`` fixes the orientation:

* ``torus``   over (kx, ky) at fixed kz,
* ``slice_x`` over (ky, kz) at fixed kx,
* ``slice_y`` over (kx, kz) at fixed ky,
* ``tube``    over (s, kz), with s running anticlockwise around a circle in (kx, ky),
* ``sphere``  over (polar, azimuth), which is the outward orientation in T^3.

A non-periodic first parameter (the sphere's polar angle) includes both
poles; at a pole every azimuth maps to the same point, so the deterministic
gauge returns one eigenvector there and the degenerate links are trivial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import GapClosed, NonIntegerResidual
from .model import BulkModel, Hermitian2

TWO_PI = 2.0 * math.pi

DEFAULT_SURFACE_GRID = 200
DEFAULT_SPHERE_GRID = (100, 200)
GAP_TOL = 1e-6
RESIDUAL_TOL = 0.01


@dataclass(frozen=True)
class ClosedSurfaceGrid:
    """Parametrised closed surface: ``embed(U, V) -> (kx, ky, kz)`` on a grid."""

    kind: str
    model: BulkModel
    embed: Callable
    u: np.ndarray
    v: np.ndarray
    periodic_u: bool = True

    def coordinates(self):
        U, V = np.meshgrid(self.u, self.v, indexing="ij")
        return self.embed(U, V)

    def hamiltonians(self) -> Hermitian2:
        kx, ky, kz = self.coordinates()
        return self.model.hamiltonian(kx, ky, kz)

    @classmethod
    def torus(cls, model: BulkModel, kz0: float = 0.0, n: int = DEFAULT_SURFACE_GRID):
        k = _periodic(n)
        return cls("torus", model, lambda U, V: (U, V, np.full_like(U, kz0)), k, k)

    @classmethod
    def slice_x(cls, model: BulkModel, kx0: float, n: int = DEFAULT_SURFACE_GRID):
        k = _periodic(n)
        return cls("slice_x", model, lambda U, V: (np.full_like(U, kx0), U, V), k, k)

    @classmethod
    def slice_y(cls, model: BulkModel, ky0: float, n: int = DEFAULT_SURFACE_GRID):
        k = _periodic(n)
        return cls("slice_y", model, lambda U, V: (U, np.full_like(U, ky0), V), k, k)

    @classmethod
    def tube(cls, model: BulkModel, center, radius: float, n: int = DEFAULT_SURFACE_GRID):
        cx, cy = float(center[0]), float(center[1])
        k = _periodic(n)

        def embed(U, V):
            return cx + radius * np.cos(U), cy + radius * np.sin(U), V

        return cls("tube", model, embed, k, k)

    @classmethod
    def sphere(cls, model: BulkModel, center, radius: float, n_polar: int = DEFAULT_SPHERE_GRID[0],
               n_azimuth: int = DEFAULT_SPHERE_GRID[1]):
        cx, cy, cz = (float(c) for c in center)
        polar = np.linspace(0.0, math.pi, n_polar + 1)
        az = _periodic(n_azimuth)

        def embed(U, V):
            s = np.sin(U)
            # Exact poles so that every azimuth gives the same point there.
            s = np.where((U == 0.0) | (U == math.pi), 0.0, s)
            return cx + radius * s * np.cos(V), cy + radius * s * np.sin(V), cz + radius * np.cos(U)

        return cls("sphere", model, embed, polar, az, periodic_u=False)


def _periodic(n: int) -> np.ndarray:
    return np.arange(n) * (TWO_PI / n)


def _links(vec, axis, periodic):
    nxt = np.roll(vec, -1, axis=axis)
    ov = np.sum(np.conj(vec) * nxt, axis=-1)
    mag = np.abs(ov)
    link = np.where(mag > 0, ov / np.where(mag > 0, mag, 1.0), 1.0)
    if not periodic:
        link = np.take(link, np.arange(vec.shape[axis] - 1), axis=axis)
    return link


def fhs_sum(vectors: np.ndarray, periodic_u: bool = True) -> float:
    """Raw plaquette-phase sum / 2 pi for lower eigenvectors of shape (Nu, Nv, 2)."""
    u1 = _links(vectors, 0, periodic_u)                    # (Nu or Nu-1, Nv)
    u2 = _links(vectors, 1, True)                          # (Nu, Nv)
    u2_here = u2 if periodic_u else u2[:-1]
    u2_next = np.roll(u2, -1, axis=0) if periodic_u else u2[1:]
    u1_next = np.roll(u1, -1, axis=1)
    phase = np.angle(u1 * u2_next * np.conj(u1_next) * np.conj(u2_here))
    return float(np.sum(phase) / TWO_PI)


@dataclass(frozen=True)
class ChernResult:
    value: int
    raw: float
    min_gap: float

    @property
    def residual(self) -> float:
        return abs(self.raw - self.value)


def fhs_chern_detail(surface: ClosedSurfaceGrid, gap_tol: float = GAP_TOL,
                     residual_tol: float = RESIDUAL_TOL) -> ChernResult:
    h = surface.hamiltonians()
    gap = np.broadcast_to(h.norm(), (len(surface.u), len(surface.v)))
    m = np.unravel_index(int(np.argmin(gap)), gap.shape)
    if gap[m] <= gap_tol:
        kx, ky, kz = surface.coordinates()
        point = tuple(float(np.broadcast_to(c, gap.shape)[m]) for c in (kx, ky, kz))
        raise GapClosed(point, float(gap[m]))
    vec = h.lower_eigenvector()
    vec = np.broadcast_to(vec, gap.shape + (2,))
    raw = fhs_sum(vec, surface.periodic_u)
    value = int(round(raw))
    if abs(raw - value) >= residual_tol:
        raise NonIntegerResidual(raw)
    return ChernResult(value, raw, float(gap[m]))


def fhs_chern(surface: ClosedSurfaceGrid, gap_tol: float = GAP_TOL,
              residual_tol: float = RESIDUAL_TOL) -> int:
    """First Chern number of the lower-band bundle over ``surface``.

    Raises GapClosed if the Hamiltonian is (numerically) singular somewhere on
    the grid and NonIntegerResidual if the plaquette sum is not within
    ``residual_tol`` of an integer.
    """
    return fhs_chern_detail(surface, gap_tol, residual_tol).value


def chern_tube(model: BulkModel, center, radius: float, grid_n: int = DEFAULT_SURFACE_GRID) -> int:
    """Chern number over (anticlockwise circle around ``center``) x S^1_kz."""
    return fhs_chern(ClosedSurfaceGrid.tube(model, center, radius, grid_n))


def chern_sphere(model: BulkModel, w, radius: float, grid=DEFAULT_SPHERE_GRID) -> int:
    """Chirality of a Weyl point: Chern number over the outward sphere around it.

    ``w`` is either a WeylPoint (its ``charge`` is set) or a (kx, ky, kz) triple.
    """
    center = (w.kx, w.ky, w.kz) if hasattr(w, "kz") else tuple(w)
    n_polar, n_az = (grid, 2 * grid) if np.isscalar(grid) else grid
    value = fhs_chern(ClosedSurfaceGrid.sphere(model, center, radius, n_polar, n_az))
    if hasattr(w, "charge"):
        w.charge = value
    return value
