"""Truncated half-space edge operators and spectral flows along loops.

For fixed (a, b) the edge operator acts on sequences psi(n) in C^2 by

    (H psi)(n) = A psi(n-1) + V psi(n) + A^T psi(n+1),
    V = [[b, a], [a, -b]],  A = [[0, 1], [0, 0]],

and is cut off with Dirichlet conditions at both ends of a chain of
``n_sites`` sites. Interleaving the two components makes the chain a real
symmetric tridiagonal matrix: diagonal (b, -b, b, -b, ...), off-diagonal
(a, 1, a, 1, ...).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from ._roots import bracket_root
from .errors import (
    ConvergenceFailure,
    GapViolation,
    LocalizationAmbiguous,
    NonTransversalCrossing,
    TrackingLost,
    ZeroA,
)
from .expr import SurfacePair
from .model import LocalFormModel, gap_edge

TWO_PI = 2.0 * math.pi

DEFAULT_SITES = 64
DEFAULT_SAMPLES = 720
LEFT_CUT = 0.9
RIGHT_CUT = 0.1
MIN_OVERLAP = 0.7
# Ambiguous or untracked states only matter well inside the gap; near the
# band edges a bound state legitimately dissolves into the continuum.
INTERIOR_FRACTION = 0.5
#: Maximum entrywise residual |Hv - Ev| accepted from the windowed solver.
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class EdgeChain:
    a: float
    b: float
    n_sites: int
    diagonal: np.ndarray = field(repr=False)
    offdiagonal: np.ndarray = field(repr=False)

    @property
    def matrix(self) -> np.ndarray:
        m = np.diag(self.diagonal)
        idx = np.arange(len(self.offdiagonal))
        m[idx, idx + 1] = self.offdiagonal
        m[idx + 1, idx] = self.offdiagonal
        return m


def build_edge_chain(a: float, b: float, n_sites: int) -> EdgeChain:
    if n_sites < 1:
        raise ValueError("n_sites must be positive")
    diag = np.tile([float(b), -float(b)], n_sites)
    off = np.tile([float(a), 1.0], n_sites)[:-1]
    return EdgeChain(float(a), float(b), int(n_sites), diag, off)


@dataclass(frozen=True)
class EdgeEigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    left_weight: np.ndarray


def left_weights(vectors: np.ndarray, n_sites: int) -> np.ndarray:
    half = 2 * (n_sites // 2)
    return np.sum(vectors[:half] ** 2, axis=0)


def _residual(chain: EdgeChain, w: np.ndarray, v: np.ndarray) -> float:
    d, e = chain.diagonal, chain.offdiagonal
    hv = d[:, None] * v
    hv[:-1] += e[:, None] * v[1:]
    hv[1:] += e[:, None] * v[:-1]
    return float(np.max(np.abs(hv - v * w), initial=0.0))


def edge_spectrum(chain: EdgeChain, window: tuple[float, float] | None = None) -> EdgeEigenSystem:
    """Eigendecomposition of the chain, optionally restricted to an energy window.

    Windowed solves use the MRRR driver and are checked by their residual;
    inverse iteration was observed to return unconverged vectors for nearly
    decoupled chains (|a| close to 0), so a failed check falls back to the
    full decomposition.
    """
    try:
        if window is None:
            w, v = scipy.linalg.eigh_tridiagonal(chain.diagonal, chain.offdiagonal)
        else:
            w, v = scipy.linalg.eigh_tridiagonal(
                chain.diagonal, chain.offdiagonal, select="v", select_range=window,
                lapack_driver="stemr",
            )
            if _residual(chain, w, v) > RESIDUAL_TOL:
                w, v = scipy.linalg.eigh_tridiagonal(chain.diagonal, chain.offdiagonal)
                keep = (w > window[0]) & (w <= window[1])
                w, v = w[keep], v[:, keep]
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"tridiagonal eigensolver failed: {exc}") from exc
    return EdgeEigenSystem(w, v, left_weights(v, chain.n_sites))


def analytic_edge_energy(a: float, b: float) -> float | None:
    """Energy of the multiplicity-one bound state, present only for |a| < 1."""
    return float(b) if abs(a) < 1.0 else None


def flat_band_energies(a: float, b: float) -> tuple[float, float] | None:
    """The infinitely degenerate pair at a == 0 (sits on the band edges)."""
    if a != 0:
        return None
    e = math.sqrt(b * b + 1.0)
    return -e, e


@dataclass(frozen=True)
class TransferData:
    R: np.ndarray
    trace: float
    det: float
    discriminant: float


def transfer_matrix(a: float, b: float, E: float) -> TransferData:
    """psi(n+1) = R psi(n) for solutions of (H - E) psi = 0 on the half line."""
    if a == 0:
        raise ZeroA()
    R = np.array([[-a, b + E], [b - E, (E * E - b * b - 1.0) / a]])
    tr = (E * E - a * a - b * b - 1.0) / a
    det = float(np.linalg.det(R))
    return TransferData(R, tr, det, tr * tr - 4.0 * det)


# -- loops ---------------------------------------------------------------------

@dataclass(frozen=True)
class LoopSamples:
    s: np.ndarray
    kx: np.ndarray
    ky: np.ndarray
    a: np.ndarray
    b: np.ndarray
    gap: np.ndarray


@dataclass(frozen=True)
class Loop:
    """A closed curve s -> (kx, ky), s in [0, 1], in unwrapped coordinates."""

    curve: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]
    n_samples: int = DEFAULT_SAMPLES
    label: str = "loop"

    def parameters(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.n_samples

    def points(self, s=None):
        if s is None:
            s = self.parameters()
        kx, ky = self.curve(np.asarray(s, dtype=float))
        return np.asarray(kx, dtype=float), np.asarray(ky, dtype=float)

    def tangent(self, s, h=1e-6):
        s = np.asarray(s, dtype=float)
        xp, yp = self.points(s + h)
        xm, ym = self.points(s - h)
        return (xp - xm) / (2 * h), (yp - ym) / (2 * h)

    def sample(self, pair: SurfacePair) -> LoopSamples:
        s = self.parameters()
        kx, ky = self.points(s)
        a, b = pair.values(kx, ky)
        return LoopSamples(s, kx, ky, a, b, gap_edge(a, b))

    def polyline(self):
        """Closed polyline of the samples, shape (n_samples + 1, 2)."""
        kx, ky = self.points(np.append(self.parameters(), 1.0))
        return np.stack([kx, ky], axis=-1)

    def with_samples(self, n_samples: int) -> "Loop":
        return Loop(self.curve, n_samples, self.label)

    def reversed(self) -> "Loop":
        curve = self.curve
        return Loop(lambda s: curve(1.0 - np.asarray(s)), self.n_samples, f"reversed({self.label})")

    def then(self, other: "Loop") -> "Loop":
        """Concatenation; both loops must start at the same point."""
        c1, c2 = self.curve, other.curve

        def curve(s):
            s = np.asarray(s, dtype=float)
            t = np.mod(s, 1.0) if np.ndim(s) else s
            first = t < 0.5
            x1, y1 = c1(np.clip(2 * t, 0.0, 1.0))
            x2, y2 = c2(np.clip(2 * t - 1.0, 0.0, 1.0))
            return np.where(first, x1, x2), np.where(first, y1, y2)

        return Loop(curve, self.n_samples + other.n_samples, f"{self.label}*{other.label}")

    @classmethod
    def horizontal(cls, ky0: float, n_samples: int = DEFAULT_SAMPLES) -> "Loop":
        """S^1 x {ky0}, parametrised by kx = 2 pi s."""
        return cls(lambda s: (TWO_PI * np.asarray(s), np.full(np.shape(s), float(ky0))),
                   n_samples, f"x-loop(ky={ky0:.6g})")

    @classmethod
    def vertical(cls, kx0: float, n_samples: int = DEFAULT_SAMPLES) -> "Loop":
        """{kx0} x S^1, parametrised by ky = 2 pi s."""
        return cls(lambda s: (np.full(np.shape(s), float(kx0)), TWO_PI * np.asarray(s)),
                   n_samples, f"y-loop(kx={kx0:.6g})")

    @classmethod
    def circle(cls, center, radius: float, n_samples: int = DEFAULT_SAMPLES,
               start_angle: float = 0.0) -> "Loop":
        """Anticlockwise circle (compatible with the standard orientation of T^2)."""
        cx, cy = float(center[0]), float(center[1])
        r = float(radius)

        def curve(s):
            phi = start_angle + TWO_PI * np.asarray(s)
            return cx + r * np.cos(phi), cy + r * np.sin(phi)

        return cls(curve, n_samples, f"circle(({cx:.6g},{cy:.6g}),r={r:.6g})")

    @classmethod
    def constant(cls, point, n_samples: int = 16) -> "Loop":
        px, py = float(point[0]), float(point[1])
        return cls(lambda s: (np.full(np.shape(s), px), np.full(np.shape(s), py)),
                   n_samples, f"point({px:.6g},{py:.6g})")


def _as_pair(model) -> SurfacePair:
    if isinstance(model, SurfacePair):
        return model
    if isinstance(model, LocalFormModel):
        return model.pair
    raise TypeError("spectral flows need a local-form model (SurfacePair or LocalFormModel)")


def _check_gap(samples: LoopSamples, gap_tol: float):
    i = int(np.argmin(samples.gap))
    if samples.gap[i] <= gap_tol:
        raise GapViolation(float(samples.s[i]), float(samples.gap[i]))


# -- analytic spectral flow ----------------------------------------------------

@dataclass(frozen=True)
class Crossing:
    s: float
    kx: float
    ky: float
    a: float
    slope: float

    @property
    def sign(self) -> int:
        return 1 if self.slope > 0 else -1


def analytic_crossings(model, loop: Loop, gap_tol: float = 1e-6,
                       slope_tol: float = 1e-8) -> list[Crossing]:
    """Zeros of b along the loop where |a| < 1, with the slope of b there."""
    pair = _as_pair(model)
    samples = loop.sample(pair)
    _check_gap(samples, gap_tol)
    s = np.append(samples.s, 1.0)
    bvals = np.append(samples.b, samples.b[0])
    positive = bvals >= 0

    def b_of(t):
        # s = 1 is the same point as s = 0; reuse it so the closing bracket matches.
        x, y = loop.points(t % 1.0)
        return float(pair.b(x, y))

    out = []
    for m in np.nonzero(positive[:-1] != positive[1:])[0]:
        lo, hi = s[m], s[m + 1]
        if bvals[m + 1] == 0.0:
            root = hi
        elif bvals[m] == 0.0:
            root = lo
        else:
            root = bracket_root(b_of, lo, hi)
        x, y = loop.points(root)
        a_val = float(pair.a(x, y))
        if abs(a_val) >= 1.0:
            continue
        tx, ty = loop.tangent(root)
        bx, by = pair.grad_b(x, y)
        slope = float(bx * tx + by * ty)
        if abs(slope) < slope_tol:
            raise NonTransversalCrossing(float(root), slope)
        out.append(Crossing(float(root) % 1.0, float(x), float(y), a_val, slope))
    return out


def spectral_flow_analytic(model, loop: Loop, gap_tol: float = 1e-6) -> int:
    """Signed count of zero crossings of the bound-state energy E = b along the loop.

    Only zeros of b with |a| < 1 carry a bound state; each contributes the
    sign of d(b o loop)/ds.
    """
    return sum(c.sign for c in analytic_crossings(model, loop, gap_tol))


# -- numerical spectral flow ---------------------------------------------------

@dataclass
class EdgeState:
    energy: float
    vector: np.ndarray
    weight: float


def midgap_states(a: float, b: float, n_sites: int = DEFAULT_SITES):
    """In-gap eigenstates of the finite chain, split by localisation.

    Returns ``(left, ambiguous, gap)``. Near-degenerate left/right pairs that
    hybridise through the chain are rotated back into localised combinations
    (energies become Rayleigh quotients).
    """
    g = float(gap_edge(a, b))
    window = g * (1.0 - 1e-9) - 1e-12
    if window <= 0:
        return [], [], g
    system = edge_spectrum(build_edge_chain(a, b, n_sites), window=(-window, window))
    energies = system.eigenvalues
    vectors = system.eigenvectors
    weights = system.left_weight
    amb = (weights >= RIGHT_CUT) & (weights <= LEFT_CUT)
    if np.count_nonzero(amb) >= 2:
        sub = vectors[:, amb]
        half = 2 * (n_sites // 2)
        proj = sub[:half].T @ sub[:half]
        mu, coeff = np.linalg.eigh(proj)
        rotated = sub @ coeff
        h_sub = coeff.T @ np.diag(energies[amb]) @ coeff
        energies = energies.copy()
        vectors = vectors.copy()
        weights = weights.copy()
        energies[amb] = np.diag(h_sub)
        vectors[:, amb] = rotated
        weights[amb] = mu
    left, ambiguous = [], []
    for e, w, k in zip(energies, weights, range(len(energies))):
        if w > LEFT_CUT:
            left.append(EdgeState(float(e), vectors[:, k], float(w)))
        elif w >= RIGHT_CUT:
            ambiguous.append(EdgeState(float(e), vectors[:, k], float(w)))
    return left, ambiguous, g


def _interior(state: EdgeState, g: float) -> bool:
    return abs(state.energy) < INTERIOR_FRACTION * g


def spectral_flow_numeric(model, loop: Loop, n_sites: int = DEFAULT_SITES,
                          gap_tol: float = 1e-6) -> int:
    """Spectral flow from finite-chain diagonalisation along the loop.

    Left-edge states (left weight above 0.9) are tracked between consecutive
    samples by eigenvector overlap; each matched step that moves an energy
    from negative to non-negative counts +1, the reverse -1.
    """
    pair = _as_pair(model)
    samples = loop.sample(pair)
    _check_gap(samples, gap_tol)
    per_sample = []
    for m in range(len(samples.s)):
        left, ambiguous, g = midgap_states(samples.a[m], samples.b[m], n_sites)
        for st in ambiguous:
            if _interior(st, g):
                raise LocalizationAmbiguous(float(samples.s[m]), st.energy, st.weight)
        per_sample.append((left, g))

    flow = 0
    count = len(per_sample)
    for m in range(count):
        cur, g_cur = per_sample[m]
        nxt, g_nxt = per_sample[(m + 1) % count]
        s_next = float(samples.s[(m + 1) % count])
        used = set()
        if cur and nxt:
            overlap = np.abs(np.stack([st.vector for st in cur]) @ np.stack([st.vector for st in nxt]).T)
        for i, st in enumerate(cur):
            if not nxt:
                if _interior(st, g_cur):
                    raise TrackingLost(s_next, 0.0)
                continue
            row = overlap[i]
            best = float(row.max())
            ties = np.nonzero(row >= best - 1e-9)[0]
            j = int(min(ties, key=lambda k: abs(nxt[k].energy - st.energy)))
            if best < MIN_OVERLAP or j in used:
                if _interior(st, g_cur):
                    raise TrackingLost(s_next, best)
                continue
            used.add(j)
            e0, e1 = st.energy, nxt[j].energy
            if e0 < 0 <= e1:
                flow += 1
            elif e0 >= 0 > e1:
                flow -= 1
        for j, st in enumerate(nxt):
            if j not in used and _interior(st, g_nxt):
                raise TrackingLost(s_next, 0.0)
    return flow


def spectrum_rows(model, loop: Loop, n_sites: int = DEFAULT_SITES, full: bool = False):
    """Rows (sample_index, s, eigenvalue, left_weight) for plotting.

    By default only eigenvalues inside the essential gap are listed.
    """
    pair = _as_pair(model)
    samples = loop.sample(pair)
    rows = []
    for m in range(len(samples.s)):
        a, b = samples.a[m], samples.b[m]
        chain = build_edge_chain(a, b, n_sites)
        if full:
            system = edge_spectrum(chain)
        else:
            g = float(samples.gap[m])
            window = g * (1.0 - 1e-9) - 1e-12
            if window <= 0:
                continue
            system = edge_spectrum(chain, window=(-window, window))
        for e, w in zip(system.eigenvalues, system.left_weight):
            rows.append((m, float(samples.s[m]), float(e), float(w)))
    return rows
