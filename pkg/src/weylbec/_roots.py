"""Bracketed scalar root finding that tolerates sign noise at the endpoints."""

from __future__ import annotations

from scipy.optimize import brentq


def bracket_root(f, lo: float, hi: float, xtol: float = 1e-14) -> float:
    """Root of ``f`` in [lo, hi] found from a bracket detected on sampled data.

    Vectorised and scalar evaluations can differ in the last bit, so a value
    that was just above zero in the sampled array may come back just below.
    When the re-evaluated endpoints do not straddle zero, the endpoint with
    the smaller magnitude is returned (it is then a root to rounding level).
    """
    flo, fhi = float(f(lo)), float(f(hi))
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        return lo if abs(flo) <= abs(fhi) else hi
    return brentq(f, lo, hi, xtol=xtol)
