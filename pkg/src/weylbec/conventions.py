"""Orientation and sign conventions, collected in one place.

Loops
    ``LoopX`` is S^1 x {ky0} traversed with kx increasing, ``LoopY`` is
    {kx0} x S^1 traversed with ky increasing, and every disc boundary is an
    anticlockwise circle in the (kx, ky) plane.

Intersection numbers
    A crossing of a Fermi-arc component f with a loop g counts +1 when the
    frame (f', g') is positively oriented with respect to (kx, ky).

Surfaces for Chern numbers
    Parameter order fixes the orientation (see ``weylbec.chern``): slices
    over (ky, kz) and (kx, kz), tubes over (anticlockwise s, kz), spheres
    over (polar, azimuth), which is the outward normal.

Coefficient vectors
    Each vector is (q_x, q_y, q_1, ..., q_{n-1}). The three constructions use
    the signs below; with them the three worked examples reproduce their
    expected integer vectors and the three vectors coincide.
"""

from __future__ import annotations

#: Edge vector from spectral flows: q_x = -sf(LoopY), q_y = +sf(LoopX), q_i = +sf(circle_i).
EDGE_SIGNS = {"x": -1, "y": +1, "disc": +1}

#: Bulk vector from Chern numbers: q_x = +c1(slice kx = kx0), q_y = -c1(slice ky = ky0),
#: q_i = -c1(tube over circle_i).
BULK_SIGNS = {"x": +1, "y": -1, "disc": -1}

#: Fermi vector: each component f enters with weight -epsilon(f) and contributes
#: weight * (I(f, LoopY), -I(f, LoopX), -I(f, circle_i)).
FERMI_WEIGHT = -1
FERMI_SIGNS = {"x": +1, "y": -1, "disc": -1}
