"""Shared fixtures: cached operator families, scalar test families, and the
analytic empty-lattice reference spectrum."""

import math

import numpy as np
import pytest
import scipy.sparse as sp

from phcbands.assembly import assemble_family
from phcbands.materials import Constant
from phcbands.mesh import build_periodic_dof_map, build_unit_cell_mesh

GAMMA = (0.0, 0.0)
X = (math.pi, 0.0)
M = (math.pi, math.pi)


class DiagonalFamily:
    """Operator family with T(nu) = diag(nu - poles).

    The spectrum is exactly the pole list, which makes the search and
    refinement machinery testable against closed-form answers.
    """

    def __init__(self, poles):
        self.poles = [complex(p) for p in poles]
        self.n_dofs = len(self.poles)

    def t_matrix(self, nu):
        return sp.csr_matrix(np.diag([complex(nu) - p for p in self.poles]))


class SingularFamily:
    """Family whose matrix is singular at every frequency."""

    def __init__(self, n_dofs=2):
        self.n_dofs = n_dofs

    def t_matrix(self, nu):
        return sp.csr_matrix((self.n_dofs, self.n_dofs), dtype=np.complex128)


def plane_wave_values(k, lo, hi, mmax=3):
    """Empty-lattice frequencies nu = |k / (2 pi) + (m1, m2)| inside [lo, hi]."""
    kx, ky = k[0] / (2.0 * math.pi), k[1] / (2.0 * math.pi)
    values = []
    for m1 in range(-mmax, mmax + 1):
        for m2 in range(-mmax, mmax + 1):
            nu = math.hypot(kx + m1, ky + m2)
            if lo <= nu <= hi:
                values.append(nu)
    return sorted(values)


@pytest.fixture(scope="session")
def family_factory():
    """Cached (mesh, pmap, family) builder keyed by the full problem tuple."""
    cache = {}

    def build(n, r, k, polarization="TE", models=None):
        if models is None:
            models = {0: Constant(1.0)}
        key = (n, r, k, polarization, tuple(sorted(models.items())))
        if key not in cache:
            mesh = build_unit_cell_mesh(n, r)
            pmap = build_periodic_dof_map(mesh)
            cache[key] = (mesh, pmap, assemble_family(mesh, pmap, k, polarization, models))
        return cache[key]

    return build
