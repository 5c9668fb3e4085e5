"""Tensor-product spaces and matrix assembly on the reference square.

The reference square is [-1, 1]^2. Its edges are numbered counterclockwise
starting from the rightmost one: 1 is the right edge (x = +1), 2 the top
(y = +1), 3 the left (x = -1), 4 the bottom (y = -1). An edge set is a
frozenset of these numbers and marks where homogeneous Dirichlet conditions
are imposed.

Flattening of tensor indices is row-major with the x factor outermost: the
basis member (ix, iy) sits at flat index ix * ny + iy. All assembled
stiffness matrices are sparse and exactly symmetric; load matrices are dense
with one row per functional.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse

from refsat.bases import (
    Basis1D,
    BoundaryCondition1D,
    build_basis_1d,
    boundary_trace,
    gram_matrices,
)

__all__ = [
    "RIGHT",
    "TOP",
    "LEFT",
    "BOTTOM",
    "EDGE_CLASSES",
    "normalize_edges",
    "TensorSpace",
    "QuotientSpace",
    "tensor_space",
    "quotient_space",
    "stiffness_matrix",
    "load_matrix_volume",
    "load_matrix_edge",
    "load_matrix_quotient_edge",
]

RIGHT, TOP, LEFT, BOTTOM = 1, 2, 3, 4

#: canonical Dirichlet edge classes; the E classes drive the volume-load
#: problems, the F classes the edge-load problems (loads act on edge 1, so
#: edge 1 never carries a Dirichlet condition in an F class)
EDGE_CLASSES: dict[str, frozenset[int]] = {
    "E1": frozenset({RIGHT}),
    "E2": frozenset({RIGHT, TOP}),
    "E3": frozenset({RIGHT, LEFT}),
    "E4": frozenset({RIGHT, TOP, LEFT}),
    "E5": frozenset({RIGHT, TOP, LEFT, BOTTOM}),
    "F1": frozenset({TOP}),
    "F2": frozenset({LEFT}),
    "F3": frozenset({TOP, LEFT}),
    "F4": frozenset({TOP, LEFT, BOTTOM}),
}


def normalize_edges(edges) -> frozenset[int]:
    """Coerce an iterable of edge numbers to a validated frozenset."""
    out = frozenset(int(e) for e in edges)
    if not out <= {RIGHT, TOP, LEFT, BOTTOM}:
        raise ValueError(f"edge numbers must lie in 1..4, got {sorted(out)}")
    return out


@dataclass(frozen=True)
class TensorSpace:
    """Polynomial tensor space on the square with Dirichlet edges removed."""

    edges: frozenset[int]
    basis_x: Basis1D
    basis_y: Basis1D

    @property
    def dim(self) -> int:
        return self.basis_x.n_functions * self.basis_y.n_functions

    def flat_index(self, ix: int, iy: int) -> int:
        return ix * self.basis_y.n_functions + iy


@dataclass(frozen=True)
class QuotientSpace:
    """Full polynomial space modulo constants.

    Realized as the tensor square of the mean-zero family with the purely
    constant member removed, giving (r + 1)^2 - 1 functions whose first
    basis direction is flattened outermost exactly like TensorSpace.
    """

    degree: int
    basis: Basis1D

    @property
    def dim(self) -> int:
        return (self.degree + 1) ** 2 - 1


def tensor_space(edges, degree: int) -> TensorSpace:
    """Build the Dirichlet tensor space of coordinate degree at most ``degree``."""
    edges = normalize_edges(edges)
    bc_x = BoundaryCondition1D(
        dirichlet_at_minus1=LEFT in edges, dirichlet_at_plus1=RIGHT in edges
    )
    bc_y = BoundaryCondition1D(
        dirichlet_at_minus1=BOTTOM in edges, dirichlet_at_plus1=TOP in edges
    )
    basis_x = build_basis_1d("integrated_legendre", bc_x, degree)
    basis_y = build_basis_1d("integrated_legendre", bc_y, degree)
    return TensorSpace(edges=edges, basis_x=basis_x, basis_y=basis_y)


def quotient_space(degree: int) -> QuotientSpace:
    if degree < 1:
        raise ValueError("the quotient space needs degree >= 1 to be nonempty")
    return QuotientSpace(degree=degree, basis=build_basis_1d("mean_zero", r=degree))


def _sym(a: np.ndarray) -> np.ndarray:
    return (a + a.T) / 2.0


def _tensor_stiffness(bx: Basis1D, by: Basis1D) -> scipy.sparse.csr_matrix:
    mx, sx = gram_matrices(bx, bx)
    my, sy = gram_matrices(by, by)
    mx, sx, my, sy = map(_sym, (mx, sx, my, sy))
    a = scipy.sparse.kron(
        scipy.sparse.csr_matrix(sx), scipy.sparse.csr_matrix(my)
    ) + scipy.sparse.kron(scipy.sparse.csr_matrix(mx), scipy.sparse.csr_matrix(sy))
    return a.tocsr()


def stiffness_matrix(space: TensorSpace | QuotientSpace) -> scipy.sparse.csr_matrix:
    """Gradient Gram matrix of the space, sparse and exactly symmetric.

    For the quotient space the constant tensor member is dropped, which makes
    the matrix positive definite again.
    """
    if isinstance(space, TensorSpace):
        return _tensor_stiffness(space.basis_x, space.basis_y)
    full = _tensor_stiffness(space.basis, space.basis)
    return full[1:, :][:, 1:].tocsr()


def load_matrix_volume(space: TensorSpace, p: int) -> np.ndarray:
    """Rows are the volume functionals v -> <phi_i x phi_j, v> for i, j <= p.

    Row order has i outermost, matching the tensor flattening.
    """
    if p < 0:
        raise ValueError(f"functional degree must be nonnegative, got {p}")
    probes = build_basis_1d("legendre", r=p)
    gx, _ = gram_matrices(probes, space.basis_x)
    gy, _ = gram_matrices(probes, space.basis_y)
    return np.kron(gx, gy)


def load_matrix_edge(space: TensorSpace, p: int) -> np.ndarray:
    """Rows are the edge functionals v -> <phi_k, v(1, .)> for k <= p.

    The functionals live on the right edge, so that edge must be free: a
    Dirichlet condition there would annihilate every functional.
    """
    if p < 0:
        raise ValueError(f"functional degree must be nonnegative, got {p}")
    if RIGHT in space.edges:
        raise ValueError(
            "edge loads act on the right edge, which this space constrains "
            "to zero; remove edge 1 from the Dirichlet set"
        )
    probes = build_basis_1d("legendre", r=p)
    tx = boundary_trace(space.basis_x, 1.0)
    gy, _ = gram_matrices(probes, space.basis_y)
    return np.kron(tx[np.newaxis, :], gy)


def load_matrix_quotient_edge(space: QuotientSpace, p: int) -> np.ndarray:
    """Rows are v -> <phi_k, v(1, .)> for 1 <= k <= p on the quotient space.

    Starting at k = 1 keeps the functionals mean free, so they are well
    defined modulo constants.
    """
    if p < 1:
        raise ValueError(f"quotient edge loads start at degree 1, got p={p}")
    probes_full = build_basis_1d("legendre", r=p)
    probes = Basis1D(kind="legendre", coefficients=probes_full.coefficients[1:])
    tx = boundary_trace(space.basis, 1.0)
    gy, _ = gram_matrices(probes, space.basis)
    full = np.kron(tx[np.newaxis, :], gy)
    return full[:, 1:]
