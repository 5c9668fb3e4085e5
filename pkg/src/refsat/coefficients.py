"""Saturation coefficients of nested discrete spaces on the reference square.

A problem is a triple of degrees p <= q <= r together with a load family and
a Dirichlet edge set. The coefficient measures how much dual norm is lost
when the fine space of degree r is replaced by the intermediate space of
degree q:

    mu = max over functionals F of  ||F||_(fine dual) / ||F||_(coarse dual),

computed as the square root of the largest generalized eigenvalue of the
pair of dual Gram matrices R = L A^{-1} L^T (L the load matrix, A the
stiffness matrix). mu >= 1 always, mu = 1 exactly when q = r, and small
mu - 1 certifies that the intermediate space already captures the loads.

Families:

``A``  volume loads, Legendre pairs up to degree p, on a space with at
       least one Dirichlet edge;
``B``  edge loads on the right edge, Legendre up to degree p, the right
       edge always free;
``C``  mean-free edge loads on the quotient space modulo constants.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from refsat.assembly import (
    EDGE_CLASSES,
    RIGHT,
    QuotientSpace,
    TensorSpace,
    load_matrix_edge,
    load_matrix_quotient_edge,
    load_matrix_volume,
    normalize_edges,
    quotient_space,
    stiffness_matrix,
    tensor_space,
)

__all__ = [
    "FAMILIES",
    "Q_STRATEGIES",
    "CANONICAL_PROBLEMS",
    "NumericalError",
    "ProblemSpec",
    "SaturationResult",
    "q_strategy",
    "schur_dual_gram",
    "max_generalized_eigenvalue",
    "dual_norm_oracle",
    "saturation_coefficient",
]

FAMILIES = ("A", "B", "C")

#: admissible rules for choosing the intermediate degree from p
Q_STRATEGIES = ("p+4", "p+ceil(p/7)", "2p")

#: the ten canonical problems: five Dirichlet classes with volume loads,
#: four with edge loads, and the quotient problem
CANONICAL_PROBLEMS: dict[str, tuple[str, frozenset[int] | None]] = {
    "E1": ("A", EDGE_CLASSES["E1"]),
    "E2": ("A", EDGE_CLASSES["E2"]),
    "E3": ("A", EDGE_CLASSES["E3"]),
    "E4": ("A", EDGE_CLASSES["E4"]),
    "E5": ("A", EDGE_CLASSES["E5"]),
    "F1": ("B", EDGE_CLASSES["F1"]),
    "F2": ("B", EDGE_CLASSES["F2"]),
    "F3": ("B", EDGE_CLASSES["F3"]),
    "F4": ("B", EDGE_CLASSES["F4"]),
    "C": ("C", None),
}

_B_CLASSES = tuple(EDGE_CLASSES[name] for name in ("F1", "F2", "F3", "F4"))


class NumericalError(RuntimeError):
    """A linear algebra step failed or produced an ill-posed subproblem."""


@dataclass(frozen=True)
class ProblemSpec:
    """One saturation problem: family, Dirichlet edges and degrees p <= q <= r."""

    family: str
    edges: frozenset[int] | None
    p: int
    q: int
    r: int

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        min_p = 1 if self.family == "C" else 0
        if self.p < min_p:
            raise ValueError(f"family {self.family} needs p >= {min_p}, got {self.p}")
        if not self.p <= self.q <= self.r:
            raise ValueError(
                f"degrees must satisfy p <= q <= r, got ({self.p}, {self.q}, {self.r})"
            )
        if self.family == "C":
            if self.edges:
                raise ValueError("the quotient family takes no Dirichlet edges")
            object.__setattr__(self, "edges", None)
            return
        if self.edges is None:
            raise ValueError(f"family {self.family} needs a Dirichlet edge set")
        edges = normalize_edges(self.edges)
        object.__setattr__(self, "edges", edges)
        if self.family == "A" and not edges:
            raise ValueError("volume-load problems need at least one Dirichlet edge")
        if self.family == "B" and edges not in _B_CLASSES:
            raise ValueError(
                "edge-load problems use one of the four canonical Dirichlet "
                "classes {2}, {3}, {2,3}, {2,3,4} relative to the loaded right edge"
            )


@dataclass(frozen=True)
class SaturationResult:
    """Outcome of one saturation computation."""

    spec: ProblemSpec
    mu: float
    mu_squared: float
    maximizer: np.ndarray
    dim_H: int
    dim_V: int
    dim_F: int
    residual: float
    tie: bool
    wall_seconds: float


def q_strategy(name: str, p: int) -> int:
    """Intermediate degree q chosen from p by one of the published rules."""
    if p < 1:
        raise ValueError(f"strategies need p >= 1, got {p}")
    if name == "p+4":
        return p + 4
    if name == "p+ceil(p/7)":
        return p + -(-p // 7)
    if name == "2p":
        return 2 * p
    raise ValueError(f"unknown strategy {name!r}, expected one of {Q_STRATEGIES}")


def _factorize(stiffness):
    """Sparse LU of the stiffness matrix with an explicit singularity check.

    SuperLU happily factors an exactly singular matrix through a roundoff
    pivot, so the diagonal of U is inspected instead of trusting the solve.
    """
    a = scipy.sparse.csc_matrix(stiffness)
    try:
        lu = scipy.sparse.linalg.splu(a)
    except RuntimeError as exc:
        raise NumericalError(f"stiffness factorization failed: {exc}") from exc
    pivots = np.abs(lu.U.diagonal())
    if pivots.size and np.min(pivots) < 1e-12 * np.max(pivots):
        raise NumericalError("stiffness matrix is numerically singular")
    return lu


def schur_dual_gram(load: np.ndarray, stiffness) -> np.ndarray:
    """Dual Gram matrix R = L A^{-1} L^T, factoring A once for all rows of L.

    The result is symmetrized to remove roundoff skew. A singular stiffness
    matrix raises NumericalError.
    """
    load = np.atleast_2d(np.asarray(load, dtype=float))
    a = scipy.sparse.csc_matrix(stiffness)
    if a.shape[0] != a.shape[1] or a.shape[1] != load.shape[1]:
        raise ValueError(
            f"shape mismatch: load {load.shape} against stiffness {a.shape}"
        )
    lu = _factorize(a)
    solved = lu.solve(load.T)
    r = load @ solved
    if not np.all(np.isfinite(r)):
        raise NumericalError("stiffness matrix is numerically singular")
    return (r + r.T) / 2.0


def max_generalized_eigenvalue(
    r_top: np.ndarray, r_bottom: np.ndarray
) -> tuple[float, np.ndarray, bool]:
    """Largest lambda with r_top F = lambda r_bottom F, plus maximizer and tie flag.

    r_bottom must be safely positive definite: its smallest eigenvalue is
    checked against 1e-12 times its trace and the problem is rejected as
    ill posed otherwise, rather than silently regularized.
    """
    r_top = np.asarray(r_top, dtype=float)
    r_bottom = np.asarray(r_bottom, dtype=float)
    if r_top.shape != r_bottom.shape or r_top.shape[0] != r_top.shape[1]:
        raise ValueError(
            f"expected square matrices of equal shape, got {r_top.shape} "
            f"and {r_bottom.shape}"
        )
    floor = 1e-12 * max(np.trace(r_bottom), np.finfo(float).tiny)
    if np.min(scipy.linalg.eigvalsh(r_bottom)) < floor:
        raise NumericalError(
            "denominator dual Gram is numerically singular; the coarse space "
            "cannot represent all functionals (ill-posed quotient)"
        )
    try:
        values, vectors = scipy.linalg.eigh(r_top, r_bottom)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"generalized eigensolve failed: {exc}") from exc
    top = float(values[-1])
    tie = values.size >= 2 and (top - float(values[-2])) <= 1e-12 * max(1.0, abs(top))
    return top, vectors[:, -1].copy(), tie


def dual_norm_oracle(functional: np.ndarray, load: np.ndarray, stiffness) -> float:
    """Dual norm of one functional via its Galerkin representer.

    Solves A u = L^T F and returns sqrt(u^T A u). Used as an independent
    check of the quadratic form F^T R F.
    """
    functional = np.asarray(functional, dtype=float)
    rhs = np.asarray(load, dtype=float).T @ functional
    a = scipy.sparse.csc_matrix(stiffness)
    u = _factorize(a).solve(rhs)
    return float(np.sqrt(u @ (a @ u)))


def _build_pair(spec: ProblemSpec, degree: int):
    if spec.family == "A":
        space = tensor_space(spec.edges, degree)
        return stiffness_matrix(space), load_matrix_volume(space, spec.p)
    if spec.family == "B":
        space = tensor_space(spec.edges, degree)
        return stiffness_matrix(space), load_matrix_edge(space, spec.p)
    space = quotient_space(degree)
    return stiffness_matrix(space), load_matrix_quotient_edge(space, spec.p)


def saturation_coefficient(spec: ProblemSpec) -> SaturationResult:
    """Compute the saturation coefficient for one problem spec.

    Builds the fine (degree r) and intermediate (degree q) pairs, forms both
    dual Grams and extracts the largest generalized eigenvalue. The returned
    residual is the relative defect of the eigenpair and should be tiny.
    """
    start = time.perf_counter()
    stiff_fine, load_fine = _build_pair(spec, spec.r)
    stiff_mid, load_mid = _build_pair(spec, spec.q)
    r_fine = schur_dual_gram(load_fine, stiff_fine)
    r_mid = schur_dual_gram(load_mid, stiff_mid)
    value, maximizer, tie = max_generalized_eigenvalue(r_fine, r_mid)
    defect = r_fine @ maximizer - value * (r_mid @ maximizer)
    scale = np.linalg.norm(r_fine, "fro") * np.linalg.norm(maximizer)
    residual = float(np.linalg.norm(defect) / max(scale, np.finfo(float).tiny))
    mu = float(np.sqrt(value))
    return SaturationResult(
        spec=spec,
        mu=mu,
        mu_squared=float(value),
        maximizer=maximizer,
        dim_H=stiff_fine.shape[0],
        dim_V=stiff_mid.shape[0],
        dim_F=load_fine.shape[0],
        residual=residual,
        tie=tie,
        wall_seconds=time.perf_counter() - start,
    )
