"""Constructive projection geometry.

Simultaneous rank-1 pairing of two equal-rank projections through
principal vectors, subspace distances, low-energy conjugating unitaries,
the almost-commuting correction, and the disjointification step used to
split off a fresh almost-invariant projection.

All orthogonality preconditions are numeric with tolerance 1e-9 in
operator norm; exact orthogonality is measure-zero in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionTooSmallError,
    OrthogonalityViolatedError,
    PreconditionViolatedError,
    RankMismatchError,
    ValidationError,
    ZeroRankError,
)
from .linalg import Projection, UnitaryMatrix, frob_norm, op_norm
from .sphere import RngSpec, _sphere_batch

ORTHO_TOL = 1e-9
PAIRING_TOL = 1e-8


def _check_same_space(p: Projection, q: Projection):
    if p.dim != q.dim:
        raise RankMismatchError(
            f"projections act on different spaces ({p.dim} vs {q.dim})"
        )


def _phase_scale(v: np.ndarray, tol: float = 1e-8):
    """Phase factor making the first coordinate of modulus > tol real
    positive; deterministic representative of the generated line."""
    idx = np.flatnonzero(np.abs(v) > tol)
    if idx.size == 0:
        return 1.0 + 0.0j
    lead = v[idx[0]]
    return np.conj(lead) / abs(lead)


def principal_pairs(p: Projection, q: Projection):
    """Principal vectors of the two ranges.

    Returns (x, y, sigma) where the columns x_i span p(H), the columns
    y_j span q(H), <y_i, x_j> = sigma_i delta_ij with sigma descending in
    [0, 1], and sigma has min(rank) entries. Degenerate angles are broken
    by the SVD's ordering plus the lexicographic phase fix on x (y keeps
    the phase tied to x wherever the pairing angle is non-orthogonal).
    """
    pb, qb = p.onb(), q.onb()
    m = qb.conj().T @ pb
    w, sigma, vh = np.linalg.svd(m)
    sigma = np.clip(sigma, 0.0, 1.0)
    x = pb @ vh.conj().T
    y = qb @ w
    for i in range(x.shape[1]):
        scale = _phase_scale(x[:, i])
        x[:, i] = x[:, i] * scale
        if i < y.shape[1] and i < sigma.size and sigma[i] > 1e-12:
            y[:, i] = y[:, i] * scale
    for j in range(y.shape[1]):
        if j >= sigma.size or sigma[j] <= 1e-12:
            y[:, j] = y[:, j] * _phase_scale(y[:, j])
    return x, y, sigma


@dataclass(frozen=True, eq=False)
class WedinPairing:
    """Joint rank-1 decomposition p = sum p_i, q = sum q_i with all parts
    mutually orthogonal across indices and ||p - q|| realized as the
    largest paired distance."""

    n: int
    p_parts: tuple
    q_parts: tuple
    sigma: tuple


def wedin_pair(p: Projection, q: Projection) -> WedinPairing:
    """Pair two equal-rank projections into aligned rank-1 pieces."""
    _check_same_space(p, q)
    if p.rank != q.rank:
        raise RankMismatchError(f"rank mismatch {p.rank} != {q.rank}")
    if p.rank == 0:
        raise ZeroRankError("wedin_pair requires rank >= 1")
    x, y, sigma = principal_pairs(p, q)
    p_parts = tuple(
        Projection(np.outer(x[:, i], x[:, i].conj())) for i in range(p.rank)
    )
    q_parts = tuple(
        Projection(np.outer(y[:, i], y[:, i].conj())) for i in range(p.rank)
    )
    pairing = WedinPairing(
        n=p.rank, p_parts=p_parts, q_parts=q_parts, sigma=tuple(map(float, sigma))
    )
    achieved = max(
        op_norm(pi.matrix - qi.matrix) for pi, qi in zip(p_parts, q_parts)
    )
    target = op_norm(p.matrix - q.matrix)
    if abs(achieved - target) > PAIRING_TOL:
        raise ValidationError(
            f"pairing failed to realize the operator distance "
            f"({achieved:.3e} vs {target:.3e})"
        )
    return pairing


@dataclass(frozen=True)
class SubspaceDistance:
    """theta = ||p - q||; omega = Hausdorff distance between the unit
    spheres, estimated from below. Always theta <= omega <= 2 theta."""

    theta: float
    omega: float

    def __post_init__(self):
        if not (
            self.theta <= self.omega + ORTHO_TOL
            and self.omega <= 2.0 * self.theta + ORTHO_TOL
        ):
            raise ValidationError(
                f"distances violate theta <= omega <= 2 theta "
                f"(theta={self.theta}, omega={self.omega})"
            )


def _dist_to_sphere(points: np.ndarray, proj: Projection) -> np.ndarray:
    """Distance from unit ``points`` (rows) to the unit sphere of the range
    of ``proj``: the nearest sphere point is proj(x)/||proj(x)||.

    Formed as an explicit residual vector; the closed form
    sqrt(2 - 2||proj x||) loses half the significant digits near zero.
    """
    projected = points @ proj.matrix.T
    norms = np.linalg.norm(projected, axis=1)
    out = np.full(points.shape[0], math.sqrt(2.0))
    safe = norms > 1e-150
    closest = projected[safe] / norms[safe, None]
    out[safe] = np.linalg.norm(points[safe] - closest, axis=1)
    return out


def subspace_distances(
    p: Projection, q: Projection, samples: int, rng: RngSpec
) -> SubspaceDistance:
    """Exact theta together with a sampled estimate of omega.

    omega is the maximum sphere-to-sphere distance over Haar samples from
    both unit spheres plus the principal vectors, which alone already
    force the estimate above theta.
    """
    _check_same_space(p, q)
    if p.rank == 0 or q.rank == 0:
        raise ZeroRankError("subspace_distances requires nonzero projections")
    theta = op_norm(p.matrix - q.matrix)
    x, y, _ = principal_pairs(p, q)
    candidates = [
        _dist_to_sphere(x.T.copy(), q).max(),
        _dist_to_sphere(y.T.copy(), p).max(),
    ]
    gen = rng.generator()
    if samples > 0:
        for src, other in ((p, q), (q, p)):
            z = _sphere_batch(gen, samples, src.rank)
            points = z @ src.onb().T
            candidates.append(_dist_to_sphere(points, other).max())
    return SubspaceDistance(theta=theta, omega=float(max(candidates)))


def conjugating_unitary(p: Projection, q: Projection) -> UnitaryMatrix:
    """Unitary u with u p u* = q and ||(1-u)p||_2 <= sqrt(2) ||p - q||_2.

    Built pairwise from the principal vectors: each aligned pair (x_i, y_i)
    has real nonnegative overlap, and the plane rotation taking x_i to y_i
    costs ||x_i - y_i|| <= sqrt(2) ||p_i - q_i||_2 of Hilbert-Schmidt energy.
    """
    _check_same_space(p, q)
    if p.rank != q.rank:
        raise RankMismatchError(f"rank mismatch {p.rank} != {q.rank}")
    d = p.dim
    u = np.eye(d, dtype=np.complex128)
    if p.rank == 0:
        return UnitaryMatrix(u)
    x, y, sigma = principal_pairs(p, q)
    for i in range(p.rank):
        e1 = x[:, i]
        s = float(sigma[i])
        w = y[:, i] - s * e1
        n2 = float(np.linalg.norm(w))
        if n2 <= 1e-12:
            continue
        e2 = w / n2
        u += (
            (s - 1.0) * (np.outer(e1, e1.conj()) + np.outer(e2, e2.conj()))
            + n2 * np.outer(e2, e1.conj())
            - n2 * np.outer(e1, e2.conj())
        )
    return UnitaryMatrix(u)


def almost_commuting_fix(
    p: Projection, u: UnitaryMatrix, eps: float
) -> UnitaryMatrix:
    """Replace a unitary nearly commuting with p by one that commutes
    exactly, at Hilbert-Schmidt cost ||(u-v)p||_2^2 <= 4 eps rk(p).

    Requires 0 < eps < 1/2 and the compression bound
    ||(1-p)up||_2^2 <= eps rk(p). v is assembled from the unitary polar
    parts of the two diagonal blocks of u in the p-adapted splitting;
    null directions of a block are completed by the SVD's unitary factors.
    """
    if p.dim != u.dim:
        raise RankMismatchError("projection and unitary act on different spaces")
    if not (0.0 < eps < 0.5):
        raise PreconditionViolatedError(f"eps must lie in (0, 1/2), got {eps}")
    if p.rank < 1:
        raise PreconditionViolatedError("almost_commuting_fix requires rk(p) >= 1")
    um = u.matrix
    compression = frob_norm(um @ p.matrix - p.matrix @ um @ p.matrix) ** 2
    if compression > eps * p.rank * (1.0 + 1e-9):
        raise PreconditionViolatedError(
            f"compression bound fails: ||(1-p)up||_2^2 = {compression:.6e} "
            f"> eps rk(p) = {eps * p.rank:.6e}"
        )
    basis = p.onb()
    eigs, vecs = np.linalg.eigh((p.matrix + p.matrix.conj().T) / 2.0)
    co_basis = np.ascontiguousarray(vecs[:, np.abs(eigs - 1.0) >= 0.5])
    blocks = []
    for side in (basis, co_basis):
        if side.shape[1] == 0:
            continue
        block = side.conj().T @ um @ side
        w, _, vh = np.linalg.svd(block)
        blocks.append(side @ (w @ vh) @ side.conj().T)
    v = blocks[0]
    for extra in blocks[1:]:
        v = v + extra
    return UnitaryMatrix(v)


def disjointify(p: Projection, q: Projection, u: UnitaryMatrix) -> Projection:
    """(1 - p + up) q (1 - p + pu*), given p, upu*, q mutually orthogonal.

    The result is a projection of rank rk(q) displaced from q by at most
    6 ||p||_1 in trace norm.
    """
    _check_same_space(p, q)
    if p.dim != u.dim:
        raise RankMismatchError("unitary acts on a different space")
    um = u.matrix
    conj_p = um @ p.matrix @ um.conj().T
    for name, prod in (
        ("p (upu*)", p.matrix @ conj_p),
        ("(upu*) q", conj_p @ q.matrix),
        ("p q", p.matrix @ q.matrix),
    ):
        residual = op_norm(prod)
        if residual > ORTHO_TOL:
            raise OrthogonalityViolatedError(
                f"||{name}|| = {residual:.3e} exceeds {ORTHO_TOL:.0e}"
            )
    left = np.eye(p.dim) - p.matrix + um @ p.matrix
    return Projection(left @ q.matrix @ left.conj().T)


def find_orthogonalizing_unitary(p: Projection, q: Projection) -> UnitaryMatrix:
    """Involution u with p, upu*, q mutually orthogonal (given p _|_ q it
    completes the disjointify precondition).

    Swaps an orthonormal basis of p(H) with directions orthogonal to
    p(H) + q(H); needs dim >= 2 rk(p) + rk(q).
    """
    _check_same_space(p, q)
    d = p.dim
    if d < 2 * p.rank + q.rank:
        raise DimensionTooSmallError(
            f"dim {d} < 2 rk(p) + rk(q) = {2 * p.rank + q.rank}"
        )
    if p.rank == 0:
        return UnitaryMatrix(np.eye(d))
    pb, qb = p.onb(), q.onb()
    stacked = np.hstack([pb, qb]) if qb.shape[1] else pb
    full, sing, _ = np.linalg.svd(stacked, full_matrices=True)
    span_dim = int(np.count_nonzero(sing > ORTHO_TOL))
    complement = full[:, span_dim:]
    targets = complement[:, : p.rank]
    u = np.eye(d, dtype=np.complex128)
    for i in range(p.rank):
        xi, wi = pb[:, i], targets[:, i]
        u -= np.outer(xi, xi.conj()) + np.outer(wi, wi.conj())
        u += np.outer(xi, wi.conj()) + np.outer(wi, xi.conj())
    return UnitaryMatrix(u)


def rank_one_distance(x: np.ndarray, y: np.ndarray) -> float:
    """||p - q|| for the rank-1 projections generated by unit x and y:
    sqrt(1 - |<x, y>|^2)."""
    overlap = abs(np.vdot(x, y))
    return math.sqrt(max(1.0 - min(overlap, 1.0) ** 2, 0.0))
