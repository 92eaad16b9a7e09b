"""Dense complex linear algebra core.

Schatten norms, the normalized Hilbert-Schmidt norm, Kronecker products,
direct sums, polar factorization, and validated unitary/projection
wrappers. Everything is double-precision complex, dense, and pure: no
function mutates its inputs, and wrapper-held arrays are frozen.

Operator and Schatten-1 norms are computed from LAPACK singular values
so that all norm claims share one audited primitive. The Frobenius norm
is evaluated directly (it coincides with the Schatten-2 value).

Matrix JSON interchange format::

    {"rows": r, "cols": c, "data": [re00, im00, re01, im01, ...]}

row-major, doubles. Used by every module and the CLI.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateSingularValueWarning,
    NonSquareError,
    OverflowGuardError,
    SchemaError,
    ValidationError,
)

#: residual at which validated wrappers accept a matrix as-is
VALIDATION_TOL = 1e-10
#: unitarity residual up to which construction re-unitarizes via the polar factor
REPAIR_TOL = 1e-6
#: largest dimension materialized eagerly; beyond it callers must stay lazy
MAX_DIM = 4096


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a 2-d complex128 array, rejecting NaN/Inf entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValidationError(f"expected a 2-d array, got shape {m.shape}")
    if m.size and not bool(np.all(np.isfinite(m))):
        raise ValidationError("matrix contains non-finite entries")
    return m


def _require_square(m: np.ndarray, what: str) -> np.ndarray:
    if m.shape[0] != m.shape[1]:
        raise NonSquareError(f"{what} requires a square matrix, got {m.shape}")
    return m


class NormKind(enum.Enum):
    OPERATOR = "operator"
    SCHATTEN1 = "schatten1"
    SCHATTEN2 = "schatten2"
    HS_NORMALIZED = "hs_normalized"


def singular_values(a) -> np.ndarray:
    """Singular values of ``a`` in descending order."""
    return np.linalg.svd(as_matrix(a), compute_uv=False)


def norm(a, kind: NormKind | str) -> float:
    """Matrix norm of the requested kind.

    operator: largest singular value. schatten1: sum of singular values.
    schatten2: Frobenius. hs_normalized: Frobenius / sqrt(dim), defined
    for square matrices only; every unitary has hs_normalized norm 1.
    """
    kind = NormKind(kind)
    m = as_matrix(a)
    if m.size == 0:
        if kind is NormKind.HS_NORMALIZED:
            _require_square(m, "hs_normalized norm")
        return 0.0
    if kind is NormKind.OPERATOR:
        return float(np.linalg.svd(m, compute_uv=False)[0])
    if kind is NormKind.SCHATTEN1:
        return float(np.sum(np.linalg.svd(m, compute_uv=False)))
    frob = float(np.linalg.norm(m))
    if kind is NormKind.SCHATTEN2:
        return frob
    _require_square(m, "hs_normalized norm")
    return frob / math.sqrt(m.shape[0])


def op_norm(a) -> float:
    return norm(a, NormKind.OPERATOR)


def trace_norm(a) -> float:
    return norm(a, NormKind.SCHATTEN1)


def frob_norm(a) -> float:
    return float(np.linalg.norm(as_matrix(a)))


def hs_norm(a) -> float:
    return norm(a, NormKind.HS_NORMALIZED)


def tensor(a, b, max_dim: int = MAX_DIM) -> np.ndarray:
    """Kronecker product a (x) b.

    Guards the materialized size: if rows(a) * rows(b) (or the column
    product) exceeds ``max_dim``, raises OverflowGuardError and the caller
    must use the lazy amplification path instead.
    """
    ma, mb = as_matrix(a), as_matrix(b)
    rows = ma.shape[0] * mb.shape[0]
    cols = ma.shape[1] * mb.shape[1]
    if max(rows, cols) > max_dim:
        raise OverflowGuardError(
            f"tensor product of {ma.shape} and {mb.shape} exceeds max_dim={max_dim}"
        )
    return np.kron(ma, mb)


def direct_sum(a, b) -> np.ndarray:
    """Block-diagonal direct sum a (+) b."""
    ma, mb = as_matrix(a), as_matrix(b)
    out = np.zeros(
        (ma.shape[0] + mb.shape[0], ma.shape[1] + mb.shape[1]), dtype=np.complex128
    )
    out[: ma.shape[0], : ma.shape[1]] = ma
    out[ma.shape[0] :, ma.shape[1] :] = mb
    return out


def _polar_factor(m: np.ndarray, degenerate_tol: float = 1e-12) -> np.ndarray:
    w, s, vh = np.linalg.svd(m)
    if s.size and float(s[-1]) < degenerate_tol:
        warnings.warn(
            f"smallest singular value {float(s[-1]):.3e} below {degenerate_tol:.0e}; "
            "polar unitary chosen by the SVD's deterministic ordering",
            DegenerateSingularValueWarning,
            stacklevel=3,
        )
    return w @ vh


def polar_unitary(a) -> "UnitaryMatrix":
    """Unitary factor W V* of the SVD a = W S V*.

    Minimizes ||a - U||_2 over unitaries U. Nearly singular inputs are
    flagged with DegenerateSingularValueWarning but still resolved
    deterministically by the SVD's ordering.
    """
    m = _require_square(as_matrix(a), "polar_unitary")
    return UnitaryMatrix(_polar_factor(m))


def _freeze(m: np.ndarray) -> np.ndarray:
    out = np.array(m, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


def unitarity_residual(m: np.ndarray) -> float:
    """Operator-norm residual of U*U - I."""
    d = m.shape[0]
    return op_norm(m.conj().T @ m - np.eye(d))


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    """Square matrix validated to satisfy ||U*U - I||_op <= VALIDATION_TOL.

    Construction re-unitarizes through the polar factor when the residual
    lies in (VALIDATION_TOL, REPAIR_TOL] and rejects anything rougher.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = _require_square(as_matrix(self.matrix), "UnitaryMatrix")
        if m.shape[0] == 0:
            raise ValidationError("UnitaryMatrix requires positive dimension")
        d = m.shape[0]
        # Frobenius residual bounds the operator residual from above, so a
        # pass here avoids the SVD on the (common) clean path.
        gram_defect = m.conj().T @ m - np.eye(d)
        residual = float(np.linalg.norm(gram_defect))
        if residual > VALIDATION_TOL:
            residual = op_norm(gram_defect)
            if residual > VALIDATION_TOL:
                if residual > REPAIR_TOL:
                    raise ValidationError(
                        f"unitarity residual {residual:.3e} exceeds repair "
                        f"threshold {REPAIR_TOL:.0e}"
                    )
                m = _polar_factor(m)
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def adjoint(self) -> "UnitaryMatrix":
        return UnitaryMatrix(self.matrix.conj().T)

    def __matmul__(self, other: "UnitaryMatrix") -> "UnitaryMatrix":
        return UnitaryMatrix(self.matrix @ other.matrix)


@dataclass(frozen=True, eq=False)
class Projection:
    """Orthogonal projection with a cached rank.

    Accepts matrices with ||P^2 - P||_op and ||P - P*||_op at most
    VALIDATION_TOL; the rank is the number of eigenvalues within 0.5 of 1
    and must agree with the trace to VALIDATION_TOL * dim.
    """

    matrix: np.ndarray
    rank: int = -1  # computed during validation; do not pass

    def __post_init__(self):
        m = _require_square(as_matrix(self.matrix), "Projection")
        if m.shape[0] == 0:
            raise ValidationError("Projection requires positive dimension")
        herm = op_norm(m - m.conj().T)
        idem = op_norm(m @ m - m)
        if herm > VALIDATION_TOL or idem > VALIDATION_TOL:
            raise ValidationError(
                f"projection residuals too large (hermitian {herm:.3e}, "
                f"idempotent {idem:.3e})"
            )
        eigs = np.linalg.eigvalsh((m + m.conj().T) / 2.0)
        rank = int(np.count_nonzero(np.abs(eigs - 1.0) < 0.5))
        trace = float(np.real(np.trace(m)))
        if abs(trace - rank) > VALIDATION_TOL * m.shape[0]:
            raise ValidationError(
                f"rank {rank} disagrees with trace {trace:.12f}"
            )
        object.__setattr__(self, "matrix", _freeze(m))
        object.__setattr__(self, "rank", rank)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def zero(cls, dim: int) -> "Projection":
        return cls(np.zeros((dim, dim)))

    @classmethod
    def identity(cls, dim: int) -> "Projection":
        return cls(np.eye(dim))

    @classmethod
    def onto(cls, columns) -> "Projection":
        """Projection onto the column span of ``columns`` (need not be orthonormal)."""
        c = np.asarray(columns, dtype=np.complex128)
        if c.ndim == 1:
            c = c[:, None]
        q, r = np.linalg.qr(c)
        keep = np.abs(np.diag(r)) > 1e-12
        q = q[:, keep]
        return cls(q @ q.conj().T)

    def onb(self) -> np.ndarray:
        """Orthonormal basis of the range, as the columns of a (dim, rank) array."""
        eigs, vecs = np.linalg.eigh((self.matrix + self.matrix.conj().T) / 2.0)
        return np.ascontiguousarray(vecs[:, np.abs(eigs - 1.0) < 0.5])


def matrix_to_json(a) -> dict:
    m = as_matrix(a)
    data = np.empty(2 * m.size, dtype=np.float64)
    flat = m.reshape(-1)
    data[0::2] = flat.real
    data[1::2] = flat.imag
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "data": data.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        data = np.asarray(obj["data"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed matrix JSON: {exc}") from exc
    if rows <= 0 or cols <= 0:
        raise SchemaError("matrix JSON requires positive rows and cols")
    if data.shape != (2 * rows * cols,):
        raise SchemaError(
            f"matrix JSON data length {data.size} != 2*{rows}*{cols}"
        )
    m = (data[0::2] + 1j * data[1::2]).reshape(rows, cols)
    return as_matrix(m)
