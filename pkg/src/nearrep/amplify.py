"""Trace amplification and Stinespring dilation at matrix scale.

Doubling a representation with the identity pulls every normalized trace
z strictly inside the unit disk ((z+1)/2 unless z = 1); tensor powers
then drive the modulus to gamma^n while the dimension grows as (2d)^n.
The LazyRep never materializes those powers: traces factorize exactly
and the homomorphism defect is budgeted by the unitary telescoping bound
defect_n <= n * defect_1. Materialization exists purely as a cross-check
for small n.

The plan picks the minimal n with gamma^n <= eps and 2^n >= 1/eps. At
this finite scale the trace factorization is exact, so the decay rate
per tensor factor is exactly gamma; the conservative rate (1+gamma)/2,
needed when the trace is only carried through an approximating CP map,
is reported alongside as n_conservative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadParamsError,
    DefectBudgetExceededError,
    DimensionTooLargeError,
    GammaOutOfRangeError,
    NotPSDError,
    NotUnitalError,
    ValidationError,
)
from .groups import Word
from .linalg import (
    MAX_DIM,
    UnitaryMatrix,
    as_matrix,
    direct_sum,
    frob_norm,
)
from .reps import ApproxRep, Certificate, evaluate_matrix, hom_defect
from .sphere import RngSpec


@dataclass(frozen=True, eq=False)
class LazyRep:
    """Doubled and tensor-powered view of a base representation.

    Normalized traces factorize as tau(g) = tau_level1(g)^n and are
    evaluated without materializing anything; effective_dim is kept as an
    exact Python integer.
    """

    base: ApproxRep
    doubled: bool = False
    tensor_power: int = 1

    def __post_init__(self):
        if self.tensor_power < 1:
            raise BadParamsError("tensor_power must be >= 1")

    @property
    def level1_dim(self) -> int:
        return 2 * self.base.dim if self.doubled else self.base.dim

    @property
    def effective_dim(self) -> int:
        return self.level1_dim**self.tensor_power

    def tau_base(self, word: Word) -> complex:
        m = evaluate_matrix(self.base, word)
        return complex(np.trace(m)) / self.base.dim

    def tau_level1(self, word: Word) -> complex:
        t = self.tau_base(word)
        return (t + 1.0) / 2.0 if self.doubled else t

    def tau(self, word: Word) -> complex:
        return self.tau_level1(word) ** self.tensor_power

    def level1_defect(self, g: Word, h: Word) -> float:
        d = hom_defect(self.base, g, h)
        return d / math.sqrt(2.0) if self.doubled else d

    def defect_bound(self, g: Word, h: Word) -> float:
        """Telescoping bound n * defect_1 on the level-n HS defect."""
        return self.tensor_power * self.level1_defect(g, h)


def double(rep: ApproxRep) -> LazyRep:
    """Block-extend every image with the identity: tau -> (tau + 1)/2,
    strictly inside the unit circle whenever tau != 1."""
    return LazyRep(base=rep, doubled=True, tensor_power=1)


def materialize(lazy: LazyRep, word: Word, max_dim: int = MAX_DIM) -> UnitaryMatrix:
    """Explicit Kronecker-power image of a word, for cross-checking the
    lazy trace and defect arithmetic at small n."""
    if lazy.effective_dim > max_dim:
        raise DimensionTooLargeError(
            f"effective dim {lazy.effective_dim} exceeds max_dim {max_dim}"
        )
    level1 = evaluate_matrix(lazy.base, word)
    if lazy.doubled:
        level1 = direct_sum(level1, np.eye(lazy.base.dim))
    out = level1
    for _ in range(lazy.tensor_power - 1):
        out = np.kron(out, level1)
    return UnitaryMatrix(out)


@dataclass(frozen=True)
class AmplificationPlan:
    """Schedule (n, delta) for a post-doubling trace bound gamma and a
    target eps: gamma^n <= eps, 2^n >= 1/eps, and
    2 sqrt(1 - (1-delta)^n) <= eps."""

    gamma: float
    n: int
    delta: float
    eps: float
    n_conservative: int

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise GammaOutOfRangeError(f"gamma {self.gamma} outside [0, 1)")
        if self.gamma**self.n > self.eps * (1.0 + 1e-12):
            raise ValidationError("plan violates gamma^n <= eps")
        if 2.0**self.n < 1.0 / self.eps:
            raise ValidationError("plan violates 2^n >= 1/eps")
        if 2.0 * math.sqrt(1.0 - (1.0 - self.delta) ** self.n) > self.eps * (
            1.0 + 1e-9
        ):
            raise ValidationError("plan delta too large for eps")


def _minimal_power(ratio: float, eps: float) -> int:
    if ratio <= eps:
        return 1
    n = max(1, math.ceil(math.log(eps) / math.log(ratio)))
    while ratio**n > eps:
        n += 1
    while n > 1 and ratio ** (n - 1) <= eps:
        n -= 1
    return n


def plan(gamma: float, eps: float) -> AmplificationPlan:
    """Minimal tensor power meeting the trace and dimension targets, with
    the largest admissible delta = 1 - (1 - eps^2/4)^(1/n)."""
    if not 0.0 <= gamma < 1.0:
        raise GammaOutOfRangeError(
            f"gamma must lie in [0, 1), got {gamma}", element=None
        )
    if not 0.0 < eps <= 1.0:
        raise BadParamsError(f"eps must lie in (0, 1], got {eps}")
    n_trace = 1 if gamma == 0.0 else _minimal_power(gamma, eps)
    n_dim = max(1, math.ceil(math.log2(1.0 / eps))) if eps < 1.0 else 1
    while 2.0**n_dim < 1.0 / eps:
        n_dim += 1
    n = max(n_trace, n_dim)
    delta = 1.0 - (1.0 - eps**2 / 4.0) ** (1.0 / n)
    return AmplificationPlan(
        gamma=gamma,
        n=n,
        delta=delta,
        eps=eps,
        n_conservative=_minimal_power((1.0 + gamma) / 2.0, eps) if eps < 1 else 1,
    )


def amplify_to_tolerance(
    rep: ApproxRep, words, eps: float, rng: RngSpec = RngSpec()
):
    """Drive every off-identity normalized trace of E below eps.

    Returns (LazyRep, Certificate): the lazy doubled tensor power whose
    traces are computed exactly by factorization, and an hs-style
    certificate over the lazy quantities (defect bounds n * defect_1 and
    moduli |tau|). Representations already meeting the target are passed
    through untouched (n = 1, no doubling).
    """
    words = tuple(words)
    if not words:
        raise BadParamsError("E must be nonempty")
    if not 0.0 < eps <= 1.0:
        raise BadParamsError(f"eps must lie in (0, 1], got {eps}")
    non_identity = [w for w in words if not rep.group.is_identity_word(w)]
    base = LazyRep(base=rep, doubled=False, tensor_power=1)
    taus = {str(w): base.tau_base(w) for w in non_identity}

    if all(abs(t) <= eps for t in taus.values()):
        lazy = base
        the_plan = None
    else:
        offenders = [w for w in non_identity if abs(taus[str(w)] - 1.0) <= 1e-12]
        if offenders:
            raise GammaOutOfRangeError(
                f"element {offenders[0]} has normalized trace 1; doubling "
                "cannot separate it from the identity",
                element=str(offenders[0]),
            )
        gamma = max(abs((t + 1.0) / 2.0) for t in taus.values())
        the_plan = plan(gamma, eps)
        budget = eps / (2.0 * the_plan.n)
        worst = max(
            (hom_defect(rep, g, h) for g in words for h in words), default=0.0
        )
        if worst > budget:
            raise DefectBudgetExceededError(
                f"base hom defect {worst:.3e} exceeds budget eps/(2n) = "
                f"{budget:.3e}; the base representation is too rough for "
                f"eps = {eps}"
            )
        lazy = LazyRep(base=rep, doubled=True, tensor_power=the_plan.n)

    pair_vals = {
        (str(g), str(h)): lazy.defect_bound(g, h) for g in words for h in words
    }
    elem_vals = {str(w): abs(lazy.tau(w)) for w in non_identity}
    dim_bound_met = lazy.effective_dim >= 1.0 / eps
    passed = all(v <= eps for v in (*pair_vals.values(), *elem_vals.values()))
    witnesses = {
        "doubled": lazy.doubled,
        "n": lazy.tensor_power,
        "gamma": None if the_plan is None else the_plan.gamma,
        "delta": None if the_plan is None else the_plan.delta,
        "n_conservative": None if the_plan is None else the_plan.n_conservative,
        "effective_dim": str(lazy.effective_dim),
        "per_element_tau_modulus": elem_vals,
    }
    cert = Certificate(
        mode="hs",
        eps=eps,
        words=words,
        dim=int(lazy.effective_dim),
        per_pair_defects=pair_vals,
        per_element_obstructions=elem_vals,
        dim_bound_met=dim_bound_met,
        passed=passed,
        witnesses=witnesses,
        rng=rng,
    )
    return lazy, cert


# ---------------------------------------------------------------------------
# Stinespring dilation of unital completely positive maps


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """Choi matrix C = sum_ij E_ij (x) Phi(E_ij) of a map
    Phi: M_{n_in} -> M_{n_out}; positive semidefinite iff Phi is
    completely positive, unital iff the partial trace over the input
    factor is the identity."""

    n_in: int
    n_out: int
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        size = self.n_in * self.n_out
        if self.n_in < 1 or self.n_out < 1 or m.shape != (size, size):
            raise BadParamsError(
                f"Choi matrix must be {size}x{size} for dims "
                f"({self.n_in}, {self.n_out})"
            )
        if frob_norm(m - m.conj().T) > 1e-9:
            raise NotPSDError("Choi matrix is not Hermitian")
        eigs = np.linalg.eigvalsh((m + m.conj().T) / 2.0)
        if float(eigs[0]) < -1e-9:
            raise NotPSDError(f"Choi matrix has eigenvalue {float(eigs[0]):.3e}")
        object.__setattr__(self, "matrix", m)

    def _blocks(self) -> np.ndarray:
        return self.matrix.reshape(self.n_in, self.n_out, self.n_in, self.n_out)

    @property
    def unital(self) -> bool:
        partial = np.einsum("iaib->ab", self._blocks())
        return bool(frob_norm(partial - np.eye(self.n_out)) <= 1e-9)

    def apply(self, x) -> np.ndarray:
        """Phi(x) recovered from the Choi matrix."""
        x = as_matrix(x)
        if x.shape != (self.n_in, self.n_in):
            raise BadParamsError(f"argument must be {self.n_in}x{self.n_in}")
        return np.einsum("ij,iajb->ab", x, self._blocks())


def choi_from_kraus(kraus, n_in: int, n_out: int) -> ChoiMatrix:
    """Choi matrix of x -> sum_k K_k x K_k*."""
    blocks = np.zeros((n_in, n_out, n_in, n_out), dtype=np.complex128)
    for k in kraus:
        k = as_matrix(k)
        if k.shape != (n_out, n_in):
            raise BadParamsError(
                f"Kraus operators must be {n_out}x{n_in}, got {k.shape}"
            )
        blocks += np.einsum("ai,bj->iajb", k, k.conj())
    size = n_in * n_out
    return ChoiMatrix(n_in=n_in, n_out=n_out, matrix=blocks.reshape(size, size))


@dataclass(frozen=True, eq=False)
class StinespringDilation:
    """Isometry V and Kraus operators with
    Phi(a) = V* (a (x) I_env) V = sum_k K_k a K_k*."""

    isometry: np.ndarray  # (n_in * env_dim, n_out)
    kraus: tuple
    env_dim: int


def stinespring_dilate(
    choi: ChoiMatrix, eigenvalue_cutoff: float = 1e-10
) -> StinespringDilation:
    """Dilate a unital CP map: Kraus operators from the eigendecomposition
    of the Choi matrix (eigenvalues below the cutoff dropped), environment
    dimension = number retained, V x = sum_k (K_k* x) (x) e_k."""
    if not choi.unital:
        raise NotUnitalError(
            "Choi matrix is not unital (input partial trace != identity)"
        )
    eigs, vecs = np.linalg.eigh((choi.matrix + choi.matrix.conj().T) / 2.0)
    keep = np.flatnonzero(eigs >= eigenvalue_cutoff)[::-1]  # descending weight
    kraus = tuple(
        math.sqrt(float(eigs[idx]))
        * vecs[:, idx].reshape(choi.n_in, choi.n_out).T
        for idx in keep
    )
    env = len(kraus)
    if env == 0:
        raise NotPSDError("Choi matrix has no spectral weight above the cutoff")
    v = np.zeros((choi.n_in * env, choi.n_out), dtype=np.complex128)
    for k, op in enumerate(kraus):
        v[k::env, :] = op.conj().T
    gram = v.conj().T @ v
    if frob_norm(gram - np.eye(choi.n_out)) > 1e-9:
        raise ValidationError("dilation isometry failed V*V = I")
    return StinespringDilation(isometry=v, kraus=kraus, env_dim=env)


def kraus_apply(kraus, x) -> np.ndarray:
    x = as_matrix(x)
    out = np.zeros(
        (kraus[0].shape[0], kraus[0].shape[0]), dtype=np.complex128
    )
    for k in kraus:
        out += k @ x @ k.conj().T
    return out
