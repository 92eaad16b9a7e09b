"""Approximate unitary representations and hyperlinearity certificates.

An ApproxRep maps each generator symbol of a group to a unitary of one
fixed dimension; a word evaluates to the left-to-right product of images
and adjoints. Products gh inside defect metrics follow the group: a
table-kind group resolves gh through its multiplication table (canonical
spelling), so a perturbed table representation shows genuine defects,
while presentation-kind groups concatenate reduced words (no rewriting
with relators is ever attempted; distinct reduced words are distinct
inputs and free images have zero defect by construction).

Three certificate modes:

hs      normalized-HS homomorphism defects over E x E and trace
        obstructions over E \\ {e}; pass iff all are <= eps.
sphere  Monte Carlo measures of the violation sets
        {x : ||pi(gh)x - pi(g)pi(h)x|| > eps} and {x : |<x, pi(g)x>| > eps};
        pass iff every estimate is <= eps. A condition whose defect
        operator has norm <= eps is recorded as exactly 0 (its violation
        set is empty; sampling is skipped).
onb     searches for one orthonormal basis satisfying every pointwise
        condition at once; pass iff a witness basis is found.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadParamsError,
    EmptyEError,
    ModeUnavailableError,
    OnbSearchExhausted,
    SchemaError,
    UnknownFixtureError,
    UnknownGeneratorError,
    ValidationError,
)
from .groups import GroupSpec, Word, cyclic_group, group_from_json, group_to_json
from .linalg import (
    MAX_DIM,
    UnitaryMatrix,
    as_matrix,
    hs_norm,
    matrix_from_json,
    matrix_to_json,
    op_norm,
)
from .sphere import (
    RngSpec,
    _complex_normal,
    _haar_unitary,
    _quad_forms,
    _sphere_batch,
    onb_in_set,
    statistical_slack,
)

_CHUNK_ENTRIES = 4_000_000


@dataclass(frozen=True, eq=False)
class ApproxRep:
    """Map from generator symbols to same-dimension unitaries."""

    group: GroupSpec
    dim: int
    images: dict

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError("representation dimension must be >= 1")
        images = dict(self.images)
        missing = [g for g in self.group.generators if g not in images]
        if missing:
            raise ValidationError(f"missing images for generators {missing}")
        for name, u in images.items():
            if not isinstance(u, UnitaryMatrix):
                u = UnitaryMatrix(as_matrix(u))
                images[name] = u
            if u.dim != self.dim:
                raise ValidationError(
                    f"image of {name!r} has dim {u.dim}, expected {self.dim}"
                )
        object.__setattr__(self, "images", images)

    def image(self, k: int) -> np.ndarray:
        """Matrix of the signed letter k (adjoint for negative k)."""
        if not 1 <= abs(k) <= len(self.group.generators):
            raise UnknownGeneratorError(f"letter {k} out of range")
        m = self.images[self.group.generators[abs(k) - 1]].matrix
        return m if k > 0 else m.conj().T


def evaluate_matrix(rep: ApproxRep, word: Word) -> np.ndarray:
    """Left-to-right product of letter images; the empty word is I."""
    out = np.eye(rep.dim, dtype=np.complex128)
    for k in word.letters:
        out = out @ rep.image(k)
    return out


def evaluate(rep: ApproxRep, word: Word) -> UnitaryMatrix:
    return UnitaryMatrix(evaluate_matrix(rep, word))


def hom_defect(rep: ApproxRep, g: Word, h: Word) -> float:
    """||pi(gh) - pi(g) pi(h)||_HS.

    gh multiplies in the group: table-kind groups resolve it through the
    multiplication table (its canonical spelling), so relation failure is
    visible; presentations concatenate, so free images have defect 0.
    """
    product = evaluate_matrix(rep, rep.group.product_word(g, h))
    composed = evaluate_matrix(rep, g) @ evaluate_matrix(rep, h)
    return hs_norm(product - composed)


def trace_obstruction(rep: ApproxRep, g: Word) -> float:
    """|tr(pi(g))| / dim, in [0, 1]; zero means maximally trace-free."""
    return abs(complex(np.trace(evaluate_matrix(rep, g)))) / rep.dim


@dataclass(frozen=True)
class CertifyConfig:
    trials: int = 20000
    strict_dim: bool = False
    max_dim: int = MAX_DIM
    onb_max_tries: int = 8


@dataclass(frozen=True, eq=False)
class Certificate:
    """Machine-checkable result of one certification run.

    per_pair_defects holds the recorded quantity of the mode (HS defect,
    violation-measure estimate, or per-basis-column maximum) keyed by the
    word pair; likewise per_element_obstructions for single elements.
    """

    mode: str
    eps: float
    words: tuple
    dim: int
    per_pair_defects: dict
    per_element_obstructions: dict
    dim_bound_met: bool
    passed: bool
    witnesses: dict
    rng: RngSpec | None = None


def _word_cache(rep: ApproxRep):
    cache = {}

    def get(word: Word) -> np.ndarray:
        if word.letters not in cache:
            cache[word.letters] = evaluate_matrix(rep, word)
        return cache[word.letters]

    return get


def _split_identity(group: GroupSpec, words):
    non_identity = [w for w in words if not group.is_identity_word(w)]
    return non_identity


def certify(
    rep: ApproxRep,
    words,
    eps: float,
    mode: str = "hs",
    config: CertifyConfig = CertifyConfig(),
    rng: RngSpec = RngSpec(),
) -> Certificate:
    """Certify the finite instance (E, eps) for a representation."""
    words = tuple(words)
    if not words:
        raise EmptyEError("E must be a nonempty list of words")
    if eps <= 0:
        raise BadParamsError("eps must be positive")
    for w in words:
        rep.group.check_letters(w)
    if mode not in ("hs", "sphere", "onb"):
        raise BadParamsError(f"unknown certification mode {mode!r}")
    if mode in ("sphere", "onb") and rep.dim > config.max_dim:
        raise ModeUnavailableError(
            f"mode {mode} needs materialization at dim {rep.dim} > "
            f"max_dim {config.max_dim}"
        )
    dim_bound_met = rep.dim >= 1.0 / eps
    non_identity = _split_identity(rep.group, words)
    get = _word_cache(rep)

    if mode == "hs":
        pair_vals = {
            (str(g), str(h)): hs_norm(
                get(rep.group.product_word(g, h)) - get(g) @ get(h)
            )
            for g in words
            for h in words
        }
        elem_vals = {
            str(g): abs(complex(np.trace(get(g)))) / rep.dim for g in non_identity
        }
        quantities_ok = all(
            v <= eps for v in (*pair_vals.values(), *elem_vals.values())
        )
        passed = quantities_ok and (dim_bound_met or not config.strict_dim)
        witnesses = {}
        used_rng = None
    elif mode == "sphere":
        pair_vals, elem_vals = _sphere_estimates(
            rep, words, non_identity, eps, config.trials, rng, get
        )
        quantities_ok = all(
            v <= eps for v in (*pair_vals.values(), *elem_vals.values())
        )
        passed = quantities_ok and (dim_bound_met or not config.strict_dim)
        witnesses = {
            "trials": config.trials,
            "slack": statistical_slack(config.trials),
            "shared_sample_batch": True,
        }
        used_rng = rng
    else:
        pair_vals, elem_vals, passed, witnesses = _onb_certify(
            rep, words, non_identity, eps, config, rng, get
        )
        passed = passed and (dim_bound_met or not config.strict_dim)
        used_rng = rng

    return Certificate(
        mode=mode,
        eps=eps,
        words=words,
        dim=rep.dim,
        per_pair_defects=pair_vals,
        per_element_obstructions=elem_vals,
        dim_bound_met=dim_bound_met,
        passed=passed,
        witnesses=witnesses,
        rng=used_rng,
    )


def _sphere_estimates(rep, words, non_identity, eps, trials, rng, get):
    d = rep.dim
    pair_mats = {}
    pair_counts = {}
    for g in words:
        for h in words:
            key = (str(g), str(h))
            defect = get(rep.group.product_word(g, h)) - get(g) @ get(h)
            if op_norm(defect) <= eps:
                pair_counts[key] = 0  # violation set provably empty
            else:
                pair_mats[key] = defect
                pair_counts[key] = 0
    elem_mats = {}
    elem_counts = {}
    for g in non_identity:
        key = str(g)
        elem_counts[key] = 0
        if eps < 1.0:  # |<x, ux>| <= 1 always
            elem_mats[key] = get(g)
    gen = rng.generator()
    chunk = max(1, _CHUNK_ENTRIES // d)
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        x = _sphere_batch(gen, n, d)
        for key, mat in pair_mats.items():
            norms = np.linalg.norm(x @ mat.T, axis=1)
            pair_counts[key] += int(np.count_nonzero(norms > eps))
        for key, mat in elem_mats.items():
            vals = np.abs(_quad_forms(x, mat))
            elem_counts[key] += int(np.count_nonzero(vals > eps))
        done += n
    pair_vals = {k: c / trials for k, c in pair_counts.items()}
    elem_vals = {k: c / trials for k, c in elem_counts.items()}
    return pair_vals, elem_vals


def _onb_certify(rep, words, non_identity, eps, config, rng, get):
    d = rep.dim
    pair_mats = {
        (str(g), str(h)): get(rep.group.product_word(g, h)) - get(g) @ get(h)
        for g in words
        for h in words
    }
    elem_mats = {str(g): get(g) for g in non_identity}

    def column_ok(columns: np.ndarray) -> np.ndarray:
        ok = np.ones(columns.shape[1], dtype=bool)
        for mat in pair_mats.values():
            ok &= np.linalg.norm(mat @ columns, axis=0) <= eps
        for mat in elem_mats.values():
            vals = np.abs(np.sum(columns.conj() * (mat @ columns), axis=0))
            # the true value is at most 1 (Cauchy-Schwarz); trim fp overshoot
            ok &= np.minimum(vals, 1.0) <= eps
        return ok

    # estimated sufficient condition dim * nu(complement) < 1
    gen = rng.generator()
    chunk = max(1, _CHUNK_ENTRIES // d)
    bad, done = 0, 0
    while done < config.trials:
        n = min(chunk, config.trials - done)
        x = _sphere_batch(gen, n, d)
        bad += int(np.count_nonzero(~column_ok(x.T)))
        done += n
    complement = bad / config.trials
    witnesses = {
        "dim_times_complement_measure": d * complement,
        "complement_measure_estimate": complement,
        "trials": config.trials,
        "max_tries": config.onb_max_tries,
    }
    try:
        result = onb_in_set(column_ok, d, rng, config.onb_max_tries)
    except OnbSearchExhausted as exc:
        witnesses.update(
            {"exhausted": True, "pass_rates": list(exc.pass_rates)}
        )
        return {}, {}, False, witnesses
    basis = result.basis
    pair_vals = {
        key: float(np.linalg.norm(mat @ basis, axis=0).max())
        for key, mat in pair_mats.items()
    }
    elem_vals = {
        key: float(
            np.abs(np.sum(basis.conj() * (mat @ basis), axis=0)).max()
        )
        for key, mat in elem_mats.items()
    }
    witnesses.update(
        {
            "exhausted": False,
            "tries": result.tries,
            "pass_rates": list(result.pass_rates),
            "basis": matrix_to_json(basis),
        }
    )
    return pair_vals, elem_vals, True, witnesses


# ---------------------------------------------------------------------------
# fixtures


def _regular_images(group: GroupSpec) -> dict:
    n = group.order
    images = {}
    for name, g in zip(group.generators, group.generator_elements):
        m = np.zeros((n, n), dtype=np.complex128)
        m[group.table[g, np.arange(n)], np.arange(n)] = 1.0
        images[name] = UnitaryMatrix(m)
    return images


def zoo(name: str, **params) -> ApproxRep:
    """Exactly-understood example representations.

    regular_finite(group): left regular representation of a table-kind
        group; all defects vanish and every off-identity obstruction is 0.
    cyclic_character(n, k): the 1-dim character a -> exp(2 pi i k / n) of
        Z/n; obstructions have modulus 1 at every non-identity power.
    free_haar(rank, d, seed): free generators mapped to independent Haar
        unitaries; reduced-product evaluation has zero homomorphism defect.
    integer_phase(theta): Z mapped to the phase exp(i theta).
    perturbed(base, delta, seed): base with the first generator image
        multiplied by exp(i delta K), K a random unit-norm Hermitian.
    """
    if name == "regular_finite":
        group = params.get("group")
        if not isinstance(group, GroupSpec) or group.kind != "table":
            raise BadParamsError("regular_finite needs a table-kind GroupSpec")
        return ApproxRep(group=group, dim=group.order, images=_regular_images(group))
    if name == "cyclic_character":
        n, k = int(params.get("n", 0)), int(params.get("k", 0))
        if n < 1:
            raise BadParamsError("cyclic_character needs n >= 1")
        base = cyclic_group(n)
        group = GroupSpec(
            kind="table",
            generators=("a",),
            table=base.table,
            identity=base.identity,
            inverse=base.inverse,
            elements=base.elements,
            generator_elements=(1 % n,),
        )
        phase = np.exp(2j * np.pi * k / n)
        return ApproxRep(group=group, dim=1, images={"a": UnitaryMatrix([[phase]])})
    if name == "free_haar":
        rank, d = int(params.get("rank", 0)), int(params.get("d", 0))
        if rank < 1 or d < 1:
            raise BadParamsError("free_haar needs rank >= 1 and d >= 1")
        rng = _as_rng(params.get("seed", 0))
        names = tuple(
            chr(ord("a") + i) if rank <= 26 else f"g{i + 1}" for i in range(rank)
        )
        group = GroupSpec(kind="presentation", generators=names)
        gen = rng.generator()
        images = {nm: UnitaryMatrix(_haar_unitary(gen, d)) for nm in names}
        return ApproxRep(group=group, dim=d, images=images)
    if name == "integer_phase":
        theta = float(params.get("theta", 0.0))
        group = GroupSpec(kind="presentation", generators=("a",))
        return ApproxRep(
            group=group, dim=1, images={"a": UnitaryMatrix([[np.exp(1j * theta)]])}
        )
    if name == "perturbed":
        base = params.get("base")
        if not isinstance(base, ApproxRep):
            raise BadParamsError("perturbed needs base=ApproxRep")
        delta = float(params.get("delta", 0.0))
        rng = _as_rng(params.get("seed", 0))
        gen = rng.generator()
        z = _complex_normal(gen, (base.dim, base.dim))
        herm = (z + z.conj().T) / 2.0
        herm /= op_norm(herm)
        eigs, vecs = np.linalg.eigh(herm)
        kick = (vecs * np.exp(1j * delta * eigs)) @ vecs.conj().T
        images = dict(base.images)
        first = base.group.generators[0]
        images[first] = UnitaryMatrix(kick @ images[first].matrix)
        return ApproxRep(group=base.group, dim=base.dim, images=images)
    raise UnknownFixtureError(f"unknown fixture {name!r}")


def _as_rng(seed) -> RngSpec:
    if isinstance(seed, RngSpec):
        return seed
    return RngSpec(seed=int(seed))


def all_element_words(group: GroupSpec) -> list:
    """Every group element as a single-letter word (table kind with all
    elements among the generators)."""
    if group.kind != "table":
        raise BadParamsError("--all-table-elements needs a table-kind group")
    covered = set(group.generator_elements)
    if covered != set(range(group.order)):
        raise BadParamsError(
            "not every element is a generator; provide an explicit word file"
        )
    by_element = {}
    for i, g in enumerate(group.generator_elements):
        by_element.setdefault(g, i + 1)
    return [Word((by_element[g],)) for g in range(group.order)]


# ---------------------------------------------------------------------------
# JSON interchange


def rep_to_json(rep: ApproxRep) -> dict:
    return {
        "group": group_to_json(rep.group),
        "dim": rep.dim,
        "images": {
            name: matrix_to_json(u.matrix) for name, u in rep.images.items()
        },
    }


def rep_from_json(obj) -> ApproxRep:
    try:
        group = group_from_json(obj["group"])
        dim = int(obj["dim"])
        images = {
            name: UnitaryMatrix(matrix_from_json(mat))
            for name, mat in obj["images"].items()
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed rep bundle: {exc}") from exc
    except ValidationError as exc:
        raise SchemaError(f"rep bundle image invalid: {exc}") from exc
    return ApproxRep(group=group, dim=dim, images=images)


def certificate_to_json(cert: Certificate, version: str) -> dict:
    return {
        "tool_version": version,
        "mode": cert.mode,
        "eps": cert.eps,
        "dim": cert.dim,
        "words": [str(w) for w in cert.words],
        "per_pair_defects": {
            f"{g} | {h}": v for (g, h), v in sorted(cert.per_pair_defects.items())
        },
        "per_element_obstructions": dict(
            sorted(cert.per_element_obstructions.items())
        ),
        "dim_bound_met": cert.dim_bound_met,
        "pass": cert.passed,
        "witnesses": cert.witnesses,
        "seed": None if cert.rng is None else cert.rng.seed,
        "stream": None if cert.rng is None else cert.rng.stream,
    }
