"""Haar sampling on complex spheres and unitary groups, plus the
empirical concentration machinery built on it.

Randomness contract: every operation takes an RngSpec and builds a fresh
Philox counter-based generator from its (seed, stream) key, consuming it
sequentially. Identical RngSpec therefore means bit-identical output on
any platform; seeds are recorded in every report for replay.

Complex Gaussians are produced by Box-Muller pairs (radius from one
uniform, phase from another), so the sample stream is pinned by the
documented uniform stream of Philox rather than by any library-internal
normal sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadParamsError,
    NonSquareError,
    OnbSearchExhausted,
    RankMismatchError,
    UnknownFunctionError,
    ZeroRankError,
)
from .linalg import Projection, UnitaryMatrix, as_matrix, frob_norm, op_norm

#: Bernoulli tail slack used everywhere a Monte Carlo estimate meets a bound
def statistical_slack(trials: int) -> float:
    return 5.0 / math.sqrt(trials)


_CHUNK_ENTRIES = 4_000_000  # complex entries per sampling chunk (~64 MB)


@dataclass(frozen=True)
class RngSpec:
    """Deterministic random source: a Philox key split as (seed, stream).

    The stream id separates independent sample sequences drawn from the
    same user-facing seed (e.g. one per report column).
    """

    seed: int = 0
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array(
            [self.seed % (1 << 64), self.stream % (1 << 64)], dtype=np.uint64
        )
        return np.random.Generator(np.random.Philox(key=key))


def _complex_normal(gen: np.random.Generator, shape) -> np.ndarray:
    """Standard complex Gaussian (E|z|^2 = 1) via Box-Muller pairs."""
    u1 = gen.random(shape)
    u2 = gen.random(shape)
    radius = np.sqrt(-np.log1p(-u1))
    return radius * np.exp(2j * np.pi * u2)


def _sphere_batch(gen: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """(count, dim) array of Haar points on the unit sphere of C^dim."""
    z = _complex_normal(gen, (count, dim))
    norms = np.linalg.norm(z, axis=1)
    bad = norms < 1e-150
    while np.any(bad):  # probability ~ 2^-53 per row; resample defensively
        z[bad] = _complex_normal(gen, (int(bad.sum()), dim))
        norms = np.linalg.norm(z, axis=1)
        bad = norms < 1e-150
    return z / norms[:, None]


def sample_sphere(dim: int, rng: RngSpec) -> np.ndarray:
    """One Haar-distributed unit vector in C^dim."""
    if dim < 1:
        raise BadParamsError("dim must be >= 1")
    return _sphere_batch(rng.generator(), 1, dim)[0]


def sample_sphere_many(dim: int, count: int, rng: RngSpec) -> np.ndarray:
    """(count, dim) array of independent Haar unit vectors."""
    if dim < 1 or count < 1:
        raise BadParamsError("dim and count must be >= 1")
    return _sphere_batch(rng.generator(), count, dim)


def _haar_unitary(gen: np.random.Generator, dim: int) -> np.ndarray:
    z = _complex_normal(gen, (dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    mod = np.abs(d)
    phase = np.where(mod > 0, d / np.where(mod > 0, mod, 1.0), 1.0)
    return q * phase


def haar_unitary(dim: int, rng: RngSpec) -> UnitaryMatrix:
    """Haar-distributed unitary: Ginibre matrix -> QR with the R-diagonal
    phase correction (Mezzadri convention)."""
    if dim < 1:
        raise BadParamsError("dim must be >= 1")
    return UnitaryMatrix(_haar_unitary(rng.generator(), dim))


def _quad_forms(x: np.ndarray, a: np.ndarray) -> np.ndarray:
    """<x_i, a x_i> for the rows x_i of x."""
    return np.sum(np.conj(x) * (x @ a.T), axis=1)


@dataclass(frozen=True)
class TraceEstimate:
    estimate: complex
    stderr: float
    trials: int
    analytic: complex


def sphere_trace_integral(a, trials: int, rng: RngSpec) -> TraceEstimate:
    """Monte Carlo estimate of the sphere integral of <x, a x>, which
    equals tr(a)/dim. Returns the estimate with its standard error."""
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise NonSquareError("sphere_trace_integral requires a square matrix")
    dim = m.shape[0]
    gen = rng.generator()
    total = 0.0 + 0.0j
    total_sq = 0.0
    done = 0
    chunk = max(1, _CHUNK_ENTRIES // max(dim, 1))
    while done < trials:
        n = min(chunk, trials - done)
        vals = _quad_forms(_sphere_batch(gen, n, dim), m)
        total += vals.sum()
        total_sq += float(np.sum(np.abs(vals) ** 2))
        done += n
    mean = total / trials
    var = max(total_sq / trials - abs(mean) ** 2, 0.0)
    stderr = math.sqrt(var / trials)
    return TraceEstimate(
        estimate=complex(mean),
        stderr=stderr,
        trials=trials,
        analytic=complex(np.trace(m) / dim),
    )


def concentration_bound(
    dim: int, eps: float, lipschitz: float, complex_valued: bool
) -> float:
    """Levy tail bound for an l-Lipschitz function on the sphere of C^dim:
    2 exp(-eps^2 (2 dim - 1) / (2 l^2)) for real values, with constants
    (4, 4 l^2) in the complex case. May exceed 1."""
    if lipschitz == 0:
        return 0.0 if eps > 0 else float("inf")
    denom = (4.0 if complex_valued else 2.0) * lipschitz**2
    factor = 4.0 if complex_valued else 2.0
    return factor * math.exp(-(eps**2) * (2 * dim - 1) / denom)


@dataclass(frozen=True)
class ConcentrationReport:
    dim: int
    lipschitz_const: float
    epsilon: float
    trials: int
    empirical_tail: float
    theoretical_bound: float
    function_id: str
    complex_valued: bool
    rng: RngSpec

    def __post_init__(self):
        expected = concentration_bound(
            self.dim, self.epsilon, self.lipschitz_const, self.complex_valued
        )
        if not math.isclose(
            self.theoretical_bound, expected, rel_tol=1e-12, abs_tol=1e-300
        ):
            raise BadParamsError(
                "theoretical_bound inconsistent with the tail-bound formula"
            )

    @property
    def slack(self) -> float:
        return statistical_slack(self.trials)

    @property
    def passed(self) -> bool:
        return self.empirical_tail <= self.theoretical_bound + self.slack


#: function_id -> (needs matrix argument, complex valued)
FUNCTION_CATALOG = {
    "re_coord": (False, False),
    "dist_to_vector": (False, False),
    "quad_form": (True, True),
    "abs_quad_form": (True, False),
}


def concentration_check(
    function_id: str,
    dim: int,
    eps: float,
    trials: int,
    rng: RngSpec,
    a=None,
) -> ConcentrationReport:
    """Empirical tail of |f(x) - mean_f| > eps against the closed-form bound.

    re_coord:      f(x) = Re<e1, x>, Lipschitz 1, analytic mean 0.
    dist_to_vector: f(x) = ||x - e1||, Lipschitz 1, empirical mean from an
                   independent first pass.
    quad_form:     f(x) = <x, a x>, Lipschitz 2||a||, analytic mean tr(a)/dim.
    abs_quad_form: f(x) = |<x, a x>|, Lipschitz 2||a||, empirical mean.
    """
    if function_id not in FUNCTION_CATALOG:
        raise UnknownFunctionError(f"unknown function id {function_id!r}")
    needs_matrix, complex_valued = FUNCTION_CATALOG[function_id]
    if dim < 1 or eps <= 0 or trials < 1:
        raise BadParamsError("dim, eps and trials must be positive")
    if needs_matrix:
        if a is None:
            raise BadParamsError(f"{function_id} requires a matrix argument")
        a = as_matrix(a)
        if a.shape != (dim, dim):
            raise BadParamsError(f"matrix must be {dim}x{dim}, got {a.shape}")
        lipschitz = 2.0 * op_norm(a)
    else:
        lipschitz = 1.0

    def values(x: np.ndarray) -> np.ndarray:
        if function_id == "re_coord":
            return x[:, 0].real
        if function_id == "dist_to_vector":
            return np.sqrt(np.maximum(2.0 - 2.0 * x[:, 0].real, 0.0))
        qf = _quad_forms(x, a)
        return qf if function_id == "quad_form" else np.abs(qf)

    gen = rng.generator()
    chunk = max(1, _CHUNK_ENTRIES // dim)

    if function_id == "re_coord":
        mean_f = 0.0
    elif function_id == "quad_form":
        mean_f = complex(np.trace(a) / dim)
    else:
        # independent first pass for the empirical mean
        total, done = 0.0, 0
        while done < trials:
            n = min(chunk, trials - done)
            total += float(np.sum(values(_sphere_batch(gen, n, dim))))
            done += n
        mean_f = total / trials

    exceed, done = 0, 0
    while done < trials:
        n = min(chunk, trials - done)
        vals = values(_sphere_batch(gen, n, dim))
        exceed += int(np.count_nonzero(np.abs(vals - mean_f) > eps))
        done += n

    return ConcentrationReport(
        dim=dim,
        lipschitz_const=lipschitz,
        epsilon=eps,
        trials=trials,
        empirical_tail=exceed / trials,
        theoretical_bound=concentration_bound(dim, eps, lipschitz, complex_valued),
        function_id=function_id,
        complex_valued=complex_valued,
        rng=rng,
    )


@dataclass(frozen=True)
class OnbSearchResult:
    """Witness orthonormal basis: columns of ``basis`` all satisfy the
    target predicate; ``pass_rates`` records the per-try column pass rate."""

    basis: np.ndarray
    tries: int
    pass_rates: tuple


def onb_in_set(
    predicate, dim: int, rng: RngSpec, max_tries: int
) -> OnbSearchResult:
    """Search for an orthonormal basis inside a measurable set B.

    ``predicate`` maps a (dim, k) array of unit columns to a boolean array
    of length k. Each try Haar-rotates the standard basis and tests all
    columns; if B has small complement measure nu, a try succeeds with
    probability at least 1 - dim * nu.
    """
    if dim < 1 or max_tries < 1:
        raise BadParamsError("dim and max_tries must be >= 1")
    gen = rng.generator()
    pass_rates = []
    for attempt in range(1, max_tries + 1):
        basis = _haar_unitary(gen, dim)
        ok = np.asarray(predicate(basis), dtype=bool)
        if ok.shape != (dim,):
            raise BadParamsError("predicate must return one boolean per column")
        pass_rates.append(float(np.count_nonzero(ok)) / dim)
        if bool(ok.all()):
            frozen = basis.copy()
            frozen.setflags(write=False)
            return OnbSearchResult(
                basis=frozen, tries=attempt, pass_rates=tuple(pass_rates)
            )
    raise OnbSearchExhausted(max_tries, pass_rates)


def _lipschitz_family(dim: int, size: int, gen: np.random.Generator):
    """Sampled 1-Lipschitz functions into [-1, 1]: clamped linear
    functionals Re<v, .> and centered distances ||. - w|| - 1."""
    anchors = _sphere_batch(gen, size, dim)
    half = size // 2

    def evaluate(x: np.ndarray) -> np.ndarray:
        # returns (size, len(x)) matrix of function values
        inner = anchors.conj() @ x.T
        out = np.empty((size, x.shape[0]))
        out[:half] = np.clip(inner[:half].real, -1.0, 1.0)
        dist = np.sqrt(np.maximum(2.0 - 2.0 * inner[half:].real, 0.0))
        out[half:] = np.clip(dist - 1.0, -1.0, 1.0)
        return out

    return evaluate


def mass_transport_gap(
    p: Projection,
    q: Projection,
    lipschitz_family_size: int,
    samples: int,
    rng: RngSpec,
) -> float:
    """Largest Monte Carlo integral gap, over a sampled family of
    1-Lipschitz functions into [-1, 1], between the uniform measures on
    the unit spheres of p(H) and q(H).

    Lower-bounds the mass-transport distance, which is itself at most
    (sqrt(2)/||p||_2) ||q - p||_2.
    """
    if p.rank == 0 or q.rank == 0:
        raise ZeroRankError("mass_transport_gap requires nonzero projections")
    if p.rank != q.rank:
        raise RankMismatchError(f"rank mismatch {p.rank} != {q.rank}")
    if p.dim != q.dim:
        raise RankMismatchError("projections must act on the same space")
    if lipschitz_family_size < 2 or samples < 1:
        raise BadParamsError("need a family of >= 2 functions and >= 1 sample")
    gen = rng.generator()
    family = _lipschitz_family(p.dim, lipschitz_family_size, gen)
    means = []
    for proj in (p, q):
        onb = proj.onb()
        z = _sphere_batch(gen, samples, proj.rank)
        points = z @ onb.T
        means.append(family(points).mean(axis=1))
    return float(np.max(np.abs(means[0] - means[1])))


def mass_transport_bound(p: Projection, q: Projection) -> float:
    """(sqrt(2)/||p||_2) ||q - p||_2, the transport bound for equal-rank
    projections."""
    return math.sqrt(2.0) * frob_norm(q.matrix - p.matrix) / math.sqrt(p.rank)
