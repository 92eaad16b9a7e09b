import itertools
import math

import numpy as np
import pytest

from helpers import gen_for
from nearrep import (
    ApproxRep,
    CertifyConfig,
    GroupSpec,
    RngSpec,
    UnitaryMatrix,
    Word,
    certify,
    cyclic_group,
    dihedral_group,
    evaluate,
    hom_defect,
    rep_from_json,
    rep_to_json,
    symmetric_group,
    trace_obstruction,
    zoo,
)
from nearrep.errors import (
    BadParamsError,
    EmptyEError,
    ModeUnavailableError,
    UnknownFixtureError,
    UnknownGeneratorError,
)
from nearrep.linalg import hs_norm, op_norm
from nearrep.reps import all_element_words, certificate_to_json, evaluate_matrix
from nearrep.sphere import statistical_slack


def words_up_to(length, rank):
    """All nonempty reduced words of bounded length over ``rank`` generators."""
    letters = [k for k in range(-rank, rank + 1) if k != 0]
    out = [Word(())]
    for n in range(1, length + 1):
        for combo in itertools.product(letters, repeat=n):
            w = Word(combo)
            if len(w) == n:
                out.append(w)
    return out


class TestEvaluate:
    def test_empty_word_is_identity(self):
        rep = zoo("free_haar", rank=2, d=6, seed=1)
        assert np.allclose(evaluate(rep, Word(())).matrix, np.eye(6))

    def test_cancellation(self):
        rep = zoo("free_haar", rank=2, d=6, seed=2)
        assert op_norm(evaluate(rep, Word((1, -1))).matrix - np.eye(6)) <= 1e-12

    def test_unknown_generator(self):
        rep = zoo("free_haar", rank=2, d=4, seed=3)
        with pytest.raises(UnknownGeneratorError):
            evaluate(rep, Word((3,)))

    def test_spellings_agree_for_true_representation(self):
        # brute force: every spelling of length <= 4 of the same Z/3 element
        # evaluates to the image of that element
        z3 = cyclic_group(3)
        rep = zoo("regular_finite", group=z3)
        element_image = {
            g: evaluate_matrix(rep, Word((g + 1,))) for g in range(3)
        }
        for word in words_up_to(4, 3):
            g = z3.word_element(word)
            assert op_norm(evaluate_matrix(rep, word) - element_image[g]) <= 1e-10


class TestDefects:
    def test_regular_rep_defects_vanish(self):
        for group in (cyclic_group(3), symmetric_group(3)):
            rep = zoo("regular_finite", group=group)
            words = all_element_words(group)
            for g in words:
                for h in words:
                    assert hom_defect(rep, g, h) <= 1e-12

    def test_one_dim_free_images(self):
        group = GroupSpec(kind="presentation", generators=("a", "b"))
        rep = ApproxRep(
            group=group,
            dim=1,
            images={"a": UnitaryMatrix([[1.0]]), "b": UnitaryMatrix([[1.0]])},
        )
        assert hom_defect(rep, Word((1,)), Word((2,))) == 0.0

    def test_perturbed_defect_bounded_by_occurrences(self):
        # brute-force oracle: the defect of the perturbed rep is bounded by
        # 2|sin(delta/2)| per occurrence of the perturbed generator in the
        # words entering pi(gh) - pi(g) pi(h)
        group = symmetric_group(3)
        base = zoo("regular_finite", group=group)
        delta = 0.3
        rep = zoo("perturbed", base=base, delta=delta, seed=7)
        lim = 2 * abs(math.sin(delta / 2))
        perturbed_letter = 1
        found_nonzero = False
        for g, h in [
            (Word((2,)), Word((2,))),
            (Word((1, 2)), Word((1,))),
            (Word((2, 1)), Word((1, 3))),
        ]:
            gh = group.product_word(g, h)
            occurrences = sum(
                1
                for k in gh.letters + g.letters + h.letters
                if abs(k) == perturbed_letter
            )
            defect = hom_defect(rep, g, h)
            assert defect <= occurrences * lim + 1e-9
            found_nonzero = found_nonzero or defect > 1e-6
        assert found_nonzero  # table products make relation failure visible

    def test_genuine_reps_defect_free_exhaustively(self):
        # every element pair exhaustively for orders up to 24, plus all word
        # pairs up to length 3 over two generators for the small groups
        for group in (
            cyclic_group(2),
            cyclic_group(3),
            symmetric_group(3),
            dihedral_group(4),
            symmetric_group(4),  # order 24
        ):
            rep = zoo("regular_finite", group=group)
            elements = all_element_words(group)
            assert max(
                hom_defect(rep, g, h) for g in elements for h in elements
            ) <= 1e-10
            if group.order <= 8:
                short = [w for w in words_up_to(3, 2)]
                assert max(
                    hom_defect(rep, g, h) for g in short for h in short
                ) <= 1e-10

    def test_trace_obstruction_values(self):
        s3 = symmetric_group(3)
        rep = zoo("regular_finite", group=s3)
        assert abs(trace_obstruction(rep, Word(())) - 1.0) <= 1e-12
        for g in range(6):
            expected = 1.0 if g == s3.identity else 0.0
            assert abs(trace_obstruction(rep, Word((g + 1,))) - expected) <= 1e-12
        phase = zoo("integer_phase", theta=0.37)
        assert abs(trace_obstruction(phase, Word((1,))) - 1.0) <= 1e-12


class TestZoo:
    def test_regular_z2_images(self):
        rep = zoo("regular_finite", group=cyclic_group(2))
        assert np.allclose(rep.images["e"].matrix, np.eye(2))
        assert np.allclose(rep.images["a"].matrix, [[0, 1], [1, 0]])

    def test_cyclic_character(self):
        rep = zoo("cyclic_character", n=4, k=1)
        assert rep.dim == 1
        assert abs(rep.images["a"].matrix[0, 0] - 1j) <= 1e-12
        # abelian characters never certify freeness: modulus 1 at all powers
        for m in range(1, 4):
            assert abs(trace_obstruction(rep, Word((1,) * m)) - 1.0) <= 1e-12

    def test_free_haar_independent_images(self):
        rep = zoo("free_haar", rank=2, d=16, seed=11)
        a, b = rep.images["a"].matrix, rep.images["b"].matrix
        assert op_norm(a - b) > 0.1
        rep2 = zoo("free_haar", rank=2, d=16, seed=11)
        assert np.array_equal(rep2.images["a"].matrix, a)

    def test_unknown_fixture(self):
        with pytest.raises(UnknownFixtureError):
            zoo("nonsense")
        with pytest.raises(BadParamsError):
            zoo("cyclic_character", n=0, k=1)


class TestCertifyHs:
    def test_regular_s3_passes_tight(self):
        rep = zoo("regular_finite", group=symmetric_group(3))
        words = all_element_words(symmetric_group(3))
        cert = certify(rep, words, eps=1e-6, mode="hs")
        assert cert.passed
        assert all(v <= 1e-10 for v in cert.per_pair_defects.values())
        assert all(v <= 1e-10 for v in cert.per_element_obstructions.values())
        assert len(cert.per_element_obstructions) == 5  # identity exempt

    def test_free_haar_passes_quarter(self):
        rep = zoo("free_haar", rank=2, d=128, seed=12)
        words = [w for w in words_up_to(2, 2) if not w.is_empty]
        cert = certify(rep, words, eps=0.25, mode="hs")
        assert cert.passed
        assert max(cert.per_pair_defects.values()) <= 1e-10
        assert max(cert.per_element_obstructions.values()) <= 4 / math.sqrt(128)

    def test_trivial_phase_fails(self):
        rep = zoo("integer_phase", theta=0.0)
        cert = certify(rep, [Word((1,))], eps=0.5, mode="hs")
        assert not cert.passed
        assert cert.per_element_obstructions[str(Word((1,)))] == 1.0

    def test_monotone_in_eps(self):
        base = zoo("regular_finite", group=dihedral_group(3))
        rep = zoo("perturbed", base=base, delta=0.25, seed=13)
        words = all_element_words(dihedral_group(3))
        passes = [
            certify(rep, words, eps=eps, mode="hs").passed
            for eps in (0.05, 0.1, 0.2, 0.5, 1.0)
        ]
        assert passes == sorted(passes)  # once true, stays true

    def test_strict_dim_enforced(self):
        rep = zoo("regular_finite", group=cyclic_group(2))
        words = all_element_words(cyclic_group(2))
        loose = certify(rep, words, eps=0.01, mode="hs")
        assert loose.passed and not loose.dim_bound_met
        strict = certify(
            rep, words, eps=0.01, mode="hs", config=CertifyConfig(strict_dim=True)
        )
        assert not strict.passed

    def test_empty_e_rejected(self):
        rep = zoo("integer_phase", theta=1.0)
        with pytest.raises(EmptyEError):
            certify(rep, [], eps=0.5)


class TestCertifySphere:
    def test_regular_rep_passes(self):
        rep = zoo("regular_finite", group=symmetric_group(3))
        words = all_element_words(symmetric_group(3))
        cert = certify(rep, words, eps=0.5, mode="sphere", rng=RngSpec(21))
        assert cert.passed
        # defect operators vanish: every violation measure is exactly 0
        assert set(cert.per_pair_defects.values()) == {0.0}

    def test_trivial_phase_fails(self):
        rep = zoo("integer_phase", theta=0.0)
        cert = certify(
            rep,
            [Word((1,))],
            eps=0.5,
            mode="sphere",
            config=CertifyConfig(trials=2000),
            rng=RngSpec(22),
        )
        assert not cert.passed
        assert cert.per_element_obstructions[str(Word((1,)))] == 1.0

    def test_replays_bitwise(self):
        base = zoo("regular_finite", group=cyclic_group(3))
        rep = zoo("perturbed", base=base, delta=0.6, seed=23)
        words = all_element_words(cyclic_group(3))
        config = CertifyConfig(trials=3000)
        a = certify(rep, words, 0.3, "sphere", config, RngSpec(24))
        b = certify(rep, words, 0.3, "sphere", config, RngSpec(24))
        assert a.per_pair_defects == b.per_pair_defects
        assert a.per_element_obstructions == b.per_element_obstructions

    def test_coherence_with_hs_mode(self):
        # measure-level control at eps/sqrt2 forces hs defect <= eps via the
        # sphere integral identity
        base = zoo("regular_finite", group=symmetric_group(3))
        eps = 0.5
        for seed in range(5):
            rep = zoo("perturbed", base=base, delta=0.15, seed=seed)
            words = all_element_words(symmetric_group(3))
            config = CertifyConfig(trials=4000)
            sph = certify(
                rep, words, eps / math.sqrt(2), "sphere", config, RngSpec(25, seed)
            )
            slack = statistical_slack(config.trials)
            if all(
                v <= eps**2 / 8 - slack for v in sph.per_pair_defects.values()
            ):
                hs = certify(rep, words, eps, "hs")
                assert all(v <= eps for v in hs.per_pair_defects.values())

    def test_integral_identity_for_defect(self):
        # hs defect^2 equals the sphere average of ||D x||^2
        base = zoo("regular_finite", group=cyclic_group(4))
        rep = zoo("perturbed", base=base, delta=0.5, seed=31)
        g, h = Word((2,)), Word((3,))
        d_mat = evaluate_matrix(rep, g * h) - evaluate_matrix(
            rep, g
        ) @ evaluate_matrix(rep, h)
        from nearrep.sphere import sample_sphere_many

        x = sample_sphere_many(rep.dim, 40_000, RngSpec(32))
        empirical = float(np.mean(np.linalg.norm(x @ d_mat.T, axis=1) ** 2))
        assert abs(empirical - hs_norm(d_mat) ** 2) <= 0.02


def shift_rep(n: int) -> ApproxRep:
    """Cyclic group with a single generator mapped to the n-cycle shift:
    the regular representation restricted to one generator image."""
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
    m = np.zeros((n, n))
    m[(np.arange(n) + 1) % n, np.arange(n)] = 1.0
    return ApproxRep(group=group, dim=n, images={"a": UnitaryMatrix(m)})


class TestCertifyOnb:
    def test_shift_rep_witness_at_concentrating_dim(self):
        # single condition |<x, shift x>| <= 0.9 at dim 64: union bound
        # 64 * 4 exp(-0.81 * 127 / 16) ~ 0.4 < 1, so a try succeeds whp
        rep = shift_rep(64)
        cert = certify(
            rep,
            [Word((1,))],
            eps=0.9,
            mode="onb",
            config=CertifyConfig(trials=2000, onb_max_tries=8),
            rng=RngSpec(26),
        )
        assert cert.passed
        assert not cert.witnesses["exhausted"]
        assert cert.witnesses["dim_times_complement_measure"] < 1.0
        assert max(cert.per_pair_defects.values()) <= 0.9
        assert max(cert.per_element_obstructions.values()) <= 0.9

    def test_onb_pass_implies_hs_pass(self):
        rep = zoo("perturbed", base=shift_rep(64), delta=0.1, seed=27)
        words = [Word((1,)), Word((1, 1))]
        eps = 0.9
        onb_cert = certify(
            rep,
            words,
            eps,
            mode="onb",
            config=CertifyConfig(trials=2000, onb_max_tries=8),
            rng=RngSpec(28),
        )
        assert onb_cert.passed  # concentration makes this reliable at dim 64
        hs_cert = certify(rep, words, eps, mode="hs")
        assert all(v <= eps for v in hs_cert.per_pair_defects.values())
        assert all(v <= eps for v in hs_cert.per_element_obstructions.values())

    def test_impossible_condition_fails_with_diagnostics(self):
        rep = zoo("integer_phase", theta=0.0)
        cert = certify(
            rep,
            [Word((1,))],
            eps=0.5,
            mode="onb",
            config=CertifyConfig(trials=500, onb_max_tries=2),
            rng=RngSpec(29),
        )
        assert not cert.passed
        assert cert.witnesses["exhausted"]
        assert cert.witnesses["pass_rates"] == [0.0, 0.0]

    def test_mode_unavailable_beyond_max_dim(self):
        rep = zoo("free_haar", rank=1, d=32, seed=30)
        with pytest.raises(ModeUnavailableError):
            certify(
                rep,
                [Word((1,))],
                0.5,
                mode="sphere",
                config=CertifyConfig(max_dim=16),
            )


class TestBundleJson:
    def test_rep_roundtrip(self):
        rep = zoo("free_haar", rank=2, d=5, seed=33)
        back = rep_from_json(rep_to_json(rep))
        assert back.dim == rep.dim
        for name in rep.images:
            assert np.array_equal(back.images[name].matrix, rep.images[name].matrix)

    def test_certificate_json_fields(self):
        rep = zoo("regular_finite", group=cyclic_group(2))
        cert = certify(rep, all_element_words(cyclic_group(2)), eps=1e-6)
        obj = certificate_to_json(cert, version="9.9.9")
        assert obj["tool_version"] == "9.9.9"
        assert obj["pass"] is True
        assert obj["mode"] == "hs"
        # the identity element is the single-letter word "1" here
        assert "1 | 1" in obj["per_pair_defects"]
        assert obj["words"] == ["1", "2"]
        assert list(obj["per_element_obstructions"]) == ["2"]
