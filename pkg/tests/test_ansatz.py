import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qaoaflow import (
    AnsatzSpec,
    DomainError,
    InputError,
    IsingProblem,
    MixerSpec,
    VariationalParams,
    expand_params,
    expansion_matrix,
    init_params,
    param_count,
)

from conftest import random_problem


def spec_for(param_type, p=1, **kwargs):
    if param_type == "fourier":
        kwargs.setdefault("fourier_q", p)
    return AnsatzSpec(p=p, param_type=param_type, **kwargs)


class TestMixerSpec:
    def test_x_mixer_terms(self):
        assert MixerSpec().terms(3) == [(0,), (1,), (2,)]

    def test_xy_default_is_all_pairs(self):
        assert MixerSpec(kind="xy").terms(3) == [(0, 1), (0, 2), (1, 2)]

    def test_xy_edges_canonicalized(self):
        m = MixerSpec(kind="xy", edges=((2, 0), (1, 2)))
        assert m.terms(3) == [(0, 2), (1, 2)]

    def test_validation(self):
        with pytest.raises(InputError):
            MixerSpec(kind="z")
        with pytest.raises(InputError):
            MixerSpec(kind="x", edges=((0, 1),))
        with pytest.raises(InputError):
            MixerSpec(kind="xy", edges=((1, 1),))
        with pytest.raises(InputError):
            MixerSpec(kind="xy", edges=((0, 1), (1, 0)))
        with pytest.raises(InputError):
            MixerSpec(kind="xy", edges=((0, 5),)).terms(3)


class TestAnsatzSpec:
    def test_fourier_requires_q(self):
        with pytest.raises(InputError):
            AnsatzSpec(param_type="fourier")
        with pytest.raises(InputError):
            AnsatzSpec(param_type="fourier", p=2, fourier_q=3)
        with pytest.raises(InputError):
            AnsatzSpec(param_type="standard", fourier_q=1)

    def test_default_annealing_time_scales_with_depth(self):
        assert AnsatzSpec(p=4).annealing_time == pytest.approx(2.8)
        assert AnsatzSpec(p=2, total_annealing_time=1.0).annealing_time == 1.0

    def test_bad_values(self):
        with pytest.raises(InputError):
            AnsatzSpec(p=0)
        with pytest.raises(InputError):
            AnsatzSpec(init_type="warm")
        with pytest.raises(InputError):
            AnsatzSpec(total_annealing_time=-1.0)


class TestParamCount:
    def test_standard_is_two_per_layer(self, example_problem):
        assert param_count(spec_for("standard", p=3), example_problem) == 6

    def test_standard_two_p_for_all_depths(self):
        problem = random_problem(np.random.default_rng(0), 5)
        for p in range(1, 21):
            assert param_count(spec_for("standard", p=p), problem) == 2 * p

    def test_extended_counts_every_term(self, example_problem):
        # 2 linear + 4 quadratic + 5 mixer terms
        assert param_count(spec_for("extended", p=1), example_problem) == 11

    def test_fourier_depends_only_on_q(self, example_problem):
        for p in (1, 2, 5):
            spec = AnsatzSpec(p=p, param_type="fourier", fourier_q=1)
            assert param_count(spec, example_problem) == 2

    def test_with_bias_and_annealing(self, example_problem):
        assert param_count(spec_for("standard_with_bias", p=2), example_problem) == 6
        assert param_count(spec_for("annealing", p=4), example_problem) == 4


class TestExpand:
    def test_standard_broadcast(self, example_problem):
        spec = spec_for("standard")
        params = VariationalParams("standard", [0.3, 0.2])
        angles = expand_params(spec, params, example_problem)
        assert angles.gamma_linear.shape == (1, 2)
        assert angles.gamma_quadratic.shape == (1, 4)
        assert angles.beta.shape == (1, 5)
        assert np.all(angles.cost_layer(0) == 0.3)
        assert np.all(angles.beta == 0.2)

    def test_fourier_single_coefficient(self, example_problem):
        spec = AnsatzSpec(p=1, param_type="fourier", fourier_q=1)
        angles = expand_params(
            spec, VariationalParams("fourier", [1.0, 0.0]), example_problem
        )
        assert angles.gamma_linear[0, 0] == pytest.approx(np.sin(np.pi / 4), abs=1e-12)
        assert np.all(angles.beta == 0.0)

    def test_fourier_matches_scipy_dst_dct(self, example_problem):
        from scipy.fft import dct, dst

        rng = np.random.default_rng(5)
        p = 4
        spec = AnsatzSpec(p=p, param_type="fourier", fourier_q=p)
        u, v = rng.normal(size=p), rng.normal(size=p)
        angles = expand_params(
            spec, VariationalParams("fourier", np.concatenate([u, v])),
            example_problem,
        )
        gammas = angles.gamma_linear[:, 0]
        betas = angles.beta[:, 0]
        assert gammas == pytest.approx(dst(u, type=4) / 2.0, abs=1e-12)
        assert betas == pytest.approx(dct(v, type=4) / 2.0, abs=1e-12)

    def test_annealing_schedule(self, example_problem):
        spec = AnsatzSpec(p=2, param_type="annealing", total_annealing_time=1.4)
        angles = expand_params(
            spec, VariationalParams("annealing", [0.25, 0.75]), example_problem
        )
        assert angles.gamma_linear[:, 0] == pytest.approx([0.175, 0.525])
        assert angles.beta[:, 0] == pytest.approx([0.525, 0.175])

    def test_annealing_domain_error(self, example_problem):
        spec = AnsatzSpec(p=1, param_type="annealing")
        with pytest.raises(DomainError):
            expand_params(spec, VariationalParams("annealing", [1.2]), example_problem)

    def test_wrong_length_rejected(self, example_problem):
        spec = spec_for("standard", p=2)
        with pytest.raises(InputError):
            expand_params(spec, VariationalParams("standard", [0.1]), example_problem)

    def test_with_bias_separates_linear_from_quadratic(self, example_problem):
        spec = spec_for("standard_with_bias", p=1)
        angles = expand_params(
            spec, VariationalParams("standard_with_bias", [0.1, 0.2, 0.3]),
            example_problem,
        )
        assert np.all(angles.gamma_linear == 0.1)
        assert np.all(angles.gamma_quadratic == 0.2)
        assert np.all(angles.beta == 0.3)


class TestInit:
    def test_ramp_standard(self, example_problem):
        spec = spec_for("standard", p=2)  # default time 1.4
        raw = init_params(spec, example_problem).raw
        assert raw == pytest.approx([0.175, 0.525, 0.525, 0.175])

    def test_ramp_annealing_uses_fractions(self, example_problem):
        spec = AnsatzSpec(p=2, param_type="annealing", init_type="ramp")
        assert init_params(spec, example_problem).raw == pytest.approx([0.25, 0.75])

    def test_ramp_fourier_lowest_frequency_only(self, example_problem):
        spec = AnsatzSpec(p=4, param_type="fourier", fourier_q=2, init_type="ramp")
        raw = init_params(spec, example_problem).raw
        assert raw == pytest.approx([0.35, 0.0, 0.35, 0.0])

    def test_rand_is_seeded(self, example_problem):
        spec = spec_for("standard", p=3, init_type="rand")
        a = init_params(spec, example_problem, seed=9).raw
        b = init_params(spec, example_problem, seed=9).raw
        assert np.array_equal(a, b)
        assert np.all((0 <= a) & (a < np.pi))

    def test_rand_annealing_respects_domain(self, example_problem):
        spec = AnsatzSpec(p=50, param_type="annealing", init_type="rand")
        raw = init_params(spec, example_problem, seed=1).raw
        assert np.all((0 <= raw) & (raw < 1))

    def test_custom_copies_verbatim(self, example_problem):
        spec = spec_for("standard", init_type="custom")
        params = init_params(spec, example_problem, custom_values=[0.1, 0.2])
        assert list(params.raw) == [0.1, 0.2]

    def test_custom_length_checked(self, example_problem):
        spec = spec_for("standard", init_type="custom")
        with pytest.raises(InputError):
            init_params(spec, example_problem, custom_values=[0.1])
        with pytest.raises(InputError):
            init_params(spec, example_problem)

    def test_custom_values_only_for_custom_init(self, example_problem):
        spec = spec_for("standard")
        with pytest.raises(InputError):
            init_params(spec, example_problem, custom_values=[0.1, 0.2])


class TestAlgebra:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000), st.integers(1, 3))
    def test_tie_down_equivalence(self, seed, p):
        rng = np.random.default_rng(seed)
        problem = random_problem(rng, rng.integers(2, 5))
        std_spec = spec_for("standard", p=p)
        ext_spec = spec_for("extended", p=p)
        std_raw = rng.uniform(-2, 2, size=2 * p)
        std_angles = expand_params(
            std_spec, VariationalParams("standard", std_raw), problem
        )
        ext_raw = std_angles.flatten()
        ext_angles = expand_params(
            ext_spec, VariationalParams("extended", ext_raw), problem
        )
        assert np.array_equal(ext_angles.flatten(), std_angles.flatten())

    def test_with_bias_collapses_to_standard(self, example_problem):
        rng = np.random.default_rng(2)
        p = 3
        gammas, betas = rng.uniform(-1, 1, p), rng.uniform(-1, 1, p)
        std = expand_params(
            spec_for("standard", p=p),
            VariationalParams("standard", np.concatenate([gammas, betas])),
            example_problem,
        )
        wb = expand_params(
            spec_for("standard_with_bias", p=p),
            VariationalParams(
                "standard_with_bias", np.concatenate([gammas, gammas, betas])
            ),
            example_problem,
        )
        assert np.array_equal(std.flatten(), wb.flatten())

    def test_fourier_full_q_is_a_bijection(self, example_problem):
        rng = np.random.default_rng(7)
        p = 5
        spec = AnsatzSpec(p=p, param_type="fourier", fourier_q=p)
        raw = rng.normal(size=2 * p)
        angles = expand_params(
            spec, VariationalParams("fourier", raw), example_problem
        )
        layers = (np.arange(p).reshape(-1, 1) + 0.5)
        freqs = (np.arange(p).reshape(1, -1) + 0.5)
        sin_m = np.sin(freqs * layers * np.pi / p)
        cos_m = np.cos(freqs * layers * np.pi / p)
        u = np.linalg.solve(sin_m, angles.gamma_linear[:, 0])
        v = np.linalg.solve(cos_m, angles.beta[:, 0])
        assert np.concatenate([u, v]) == pytest.approx(raw, abs=1e-9)

    @pytest.mark.parametrize(
        "param_type", ["standard", "standard_with_bias", "extended", "fourier"]
    )
    def test_expansion_is_linear(self, param_type, example_problem):
        rng = np.random.default_rng(11)
        spec = spec_for(param_type, p=2)
        dim = param_count(spec, example_problem)
        x, y = rng.normal(size=dim), rng.normal(size=dim)
        a, b = 0.7, -1.3

        def ext(raw):
            return expand_params(
                spec, VariationalParams(param_type, raw), example_problem
            ).flatten()

        assert ext(a * x + b * y) == pytest.approx(
            a * ext(x) + b * ext(y), abs=1e-12
        )

    @pytest.mark.parametrize(
        "param_type", ["standard", "standard_with_bias", "extended", "fourier"]
    )
    def test_expansion_matrix_matches_expand(self, param_type, example_problem):
        rng = np.random.default_rng(13)
        spec = spec_for(param_type, p=2)
        jac = expansion_matrix(spec, example_problem)
        raw = rng.normal(size=param_count(spec, example_problem))
        direct = expand_params(
            spec, VariationalParams(param_type, raw), example_problem
        ).flatten()
        assert jac @ raw == pytest.approx(direct, abs=1e-12)

    def test_expansion_matrix_rejects_annealing(self, example_problem):
        with pytest.raises(InputError):
            expansion_matrix(spec_for("annealing", p=2), example_problem)
