import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiralchain.chain import (
    ChainGeometry,
    ChiralRates,
    CouplingKind,
    ExcitationPattern,
    Placement,
    build_coupling_matrix,
    build_initial_state,
    build_positions,
    directionality,
    reciprocal_kernel,
)

PI = np.pi


class TestPositions:
    def test_equidistant_lattice(self):
        g = build_positions(3, PI, 0.0, seed=123)
        np.testing.assert_allclose(g.phases, [PI, 2 * PI, 3 * PI], rtol=0, atol=1e-15)

    def test_quarter_wave_pair(self):
        g = build_positions(2, PI / 2)
        np.testing.assert_allclose(g.phases, [PI / 2, PI], atol=1e-15)

    def test_zero_fluctuation_ignores_seed(self):
        a = build_positions(7, 1.3, 0.0, seed=1)
        b = build_positions(7, 1.3, 0.0, seed=2)
        assert np.array_equal(a.phases, b.phases)
        np.testing.assert_allclose(np.diff(a.phases), 1.3, rtol=0, atol=1e-14)

    def test_seeded_bound_n12(self):
        g = build_positions(12, PI, 0.2, seed=42)
        dev = g.phases - PI * np.arange(1, 13)
        assert np.all(np.abs(dev) <= 0.1 * PI)
        assert np.all(np.diff(g.phases) > 0)

    @pytest.mark.parametrize("distribution", ["uniform", "gaussian"])
    def test_bound_over_many_seeds(self, distribution):
        lattice = PI * np.arange(1, 13)
        worst = 0.0
        for seed in range(10_000):
            g = build_positions(12, PI, 0.2, seed=seed, distribution=distribution)
            worst = max(worst, np.max(np.abs(g.phases - lattice)))
        assert worst <= 0.1 * PI
        # the uniform law should actually explore most of its range
        if distribution == "uniform":
            assert worst > 0.099 * PI

    def test_deterministic(self):
        a = build_positions(9, 2.0, 0.3, seed=7)
        b = build_positions(9, 2.0, 0.3, seed=7)
        c = build_positions(9, 2.0, 0.3, seed=8)
        assert np.array_equal(a.phases, b.phases)
        assert not np.array_equal(a.phases, c.phases)

    @pytest.mark.parametrize("f", [1.0, 1.5, -0.1])
    def test_rejects_bad_fraction(self, f):
        with pytest.raises(ValueError):
            build_positions(4, PI, f)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            build_positions(0, PI)
        with pytest.raises(ValueError):
            build_positions(3, 0.0)
        with pytest.raises(ValueError):
            build_positions(3, PI, 0.1, distribution="cauchy")

    def test_geometry_is_read_only(self):
        g = build_positions(4, PI)
        with pytest.raises(ValueError):
            g.phases[0] = 0.0

    def test_geometry_rejects_disorder(self):
        with pytest.raises(ValueError):
            ChainGeometry(3, [0.0, 2.0, 1.0], 1.0)


class TestRates:
    def test_directionality(self):
        assert directionality(ChiralRates(0.0, 1.0)) == 1.0
        assert directionality(ChiralRates(0.7, 0.7)) == 0.0
        assert directionality(ChiralRates(0.5, 1.0)) == pytest.approx(1 / 3, abs=1e-15)
        assert ChiralRates(1.0, 0.0).directionality == -1.0

    def test_reference_rate(self):
        assert ChiralRates(0.5, 2.0).reference_rate == 2.0
        assert ChiralRates(0.5, 0.0).reference_rate == 0.5

    @pytest.mark.parametrize("gl,gr", [(-0.1, 1.0), (0.0, 0.0), (1.0, float("nan"))])
    def test_invalid(self, gl, gr):
        with pytest.raises(ValueError):
            ChiralRates(gl, gr)


class TestCouplingMatrix:
    def test_cascaded_pair(self):
        V = build_coupling_matrix(build_positions(2, PI), ChiralRates(0.0, 1.0))
        np.testing.assert_allclose(V.entries, [[-0.5, 0], [1, -0.5]], atol=1e-15)
        assert V.kind is CouplingKind.CHIRAL

    def test_reciprocal_pair(self):
        V = build_coupling_matrix(build_positions(2, PI), ChiralRates(1.0, 1.0))
        np.testing.assert_allclose(V.entries, [[-1, 1], [1, -1]], atol=1e-15)

    def test_single_atom(self):
        V = build_coupling_matrix(build_positions(1, PI), ChiralRates(0.3, 0.9))
        np.testing.assert_allclose(V.entries, [[-0.6]])

    @settings(max_examples=60, deadline=None)
    @given(
        n=st.integers(1, 9),
        xi=st.floats(0.05, 7.0),
        gl=st.one_of(st.just(0.0), st.floats(1e-3, 2.0)),
        gr=st.one_of(st.just(0.0), st.floats(1e-3, 2.0)),
        f=st.floats(0.0, 0.9),
        seed=st.integers(0, 2**32),
    )
    def test_structure(self, n, xi, gl, gr, f, seed):
        if gl + gr == 0:
            gr = 1.0
        g = build_positions(n, xi, f, seed)
        r = ChiralRates(gl, gr)
        V = build_coupling_matrix(g, r).entries
        np.testing.assert_allclose(np.diag(V), -(gl + gr) / 2)
        iu = np.triu_indices(n, 1)
        il = np.tril_indices(n, -1)
        np.testing.assert_allclose(np.abs(V[iu]), gl, atol=1e-14)
        np.testing.assert_allclose(np.abs(V[il]), gr, atol=1e-14)
        # shared phase factor above and below the diagonal
        if gl > 0 and gr > 0:
            np.testing.assert_allclose(V[iu] / gl, V.T[iu] / gr, atol=1e-13)
        # swapping the channels transposes V
        Vs = build_coupling_matrix(g, ChiralRates(gr, gl)).entries
        np.testing.assert_allclose(Vs, V.T, atol=1e-15)
        if gl == gr or n == 1:
            np.testing.assert_array_equal(V, V.T)
        elif abs(gl - gr) > 1e-6:
            assert not np.allclose(V, V.T, rtol=0, atol=1e-9)

    def test_array_protocol(self):
        V = build_coupling_matrix(build_positions(3, 1.0), ChiralRates(0.2, 1.0))
        assert np.asarray(V).shape == (3, 3)
        assert V.dimension == 3


class TestReciprocalKernel:
    def test_neighbours_at_pi(self):
        J = reciprocal_kernel(build_positions(2, PI), 1.7).entries
        assert J[0, 1] == pytest.approx(-1.7, abs=1e-14)
        assert J[0, 0] == pytest.approx(1.7)

    def test_neighbours_at_half_pi(self):
        J = reciprocal_kernel(build_positions(2, PI / 2), 1.0).entries
        assert J[0, 1] == pytest.approx(1j, abs=1e-15)
        assert J[1, 0] == pytest.approx(1j, abs=1e-15)

    @pytest.mark.parametrize("f", [0.0, 0.5])
    def test_bridge_to_chiral_matrix(self, f):
        g = build_positions(8, 1.1, f, seed=3)
        for gamma in (0.4, 1.0):
            J = reciprocal_kernel(g, gamma).entries
            V = build_coupling_matrix(g, ChiralRates(gamma, gamma)).entries
            off = ~np.eye(8, dtype=bool)
            np.testing.assert_allclose(V[off], -np.conj(J[off]), atol=1e-14)
            # holds on the diagonal too: -(gamma + gamma)/2 = -gamma
            np.testing.assert_allclose(np.diag(V), -np.conj(np.diag(J)))
            np.testing.assert_allclose(J, J.T)

    def test_rejects_non_positive_gamma(self):
        with pytest.raises(ValueError):
            reciprocal_kernel(build_positions(2, PI), 0.0)


class TestInitialState:
    def test_end_w_state(self):
        a = build_initial_state(ExcitationPattern(2), 4)
        np.testing.assert_allclose(a, np.array([1, 1, 0, 0]) / np.sqrt(2))

    def test_single_atom_excitation(self):
        np.testing.assert_array_equal(build_initial_state(ExcitationPattern(1), 3), [1, 0, 0])

    def test_central(self):
        a = build_initial_state(ExcitationPattern(3, Placement.CENTRAL), 5)
        np.testing.assert_allclose(a, np.array([0, 1, 1, 1, 0]) / np.sqrt(3))
        a = build_initial_state(ExcitationPattern(1, "central"), 15)
        assert a[7] == 1 and np.count_nonzero(a) == 1

    def test_central_parity(self):
        with pytest.raises(ValueError, match="unequal flanks"):
            build_initial_state(ExcitationPattern(3, Placement.CENTRAL), 10)

    def test_too_many(self):
        with pytest.raises(ValueError):
            build_initial_state(ExcitationPattern(5), 4)
        with pytest.raises(ValueError):
            ExcitationPattern(0)

    @given(n=st.integers(1, 30), data=st.data())
    def test_normalized(self, n, data):
        ni = data.draw(st.integers(1, n))
        a = build_initial_state(ExcitationPattern(ni), n)
        assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-14)
