import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import linalg

from bladesim.assembly import (
    ModelOptions,
    RotorModel,
    assemble,
    blade_alone,
    blade_angle,
    rayleigh_coefficients,
    rayleigh_damping,
    rotation_block,
    shaft_alone,
    transformation,
)
from bladesim.config import table2_scenario
from bladesim.sections import CrackSpec, GeometryError


def model_for(sc, **kw):
    return RotorModel.from_scenario(sc, **kw)


def corotating_eigenvalues(model, t):
    """Eigenvalues of the undamped equations written in co-rotating coordinates."""
    th, w = model.rpm.angle(t), model.rpm.omega(t)
    M, K = model.matrices(t)
    D = model.mass_rate(t) if model.options.mass_rate else np.zeros_like(M)
    c, s = math.cos(th), math.sin(th)
    blocks = (
        np.array([[1, 0, 0], [0, c, -s], [0, s, c]]),
        np.array([[0, 0, 0], [0, -s, -c], [0, c, -s]]),
        np.array([[0, 0, 0], [0, -c, s], [0, -s, -c]]),
    )
    free = model.dofmap.free
    R, dR, ddR = (np.kron(np.eye(2 * model.dofmap.n_nodes), b)[np.ix_(free, free)] for b in blocks)
    Mq = R.T @ M @ R
    Gq = R.T @ (2 * w * M @ dR + D @ R)
    Kq = R.T @ (w * w * M @ ddR + w * D @ dR + K @ R)
    n = len(Mq)
    A = np.block([[np.zeros((n, n)), np.eye(n)],
                  [-linalg.solve(Mq, Kq), -linalg.solve(Mq, Gq)]])
    return linalg.eigvals(A)


def dense_rotation(model, t):
    """Shaft rotation about X on the free DOFs and its first two angle derivatives."""
    th = model.rpm.angle(t)
    c, s = math.cos(th), math.sin(th)
    blocks = (
        np.array([[1, 0, 0], [0, c, -s], [0, s, c]]),
        np.array([[0, 0, 0], [0, -s, -c], [0, c, -s]]),
        np.array([[0, 0, 0], [0, -c, s], [0, -s, -c]]),
    )
    free = model.dofmap.free
    return [np.kron(np.eye(2 * model.dofmap.n_nodes), b)[np.ix_(free, free)] for b in blocks]


def check_orthogonal(theta):
    T = transformation(theta)
    assert np.allclose(T.T @ T, np.eye(12), atol=1e-14)
    assert np.linalg.det(rotation_block(theta)) == pytest.approx(1.0)


GENERIC_TIMES = (0.0713, 0.3123)  # shaft angles that are not whole turns


class TestAngles:
    def test_start(self, rpm):
        assert blade_angle(0.0, 0, 8, rpm) == 0.0

    def test_blade_offset(self, rpm):
        assert blade_angle(0.0, 2, 8, rpm) == pytest.approx(math.pi / 2)

    def test_end_of_ramp(self, rpm):
        assert rpm.angle(0.2) == pytest.approx(62.832, rel=1e-5)
        assert rpm.angle(0.2 + 1e-9) == pytest.approx(rpm.angle(0.2), abs=1e-6)

    def test_ramp_is_integral_of_speed(self, rpm):
        from scipy import integrate

        for t in (0.05, 0.2, 0.7):
            assert rpm.angle(t) == pytest.approx(integrate.quad(rpm.omega, 0, t, points=[0.2])[0])

    def test_negative_time(self, rpm):
        with pytest.raises(ValueError):
            blade_angle(-1.0, 0, 8, rpm)


class TestTransformation:
    def test_zero_angle(self):
        assert np.array_equal(rotation_block(0.0), [[0, 0, 1], [0, 1, 0], [-1, 0, 0]])

    def test_quarter_turn(self):
        assert np.allclose(rotation_block(math.pi / 2), [[0, -1, 0], [0, 0, 1], [-1, 0, 0]], atol=1e-15)

    @given(st.floats(-100, 100))
    def test_orthogonal(self, theta):
        check_orthogonal(theta)


class TestAssembly:
    def test_free_dof_count(self, scenario):
        _, dofmap = assemble(scenario)
        assert dofmap.n_free == 102

    def test_two_stage_layout(self, stage):
        sc = table2_scenario(stages=(stage, stage))
        m = model_for(sc)
        assert m.n_free == 6 * (2 + 2 * 8 * 2)
        assert m.dofmap.names["stage0.disk"] == 1
        assert m.dofmap.names["stage1.disk"] == 2
        assert m.dofmap.names["stage1.blade3.root"] == 2

    def test_symmetric_definite(self, scenario):
        s = model_for(scenario).system(0.37)
        assert np.allclose(s.mass, s.mass.T, rtol=0, atol=1e-12 * np.abs(s.mass).max())
        assert np.allclose(s.stiffness, s.stiffness.T, rtol=0, atol=1e-12 * np.abs(s.stiffness).max())
        assert linalg.eigvalsh(s.mass).min() > 0
        assert linalg.eigvalsh(s.stiffness).min() > 0

    def test_harmonic_matches_direct(self, scenario):
        sc = replace(scenario, cracks=(CrackSpec(0, 3, 0.01, 0.05),))
        m = model_for(sc, tip_masses={(0, 1): 0.1})
        for t in (0.0, 0.013, 0.1, 0.47):
            mh, kh = m.matrices(t)
            md, kd = m.direct_matrices(t)
            assert np.abs(mh - md).max() <= 1e-10 * np.abs(md).max()
            assert np.abs(kh - kd).max() <= 1e-10 * np.abs(kd).max()

    def test_force_matches_direct_rotation(self, scenario):
        m = model_for(scenario)
        t = 0.31
        f = m.force(t)
        # blade 0 tip: rotate the local centrifugal/aero load into global axes
        tip = m.dofmap.node_free_indices(m.dofmap.names["stage0.blade0.tip"])
        R = rotation_block(m.rpm.angle(t))
        local = R @ f[tip[:3]]
        assert local[0] > 0  # radially outward pull
        assert abs(local[0]) > 100 * abs(local[1])

    def test_rotation_preserves_spectrum(self, scenario):
        m = model_for(scenario)
        a = linalg.eigvalsh(*m.matrices(0.5)[::-1])
        b = linalg.eigvalsh(*m.matrices(0.5 + 1.234e-3)[::-1])
        assert np.allclose(a, b, rtol=1e-9)

    def test_relabelling_blades(self, scenario):
        a = model_for(replace(scenario, cracks=(CrackSpec(0, 0, 0.01, 0.05),)))
        b = model_for(replace(scenario, cracks=(CrackSpec(0, 5, 0.01, 0.05),)))
        fa = linalg.eigvalsh(*a.matrices(0.0)[::-1])
        fb = linalg.eigvalsh(*b.matrices(0.0)[::-1])
        assert np.allclose(fa, fb, rtol=1e-9)

    def test_crack_changes_only_its_blade(self, scenario):
        tuned = model_for(scenario)
        cracked = model_for(replace(scenario, cracks=(CrackSpec(0, 2, 0.01, 0.05),)))
        dk = np.abs(cracked.matrices(0.21)[1] - tuned.matrices(0.21)[1]) > 0
        allowed = np.zeros(tuned.n_free, bool)
        for node in tuned.dofmap.blade_nodes[(0, 2)]:
            idx = tuned.dofmap.node_free_indices(node)
            allowed[idx[idx >= 0]] = True
        rows, cols = np.nonzero(dk)
        assert len(rows) > 0
        assert allowed[rows].all() and allowed[cols].all()

    def test_mass_rate_is_time_derivative(self, scenario):
        m = model_for(scenario)
        for t in (0.1, 0.6):
            h = 1e-6
            fd = (m.matrices(t + h)[0] - m.matrices(t - h)[0]) / (2 * h)
            assert np.abs(m.mass_rate(t) - fd).max() <= 1e-6 * np.abs(fd).max()

    def test_total_mass(self, scenario, stage):
        m = model_for(scenario)
        from bladesim.sections import blade_section, disk_inertia, shaft_section

        expected = (7833 * shaft_section(stage.shaft).area * 0.5 + disk_inertia(stage.disk, stage.shaft)[0]
                    + 8 * 7833 * blade_section(stage.blades).area * 0.4)
        assert m.total_mass() == pytest.approx(expected)

    def test_pinned_root(self, scenario):
        sc = replace(scenario, model=ModelOptions(boundary="pinned"))
        assert model_for(sc).n_free == 104

    def test_truncation_beyond_blade_rejected(self, scenario):
        with pytest.raises(GeometryError):
            model_for(scenario, truncations={(0, 0): 0.0})

    def test_dof_labels(self, scenario):
        d = model_for(scenario).dofmap
        assert d.index("stage0.disk.uY") == 1
        with pytest.raises(KeyError):
            d.index("shaft.root.uX")
        with pytest.raises(KeyError):
            d.index("stage0.disk.uQ")


class TestSpinStability:
    @pytest.mark.parametrize("cracks", [(), (CrackSpec(0, 0, 0.01, 0.01),),
                                        (CrackSpec(0, 0, 0.005, 0.075), CrackSpec(0, 1, 0.005, 0.075))])
    def test_undamped_corotating_system_is_neutral(self, scenario, cracks):
        m = model_for(replace(scenario, cracks=cracks))
        lam = corotating_eigenvalues(m, 1.0)
        assert lam.real.max() <= 1e-6 * np.abs(lam).max()

    def test_bare_rotated_matrices_diverge(self, scenario):
        sc = replace(scenario, model=ModelOptions(spin_stiffening=False, mass_rate=False))
        lam = corotating_eigenvalues(model_for(sc), 1.0)
        assert lam.real.max() > 1.0

    def test_spin_stiffening_raises_blade_frequencies(self, scenario):
        m = model_for(scenario)
        rest = linalg.eigvalsh(*m.matrices(0.0)[::-1])
        spun = linalg.eigvalsh(*m.direct_matrices(1.0)[::-1])
        assert spun[0] > rest[0]


class TestCorotating:
    @pytest.fixture(params=[ModelOptions(), ModelOptions(boundary="pinned", mass_rate=False),
                            ModelOptions(spin_stiffening=False)], ids=["default", "pinned", "bare"])
    def model(self, request, scenario):
        sc = replace(scenario, model=request.param, cracks=(CrackSpec(0, 2, 0.01, 0.05),))
        m = model_for(sc, tip_masses={(0, 1): 0.1}, truncations={(0, 4): 0.13})
        m.a0, m.a1 = 1.9, 2e-4
        return m

    @pytest.mark.parametrize("t", GENERIC_TIMES)
    def test_frame_maps(self, model, t):
        R, _, _ = dense_rotation(model, t)
        q = np.random.default_rng(3).standard_normal(model.n_free)
        np.testing.assert_allclose(model.to_fixed(t, q), R @ q, atol=1e-14)
        np.testing.assert_allclose(model.to_rotating(t, q), R.T @ q, atol=1e-14)

    @pytest.mark.parametrize("t", [0.3123, 0.4567])
    def test_assembly_is_rotation_covariant(self, model, t):
        # at t = 1 s the shaft has made 90 whole turns at the same speed
        assert model.rpm.angle(1.0) / (2 * math.pi) == pytest.approx(90.0)
        R, _, _ = dense_rotation(model, t)
        M, K = model.matrices(t)
        M0, K0 = model.matrices(1.0)
        np.testing.assert_allclose(R.T @ M @ R, M0, atol=1e-12 * np.abs(M).max())
        np.testing.assert_allclose(R.T @ K @ R, K0, atol=1e-12 * np.abs(K).max())
        np.testing.assert_allclose(R.T @ model.force(t), model.force(1.0), atol=1e-12 * np.abs(model.force(t)).max())

    @pytest.mark.parametrize("t", GENERIC_TIMES)
    def test_matches_substitution(self, model, t):
        """Substituting u = R q into the global equations gives the co-rotating system."""
        R, dR, ddR = dense_rotation(model, t)
        w, dw = model.rpm.omega(t), model.rpm.omega_rate(t)
        g = model.system(t)
        V = g.damping + (g.mass_rate if g.mass_rate is not None else 0.0)
        G = R.T @ (2 * w * g.mass @ dR + V @ R)
        K = R.T @ (g.mass @ (w * w * ddR + dw * dR) + w * V @ dR + g.stiffness @ R)
        c = model.corotating_system(t)
        assert c.corotating and c.mass_rate is None
        np.testing.assert_allclose(c.mass, R.T @ g.mass @ R, atol=1e-12 * np.abs(g.mass).max())
        np.testing.assert_allclose(c.damping, G, atol=1e-10 * np.abs(G).max())
        np.testing.assert_allclose(c.stiffness, K, atol=1e-10 * np.abs(K).max())

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.0, 2.0))
    def test_round_trip(self, t):
        m = model_for(table2_scenario())
        q = np.random.default_rng(0).standard_normal(m.n_free)
        np.testing.assert_allclose(m.to_rotating(t, m.to_fixed(t, q)), q, atol=1e-13)

    def test_constant_after_ramp(self, model):
        a, b = model.corotating_system(0.31), model.corotating_system(1.77)
        for x, y in ((a.mass, b.mass), (a.damping, b.damping), (a.stiffness, b.stiffness), (a.force, b.force)):
            np.testing.assert_array_equal(x, y)


class TestRayleigh:
    def test_zero_ratio(self):
        M, K = np.eye(2), np.diag([1.0, 4.0])
        a0, a1, C = rayleigh_damping(M, K, 0.0, (1, 2))
        assert a0 == a1 == 0 and np.all(C == 0)

    def test_anchor_ratios(self):
        wi, wj = 2 * math.pi * 70.37, 2 * math.pi * 2505.62
        a0, a1 = rayleigh_coefficients(0.02, wi, wj)
        for w in (wi, wj):
            assert a0 / (2 * w) + a1 * w / 2 == pytest.approx(0.02, abs=1e-12)

    def test_single_frequency_limit(self):
        w = 10.0
        a0, a1 = rayleigh_coefficients(0.05, w, w * (1 + 1e-6))
        assert a0 == pytest.approx(0.05 * w, rel=1e-5)
        assert a1 == pytest.approx(0.05 / w, rel=1e-5)

    def test_degenerate_pair(self):
        with pytest.raises(ValueError):
            rayleigh_coefficients(0.02, 5.0, 5.0)

    def test_from_matrices(self):
        M, K = np.eye(3), np.diag([1.0, 4.0, 9.0])
        a0, a1, C = rayleigh_damping(M, K, 0.02, (1, 3))
        assert np.allclose(C, a0 * M + a1 * K)
        for w in (1.0, 3.0):
            assert a0 / (2 * w) + a1 * w / 2 == pytest.approx(0.02)


class TestMembers:
    def test_blade_alone_matches_assembled_cantilever(self, blade, material):
        from bladesim.solver import modal_analysis

        f, _ = modal_analysis(blade_alone(blade, material), 3)
        assert np.all(np.diff(f) >= 0) and f[0] > 0

    def test_shaft_alone_repeated_pair(self, scenario, material):
        from bladesim.solver import modal_analysis

        f, _ = modal_analysis(shaft_alone(scenario.stages, material), 2)
        assert f[0] == pytest.approx(f[1], rel=1e-9)
