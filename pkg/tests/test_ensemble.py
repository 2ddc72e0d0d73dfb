import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdqmc.ensemble import (
    KernelConfig,
    WalkerCloud,
    effective_potential,
    effective_potential_all,
    kernel_weight,
    partition_Z,
    update_sigma,
)
from tdqmc.errors import InconsistentEnsembles, NonPositiveSigma
from tdqmc.potentials import SoftCoreParams, v_ee

HE = SoftCoreParams(a=2.0, b=1.0)


def two_clouds(m=200, seed=0, spread=0.8):
    rng = np.random.default_rng(seed)
    return [WalkerCloud(0, rng.normal(0.0, spread, m)),
            WalkerCloud(1, rng.normal(0.0, spread, m))]


class TestKernelWeight:
    def test_coincident(self):
        assert kernel_weight(1.3, 1.3, 0.5) == pytest.approx(1.0)

    def test_one_sigma(self):
        assert kernel_weight(1.0, 0.0, 1.0) == pytest.approx(np.exp(-0.5))

    def test_mean_field_limit(self):
        w = kernel_weight(np.array([-37.0, 4.0, 12.0]), 3.0, 1e9)
        assert np.all(np.abs(w - 1.0) < 1e-12)

    def test_nonpositive_sigma(self):
        with pytest.raises(NonPositiveSigma):
            kernel_weight(0.0, 1.0, 0.0)


class TestPartitionZ:
    def test_single_walker(self):
        c = WalkerCloud(0, np.array([0.7]))
        assert partition_Z(c, 0, 1.0) == pytest.approx(1.0)

    def test_sigma_infinity(self):
        c = WalkerCloud(0, np.linspace(-3, 3, 40))
        assert partition_Z(c, 5, 1e12) == pytest.approx(40.0)

    def test_bounds(self):
        c = two_clouds(m=100)[0]
        z = partition_Z(c, 17, 0.5)
        assert 1.0 <= z <= 100.0

    def test_vs_brute_force(self):
        rng = np.random.default_rng(11)
        pts = rng.normal(size=100)
        c = WalkerCloud(0, pts)
        z = partition_Z(c, 0, 1.0)
        brute = sum(np.exp(-((p - pts[0]) ** 2) / 2.0) for p in pts)
        assert z == pytest.approx(brute, abs=1e-12)


class TestUpdateSigma:
    def test_two_point_cloud(self):
        c = WalkerCloud(0, np.array([-1.0, 1.0]))
        cfg = KernelConfig(alpha=(1.0, 1.0), sigma=(1.0, 1.0))
        out = update_sigma(c, cfg)
        assert out.sigma[0] == pytest.approx(np.sqrt(2.0))
        assert out.sigma_jk(0) == pytest.approx(np.sqrt(2.0))

    def test_floor_clamp(self):
        c = WalkerCloud(1, np.zeros(16))
        cfg = KernelConfig(alpha=(1.0, 2.0), sigma=(1.0, 1.0), sigma_floor=1e-3)
        out = update_sigma(c, cfg)
        assert out.sigma[1] == pytest.approx(1e-3)
        assert out.sigma_jk(1) == pytest.approx(2e-3)

    def test_large_sample_statistics(self):
        rng = np.random.default_rng(5)
        c = WalkerCloud(0, rng.normal(0.0, 1.0, 10_000))
        cfg = KernelConfig(alpha=(1.0, 1.0), sigma=(1.0, 1.0))
        out = update_sigma(c, cfg)
        assert abs(out.sigma[0] - 1.0) < 0.03


class TestEffectivePotential:
    def test_single_walker_reduction(self):
        clouds = [WalkerCloud(0, np.array([0.3])), WalkerCloud(1, np.array([-0.5]))]
        cfg = KernelConfig(alpha=(1.0, 1.0), sigma=(0.8, 0.8))
        x = np.linspace(-10, 10, 201)
        v = effective_potential(x, 0, 0, clouds, cfg, HE)
        assert np.max(np.abs(v - v_ee(x - (-0.5), HE))) == 0.0

    def test_sigma_to_zero_classical_limit(self):
        clouds = two_clouds()
        cfg = KernelConfig(alpha=(1e-9, 1e-9), sigma=(1.0, 1.0), sigma_floor=1e-12)
        x = np.linspace(-10, 10, 201)
        k = 13
        v = effective_potential(x, 0, k, clouds, cfg, HE)
        assert np.max(np.abs(v - v_ee(x - clouds[1].positions[k], HE))) < 1e-12

    def test_sigma_to_infinity_hartree_limit(self):
        clouds = two_clouds()
        cfg = KernelConfig(alpha=(np.inf, np.inf), sigma=(1.0, 1.0))
        x = np.linspace(-10, 10, 201)
        v = effective_potential(x, 0, 3, clouds, cfg, HE)
        mc_mean = np.mean(v_ee(x[:, None] - clouds[1].positions, HE), axis=1)
        assert np.max(np.abs(v - mc_mean)) < 1e-12

    def test_convex_combination_bound(self):
        clouds = two_clouds(m=60, seed=4)
        x = np.linspace(-8, 8, 101)
        pair = v_ee(x[:, None] - clouds[1].positions, HE)
        lo, hi = pair.min(axis=1), pair.max(axis=1)
        for sigma in (0.05, 0.3, 1.0, 5.0, 50.0):
            cfg = KernelConfig(alpha=(sigma, sigma), sigma=(1.0, 1.0),
                               sigma_floor=1e-12)
            v = effective_potential(x, 0, 7, clouds, cfg, HE)
            assert np.all(v >= lo - 1e-12) and np.all(v <= hi + 1e-12)

    def test_bounded_by_pair_strength(self):
        clouds = two_clouds(m=50, seed=2)
        cfg = KernelConfig(alpha=(1.0, 1.0), sigma=(0.8, 0.8))
        v = effective_potential(np.linspace(-20, 20, 301), 0, 11, clouds, cfg, HE)
        assert np.all(v > 0.0) and np.all(v <= HE.b + 1e-12)

    def test_inconsistent_ensembles(self):
        clouds = [WalkerCloud(0, np.zeros(5) + 0.1), WalkerCloud(1, np.zeros(6))]
        cfg = KernelConfig(alpha=(1.0, 1.0), sigma=(1.0, 1.0))
        with pytest.raises(InconsistentEnsembles):
            effective_potential(np.linspace(-1, 1, 11), 0, 0, clouds, cfg, HE)

    @given(seed=st.integers(min_value=0, max_value=2**16))
    @settings(max_examples=15, deadline=None)
    def test_permutation_invariance(self, seed):
        clouds = two_clouds(m=30, seed=1)
        cfg = KernelConfig(alpha=(0.7, 0.7), sigma=(0.9, 0.9))
        x = np.linspace(-5, 5, 51)
        k = 4
        v1 = effective_potential(x, 0, k, clouds, cfg, HE)
        perm = np.random.default_rng(seed).permutation(30)
        # hold walker k of the source cloud fixed while permuting the rest
        pos = clouds[1].positions
        center = pos[k]
        shuffled = pos[perm]
        where = int(np.nonzero(perm == k)[0][0])
        shuffled[[k, where]] = shuffled[[where, k]]
        assert shuffled[k] == center
        clouds2 = [clouds[0], WalkerCloud(1, shuffled)]
        v2 = effective_potential(x, 0, k, clouds2, cfg, HE)
        assert np.max(np.abs(v1 - v2)) < 1e-12


class TestBatchedPaths:
    def test_exact_path_matches_reference(self):
        clouds = two_clouds(m=150, seed=9)
        cfg = KernelConfig(alpha=(1.0, 1.0), sigma=(0.85, 0.85))
        x = np.linspace(-15, 15, 201)
        rows = effective_potential_all(x, 0, clouds, cfg, HE, mode="exact")
        for k in (0, 17, 149):
            ref = effective_potential(x, 0, k, clouds, cfg, HE)
            assert np.max(np.abs(rows[k] - ref)) < 1e-12

    def test_binned_path_accuracy(self):
        clouds = two_clouds(m=400, seed=10)
        cfg = KernelConfig(alpha=(1.0, 1.0), sigma=(0.85, 0.85))
        x = np.linspace(-30, 30, 401)  # dx = 0.15
        exact = effective_potential_all(x, 0, clouds, cfg, HE, mode="exact")
        binned = effective_potential_all(x, 0, clouds, cfg, HE, mode="binned")
        assert np.max(np.abs(exact - binned)) < 5e-3

    def test_b_zero_shortcut(self):
        clouds = two_clouds(m=20)
        cfg = KernelConfig(alpha=(1.0, 1.0), sigma=(1.0, 1.0))
        rows = effective_potential_all(np.linspace(-5, 5, 51), 0, clouds, cfg,
                                       SoftCoreParams(a=2.0, b=0.0))
        assert np.all(rows == 0.0)
