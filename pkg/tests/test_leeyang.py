"""Ferromagnetic circle checks: enumeration oracles, root locations,
planted violations, and the continuum single-site windows."""

import itertools

import mpmath
import numpy as np
import pytest
from mpmath import mpf

from dbnlab.leeyang import (
    PLUS_MINUS_ONE,
    SpinSystem,
    build_partition_polynomial,
    phi4,
    phi6,
    search_sextic_violation,
    verify_leeyang,
)
from dbnlab.precision import DomainError, PrecisionContext
from dbnlab.zeros import Rectangle


def ctx30():
    return PrecisionContext(working_digits=30, target_abs_tol=mpf("1e-18"))


def ctx_cheap():
    return PrecisionContext(working_digits=25, target_abs_tol=mpf("1e-12"))


def enumeration_transform(system, z):
    """Independent direct sum over all configurations."""
    n = system.n
    total = mpf(0)
    z_norm = mpf(0)
    for cfg in itertools.product((1, -1), repeat=n):
        energy = sum(
            system.couplings[i][j] * cfg[i] * cfg[j]
            for i in range(n)
            for j in range(n)
            if i != j
        )
        w = mpmath.exp(mpf(system.beta) * energy)
        z_norm += w
        total += w * mpmath.exp(mpmath.mpc(0, sum(cfg)) * z)
    return total / z_norm


class TestSpinSystem:
    def test_negative_coupling_needs_search_mode(self):
        with pytest.raises(DomainError):
            SpinSystem.make([[0, -1], [-1, 0]])
        SpinSystem.make([[0, -1], [-1, 0]], search_mode=True)

    def test_asymmetric_rejected(self):
        with pytest.raises(DomainError):
            SpinSystem.make([[0, 1], [2, 0]])

    def test_nonzero_diagonal_rejected(self):
        with pytest.raises(DomainError):
            SpinSystem.make([[1]])

    def test_negative_beta_rejected(self):
        with pytest.raises(DomainError):
            SpinSystem.make([[0]], beta=-1)

    def test_too_many_sites(self):
        with pytest.raises(DomainError):
            SpinSystem.make([[0.0] * 21] * 21)


class TestBuildPartitionPolynomial:
    def test_single_free_spin(self):
        ctx = ctx30()
        with ctx.workdps(0):
            p = build_partition_polynomial(SpinSystem.make([[0.0]]), ctx)
            assert p.ms == (-1, 1)
            assert p.coefficients == (mpf(1) / 2, mpf(1) / 2)

    def test_two_site_oracle(self):
        ctx = ctx30()
        with ctx.workdps(0):
            # couplings are stored as machine floats, so the oracle must
            # start from the identical float value
            j = mpf(0.7)
            p = build_partition_polynomial(
                SpinSystem.make([[0, j], [j, 0]], beta=1), ctx
            )
            z_norm = 2 * mpmath.exp(2 * j) + 2 * mpmath.exp(-2 * j)
            by_m = dict(zip(p.ms, p.coefficients))
            assert abs(by_m[2] - mpmath.exp(2 * j) / z_norm) < mpf("1e-25")
            assert abs(by_m[-2] - mpmath.exp(2 * j) / z_norm) < mpf("1e-25")
            assert abs(by_m[0] - 2 * mpmath.exp(-2 * j) / z_norm) < mpf("1e-25")

    def test_three_free_spins_binomial(self):
        ctx = ctx30()
        with ctx.workdps(0):
            p = build_partition_polynomial(
                SpinSystem.make([[0.0] * 3] * 3, beta=1.7), ctx
            )
            assert [c * 8 for c in p.coefficients] == [1, 3, 3, 1]

    def test_evenness_and_positivity(self):
        ctx = ctx30()
        rng = np.random.default_rng(9)
        with ctx.workdps(0):
            for _ in range(5):
                n = int(rng.integers(2, 7))
                m = np.zeros((n, n))
                iu = np.triu_indices(n, 1)
                m[iu] = rng.uniform(0, 2, len(iu[0]))
                sys_r = SpinSystem.make(
                    (m + m.T).tolist(), beta=float(rng.uniform(0, 2))
                )
                p = build_partition_polynomial(sys_r, ctx)
                by_m = dict(zip(p.ms, p.coefficients))
                assert all(c > 0 for c in p.coefficients)
                for m_spin in p.ms:
                    assert by_m[m_spin] == by_m[-m_spin]
                assert abs(mpmath.fsum(p.coefficients) - 1) < mpf("1e-25")

    def test_matches_direct_enumeration(self):
        ctx = ctx30()
        rng = np.random.default_rng(21)
        with ctx.workdps(0):
            sys_r = SpinSystem.make(
                [[0, 0.3, 0.1], [0.3, 0, 0.9], [0.1, 0.9, 0]], beta=1.3
            )
            p = build_partition_polynomial(sys_r, ctx)
            for z in rng.uniform(-3, 3, 10):
                assert abs(p(mpf(z)) - enumeration_transform(sys_r, mpf(z))) < mpf(
                    "1e-12"
                )

    def test_continuum_site_refused(self):
        with pytest.raises(DomainError):
            build_partition_polynomial(
                SpinSystem.make([[0.0]], site_measure=phi4(1, 0))
            )


class TestVerifyLeeyang:
    def test_fifty_random_ferromagnets_on_circle(self):
        ctx = ctx30()
        rng = np.random.default_rng(42)
        with ctx.workdps(0):
            worst = mpf(0)
            for _ in range(50):
                n = int(rng.integers(1, 9))
                m = np.zeros((n, n))
                iu = np.triu_indices(n, 1)
                m[iu] = rng.uniform(0, 1.5, len(iu[0]))
                sys_r = SpinSystem.make(
                    (m + m.T).tolist(), beta=float(rng.uniform(0, 2))
                )
                v = verify_leeyang(sys_r, ctx)
                assert v.on_circle
                worst = max(worst, v.max_deviation)
            assert worst < mpf("1e-10")

    def test_ten_site_system(self):
        ctx = ctx30()
        rng = np.random.default_rng(1)
        with ctx.workdps(0):
            n = 10
            m = np.zeros((n, n))
            iu = np.triu_indices(n, 1)
            m[iu] = rng.uniform(0, 1, len(iu[0]))
            v = verify_leeyang(SpinSystem.make((m + m.T).tolist(), beta=0.6), ctx)
            assert v.on_circle and v.max_deviation < mpf("1e-10")
            assert len(v.roots) == 2 * n

    def test_planted_violation_found(self):
        # J = -2 at beta 1 gives y^4 + 2e^8 y^2 + 1 = 0 up to a positive
        # scalar, so the off-circle magnitude follows by the quadratic
        # formula in y^2
        ctx = ctx30()
        with ctx.workdps(0):
            bad = SpinSystem.make([[0, -2], [-2, 0]], beta=1, search_mode=True)
            v = verify_leeyang(bad, ctx)
            assert not v.on_circle
            e8 = mpmath.exp(8)
            big = mpmath.sqrt(e8 + mpmath.sqrt(e8 * e8 - 1))
            assert abs(v.max_deviation - (big - 1)) < mpf("1e-20")

    def test_decoupled_closed_form(self):
        ctx = ctx30()
        with ctx.workdps(0):
            v = verify_leeyang(SpinSystem.make([[0.0] * 4] * 4, beta=1.2), ctx)
            assert v.route == "closed-form"
            assert v.on_circle and v.max_deviation == 0
            assert sorted(mpmath.im(r) for r in v.roots) == [-1] * 4 + [1] * 4

    def test_beta_grid_stability(self):
        ctx = ctx30()
        with ctx.workdps(0):
            j = [[0, 0.8], [0.8, 0]]
            verdicts = [
                verify_leeyang(SpinSystem.make(j, beta=b), ctx).on_circle
                for b in (0.25, 0.5, 1.0, 1.5, 2.0)
            ]
            assert verdicts == [True] * 5

    def test_quartic_site_window_all_real(self):
        ctx = ctx_cheap()
        with ctx.workdps(0):
            s = SpinSystem.make([[0.0]], site_measure=phi4(1, 0))
            v = verify_leeyang(s, ctx, window=Rectangle.make(-10, 10, -2, 2))
            assert v.on_circle and v.route == "quadrature"
            assert v.window_verdict.all_real

    def test_sextic_site_window_all_real(self):
        ctx = ctx_cheap()
        with ctx.workdps(0):
            s = SpinSystem.make([[0.0]], site_measure=phi6(1, 0.5, 0.2))
            v = verify_leeyang(s, ctx, window=Rectangle.make(-6, 6, -2, 2))
            assert v.on_circle

    def test_continuum_multisite_refused(self):
        with pytest.raises(DomainError):
            verify_leeyang(
                SpinSystem.make([[0, 0], [0, 0]], site_measure=phi4(1, 0))
            )


class TestSexticSearch:
    def test_tame_grid_finds_nothing(self):
        ctx = ctx_cheap()
        with ctx.workdps(0):
            found = search_sextic_violation(
                [1.0], [0.3], [0.1], ctx, window=Rectangle.make(-5, 5, -1, 1)
            )
        assert found == []
