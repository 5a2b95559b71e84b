"""Tests for the measure data model: tail sets, multipliers, convolution,
and the per-kind transform dispatch.

Closed forms are cross-checked against the adaptive quadrature route
wherever the measure carries a pointwise density, which keeps every exact
formula honest against an independent evaluation path.
"""

import mpmath
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp, mpc, mpf

from dbnlab import (
    EntirenessError,
    PrecisionContext,
    apply_gaussian_multiplier,
    convolve_gaussian,
    eval_H,
    eval_H_parts,
    named_density,
    partial_gaussian_mass,
    symmetric_atoms,
    tail_set,
    transform_function,
)
from dbnlab.measures import _case8_atoms
from dbnlab import numerics

CTX = PrecisionContext()


class TestTailSets:
    def test_atoms_all_reals(self):
        m = symmetric_atoms([(0, 1), (2, mpf("0.5"))])
        assert tail_set(m).shape == "AllReals"

    def test_gaussian_open(self):
        ts = tail_set(named_density("Gaussian", CTX, b0=3))
        assert ts.shape == "OpenUpTo" and ts.b0 == 3
        assert ts.contains(mpf("2.99")) and not ts.contains(mpf(3))

    def test_entire_density_kinds(self):
        for m in (
            named_density("RiemannPhi", CTX),
            named_density("ExpPower", CTX, q=2),
            named_density("CoshExp", CTX, a=1),
            named_density("PolyaQuartic", CTX, a=1, b=0, c=1, q=1),
            named_density("DBNClass", CTX, K=1, m=0, alpha=2, beta=-1, a_list=()),
            named_density("SexticField", CTX, a=1, b=0, c=0),
        ):
            assert tail_set(m).shape == "AllReals"

    def test_dbnclass_without_quartic_term(self):
        m = named_density(
            "DBNClass", CTX, K=1, m=1, alpha=0, beta=2, a_list=(1, 2)
        )
        ts = tail_set(m)
        assert ts.shape == "OpenUpTo"
        assert abs(ts.b0 - (2 + 1 + mpf("0.25"))) < mpf("1e-40")

    def test_slow_decay_kinds_closed_endpoint(self):
        # at b equal to the Gaussian rate the leftover factor is still
        # integrable, so the endpoint itself belongs to the set
        for m in (
            named_density("AbsExpGaussian", CTX, a=1, lam=1),
            named_density("PolyDecayGaussian", CTX, theta=1, lam=1),
        ):
            ts = tail_set(m)
            assert ts.shape == "ClosedUpTo" and ts.b0 == 1
            assert ts.contains(mpf(1)) and not ts.contains_interior(mpf(1))

    def test_special_kinds(self):
        assert tail_set(named_density("Case6", CTX)).shape == "OpenUpTo"
        ts8 = tail_set(named_density("Case8", CTX))
        assert ts8.shape == "ClosedUpTo" and ts8.b0 == 0

    def test_convolution_and_multiplier_shift(self):
        base = symmetric_atoms([(0, mpf(3) / 5), (1, mpf(2) / 5)])
        conv = convolve_gaussian(base, 5, CTX)
        assert tail_set(conv).shape == "OpenUpTo"
        assert tail_set(conv).b0 == 5
        shifted = apply_gaussian_multiplier(conv, mpf(2), ctx=CTX)
        assert tail_set(shifted).b0 == 3
        neg = apply_gaussian_multiplier(named_density("RiemannPhi", CTX), mpf(-1), ctx=CTX)
        assert tail_set(neg).shape == "AllReals"

    def test_partial_mass_watches_the_boundary(self):
        # below the rate the partial masses settle, above they blow up
        g = named_density("Gaussian", CTX, b0=1)
        lo5 = partial_gaussian_mass(g, mpf("0.8"), 5, CTX)
        lo8 = partial_gaussian_mass(g, mpf("0.8"), 8, CTX)
        hi5 = partial_gaussian_mass(g, mpf("1.2"), 5, CTX)
        hi8 = partial_gaussian_mass(g, mpf("1.2"), 8, CTX)
        assert abs(lo8 - lo5) < mpf("1e-1")
        assert hi8 > hi5 * mpf(100)


class TestMultiplier:
    def test_atoms_scale_and_normalize(self):
        with mp.workdps(60):
            m = symmetric_atoms([(1, 1)])
            lam = mpf("0.3")
            scaled = apply_gaussian_multiplier(m, lam, ctx=CTX)
            assert abs(scaled.atoms[0][1] - mpmath.exp(lam)) < mpf("1e-45")
            normed = apply_gaussian_multiplier(m, lam, normalize=True, ctx=CTX)
            assert abs(normed.atoms[0][1] - 1) < mpf("1e-45")

    def test_gaussian_rate_shift(self):
        g = named_density("Gaussian", CTX, b0=1)
        shifted = apply_gaussian_multiplier(g, mpf("0.25"), normalize=True, ctx=CTX)
        assert shifted.density_kind == "Gaussian"
        assert shifted.param("b0") == mpf("0.75")

    def test_multipliers_compose_additively(self):
        with mp.workdps(60):
            phi = named_density("RiemannPhi", CTX)
            once = apply_gaussian_multiplier(
                apply_gaussian_multiplier(phi, mpf("-0.4"), ctx=CTX),
                mpf("0.1"),
                ctx=CTX,
            )
            assert once.kind == "MultipliedMeasure"
            assert once.base is phi
            assert abs(once.lam - mpf("-0.3")) < mpf("1e-45")
            direct = eval_H(phi, once.lam, mpf(2), CTX)
            wrapped = eval_H(once, mpf(0), mpf(2), CTX)
            assert abs(direct.value - wrapped.value) < mpf("1e-29")

    def test_normalize_outside_range_rejected(self):
        g = named_density("Gaussian", CTX, b0=1)
        with pytest.raises(EntirenessError):
            apply_gaussian_multiplier(g, mpf(1), normalize=True, ctx=CTX)

    def test_normalized_wrapper_has_unit_mass(self):
        phi = named_density("RiemannPhi", CTX)
        normed = apply_gaussian_multiplier(phi, mpf("-0.5"), normalize=True, ctx=CTX)
        with mp.workdps(60):
            h0 = eval_H(normed, mpf(0), mpf(0), CTX)
            assert abs(h0.value - 1) < mpf("1e-28")


class TestAtomTransforms:
    def test_two_point_cosine(self):
        m = symmetric_atoms([(1, 1)])
        with mp.workdps(60):
            for z in (mpf(0), mpf("1.3"), mpc("0.4", "0.7")):
                got = eval_H(m, mpf("0.2"), z, CTX).value
                want = mpmath.exp(mpf("0.2")) * mpmath.cos(z)
                assert abs(got - want) < mpf("1e-40")

    def test_origin_atom_constant(self):
        with mp.workdps(60):
            m = symmetric_atoms([(0, mpf(2) / 3), (1, mpf(1) / 3)])
            b = mpf("0.5")
            got = eval_H(m, b, mpf(0), CTX).value
            want = mpf(2) / 3 + mpmath.exp(b) / 3
            assert abs(got - want) < mpf("1e-40")

    def test_parts_match_finite_differences(self):
        m = symmetric_atoms([(0, 1), (mpf("0.7"), 2), (2, mpf("0.3"))])
        with mp.workdps(60):
            z = mpc("0.9", "0.2")
            h = mpf("1e-12")
            parts = eval_H_parts(m, mpf("-0.1"), z, CTX, ("value", "deriv", "moment2"))
            plus = eval_H(m, mpf("-0.1"), z + h, CTX).value
            minus = eval_H(m, mpf("-0.1"), z - h, CTX).value
            fd = (plus - minus) / (2 * h)
            assert abs(parts["deriv"].value - fd) < mpf("1e-22")
            fd2 = (plus - 2 * parts["value"].value + minus) / (h * h)
            assert abs(parts["moment2"].value + fd2) < mpf("1e-12")


class TestConvolution:
    def test_origin_atom_collapses_to_gaussian(self):
        conv = convolve_gaussian(symmetric_atoms([(0, 1)]), mpf(2), CTX)
        assert conv.kind == "NamedDensity" and conv.density_kind == "Gaussian"
        assert conv.param("b0") == 2

    def test_closed_form_against_quadrature(self):
        base = symmetric_atoms([(0, mpf(3) / 5), (1, mpf(2) / 5)])
        conv = convolve_gaussian(base, 5, CTX)
        with mp.workdps(60):
            for lam, z in (
                (mpf(0), mpf("1.7")),
                (mpf(2), mpc("0.6", "0.3")),
                (mpf("-1"), mpf(4)),
            ):
                closed = eval_H(conv, lam, z, CTX).value
                quad = numerics.eval_H_density(conv, lam, z, CTX).value
                assert abs(closed - quad) < mpf("1e-28")

    def test_smeared_pair_formula(self):
        # independent per-atom expression: each site t0 contributes
        # w * sqrt(b0/c) exp((2 b0 t0 + iz)^2/(4c) - b0 t0^2) per unit mass
        # split across +-t0
        with mp.workdps(60):
            b0, lam = mpf(5), mpf(2)
            base = symmetric_atoms([(0, mpf(3) / 5), (1, mpf(2) / 5)])
            conv = convolve_gaussian(base, b0, CTX)
            c = b0 - lam
            z = mpc("1.1", "-0.4")

            def site(t0, w):
                return (
                    w
                    * mpmath.sqrt(b0 / c)
                    * mpmath.exp((2 * b0 * t0 + mpc(0, 1) * z) ** 2 / (4 * c) - b0 * t0 * t0)
                )

            want = site(mpf(0), mpf(3) / 5) + site(mpf(1), mpf(1) / 5) + site(mpf(-1), mpf(1) / 5)
            got = eval_H(conv, lam, z, CTX).value
            assert abs(got - want) < mpf("1e-38")

    def test_zero_multiplier_factorizes(self):
        # at lam = 0 the transform is the atomic transform times the
        # Gaussian kernel transform e^{-z^2/(4 b0)}
        base = symmetric_atoms([(2, 1), (mpf("0.5"), mpf(2))])
        b0 = mpf(3)
        conv = convolve_gaussian(base, b0, CTX)
        with mp.workdps(60):
            z = mpf("2.2")
            got = eval_H(conv, mpf(0), z, CTX).value
            want = eval_H(base, mpf(0), z, CTX).value * mpmath.exp(-z * z / (4 * b0))
            assert abs(got - want) < mpf("1e-40")


class TestSpecialKinds:
    def test_case6_single_upper_zero(self):
        m = named_density("Case6", CTX)
        with mp.workdps(60):
            at_zero = eval_H(m, mpf(0), mpc(0, 2), CTX).value
            assert abs(at_zero) < mpf("1e-40")
            on_axis = eval_H(m, mpf(0), mpf(1), CTX).value
            assert abs(mpmath.im(on_axis)) > mpf("0.01")
        assert not transform_function(m, mpf(0), CTX).real_on_axis()

    def test_case6_shifted_zero_with_multiplier(self):
        # with multiplier lam the effective rate is alpha = 1 - lam and the
        # zero sits at 2*alpha*i
        m = named_density("Case6", CTX)
        with mp.workdps(60):
            lam = mpf("0.25")
            z0 = mpc(0, 2 * (1 - lam))
            assert abs(eval_H(m, lam, z0, CTX).value) < mpf("1e-40")

    def test_case8_unit_mass_and_closed_form(self):
        m = named_density("Case8", CTX)
        with mp.workdps(60):
            h0 = eval_H(m, mpf(0), mpf(0), CTX).value
            assert abs(h0 - 1) < mpf("1e-40")
            # atom expansion must reproduce the closed form
            atoms = _case8_atoms(mp.dps, CTX.tol_digits, 0)
            assert abs(sum(w for _, w in atoms) - 1) < mpf("1e-32")
            closed = eval_H(m, mpf(0), mpf("1.2"), CTX).value
            direct = sum(
                w * (mpmath.cos(mpf("1.2") * t) if t else 1) for t, w in atoms
            )
            assert abs(closed - direct) < mpf("1e-30")
            # off the axis the truncated tail is amplified by e^{|Im z| t},
            # so the atom route is only good to ~1e-24 here; the closed form
            # is exact
            zc = mpc("0.3", "0.9")
            closed = eval_H(m, mpf(0), zc, CTX).value
            direct = sum(w * (mpmath.cos(zc * t) if t else 1) for t, w in atoms)
            assert abs(closed - direct) < mpf("1e-22")

    def test_case8_double_zero_at_i_pi(self):
        # cos(z) = -1 kills both the (1+cos) factor's neighbor and the
        # derivative: value and derivative vanish at z = pi, but not the
        # second derivative (a genuine double zero)
        m = named_density("Case8", CTX)
        with mp.workdps(60):
            parts = eval_H_parts(m, mpf(0), mp.pi, CTX, ("value", "deriv", "moment2"))
            assert abs(parts["value"].value) < mpf("1e-40")
            assert abs(parts["deriv"].value) < mpf("1e-40")
            assert abs(parts["moment2"].value) > mpf("0.01")
            simple = eval_H_parts(m, mpf(0), mp.pi / 2, CTX, ("value", "deriv"))
            assert abs(simple["value"].value) < mpf("1e-40")
            assert abs(simple["deriv"].value) > mpf("0.01")

    def test_case8_multiplier_sides(self):
        m = named_density("Case8", CTX)
        with pytest.raises(EntirenessError):
            eval_H(m, mpf("0.1"), mpf(0), CTX)
        with mp.workdps(60):
            v = eval_H(m, mpf("-0.5"), mpf(0), CTX).value
            assert abs(v.imag) < mpf("1e-40")
            assert 0 < v.real < 1  # strictly damped mass

    def test_case8_negative_multiplier_matches_reweighted_sum(self):
        m = named_density("Case8", CTX)
        with mp.workdps(60):
            lam = mpf("-0.3")
            atoms = _case8_atoms(mp.dps, CTX.tol_digits, 0)
            z = mpf("0.8")
            want = sum(
                w * mpmath.exp(lam * t * t) * (mpmath.cos(z * t) if t else 1)
                for t, w in atoms
            )
            got = eval_H(m, lam, z, CTX).value
            assert abs(got - want) < mpf("1e-30")

    def test_entireness_guards(self):
        g = named_density("Gaussian", CTX, b0=1)
        with pytest.raises(EntirenessError):
            eval_H(g, mpf(1), mpf(0), CTX)
        with pytest.raises(EntirenessError):
            eval_H(g, mpf("1.5"), mpf(0), CTX)
        # boundary evaluation allowed where the endpoint is in the set
        a = named_density("AbsExpGaussian", CTX, a=1, lam=1)
        v = eval_H(a, mpf(1), mpf("0.5"), CTX)
        assert v.value.real != 0


ATOM_STRATEGY = st.lists(
    st.tuples(
        st.floats(0, 4, allow_nan=False, allow_infinity=False),
        st.floats(0.01, 3, allow_nan=False, allow_infinity=False),
    ),
    min_size=1,
    max_size=5,
    unique_by=lambda p: round(p[0], 6),
)


@settings(max_examples=30, deadline=None)
@given(pairs=ATOM_STRATEGY, lam=st.floats(-1, 1), re=st.floats(-3, 3), im=st.floats(-2, 2))
def test_property_atomic_transform_symmetries(pairs, lam, re, im):
    """Evenness and conjugate symmetry hold exactly for atom transforms."""
    with mp.workdps(60):
        m = symmetric_atoms(pairs)
        z = mpc(re, im)
        lam = mpf(lam)
        a = eval_H(m, lam, z, CTX).value
        b = eval_H(m, lam, -z, CTX).value
        c = eval_H(m, lam, mpmath.conj(z), CTX).value
        assert abs(a - b) < mpf("1e-38") * (1 + abs(a))
        assert abs(mpmath.conj(c) - a) < mpf("1e-38") * (1 + abs(a))


@settings(max_examples=15, deadline=None)
@given(
    pairs=ATOM_STRATEGY,
    lam1=st.floats(-0.5, 0.5),
    lam2=st.floats(-0.5, 0.5),
)
def test_property_multiplier_composition_on_atoms(pairs, lam1, lam2):
    """Applying multipliers in two steps equals one combined step."""
    with mp.workdps(60):
        m = symmetric_atoms(pairs)
        two_step = apply_gaussian_multiplier(
            apply_gaussian_multiplier(m, mpf(lam1), ctx=CTX), mpf(lam2), ctx=CTX
        )
        one_step = apply_gaussian_multiplier(m, mpf(lam1) + mpf(lam2), ctx=CTX)
        for (t1, w1), (t2, w2) in zip(two_step.atoms, one_step.atoms):
            assert t1 == t2
            assert abs(w1 - w2) < mpf("1e-42") * (1 + abs(w1))
