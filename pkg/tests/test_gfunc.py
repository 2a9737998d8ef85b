import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rabi_spectra.errors import InvalidParameters, PoleTooClose
from rabi_spectra.gfunc import (
    Branch,
    branches_for,
    eval_falpha,
    eval_g0,
    eval_g2p,
    eval_g_biased,
    pole_locations,
)
from rabi_spectra.model import OnePhotonParams, Sector, TwoPhotonParams


def pole_free(lo, hi, count, poles, margin=1e-3):
    x = np.linspace(lo, hi, count)
    d = np.min(np.abs(x[:, None] - np.asarray(poles, dtype=float)[None, :]), axis=1)
    return x[d > margin]


def raw_g0(g, delta, x, sign, N=200):
    """G0 from unscaled f_n, multiplied by g^n term by term in plain floats."""
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        E = xi - g * g
        om = lambda m: ((m + 3 * g * g - E) - delta ** 2 / (4 * (m - g * g - E))) / (2 * g)  # noqa: E731
        f = [1.0, om(0)]
        for m in range(2, N + 1):
            f.append((om(m - 1) * f[-1] - f[-2]) / m)
        n = np.arange(N + 1)
        terms = np.array(f) * g ** n * (1 - sign * (delta / 2) / (xi - n))
        out[i] = terms.sum()
    return out


@pytest.mark.parametrize("sign", [1, -1])
def test_g0_matches_unscaled_oracle(sign):
    x = np.arange(1, 100) * 0.01
    got = eval_g0(OnePhotonParams(0.7, 0.4), x, sign).to_float()
    ref = raw_g0(0.7, 0.4, x, sign)
    np.testing.assert_allclose(got, ref, rtol=1e-8, atol=1e-8 * np.abs(ref).max())


@given(st.floats(0.05, 1.5), st.floats(-3, 8))
def test_g0_branches_coincide_without_splitting(g, x):
    p = OnePhotonParams(g, 0.0)
    if np.min(np.abs(x - np.arange(40))) < 1e-6:
        return
    assert float(eval_g0(p, x, "plus").to_float()) == float(eval_g0(p, x, "minus").to_float())


@given(st.floats(0.05, 1.2), st.floats(0.1, 2.0))
@settings(max_examples=40)
def test_splitting_sign_flip_swaps_branches(g, delta):
    x = pole_free(-1.5, 5.5, 200, np.arange(0, 7))
    a = eval_g0(OnePhotonParams(g, delta), x, "plus").to_float()
    b = eval_g0(OnePhotonParams(g, -delta), x, "minus").to_float()
    np.testing.assert_allclose(a, b, rtol=1e-13)


@given(st.floats(0.05, 1.2), st.floats(0.1, 2.0))
@settings(max_examples=40)
def test_factorization_identity(g, delta):
    p = OnePhotonParams(g, delta)
    x = pole_free(-1.5, 5.5, 300, np.arange(0, 7))
    gp = eval_g0(p, x, "plus").to_float()
    gm = eval_g0(p, x, "minus").to_float()
    ge = eval_g_biased(p, x).to_float()
    scale = np.maximum(np.abs(gp * gm), np.abs(ge))
    assert np.all(np.abs(ge + gp * gm) <= 1e-10 * scale)


def test_biased_without_splitting_has_no_zeros():
    p = OnePhotonParams(0.6, 0.0, 0.3)
    poles = pole_locations(p, (-1, 5)).positions
    edges = np.concatenate([[-1.0], poles, [5.0]])
    for lo, hi in zip(edges[:-1], edges[1:]):
        x = np.linspace(lo, hi, 60)[1:-1]
        s = eval_g_biased(p, x).sign()
        assert np.all(s == s[0])


def test_small_coupling_zeros_sit_at_bare_levels():
    # below x = 1 the plus branch holds |0> at delta/2 and |1> at 1 - delta/2;
    # at delta = 1 the two merge into a resonant pair
    x = pole_free(-0.95, 0.95, 400, [0.0])
    s = eval_g0(OnePhotonParams(1e-3, 0.6), x, "plus").sign()
    flips = x[:-1][s[:-1] * s[1:] < 0]
    real = flips[np.abs(flips) > 0.01]  # drop the flip across the pole at 0
    np.testing.assert_allclose(real, [0.3, 0.7], atol=1e-2)


def test_g0_pole_guard_and_bias_check():
    with pytest.raises(PoleTooClose):
        eval_g0(OnePhotonParams(0.5, 1.0), 2.0, "plus")
    with pytest.raises(InvalidParameters):
        eval_g0(OnePhotonParams(0.5, 1.0, 0.2), 0.3, "plus")
    with pytest.raises(InvalidParameters):
        eval_g0(OnePhotonParams(0.5, 1.0), 0.3, "sideways")


def test_convergence_flag():
    p = OnePhotonParams(1.0, 1.0)
    assert eval_g0(p, 0.3, "plus").converged
    assert not eval_g0(p, 0.3, "plus", N=8).converged


def test_scalar_and_vector_shapes():
    p = OnePhotonParams(0.4, 1.0)
    v = eval_g0(p, 0.3, "minus")
    assert np.ndim(v.to_float()) == 0
    w = eval_g0(p, np.array([0.3, 0.6]), "minus")
    assert w.to_float().shape == (2,)
    assert float(v.to_float()) == pytest.approx(w.to_float()[0], rel=1e-14)
    assert v.nearest_pole_distance == pytest.approx(0.3)


def test_two_photon_without_splitting():
    p = TwoPhotonParams(0.3, 0.0)
    x = pole_free(-0.9, 6.9, 100, np.arange(8))
    for start in (0, 1):
        a = eval_g2p(p, x, start, "plus").to_float()
        b = eval_g2p(p, x, start, "minus").to_float()
        np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("start", [0, 1])
def test_two_photon_sign_flip_swaps_branches(start):
    x = pole_free(-0.9, 6.9, 150, np.arange(8))
    a = eval_g2p(TwoPhotonParams(0.3, 0.8), x, start, "plus").to_float()
    b = eval_g2p(TwoPhotonParams(0.3, -0.8), x, start, "minus").to_float()
    np.testing.assert_allclose(a, b, rtol=1e-13)


def test_two_photon_weak_coupling_zeros():
    # near g = 0 only the lowest term of each sector survives
    p = TwoPhotonParams(1e-4, 1.0)
    for sector, zero in [(Sector.EVEN_PLUS, 0.5), (Sector.EVEN_MINUS, -0.5),
                         (Sector.ODD_PLUS, 1.5), (Sector.ODD_MINUS, 0.5)]:
        s = Branch(p, sector).evaluate(np.array([zero - 0.05, zero + 0.05])).sign()
        assert s[0] * s[1] < 0, sector


def test_two_photon_extended_range():
    # near collapse the products f_n L_n leave the float range but G stays usable
    v = eval_g2p(TwoPhotonParams(0.49, 1.0), np.array([10.3, 40.7]), 0, "plus")
    assert np.all(np.isfinite(v.log2abs()))
    assert np.all(v.converged)


def test_falpha_degenerate_truncation():
    v = eval_falpha(OnePhotonParams(0.5, 1.0), np.linspace(-3, 3, 7), "plus", M=0)
    np.testing.assert_array_equal(v.to_float(), 1.0)


@pytest.mark.parametrize(
    "p, window, sector, expected",
    [
        (OnePhotonParams(0.5, 1.0), (0, 3), None, [0, 1, 2, 3]),
        (OnePhotonParams(0.5, 1.0, 0.2), (0, 1.2), None, [0.1, 0.9, 1.1]),
        (TwoPhotonParams(0.3, 1.0), (0, 5), Sector.EVEN_PLUS, [0, 2, 4]),
        (TwoPhotonParams(0.3, 1.0), (0, 5), Sector.ODD_MINUS, [1, 3, 5]),
    ],
)
def test_pole_locations(p, window, sector, expected):
    ps = pole_locations(p, window, sector)
    np.testing.assert_allclose(ps.positions, expected, atol=1e-15)
    assert np.all(np.diff(ps.positions) > 0)
    assert len(ps.tags) == len(ps)


def test_pole_tags_merge_on_coincidence():
    ps = pole_locations(OnePhotonParams(0.5, 1.0, 1.0), (0, 2))
    assert np.all(np.diff(ps.positions) > 0)
    assert any("|" in t for t in ps.tags)


def test_grid_refinement_is_stable():
    br = Branch(OnePhotonParams(0.7, 0.4), Sector.ONE_PLUS)
    coarse = np.abs(br.evaluate(np.linspace(1.05, 1.95, 101)).to_float()).max()
    fine = np.abs(br.evaluate(np.linspace(1.05, 1.95, 201)).to_float()).max()
    assert fine == pytest.approx(coarse, rel=1e-3)


def test_branches_for_each_model():
    assert [b.sector for b in branches_for(OnePhotonParams(0.2, 1.0))] == [Sector.ONE_PLUS, Sector.ONE_MINUS]
    assert [b.sector for b in branches_for(OnePhotonParams(0.2, 1.0, 0.1))] == [Sector.ONE_BIASED]
    assert len(branches_for(TwoPhotonParams(0.2, 1.0))) == 4
