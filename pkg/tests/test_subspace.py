import numpy as np
import pytest

from specevo.subspace import (
    ablation_reconstruct,
    decouple,
    make_ablation,
    reconstruct,
)
from specevo.wavelet import dwt2


def test_dimensionality_accounting():
    x = np.random.default_rng(0).standard_normal((4, 64, 64))
    u, sub = decouple(x, 4)
    full_dim = 4 * 64 * 64
    assert sub.low_dim == 64
    assert sub.low_dim == full_dim // 4 ** 4
    assert u.shape == (64,)


def test_constant_input():
    x = np.full((2, 32, 32), 1.5)
    u, sub = decouple(x, 3)
    assert np.allclose(u, u[0])
    for triple in sub.frozen_details:
        for band in triple:
            np.testing.assert_allclose(band, 0.0, atol=1e-12)


def test_roundtrip_unchanged_u():
    x = np.random.default_rng(1).standard_normal((4, 64, 64))
    u, sub = decouple(x, 4)
    assert np.abs(reconstruct(u, sub) - x).max() < 1e-10


def test_flattening_order_channel_major():
    x = np.random.default_rng(2).standard_normal((3, 16, 16))
    u, sub = decouple(x, 2)
    ll = dwt2(x, 2).ll
    np.testing.assert_array_equal(u, ll.ravel())  # C-order: channel, row, column


def test_isometry_on_affine_slice():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((2, 32, 32))
    _, sub = decouple(x, 3)
    for _ in range(5):
        u1 = rng.standard_normal(sub.low_dim)
        u2 = rng.standard_normal(sub.low_dim)
        lhs = np.linalg.norm(reconstruct(u1, sub) - reconstruct(u2, sub))
        assert lhs == pytest.approx(np.linalg.norm(u1 - u2), rel=1e-10)


def test_linearity_in_u():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((1, 16, 16))
    _, sub = decouple(x, 2)
    zero_anchor_sub = decouple(np.zeros((1, 16, 16)), 2)[1]
    u1 = rng.standard_normal(sub.low_dim)
    u2 = rng.standard_normal(sub.low_dim)
    a, b = 1.7, -0.4
    # with a zero anchor the map is linear, not just affine
    lhs = reconstruct(a * u1 + b * u2, zero_anchor_sub)
    rhs = a * reconstruct(u1, zero_anchor_sub) + b * reconstruct(u2, zero_anchor_sub)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_zero_u_zero_anchor_gives_zero_field():
    _, sub = decouple(np.zeros((2, 16, 16)), 2)
    np.testing.assert_array_equal(reconstruct(np.zeros(sub.low_dim), sub),
                                  np.zeros((2, 16, 16)))


def test_anchor_invariance():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((2, 32, 32))
    _, sub = decouple(x, 2)
    u = rng.standard_normal(sub.low_dim)
    p = dwt2(reconstruct(u, sub), 2)
    for got, want in zip(p.details, sub.frozen_details):
        for gb, wb in zip(got, want):
            assert np.abs(gb - wb).max() < 1e-10


def test_affine_prior_marginals():
    # fresh standard-normal u over a fresh standard-normal anchor must give
    # i.i.d. standard-normal field entries (orthonormal coefficient map)
    rng = np.random.default_rng(6)
    fields = []
    for _ in range(3000):
        _, sub = decouple(rng.standard_normal((1, 8, 8)), 1)
        fields.append(reconstruct(rng.standard_normal(sub.low_dim), sub).ravel())
    flat = np.stack(fields)
    assert flat.mean() == pytest.approx(0.0, abs=0.02)
    assert flat.var() == pytest.approx(1.0, abs=0.05)
    cov = np.cov(flat[:, :16].T)
    off_diag = cov - np.diag(np.diag(cov))
    assert np.abs(off_diag).max() < 0.1


def test_frozen_details_immutable():
    x = np.random.default_rng(7).standard_normal((1, 16, 16))
    _, sub = decouple(x, 2)
    with pytest.raises(ValueError):
        sub.frozen_details[0][0][0, 0, 0] = 99.0


def test_length_mismatch_rejected():
    x = np.random.default_rng(8).standard_normal((1, 16, 16))
    _, sub = decouple(x, 2)
    with pytest.raises(ValueError, match="length"):
        reconstruct(np.zeros(sub.low_dim + 1), sub)


def test_ablation_random_identity_at_reference():
    rng = np.random.default_rng(9)
    ref = rng.standard_normal((2, 16, 16))
    a = make_ablation("random", ref, level=2, rng=np.random.default_rng(0))
    assert a.indices.size == a.dim == ref.size // 16
    assert np.unique(a.indices).size == a.dim
    v = ref.ravel()[a.indices]
    np.testing.assert_array_equal(ablation_reconstruct(v, a, ref), ref)


def test_ablation_random_overwrites_selected_coords():
    rng = np.random.default_rng(10)
    ref = rng.standard_normal((1, 8, 8))
    a = make_ablation("random", ref, level=1, rng=np.random.default_rng(1))
    v = rng.standard_normal(a.dim)
    out = ablation_reconstruct(v, a, ref)
    np.testing.assert_array_equal(out.ravel()[a.indices], v)
    mask = np.ones(ref.size, dtype=bool)
    mask[a.indices] = False
    np.testing.assert_array_equal(out.ravel()[mask], ref.ravel()[mask])


def test_ablation_full_roundtrip():
    rng = np.random.default_rng(11)
    ref = rng.standard_normal((2, 16, 16))
    a = make_ablation("full", ref, level=2)
    p = dwt2(ref, 2)
    v = np.concatenate([p.ll.ravel()]
                       + [band.ravel() for triple in p.details for band in triple])
    assert np.abs(ablation_reconstruct(v, a, ref) - ref).max() < 1e-10


def test_ablation_high_freq_zero_details():
    rng = np.random.default_rng(12)
    ref = rng.standard_normal((1, 16, 16))
    a = make_ablation("high_freq", ref, level=2)
    out = ablation_reconstruct(np.zeros(a.dim), a, ref)
    p_out = dwt2(out, 2)
    p_ref = dwt2(ref, 2)
    np.testing.assert_allclose(p_out.ll, p_ref.ll, atol=1e-10)
    for triple in p_out.details:
        for band in triple:
            np.testing.assert_allclose(band, 0.0, atol=1e-10)


def test_ablation_low_freq_matches_decouple():
    rng = np.random.default_rng(13)
    ref = rng.standard_normal((1, 16, 16))
    a = make_ablation("low_freq", ref, level=2)
    _, sub = decouple(ref, 2)
    u = rng.standard_normal(sub.low_dim)
    np.testing.assert_allclose(ablation_reconstruct(u, a, ref),
                               reconstruct(u, sub), atol=1e-12)


def test_ablation_validation():
    ref = np.zeros((1, 8, 8))
    with pytest.raises(ValueError, match="unknown ablation kind"):
        make_ablation("mystery", ref, level=1)
    with pytest.raises(ValueError, match="seeded rng"):
        make_ablation("random", ref, level=1)
    a = make_ablation("full", ref, level=1)
    with pytest.raises(ValueError, match="length"):
        ablation_reconstruct(np.zeros(a.dim - 1), a, ref)
    with pytest.raises(ValueError, match="reference shape"):
        ablation_reconstruct(np.zeros(a.dim), a, np.zeros((1, 16, 16)))
