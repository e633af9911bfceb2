import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gglr import gradient_graph as gg
from gglr.metrics import random_mask
from gglr.structure_tensor import (StructureTensor, dominant_eigenpair, dominant_gradient,
                                   estimate_gradient_field, observable_gradients, pixel_gradient_estimates,
                                   structure_tensor_at, tensor_fields)


def plane(M, N, a=0.2, b=0.03, c=0.01):
    k, l = np.meshgrid(np.arange(1, M + 1), np.arange(1, N + 1), indexing="ij")
    return a + b * l + c * k


def test_observable_fully_known():
    img = np.random.default_rng(0).random((4, 5))
    known = np.ones_like(img, dtype=bool)
    for d in (gg.HORIZONTAL, gg.VERTICAL):
        f = observable_gradients(img, known, d)
        assert f.valid.all()
        np.testing.assert_array_equal(f.values, gg.image_gradient(img, d).values)


@pytest.mark.parametrize("k,l", [(0, 0), (1, 1), (2, 1), (0, 2)])
def test_one_missing_pixel_invalidates_incident_nodes(k, l):
    img = np.random.default_rng(1).random((3, 3))
    known = np.ones((3, 3), dtype=bool)
    known[k, l] = False
    h = observable_gradients(img, known, gg.HORIZONTAL)
    v = observable_gradients(img, known, gg.VERTICAL)
    bad_h = {(r, c) for r in range(3) for c in range(2) if (r, c) == (k, l) or (r, c + 1) == (k, l)}
    bad_v = {(r, c) for r in range(2) for c in range(3) if (r, c) == (k, l) or (r + 1, c) == (k, l)}
    got_h = {(r, c) for r in range(3) for c in range(2) if not h.valid[r + 3 * c]}
    got_v = {(r, c) for r in range(2) for c in range(3) if not v.valid[r + 2 * c]}
    assert got_h == bad_h and got_v == bad_v
    assert len(bad_h) <= 2 and len(bad_v) <= 2


def test_fully_missing_has_no_valid_nodes():
    img = np.zeros((4, 4))
    known = np.zeros((4, 4), dtype=bool)
    assert not observable_gradients(img, known, gg.HORIZONTAL).valid.any()
    assert not observable_gradients(img, known, gg.VERTICAL).valid.any()


def _fields(img, known):
    return observable_gradients(img, known, gg.HORIZONTAL), observable_gradients(img, known, gg.VERTICAL)


def test_zero_gradients_give_zero_tensor():
    gh, gv = _fields(np.full((6, 6), 0.3), np.ones((6, 6), bool))
    S = structure_tensor_at((2, 2), gh, gv, 5)
    assert (S.hh, S.hv, S.vv) == (0.0, 0.0, 0.0) and S.count == 25


def test_single_valid_offset():
    # only pixel (0,0) has both gradients observable: known pixels (0,0),(0,1),(1,0)
    img = np.zeros((3, 3))
    img[0, 1] = 1.0
    known = np.zeros((3, 3), bool)
    known[0, 0] = known[0, 1] = known[1, 0] = True
    gh, gv = _fields(img, known)
    S = structure_tensor_at((1, 1), gh, gv, 3)
    assert S.count == 1
    np.testing.assert_array_equal(S.as_matrix(), [[1, 0], [0, 0]])


def test_plane_tensor():
    b, c = 0.03, 0.01
    gh, gv = _fields(plane(10, 10, b=b, c=c), np.ones((10, 10), bool))
    S = structure_tensor_at((4, 4), gh, gv, 5)
    np.testing.assert_allclose(S.as_matrix(), [[b * b, b * c], [b * c, c * c]], rtol=1e-12)


def test_dominant_gradient_examples():
    assert dominant_gradient(StructureTensor(0, 0, 0, 0)) == (0.0, 0.0)
    assert dominant_gradient(StructureTensor(1, 0, 0, 1), (1.0, 0.0)) == (1.0, 0.0)
    for b, c in [(0.03, 0.01), (-0.2, 0.05), (0.0, -0.4), (0.1, -0.1)]:
        S = StructureTensor(b * b, b * c, c * c, 25)
        np.testing.assert_allclose(dominant_gradient(S, (b, c)), (b, c), atol=1e-15)


def test_dominant_gradient_tie_break():
    # zero mean: prefer nonnegative horizontal, then nonnegative vertical
    gh_, gv_ = dominant_gradient(StructureTensor(0.25, -0.25, 0.25, 4), (0.0, 0.0))
    assert gh_ > 0 and gv_ < 0
    gh_, gv_ = dominant_gradient(StructureTensor(0.0, 0.0, 1.0, 4), (0.0, 0.0))
    assert (gh_, gv_) == (0.0, 1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_closed_form_eig_matches_dense(a, b, d):
    lam, ex, ey = dominant_eigenpair(a, b, d)
    S = np.array([[a, b], [b, d]])
    w, V = np.linalg.eigh(S)
    assert float(lam) == pytest.approx(w[-1], abs=1e-12)
    e = np.array([float(ex), float(ey)])
    assert np.linalg.norm(e) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(S @ e, float(lam) * e, atol=1e-12)
    if w[-1] - w[0] > 1e-6:
        assert abs(abs(e @ V[:, -1]) - 1.0) <= 1e-12


def test_vectorized_tensor_matches_per_pixel_loop():
    rng = np.random.default_rng(5)
    img = rng.random((9, 11))
    known = rng.random((9, 11)) > 0.5
    gh, gv = _fields(img, known)
    means, count = tensor_fields(gh, gv, 5)
    for k in range(9):
        for l in range(11):
            S = structure_tensor_at((k, l), gh, gv, 5)
            assert S.count == count[k, l]
            np.testing.assert_allclose([S.hh, S.hv, S.vv], [means["hh"][k, l], means["hv"][k, l], means["vv"][k, l]],
                                       rtol=1e-12, atol=1e-15)


def test_estimate_fully_known_is_observed():
    img = np.random.default_rng(2).random((6, 7))
    known = np.ones((6, 7), bool)
    gh, gv = estimate_gradient_field(img, known, 5)
    np.testing.assert_array_equal(gh.values, gg.image_gradient(img, gg.HORIZONTAL).values)
    np.testing.assert_array_equal(gv.values, gg.image_gradient(img, gg.VERTICAL).values)


def test_estimate_plane_half_missing():
    b, c = 0.03, 0.01
    M = N = 16
    img = plane(M, N, b=b, c=c)
    mask = random_mask(M, N, 0.5, 42)
    gh, gv = _fields(img * mask, mask)
    est_h, est_v, count = pixel_gradient_estimates(gh, gv, 5)
    sel = count > 0
    assert sel.sum() > 0
    np.testing.assert_allclose(est_h[sel], b, atol=1e-9)
    np.testing.assert_allclose(est_v[sel], c, atol=1e-9)
    fh, fv = estimate_gradient_field(img * mask, mask, 5)
    assert fh.valid.all() and fv.valid.all()
    ok_h = np.isclose(fh.values, b, atol=1e-9) | (fh.values == 0.0)
    ok_v = np.isclose(fv.values, c, atol=1e-9) | (fv.values == 0.0)
    assert ok_h.all() and ok_v.all()


def test_estimate_fully_missing_is_zero():
    gh, gv = estimate_gradient_field(np.zeros((5, 5)), np.zeros((5, 5), bool), 5)
    assert not gh.values.any() and not gv.values.any()


def test_estimate_reduces_noise():
    b, c, sn = 0.03, 0.01, 0.05
    M = N = 16
    rng = np.random.default_rng(11)
    est, raw = [], []
    for t in range(1000):
        img = plane(M, N, b=b, c=c) + sn * rng.standard_normal((M, N))
        gh, gv = _fields(img, np.ones((M, N), bool))
        eh, _, _ = pixel_gradient_estimates(gh, gv, 5)
        est.append(eh[7, 7])
        raw.append(img[7, 8] - img[7, 7])
    assert np.var(est) < np.var(raw)


@pytest.mark.parametrize("window", [0, 2, -1])
def test_bad_window(window):
    gh, gv = _fields(np.zeros((4, 4)), np.ones((4, 4), bool))
    with pytest.raises(ValueError):
        structure_tensor_at((0, 0), gh, gv, window)
