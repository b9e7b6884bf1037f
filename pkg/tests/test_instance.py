import numpy as np
import pytest

from scadamp.instance import (Instance, center_instance, load_instance, make_rng,
                              normalize_columns, sample_instance, save_instance,
                              standard_normals)


def test_rejects_bad_shapes():
    with pytest.raises(ValueError):
        sample_instance(10, 10)
    with pytest.raises(ValueError):
        sample_instance(20, 10)
    with pytest.raises(ValueError):
        sample_instance(5, 10, sigma_y=0.0)


def test_bit_reproducible():
    a, b = sample_instance(20, 200, 1.0, 7), sample_instance(20, 200, 1.0, 7)
    assert a.A.tobytes() == b.A.tobytes() and a.y.tobytes() == b.y.tobytes()
    assert a == b
    assert sample_instance(20, 200, 1.0, 8) != a


def test_shapes_and_alpha():
    inst = sample_instance(20, 200, 1.0, 7)
    assert inst.A.shape == (20, 200) and inst.y.shape == (20,)
    assert inst.alpha == pytest.approx(0.1)


def test_y_variance_over_seeds():
    v = np.array([sample_instance(20, 200, 1.0, s).y.var(ddof=1) for s in range(1000)])
    assert abs(v.mean() - 1.0) < 0.5
    # chi-square with 19 dof: sample variance within 1 +- 0.5 most of the time
    assert np.mean(np.abs(v - 1) <= 0.5) > 0.85


def test_design_entry_moments():
    M, N = 50, 100
    A = np.stack([sample_instance(M, N, 1.0, s).A for s in range(300)])
    assert abs(A.mean()) < 3 / np.sqrt(A.size) / np.sqrt(M)
    assert A.var() * M == pytest.approx(1.0, abs=0.01)
    norms = (A**2).sum(axis=1).mean(axis=0)
    assert np.all(np.abs(norms - 1) <= 5 / np.sqrt(M))


def test_box_muller_moments():
    z = standard_normals(make_rng(3), (200_001,))
    assert abs(z.mean()) < 0.01 and abs(z.var() - 1) < 0.01
    assert z.shape == (200_001,)


def test_small_sigma_gives_small_y():
    inst = sample_instance(10, 20, 1e-300, 1)
    assert np.max(np.abs(inst.y)) < 1e-290


def test_center_instance():
    inst = sample_instance(30, 60, 1.0, 2)
    c = center_instance(inst)
    assert abs(c.y.mean()) < 1e-14
    assert np.max(np.abs(c.A.mean(axis=0))) < 1e-14
    # original untouched
    assert inst == sample_instance(30, 60, 1.0, 2)
    cc = center_instance(c)
    assert np.max(np.abs(cc.A.mean(axis=0))) < 1e-14
    shifted = Instance(inst.y + 3.5, inst.A, inst.sigma_y, inst.seed)
    np.testing.assert_allclose(center_instance(shifted).y, c.y, atol=1e-13)


def test_normalize_columns():
    inst = sample_instance(30, 60, 1.0, 2)
    n, norms = normalize_columns(inst)
    np.testing.assert_allclose((n.A**2).sum(axis=0), 1.0, atol=1e-14)
    np.testing.assert_allclose(n.A * norms, inst.A, atol=1e-14)


@pytest.mark.parametrize("fmt", ["bin", "csv"])
def test_dump_load_roundtrip(tmp_path, fmt):
    inst = sample_instance(7, 13, 0.8, 2**63 + 5)
    path = tmp_path / f"inst.{fmt}"
    save_instance(inst, path, fmt)
    back = load_instance(path, fmt)
    assert back == inst
    assert back.M == 7 and back.N == 13
