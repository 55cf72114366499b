import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adeqnn import datasets, qcore


def test_circle_labels():
    assert datasets.circle_label(np.array([0.0, 0.0]))[0] == 1
    assert datasets.circle_label(np.array([1.0, 1.0]))[0] == 0


def test_circle_balance():
    tr, _ = datasets.gen_circle(n_train=10_000, n_test=0, seed=1)
    assert abs(tr.y.mean() - 0.5) < 0.05


def test_circle_shapes_and_range():
    tr, te = datasets.gen_circle(seed=0)
    assert len(tr) == 50 and len(te) == 200
    assert np.all(np.abs(tr.x) <= 1) and np.all(np.abs(te.x) <= 1)


def test_spiral_geometry():
    u = np.array([0.0, 0.3, 0.8])
    a = datasets.spiral_points(u, np.zeros(3))
    b = datasets.spiral_points(u, np.ones(3))
    assert np.allclose(a[0], 0) and np.allclose(b[0], 0)
    assert np.allclose(b, -a)  # rotation by pi
    assert np.allclose(np.linalg.norm(a, axis=1), u)


def test_spiral_deterministic_csv():
    a, _ = datasets.gen_spiral(seed=3)
    b, _ = datasets.gen_spiral(seed=3)
    assert a.to_csv() == b.to_csv()
    assert a.to_csv().splitlines()[0] == "f0,f1,label"
    assert np.all(np.abs(a.x) <= 1)
    assert set(np.unique(a.y)) == {0, 1}


def test_dataset_validation():
    with pytest.raises(ValueError):
        datasets.Dataset(np.array([[1.5, 0.0]]), np.array([0]), 2)
    with pytest.raises(ValueError):
        datasets.Dataset(np.zeros((2, 2)), np.array([0, 2]), 2)


def test_glass_counts_and_split():
    raw = datasets._read_glass(datasets.data_path("glass.data"))
    cls = raw[:, 10].astype(int)
    assert [int(np.sum(cls == c)) for c in datasets.GLASS_CLASSES] == [70, 76, 29]
    tr, te, proj = datasets.load_glass(seed=0, with_projection=True)
    assert len(tr) + len(te) == 175
    assert (len(tr), len(te)) == (131, 44)
    for k, n in enumerate((70, 76, 29)):
        assert abs(np.sum(te.y == k) - n * 44 / 175) <= 1
    gram = proj.components @ proj.components.T
    assert np.max(np.abs(gram - np.eye(4))) < 1e-9
    assert np.all(np.abs(tr.x) <= 1) and np.all(np.abs(te.x) <= 1)
    assert np.allclose(tr.x.min(axis=0), -1) and np.allclose(tr.x.max(axis=0), 1)


def test_glass_errors(tmp_path):
    with pytest.raises(FileNotFoundError, match="nowhere"):
        datasets.load_glass(tmp_path / "nowhere.data")
    bad = tmp_path / "short.data"
    bad.write_text("1,2,3\n")
    with pytest.raises(ValueError):
        datasets.load_glass(bad)
    few = tmp_path / "few.data"
    few.write_text("1," + ",".join(["1.0"] * 9) + ",1\n")
    with pytest.raises(ValueError, match="214"):
        datasets.load_glass(few)


def test_digits(tmp_path):
    imgs, labels = datasets.load_digits(classes=(0, 1))
    assert set(np.unique(labels)) == {0, 1}
    assert imgs.shape[1] == 64 and imgs.min() >= 0 and imgs.max() <= 1
    f = tmp_path / "d.csv"
    f.write_text(",".join(["0"] * 64) + ",0\n" + ",".join(["16"] * 64) + ",1\n" + ",".join(["3"] * 64) + ",5\n")
    imgs, labels = datasets.load_digits(f, classes=(0, 1))
    assert np.array_equal(imgs[0], np.zeros(64)) and np.all(imgs[1] == 1.0)
    assert list(labels) == [0, 1]
    f.write_text(",".join(["17"] * 64) + ",0\n")
    with pytest.raises(ValueError):
        datasets.load_digits(f)
    f.write_text("1,2\n")
    with pytest.raises(ValueError):
        datasets.load_digits(f)


def test_gibbs_examples():
    assert np.allclose(datasets.gibbs_state(beta=0.0), np.eye(4) / 4)
    h = datasets.default_hamiltonian()
    lam, vec = np.linalg.eigh(h)
    ground = np.outer(vec[:, 0], vec[:, 0].conj())
    assert qcore.uhlmann_fidelity(datasets.gibbs_state(beta=50.0), ground) >= 0.999
    with pytest.raises(ValueError):
        datasets.gibbs_state(np.array([[0, 1], [0, 0]]))


def test_gibbs_matches_matrix_exponential():
    from scipy.linalg import expm

    h = datasets.default_hamiltonian()
    ref = expm(-h)
    ref /= np.trace(ref)
    assert np.max(np.abs(datasets.gibbs_state(h, 1.0) - ref)) < 1e-12


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.floats(0, 5))
def test_gibbs_valid(seed, beta):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = datasets.gibbs_state(g + g.conj().T, beta)
    qcore.check_density_matrix(rho)


def test_schedule():
    assert datasets.linear_schedule(1).gammas == (1.0,)
    assert np.allclose(datasets.linear_schedule(3).gammas, (1 / 3, 2 / 3, 1))
    assert datasets.linear_schedule(3).gammas[-1] == 1.0
    with pytest.raises(ValueError):
        datasets.linear_schedule(0)
    with pytest.raises(ValueError):
        datasets.DiffusionSchedule((0.5,))


def test_forward_diffuse_examples():
    rho = np.diag([1.0, 0, 0, 0]).astype(complex)
    assert np.array_equal(datasets.forward_diffuse(rho, datasets.linear_schedule(1))[-1], np.eye(4) / 4)
    out = datasets.forward_diffuse(rho, datasets.DiffusionSchedule((0.5, 1.0)))
    assert np.allclose(out[0], np.diag([0.625, 0.125, 0.125, 0.125]))


def test_forward_diffuse_trace_and_survival():
    rng = np.random.default_rng(4)
    for T in (1, 2, 3, 5):
        rho0 = qcore.random_density_matrix(4, rng)
        sched = datasets.linear_schedule(T)
        traj = datasets.forward_diffuse(rho0, sched)
        assert np.array_equal(traj[-1], np.eye(4) / 4)
        survival = 1.0
        for g, rho in zip(sched.gammas, traj):
            survival *= 1 - g
            assert abs(np.trace(rho) - 1) < 1e-12
            assert np.allclose(rho - np.eye(4) / 4, survival * (rho0 - np.eye(4) / 4), atol=1e-14)
