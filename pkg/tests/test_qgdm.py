import numpy as np
import pytest

from adeqnn import circuit, datasets, qcore
from adeqnn.tasks import qgdm
from adeqnn.train import SpsaConfig


def test_unknown_variant():
    with pytest.raises(ValueError):
        qgdm.train_qgdm(datasets.gibbs_state(), 1, "nonlinear", hyper=qgdm.QgdmHyper(iters=1))


def test_maximally_mixed_target_is_a_fixed_point():
    # beta = 0: the target I/4 is also the denoiser input, so the step only has to preserve it
    results, final = qgdm.train_qgdm(datasets.gibbs_state(beta=0.0), 1, "ade", 0)
    assert results[0].achieved_fidelity >= 0.999
    assert qcore.uhlmann_fidelity(final, np.eye(4) / 4) >= 0.999


def test_short_run_bookkeeping_and_reproducibility():
    hyper = qgdm.QgdmHyper(iters=5)
    target = datasets.gibbs_state()
    results, final = qgdm.train_qgdm(target, 2, "ade", 3, hyper)
    again, final2 = qgdm.train_qgdm(target, 2, "ade", 3, hyper)
    assert [r.t for r in results] == [2, 1]
    assert np.array_equal(final, final2)
    for r, s in zip(results, again):
        assert r.history == s.history and len(r.history) == 5
        assert 0 <= r.achieved_fidelity <= 1 + 1e-12
    assert np.array_equal(results[-1].output, final)


def test_persisted_params_reproduce_fidelities():
    target = datasets.gibbs_state()
    results, _ = qgdm.train_qgdm(target, 2, "baseline", 1, qgdm.QgdmHyper(iters=5))
    rho_in = np.eye(4) / 4
    traj = [target] + datasets.forward_diffuse(target, datasets.linear_schedule(2))
    for r in results:
        assert np.array_equal(r.params[circuit.SLICES["mcry"]], circuit.MCRY_IDENTITY)
        out = circuit.denoiser_forward(r.params, rho_in, mcry_enabled=False)
        assert qcore.uhlmann_fidelity(out, traj[r.t - 1]) == r.achieved_fidelity
        rho_in = out


def test_baseline_more_steps_never_hurt():
    target = datasets.gibbs_state()
    one, _ = qgdm.train_qgdm(target, 1, "baseline", 0)
    three, _ = qgdm.train_qgdm(target, 3, "baseline", 0)
    assert three[-1].achieved_fidelity >= one[-1].achieved_fidelity


def test_sampled_mode_runs():
    from adeqnn.train import ShotSchedule

    hyper = qgdm.QgdmHyper(iters=3, exact=False, shots=ShotSchedule(512, 1, 3), spsa=SpsaConfig(avg_draws=1))
    results, final = qgdm.train_qgdm(datasets.gibbs_state(), 1, "ade", 0, hyper)
    qcore.check_density_matrix(final)
    assert [h.shots for h in results[0].record.history] == [512, 512, 1024]
