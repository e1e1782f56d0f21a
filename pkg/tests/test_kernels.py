import numpy as np
import pytest

from spinbias import NetworkSpec, build_reduced_hamiltonian
from spinbias import _kernels


@pytest.fixture
def restore_backend():
    yield
    _kernels.set_backend("auto")


needs_compiled = pytest.mark.skipif(
    not _kernels.compiled_available(), reason="compiled extension not built"
)


def _random_instance(rng, near_degenerate=False):
    n = int(rng.choice([5, 9, 13]))
    kind = "ring" if rng.integers(2) else "chain"
    h = build_reduced_hamiltonian(NetworkSpec(kind, n), rng.uniform(0, 10, n))
    if near_degenerate:
        lam, v = np.linalg.eigh(h)
        i = int(rng.integers(0, n - 1))
        gap = rng.choice([0.0, 1e-12, 1e-10, 1e-9, 5e-9])
        mid = 0.5 * (lam[i] + lam[i + 1])
        lam[i], lam[i + 1] = mid - gap / 2, mid + gap / 2
        h = (v * lam) @ v.T
        h = 0.5 * (h + h.T)
    return h, n


@needs_compiled
def test_objective_core_backends_agree(restore_backend):
    rng = np.random.default_rng(100)
    for trial in range(40):
        h, n = _random_instance(rng, near_degenerate=bool(trial % 3 == 0))
        i_in, i_out = 0, int(rng.integers(1, n))
        t = float(rng.uniform(0.1, 40))
        _kernels.set_backend("python")
        p1, g1, gt1 = _kernels.objective_core(h, i_in, i_out, t)
        _kernels.set_backend("compiled")
        p2, g2, gt2 = _kernels.objective_core(h, i_in, i_out, t)
        assert p2 == pytest.approx(p1, abs=1e-11)
        assert np.max(np.abs(g1 - g2)) < 1e-9
        assert gt2 == pytest.approx(gt1, abs=1e-9)


@needs_compiled
def test_amplitudes_backends_agree(restore_backend):
    rng = np.random.default_rng(101)
    h, n = _random_instance(rng)
    lam, v = np.linalg.eigh(h)
    times = np.linspace(0.0, 25.0, 400)
    _kernels.set_backend("python")
    a1 = _kernels.amplitudes(lam, v, 0, n - 1, times)
    _kernels.set_backend("compiled")
    a2 = _kernels.amplitudes(lam, v, 0, n - 1, times)
    assert np.max(np.abs(a1 - a2)) < 1e-12


def test_objective_core_no_time_grad():
    rng = np.random.default_rng(102)
    h, n = _random_instance(rng)
    p, g, gt = _kernels.objective_core(h, 0, 1, 2.0, want_time_grad=False)
    assert gt == 0.0
    p2, g2, _ = _kernels.objective_core(h, 0, 1, 2.0, want_time_grad=True)
    assert p == pytest.approx(p2, abs=1e-15)
    assert np.array_equal(g, g2)


def test_backend_selection_api(restore_backend):
    name = _kernels.set_backend("python")
    assert name == "python" == _kernels.backend_name()
    with pytest.raises(ValueError):
        _kernels.set_backend("fortran")
    if _kernels.compiled_available():
        assert _kernels.set_backend("compiled") == "compiled"
    assert _kernels.set_backend("auto") in ("python", "compiled")
