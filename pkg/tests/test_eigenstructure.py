import numpy as np
import pytest

from spinbias import (
    NetworkSpec,
    build_reduced_hamiltonian,
    check_optimality_condition,
    compute_itf,
    eigendecompose,
    mirror_transfer_expression,
    probability_series,
    transfer_amplitude,
)


def ring(n, bias=None):
    return build_reduced_hamiltonian(NetworkSpec("ring", n), np.zeros(n) if bias is None else bias)


def chain(n, bias=None):
    return build_reduced_hamiltonian(NetworkSpec("chain", n), np.zeros(n) if bias is None else bias)


def test_two_chain_bound_is_one():
    report = compute_itf(eigendecompose(chain(2)), 1, 2)
    assert report.sqrt_itf == pytest.approx(1.0, abs=1e-12)
    assert report.itf == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(np.abs(report.overlaps_in), 1 / np.sqrt(2), atol=1e-12)


def test_antipodal_six_ring_saturated_bound_but_capped_transfer():
    # Antipodal transfer on the unbiased 6-ring: translation by 3 acts as +-1
    # on every eigenspace, forcing |v(1)| = |v(4)| for all eigenvectors, so
    # the bound saturates at 1 while the projector structure caps the actual
    # transfer at p = (2 sin t - sin 2t)^2 / 9 <= 3/4.
    eig = eigendecompose(ring(6))
    report = compute_itf(eig, 1, 4)
    assert report.itf == pytest.approx(1.0, abs=1e-12)
    satisfied, worst = check_optimality_condition(eig, 1, 4, 1e-10)
    assert satisfied and worst < 1e-12
    series = probability_series(eig, 1, 4, 200.0, 0.01)
    assert series.values.max() == pytest.approx(0.75, abs=1e-4)
    assert series.values.max() < 1.0


def test_bound_never_exceeds_one():
    rng = np.random.default_rng(21)
    for kind in ("ring", "chain"):
        for n in (4, 7, 12):
            h = build_reduced_hamiltonian(NetworkSpec(kind, n), rng.uniform(-6, 6, n))
            report = compute_itf(eigendecompose(h), 1, n)
            assert report.itf <= 1.0 + 1e-12
            assert report.sqrt_itf == pytest.approx(
                np.sum(np.abs(report.overlaps_in * report.overlaps_out)), abs=1e-15
            )


def test_bound_dominates_probability():
    rng = np.random.default_rng(22)
    h = ring(9, rng.uniform(0, 10, 9))
    eig = eigendecompose(h)
    report = compute_itf(eig, 1, 4)
    series = probability_series(eig, 1, 4, 50.0, 0.05)
    assert np.sqrt(series.values.max()) <= report.sqrt_itf + 1e-10


def test_zero_overlap_gets_sign_zero():
    # The middle eigenvector of the unbiased 3-chain vanishes on site 2.
    report = compute_itf(eigendecompose(chain(3)), 1, 2)
    assert report.signs[1] == 0
    assert all(s in (-1, 0, 1) for s in report.signs)


def test_mirror_chain_satisfies_condition():
    eig = eigendecompose(chain(3))
    satisfied, worst = check_optimality_condition(eig, 1, 3, 1e-10)
    assert satisfied and worst < 1e-12


def test_random_biases_generically_violate_condition():
    rng = np.random.default_rng(4)
    eig = eigendecompose(ring(13, rng.uniform(0, 10, 13)))
    satisfied, worst = check_optimality_condition(eig, 1, 5, 1e-3)
    assert not satisfied
    assert worst > 0.1


def test_condition_invariant_under_sign_flips_and_degenerate_rotations():
    eig = eigendecompose(ring(6))
    _, ref = check_optimality_condition(eig, 1, 4, 1e-6)

    flipped = eig.vecs * np.array([1, -1, 1, -1, -1, 1])
    eig_f = type(eig)(evals=eig.evals, vecs=flipped)
    _, worst_f = check_optimality_condition(eig_f, 1, 4, 1e-6)
    assert worst_f == pytest.approx(ref, abs=1e-12)

    # rotate inside each degenerate eigenspace
    rng = np.random.default_rng(30)
    vecs = eig.vecs.copy()
    for lam in np.unique(np.round(eig.evals, 9)):
        idx = np.flatnonzero(np.abs(eig.evals - lam) < 1e-9)
        if len(idx) == 2:
            th = rng.uniform(0, 2 * np.pi)
            rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
            vecs[:, idx] = vecs[:, idx] @ rot
    eig_r = type(eig)(evals=eig.evals, vecs=vecs)
    _, worst_r = check_optimality_condition(eig_r, 1, 4, 1e-6)
    assert worst_r == pytest.approx(ref, abs=1e-9)


def test_quenched_mirror_chain_rows_match():
    rng = np.random.default_rng(23)
    for k in (4, 5, 7):
        half = rng.uniform(0, 8, (k + 1) // 2)
        bias = np.concatenate([half, half[: k // 2][::-1]])
        eig = eigendecompose(chain(k, bias))
        assert np.max(np.abs(np.abs(eig.vecs[0]) - np.abs(eig.vecs[k - 1]))) < 1e-10


def test_mirror_expression_anchors():
    # For the unbiased 3-chain (evals -sqrt2, 0, sqrt2) the expression with
    # phi = 0 equals 2 at the perfect-transfer time (phases {-pi, 0, pi}) and
    # vanishes at the full revival t = sqrt(2) pi where all t*lam are
    # multiples of 2 pi.
    eig = eigendecompose(chain(3))
    assert mirror_transfer_expression(eig, 1, np.pi / np.sqrt(2.0), 0.0) == pytest.approx(
        2.0, abs=1e-10
    )
    assert mirror_transfer_expression(eig, 1, np.sqrt(2.0) * np.pi, 0.0) == pytest.approx(
        0.0, abs=1e-10
    )
    assert mirror_transfer_expression(eig, 1, 0.0, 0.0) == 0.0


def test_mirror_expression_matches_phase_residual_form():
    # Identity: 4 sum |v_in,n|^2 sin^2((t lam_n - phi)/2)
    #         = 2 - 2 Re(e^{-i phi} conj(<in|e^{-itH}|in>)).
    rng = np.random.default_rng(24)
    for k in (3, 5, 8):
        half = rng.uniform(0, 5, (k + 1) // 2)
        bias = np.concatenate([half, half[: k // 2][::-1]])
        eig = eigendecompose(chain(k, bias))
        for t in (0.4, 2.7, 9.3):
            for phi in (0.0, 1.1, -2.4):
                expr = mirror_transfer_expression(eig, 1, t, phi)
                amp = transfer_amplitude(eig, 1, 1, t)
                expected = 2.0 - 2.0 * np.real(np.exp(-1j * phi) * np.conj(amp))
                assert expr == pytest.approx(expected, abs=1e-10)
