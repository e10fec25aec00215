"""Pulling a function through a superposition map: calculus and certificates."""

import numpy as np
import pytest

from floerlab.charts import rotation_field_chart, shear_chart
from floerlab.floer_function import (
    quadratic_hamiltonian,
    richardson_directional,
    richardson_second,
    symplectic_action,
)
from floerlab.floer_map import SuperpositionMap, apply, compose, d2phi
from floerlab.pullback import (
    certify_pullback,
    kappa_bound_check,
    pull_back,
    pull_back_gradient,
    riesz_correction,
)
from floerlab.scale_operator import band_indices
from floerlab.scale_space import inner, random_loop

HOPM = {"restarts": 1, "iters": 80}


def _setup(N=16, s=0.75):
    F = symplectic_action(quadratic_hamiltonian(), N)
    phi = SuperpositionMap(shear_chart(), s, N)
    return F, phi


def test_gradient_matches_directional_differences():
    F, phi = _setup()
    bundle = pull_back(F, phi, 0.75)
    rng = np.random.default_rng(0)
    for _ in range(10):
        q = random_loop(rng, 2, 16, amplitude=0.4)
        xi = random_loop(rng, 2, 16, amplitude=0.4)
        fd = richardson_directional(bundle.derived.value, q, xi)
        lin = inner(bundle.derived.gradient(q), xi, 0.0)
        assert abs(fd - lin) / max(abs(fd), 1e-12) < 1e-7


def test_hessian_matches_stencil_and_is_symmetric():
    F, phi = _setup()
    bundle = pull_back(F, phi, 0.75)
    rng = np.random.default_rng(1)
    q = random_loop(rng, 2, 16, amplitude=0.4)
    A = bundle.derived.hessian(q)
    for _ in range(4):
        xi = random_loop(rng, 2, 16, amplitude=0.4)
        eta = random_loop(rng, 2, 16, amplitude=0.4)
        quad = inner(A.apply(xi), eta, 0.0)
        fd = richardson_second(bundle.derived.value, q, xi, eta)
        assert abs(quad - fd) / max(abs(fd), 1e-12) < 1e-6
        assert abs(quad - inner(A.apply(eta), xi, 0.0)) / max(abs(quad), 1e-12) < 1e-10


def test_level_two_hessian_shares_coefficients():
    F, phi = _setup()
    bundle = pull_back(F, phi, 0.75)
    q = random_loop(np.random.default_rng(2), 2, 16, amplitude=0.4)
    A, A2 = bundle.derived.hessian(q), bundle.derived.hessian2(q)
    assert np.max(np.abs(A.matrix - A2.matrix)) < 1e-14
    assert (A.dom, A.cod) == (1.0, 0.0)
    assert (A2.dom, A2.cod) == (2.0, 1.0)


def test_correction_represents_gradient_weighted_second_derivative():
    F, phi = _setup()
    rng = np.random.default_rng(3)
    q = random_loop(rng, 2, 16, amplitude=0.4)
    K = riesz_correction(F, phi, q, 0.75)
    assert (K.dom, K.cod) == (0.75, 0.0)
    g = F.gradient(apply(phi, q))
    B = d2phi(phi, q)
    for _ in range(10):
        xi = random_loop(rng, 2, 16, amplitude=0.5)
        eta = random_loop(rng, 2, 16, amplitude=0.5)
        lhs = inner(K.apply(xi), eta, 0.0)
        rhs = B.trilinear(xi, eta, g)
        assert abs(lhs - rhs) / max(abs(rhs), 1.0) < 1e-10


def test_split_reassembles_the_hessian():
    F, phi = _setup()
    bundle = pull_back(F, phi, 0.75)
    q = random_loop(np.random.default_rng(4), 2, 16, amplitude=0.4)
    conj, corr = bundle.derived.principal_split(q)
    total = conj.matrix + corr.matrix
    assert np.max(np.abs(total - bundle.derived.hessian(q).matrix)) < 1e-13


@pytest.mark.parametrize("s", [0.6, 0.75, 0.9])
@pytest.mark.parametrize("N", [16, 64])
def test_kappa_budget_holds(s, N):
    F = symplectic_action(quadratic_hamiltonian(), N)
    phi = SuperpositionMap(shear_chart(), s, N)
    q = random_loop(np.random.default_rng(5), 2, N, amplitude=0.4)
    row = kappa_bound_check(F, phi, q, s, hopm=HOPM)
    assert row["passed"]
    assert row["K_norm"] <= row["kappa"] + 1e-8


def test_certificate_passes_for_shear_pullback():
    F, phi = _setup(N=32)
    rng = np.random.default_rng(6)
    samples = [random_loop(rng, 2, 32, amplitude=0.4) for _ in range(2)]
    cert = certify_pullback(F, phi, 0.75, samples, N_sweep=(16, 32), hopm=HOPM)
    assert cert["verdict"] == "pass"
    assert cert["pullback"]["kappa_passed"]
    assert cert["pullback"]["tail_decaying"]
    assert cert["pullback"]["conjugated_fredholm"]["verdict"] == "fredholm"


def test_two_stage_pullback_matches_composite_chart():
    N, s = 32, 0.75
    F = symplectic_action(quadratic_hamiltonian(), N)
    phi = SuperpositionMap(shear_chart(), s, N)
    psi = SuperpositionMap(rotation_field_chart(0.5), s, N)
    q = random_loop(np.random.default_rng(7), 2, N, amplitude=0.3)
    staged = pull_back(pull_back(F, psi, s).derived, phi, s)
    direct = pull_back(F, compose(psi, phi), s)
    g_res = np.max(
        np.abs(staged.derived.gradient(q).coeffs - direct.derived.gradient(q).coeffs)
    )
    assert g_res < 1e-10
    rows = band_indices(N, 2, N // 2)
    diff = staged.derived.hessian(q).matrix - direct.derived.hessian(q).matrix
    assert np.max(np.abs(diff[np.ix_(rows, rows)])) < 1e-9


def test_gradient_helper_agrees_with_bundle():
    F, phi = _setup()
    q = random_loop(np.random.default_rng(8), 2, 16, amplitude=0.4)
    bundle = pull_back(F, phi, 0.75)
    direct = pull_back_gradient(F, phi, q)
    assert np.max(np.abs(direct.coeffs - bundle.derived.gradient(q).coeffs)) == 0.0
