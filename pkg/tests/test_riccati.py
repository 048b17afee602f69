import math

import numpy as np
import pytest

from lzriccati import riccati
from lzriccati.core import ContractError, Params
from lzriccati.integrate import (SolverConfig, solve_riccati, solve_riccati_from_minus_infinity,
                                 solve_schroedinger)
from lzriccati.markov import eta_markov, markov_solution

LZ_A = math.exp(-math.pi / 8)


@pytest.fixture(scope="module")
def sol_8581():
    p = Params(4.0, 8.581)
    return p, solve_riccati(p, SolverConfig(grid=200))


@pytest.fixture(scope="module")
def sol_10():
    p = Params(4.0, 10.0)
    return p, solve_riccati(p, SolverConfig(grid=401))


def test_reconstruct_start(sol_8581):
    _, sol = sol_8581
    tr = riccati.reconstruct_amplitudes(sol)
    assert tr.a[0] == 1 and tr.b[0] == 0


def test_reconstruct_matches_schroedinger(sol_8581):
    p, sol = sol_8581
    tr = riccati.reconstruct_amplitudes(sol)
    ref = solve_schroedinger(p, SolverConfig(grid=200))
    assert np.max(np.abs(tr.a - ref.a)) <= 1e-6
    assert np.max(np.abs(tr.b - ref.b)) <= 1e-6
    assert np.max(tr.normalization_defect()) <= 1e-6


def test_b_polar_form(sol_8581):
    _, sol = sol_8581
    tr = riccati.reconstruct_amplitudes(sol)
    assert np.max(np.abs(riccati.b_polar(sol) - tr.b)) <= 1e-8


def test_eta_modulus_from_A():
    assert riccati.eta_modulus_from_A(1.0) == 0
    assert abs(riccati.eta_modulus_from_A(LZ_A) - 1.0923) <= 1e-4
    assert abs(riccati.eta_modulus_from_A(1 / math.sqrt(2)) - 1) <= 1e-15
    assert riccati.eta_modulus_from_A(1 + 1e-12) == 0
    vals = riccati.eta_modulus_from_A(np.array([1.0, 0.5]))
    assert vals.shape == (2,)
    with pytest.raises(ContractError):
        riccati.eta_modulus_from_A(0.0)
    with pytest.raises(ContractError):
        riccati.eta_modulus_from_A(1.1)


def test_implicit_decomposition_start(sol_8581):
    _, sol = sol_8581
    dec = riccati.implicit_decomposition(sol)
    assert dec.I_value[0] == 0 and dec.A[0] == 1
    assert dec.lam[0] == pytest.approx(4.0 * 8.581 ** 2, abs=1e-12)


def test_implicit_identity(sol_8581):
    _, sol = sol_8581
    d = riccati.implicit_identity_check(sol)
    assert d.modulus <= 1e-6
    assert d.phase <= 1e-6


def test_phase_identity_where_defined(sol_8581):
    _, sol = sol_8581
    dec = riccati.implicit_decomposition(sol)
    mask = sol.decomposition.A < 1 - 1e-6
    implicit = np.angle(dec.I_value) - dec.lam
    gap = np.remainder(sol.decomposition.phi_eta - implicit + np.pi, 2 * np.pi) - np.pi
    assert np.max(np.abs(gap[mask])) <= 1e-6


def test_iterated_exponential(sol_10):
    p, sol = sol_10
    eta_i = riccati.eta_iterated_exponential(p, sol.tau)
    assert eta_i[0] == 0
    pos = sol.tau >= 0
    eta_m = eta_markov(p, sol.tau)
    assert np.max(np.abs(eta_i - sol.eta)[pos]) <= np.max(np.abs(eta_m - sol.eta)[pos])


def test_iterated_exponential_residual():
    # eta_I' = -2i eps tau eta_I + 1 + eta_I eta_M
    p = Params(4.0, 10.0)
    rng = np.random.default_rng(11)
    # jittered centers keep the five-point stencils disjoint
    centers = np.linspace(-9.5, 9.5, 50) + rng.uniform(-0.1, 0.1, 50)
    h = 3e-4
    grid = np.concatenate([centers[:, None] + h * np.arange(-2, 3)[None, :]]).ravel()
    e = riccati.eta_iterated_exponential(p, grid).reshape(-1, 5)
    d1 = (e[:, 0] - 8 * e[:, 1] + 8 * e[:, 3] - e[:, 4]) / (12 * h)
    eta = e[:, 2]
    res = d1 - (-8j * centers * eta + 1 + eta * eta_markov(p, centers))
    assert np.max(np.abs(res)) <= 1e-5


def test_iterated_exponential_grid_contract():
    p = Params(4.0, 5.0)
    with pytest.raises(ContractError):
        riccati.eta_iterated_exponential(p, [-6.0, 0.0])
    with pytest.raises(ContractError):
        riccati.eta_iterated_exponential(p, [1.0, 0.0])


def test_iterate_gap_is_measured():
    gap = riccati.iterate_gap(Params(4.0, 5.0), np.linspace(-5, 5, 51))
    assert math.isfinite(gap) and gap > 0


def test_iterated_additive(sol_10):
    p, sol = sol_10
    assert riccati.eta_iterated_additive(p, -10.0) == 0
    i5 = int(np.argmin(np.abs(sol.tau - 5.0)))
    assert sol.tau[i5] == 5.0
    eta5 = sol.eta[i5]
    add = riccati.eta_iterated_additive(p, 5.0)
    assert abs(add - eta5) < abs(eta_markov(p, 5.0) - eta5)


def test_iterated_additive_simplified():
    p = Params(4.0, 10.0)
    tau = np.linspace(3.0, 10.0, 29)
    full = riccati.eta_iterated_additive(p, tau)
    simple = riccati.eta_iterated_additive(p, tau, simplified=True)
    # the two forms differ by exactly the dropped term eta_M(-tau), whose
    # modulus carries the start transient |tau|/tau0 on top of 1/(2 eps |tau|)
    gap = np.abs(full - simple)
    assert np.max(np.abs(gap - np.abs(eta_markov(p, -tau)))) <= 1e-10
    assert np.all(gap <= (1 + tau / p.tau0) / (2 * 4.0 * tau))
    with pytest.raises(ContractError):
        riccati.eta_iterated_additive(p, 0.5, simplified=True)


@pytest.mark.xfail(strict=True, reason="the dropped term reaches 0.0383 at tau=3.75 (tau0=10); "
                   "1/(2 eps tau) = 0.0333 omits the start transient")
def test_iterated_additive_simplified_literal_bound():
    p = Params(4.0, 10.0)
    tau = np.linspace(3.0, 10.0, 29)
    gap = np.abs(riccati.eta_iterated_additive(p, tau)
                 - riccati.eta_iterated_additive(p, tau, simplified=True))
    assert np.all(gap <= 1 / (2 * 4.0 * tau))


@pytest.mark.parametrize("tau0", [5.0, 10.0])
def test_nonlinearity_defect(tau0):
    _, defect = riccati.nonlinearity_defect(Params(4.0, tau0), SolverConfig(grid=201))
    assert np.max(np.abs(defect)) <= 1e-5


def test_relation_chain():
    p = Params(4.0, 10.0)
    cfg = SolverConfig(grid=201)
    tr = solve_schroedinger(p, cfg)
    sol = solve_riccati(p, cfg)
    assert np.max(np.abs(1j * tr.b / tr.a - sol.eta)) <= 1e-6


def test_large_negative_leading_term():
    lead = 1 / (2j * 4.0 * -10.0)
    assert abs(lead - 0.0125j) < 1e-17
    full = riccati.eta_large_negative(4.0, -10.0)
    assert abs(full - lead) <= 1 / (4 * 16 * 1000) + 1 / (8 * 64 * 1000)


def test_large_negative_against_numeric():
    sol = solve_riccati_from_minus_infinity(4.0, -5.0, SolverConfig(grid=2))
    assert sol.solver_meta["start"] == -40.0
    assert abs(riccati.eta_large_negative(4.0, -5.0) - sol.eta[-1]) <= 1e-3


def test_large_negative_parts():
    tau = np.array([-10.0, -3.0, -1.0])
    re, im = riccati.eta_large_negative_parts(4.0, tau)
    full = riccati.eta_large_negative(4.0, tau)
    assert np.max(np.abs(full - (re + 1j * im))) < 1e-15
    re_m, im_m = riccati.eta_markov_large_negative_parts(4.0, tau)
    assert np.all(re == re_m)
    assert np.max(np.abs(im - im_m - 1 / (8 * 64 * tau ** 3))) < 1e-15
    with pytest.raises(ContractError):
        riccati.eta_large_negative(4.0, -0.5)
    with pytest.raises(ContractError):
        riccati.eta_large_negative(4.0, 2.0)


def test_taylor0():
    assert riccati.eta_taylor0_exact(0j, Params(4.0, 5.0)) == (1, 0)
    p = Params(4.0, 8.581)
    h = 1e-3
    sol = solve_riccati(p, SolverConfig(grid=[-2 * h, -h, 0.0, h, 2 * h]))
    e = sol.eta
    d1 = (e[0] - 8 * e[1] + 8 * e[3] - e[4]) / (12 * h)
    first, second = riccati.eta_taylor0_exact(e[2], p)
    assert abs(d1 - first) <= 1e-5
    tau = np.linspace(-0.1, 0.1, 21)
    sol = solve_riccati(p, SolverConfig(grid=tau))
    model = e[2] + first * tau + 0.5 * second * tau ** 2
    assert np.max(np.abs(model - sol.eta)) <= 5e-3


def test_riccati_residual_helper():
    assert riccati.riccati_residual(4.0, 0.0, 0j, 1.0) == 0


def test_psi_unbounded_after_crossing():
    # eta ~ const * exp(-i eps tau^2) late, so psi runs off like -eps tau^2
    p = Params(4.0, 20.0)
    sol = solve_riccati(p, SolverConfig(grid=[-20.0, 0.0, 1.0, 20.0]))
    psi = sol.decomposition.psi
    assert psi[3] < psi[2] < psi[1]
    assert abs(psi[3] + 4.0 * 400.0) <= 10


@pytest.mark.xfail(strict=True, reason="psi decreases after the crossing (psi(20) = -1602, "
                   "psi(1) = -5.1); the increasing ordering has the opposite sign")
def test_psi_increasing_literal():
    p = Params(4.0, 20.0)
    psi = solve_riccati(p, SolverConfig(grid=[-20.0, 0.0, 1.0, 20.0])).decomposition.psi
    assert psi[3] > psi[2] > psi[1]


@pytest.mark.xfail(strict=True, reason="with a finite start psi swings to 1.24 rad before "
                   "tau=-1 (tau0=20); flat to 5e-3 needs the infinite-time start")
def test_psi_flat_before_crossing_literal():
    p = Params(4.0, 20.0)
    psi = solve_riccati(p, SolverConfig(grid=np.linspace(-20, -1, 200))).decomposition.psi
    assert np.max(np.abs(psi)) <= 5e-3


def test_markov_phase_decomposition_shares_convention():
    p = Params(4.0, 5.0)
    m = markov_solution(p, np.linspace(-5, 5, 11))
    sol = solve_riccati(p, SolverConfig(grid=11))
    assert m.phi_eta_M[0] == sol.decomposition.phi_eta[0] == math.pi / 2
