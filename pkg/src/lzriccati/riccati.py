"""Quantities derived from the Riccati form eta = i b / a.

Amplitude reconstruction, the implicit-solution identity, the two iterated
approximants built on the Markov solution, and the closed forms that hold at
large negative times and around the crossing.
"""

import cmath
from dataclasses import dataclass

import numpy as np

from .core import ContractError, Params, Picture, Trajectory
from .integrate import RiccatiSolution, SolverConfig, integrate_trajectory
from .markov import eta_markov
from .quadrature import cumulative_quad
from .specfun import chirp_integral, fresnel_F

QUAD_TOL = 1e-12


def _start(sol: RiccatiSolution) -> float:
    return float(sol.solver_meta.get("start", -sol.params.tau0))


def reconstruct_amplitudes(sol: RiccatiSolution) -> Trajectory:
    """a = exp(-i eps (t_s^2 - tau^2)/2) exp(-H), b = -i eta a, with t_s = |start|."""
    eps = sol.params.epsilon
    t_s = -_start(sol)
    phase = -0.5 * eps * (t_s - sol.tau) * (t_s + sol.tau)
    a = np.exp(1j * phase - sol.H)
    b = -1j * sol.eta * a
    return Trajectory(sol.params, Picture.SCHROEDINGER, sol.tau, a, b,
                      dict(sol.solver_meta, method="riccati"))


def b_polar(sol: RiccatiSolution):
    """b written as sqrt(1 - A^2) exp(i varphi) exp(i psi)."""
    d = sol.decomposition
    return np.sqrt(np.clip(1.0 - d.A ** 2, 0.0, None)) * np.exp(1j * (d.varphi + d.psi))


def eta_modulus_from_A(A, tol: float = 1e-9):
    """|eta| = sqrt(1 - A^2)/A for 0 < A <= 1 (values up to 1 + tol are clipped)."""
    A_arr = np.asarray(A, dtype=float)
    if np.any(A_arr <= 0) or np.any(A_arr > 1.0 + tol):
        raise ContractError("A must lie in (0, 1]")
    A_arr = np.minimum(A_arr, 1.0)
    val = np.sqrt((1.0 - A_arr) * (1.0 + A_arr)) / A_arr
    return float(val) if np.ndim(A) == 0 else val


@dataclass(frozen=True)
class ImplicitDecomposition:
    """lambda = eps tau^2 - Im H and I = int exp(i lambda) A on the solution grid."""

    tau: np.ndarray
    lam: np.ndarray
    I_value: np.ndarray
    A: np.ndarray


@dataclass(frozen=True)
class IdentityDefects:
    modulus: float
    phase: float


def implicit_decomposition(sol: RiccatiSolution) -> ImplicitDecomposition:
    """The integral I is carried by the Riccati stepper, so it shares its accuracy."""
    lam = sol.params.epsilon * sol.tau ** 2 - sol.H.imag
    return ImplicitDecomposition(sol.tau, lam, sol.I, sol.decomposition.A)


def _circular(x):
    return np.abs(np.remainder(x + np.pi, 2 * np.pi) - np.pi)


def implicit_identity_check(sol: RiccatiSolution, skip: float = 0.1,
                            zero_tol: float = 1e-8) -> IdentityDefects:
    """max ||I| - sqrt(1 - A^2)| and max circular |phi_eta - (arg I - lambda)|.

    The phase comparison skips tau < start + ``skip`` and samples with
    |eta| < ``zero_tol``, where the phase of eta is undefined.
    """
    dec = implicit_decomposition(sol)
    mod = np.abs(np.abs(dec.I_value) - np.sqrt(np.clip(1.0 - dec.A ** 2, 0.0, None)))
    phi_implicit = np.angle(dec.I_value) - dec.lam
    mask = (sol.tau >= _start(sol) + skip) & (np.abs(sol.eta) >= zero_tol)
    ph = _circular(sol.decomposition.phi_eta - phi_implicit)[mask]
    return IdentityDefects(float(np.max(mod)), float(np.max(ph)) if ph.size else 0.0)


# iterated approximants -------------------------------------------------------

def _eta_markov_scalar(params):
    eps = params.epsilon

    def f(s):
        return cmath.exp(-1j * eps * s * s) * complex(chirp_integral(params, s))
    return f


def eta_iterated_exponential(params: Params, grid, config: SolverConfig = SolverConfig()):
    """eta_I = exp(-i eps tau^2 + H_M(tau)) int_{-tau0}^{tau} exp(i eps s^2 - H_M(s)) ds.

    Both integrals are carried as components of one adaptive stepper whose
    right-hand side uses the closed-form eta_M.
    """
    grid = np.asarray(grid, dtype=float)
    tol = 1e-12 * params.tau0
    if grid.ndim != 1 or grid.size == 0 or grid[0] < -params.tau0 - tol or grid[-1] > params.tau0 + tol:
        raise ContractError("grid must be a nonempty increasing sequence within [-tau0, tau0]")
    if np.any(np.diff(grid) < 0):
        raise ContractError("grid must be increasing")
    eps = params.epsilon
    eta_m = _eta_markov_scalar(params)

    def rhs(t, y):
        H, _ = y
        return [eta_m(t), cmath.exp(1j * eps * t * t - H)]

    grid = np.clip(grid, -params.tau0, params.tau0)
    res = integrate_trajectory(rhs, -params.tau0, [0j, 0j], grid[-1], grid, config, epsilon=eps)
    H, J = res.y[:, 0], res.y[:, 1]
    return np.exp(-1j * eps * grid ** 2 + H) * J


def _markov_square_integral(params, tau):
    """int_{-tau0}^{tau} eta_M^2 exp(i eps s^2) ds on an arbitrary grid."""
    eps = params.epsilon
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    order = np.argsort(tau, kind="stable")

    def f(s):
        return np.exp(-1j * eps * s * s) * chirp_integral(params, s) ** 2

    vals = cumulative_quad(f, tau[order], -params.tau0, epsilon=eps, abs_tol=QUAD_TOL,
                           rel_tol=QUAD_TOL)
    out = np.empty_like(vals)
    out[order] = vals
    return out


def eta_iterated_additive(params: Params, tau, simplified: bool = False):
    """eta_I = eta_M + exp(-i eps tau^2) int_{-tau0}^{tau} eta_M^2 exp(i eps s^2) ds.

    ``simplified=True`` applies the connection formula and drops the decaying
    term -eta_M(-|tau|), leaving exp(-i eps tau^2) [F + int ...]; it needs
    tau >= 3/eps.
    """
    eps = params.epsilon
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
    chirp = np.exp(-1j * eps * tau_arr ** 2)
    integral = _markov_square_integral(params, tau_arr)
    if simplified:
        if np.any(tau_arr < 3.0 / eps):
            raise ContractError("the simplified iterate needs tau >= 3/eps")
        val = chirp * (fresnel_F(params) + integral)
    else:
        val = eta_markov(params, tau_arr) + chirp * integral
    return complex(val[0]) if np.ndim(tau) == 0 else val


def iterate_gap(params: Params, grid, config: SolverConfig = SolverConfig()) -> float:
    """max |eta_I eta_M - eta_I^2| for the exponential iterate (measured, not asserted)."""
    eta_i = eta_iterated_exponential(params, grid, config)
    eta_m = eta_markov(params, np.asarray(grid, dtype=float))
    return float(np.max(np.abs(eta_i * (eta_m - eta_i))))


# nonlinearity defect ---------------------------------------------------------

def nonlinearity_defect(params: Params, config: SolverConfig = SolverConfig()):
    """(tau, eta - eta_M - exp(-i eps tau^2) int eta^2 exp(i eps s^2) ds).

    eta and the integral are integrated together so the integral shares the
    solver's accuracy. The residual vanishes identically for the exact eta.
    """
    eps = params.epsilon

    def rhs(t, y):
        eta, _ = y
        return [eta * eta - 2j * eps * t * eta + 1.0, eta * eta * cmath.exp(1j * eps * t * t)]

    grid = config.output_times(params)
    res = integrate_trajectory(rhs, -params.tau0, [0j, 0j], params.tau0, grid, config, epsilon=eps)
    eta, Q = res.y[:, 0], res.y[:, 1]
    return res.t, eta - eta_markov(params, res.t) - np.exp(-1j * eps * res.t ** 2) * Q


# closed forms in the three time domains --------------------------------------

def _check_negative(epsilon, tau):
    t = np.asarray(tau, dtype=float)
    if np.any(t >= 0) or np.any(epsilon * np.abs(t) < 3.0):
        raise ContractError("large-negative-time form needs tau < 0 and eps|tau| >= 3")


def eta_large_negative(epsilon: float, tau, strict: bool = True):
    """eta_R = 1/(2i eps tau) - 1/(4 eps^2 tau^3) - 1/(8i eps^3 tau^3)."""
    if strict:
        _check_negative(epsilon, tau)
    t = np.asarray(tau, dtype=float)
    val = 1.0 / (2j * epsilon * t) - 1.0 / (4 * epsilon ** 2 * t ** 3) - 1.0 / (8j * epsilon ** 3 * t ** 3)
    return complex(val) if val.ndim == 0 else val


def eta_large_negative_parts(epsilon: float, tau, strict: bool = True):
    """(Re eta_R, Im eta_R) = (-1/(4 eps^2 tau^3), -1/(2 eps tau) + 1/(8 eps^3 tau^3))."""
    if strict:
        _check_negative(epsilon, tau)
    t = np.asarray(tau, dtype=float)
    return -1.0 / (4 * epsilon ** 2 * t ** 3), -1.0 / (2 * epsilon * t) + 1.0 / (8 * epsilon ** 3 * t ** 3)


def eta_markov_large_negative_parts(epsilon: float, tau):
    """Markov counterpart at the same order: the cubic imaginary term is absent."""
    t = np.asarray(tau, dtype=float)
    return -1.0 / (4 * epsilon ** 2 * t ** 3), -1.0 / (2 * epsilon * t)


def eta_taylor0_exact(eta0: complex, params: Params):
    """(eta'(0), eta''(0)) = (1 + eta0^2, 2 eta0 (1 + eta0^2 - i eps)) from the Riccati equation."""
    eta0 = complex(eta0)
    first = 1.0 + eta0 * eta0
    return first, 2.0 * eta0 * (first - 1j * params.epsilon)


def riccati_residual(epsilon: float, tau, eta, deta):
    """eta^2 - eta' - 2i eps tau eta + 1."""
    return eta * eta - deta - 2j * epsilon * np.asarray(tau) * eta + 1.0
