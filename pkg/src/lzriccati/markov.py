"""Markov approximant: the Riccati equation without its quadratic term.

eta_M(tau) = exp(-i eps tau^2) C(tau) with C the chirp integral from -tau0,
and a_M = exp(-i eps (tau0^2 - tau^2)/2) exp(-H_M), H_M = int eta_M.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import ContractError, Params, unwrap_phase
from .quadrature import cumulative_quad
from .specfun import chirp_integral, fresnel_F

QUAD_TOL = 1e-12


def _chirp_phase(eps, tau):
    return np.exp(-1j * eps * np.asarray(tau, dtype=float) ** 2)


def eta_markov(params: Params, tau):
    """eta_M = exp(-i eps tau^2) int_{-tau0}^{tau} exp(i eps s^2) ds."""
    val = _chirp_phase(params.epsilon, tau) * chirp_integral(params, tau)
    return complex(val) if np.ndim(tau) == 0 else val


def _sorted_cumulative(f, params, tau):
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
    order = np.argsort(tau_arr, kind="stable")
    x = tau_arr[order]
    start = min(-params.tau0, x[0])
    vals = cumulative_quad(f, x, start, epsilon=params.epsilon, abs_tol=QUAD_TOL,
                           rel_tol=QUAD_TOL)
    if start < -params.tau0:
        # grid extends below -tau0: shift the origin of integration
        vals = vals - cumulative_quad(f, [-params.tau0], start, epsilon=params.epsilon,
                                      abs_tol=QUAD_TOL, rel_tol=QUAD_TOL)[0]
    out = np.empty_like(vals)
    out[order] = vals
    return out


def h_markov(params: Params, tau):
    """H_M(tau) = int_{-tau0}^{tau} eta_M, by adaptive Gauss-Kronrod quadrature."""
    out = _sorted_cumulative(lambda s: eta_markov(params, s), params, tau)
    return complex(out[0]) if np.ndim(tau) == 0 else out


def _quadratic_phase(eps, tau0, tau):
    """-eps (tau0^2 - tau^2)/2 written to avoid cancellation."""
    tau = np.asarray(tau, dtype=float)
    return -0.5 * eps * (tau0 - tau) * (tau0 + tau)


def a_markov(params: Params, tau, H=None):
    """a_M = exp(-i eps (tau0^2 - tau^2)/2) exp(-H_M)."""
    if H is None:
        H = h_markov(params, tau)
    val = np.exp(1j * _quadratic_phase(params.epsilon, params.tau0, tau) - H)
    return complex(val) if np.ndim(tau) == 0 else val


def a_markov_interaction(params: Params, tau, H=None):
    """Interaction-picture variant exp(-i eps tau^2/2) a_M."""
    return np.exp(-0.5j * params.epsilon * np.asarray(tau, dtype=float) ** 2) * a_markov(params, tau, H)


def b_markov(params: Params, tau, H=None):
    """b_M = -i eta_M a_M."""
    val = -1j * eta_markov(params, tau) * a_markov(params, tau, H)
    return complex(val) if np.ndim(tau) == 0 else val


@dataclass(frozen=True)
class MarkovSolution:
    params: Params
    tau: np.ndarray
    eta_M: np.ndarray
    H_M: np.ndarray

    @property
    def a_M(self):
        return a_markov(self.params, self.tau, self.H_M)

    @property
    def b_M(self):
        return -1j * self.eta_M * self.a_M

    @property
    def A_M(self):
        return np.exp(-self.H_M.real)

    @property
    def varphi_M(self):
        return _quadratic_phase(self.params.epsilon, self.params.tau0, self.tau) - self.H_M.imag

    @property
    def phi_eta_M(self):
        return unwrap_phase(self.eta_M, math.pi / 2, zero_tol=1e-8)


def markov_solution(params: Params, tau) -> MarkovSolution:
    tau = np.asarray(tau, dtype=float)
    return MarkovSolution(params, tau, eta_markov(params, tau), h_markov(params, tau))


def connection_residual(params: Params, tau):
    """eta_M(tau) + eta_M(-tau) - F(tau0) exp(-i eps tau^2)."""
    tau = np.asarray(tau, dtype=float)
    F = fresnel_F(params)
    val = eta_markov(params, tau) + eta_markov(params, -tau) - F * _chirp_phase(params.epsilon, tau)
    return complex(val) if val.ndim == 0 else val


def stueckelberg_factorization(params: Params, tau: float, H_negative=None):
    """(a_M(-tau), exp(-F conj(C(tau) - C(0)))) for tau > 0.

    Their product equals a_M(tau).
    """
    if not tau > 0:
        raise ContractError("stueckelberg_factorization needs tau > 0")
    F = fresnel_F(params)
    inner = np.conj(chirp_integral(params, tau) - chirp_integral(params, 0.0))
    a_neg = a_markov(params, -tau, H_negative)
    return complex(a_neg), complex(np.exp(-F * inner))


def a_markov_final(params: Params) -> float:
    """exp(-|F(tau0)|^2/2), the Markov value of a(tau0)."""
    return math.exp(-0.5 * abs(fresnel_F(params)) ** 2)


def lz_probability_amplitude(epsilon: float) -> float:
    """exp(-pi/(2 eps))."""
    return math.exp(-math.pi / (2.0 * epsilon))


def b_markov_asymptotic_modulus(epsilon: float) -> float:
    """sqrt(pi/eps) exp(-pi/(2 eps)), the tau0 -> infinity limit of |b_M(tau0)|."""
    return math.sqrt(math.pi / epsilon) * math.exp(-math.pi / (2.0 * epsilon))


@dataclass(frozen=True)
class NegativeTimeApproximants:
    tau: np.ndarray
    eta_approx: np.ndarray
    H_approx: np.ndarray
    phase_velocity: np.ndarray
    A_approx: np.ndarray


def negative_time_region(params: Params):
    """Times where the large-negative-time forms are used: eps|tau| >= 3 and |tau| >= 1."""
    return -params.tau0, -max(3.0 / params.epsilon, 1.0)


def negative_time_approximants(params: Params, tau, strict=True) -> NegativeTimeApproximants:
    """Large-negative-time closed forms for eta_M, H_M, the phase velocity and A_M."""
    eps, tau0 = params.epsilon, params.tau0
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    lo, hi = negative_time_region(params)
    if strict and (np.any(tau > hi) or np.any(tau < lo - 1e-12 * tau0)):
        raise ContractError(f"negative-time approximants need {lo} <= tau <= {hi}")
    t = np.abs(tau)
    osc = np.exp(1j * eps * (tau0 - t) * (tau0 + t))
    eta = 0.5j / eps * (1.0 / t - osc / tau0)
    # int_{-tau0}^{-|tau|} ds/|s| = ln(tau0/|tau|)
    H = 0.5j / eps * np.log(tau0 / t) + 1.0 / (4 * eps ** 2 * tau0 ** 2) - osc / (4 * eps ** 2 * tau0 * t)
    vel = -eps * t - 1.0 / (2 * eps * t) + np.cos(eps * (tau0 - t) * (tau0 + t)) / (2 * eps * tau0)
    # int_{-tau0}^{-|tau|} sin(eps(tau0^2 - s^2)) ds = Im[exp(i eps tau0^2) conj(C(-|tau|))]
    sin_int = np.imag(cmath.exp(1j * eps * tau0 * tau0) * np.conj(chirp_integral(params, -t)))
    A = np.exp(-sin_int / (2 * eps * tau0))
    return NegativeTimeApproximants(tau, eta, H, vel, A)


def eta_markov_taylor0(params: Params):
    """(eta_M(0), eta_M'(0), eta_M''(0)) = (F/2, 1, -i eps F)."""
    F = fresnel_F(params)
    return F / 2, 1.0 + 0j, -1j * params.epsilon * F


def taylor_model(coeffs, tau):
    v, d1, d2 = coeffs
    tau = np.asarray(tau, dtype=float)
    return v + d1 * tau + 0.5 * d2 * tau ** 2
