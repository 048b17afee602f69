"""Instantaneous eigenbasis and early-time adiabatic propagation.

The Hamiltonian [[-eps tau, 1], [1, eps tau]] has eigenvalues +-theta with
theta = sqrt((eps tau)^2 + 1) and eigenvectors u+- = N+-(v+-, 1),
v+- = -eps tau +- theta. For large negative times the transformation matrix G
is nearly constant, so the amplitudes in the eigenbasis only pick up the
phases exp(-+i chi) with chi = int theta.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import AmplitudePair, ContractError, Params, Picture

FROZEN_WINDOW = 3.0


@dataclass(frozen=True)
class Eigensystem:
    tau: float
    theta: float
    v_plus: float
    v_minus: float
    N_plus: float
    N_minus: float
    G: np.ndarray
    G_inv: np.ndarray

    @property
    def u_plus(self):
        return self.G[:, 0]

    @property
    def u_minus(self):
        return self.G[:, 1]


def hamiltonian(params: Params, tau: float) -> np.ndarray:
    et = params.epsilon * tau
    return np.array([[-et, 1.0], [1.0, et]])


def eigensystem(params: Params, tau: float) -> Eigensystem:
    """Eigenvalues, eigenvectors and the diabatic-to-adiabatic matrix G at ``tau``."""
    et = params.epsilon * float(tau)
    theta = math.hypot(et, 1.0)
    # v+ v- = -1; take the cancellation-free member first
    if et <= 0:
        v_plus = theta - et
        v_minus = -1.0 / v_plus
    else:
        v_minus = -et - theta
        v_plus = -1.0 / v_minus
    n_plus = 1.0 / math.hypot(1.0, v_plus)
    n_minus = 1.0 / math.hypot(1.0, v_minus)
    G = np.array([[v_plus * n_plus, v_minus * n_minus], [n_plus, n_minus]])
    d = v_plus - v_minus
    G_inv = np.array([[1.0 / (n_plus * d), -v_minus / (n_plus * d)],
                      [-1.0 / (n_minus * d), v_plus / (n_minus * d)]])
    return Eigensystem(float(tau), theta, v_plus, v_minus, n_plus, n_minus, G, G_inv)


def _antiderivative(eps, s):
    s = np.asarray(s, dtype=float)
    return 0.5 * s * np.hypot(eps * s, 1.0) + np.arcsinh(eps * s) / (2.0 * eps)


def chi(params: Params, tau):
    """chi(tau) = int_{-tau0}^{tau} theta, from the closed antiderivative."""
    eps = params.epsilon
    val = _antiderivative(eps, tau) - _antiderivative(eps, -params.tau0)
    return float(val) if np.ndim(tau) == 0 else val


def chi_asymptotic(params: Params, tau):
    """eps (tau0^2 - tau^2)/2 + ln(tau0/|tau|)/(2 eps) for large negative tau."""
    eps, tau0 = params.epsilon, params.tau0
    t = np.abs(np.asarray(tau, dtype=float))
    val = 0.5 * eps * (tau0 - t) * (tau0 + t) + np.log(tau0 / t) / (2.0 * eps)
    return float(val) if np.ndim(tau) == 0 else val


def frozen_window(params: Params):
    """(lo, hi) of the early-time window: -tau0 <= tau <= -max(3/eps, 1)."""
    return -params.tau0, -max(FROZEN_WINDOW / params.epsilon, 1.0)


def _check_window(params, tau):
    lo, hi = frozen_window(params)
    t = np.asarray(tau, dtype=float)
    if np.any(t > hi) or np.any(t < lo - 1e-12 * params.tau0):
        raise ContractError(f"tau must lie in the early-time window [{lo:.6g}, {hi:.6g}]")


def propagate_adiabatic(params: Params, tau: float, interference: bool = True) -> AmplitudePair:
    """Frozen-G propagation of a(-tau0)=1, b(-tau0)=0 to an early time ``tau``.

    (a, b) = G(tau) [G^-1_11(-tau0) e^{-i chi}, G^-1_21(-tau0) e^{+i chi}].
    ``interference=False`` drops the u- component, which removes the
    early-time oscillations.
    """
    _check_window(params, tau)
    start = eigensystem(params, -params.tau0)
    here = eigensystem(params, tau)
    c = chi(params, tau)
    at = start.G_inv[0, 0] * complex(math.cos(c), -math.sin(c))
    bt = start.G_inv[1, 0] * complex(math.cos(c), math.sin(c)) if interference else 0j
    a = here.G[0, 0] * at + here.G[0, 1] * bt
    b = here.G[1, 0] * at + here.G[1, 1] * bt
    return AmplitudePair(float(tau), complex(a), complex(b), Picture.SCHROEDINGER)


def h_bar_markov(params: Params, tau, interference: bool = True):
    """Exponent of the early-time closed form.

    i ln(tau0/|tau|)/(2 eps) + 1/(4 eps^2 tau0^2)
        - exp(i eps (tau0^2 - tau^2)) exp(i ln(tau0/|tau|)/eps) / (4 eps^2 tau0 |tau|)
    """
    eps, tau0 = params.epsilon, params.tau0
    t = np.abs(np.asarray(tau, dtype=float))
    log = np.log(tau0 / t)
    val = 0.5j * log / eps + 1.0 / (4 * eps ** 2 * tau0 ** 2)
    if interference:
        val = val - np.exp(1j * eps * (tau0 - t) * (tau0 + t) + 1j * log / eps) / (4 * eps ** 2 * tau0 * t)
    return complex(val) if np.ndim(tau) == 0 else val


def a_early_time_closed_form(params: Params, tau, interference: bool = True):
    """a = exp(-i eps (tau0^2 - tau^2)/2) exp(-H_bar)."""
    _check_window(params, tau)
    eps, tau0 = params.epsilon, params.tau0
    t = np.asarray(tau, dtype=float)
    val = np.exp(-0.5j * eps * (tau0 - t) * (tau0 + t) - h_bar_markov(params, tau, interference))
    return complex(val) if np.ndim(tau) == 0 else val


def nonadiabatic_coupling(params: Params, tau: float, h: float = None) -> float:
    """Spectral norm of G^-1 dG/dtau (central differences): the term the frozen-G step drops."""
    if h is None:
        h = 1e-4 / (params.epsilon * (abs(tau) + 1.0))
    dG = (eigensystem(params, tau + h).G - eigensystem(params, tau - h).G) / (2.0 * h)
    return float(np.linalg.norm(eigensystem(params, tau).G_inv @ dG, 2))
