"""Exact solution in terms of parabolic cylinder functions.

With z = sqrt(2 eps) tau e^{i pi/4} the amplitude a obeys Weber's equation
with order nu = -1 - i/(2 eps), so

    a = A+ D_nu(z) + A- D_nu(-z),
    b = sqrt(2 eps) e^{-i pi/4} [A+ D_{nu+1}(z) - A- D_{nu+1}(-z)].

The prefactor of b follows from b = i da/dtau + eps tau a. Setting
``convention="paper"`` flips its sign (and the asymptotic phase by pi) to
reproduce the literal published expressions, which do not satisfy the
amplitude equations; see the notes in the README.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import Params, Picture, Trajectory
from .specfun import log_gamma, lz_order, parabolic_cylinder_D_pair

CONVENTIONS = ("consistent", "paper")


class DegenerateError(ValueError):
    pass


def _check_convention(convention):
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")


def scale_z(params: Params, tau):
    """z = sqrt(2 eps) tau e^{i pi/4}; arg z is pi/4 for tau > 0 and -3pi/4 for tau < 0."""
    s = math.sqrt(params.epsilon)
    tau_arr = np.asarray(tau, dtype=float)
    z = s * tau_arr * (1.0 + 1.0j)
    return complex(z) if np.ndim(tau) == 0 else z


def dz_dtau(params: Params) -> complex:
    return math.sqrt(2.0 * params.epsilon) * cmath.exp(0.25j * math.pi)


@dataclass(frozen=True)
class CylinderCoefficients:
    A_plus: complex
    A_minus: complex
    determinant_M: complex
    params: Params


@dataclass(frozen=True)
class _Boundary:
    nu: complex
    z0: complex
    d_p: complex      # D_nu(z0)
    d1_p: complex     # D_{nu+1}(z0)
    d_m: complex      # D_nu(-z0)
    d1_m: complex     # D_{nu+1}(-z0)

    @property
    def M(self):
        return self.d_m * self.d1_p + self.d_p * self.d1_m


def _boundary(params):
    nu = lz_order(params.epsilon)
    z0 = scale_z(params, params.tau0)
    d_p, d1_p = parabolic_cylinder_D_pair(nu, z0)
    d_m, d1_m = parabolic_cylinder_D_pair(nu, -z0)
    return _Boundary(nu, z0, d_p, d1_p, d_m, d1_m)


def coefficients_general(a0: complex, a0_slope: complex, params: Params,
                         threshold: float = 1e-300) -> CylinderCoefficients:
    """Match a(-z0) = a0 and da/dz(-z0) = a0_slope.

    The slope is taken with respect to z. The data a0=1, slope=-z0/2 (that
    is da/dtau = -i eps tau0) reproduce A+- = D_{nu+1}(+-z0)/M.
    """
    bd = _boundary(params)
    M = bd.M
    if abs(M) <= threshold:
        raise DegenerateError(f"determinant |M| = {abs(M):.3g} below threshold")
    s = a0_slope + 0.5 * bd.z0 * a0
    A_plus = (a0 * bd.d1_p - bd.d_p * s) / M
    A_minus = (bd.d_m * s + bd.d1_m * a0) / M
    return CylinderCoefficients(complex(A_plus), complex(A_minus), complex(M), params)


def lz_coefficients(params: Params) -> CylinderCoefficients:
    """Coefficients for a(-tau0) = 1, b(-tau0) = 0."""
    bd = _boundary(params)
    M = bd.M
    if M == 0:
        raise DegenerateError("determinant vanishes")
    return CylinderCoefficients(complex(bd.d1_p / M), complex(bd.d1_m / M), complex(M), params)


def amplitudes_from_coefficients(coeffs: CylinderCoefficients, tau, convention="consistent"):
    """(a, b) at ``tau`` for the given coefficients."""
    _check_convention(convention)
    params = coeffs.params
    nu = lz_order(params.epsilon)
    z = scale_z(params, tau)
    dp, d1p = parabolic_cylinder_D_pair(nu, z)
    dm, d1m = parabolic_cylinder_D_pair(nu, -z)
    a = coeffs.A_plus * dp + coeffs.A_minus * dm
    pref = math.sqrt(2.0 * params.epsilon) * cmath.exp(-0.25j * math.pi)
    if convention == "paper":
        pref = -pref
    b = pref * (coeffs.A_plus * d1p - coeffs.A_minus * d1m)
    return a, b


def amplitude_a_exact(params: Params, tau):
    """a(tau) = [D_{nu+1}(z0) D_nu(z) + D_{nu+1}(-z0) D_nu(-z)] / M."""
    return amplitudes_from_coefficients(lz_coefficients(params), tau)[0]


def amplitude_b_exact(params: Params, tau, convention="consistent"):
    """b(tau) = s sqrt(2 eps) e^{-i pi/4} [D_{nu+1}(z0) D_{nu+1}(z) - D_{nu+1}(-z0) D_{nu+1}(-z)] / M.

    s = +1 for ``convention="consistent"`` and -1 for ``"paper"``.
    """
    return amplitudes_from_coefficients(lz_coefficients(params), tau, convention)[1]


def eta_exact(params: Params, tau, convention="consistent"):
    """eta = i b / a."""
    a, b = amplitudes_from_coefficients(lz_coefficients(params), tau, convention)
    return 1j * b / a


def exact_trajectory(params: Params, tau) -> Trajectory:
    tau = np.asarray(tau, dtype=float)
    a, b = amplitudes_from_coefficients(lz_coefficients(params), tau)
    return Trajectory(params, Picture.SCHROEDINGER, tau, a, b, {"method": "parabolic-cylinder"})


# asymptotic limits -----------------------------------------------------------

def _wrap(x):
    """Reduce to (-pi, pi]."""
    y = math.remainder(x, 2.0 * math.pi)
    return math.pi if y == -math.pi else y


def arg_gamma_lz(epsilon: float) -> float:
    """arg Gamma(1 + i/(2 eps))."""
    return log_gamma(complex(1.0, 1.0 / (2.0 * epsilon))).imag


def asymptotic_a(params: Params) -> float:
    """exp(-pi/(2 eps))."""
    return math.exp(-math.pi / (2.0 * params.epsilon))


def asymptotic_b_modulus(params: Params) -> float:
    return math.sqrt(-math.expm1(-math.pi / params.epsilon))


def _phase_body(params):
    eps, tau0 = params.epsilon, params.tau0
    return -eps * tau0 * tau0 - math.log(math.sqrt(2.0 * eps) * tau0) / eps + arg_gamma_lz(eps)


def asymptotic_b_phase(params: Params, convention="consistent", constant=None) -> float:
    """Asymptotic phase of b(tau0), reduced to (-pi, pi].

    ``"paper"``: 3pi/4 - eps tau0^2 - ln(sqrt(2 eps) tau0)/eps + arg Gamma(1 + i/(2eps)).
    The equivalent constant -5pi/4 can be selected with ``constant``.
    ``"consistent"``: the same with -pi/4, which is the phase the amplitude
    equations actually produce.
    """
    _check_convention(convention)
    if constant is None:
        constant = 0.75 * math.pi if convention == "paper" else -0.25 * math.pi
    return _wrap(constant + _phase_body(params))


def asymptotic_b(params: Params) -> complex:
    return asymptotic_b_modulus(params) * cmath.exp(1j * asymptotic_b_phase(params))


def asymptotic_eta(params: Params) -> complex:
    """i b_inf / a_inf with a_inf real and positive."""
    return 1j * asymptotic_b(params) / asymptotic_a(params)


def asymptotic_eta_modulus(params: Params) -> float:
    return asymptotic_b_modulus(params) / asymptotic_a(params)
