"""Special functions: chirp integrals, complex log-Gamma, parabolic cylinder D.

The parabolic cylinder function D_nu(z) is evaluated for complex order and
argument. Inside the crossover radius it is built from its Maclaurin series
(the even/odd solution pair of Weber's equation with Gamma-function
prefactors), continued radially by Taylor steps of the same equation; outside
it uses the asymptotic expansions with optimal truncation.
"""

import cmath
import math
import warnings

import numpy as np
from scipy import special

from .core import Params

CROSSOVER = 12.0
DUAL_CHECK = (10.0, 14.0)
DUAL_TOL = 1e-8
# below this radius the recessive sector is also reached from the origin
SERIES_RADIUS = 5.0
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_SQRT_PI = math.sqrt(math.pi)


class AccuracyWarning(RuntimeWarning):
    """Two evaluation regimes of D_nu disagree beyond the stated tolerance."""


class SectorError(ValueError):
    pass


# chirp integrals ---------------------------------------------------------

def _half_chirp(x, epsilon):
    """int_0^x exp(i eps s^2) ds via real Fresnel integrals."""
    x = np.asarray(x, dtype=float)
    scale = math.sqrt(math.pi / (2.0 * epsilon))
    S, C = special.fresnel(x / scale)
    return scale * (C + 1j * S)


def chirp_integral(params: Params, tau):
    """C(tau) = int_{-tau0}^{tau} exp(i eps s^2) ds.

    Vectorized over ``tau``. Values with |tau| > tau0 are computed but lie
    outside the nominal domain.
    """
    eps, tau0 = params.epsilon, params.tau0
    tau_arr = np.asarray(tau, dtype=float)
    val = _half_chirp(tau_arr, eps) + _half_chirp(tau0, eps)
    val = np.where(tau_arr == -tau0, 0j, val)
    return complex(val) if np.ndim(tau) == 0 else val


def fresnel_F(params: Params) -> complex:
    """F(tau0) = int_{-tau0}^{tau0} exp(i eps s^2) ds."""
    return complex(2.0 * _half_chirp(params.tau0, params.epsilon))


def fresnel_F_limit(epsilon: float) -> complex:
    """Full-axis limit sqrt(i pi / eps)."""
    return cmath.sqrt(1j * math.pi / epsilon)


def fresnel_F_tail(params: Params) -> complex:
    """F(tau0) - sqrt(i pi/eps) = -2 int_{tau0}^inf exp(i eps s^2) ds.

    Evaluated directly from the modified Fresnel integral, so it keeps full
    relative accuracy where the difference F - F_inf would cancel.
    """
    r = math.sqrt(params.epsilon)
    fp, _ = special.modfresnelp(r * params.tau0)
    return complex(-2.0 * fp / r)


# log-Gamma ---------------------------------------------------------------

def log_gamma(z):
    """Principal branch of log Gamma(z) for complex z.

    Raises ``ValueError`` at the poles z = 0, -1, -2, ...
    """
    za = np.asarray(z, dtype=complex)
    pole = (za.imag == 0) & (za.real <= 0) & (za.real == np.round(za.real))
    if np.any(pole):
        raise ValueError("log_gamma has poles at nonpositive integers")
    out = special.loggamma(za)
    return complex(out) if np.ndim(z) == 0 else out


def _rgamma(z):
    return complex(special.rgamma(complex(z)))


# parabolic cylinder function ---------------------------------------------

def _taylor_step(z1, w, dw, h, c):
    """Advance a solution of w'' = (z^2/4 + c) w from z1 to z1 + h.

    Scaled coefficients d_k = c_k h^k obey
    (k+2)(k+1) d_{k+2} = h^2 [(z1^2/4 + c) d_k + (z1/2) h d_{k-1} + h^2 d_{k-2}/4].
    """
    a0 = (z1 * z1 * 0.25 + c) * h * h
    a1 = 0.5 * z1 * h ** 3
    a2 = 0.25 * h ** 4
    dm2, dm1, d0, d1 = 0j, 0j, w, dw * h
    sw = d0 + d1
    sd = d1
    k = 0
    small = 0
    while k < 400:
        d2 = (a0 * d0 + a1 * dm1 + a2 * dm2) / ((k + 2) * (k + 1))
        sw += d2
        sd += (k + 2) * d2
        mag = abs(d2)
        if mag <= 1e-17 * (abs(sw) + abs(sd)):
            small += 1
            if small >= 3:
                break
        else:
            small = 0
        dm2, dm1, d0, d1 = dm1, d0, d1, d2
        k += 1
    return sw, sd / h


def _march(z_from, w, dw, z_to, c):
    """Radial/straight-line Taylor continuation with steps bounded by 2/|z|."""
    z = z_from
    total = z_to - z_from
    dist = abs(total)
    if dist == 0:
        return w, dw
    unit = total / dist
    done = 0.0
    while done < dist:
        r = max(abs(z), abs(z + unit * min(1.0, dist - done)), 1.0)
        h = min(1.0, 2.0 / r, dist - done)
        w, dw = _taylor_step(z, w, dw, unit * h, c)
        done += h
        z = z_from + unit * done
    return w, dw


def _origin_values(nu):
    """D_nu(0) and D_nu'(0) from the Gamma-function prefactors."""
    d0 = 2.0 ** (nu / 2) * _SQRT_PI * _rgamma((1 - nu) / 2)
    d1 = -2.0 ** ((nu + 1) / 2) * _SQRT_PI * _rgamma(-nu / 2)
    return d0, d1


def _series_pair(nu, z):
    """(D_nu(z), D_nu'(z)) by continuation from the origin."""
    d0, d1 = _origin_values(nu)
    return _march(0j, d0, d1, z, -nu - 0.5)


def _asymptotic_sum(order, z2, sign, terms):
    """sum_s sign^s (order)_{2s} / (s! (2 z^2)^s), optimally truncated.

    ``terms`` caps the number of terms; None means optimal truncation.
    """
    total = 1.0 + 0j
    term = 1.0 + 0j
    prev = math.inf
    s = 1
    limit = terms if terms is not None else 200
    while s < limit:
        term = term * sign * (order + 2 * s - 2) * (order + 2 * s - 1) / (s * 2.0 * z2)
        mag = abs(term)
        if terms is None and mag >= prev:
            break
        total += term
        if terms is None and mag < 1e-17 * abs(total):
            break
        prev = mag
        s += 1
    return total


def cylinder_asymptotic_dominant(order, z, terms=None):
    """e^{-z^2/4} z^nu [1 - nu(nu-1)/(2z^2) + ...] for |arg z| < 3pi/4.

    ``terms=1`` gives the lowest-order form e^{-z^2/4} z^nu; the default uses
    optimal truncation of the series.
    """
    z = complex(z)
    if z == 0 or abs(cmath.phase(z)) >= 0.75 * math.pi:
        raise SectorError("dominant expansion needs |arg z| < 3pi/4")
    nu = complex(order)
    z2 = z * z
    series = _asymptotic_sum(-nu, z2, -1.0, terms)
    return cmath.exp(-z2 / 4 + nu * cmath.log(z)) * series


def _second_term(nu, z, sector_sign, terms):
    z2 = z * z
    rg = _rgamma(-nu)
    if rg == 0:
        return 0j
    series = _asymptotic_sum(nu + 1, z2, 1.0, terms)
    pref = -_SQRT_2PI * rg * cmath.exp(sector_sign * 1j * math.pi * nu)
    return pref * cmath.exp(z2 / 4 - (nu + 1) * cmath.log(z)) * series


def cylinder_asymptotic_subdominant_pair(order, z, terms=None):
    """Compound expansion for -5pi/4 < arg z < -pi/4 (principal arg in (-pi, -pi/4)).

    e^{-z^2/4} z^nu [..] + sqrt(2pi)/Gamma(-nu) e^{-i(nu+1)pi} e^{z^2/4} z^{-nu-1} [..]
    """
    z = complex(z)
    ph = cmath.phase(z) if z != 0 else 0.0
    if z == 0 or not (-math.pi < ph < -0.25 * math.pi):
        raise SectorError("compound expansion needs arg z in (-pi, -pi/4)")
    nu = complex(order)
    z2 = z * z
    first = cmath.exp(-z2 / 4 + nu * cmath.log(z)) * _asymptotic_sum(-nu, z2, -1.0, terms)
    return first + _second_term(nu, z, -1.0, terms)


def _asymptotic(nu, z):
    """Full asymptotic value for any sector (principal arg)."""
    ph = cmath.phase(z)
    z2 = z * z
    first = cmath.exp(-z2 / 4 + nu * cmath.log(z)) * _asymptotic_sum(-nu, z2, -1.0, None)
    if abs(ph) < 0.5 * math.pi:
        return first
    sector = 1.0 if ph > 0 else -1.0
    return first + _second_term(nu, z, sector, None)


def _asymptotic_pair(nu, z):
    """(D_nu, D_nu') from the asymptotic forms of D_nu and D_{nu+1}."""
    d = _asymptotic(nu, z)
    d1 = _asymptotic(nu + 1, z)
    return d, 0.5 * z * d - d1


def _recessive(z):
    return abs(z) > SERIES_RADIUS and abs(cmath.phase(z)) < 0.25 * math.pi


def _evaluate_pair(nu, z):
    """(D_nu(z), D_nu'(z)) choosing the regime by |z| and sector."""
    r = abs(z)
    if r >= CROSSOVER:
        d, dd = _asymptotic_pair(nu, z)
        if r <= DUAL_CHECK[1] and not _recessive(z):
            ds, dds = _series_pair(nu, z)
            _dual_check(nu, z, d, ds)
        return d, dd
    if _recessive(z):
        # integrate inward from the asymptotic region: stable for the recessive solution
        z_out = z * (CROSSOVER / r)
        w, dw = _asymptotic_pair(nu, z_out)
        return _march(z_out, w, dw, z, -nu - 0.5)
    d, dd = _series_pair(nu, z)
    if r >= DUAL_CHECK[0]:
        _dual_check(nu, z, _asymptotic(nu, z), d)
    return d, dd


def _dual_check(nu, z, a, b):
    scale = max(abs(a), abs(b))
    if scale > 0 and abs(a - b) > DUAL_TOL * scale:
        warnings.warn(f"D_nu regimes disagree at z={z:.6g}, nu={nu:.6g}: rel diff "
                      f"{abs(a - b) / scale:.2e}", AccuracyWarning, stacklevel=4)


def parabolic_cylinder_D(order, z):
    """D_nu(z) for complex order and argument (vectorized over z)."""
    nu = complex(order)
    if np.ndim(z) == 0:
        return _evaluate_pair(nu, complex(z))[0]
    za = np.asarray(z, dtype=complex)
    out = np.array([_evaluate_pair(nu, complex(v))[0] for v in za.ravel()], dtype=complex)
    return out.reshape(za.shape)


def parabolic_cylinder_D_pair(order, z):
    """(D_nu(z), D_{nu+1}(z)) from one evaluation, via D_{nu+1} = z D_nu/2 - D_nu'."""
    nu = complex(order)

    def one(v):
        d, dd = _evaluate_pair(nu, v)
        return d, 0.5 * v * d - dd

    if np.ndim(z) == 0:
        return one(complex(z))
    za = np.asarray(z, dtype=complex)
    pairs = [one(complex(v)) for v in za.ravel()]
    d = np.array([p[0] for p in pairs], dtype=complex).reshape(za.shape)
    d1 = np.array([p[1] for p in pairs], dtype=complex).reshape(za.shape)
    return d, d1


def lz_order(epsilon: float) -> complex:
    """nu = -1 - i/(2 eps)."""
    return complex(-1.0, -1.0 / (2.0 * epsilon))


def lz_weber_constant(epsilon: float) -> complex:
    """c = i/(2 eps) + 1/2 = -nu - 1/2."""
    return complex(0.5, 1.0 / (2.0 * epsilon))
