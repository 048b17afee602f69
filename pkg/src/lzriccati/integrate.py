"""Adaptive Dormand-Prince 5(4) integration of the Landau-Zener system.

All four formulations (Schroedinger picture, interaction picture, second
order equation for a, Riccati equation for eta) are driven by the same
stepper. The stepper works on short Python lists of complex numbers, which
is several times faster than numpy for two or three components, and it caps
the step at pi/(4*(eps*|tau|+1)) so the local chirp is always resolved.
"""

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import (ContractError, Params, PhaseDecomposition, Picture, Trajectory,
                   trajectory_to_schroedinger, unwrap_phase)


class IntegrationError(RuntimeError):
    """Step-count cap exceeded or step size underflow."""


class RiccatiBlowUpError(IntegrationError):
    def __init__(self, tau, modulus, cap):
        super().__init__(f"|eta| = {modulus:.3g} exceeds guard {cap:.3g} at tau = {tau:.6g}")
        self.tau = tau


class ValidityWarning(UserWarning):
    """Parameters outside the validated regime."""


EPS_VALIDATED = (0.25, 100.0)

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# error weights b - b_hat
E1, E3, E4, E5, E6, E7 = -71 / 57600, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40

# dense output: y(t + x h) = y + h * sum_j K_j * (P_j . [x, x^2, x^3, x^4])
DENSE_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


def chirp_step_cap(epsilon):
    """Step cap pi/(4(eps|tau|+1)): at least eight steps per local period."""
    q = math.pi / 4.0

    def cap(t):
        return q / (epsilon * abs(t) + 1.0)
    return cap


@dataclass
class ODEResult:
    t: np.ndarray
    y: np.ndarray           # shape (len(t), n)
    nsteps: int
    nrejected: int
    nfev: int
    step_t: np.ndarray = None
    step_y: np.ndarray = None


def dopri5(rhs, t0, y0, t1, t_eval, rtol=1e-11, atol=1e-13, cap=None, max_step=math.inf,
           max_steps=20_000_000, record_steps=False, monitor=None):
    """Integrate ``y' = rhs(t, y)`` from ``t0`` to ``t1``.

    ``rhs`` takes and returns lists of complex numbers. ``t_eval`` must be
    monotone in the direction of integration and lie within [t0, t1]; it is
    filled from the dense-output interpolant. ``cap(t)`` bounds the step size
    locally. ``monitor(t, y)`` is called after every accepted step.
    """
    t_eval = np.asarray(t_eval, dtype=float)
    n = len(y0)
    direction = 1.0 if t1 >= t0 else -1.0
    y = [complex(v) for v in y0]
    t = float(t0)
    out = np.empty((t_eval.size, n), dtype=complex)
    i_out = 0
    # points equal to t0
    while i_out < t_eval.size and t_eval[i_out] * direction <= t * direction:
        out[i_out] = y
        i_out += 1
    step_t = [t] if record_steps else None
    step_y = [list(y)] if record_steps else None
    span = abs(t1 - t0)
    if span == 0:
        return ODEResult(t_eval, out, 0, 0, 0, np.array(step_t or []), np.array(step_y or []))

    sqrt_n = math.sqrt(n)
    k1 = rhs(t, y)
    nfev = 1
    h = min(span, max_step, 1e-3 * span)
    if cap is not None:
        h = min(h, 0.1 * cap(t))
    nsteps = nrej = 0
    rejected_last = False
    while (t1 - t) * direction > 0:
        if nsteps + nrej >= max_steps:
            raise IntegrationError(f"step cap {max_steps} exceeded at t = {t:.6g}")
        h = min(h, max_step, abs(t1 - t))
        if cap is not None:
            h = min(h, cap(t), cap(t + direction * h))
        last = h >= abs(t1 - t)
        hs = direction * h
        k2 = rhs(t + C2 * hs, [yi + hs * (A21 * a) for yi, a in zip(y, k1)])
        k3 = rhs(t + C3 * hs, [yi + hs * (A31 * a + A32 * b) for yi, a, b in zip(y, k1, k2)])
        k4 = rhs(t + C4 * hs, [yi + hs * (A41 * a + A42 * b + A43 * c)
                               for yi, a, b, c in zip(y, k1, k2, k3)])
        k5 = rhs(t + C5 * hs, [yi + hs * (A51 * a + A52 * b + A53 * c + A54 * d)
                               for yi, a, b, c, d in zip(y, k1, k2, k3, k4)])
        k6 = rhs(t + hs, [yi + hs * (A61 * a + A62 * b + A63 * c + A64 * d + A65 * e)
                          for yi, a, b, c, d, e in zip(y, k1, k2, k3, k4, k5)])
        ynew = [yi + hs * (B1 * a + B3 * c + B4 * d + B5 * e + B6 * f)
                for yi, a, c, d, e, f in zip(y, k1, k3, k4, k5, k6)]
        t_new = t1 if last else t + hs
        k7 = rhs(t_new, ynew)
        nfev += 6
        acc = 0.0
        for yi, yn, a, c, d, e, f, g in zip(y, ynew, k1, k3, k4, k5, k6, k7):
            err = hs * (E1 * a + E3 * c + E4 * d + E5 * e + E6 * f + E7 * g)
            sc = atol + rtol * max(abs(yi), abs(yn))
            acc += (err.real * err.real + err.imag * err.imag) / (sc * sc)
        err_norm = math.sqrt(acc) / sqrt_n
        if err_norm > 1.0:
            nrej += 1
            h *= max(0.2, 0.9 * err_norm ** -0.2)
            rejected_last = True
            if h < 1e-15 * max(1.0, abs(t)):
                raise IntegrationError(f"step size underflow at t = {t:.6g}")
            continue
        # accepted: fill dense output inside (t, t_new]
        if i_out < t_eval.size and t_eval[i_out] * direction <= t_new * direction:
            j = i_out
            while j < t_eval.size and t_eval[j] * direction <= t_new * direction:
                j += 1
            x = (t_eval[i_out:j] - t) / hs
            powers = np.stack([x, x * x, x ** 3, x ** 4])
            K = np.array([k1, k2, k3, k4, k5, k6, k7])
            Q = K.T @ DENSE_P
            out[i_out:j] = np.asarray(y)[None, :] + hs * (Q @ powers).T
            if last:
                out[j - 1] = ynew if t_eval[j - 1] == t1 else out[j - 1]
            i_out = j
        t, y, k1 = t_new, ynew, k7
        nsteps += 1
        if record_steps:
            step_t.append(t)
            step_y.append(ynew)
        if monitor is not None:
            monitor(t, y)
        if err_norm == 0.0:
            fac = 10.0
        else:
            fac = min(10.0, 0.9 * err_norm ** -0.2)
        if rejected_last:
            fac = min(fac, 1.0)
            rejected_last = False
        h *= fac
    res = ODEResult(t_eval, out, nsteps, nrej, nfev)
    if record_steps:
        res.step_t = np.asarray(step_t)
        res.step_y = np.asarray(step_y, dtype=complex)
    return res


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances, step limits and output grid.

    ``grid`` is either an integer (number of uniform samples on
    [-tau0, tau0]) or an explicit increasing sequence of times.
    """

    rel_tol: float = 1e-11
    abs_tol: float = 1e-13
    max_step: float = math.inf
    grid: object = 201
    max_steps: int = 20_000_000
    chirp_cap: bool = True

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ContractError("tolerances must be positive")
        if not self.max_step > 0:
            raise ContractError("max_step must be positive")
        if isinstance(self.grid, (int, np.integer)):
            if self.grid < 2:
                raise ContractError("a uniform grid needs at least two points")
        else:
            g = np.asarray(self.grid, dtype=float)
            if g.ndim != 1 or g.size == 0:
                raise ContractError("explicit output grid must be a nonempty 1-d sequence")
            if np.any(np.diff(g) <= 0):
                raise ContractError("output grid must be strictly increasing")
            object.__setattr__(self, "grid", tuple(float(v) for v in g))

    def output_times(self, params: Params) -> np.ndarray:
        if isinstance(self.grid, (int, np.integer)):
            g = np.linspace(-params.tau0, params.tau0, int(self.grid))
        else:
            g = np.asarray(self.grid, dtype=float)
            tol = 1e-12 * params.tau0
            if g[0] < -params.tau0 - tol or g[-1] > params.tau0 + tol:
                raise ContractError("output grid must lie within [-tau0, tau0]")
            g = np.clip(g, -params.tau0, params.tau0)
        return g

    def meta(self) -> dict:
        return {"rel_tol": self.rel_tol, "abs_tol": self.abs_tol, "max_step": self.max_step,
                "max_steps": self.max_steps, "scheme": "dopri5", "chirp_cap": self.chirp_cap}


def _check_regime(params):
    lo, hi = EPS_VALIDATED
    if not lo <= params.epsilon <= hi:
        warnings.warn(f"epsilon = {params.epsilon} is outside the validated range [{lo}, {hi}]",
                      ValidityWarning, stacklevel=3)


def _run(rhs, params, config, y0, t_eval=None, t_start=None, t_end=None, **kw):
    t_start = -params.tau0 if t_start is None else t_start
    t_end = params.tau0 if t_end is None else t_end
    if t_eval is None:
        t_eval = config.output_times(params)
    cap = chirp_step_cap(params.epsilon) if config.chirp_cap else None
    return dopri5(rhs, t_start, y0, t_end, t_eval, rtol=config.rel_tol, atol=config.abs_tol,
                  cap=cap, max_step=config.max_step, max_steps=config.max_steps, **kw)


def _meta(config, res):
    m = config.meta()
    m.update(nsteps=res.nsteps, nrejected=res.nrejected, nfev=res.nfev)
    return m


def schroedinger_rhs(epsilon):
    def rhs(t, y):
        a, b = y
        et = epsilon * t
        return [1j * (et * a - b), -1j * (a + et * b)]
    return rhs


def interaction_rhs(epsilon):
    def rhs(t, y):
        a, b = y
        ph = cmath.exp(1j * epsilon * t * t)
        return [-1j * ph.conjugate() * b, -1j * ph * a]
    return rhs


def second_order_rhs(epsilon):
    def rhs(t, y):
        a, da = y
        return [da, -(epsilon * epsilon * t * t + 1.0 - 1j * epsilon) * a]
    return rhs


def riccati_rhs(epsilon):
    """State [eta, H, I] with H' = eta and I' = exp(i eps tau^2 - H)."""
    def rhs(t, y):
        eta, H, _ = y
        return [eta * eta - 2j * epsilon * t * eta + 1.0, eta,
                cmath.exp(1j * epsilon * t * t - H)]
    return rhs


def riccati_rotating_rhs(epsilon):
    """State [eta~, H, I] with eta~ = eta exp(i eps tau^2): the -2i eps tau eta term is removed."""
    def rhs(t, y):
        et, H, _ = y
        ph = cmath.exp(1j * epsilon * t * t)
        eta = et * ph.conjugate()
        return [et * eta + ph, eta, ph * cmath.exp(-H)]
    return rhs


def markov_rhs(epsilon):
    """State [a_M, eta_M] of the linearized (Markov) system."""
    def rhs(t, y):
        a, eta = y
        et = epsilon * t
        return [(1j * et - eta) * a, -2j * et * eta + 1.0]
    return rhs


def solve_schroedinger(params: Params, config: SolverConfig = SolverConfig(),
                       method: str = "rotating") -> Trajectory:
    """Integrate the coupled amplitude equations from a=1, b=0 at -tau0.

    ``method="rotating"`` (default) removes the known diagonal phase
    exp(+-i eps tau^2/2) analytically, integrates the remaining slow system
    and rotates back. Explicit RK schemes lose norm in proportion to
    rel_tol times the number of oscillation-resolving steps, so this keeps
    |a|^2 + |b|^2 at the 1e-11 level on long runs. ``method="direct"``
    integrates the equations exactly as written.
    """
    _check_regime(params)
    if method == "rotating":
        tr = trajectory_to_schroedinger(solve_interaction(params, config))
        meta = dict(tr.solver_meta, method="rotating")
        a, b = tr.a.copy(), tr.b.copy()
        # the start state is known exactly; drop the rotation roundoff there
        start = tr.tau == -params.tau0
        a[start], b[start] = 1.0, 0.0
        return Trajectory(params, Picture.SCHROEDINGER, tr.tau, a, b, meta)
    if method != "direct":
        raise ContractError(f"unknown method {method!r}")
    res = _run(schroedinger_rhs(params.epsilon), params, config, [1.0, 0.0])
    meta = _meta(config, res)
    meta["method"] = "direct"
    return Trajectory(params, Picture.SCHROEDINGER, res.t, res.y[:, 0], res.y[:, 1], meta)


def solve_interaction(params: Params, config: SolverConfig = SolverConfig()) -> Trajectory:
    """Interaction-picture amplitudes, started from exp(-i eps tau0^2/2)."""
    _check_regime(params)
    eps, tau0 = params.epsilon, params.tau0
    res = _run(interaction_rhs(eps), params, config, [cmath.exp(-0.5j * eps * tau0 * tau0), 0.0])
    return Trajectory(params, Picture.INTERACTION, res.t, res.y[:, 0], res.y[:, 1],
                      _meta(config, res))


@dataclass(frozen=True)
class SecondOrderSolution:
    params: Params
    tau: np.ndarray
    a: np.ndarray
    da: np.ndarray
    solver_meta: dict = field(default_factory=dict)

    @property
    def b(self) -> np.ndarray:
        """b = i*da/dtau + eps*tau*a."""
        return 1j * self.da + self.params.epsilon * self.tau * self.a

    def trajectory(self) -> Trajectory:
        return Trajectory(self.params, Picture.SCHROEDINGER, self.tau, self.a, self.b,
                          self.solver_meta)


def solve_second_order(params: Params, config: SolverConfig = SolverConfig()) -> SecondOrderSolution:
    """Integrate a'' + (eps^2 tau^2 + 1 - i eps) a = 0 with a'(-tau0) = -i eps tau0."""
    _check_regime(params)
    eps, tau0 = params.epsilon, params.tau0
    res = _run(second_order_rhs(eps), params, config, [1.0, -1j * eps * tau0])
    return SecondOrderSolution(params, res.t, res.y[:, 0], res.y[:, 1], _meta(config, res))


@dataclass(frozen=True)
class RiccatiSolution:
    """eta, its running integral H and I = int exp(i eps s^2 - H) on a grid.

    ``tau0_start`` is the actual start time (differs from ``params.tau0`` for
    the minus-infinity style start).
    """

    params: Params
    tau: np.ndarray
    eta: np.ndarray
    H: np.ndarray
    I: np.ndarray
    decomposition: PhaseDecomposition
    solver_meta: dict = field(default_factory=dict)

    @property
    def samples(self):
        return list(zip(self.tau, self.eta, self.H))


def blowup_guard(epsilon: float) -> float:
    """Ten times the asymptotic |eta| = sqrt(exp(pi/eps) - 1)."""
    return 10.0 * math.sqrt(math.expm1(math.pi / epsilon))


def eta_phase_grid(t, eta, initial_phase=math.pi / 2, zero_tol=1e-8):
    """Unwrapped arg(eta) on a grid fine enough for the (-pi, pi] rule."""
    return unwrap_phase(eta, initial_phase=initial_phase, zero_tol=zero_tol)


def _decompose(params, tau, eta, H, phi_eta, t_ref):
    eps = params.epsilon
    A = np.exp(-H.real)
    varphi = -0.5 * eps * (t_ref ** 2 - tau ** 2) - H.imag
    return PhaseDecomposition(tau=tau, A=A, varphi=varphi, phi_eta=phi_eta,
                              psi=phi_eta - math.pi / 2, gamma=-H.imag)


def solve_riccati(params: Params, config: SolverConfig = SolverConfig(), start=None,
                  eta_start=0j, stop=None, frame: str = "direct", guard=None) -> RiccatiSolution:
    """Integrate eta' = eta^2 - 2i eps tau eta + 1 with eta(start) = eta_start.

    By default ``start = -tau0`` and ``eta_start = 0``. H and I are carried as
    extra components of the state so they share the solver's accuracy.
    ``frame="rotating"`` integrates eta exp(i eps tau^2) instead, whose
    equation has no large linear term; use it for long runs (tau0 in the
    hundreds), where the direct form needs tens of millions of steps.
    Raises :class:`RiccatiBlowUpError` when |eta| exceeds ``guard`` (default
    :func:`blowup_guard`). Finite-tau0 interference can drive |a| close to
    zero at small eps, so a physical |eta| may exceed the default; pass a
    larger guard (or ``math.inf``) there.
    """
    if frame not in ("direct", "rotating"):
        raise ContractError(f"unknown frame {frame!r}")
    _check_regime(params)
    eps = params.epsilon
    t_start = -params.tau0 if start is None else float(start)
    t_stop = params.tau0 if stop is None else float(stop)
    guard = blowup_guard(eps) if guard is None else float(guard)

    def monitor(t, y):
        m = abs(y[0])
        if m > guard or m != m:
            raise RiccatiBlowUpError(t, m, guard)

    t_eval = config.output_times(params)
    t_eval = t_eval[(t_eval >= t_start) & (t_eval <= t_stop)]
    rotating = frame == "rotating"
    if rotating:
        y0 = complex(eta_start) * cmath.exp(1j * eps * t_start * t_start)
        res = _run(riccati_rotating_rhs(eps), params, config, [y0, 0.0, 0.0], t_eval=t_eval,
                   t_start=t_start, t_end=t_stop, record_steps=True, monitor=monitor)
        eta = res.y[:, 0] * np.exp(-1j * eps * res.t ** 2)
    else:
        res = _run(riccati_rhs(eps), params, config, [complex(eta_start), 0.0, 0.0], t_eval=t_eval,
                   t_start=t_start, t_end=t_stop, record_steps=True, monitor=monitor)
        eta = res.y[:, 0]
    H, I = res.y[:, 1], res.y[:, 2]
    # unwrap on the merged set of accepted step points (spaced below
    # pi/(2 eps|tau| + 2)) and output points, then keep the output entries
    tt = np.concatenate((res.step_t, res.t))
    ee = np.concatenate((res.step_y[:, 0], res.y[:, 0]))
    order = np.argsort(tt, kind="stable")
    merged = eta_phase_grid(tt[order], ee[order])
    if rotating:
        # the chirp is removed analytically; put the first defined sample nearest pi/2
        merged = merged - eps * tt[order] ** 2
        defined = np.flatnonzero(np.abs(ee[order]) > 1e-8)
        if defined.size:
            k = round((math.pi / 2 - merged[defined[0]]) / (2 * math.pi))
            merged = merged + 2 * math.pi * k
            merged[:defined[0]] = math.pi / 2
        else:
            merged[:] = math.pi / 2
    pos = np.empty_like(order)
    pos[order] = np.arange(order.size)
    phi = merged[pos[res.step_t.size:]]
    dec = _decompose(params, res.t, eta, H, phi, -t_start)
    meta = _meta(config, res)
    meta.update(start=t_start, guard=guard, frame=frame)
    return RiccatiSolution(params, res.t, eta, H, I, dec, meta)


def minus_infinity_start(epsilon: float) -> tuple:
    """Operational start for the 'from -infinity' initial condition.

    Returns ``(tau_start, eta_start)`` with tau_start = -max(40, 20/eps) and
    eta seeded with the leading large-negative-time form 1/(2 i eps tau).
    """
    t = -max(40.0, 20.0 / epsilon)
    return t, 1.0 / (2j * epsilon * t)


def solve_riccati_from_minus_infinity(epsilon: float, tau_end: float,
                                      config: SolverConfig = SolverConfig()) -> RiccatiSolution:
    """Riccati solution approximating the start at tau = -infinity."""
    t_start, eta0 = minus_infinity_start(epsilon)
    params = Params(epsilon, max(abs(t_start), abs(tau_end)))
    if isinstance(config.grid, (int, np.integer)):
        grid = np.linspace(t_start, tau_end, int(config.grid))
        config = SolverConfig(config.rel_tol, config.abs_tol, config.max_step, grid,
                              config.max_steps, config.chirp_cap)
    return solve_riccati(params, config, start=t_start, eta_start=eta0, stop=tau_end)


def solve_markov_ode(params: Params, config: SolverConfig = SolverConfig()):
    """Direct integration of a_M' = (i eps tau - eta_M) a_M, eta_M' = -2i eps tau eta_M + 1.

    Returns ``(tau, a_M, eta_M)``.
    """
    res = _run(markov_rhs(params.epsilon), params, config, [1.0, 0.0])
    return res.t, res.y[:, 0], res.y[:, 1]


def integrate_trajectory(rhs, t0, y0, t1, t_eval, config: SolverConfig = SolverConfig(), epsilon=None):
    """Generic entry point used for time-reversal and custom initial data."""
    cap = chirp_step_cap(epsilon) if (epsilon and config.chirp_cap) else None
    return dopri5(rhs, t0, y0, t1, t_eval, rtol=config.rel_tol, atol=config.abs_tol, cap=cap,
                  max_step=config.max_step, max_steps=config.max_steps)
