"""The fourteen acceptance checks, shared by ``lzriccati report`` and the test suite.

Every check returns a :class:`CriterionResult` with the measured numbers, so a
failure is report content rather than an exception.
"""

import cmath
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import adiabatic, exact, markov, riccati, specfun
from .core import Params
from .integrate import (SolverConfig, solve_interaction, solve_markov_ode, solve_riccati,
                        solve_riccati_from_minus_infinity, solve_schroedinger)

LZ_A = math.exp(-math.pi / 8)                    # e^{-pi/8}, eps = 4
LZ_B = math.sqrt(-math.expm1(-math.pi / 4))      # sqrt(1 - e^{-pi/4})


@dataclass
class CriterionResult:
    id: int
    title: str
    passed: bool
    measured: dict
    runtime: float = 0.0
    notes: list = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        vals = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{status}] criterion {self.id:2d}: {self.title} ({vals}; {self.runtime:.2f}s)"


def _fmt(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def _circ(x):
    return abs(math.remainder(x, 2 * math.pi))


# shared runs, cached per configuration --------------------------------------

class _Runs:
    def __init__(self, config: SolverConfig):
        self.config = config
        self._cache = {}

    def get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def cfg(self, grid):
        c = self.config
        return SolverConfig(c.rel_tol, c.abs_tol, c.max_step, grid, c.max_steps, c.chirp_cap)

    def schroedinger(self, eps, tau0, grid=201):
        return self.get(("s", eps, tau0, grid),
                        lambda: solve_schroedinger(Params(eps, tau0), self.cfg(grid)))

    def interaction(self, eps, tau0, grid=201):
        return self.get(("i", eps, tau0, grid),
                        lambda: solve_interaction(Params(eps, tau0), self.cfg(grid)))

    def riccati(self, eps, tau0, grid=201):
        return self.get(("r", eps, tau0, grid),
                        lambda: solve_riccati(Params(eps, tau0), self.cfg(grid)))


# criteria -------------------------------------------------------------------

def c1(runs):
    tr = runs.schroedinger(4.0, 54.270)
    err = abs(abs(tr.a[-1]) - LZ_A)
    return err <= 5e-3, {"|a(tau0)|": float(abs(tr.a[-1])), "error": err, "tol": 5e-3}


def c2(runs):
    tr = runs.schroedinger(4.0, 54.270)
    err = abs(abs(tr.b[-1]) - LZ_B)
    return err <= 5e-3, {"|b(tau0)|": float(abs(tr.b[-1])), "error": err, "tol": 5e-3}


def c3(runs):
    p = Params(4.0, 8.581)
    tr = runs.schroedinger(4.0, 8.581)
    phi = exact.asymptotic_b_phase(p, convention="paper")
    phi_alt = exact.asymptotic_b_phase(p, convention="paper", constant=-1.25 * math.pi)
    d_ode = _circ(cmath.phase(tr.b[-1]) - phi)
    d_exact = _circ(cmath.phase(exact.amplitude_b_exact(p, p.tau0, convention="paper")) - phi)
    consts = _circ(phi - phi_alt) <= 1e-12
    d_consistent = _circ(cmath.phase(tr.b[-1]) - exact.asymptotic_b_phase(p))
    ok = d_ode <= 2e-2 and d_exact <= 2e-2 and consts
    return ok, {"d_ode": d_ode, "d_exact": d_exact, "constants_equal": consts,
                "d_ode_vs_corrected_phase": d_consistent, "tol": 2e-2}


def c4(runs):
    worst = 0.0
    ok = True
    for eps, tau0 in ((1.0, 20.0), (4.0, 54.27), (10.0, 20.0)):
        p = Params(eps, tau0)
        err = abs(markov.a_markov_final(p) - markov.lz_probability_amplitude(eps))
        ok &= err <= 2.0 / (eps * tau0)
        worst = max(worst, err * eps * tau0 / 2.0)
    p = Params(4.0, 54.27)
    _, a_m, _ = solve_markov_ode(p, runs.cfg(2))
    d_ode = abs(abs(a_m[-1]) - markov.a_markov_final(p))
    ok &= d_ode <= 1e-8
    return ok, {"worst_error/bound": worst, "markov_ode_vs_closed": d_ode, "tol": 1e-8}


def c5(runs):
    bm4 = markov.b_markov_asymptotic_modulus(4.0)
    gap4 = LZ_B - bm4
    p = Params(4.0, 54.27)
    F = abs(markov.fresnel_F(p))
    bm_num = F * math.exp(-0.5 * F * F)
    b_ode = abs(runs.schroedinger(4.0, 54.270).b[-1])
    bm100 = markov.b_markov_asymptotic_modulus(100.0)
    be100 = math.sqrt(-math.expm1(-math.pi / 100))
    rel100 = abs(be100 - bm100) / be100
    ok = abs(gap4 - 0.139) <= 2e-3 and abs(b_ode - bm_num) > 0.1 and rel100 <= 0.02
    return ok, {"|b_M|inf": bm4, "|b|inf": LZ_B, "gap_eps4 (EXPECTED)": gap4,
                "|b_M(tau0)|-|b_ode(tau0)|": bm_num - b_ode, "rel_gap_eps100": rel100}


def c6(runs):
    tr = runs.schroedinger(4.0, 8.581, 200)
    sol = runs.riccati(4.0, 8.581, 200)
    err = float(np.max(np.abs(tr.b + 1j * sol.eta * tr.a)))
    return err <= 1e-6, {"max|b + i eta a|": err, "tol": 1e-6}


def c7(runs):
    sol = runs.riccati(4.0, 8.581, 200)
    d = riccati.implicit_identity_check(sol)
    return d.modulus <= 1e-6, {"modulus_defect": d.modulus, "phase_defect": d.phase, "tol": 1e-6}


def c8(runs):
    worst = 0.0
    for eps in (1.0, 4.0):
        for tau0 in (5.0, 20.0):
            p = Params(eps, tau0)
            tau = np.linspace(0.0, tau0, 2001)
            worst = max(worst, float(np.max(np.abs(markov.connection_residual(p, tau)))))
    return worst <= 1e-10, {"max_residual": worst, "tol": 1e-10}


def c9(runs):
    _, d = riccati.nonlinearity_defect(Params(4.0, 10.0), runs.cfg(201))
    err = float(np.max(np.abs(d)))
    return err <= 1e-5, {"max_defect": err, "tol": 1e-5}


def c10(runs):
    p = Params(4.0, 8.581)
    tr = runs.schroedinger(4.0, 8.581, 100)
    with warnings.catch_warnings():
        warnings.simplefilter("error", specfun.AccuracyWarning)
        ex = exact.exact_trajectory(p, tr.tau)
    da = float(np.max(np.abs(ex.a - tr.a)))
    db = float(np.max(np.abs(ex.b - tr.b)))
    return max(da, db) <= 1e-6, {"max|da|": da, "max|db|": db, "tol": 1e-6}


def c11(runs):
    trs = [runs.schroedinger(4.0, 54.270), runs.schroedinger(4.0, 8.581),
           runs.schroedinger(4.0, 8.581, 200), runs.schroedinger(4.0, 8.581, 100),
           runs.interaction(4.0, 8.581)]
    for eps in (0.5, 1.0, 4.0, 10.0):
        for tau0 in (5.0, 20.0):
            trs.append(runs.schroedinger(eps, tau0))
            trs.append(runs.interaction(eps, tau0))
    worst = max(float(np.max(t.normalization_defect())) for t in trs)
    return worst <= 1e-9, {"max_defect": worst, "runs": len(trs), "tol": 1e-9}


def c12(runs):
    p = Params(4.0, 20.0)
    g = np.linspace(-20.0, -10.0, 401)
    grid = np.concatenate((np.linspace(-20.0, -10.0, 4001), [20.0]))
    tr = runs.schroedinger(4.0, 20.0, tuple(grid))
    a_ode = tr.a[:-1]
    tt = tr.tau[:-1]
    a_ad = np.array([adiabatic.propagate_adiabatic(p, t).a for t in tt])
    d_a = float(np.max(np.abs(a_ad - a_ode)))
    d_h = float(np.max(np.abs(adiabatic.h_bar_markov(p, g) - markov.h_markov(p, g))))
    # phase velocity d arg a/dtau = eps tau - Im eta with eta = i b/a
    eta = 1j * tr.b[:-1] / a_ode
    vel = p.epsilon * tt - eta.imag
    resid = vel - (-p.epsilon * np.abs(tt) - 1.0 / (2 * p.epsilon * np.abs(tt)))
    amp = 0.5 * float(resid.max() - resid.min())
    target = 1.0 / (2 * p.epsilon * p.tau0)
    rel = abs(amp - target) / target
    ok = d_a <= 1e-2 and d_h <= 1e-2 and rel <= 0.2
    return ok, {"max|a_ad - a_ode|": d_a, "max|Hbar - H_M|": d_h, "vel_amplitude": amp,
                "1/(2 eps tau0)": target}


def c13(runs):
    eps = 4.0
    sol = solve_riccati_from_minus_infinity(eps, 0.0, runs.cfg(4001))
    i = int(np.argmin(np.abs(sol.tau + 5.0)))
    d_r = abs(riccati.eta_large_negative(eps, sol.tau[i]) - sol.eta[i])
    # Taylor model around the crossing
    p = Params(eps, 20.0)
    g = np.linspace(-0.1, 0.1, 41)
    grid = tuple(np.concatenate(([-20.0], g, [20.0])))
    rs = solve_riccati(p, runs.cfg(grid))
    eta = rs.eta[1:-1]
    eta0 = eta[20]
    d1, d2 = riccati.eta_taylor0_exact(eta0, p)
    d_t = float(np.max(np.abs(eta0 + d1 * g + 0.5 * d2 * g * g - eta)))
    # additive iterate on [0, 10]
    p = Params(eps, 10.0)
    gp = np.linspace(0.0, 10.0, 201)
    rs = solve_riccati(p, runs.cfg(tuple(np.concatenate(([-10.0], gp)))))
    eta = rs.eta[1:]
    e_i = float(np.max(np.abs(riccati.eta_iterated_additive(p, gp) - eta)))
    e_m = float(np.max(np.abs(markov.eta_markov(p, gp) - eta)))
    ok = d_r <= 1e-3 and d_t <= 5e-3 and e_i < e_m
    return ok, {"|eta_R - eta|": d_r, "taylor_max": d_t, "iterate_max": e_i, "markov_max": e_m}


def c14(runs):
    z = np.array([0.5, 2.0, 3.0 + 1.0j, 5.0 * cmath.exp(0.25j * math.pi), -4.0 + 2.0j])
    d0 = max(abs(specfun.parabolic_cylinder_D(0.0, v) - cmath.exp(-v * v / 4)) /
             abs(cmath.exp(-v * v / 4)) for v in z)
    nu = specfun.lz_order(4.0)
    zz = 3.0 * cmath.exp(0.25j * math.pi)
    h = 1e-3
    # sixth-order central difference for D'
    f = [specfun.parabolic_cylinder_D(nu, zz + k * h) for k in (-3, -2, -1, 1, 2, 3)]
    deriv = (-f[0] + 9 * f[1] - 45 * f[2] + 45 * f[3] - 9 * f[4] + f[5]) / (60 * h)
    dn, dn1 = specfun.parabolic_cylinder_D_pair(nu, zz)
    rec = abs(deriv - 0.5 * zz * dn + dn1) / abs(dn1)
    y = 1.0 / 8.0
    g1 = cmath.exp(specfun.log_gamma(1 + 1j * y))
    g0 = cmath.exp(specfun.log_gamma(1j * y))
    fe = abs(g1 - 1j * y * g0) / abs(g1)
    mod = abs(abs(g1) ** 2 - math.pi * y / math.sinh(math.pi * y))
    tail = 0.0
    for eps, tau0 in ((1.0, 5.0), (4.0, 20.0), (4.0, 858.0855), (10.0, 20.0)):
        p = Params(eps, tau0)
        tail = max(tail, abs(specfun.fresnel_F_tail(p)) * eps * tau0)
    ok = d0 <= 1e-12 and rec <= 1e-9 and fe <= 1e-12 and mod <= 1e-12 and tail <= 1.0
    return ok, {"D0_rel": d0, "recurrence": rec, "gamma_feq": fe, "gamma_mod": mod,
                "tail*eps*tau0": tail}


CRITERIA = [
    (1, "exact LZ survival amplitude |a(tau0)|", c1),
    (2, "transition amplitude modulus |b(tau0)|", c2),
    (3, "transition phase arg b(tau0)", c3),
    (4, "Markov closed-form asymptote", c4),
    (5, "Markov failure for b (EXPECTED gap) and large-eps agreement", c5),
    (6, "Riccati bridge b = -i eta a", c6),
    (7, "implicit identity |I| = sqrt(1 - A^2)", c7),
    (8, "connection formula", c8),
    (9, "nonlinearity defect identity", c9),
    (10, "parabolic-cylinder solution vs ODE", c10),
    (11, "normalization of propagator runs", c11),
    (12, "adiabatic early-time account", c12),
    (13, "three-domain Riccati asymptotics", c13),
    (14, "special functions", c14),
]


def run_criterion(cid: int, config: SolverConfig = SolverConfig(), runs: _Runs = None) -> CriterionResult:
    runs = runs or _Runs(config)
    _, title, fn = CRITERIA[cid - 1]
    t0 = time.perf_counter()
    try:
        ok, measured = fn(runs)
        notes = []
    except Exception as exc:  # a crash is a failed criterion, not a crashed report
        ok, measured, notes = False, {}, [f"{type(exc).__name__}: {exc}"]
    return CriterionResult(cid, title, bool(ok), measured, time.perf_counter() - t0, notes)


def run_all(config: SolverConfig = SolverConfig()) -> list:
    runs = _Runs(config)
    return [run_criterion(cid, config, runs) for cid, _, _ in CRITERIA]
