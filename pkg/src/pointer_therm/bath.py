"""Drude-Lorentz bath: spectral density, Matsubara correlation function, kernel fit.

The bath correlation function C(tau) = kappa_r(tau) - i*kappa_i(tau) for
J(w) = 2*lam*gam*w / (w^2 + gam^2) has the exponential series

    C(tau) = lam*gam*(cot(beta*gam/2) - i) e^(-gam*tau)
           + (4*lam*gam/beta) sum_k nu_k e^(-nu_k*tau) / (nu_k^2 - gam^2),

with Matsubara frequencies nu_k = 2*pi*k/beta.  At high temperature the
k >= 2 terms decay much faster than everything else and are absorbed into a
delta-function terminator, giving the two-exponential-plus-delta form

    C(tau) ~ lam*(c1 e^(-gamma1*tau) + c2 e^(-gamma2*tau) + 2*c0*delta(tau))

used by the hierarchy engine.  The terminator weight c0 follows from the
cotangent partial-fraction identity, so the zero-frequency weight of the
kernel is preserved exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

POLE_TOL = 1e-9


@dataclass(frozen=True)
class BathParams:
    """Physical bath parameters: coupling strength, Drude rate, inverse temperature.

    lam = 0 is tolerated as the decoupled limit (the hierarchy engine's free
    precession case); gamma and beta must be strictly positive.
    """

    lam: float
    gamma: float
    beta: float

    def __post_init__(self):
        if self.lam < 0 or self.gamma <= 0 or self.beta <= 0:
            raise ParameterError("lam must be >= 0; gamma and beta strictly positive")
        # Matsubara pole avoidance: beta*gamma must not hit 2*pi*k
        x = self.beta * self.gamma / (2.0 * np.pi)
        k = round(x)
        if k >= 1 and abs(self.beta * self.gamma - 2.0 * np.pi * k) < POLE_TOL:
            raise ParameterError(
                f"beta*gamma = {self.beta * self.gamma} collides with Matsubara pole 2*pi*{k}"
            )

    def matsubara(self, k) -> np.ndarray:
        return 2.0 * np.pi * np.asarray(k, dtype=float) / self.beta


@dataclass(frozen=True)
class KernelExpansion:
    """Fitted kernel coefficients with lam factored out, plus the source parameters."""

    c0: float
    c1: complex
    c2: float
    gamma1: float
    gamma2: float
    params: BathParams


def spectral_density(omega, p: BathParams):
    """J(w) = 2*lam*gam*w / (w^2 + gam^2); odd in w, peak value lam at w = gam."""
    omega = np.asarray(omega, dtype=float)
    out = 2.0 * p.lam * p.gamma * omega / (omega**2 + p.gamma**2)
    return out if out.ndim else float(out)


def exact_correlation(tau, p: BathParams, K: int):
    """K-term Matsubara evaluation of C(tau) for tau >= 0; the fit oracle."""
    if K < 1:
        raise ParameterError("K must be at least 1")
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ParameterError("tau must be non-negative")
    cot = 1.0 / np.tan(0.5 * p.beta * p.gamma)
    out = p.lam * p.gamma * (cot - 1j) * np.exp(-p.gamma * tau)
    nu = p.matsubara(np.arange(1, K + 1))
    denom = nu**2 - p.gamma**2
    if np.any(np.abs(denom) < POLE_TOL):
        raise ParameterError("Matsubara frequency collides with gamma")
    terms = (4.0 * p.lam * p.gamma / p.beta) * nu / denom
    out = out + np.einsum("k,k...->...", terms, np.exp(-np.multiply.outer(nu, tau)))
    return out if out.ndim else complex(out)


def fit_kernel(p: BathParams) -> KernelExpansion:
    """Closed-form high-temperature decomposition: one Matsubara term plus terminator.

    gamma1 = gamma, c1 = gamma*(cot(beta*gamma/2) - i); gamma2 = nu_1 = 2*pi/beta,
    c2 = (4*gamma/beta)*nu_1/(nu_1^2 - gamma^2); c0 carries the integrated weight
    of all k >= 2 Matsubara terms.
    """
    if p.beta * p.gamma >= np.pi:
        warnings.warn(
            "beta*gamma >= pi: the one-Matsubara + terminator expansion assumes a "
            "relatively high temperature and may be inaccurate",
            stacklevel=2,
        )
    cot = 1.0 / np.tan(0.5 * p.beta * p.gamma)
    nu1 = 2.0 * np.pi / p.beta
    denom = nu1**2 - p.gamma**2
    if abs(denom) < POLE_TOL:
        raise ParameterError("nu_1 collides with gamma")
    c1 = p.gamma * (cot - 1j)
    c2 = (4.0 * p.gamma / p.beta) * nu1 / denom
    c0 = (2.0 / (p.beta * p.gamma) - cot) - (4.0 * p.gamma / p.beta) / denom
    return KernelExpansion(c0=float(c0), c1=complex(c1), c2=float(c2),
                           gamma1=float(p.gamma), gamma2=float(nu1), params=p)


def correlation_from_expansion(tau, e: KernelExpansion):
    """Exponential part of the fitted kernel, lam*(c1 e^(-g1 tau) + c2 e^(-g2 tau))."""
    tau = np.asarray(tau, dtype=float)
    lam = e.params.lam
    out = lam * (e.c1 * np.exp(-e.gamma1 * tau) + e.c2 * np.exp(-e.gamma2 * tau))
    return out if out.ndim else complex(out)


def validate_fit(e: KernelExpansion, tau_grid, K: int, eps_floor: float = 1e-12) -> float:
    """Max relative deviation of the fitted kernel from the K-term exact series.

    The delta term is excluded by requiring tau > 0 on the grid.
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    if tau_grid.size == 0:
        raise ParameterError("tau grid must not be empty")
    if np.any(tau_grid <= 0):
        raise ParameterError("tau grid must be strictly positive")
    if K < 10:
        raise ParameterError("K must be at least 10 for the oracle series")
    exact = exact_correlation(tau_grid, e.params, K)
    fit = correlation_from_expansion(tau_grid, e)
    scale = np.maximum(np.abs(exact), eps_floor)
    return float(np.max(np.abs(fit - exact) / scale))


def zero_frequency_weight(e: KernelExpansion) -> float:
    """Integrated real kernel weight of the fit, lam*(Re c1/g1 + c2/g2 + c0).

    The exact counterpart is 2*lam/(beta*gamma); the terminator is constructed
    so the two agree identically.
    """
    lam = e.params.lam
    return float(lam * (e.c1.real / e.gamma1 + e.c2 / e.gamma2 + e.c0))
