"""Closed-form spin Wigner densities and their Gaussian-smeared forms.

The free-spin quasiprobability density of the spin vector is purely
distributional: a derivative-of-delta layer ("dipole shell") on each sphere
of quantised radius m = 1/2, 1, ..., s plus, for integer s, a positive point
mass at the origin. Exact densities are therefore kept symbolic, as lists of
:class:`ShellTerm`; a real-valued function of the radius only exists after
convolution with a normalized Gaussian kernel.

For a radial profile f(r) and the kernel (a/pi)^{3/2} exp(-a|x|^2), the 3-D
convolution reduces to

    (K*f)(S) = (sqrt(a/pi)/S) * int_0^inf r f(r) [e^{-a(S-r)^2} - e^{-a(S+r)^2}] dr

which is evaluated in closed form per term below. The independent quadrature
oracle re-evaluates the same convolution from scratch (narrow-shell limit of
the dipole layer, angular integral by adaptive quadrature) and never touches
the closed form; tests require the two routes to agree before the closed
form is trusted.

This module also evaluates the distribution targeted by the Monte Carlo
engine at finite slice count L exactly, via a transfer-matrix product of
single-slice moments (:func:`finite_l_characteristic`). The smeared density
is its large-L Gaussian asymptote; the finite-L form is the sharp reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad, simpson

from .spincore import SpinRep

__all__ = [
    "ShellTerm",
    "ShellDecomposition",
    "SmearingKernel",
    "shell_decomposition",
    "smeared_density",
    "smeared_density_quadrature_oracle",
    "marginal_comb",
    "smeared_marginal",
    "char_free",
    "shell_characteristic",
    "heff_from_density",
    "finite_l_characteristic",
    "finite_l_radial_density",
    "finite_l_marginal_density",
    "decomposition_to_dict",
    "decomposition_from_dict",
]

ORIGIN_DELTA = "origin_delta"
DIPOLE_SHELL = "dipole_shell"


@dataclass(frozen=True)
class ShellTerm:
    """One term of an exact decomposition.

    kind ``origin_delta``: coefficient * delta3(x), only at m = 0.
    kind ``dipole_shell``: coefficient * delta'(S - m)/S with m > 0; the
    stored coefficient is the scalar prefactor of delta'(S - m)/S.
    """

    kind: str
    m: float
    coefficient: float

    def __post_init__(self):
        if self.kind not in (ORIGIN_DELTA, DIPOLE_SHELL):
            raise ValueError(f"unknown shell term kind {self.kind!r}")
        if self.kind == ORIGIN_DELTA and self.m != 0.0:
            raise ValueError("origin_delta terms must sit at m = 0")
        if self.kind == DIPOLE_SHELL and self.m <= 0.0:
            raise ValueError("dipole_shell terms require m > 0")

    def integrated_weight(self) -> float:
        """Integral of the term over 3-space.

        For the dipole shell: int 4 pi S^2 c delta'(S-m)/S dS = -4 pi c.
        """
        if self.kind == ORIGIN_DELTA:
            return self.coefficient
        return -4.0 * math.pi * self.coefficient


@dataclass(frozen=True)
class ShellDecomposition:
    """Exact free-spin density as a finite list of shell terms."""

    spin: SpinRep
    terms: tuple[ShellTerm, ...]

    def total_weight(self) -> float:
        return sum(t.integrated_weight() for t in self.terms)


@dataclass(frozen=True)
class SmearingKernel:
    """Normalized Gaussian kernel tied to a slice count L.

    The per-axis exponent is exp(-a (x - S)^2) with a = L / width_scale;
    width_scale = 1 is the default and gives exponent L exactly. The kernel
    (a/pi)^{3/2} e^{-a|x|^2} integrates to 1 for any width_scale.
    """

    L: int
    width_scale: float = 1.0

    def __post_init__(self):
        if self.L < 1:
            raise ValueError(f"kernel requires L >= 1, got {self.L}")
        if not self.width_scale > 0:
            raise ValueError(f"width_scale must be > 0, got {self.width_scale}")

    @property
    def alpha(self) -> float:
        return self.L / self.width_scale


def shell_decomposition(rep: SpinRep) -> ShellDecomposition:
    """Exact term list for a free spin s.

    One dipole shell of coefficient -1/(2 pi (2s+1)) at each positive radius
    m <= s (integers or half-integers matching s), plus an origin delta of
    weight 1/(2s+1) when s is integer. Each shell integrates to 2/(2s+1),
    the origin term to 1/(2s+1); the total is exactly 1. Negative radii do
    not contribute.
    """
    dim = rep.dimension()
    terms = []
    if rep.is_integer_spin:
        terms.append(ShellTerm(ORIGIN_DELTA, 0.0, 1.0 / dim))
    coeff = -1.0 / (2.0 * math.pi * dim)
    # positive radii s, s-1, ... down to 1/2 or 1
    two_m = rep.two_s
    while two_m >= 1:
        terms.append(ShellTerm(DIPOLE_SHELL, two_m / 2.0, coeff))
        two_m -= 2
    terms.sort(key=lambda t: t.m)
    return ShellDecomposition(spin=rep, terms=tuple(terms))


def _dipole_bracket_over_s(S: np.ndarray, m: float, alpha: float) -> np.ndarray:
    """g(S)/S with g(S) = (S-m) e^{-a(S-m)^2} + (S+m) e^{-a(S+m)^2}.

    g(0) = 0 and g''(0) = 0, so g(S)/S is even and smooth; below a small-S
    threshold the limit g'(0) = 2 e^{-a m^2}(1 - 2 a m^2) is used to avoid
    the 0/0 cancellation.
    """
    g = (S - m) * np.exp(-alpha * (S - m) ** 2) + (S + m) * np.exp(
        -alpha * (S + m) ** 2
    )
    limit = 2.0 * math.exp(-alpha * m * m) * (1.0 - 2.0 * alpha * m * m)
    small = S < 1e-6
    safe = np.where(small, 1.0, S)
    return np.where(small, limit, g / safe)


def smeared_density(S, rep: SpinRep, kernel: SmearingKernel):
    """Closed-form convolution of the exact density with the kernel.

    Dipole shell at radius m with coefficient c contributes
        -2 a c sqrt(a/pi) * g(S)/S,
    (the derivative of the radial-reduction bracket at r = m); the origin
    delta of weight w contributes w (a/pi)^{3/2} e^{-a S^2}.

    Accepts scalar or array S >= 0.
    """
    S_arr = np.asarray(S, dtype=float)
    if np.any(S_arr < 0):
        raise ValueError("radius S must be >= 0")
    alpha = kernel.alpha
    out = np.zeros_like(S_arr)
    for term in shell_decomposition(rep).terms:
        if term.kind == ORIGIN_DELTA:
            out = out + term.coefficient * (alpha / math.pi) ** 1.5 * np.exp(
                -alpha * S_arr**2
            )
        else:
            pref = -2.0 * alpha * term.coefficient * math.sqrt(alpha / math.pi)
            out = out + pref * _dipole_bracket_over_s(S_arr, term.m, alpha)
    if np.isscalar(S) or S_arr.ndim == 0:
        return float(out)
    return out


def smeared_density_quadrature_oracle(
    S: float, rep: SpinRep, kernel: SmearingKernel, eps: float = 1e-5
) -> float:
    """Same convolution evaluated without the closed form.

    Each dipole layer is taken as the narrow-difference limit of two sharp
    shells at radii m -/+ eps with weights +/- c/(2 eps); the smearing of a
    sharp shell delta(r - r0)/r is computed as an angular integral

        2 pi r0 (a/pi)^{3/2} int_{-1}^{1} e^{-a(S^2 + r0^2 - 2 S r0 u)} du

    by adaptive quadrature. Used only to validate :func:`smeared_density`.
    """
    if S < 0:
        raise ValueError("radius S must be >= 0")
    alpha = kernel.alpha

    def shell_smear(r0: float) -> float:
        def integrand(u):
            return math.exp(-alpha * (S * S + r0 * r0 - 2.0 * S * r0 * u))

        val, _ = quad(integrand, -1.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)
        return 2.0 * math.pi * r0 * (alpha / math.pi) ** 1.5 * val

    total = 0.0
    for term in shell_decomposition(rep).terms:
        if term.kind == ORIGIN_DELTA:
            total += term.coefficient * (alpha / math.pi) ** 1.5 * math.exp(
                -alpha * S * S
            )
        else:
            lo = shell_smear(term.m - eps)
            hi = shell_smear(term.m + eps)
            total += term.coefficient * (lo - hi) / (2.0 * eps)
    return total


def marginal_comb(rep: SpinRep) -> list[tuple[float, float]]:
    """Positions and weights of the planar marginal: m = -s ... s, 1/(2s+1)."""
    dim = rep.dimension()
    return [((2 * k - rep.two_s) / 2.0, 1.0 / dim) for k in range(dim)]


def smeared_marginal(u, rep: SpinRep, kernel: SmearingKernel):
    """1-D marginal of the smeared density: a comb of unit-mass Gaussians.

    Per-axis Gaussian marginals keep the per-axis exponent, so this is
    sum_m (1/(2s+1)) sqrt(a/pi) e^{-a (u - m)^2}.
    """
    u_arr = np.asarray(u, dtype=float)
    alpha = kernel.alpha
    out = np.zeros_like(u_arr)
    for m, weight in marginal_comb(rep):
        out = out + weight * math.sqrt(alpha / math.pi) * np.exp(
            -alpha * (u_arr - m) ** 2
        )
    if np.isscalar(u) or u_arr.ndim == 0:
        return float(out)
    return out


def char_free(t, rep: SpinRep):
    """Characteristic function of the free-spin density at |lam| = t.

    The Dirichlet ratio sin((2s+1) t/2) / ((2s+1) sin(t/2)); near the
    removable singularities t = 2 pi k it falls back to the defining
    spectral sum (1/(2s+1)) sum_m cos(t m). Real for all t, equal to 1 at
    t = 0, and identical to the spin-core matrix characteristic function.
    """
    t_arr = np.abs(np.asarray(t, dtype=float))
    dim = rep.dimension()
    half = t_arr / 2.0
    sin_half = np.sin(half)
    singular = np.abs(sin_half) < 1e-6
    safe = np.where(singular, 1.0, sin_half)
    ratio = np.sin(dim * half) / (dim * safe)
    if np.any(singular):
        m = rep.m_values()
        spectral = np.cos(np.multiply.outer(t_arr, m)).sum(axis=-1) / dim
        ratio = np.where(singular, spectral, ratio)
    if np.isscalar(t) or t_arr.ndim == 0:
        return float(ratio)
    return ratio


def shell_characteristic(decomp, t):
    """3-D Fourier transform of a term list at wave number t = |lam|.

    The origin delta contributes its weight; a dipole shell of coefficient c
    at radius m contributes -4 pi c cos(t m). For a full free-spin
    decomposition this reproduces :func:`char_free` identically.

    Accepts a :class:`ShellDecomposition` or a plain iterable of terms.
    """
    terms = decomp.terms if isinstance(decomp, ShellDecomposition) else tuple(decomp)
    t_arr = np.asarray(t, dtype=float)
    out = np.zeros_like(t_arr)
    for term in terms:
        if term.kind == ORIGIN_DELTA:
            out = out + term.coefficient
        else:
            out = out - 4.0 * math.pi * term.coefficient * np.cos(t_arr * term.m)
    if np.isscalar(t) or t_arr.ndim == 0:
        return float(out)
    return out


def heff_from_density(w: float, beta: float) -> float | None:
    """Effective classical energy -(1/beta) ln W, or None where W <= 0.

    None is the explicit "undefined" marker: a non-positive quasiprobability
    has no classical Boltzmann weight, which is the whole point of tracking
    the sign structure.
    """
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    if w <= 0:
        return None
    return -math.log(w) / beta


# ---------------------------------------------------------------------------
# exact finite-L reference
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def _gauss_legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


def finite_l_characteristic(t, rep: SpinRep, L: int):
    """Exact characteristic function of the L-slice approximant.

    With one slice moment per basis label k = 0 ... 2s,

        T_k(b) = ((2s+1)/2) int_{-1}^{1} e^{-i b u} P_k(u) du,
        P_k(u) = C(2s,k) ((1+u)/2)^{2s-k} ((1-u)/2)^k,
        b = (s+1) t / L,

    the cyclic product of L identical slices gives
    chi_L(t) = (1/(2s+1)) sum_k T_k(b)^L. T_k(0) = 1, so chi_L(0) = 1.
    The u-integrals are done with a fixed high-order Gauss-Legendre rule
    (P_k is polynomial and b stays modest for the L of interest).
    """
    if L < 2:
        raise ValueError(f"slice count L must be >= 2, got {L}")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    u, gw = _gauss_legendre(240)
    two_s = rep.two_s
    k = np.arange(two_s + 1)[:, None]
    binom = np.array([math.comb(two_s, int(kk)) for kk in k.ravel()])[:, None]
    pk = binom * ((1.0 + u[None, :]) / 2.0) ** (two_s - k) * (
        (1.0 - u[None, :]) / 2.0
    ) ** k
    b = (rep.s + 1.0) * t_arr / L
    phases = np.exp(-1j * np.multiply.outer(b, u))  # (nt, nu)
    tk = (rep.dimension() / 2.0) * phases @ (gw[None, :] * pk).T  # (nt, 2s+1)
    chi = (tk**L).sum(axis=1).real / rep.dimension()
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return float(chi[0])
    return chi


def _chi_grid(rep: SpinRep, L: int):
    tmax = max(40.0, 16.0 * math.sqrt(L)) / max(1.0, (rep.s + 1.0) / 1.5)
    nt = max(4001, int(60 * tmax) | 1)
    t = np.linspace(0.0, tmax, nt)
    return t, finite_l_characteristic(t, rep, L)


def finite_l_radial_density(S, rep: SpinRep, L: int):
    """Radial profile of the exact L-slice distribution.

    Inverse 3-D Fourier transform of a radial characteristic function:
    W(S) = (1/(2 pi^2 S)) int_0^inf t sin(t S) chi_L(t) dt, with the
    S -> 0 limit (1/(2 pi^2)) int t^2 chi_L dt handled explicitly.
    """
    S_arr = np.atleast_1d(np.asarray(S, dtype=float))
    if np.any(S_arr < 0):
        raise ValueError("radius S must be >= 0")
    t, chi = _chi_grid(rep, L)
    tchi = t * chi
    small = S_arr < 1e-12
    safe = np.where(small, 1.0, S_arr)
    main = simpson(np.sin(np.multiply.outer(S_arr, t)) * tchi[None, :], x=t, axis=1)
    main = main / (2.0 * math.pi**2 * safe)
    if np.any(small):
        limit = simpson(t * tchi, x=t) / (2.0 * math.pi**2)
        main = np.where(small, limit, main)
    if np.isscalar(S) or np.asarray(S).ndim == 0:
        return float(main[0])
    return main


def finite_l_marginal_density(u, rep: SpinRep, L: int):
    """1-D marginal of the exact L-slice distribution along any axis.

    P(u) = (1/pi) int_0^inf cos(u t) chi_L(t) dt (chi_L is real and even).
    """
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    t, chi = _chi_grid(rep, L)
    vals = simpson(np.cos(np.multiply.outer(u_arr, t)) * chi[None, :], x=t, axis=1)
    vals = vals / math.pi
    if np.isscalar(u) or np.asarray(u).ndim == 0:
        return float(vals[0])
    return vals


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def decomposition_to_dict(
    decomp: ShellDecomposition, kernel: SmearingKernel | None = None
) -> dict:
    """JSON-ready shape: {spin, terms: [{kind, m, coefficient}], kernel}."""
    return {
        "spin": decomp.spin.two_s,
        "terms": [
            {"kind": t.kind, "m": t.m, "coefficient": t.coefficient}
            for t in decomp.terms
        ],
        "kernel": None
        if kernel is None
        else {"L": kernel.L, "c": kernel.width_scale},
    }


def decomposition_from_dict(data: dict) -> tuple[ShellDecomposition, SmearingKernel | None]:
    decomp = ShellDecomposition(
        spin=SpinRep(int(data["spin"])),
        terms=tuple(
            ShellTerm(t["kind"], float(t["m"]), float(t["coefficient"]))
            for t in data["terms"]
        ),
    )
    kernel = None
    if data.get("kernel") is not None:
        kernel = SmearingKernel(int(data["kernel"]["L"]), float(data["kernel"]["c"]))
    return decomp, kernel
