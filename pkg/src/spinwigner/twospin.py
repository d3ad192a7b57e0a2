"""Thermal mixture of two exchange-coupled spins 1/2.

The total-spin density of two spins 1/2 coupled by -J S1.S2 at inverse
temperature beta is a thermal mixture of the triplet (total spin 1) and
singlet (total spin 0) free-spin densities with weights

    p_triplet = 3 e^{beta J / 4} / (3 e^{beta J / 4} + e^{-3 beta J / 4}).

The mixture identity is verified numerically against a dense 4x4 oracle:
the thermal trace of exp(-i lam . (S1 + S2)) must equal
p_triplet * char_free(|lam|, s=1) + p_singlet for every (lam, beta J).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spincore import SpinRep, spin_matrices
from .wigner import (
    ShellTerm,
    SmearingKernel,
    char_free,
    shell_decomposition,
    smeared_density,
)

__all__ = [
    "TwoSpinModel",
    "two_spin_weights",
    "two_spin_exact_terms",
    "two_spin_total_density",
    "two_spin_char_mixture",
    "two_spin_char_oracle",
]

_SPIN_HALF = SpinRep(1)
_SPIN_ONE = SpinRep(2)
_SPIN_ZERO = SpinRep(0)


@dataclass(frozen=True)
class TwoSpinModel:
    """Two spins 1/2 with exchange coupling J at inverse temperature beta."""

    beta: float
    J: float

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")

    @property
    def beta_j(self) -> float:
        return self.beta * self.J


def two_spin_weights(model: TwoSpinModel) -> tuple[float, float]:
    """Thermal weights (p_triplet, p_singlet).

    Evaluated in overflow-safe form: p_triplet = 3/(3 + e^{-beta J}) for
    beta J >= 0 and 3 e^{beta J}/(3 e^{beta J} + 1) otherwise.
    """
    bj = model.beta_j
    if bj >= 0:
        p_t = 3.0 / (3.0 + math.exp(-bj))
    else:
        e = 3.0 * math.exp(bj)
        p_t = e / (e + 1.0)
    return p_t, 1.0 - p_t


def two_spin_exact_terms(model: TwoSpinModel) -> tuple[ShellTerm, ...]:
    """Exact mixed term list p_t * W_1 + p_s * W_0.

    W_1 carries an origin delta of weight 1/3 and a dipole shell at radius 1;
    W_0 is a pure origin delta. Coefficients of like terms are combined.
    """
    p_t, p_s = two_spin_weights(model)
    origin = 0.0
    shells: list[ShellTerm] = []
    for weight, rep in ((p_t, _SPIN_ONE), (p_s, _SPIN_ZERO)):
        for term in shell_decomposition(rep).terms:
            if term.kind == "origin_delta":
                origin += weight * term.coefficient
            else:
                shells.append(
                    ShellTerm(term.kind, term.m, weight * term.coefficient)
                )
    terms = [ShellTerm("origin_delta", 0.0, origin)] + shells
    return tuple(sorted(terms, key=lambda t: t.m))


def two_spin_total_density(S, model: TwoSpinModel, kernel: SmearingKernel):
    """Smeared total-spin density p_t * K*W_1 + p_s * K*W_0 at radius S."""
    p_t, p_s = two_spin_weights(model)
    return p_t * smeared_density(S, _SPIN_ONE, kernel) + p_s * smeared_density(
        S, _SPIN_ZERO, kernel
    )


def two_spin_char_mixture(t, model: TwoSpinModel):
    """Characteristic function of the mixture: p_t * char_free(t, 1) + p_s."""
    p_t, p_s = two_spin_weights(model)
    return p_t * char_free(t, _SPIN_ONE) + p_s


def two_spin_char_oracle(lam, model: TwoSpinModel) -> complex:
    """Dense 4x4 route: Tr(e^{-beta H} e^{-i lam.(S1+S2)}) / Tr(e^{-beta H}).

    H = -J S1.S2 is built from Kronecker products of the spin-1/2 matrices;
    both exponentials are evaluated by eigendecomposition. Must agree with
    :func:`two_spin_char_mixture` at |lam| for every model.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (3,):
        raise ValueError("lam must be a 3-vector")
    half = spin_matrices(_SPIN_HALF)
    eye = np.eye(2)
    ops1 = [np.kron(a, eye) for a in (half.sx, half.sy, half.sz)]
    ops2 = [np.kron(eye, a) for a in (half.sx, half.sy, half.sz)]
    ham = -model.J * sum(o1 @ o2 for o1, o2 in zip(ops1, ops2))
    total = [o1 + o2 for o1, o2 in zip(ops1, ops2)]

    evals, evecs = np.linalg.eigh(ham)
    # shift eigenvalues so the Boltzmann factors cannot overflow
    boltz = np.exp(-model.beta * (evals - evals.min()))
    rho = (evecs * boltz) @ evecs.conj().T
    rho /= np.trace(rho).real

    gen = sum(l * op for l, op in zip(lam, total))
    gvals, gvecs = np.linalg.eigh(gen)
    shift_op = (gvecs * np.exp(-1j * gvals)) @ gvecs.conj().T
    return complex(np.trace(rho @ shift_op))
