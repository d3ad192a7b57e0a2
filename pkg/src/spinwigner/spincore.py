"""Spin coherent-state machinery and dense matrix oracles.

Everything here is built from the two-component (spin-1/2) representative of
a coherent state: a point ``n`` on the unit sphere maps to the spinor
``(cos(theta/2), e^{i phi} sin(theta/2))``, and the spin-s overlap between
two coherent states is the spin-1/2 spinor product raised to the power 2s.
Closed-loop products of overlaps are gauge invariant, so the particular
spinor section chosen here (singular only at the exact south pole) never
leaks into any physical quantity.

The dense (2s+1)-dimensional matrices built by :func:`spin_matrices`,
:func:`coherent_state_vector` and :func:`matrix_char_dense` exist to
cross-check the closed forms; they are capped at ``two_s <= MAX_ORACLE_TWO_S``
and are not meant for production-scale work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MAX_ORACLE_TWO_S",
    "SpinRep",
    "SpinMatrices",
    "validate_unit_vector",
    "spinor_from_unit_vector",
    "spinor_to_unit_vector",
    "overlap",
    "loop_weight",
    "lower_symbol",
    "spin_matrices",
    "coherent_state_vector",
    "matrix_char",
    "matrix_char_dense",
]

# Dense oracles beyond this dimension (21) serve no validation purpose.
MAX_ORACLE_TWO_S = 20

_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class SpinRep:
    """Spin representation stored exactly as the integer 2s.

    Half-integer spins are kept exact this way; ``SpinRep(1)`` is spin 1/2,
    ``SpinRep(2)`` is spin 1, and ``SpinRep(0)`` is the trivial (singlet)
    representation.
    """

    two_s: int

    def __post_init__(self):
        if not isinstance(self.two_s, (int, np.integer)):
            raise ValueError(f"two_s must be an integer, got {self.two_s!r}")
        if self.two_s < 0:
            raise ValueError(f"two_s must be >= 0, got {self.two_s}")

    @property
    def s(self) -> float:
        return self.two_s / 2.0

    def dimension(self) -> int:
        return self.two_s + 1

    def casimir(self) -> float:
        """s(s+1), computed exactly as two_s*(two_s+2)/4."""
        return self.two_s * (self.two_s + 2) / 4.0

    @property
    def is_integer_spin(self) -> bool:
        return self.two_s % 2 == 0

    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers in descending order s, s-1, ..., -s."""
        return (self.two_s - 2 * np.arange(self.two_s + 1)) / 2.0


@dataclass(frozen=True)
class SpinMatrices:
    """Dense angular-momentum matrices in the |s, m> basis (m = s ... -s)."""

    rep: SpinRep
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    def dot(self, vec) -> np.ndarray:
        """The matrix vec . S for a 3-vector vec."""
        v = np.asarray(vec, dtype=float)
        return v[0] * self.sx + v[1] * self.sy + v[2] * self.sz


def validate_unit_vector(n) -> np.ndarray:
    """Return n as a float array of shape (3,), checking |n| = 1 to 1e-12."""
    v = np.asarray(n, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"unit vector must have shape (3,), got {v.shape}")
    norm2 = float(v @ v)
    if abs(norm2 - 1.0) > 2 * _UNIT_TOL:
        raise ValueError(f"not a unit vector: |n|^2 = {norm2!r}")
    return v


def spinor_from_unit_vector(n) -> np.ndarray:
    """Two-component representative (cos(theta/2), e^{i phi} sin(theta/2)).

    The exact south pole, where the azimuth is undefined, returns (0, 1).
    """
    x, y, z = validate_unit_vector(n)
    a = math.sqrt(max(0.0, (1.0 + z) / 2.0))
    if a == 0.0:
        return np.array([0.0 + 0.0j, 1.0 + 0.0j])
    b = complex(x, y) / (2.0 * a)
    return np.array([a + 0.0j, b])


def spinor_to_unit_vector(spinor) -> np.ndarray:
    """Inverse of the gauge map: n = (2 Re a*b, 2 Im a*b, |a|^2 - |b|^2)."""
    a, b = np.asarray(spinor, dtype=complex)
    ab = np.conj(a) * b
    return np.array([2.0 * ab.real, 2.0 * ab.imag, abs(a) ** 2 - abs(b) ** 2])


def overlap(n1, n2, rep: SpinRep) -> complex:
    """Coherent-state overlap <n1|n2> for spin s, via the spinor product.

    Equals (z1^dag z2)^{2s}; its squared modulus is ((1 + n1.n2)/2)^{2s}.
    """
    z1 = spinor_from_unit_vector(n1)
    z2 = spinor_from_unit_vector(n2)
    return complex(np.vdot(z1, z2)) ** rep.two_s


def loop_weight(path, rep: SpinRep) -> complex:
    """Cyclic product <n1|n2><n2|n3>...<nL|n1> for a closed path.

    Gauge invariant: any per-point phase redefinition of the spinors cancels
    in the closed product. |loop_weight| <= 1. Real and non-negative for
    L = 2, complex in general for L > 2.
    """
    pts = np.asarray(path, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"path must have shape (L, 3), got {pts.shape}")
    if pts.shape[0] < 2:
        raise ValueError(f"path must contain at least 2 points, got {pts.shape[0]}")
    spinors = [spinor_from_unit_vector(p) for p in pts]
    L = len(spinors)
    prod = 1.0 + 0.0j
    for i in range(L):
        prod *= complex(np.vdot(spinors[i], spinors[(i + 1) % L]))
    return prod**rep.two_s


def lower_symbol(n, rep: SpinRep) -> np.ndarray:
    """Classical vector (s+1) n representing the spin between time slices."""
    return (rep.s + 1.0) * validate_unit_vector(n)


def spin_matrices(rep: SpinRep) -> SpinMatrices:
    """Standard dense sx, sy, sz in the |s, m> basis, m = s ... -s."""
    _check_oracle_cap(rep)
    dim = rep.dimension()
    m = rep.m_values()
    sz = np.diag(m).astype(complex)
    # raising operator: <s, m+1| S+ |s, m> = sqrt(s(s+1) - m(m+1))
    sp = np.zeros((dim, dim), dtype=complex)
    for i in range(1, dim):
        mm = m[i]
        sp[i - 1, i] = math.sqrt(rep.casimir() - mm * (mm + 1))
    sm = sp.conj().T
    sx = (sp + sm) / 2.0
    sy = (sp - sm) / 2.0j
    return SpinMatrices(rep=rep, sx=sx, sy=sy, sz=sz)


def coherent_state_vector(n, rep: SpinRep) -> np.ndarray:
    """Dense coherent state |n> in the |s, m> basis (m = s ... -s).

    Built as the symmetric power of the spinor (a, b):
    component k is sqrt(C(2s, k)) a^{2s-k} b^k, so inner products of these
    vectors reproduce :func:`overlap` exactly (same gauge).
    """
    _check_oracle_cap(rep)
    a, b = spinor_from_unit_vector(n)
    two_s = rep.two_s
    k = np.arange(two_s + 1)
    binom = np.array([math.comb(two_s, int(kk)) for kk in k], dtype=float)
    return np.sqrt(binom) * a ** (two_s - k) * b**k


def matrix_char(lam, rep: SpinRep) -> complex:
    """Normalized trace of exp(-i lam . S): (1/(2s+1)) sum_m e^{-i|lam| m}.

    The eigenvalues of lam . S are |lam| m, so the trace depends only on
    t = |lam|; the symmetric m sum makes the value real. t = 0 gives 1.
    """
    v = np.asarray(lam, dtype=float)
    t = float(np.linalg.norm(v)) if v.shape == (3,) else float(abs(v))
    phases = np.exp(-1j * t * rep.m_values())
    return complex(phases.sum() / rep.dimension())


def matrix_char_dense(lam, rep: SpinRep) -> complex:
    """Oracle route: dense trace of expm(-i lam . S) via eigendecomposition."""
    v = np.asarray(lam, dtype=float)
    if v.shape != (3,):
        raise ValueError("lam must be a 3-vector")
    mats = spin_matrices(rep)
    evals, evecs = np.linalg.eigh(mats.dot(v))
    expm = (evecs * np.exp(-1j * evals)) @ evecs.conj().T
    return complex(np.trace(expm) / rep.dimension())


def _check_oracle_cap(rep: SpinRep):
    if rep.two_s > MAX_ORACLE_TWO_S:
        raise ValueError(
            f"dense oracles are capped at two_s <= {MAX_ORACLE_TWO_S}, got {rep.two_s}"
        )
