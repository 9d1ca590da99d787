"""Antiholomorphic quantization on a truncated monomial basis.

States are polynomials ``sum c_mn xibar_1^m xibar_2^n`` with ``m + n <= D``.
Spin operators are first-order differential operators with coordinates
placed to the left of derivatives, so there is no ordering constant.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.special import factorial, poch

from .errors import BranchViolation, ClosureFailure, ConvergenceFailure, TruncationWarning
from .liealg import GeneratorBasis, StructureConstants, build_generators, structure_constants

CLOSURE_TOL = 1e-10
TAIL_TOL = 1e-12
BRANCH_TOL = 1e-12


@lru_cache(maxsize=None)
def monomial_index(D: int) -> tuple[tuple[int, int], ...]:
    """Exponents ``(m, n)`` ordered by total degree, then by ``n``."""
    if D < 0:
        raise ValueError("D must be non-negative")
    return tuple((d - n, n) for d in range(D + 1) for n in range(d + 1))


def _position(m: int, n: int) -> int:
    d = m + n
    return d * (d + 1) // 2 + n


def degrees(D: int) -> np.ndarray:
    return np.array([m + n for m, n in monomial_index(D)])


@dataclass(frozen=True, eq=False)
class PolyState:
    J: float
    D: int
    coeffs: np.ndarray
    truncated: bool = False

    def __post_init__(self):
        if self.J <= 0:
            raise ValueError("J must be positive")
        if self.D < 1:
            raise ValueError("D must be >= 1")
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (len(monomial_index(self.D)),):
            raise ValueError("coefficient vector does not match the monomial index set")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coefficients")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def monomial(cls, m: int, n: int, J: float, D: int) -> "PolyState":
        if m < 0 or n < 0 or m + n > D:
            raise ValueError("monomial outside the index set")
        c = np.zeros(len(monomial_index(D)), dtype=complex)
        c[_position(m, n)] = 1
        return cls(J, D, c)

    def coefficient(self, m: int, n: int) -> complex:
        return complex(self.coeffs[_position(m, n)])

    def __call__(self, xibar) -> complex:
        """Evaluate the polynomial at ``(xibar_1, xibar_2)``."""
        z1, z2 = np.asarray(xibar, dtype=complex)
        idx = np.array(monomial_index(self.D))
        return complex(np.sum(self.coeffs * z1 ** idx[:, 0] * z2 ** idx[:, 1]))

    def norm2(self) -> float:
        """Squared norm in the reproducing-kernel inner product."""
        return float(np.sum(gram_diagonal(self.J, self.D) * np.abs(self.coeffs) ** 2))


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    a: int
    J: float
    D: int
    mat: np.ndarray
    truncated: bool


def _first_order_coefficients(t: np.ndarray):
    """Coefficients of ``A_alpha`` in ``Q = sum_alpha A_alpha d/dxibar_alpha``.

    ``A_alpha = t_{3 alpha} + t_33 xibar_alpha - (t_{beta 3} xibar_beta) xibar_alpha
    - t_{beta alpha} xibar_beta``. Returned as (constant, linear matrix ``L[alpha, beta]``,
    quadratic vector ``v`` with ``A_alpha`` containing ``-(v . xibar) xibar_alpha``).
    """
    const = t[2, :2]
    lin = t[2, 2] * np.eye(2) - t[:2, :2].T
    quad = t[:2, 2]
    return const, lin, quad


def build_operator(a: int, J: float, D: int, basis: GeneratorBasis | None = None) -> OperatorMatrix:
    """Matrix of ``Q^a`` (``a`` one-based) acting on coefficient vectors.

    Output monomials above degree ``D`` are dropped and ``truncated`` is set.
    The operator does not depend on ``J``; it is carried for bookkeeping.
    """
    if not 1 <= a <= 8:
        raise IndexError("generator index runs from 1 to 8")
    if J <= 0 or D < 1:
        raise ValueError("need J > 0 and D >= 1")
    basis = basis or build_generators()
    const, lin, quad = _first_order_coefficients(basis.raised[a - 1])
    idx = monomial_index(D)
    mat = np.zeros((len(idx), len(idx)), dtype=complex)
    truncated = False
    unit = ((1, 0), (0, 1))

    def add(row, col, val):
        nonlocal truncated
        if val == 0:
            return
        if row[0] + row[1] > D:
            truncated = True
            return
        mat[_position(*row), col] += val

    for col, (m, n) in enumerate(idx):
        for alpha, k in enumerate((m, n)):
            if k == 0:
                continue
            # d/dxibar_alpha lowers exponent alpha by one
            base = (m - unit[alpha][0], n - unit[alpha][1])
            add(base, col, k * const[alpha])
            for beta in range(2):
                up = (base[0] + unit[beta][0], base[1] + unit[beta][1])
                add(up, col, k * lin[alpha, beta])
                up2 = (up[0] + unit[alpha][0], up[1] + unit[alpha][1])
                add(up2, col, -k * quad[beta])
    return OperatorMatrix(a=a, J=J, D=D, mat=mat, truncated=truncated)


@lru_cache(maxsize=32)
def _operators(J: float, D: int) -> tuple[OperatorMatrix, ...]:
    return tuple(build_operator(a, J, D) for a in range(1, 9))


def operator_set(J: float, D: int) -> tuple[OperatorMatrix, ...]:
    return _operators(float(J), int(D))


def verify_operator_algebra(J: float, D: int, sc: StructureConstants | None = None,
                            tol: float = CLOSURE_TOL) -> dict:
    """Check ``[Q^a, Q^b] = sign * i f^{ab}_c Q^c`` on monomials of degree ``<= D - 2``.

    Both signs are measured; closure holds if either passes. The
    unrestricted residual is reported to show the truncation edge effect.
    """
    if D < 3:
        raise ValueError("D must be >= 3")
    sc = sc or structure_constants(build_generators())
    fr = sc.raised
    ops = np.array([o.mat for o in operator_set(J, D)])
    interior = degrees(D) <= D - 2
    comm = np.einsum("aij,bjk->abik", ops, ops) - np.einsum("bij,ajk->abik", ops, ops)
    rhs = 1j * np.einsum("abc,cij->abij", fr, ops)
    res = {
        "+if": float(np.abs((comm - rhs)[..., interior]).max()),
        "-if": float(np.abs((comm + rhs)[..., interior]).max()),
    }
    sign = "+if" if res["+if"] < tol else "-if"
    full = float(np.abs(comm - rhs).max() if sign == "+if" else np.abs(comm + rhs).max())
    report = {
        "J": J,
        "D": D,
        "sign_convention": sign,
        "interior_residual": res[sign],
        "residual_plus_if": res["+if"],
        "residual_minus_if": res["-if"],
        "full_space_residual": full,
    }
    if res[sign] > tol:
        raise ClosureFailure(f"operator algebra interior residual {res[sign]:.3e} under both signs")
    return report


def cartan_spectrum(a: int, D: int) -> np.ndarray:
    """Diagonal of ``Q^a`` for ``a`` in {3, 8}; raises if the matrix is not diagonal."""
    if a not in (3, 8):
        raise ValueError("Cartan generators are a = 3 and a = 8")
    mat = build_operator(a, 1.0, D).mat
    diag = np.diag(mat)
    if np.abs(mat - np.diag(diag)).max() > 0:
        raise ClosureFailure(f"Q^{a} is not diagonal on monomials")
    return diag.real


def _branch_base(w: complex) -> complex:
    if abs(w) <= BRANCH_TOL or (abs(w.imag) <= BRANCH_TOL and w.real < 0):
        raise BranchViolation(f"kernel base {w:.6g} lies on the branch cut")
    return w


def kernel(xi_prime_bar, xi, J: float) -> complex:
    """``(1 - xibar'_1 xi_1 - xibar'_2 xi_2)^(-2J)`` on the principal branch."""
    if J <= 0:
        raise ValueError("J must be positive")
    u = np.asarray(xi_prime_bar, dtype=complex)
    v = np.asarray(xi, dtype=complex)
    z = complex(u @ v)
    if abs(z) >= 1:
        raise BranchViolation(f"|xibar' . xi| = {abs(z):.6g} is outside the unit disk")
    return complex(_branch_base(1 - z) ** (-2 * J))


def kernel_coefficient(m: int, n: int, J: float) -> float:
    """Taylor coefficient ``Gamma(2J+m+n) / (Gamma(2J) m! n!)``."""
    return float(poch(2 * J, m + n) / (factorial(m) * factorial(n)))


def gram_diagonal(J: float, D: int) -> np.ndarray:
    """Squared monomial norms ``Gamma(2J) m! n! / Gamma(2J+m+n)``."""
    if J <= 0:
        raise ValueError("J must be positive")
    idx = np.array(monomial_index(D))
    return factorial(idx[:, 0]) * factorial(idx[:, 1]) / poch(2 * J, idx.sum(1))


def kernel_state(xi, J: float, D: int) -> PolyState:
    """Truncated series of ``xibar' -> <xi'|xi>`` as a state in ``xibar'``."""
    x1, x2 = np.asarray(xi, dtype=complex)
    idx = np.array(monomial_index(D))
    c = x1 ** idx[:, 0] * x2 ** idx[:, 1] / gram_diagonal(J, D)
    return PolyState(J, D, c)


def gram_adjoint(mat: np.ndarray, J: float, D: int) -> np.ndarray:
    """Adjoint with respect to ``<f, g> = sum conj(f_k) h_k g_k``."""
    h = gram_diagonal(J, D)
    return (mat.conj().T * h[None, :]) / h[:, None]


def gram_hermiticity_residual(mat: np.ndarray, J: float, D: int, interior: int | None = None) -> float:
    """``max |H - H^+|`` over the block of degree ``<= interior`` (default ``D``)."""
    sel = degrees(D) <= (D if interior is None else interior)
    diff = mat - gram_adjoint(mat, J, D)
    return float(np.abs(diff[np.ix_(sel, sel)]).max())


@dataclass(frozen=True, eq=False)
class QuantumHamiltonian:
    """``H = c2_ab Q^a Q^b + c1_a Q^a``; ``cartan`` is true if only ``c1_3, c1_8`` are set."""

    c1: np.ndarray
    c2: np.ndarray | None = None

    def __post_init__(self):
        c1 = np.array(self.c1, dtype=float)
        if c1.shape != (8,) or not np.all(np.isfinite(c1)):
            raise ValueError("c1 must be a finite 8-vector")
        object.__setattr__(self, "c1", c1)
        if self.c2 is not None:
            c2 = np.array(self.c2, dtype=float)
            if c2.shape != (8, 8) or not np.all(np.isfinite(c2)):
                raise ValueError("c2 must be a finite 8x8 matrix")
            object.__setattr__(self, "c2", c2)

    @classmethod
    def torus(cls, omega1: float, omega2: float) -> "QuantumHamiltonian":
        """Cartan Hamiltonian ``-(omega_1 N_1 + omega_2 N_2)`` with ``N_a`` the degree in ``xibar_a``."""
        c1 = np.zeros(8)
        c1[2] = omega1 - omega2
        c1[7] = (omega1 + omega2) / np.sqrt(3)
        return cls(c1)

    @property
    def cartan(self) -> bool:
        mask = np.ones(8, dtype=bool)
        mask[[2, 7]] = False
        return (self.c2 is None or not np.any(self.c2)) and not np.any(self.c1[mask])

    def matrix(self, J: float, D: int) -> tuple[np.ndarray, bool]:
        ops = operator_set(J, D)
        n = len(monomial_index(D))
        H = np.zeros((n, n), dtype=complex)
        truncated = False
        for a in range(8):
            if self.c1[a]:
                H += self.c1[a] * ops[a].mat
                truncated |= ops[a].truncated
        if self.c2 is not None:
            for a in range(8):
                for b in range(8):
                    if self.c2[a, b]:
                        H += self.c2[a, b] * ops[a].mat @ ops[b].mat
                        truncated |= ops[a].truncated or ops[b].truncated
        return H, truncated


def evolve(state: PolyState, ham: QuantumHamiltonian, t: float) -> PolyState:
    """Apply ``exp(-i H t)``.

    Cartan Hamiltonians are diagonal and evolve exactly. Otherwise a dense
    matrix exponential is used; a :class:`TruncationWarning` is issued if
    degree-raising terms were clipped.
    """
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    H, truncated = ham.matrix(state.J, state.D)
    if ham.cartan:
        coeffs = np.exp(-1j * np.diag(H) * t) * state.coeffs
    else:
        if state.D < 2:
            raise ValueError("general Hamiltonians need D >= 2")
        if truncated:
            warnings.warn("degree-raising terms above D were clipped", TruncationWarning, stacklevel=2)
        coeffs = expm(-1j * t * H) @ state.coeffs
    return PolyState(state.J, state.D, coeffs, truncated=state.truncated or truncated)


def _check_product_margin(xi_prime_bar, xi) -> float:
    r = float(np.sum(np.abs(np.asarray(xi_prime_bar, dtype=complex) * np.asarray(xi, dtype=complex))))
    if r >= 1:
        raise BranchViolation(f"|xibar'_1 xi_1| + |xibar'_2 xi_2| = {r:.6g} must be < 1")
    return r


def propagator_closed_form(xi_prime_bar, xi, t: float, omega1: float, omega2: float, J: float) -> complex:
    """``(1 - xibar'_1 xi_1 e^{i w1 t} - xibar'_2 xi_2 e^{i w2 t})^(-2J)``."""
    if J <= 0:
        raise ValueError("J must be positive")
    _check_product_margin(xi_prime_bar, xi)
    u = np.asarray(xi_prime_bar, dtype=complex)
    v = np.asarray(xi, dtype=complex)
    w = 1 - u[0] * v[0] * np.exp(1j * omega1 * t) - u[1] * v[1] * np.exp(1j * omega2 * t)
    return complex(_branch_base(complex(w)) ** (-2 * J))


def series_tail_bound(r: float, J: float, D: int) -> float:
    """Bound on ``sum_{d > D} poch(2J, d)/d! r^d``, the kernel series tail."""
    q = r * max((2 * J + D + 1) / (D + 2), 1.0)
    if q >= 1:
        return np.inf
    return float(poch(2 * J, D + 1) / factorial(D + 1) * r ** (D + 1) / (1 - q))


def propagator_numeric(xi_prime_bar, xi, t: float, omega1: float, omega2: float, J: float, D: int,
                       tail_tol: float = TAIL_TOL) -> complex:
    """Evolve the truncated kernel series under the torus Hamiltonian and resum."""
    r = _check_product_margin(xi_prime_bar, xi)
    tail = series_tail_bound(r, J, D)
    if tail >= tail_tol:
        raise ConvergenceFailure(f"series tail bound {tail:.3e} at D = {D} exceeds {tail_tol:.1e}")
    psi = evolve(kernel_state(xi, J, D), QuantumHamiltonian.torus(omega1, omega2), t)
    return psi(xi_prime_bar)
