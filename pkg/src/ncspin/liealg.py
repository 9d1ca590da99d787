r"""Generators, metric and structure constants of :math:`\mathfrak{su}(2,1)`.

The basis keeps the compact :math:`SU(2)\times U(1)` generators as half
Gell-Mann matrices and rotates the four coset generators by a factor of
:math:`\pm i`, so that every :math:`T_a` obeys

.. math:: \mathrm{Tr}(T_a T_b) = \tfrac12 \eta_{ab},
          \qquad \eta = \mathrm{diag}(1,1,1,-1,-1,-1,-1,1).

Index conventions used throughout the package:

* ``f[a, b, c]`` is :math:`f_{ab}{}^{c}` in :math:`[T_a, T_b] = i f_{ab}{}^{c} T_c`.
* ``StructureConstants.lowered`` is :math:`f_{abc} = f_{ab}{}^{d}\eta_{dc}`.
* ``StructureConstants.raised`` is :math:`f^{ab}{}_{c} = \eta^{aa'}\eta^{bb'} f_{a'b'c}`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import ClosureFailure, NonTraceless

ETA = np.array([1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0, 1.0])
METRIC = np.diag([-1.0, -1.0, 1.0])

CLOSURE_TOL = 1e-10
IDENTITY_TOL = 1e-12


def gell_mann() -> np.ndarray:
    """The eight standard Gell-Mann matrices, shape ``(8, 3, 3)``."""
    lam = np.zeros((8, 3, 3), dtype=complex)
    lam[0][0, 1] = lam[0][1, 0] = 1
    lam[1][0, 1], lam[1][1, 0] = -1j, 1j
    lam[2][0, 0], lam[2][1, 1] = 1, -1
    lam[3][0, 2] = lam[3][2, 0] = 1
    lam[4][0, 2], lam[4][2, 0] = -1j, 1j
    lam[5][1, 2] = lam[5][2, 1] = 1
    lam[6][1, 2], lam[6][2, 1] = -1j, 1j
    lam[7] = np.diag([1, 1, -2]) / np.sqrt(3)
    return lam


@dataclass(frozen=True)
class GeneratorBasis:
    """Ordered generators ``T_1..T_8`` (stored zero-based) and the index metric.

    ``t7_sign`` records the convention for the last coset generator,
    ``T_7 = t7_sign * (i/2) lambda_6``.
    """

    generators: np.ndarray
    eta: np.ndarray = field(default_factory=lambda: ETA.copy())
    t7_sign: int = -1
    n: int = 2

    @property
    def raised(self) -> np.ndarray:
        """Generators with the index raised by eta, ``T^a``."""
        return self.eta[:, None, None] * self.generators

    def shifting_operators(self) -> dict[str, np.ndarray]:
        """Shifting operators ``E_{+-k} = (T_i +- i T_j)/sqrt(2)``."""
        T = self.generators
        out = {}
        for k, (i, j) in zip((1, 2, 3), ((0, 1), (3, 4), (5, 6))):
            out[f"E+{k}"] = (T[i] + 1j * T[j]) / np.sqrt(2)
            out[f"E-{k}"] = (T[i] - 1j * T[j]) / np.sqrt(2)
        return out


@dataclass(frozen=True)
class StructureConstants:
    f: np.ndarray
    d: np.ndarray
    eta: np.ndarray = field(default_factory=lambda: ETA.copy())

    @property
    def lowered(self) -> np.ndarray:
        return self.f * self.eta[None, None, :]

    @property
    def raised(self) -> np.ndarray:
        return self.lowered * self.eta[:, None, None] * self.eta[None, :, None]


@dataclass(frozen=True)
class ReferenceElement:
    """Diagonal reference point ``x = i diag(x1, x2, x3)`` with ``x3 = -x1 - x2``."""

    x1: float
    x2: float

    @property
    def xs(self) -> np.ndarray:
        return np.array([self.x1, self.x2, -self.x1 - self.x2])

    @property
    def matrix(self) -> np.ndarray:
        return 1j * np.diag(self.xs).astype(complex)

    @classmethod
    def cp11(cls, J: float) -> "ReferenceElement":
        """Degenerate element whose orbit is CP(1,1) with Kahler weight ``J``.

        The two spacelike columns of a group element share ``x1 = x2`` and the
        timelike column carries ``x3``; the weight is ``J = (x3 - x1) / 2``.
        """
        return cls(-2.0 * J / 3.0, -2.0 * J / 3.0)


def candidate_basis(t7_sign: int) -> GeneratorBasis:
    """Generators with the coset rearrangement and a chosen sign for ``T_7``."""
    if t7_sign not in (1, -1):
        raise ValueError("t7_sign must be +1 or -1")
    lam = gell_mann()
    T = lam / 2
    T[3] = 1j * lam[4] / 2
    T[4] = -1j * lam[3] / 2
    T[5] = 1j * lam[6] / 2
    T[6] = t7_sign * 1j * lam[5] / 2
    T.setflags(write=False)
    return GeneratorBasis(generators=T, t7_sign=t7_sign)


def _commutators(T: np.ndarray) -> np.ndarray:
    return np.einsum("aij,bjk->abik", T, T) - np.einsum("bij,ajk->abik", T, T)


def _anticommutators(T: np.ndarray) -> np.ndarray:
    return np.einsum("aij,bjk->abik", T, T) + np.einsum("bij,ajk->abik", T, T)


def basis_residuals(basis: GeneratorBasis) -> dict[str, float]:
    """Max-norm residuals of every identity a valid basis must satisfy.

    ``shifting`` is the norm of ``[E_{+2}, E_{+3}]``. The coherent state is the
    exponential of these two raising operators, so they must commute; the two
    ``T_7`` candidates differ only in this check.
    """
    T, eta = basis.generators, basis.eta
    gram = np.einsum("aij,bji->ab", T, T)
    herm = max(
        np.abs(T[a] - s * T[a].conj().T).max()
        for a, s in enumerate((1, 1, 1, -1, -1, -1, -1, 1))
    )
    # i T_a must preserve the indefinite form m
    algebra = max(np.abs((1j * t).conj().T @ METRIC + METRIC @ (1j * t)).max() for t in T)
    C = _commutators(T)
    f = -2j * np.einsum("abij,dji->abd", C, T) * eta[None, None, :]
    closure = np.abs(C - 1j * np.einsum("abc,cij->abij", f.real, T)).max()
    E = basis.shifting_operators()
    shifting = np.abs(E["E+2"] @ E["E+3"] - E["E+3"] @ E["E+2"]).max()
    return {
        "trace": float(np.abs(gram - np.diag(eta) / 2).max()),
        "hermiticity": float(herm),
        "algebra": float(algebra),
        "closure": float(max(closure, np.abs(f.imag).max())),
        "shifting": float(shifting),
    }


def select_t7_sign(tol: float = IDENTITY_TOL) -> tuple[int, dict[int, dict[str, float]]]:
    """Build both ``T_7`` candidates and keep the one passing every check."""
    report = {s: basis_residuals(candidate_basis(s)) for s in (1, -1)}
    passing = [s for s, r in report.items() if max(r.values()) < tol]
    if len(passing) != 1:
        raise ClosureFailure(f"expected exactly one valid T_7 sign, got {passing}")
    return passing[0], report


@lru_cache(maxsize=None)
def build_generators() -> GeneratorBasis:
    sign, _ = select_t7_sign()
    return candidate_basis(sign)


def structure_constants(basis: GeneratorBasis, tol: float = CLOSURE_TOL) -> StructureConstants:
    """Extract ``f`` from commutators and ``d`` from anticommutators.

    Raises :class:`ClosureFailure` if either expansion leaves a residual above
    ``tol``.
    """
    T, eta = basis.generators, basis.eta
    C = _commutators(T)
    A = _anticommutators(T)
    f = -2j * np.einsum("abij,dji->abd", C, T) * eta[None, None, :]
    d = 2 * np.einsum("abij,dji->abd", A, T) * eta[None, None, :]
    if max(np.abs(f.imag).max(), np.abs(d.imag).max()) > tol:
        raise ClosureFailure("structure constants are not real")
    f, d = f.real, d.real
    comm_res = np.abs(C - 1j * np.einsum("abc,cij->abij", f, T)).max()
    ident = np.eye(3)[None, None] * np.diag(eta)[:, :, None, None] / 3
    anti_res = np.abs(A - ident - np.einsum("abc,cij->abij", d, T)).max()
    if max(comm_res, anti_res) > tol:
        raise ClosureFailure(
            f"generator expansion residuals {comm_res:.3e}, {anti_res:.3e} exceed {tol}"
        )
    f.setflags(write=False)
    d.setflags(write=False)
    return StructureConstants(f=f, d=d, eta=eta)


def jacobi_residual(sc: StructureConstants) -> float:
    f = sc.f
    J = (
        np.einsum("abe,ecd->abcd", f, f)
        + np.einsum("bce,ead->abcd", f, f)
        + np.einsum("cae,ebd->abcd", f, f)
    )
    return float(np.abs(J).max())


def antisymmetry_residual(sc: StructureConstants) -> float:
    fl = sc.lowered
    return float(
        max(
            np.abs(fl + fl.transpose(1, 0, 2)).max(),
            np.abs(fl + fl.transpose(0, 2, 1)).max(),
            np.abs(fl + fl.transpose(2, 1, 0)).max(),
        )
    )


def casimirs(Q: np.ndarray) -> tuple[float, float]:
    """Return ``(Tr Q^2, Tr Q^3)`` for a traceless 3x3 matrix."""
    Q = np.asarray(Q, dtype=complex)
    if abs(np.trace(Q)) > 1e-10:
        raise NonTraceless(f"|Tr Q| = {abs(np.trace(Q)):.3e}")
    Q2 = Q @ Q
    return float(np.trace(Q2).real), float(np.trace(Q2 @ Q).real)


def random_pseudo_unitary(rng: np.random.Generator, scale: float = 0.5,
                          basis: GeneratorBasis | None = None) -> np.ndarray:
    """Random ``h`` with ``h^dagger m h = m`` and ``det h = 1``."""
    basis = basis or build_generators()
    coeffs = rng.normal(scale=scale, size=8)
    return expm(1j * np.einsum("a,aij->ij", coeffs, basis.generators))


def verification_report(basis: GeneratorBasis | None = None) -> dict:
    """JSON-serializable summary of every algebraic identity."""
    sign, candidates = select_t7_sign()
    basis = basis or candidate_basis(sign)
    res = basis_residuals(basis)
    sc = structure_constants(basis)
    d_sym = float(np.abs(sc.d - sc.d.transpose(1, 0, 2)).max())
    return {
        "t7_sign": basis.t7_sign,
        "t7_convention": "T_7 = %si lambda_6 / 2" % ("-" if basis.t7_sign < 0 else "+"),
        "selected_t7_sign": sign,
        "candidates": {str(k): v for k, v in candidates.items()},
        "residuals": {
            **res,
            "jacobi": jacobi_residual(sc),
            "antisymmetry": antisymmetry_residual(sc),
            "d_symmetry": d_sym,
        },
    }
