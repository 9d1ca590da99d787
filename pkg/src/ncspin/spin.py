"""Classical noncompact spin on CP(1,1) and its Poisson algebra.

The spin components are the moment map

    Q^a = -2J <alpha| T^a |alpha>,   alpha = (xi_1, xi_2, 1) / sqrt(1 - |xi|^2),

with ``<u| = u^dagger m``. All gradients are analytic; finite differences
appear only in the tests.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ClosureFailure, DomainViolation
from .liealg import GeneratorBasis, ReferenceElement, StructureConstants, build_generators, structure_constants
from .orbit import Chart, OrbitPoint, group_from_coords, inverse_metric

CLOSURE_TOL = 1e-10


@dataclass(frozen=True)
class SpinVector:
    q: np.ndarray

    def __getitem__(self, a):
        """One-based access, ``Q[3]`` is ``Q^3``."""
        return self.q[a - 1]

    def contract(self, eta: np.ndarray) -> float:
        """``Q^a Q_a``."""
        return float(self.q @ (eta * self.q))


@dataclass(frozen=True)
class CanonicalData:
    P: np.ndarray
    Pbar: np.ndarray
    C: float


def _check(p: OrbitPoint, J: float):
    if p.chart is not Chart.CP11:
        raise ValueError("spin map is defined on CP(1,1)")
    if J <= 0:
        raise DomainViolation("J must be positive")


def _numerator(p: OrbitPoint, Tu: np.ndarray) -> np.ndarray:
    xi = p.coords
    return (Tu[:, 2, 2] + Tu[:, 2, :2] @ xi - Tu[:, :2, 2] @ xi.conj()
            - np.einsum("a,kab,b->k", xi.conj(), Tu[:, :2, :2], xi))


def spin_components(p: OrbitPoint, basis: GeneratorBasis | None = None, J: float = 1.0) -> SpinVector:
    basis = basis or build_generators()
    _check(p, J)
    q = -2 * J * _numerator(p, basis.raised) / p.s
    return SpinVector(q.real.copy())


def spin_gradients(p: OrbitPoint, basis: GeneratorBasis | None = None, J: float = 1.0):
    """Return ``(dQ/dxi, dQ/dxibar)``, each of shape ``(8, 2)``."""
    basis = basis or build_generators()
    _check(p, J)
    Tu = basis.raised
    xi, s = p.coords, p.s
    N = _numerator(p, Tu)
    dN = Tu[:, 2, :2] - np.einsum("a,kab->kb", xi.conj(), Tu[:, :2, :2])
    dNbar = -Tu[:, :2, 2] - np.einsum("kab,b->ka", Tu[:, :2, :2], xi)
    dQ = -2 * J * (dN / s + N[:, None] * xi.conj()[None, :] / s**2)
    dQbar = -2 * J * (dNbar / s + N[:, None] * xi[None, :] / s**2)
    return dQ, dQbar


def spin_matrix(g, x: ReferenceElement) -> np.ndarray:
    """``Q = i g x g^-1``."""
    g = np.asarray(getattr(g, "g", g), dtype=complex)
    return 1j * g @ x.matrix @ np.linalg.inv(g)


def components_from_matrix(Q: np.ndarray, basis: GeneratorBasis | None = None) -> np.ndarray:
    """Invert ``Q = 2 Q^a T_a`` using ``Tr(T_a T_b) = eta_ab / 2``."""
    basis = basis or build_generators()
    lowered = np.einsum("ij,aji->a", Q, basis.generators)
    return (basis.eta * lowered).real


def canonical_data(p: OrbitPoint, J: float) -> CanonicalData:
    _check(p, J)
    C = 2 * J / p.s
    P = C * p.coords
    return CanonicalData(P=P, Pbar=P.conj(), C=C)


def poisson_bracket(grad_f, grad_g, p: OrbitPoint, J: float) -> complex:
    """``{F, G} = i g^{ab} (dbar_a F d_b G - dbar_a G d_b F)``.

    Gradients are pairs ``(d/dxibar, d/dxi)`` of complex 2-vectors.
    """
    _check(p, J)
    gi = inverse_metric(p, J)
    fbar, f = (np.asarray(v, dtype=complex) for v in grad_f)
    gbar, g = (np.asarray(v, dtype=complex) for v in grad_g)
    return complex(1j * (fbar @ gi @ g - gbar @ gi @ f))


def bracket_matrix(p: OrbitPoint, basis: GeneratorBasis | None = None, J: float = 1.0) -> np.ndarray:
    """All brackets ``{Q^a, Q^b}`` at ``p``, shape ``(8, 8)``."""
    dQ, dQbar = spin_gradients(p, basis, J)
    gi = inverse_metric(p, J)
    B = 1j * (dQbar @ gi @ dQ.T - (dQbar @ gi @ dQ.T).T)
    return B


def shifting_bracket(B: np.ndarray, eta: np.ndarray) -> complex:
    """``{Q(E_+2), Q(E_+3)}`` from a bracket matrix of upper-index components."""
    L = eta[:, None] * B * eta[None, :]
    u = np.array([1, 1j]) / np.sqrt(2)
    return complex(u @ L[3:5, 5:7] @ u)


@dataclass(frozen=True)
class SpinAlgebraReport:
    max_residual: float
    samples: int
    sign_convention: str
    casimir_value: float
    casimir_spread: float
    shifting_residual: float
    t7_sign: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def random_cp11_point(rng: np.random.Generator, rmax: float = 0.95) -> OrbitPoint:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return OrbitPoint(Chart.CP11, v * rng.uniform(0, rmax) / np.linalg.norm(v))


def verify_spin_algebra(basis: GeneratorBasis | None = None, sc: StructureConstants | None = None,
                        J: float = 1.0, samples: int = 100, seed: int = 0,
                        tol: float = CLOSURE_TOL) -> SpinAlgebraReport:
    """Check ``{Q^a, Q^b} = sign * f^{ab}_c Q^c`` at random points.

    The literal sign (minus) is tried first, then plus. Residuals are
    measured relative to ``max(1, |Q|)`` so that points near the chart
    boundary are weighed fairly. The bracket of the two commuting shifting
    operators must also vanish.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    basis = basis or build_generators()
    sc = sc or structure_constants(basis)
    fr = sc.raised
    rng = np.random.default_rng(seed)
    res = {"-f": 0.0, "+f": 0.0}
    shift = 0.0
    cas = []
    for _ in range(samples):
        p = random_cp11_point(rng)
        q = spin_components(p, basis, J).q
        B = bracket_matrix(p, basis, J)
        fq = np.einsum("abc,c->ab", fr, q)
        scale = max(1.0, np.abs(q).max())
        res["-f"] = max(res["-f"], np.abs(B + fq).max() / scale)
        res["+f"] = max(res["+f"], np.abs(B - fq).max() / scale)
        shift = max(shift, abs(shifting_bracket(B, basis.eta)) / scale)
        cas.append(q @ (basis.eta * q))
    sign = "-f" if res["-f"] < tol else "+f"
    report = SpinAlgebraReport(
        max_residual=float(res[sign]),
        samples=samples,
        sign_convention=sign,
        casimir_value=float(np.mean(cas)),
        casimir_spread=float(np.ptp(cas)),
        shifting_residual=float(shift),
        t7_sign=basis.t7_sign,
    )
    if report.max_residual > tol:
        raise ClosureFailure(f"spin algebra residual {report.max_residual:.3e} under both signs")
    if report.shifting_residual > tol:
        raise ClosureFailure(
            f"shifting operators E+2, E+3 do not commute (residual {report.shifting_residual:.3e})")
    return report


def hamiltonian_vector_field(a: int, p: OrbitPoint, basis: GeneratorBasis | None = None) -> np.ndarray:
    """Holomorphic part of the vector field generated by ``Q^a`` (``a`` one-based).

    This coincides with the bracket flow ``xi-dot = {xi, Q^a}``.
    """
    basis = basis or build_generators()
    if not 1 <= a <= 8:
        raise IndexError("generator index runs from 1 to 8")
    t = basis.raised[a - 1]
    xi = p.coords
    return -1j * (t[:2, 2] + t[:2, :2] @ xi - t[2, 2] * xi - (t[2, :2] @ xi) * xi)


def gauge_offset(J: float, basis: GeneratorBasis | None = None, seed_vector=None) -> np.ndarray:
    """Constant vector ``Q_matrix - Q_chart`` measured once at the chart origin."""
    basis = basis or build_generators()
    origin = OrbitPoint.cp11(0, 0)
    g = group_from_coords(origin, seed_vector=seed_vector)
    Qm = components_from_matrix(spin_matrix(g, ReferenceElement.cp11(J)), basis)
    return Qm - spin_components(origin, basis, J).q
