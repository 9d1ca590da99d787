"""Classical Hamiltonian flows on CP(1,1).

The Hamiltonian is quadratic-plus-linear in the spin components,
``H = c_ab Q^a Q^b + c_a Q^a``, and the flow is ``xi-dot = {xi, H}``.
Trajectories are integrated with a Dormand-Prince 5(4) pair under a PI
step-size controller.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainExit, DomainViolation, StepFailure
from .liealg import ETA, GeneratorBasis, build_generators
from .orbit import Chart, OrbitPoint, inverse_metric
from .spin import spin_components, spin_gradients

DOMAIN_MARGIN = 1e-10
ESCAPE_GAP = 1e-3


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    c2: np.ndarray
    c1: np.ndarray
    J: float

    def __post_init__(self):
        c2 = np.array(self.c2, dtype=float)
        c1 = np.array(self.c1, dtype=float)
        if c2.shape != (8, 8) or c1.shape != (8,):
            raise ValueError("c2 must be 8x8 and c1 an 8-vector")
        if not (np.all(np.isfinite(c2)) and np.all(np.isfinite(c1)) and np.isfinite(self.J)):
            raise ValueError("non-finite Hamiltonian coefficients")
        if not np.allclose(c2, c2.T, rtol=0, atol=1e-14):
            raise ValueError("c2 must be symmetric")
        if self.J <= 0:
            raise ValueError("J must be positive")
        c2.setflags(write=False)
        c1.setflags(write=False)
        object.__setattr__(self, "c2", c2)
        object.__setattr__(self, "c1", c1)

    @classmethod
    def torus(cls, omega1: float, omega2: float, J: float) -> "HamiltonianSpec":
        """Cartan Hamiltonian whose flow rotates ``xi_a`` at angular rate ``omega_a``.

        Up to a constant it equals ``(wbar_1 |xi_1|^2 + wbar_2 |xi_2|^2)/(1 - |xi|^2)``
        with ``wbar_a = 2 J omega_a``.
        """
        c1 = np.zeros(8)
        c1[2] = omega1 - omega2
        c1[7] = (omega1 + omega2) / np.sqrt(3)
        return cls(np.zeros((8, 8)), c1, J)

    @classmethod
    def from_upper_triangle(cls, upper, c1, J: float) -> "HamiltonianSpec":
        """Build ``c2`` from its 36 upper-triangle entries in row-major order."""
        upper = np.asarray(upper, dtype=float)
        if upper.size != 36:
            raise ValueError("upper triangle of an 8x8 matrix has 36 entries")
        c2 = np.zeros((8, 8))
        c2[np.triu_indices(8)] = upper
        c2 = c2 + np.triu(c2, 1).T
        return cls(c2, c1, J)

    def negated(self) -> "HamiltonianSpec":
        return HamiltonianSpec(-self.c2, -self.c1, self.J)

    def torus_frequencies(self) -> tuple[float, float] | None:
        """``(omega1, omega2)`` if only ``c_3`` and ``c_8`` are nonzero."""
        mask = np.ones(8, dtype=bool)
        mask[[2, 7]] = False
        if np.any(self.c2) or np.any(self.c1[mask]):
            return None
        c3, c8 = self.c1[2], self.c1[7]
        return (c3 + np.sqrt(3) * c8) / 2, (np.sqrt(3) * c8 - c3) / 2


def eval_hamiltonian(spec: HamiltonianSpec, p: OrbitPoint, basis: GeneratorBasis | None = None) -> float:
    q = spin_components(p, basis, spec.J).q
    return float(q @ spec.c2 @ q + spec.c1 @ q)


def eom_rhs(spec: HamiltonianSpec, p: OrbitPoint, basis: GeneratorBasis | None = None) -> np.ndarray:
    """``xi-dot_a = {xi_a, H} = -i g^{ba} dH/dxibar_b``."""
    q = spin_components(p, basis, spec.J).q
    _, dQbar = spin_gradients(p, basis, spec.J)
    weights = 2 * spec.c2 @ q + spec.c1
    dHbar = weights @ dQbar
    return -1j * inverse_metric(p, spec.J).T @ dHbar


def exact_torus_solution(p0: OrbitPoint, omega1: float, omega2: float, t: float) -> OrbitPoint:
    phase = np.exp(-1j * np.array([omega1, omega2]) * t)
    return OrbitPoint(Chart.CP11, p0.coords * phase)


@dataclass
class Trajectory:
    times: np.ndarray
    points: list[OrbitPoint]
    energy: np.ndarray
    casimir: np.ndarray
    stats: dict = field(default_factory=dict)

    @property
    def coords(self) -> np.ndarray:
        return np.array([p.coords for p in self.points])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "re_xi1", "im_xi1", "re_xi2", "im_xi2", "energy", "casimir"])
        for t, p, e, c in zip(self.times, self.points, self.energy, self.casimir):
            x1, x2 = p.coords
            w.writerow([f"{v:.17g}" for v in (t, x1.real, x1.imag, x2.real, x2.imag, e, c)])
        return buf.getvalue()


# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _to_real(xi: np.ndarray) -> np.ndarray:
    return np.array([xi[0].real, xi[0].imag, xi[1].real, xi[1].imag])


def _to_complex(y: np.ndarray) -> np.ndarray:
    return np.array([y[0] + 1j * y[1], y[2] + 1j * y[3]])


class _LeftDomain(Exception):
    pass


def integrate(p0: OrbitPoint, spec: HamiltonianSpec, t_end: float, tol: float = 1e-10,
              basis: GeneratorBasis | None = None, h0: float | None = None,
              max_steps: int = 1_000_000) -> Trajectory:
    """Adaptive integration from ``t = 0`` to ``t_end``.

    ``tol`` is used as both absolute and relative tolerance. Energy and the
    quadratic Casimir ``Q^a Q_a`` are recorded at every accepted step.
    """
    if not 1e-12 <= tol <= 1e-4:
        raise ValueError("tol must lie in [1e-12, 1e-4]")
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if p0.chart is not Chart.CP11:
        raise ValueError("dynamics runs on CP(1,1)")
    basis = basis or build_generators()

    def rhs(y):
        xi = _to_complex(y)
        if 1 - np.sum(np.abs(xi) ** 2) <= DOMAIN_MARGIN:
            raise _LeftDomain
        return _to_real(eom_rhs(spec, OrbitPoint(Chart.CP11, xi), basis))

    def observe(p):
        q = spin_components(p, basis, spec.J).q
        return float(q @ spec.c2 @ q + spec.c1 @ q), float(q @ (ETA * q))

    t = 0.0
    y = _to_real(p0.coords)
    e0, c0 = observe(p0)
    times, points, energy, casimir = [0.0], [p0], [e0], [c0]
    k1 = rhs(y)
    if h0 is None:
        scale = tol + tol * np.abs(y)
        d0, d1 = np.linalg.norm(y / scale), np.linalg.norm(k1 / scale)
        h0 = 1e-6 if min(d0, d1) < 1e-5 else 0.01 * d0 / d1
    h = min(h0, t_end)
    beta = 0.04
    alpha = 0.2 - 0.75 * beta
    err_prev = 1e-4
    accepted = rejected = 0

    for _ in range(max_steps):
        if t >= t_end:
            break
        h = min(h, t_end - t)
        if h < 16 * np.finfo(float).eps * max(1.0, abs(t)):
            gap = 1 - np.sum(y**2)
            if gap < ESCAPE_GAP:
                # finite-time escape: the controller stalls before the margin is hit
                raise DomainExit(f"flow escapes to the chart boundary near t = {t:.6g} (1 - |xi|^2 = {gap:.3e})")
            raise StepFailure(f"step size underflow at t = {t:.6g}")
        try:
            k = [k1]
            for i in range(1, 7):
                yi = y + h * sum(a * kj for a, kj in zip(_A[i], k))
                k.append(rhs(yi))
        except _LeftDomain:
            h *= 0.25
            rejected += 1
            continue
        k = np.array(k)
        y_new = y + h * (_B5 @ k)
        err_vec = h * (_E @ k)
        sc = tol + tol * np.maximum(np.abs(y), np.abs(y_new))
        err = max(np.sqrt(np.mean((err_vec / sc) ** 2)), 1e-10)
        if err <= 1.0:
            t = t_end if t_end - (t + h) < 1e-14 * max(1.0, t_end) else t + h
            y = y_new
            k1 = k[-1]  # first-same-as-last
            xi = _to_complex(y)
            if 1 - np.sum(np.abs(xi) ** 2) <= DOMAIN_MARGIN:
                raise DomainExit(f"trajectory reached the chart boundary at t = {t:.6g}")
            p = OrbitPoint(Chart.CP11, xi)
            e, c = observe(p)
            times.append(t)
            points.append(p)
            energy.append(e)
            casimir.append(c)
            fac = 0.9 * err ** (-alpha) * err_prev ** beta
            h *= min(5.0, max(0.2, fac))
            err_prev = err
            accepted += 1
        else:
            h *= max(0.2, 0.9 * err ** (-alpha))
            rejected += 1
    else:
        raise StepFailure(f"exceeded {max_steps} steps")

    energy_arr = np.array(energy)
    casimir_arr = np.array(casimir)
    return Trajectory(
        times=np.array(times),
        points=points,
        energy=energy_arr,
        casimir=casimir_arr,
        stats={
            "accepted": accepted,
            "rejected": rejected,
            "max_energy_drift": float(np.abs(energy_arr - energy_arr[0]).max()),
            "max_casimir_drift": float(np.abs(casimir_arr - casimir_arr[0]).max()),
        },
    )


def validate_initial_point(xi0, margin: float = DOMAIN_MARGIN) -> OrbitPoint:
    xi = np.asarray(xi0, dtype=complex)
    if xi.shape != (2,):
        raise ValueError("xi0 needs two complex coordinates")
    if 1 - np.sum(np.abs(xi) ** 2) <= margin:
        raise DomainViolation("initial point outside the chart domain")
    return OrbitPoint(Chart.CP11, xi)
