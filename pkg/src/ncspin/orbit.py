"""Group elements of SU(2,1), constraint analysis and the orbit charts.

A group element ``g`` satisfies ``g^dagger m g = m`` with ``m = diag(-1,-1,1)``.
Its columns are stored as ``(gamma, beta, alpha)``: ``alpha`` is the timelike
column that carries the CP(1,1) chart, ``beta`` a spacelike column fixed by a
gauge choice and ``gamma_i = eps_ijk alpha-bar^j beta-bar^k``. This ordering
makes ``det g = +1``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ChartSingularity, DegenerateWeights, DomainViolation
from .liealg import METRIC, ReferenceElement

CHART_TOL = 1e-8
GROUP_TOL = 1e-10

ALPHA, BETA, GAMMA = 2, 1, 0


class Chart(str, Enum):
    CP11 = "cp11"
    FLAG = "flag"


def _flag_second_argument(xi: np.ndarray) -> float:
    return float(abs(xi[0] + xi[1] * xi[2]) ** 2 - abs(xi[2]) ** 2 - 1.0)


@dataclass(frozen=True, eq=False)
class OrbitPoint:
    """Local complex coordinates on CP(1,1) (two) or the flag manifold (three)."""

    chart: Chart
    coords: np.ndarray

    def __post_init__(self):
        chart = Chart(self.chart)
        xi = np.asarray(self.coords, dtype=complex).reshape(-1)
        if xi.size != (2 if chart is Chart.CP11 else 3):
            raise ValueError(f"{chart.value} point needs {2 if chart is Chart.CP11 else 3} coordinates")
        if not np.all(np.isfinite(xi)):
            raise DomainViolation("non-finite coordinates")
        if 1.0 - np.sum(np.abs(xi[:2]) ** 2) <= 0.0:
            raise DomainViolation("|xi_1|^2 + |xi_2|^2 must be < 1")
        if chart is Chart.FLAG and _flag_second_argument(xi) == 0.0:
            raise DomainViolation("flag potential argument vanishes")
        xi.setflags(write=False)
        object.__setattr__(self, "chart", chart)
        object.__setattr__(self, "coords", xi)

    @classmethod
    def cp11(cls, xi1: complex, xi2: complex) -> "OrbitPoint":
        return cls(Chart.CP11, np.array([xi1, xi2], dtype=complex))

    @property
    def s(self) -> float:
        """``1 - |xi_1|^2 - |xi_2|^2``."""
        return float(1.0 - np.sum(np.abs(self.coords[:2]) ** 2))

    def to_json(self) -> dict:
        return {"chart": self.chart.value, "coords": [[z.real, z.imag] for z in self.coords]}

    @classmethod
    def from_json(cls, data: dict | str) -> "OrbitPoint":
        if isinstance(data, str):
            data = json.loads(data)
        coords = [complex(re, im) for re, im in data["coords"]]
        return cls(Chart(data["chart"]), np.array(coords))


@dataclass(frozen=True, eq=False)
class GroupElement:
    g: np.ndarray

    def __post_init__(self):
        g = np.array(self.g, dtype=complex)
        if g.shape != (3, 3):
            raise ValueError("group element must be 3x3")
        res = np.abs(g.conj().T @ METRIC @ g - METRIC).max()
        if res > GROUP_TOL or abs(np.linalg.det(g) - 1) > GROUP_TOL:
            raise DomainViolation(f"not an SU(2,1) element (residual {res:.2e})")
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    @property
    def alpha(self) -> np.ndarray:
        return self.g[:, ALPHA]

    @property
    def beta(self) -> np.ndarray:
        return self.g[:, BETA]

    @property
    def gamma(self) -> np.ndarray:
        return self.g[:, GAMMA]


@dataclass(frozen=True)
class OrbitSpec:
    """Reference element plus the block partition ``{n_i}`` of its eigenvalues.

    ``J1`` and ``J2`` are the weights of the reduced canonical one-form in
    the unconstrained ``(alpha, beta)`` phase space.
    """

    x: ReferenceElement
    partition: tuple[int, ...]

    def __post_init__(self):
        part = tuple(int(n) for n in self.partition)
        if any(n < 1 for n in part):
            raise ValueError("block sizes must be positive")
        if sum(part) != 2:
            raise ValueError(f"partition {part} has rank {sum(part)}; only rank 2 is in scope")
        object.__setattr__(self, "partition", part)
        degenerate = np.isclose(self.x.x1, self.x.x2, rtol=0, atol=1e-12)
        if part == (1, 1) and degenerate:
            raise DegenerateWeights("x1 = x2 requires partition (2,)")
        if part == (2,) and not degenerate:
            raise DegenerateWeights("partition (2,) requires x1 = x2")
        if abs(self.J1) < 1e-12 or abs(self.J2) < 1e-12:
            raise DegenerateWeights("J1 and J2 must be nonzero")

    @property
    def J1(self) -> float:
        return self.x.x1 + 0.5 * self.x.x2

    @property
    def J2(self) -> float:
        return self.x.x2 + 0.5 * self.x.x1


# -- constraints -----------------------------------------------------------

def _as_matrix(g) -> np.ndarray:
    return np.asarray(g.g if isinstance(g, GroupElement) else g, dtype=complex)


def constraint_residuals(g) -> np.ndarray:
    """``(psi_1, psi_2, psi_3, phi_1, phi_2, phi_3)`` for columns ``alpha, beta, gamma``.

    Inner products raise the index with ``m``: ``<u|v> = u^dagger m v``.
    All six vanish exactly when ``g^dagger m g = m``.
    """
    g = _as_matrix(g)
    G = g.conj().T @ METRIC @ g
    a, b, c = ALPHA, BETA, GAMMA
    return np.array([
        G[a, a] - METRIC[a, a],
        G[b, b] - METRIC[b, b],
        G[c, c] - METRIC[c, c],
        G[b, a],  # sum_i alpha_i beta-bar^i
        G[c, b],
        G[a, c],
    ])


def constraint_counts(partition) -> tuple[int, int, int]:
    """First-class count, second-class count and reduced dimension.

    Valid for any rank ``N = sum(partition)``; the last row of ``g`` has
    already been eliminated, leaving ``2N(N+1)`` real variables.
    """
    part = [int(n) for n in partition]
    N = sum(part)
    block = sum(n * (n - 1) for n in part)
    n_first = N + block
    n_second = N * (N - 1) - block
    dim = 2 * N * (N + 1) - 2 * n_first - n_second
    return n_first, n_second, dim


@dataclass(frozen=True)
class ConstraintClassification:
    n_first: int
    n_second: int
    dim: int
    numeric_first: int
    numeric_second: int
    phi_phibar: complex
    phi_phibar_expected: complex
    bracket_residual: float

    def to_json(self) -> dict:
        return {
            "n_first": self.n_first,
            "n_second": self.n_second,
            "dim": self.dim,
            "numeric_first": self.numeric_first,
            "numeric_second": self.numeric_second,
            "phi_phibar": [self.phi_phibar.real, self.phi_phibar.imag],
            "phi_phibar_expected": [self.phi_phibar_expected.real, self.phi_phibar_expected.imag],
            "bracket_residual": self.bracket_residual,
        }


# Raising metric of the unconstrained (alpha, beta) phase space. With -m the
# two spacelike columns of any group element have unit norm, so the printed
# constraints psi_1 = psi_2 = phi = 0 hold on them literally.
_PAIR_METRIC = -np.diag(METRIC)


def _pair_bracket(grad_f, grad_g, J1: float, J2: float) -> complex:
    """Bracket on C^3 x C^3 with ``{abar^i, a_j} = (i/2J1) delta^i_j`` (same for beta).

    Gradients are dicts with keys ``a``, ``abar``, ``b``, ``bbar``.
    """
    total = 0.0j
    for z, zb, w in (("a", "abar", J1), ("b", "bbar", J2)):
        c = 1j / (2 * w) * _PAIR_METRIC
        total += np.sum(c * (grad_f[zb] * grad_g[z] - grad_g[zb] * grad_f[z]))
    return total


def _pair_constraint_gradients(a: np.ndarray, b: np.ndarray) -> dict[str, dict]:
    r = _PAIR_METRIC
    zero = np.zeros(3, dtype=complex)
    return {
        "psi1": {"a": r * a.conj(), "abar": r * a, "b": zero, "bbar": zero},
        "psi2": {"a": zero, "abar": zero, "b": r * b.conj(), "bbar": r * b},
        # phi = sum_i r_i a_i conj(b_i)
        "phi": {"a": r * b.conj(), "abar": zero, "b": zero, "bbar": r * a},
        "phibar": {"a": zero, "abar": r * b, "b": r * a.conj(), "bbar": zero},
    }


def constraint_bracket_matrix(spec: OrbitSpec, g) -> tuple[np.ndarray, list[str]]:
    """Brackets among ``(psi_1, psi_2, phi, phi-bar)`` at the columns of ``g``."""
    g = _as_matrix(g)
    grads = _pair_constraint_gradients(g[:, 0], g[:, 1])
    names = list(grads)
    M = np.array([[_pair_bracket(grads[p], grads[q], spec.J1, spec.J2) for q in names] for p in names])
    return M, names


def classify_constraints(spec: OrbitSpec, seed: int = 0, rank_tol: float = 1e-9) -> ConstraintClassification:
    """Count first/second-class constraints and confirm the count numerically.

    The bracket matrix among the four real-rank constraints is evaluated at a
    random constrained point; its rank is the number of second-class
    constraints.
    """
    n_first, n_second, dim = constraint_counts(spec.partition)
    rng = np.random.default_rng(seed)
    xi = rng.normal(size=2) + 1j * rng.normal(size=2)
    xi *= rng.uniform(0.1, 0.9) / np.linalg.norm(xi)
    seed_vec = rng.normal(size=3) + 1j * rng.normal(size=3)
    g = group_from_coords(OrbitPoint(Chart.CP11, xi), seed_vector=seed_vec)
    M, _ = constraint_bracket_matrix(spec, g.g)
    rank = int(np.linalg.matrix_rank(M, tol=rank_tol))
    expected = -0.5j * (1 / spec.J1 - 1 / spec.J2)
    value = complex(M[2, 3])
    return ConstraintClassification(
        n_first=n_first,
        n_second=n_second,
        dim=dim,
        numeric_first=len(M) - rank,
        numeric_second=rank,
        phi_phibar=value,
        phi_phibar_expected=expected,
        bracket_residual=float(abs(value - expected)),
    )


# -- charts ----------------------------------------------------------------

def _mnorm(u: np.ndarray) -> complex:
    return u.conj() @ METRIC @ u


def coords_from_group(g, chart: Chart | str = Chart.CP11) -> OrbitPoint:
    g = _as_matrix(g)
    chart = Chart(chart)
    alpha, beta = g[:, ALPHA], g[:, BETA]
    if abs(alpha[2]) <= CHART_TOL:
        raise ChartSingularity(f"|alpha_3| = {abs(alpha[2]):.2e}")
    xi = [alpha[0] / alpha[2], alpha[1] / alpha[2]]
    if chart is Chart.FLAG:
        if abs(beta[0]) <= CHART_TOL:
            raise ChartSingularity(f"|beta_1| = {abs(beta[0]):.2e}")
        xi.append(np.conj(beta[1] / beta[0]))
    return OrbitPoint(chart, np.array(xi))


def _gamma_column(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    return np.cross((METRIC @ alpha).conj(), (METRIC @ beta).conj())


_SEEDS = (np.array([1, 0, 0], dtype=complex), np.array([0, 1, 0], dtype=complex))


def group_from_coords(p: OrbitPoint, seed_vector=None) -> GroupElement:
    """Reconstruct a group element whose ``alpha`` column lies over ``p``.

    For CP(1,1) the ``beta`` column is a gauge choice: metric Gram-Schmidt of
    ``seed_vector`` against ``alpha``, falling back to a second seed if the
    first is null. Flag points fix ``beta`` from the third coordinate.
    """
    xi = p.coords
    if p.s <= 0:
        raise DomainViolation("|xi|^2 >= 1")
    alpha = np.array([xi[0], xi[1], 1.0], dtype=complex) / np.sqrt(p.s)
    if p.chart is Chart.FLAG:
        eta1 = np.conj(xi[2])
        beta = np.array([1.0, eta1, np.conj(xi[0]) + np.conj(xi[1]) * eta1], dtype=complex)
        beta /= np.sqrt(-_mnorm(beta).real)
    else:
        seeds = [np.asarray(seed_vector, dtype=complex)] if seed_vector is not None else []
        for seed in (*seeds, *_SEEDS):
            beta = seed - _mnorm_pair(alpha, seed) * alpha
            norm = -_mnorm(beta).real
            if norm > CHART_TOL:
                beta = beta / np.sqrt(norm)
                break
        else:  # pragma: no cover - the fixed seeds span a spacelike plane
            raise DomainViolation("no spacelike seed available")
    gamma = _gamma_column(alpha, beta)
    g = np.empty((3, 3), dtype=complex)
    g[:, ALPHA], g[:, BETA], g[:, GAMMA] = alpha, beta, gamma
    return GroupElement(g)


def _mnorm_pair(u: np.ndarray, v: np.ndarray) -> complex:
    return u.conj() @ METRIC @ v


# -- Kahler geometry -------------------------------------------------------

def kahler_potential(p: OrbitPoint, J: float, J2: float | None = None) -> float:
    """Kahler potential on either chart.

    CP(1,1): ``W = -2J ln(1 - |xi|^2)``. Flag: ``J`` is ``J1`` and the second
    logarithm is taken of the absolute value of its argument, which is
    negative throughout the chart; this only shifts ``W`` by a constant.
    """
    s = p.s
    if s <= 0:
        raise DomainViolation("1 - |xi|^2 <= 0")
    W = -2.0 * J * np.log(s)
    if p.chart is Chart.FLAG:
        if J2 is None:
            raise ValueError("flag potential needs J2")
        arg = _flag_second_argument(p.coords)
        if arg == 0.0:
            raise DomainViolation("flag potential argument vanishes")
        W += 2.0 * J2 * np.log(abs(arg))
    return float(W)


def _require_cp11(p: OrbitPoint):
    if p.chart is not Chart.CP11:
        raise ValueError("closed form available on CP(1,1) only")


def metric(p: OrbitPoint, J: float) -> np.ndarray:
    """``g[a, b] = d_a dbar_b W``, first index holomorphic."""
    _require_cp11(p)
    xi, s = p.coords, p.s
    return 2 * J * (s * np.eye(2) + np.outer(xi.conj(), xi)) / s**2


def inverse_metric(p: OrbitPoint, J: float) -> np.ndarray:
    _require_cp11(p)
    xi, s = p.coords, p.s
    return s / (2 * J) * (np.eye(2) - np.outer(xi.conj(), xi))


def symplectic_form(p: OrbitPoint, J: float) -> np.ndarray:
    """Coefficients ``Omega[a, b]`` of ``d xi_a ^ d xibar_b``."""
    _require_cp11(p)
    xi, s = p.coords, p.s
    a2 = np.abs(xi) ** 2
    num = np.array([[1 - a2[1], xi[0].conj() * xi[1]],
                    [xi[1].conj() * xi[0], 1 - a2[0]]])
    return 2j * J * num / s**2


def wirtinger_hessian(func, z: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Central-difference ``d^2 func / dz_a dzbar_b`` for a real function."""
    z = np.asarray(z, dtype=complex)
    n = z.size
    H = np.empty((n, n), dtype=complex)
    units = np.eye(n)

    def second(u, v):
        return (func(z + h * u + h * v) - func(z + h * u - h * v)
                - func(z - h * u + h * v) + func(z - h * u - h * v)) / (4 * h * h)

    for a in range(n):
        for b in range(n):
            ea, eb = units[a], units[b]
            xx = second(ea, eb)
            yy = second(1j * ea, 1j * eb)
            xy = second(ea, 1j * eb)
            yx = second(1j * ea, eb)
            # d_a dbar_b = (dx_a - i dy_a)(dx_b + i dy_b) / 4
            H[a, b] = (xx + yy + 1j * (xy - yx)) / 4
    return H


def flag_metric_numeric(p: OrbitPoint, J1: float, J2: float, h: float = 1e-4) -> np.ndarray:
    """Flag-manifold metric by finite differences of the potential."""
    if p.chart is not Chart.FLAG:
        raise ValueError("flag point required")
    return wirtinger_hessian(lambda z: kahler_potential(OrbitPoint(Chart.FLAG, z), J1, J2), p.coords, h)
