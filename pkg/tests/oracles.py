"""Independent numerical oracles used by the tests.

Nothing here imports the library's own derivative or expansion code.
"""
import numpy as np


_STENCIL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_OFFSETS = np.array([-2, -1, 0, 1, 2])


def real_hessian(f, x, h):
    """Fourth-order Hessian: the tensor product of two five-point first-derivative stencils."""
    n = len(x)
    H = np.empty((n, n))
    E = np.eye(n) * h
    for i in range(n):
        for j in range(i, n):
            acc = 0.0
            for wi, oi in zip(_STENCIL, _OFFSETS):
                for wj, oj in zip(_STENCIL, _OFFSETS):
                    if wi and wj:
                        acc += wi * wj * f(x + oi * E[i] + oj * E[j])
            H[i, j] = H[j, i] = acc / (h * h)
    return H


def mixed_hessian(f, z, h=1e-3):
    """``d^2 f / dz_a dzbar_b`` assembled from the real Hessian in (Re z, Im z)."""
    z = np.asarray(z, dtype=complex)
    n = z.size

    def fr(v):
        return f(v[:n] + 1j * v[n:])

    H = real_hessian(fr, np.concatenate([z.real, z.imag]), h)
    xx, xy, yx, yy = H[:n, :n], H[:n, n:], H[n:, :n], H[n:, n:]
    return (xx + yy + 1j * (xy - yx)) / 4


def wirtinger_grad(f, z, h=1e-6):
    """``(df/dz, df/dzbar)`` of a (possibly complex) function by central differences."""
    z = np.asarray(z, dtype=complex)
    n = z.size
    dz = np.empty(n, dtype=complex)
    dzb = np.empty(n, dtype=complex)
    for a in range(n):
        e = np.zeros(n)
        e[a] = h
        fx = (f(z + e) - f(z - e)) / (2 * h)
        fy = (f(z + 1j * e) - f(z - 1j * e)) / (2 * h)
        dz[a] = (fx - 1j * fy) / 2
        dzb[a] = (fx + 1j * fy) / 2
    return dz, dzb


def cauchy_coefficients(func, order, radius=0.5, samples=64):
    """Taylor coefficients ``c[m, n]`` of an analytic ``func(u, v)`` by a 2D FFT."""
    th = 2 * np.pi * np.arange(samples) / samples
    U = radius * np.exp(1j * th)[:, None]
    V = radius * np.exp(1j * th)[None, :]
    vals = func(U, V)
    c = np.fft.fft2(vals) / samples**2
    m = np.arange(order + 1)
    return c[: order + 1, : order + 1] / radius ** (m[:, None] + m[None, :])


def orbit_dimension(partition, seed=0):
    """Real dimension of the orbit of a diagonal element, as the rank of ``ad_x``.

    ``x`` has one distinct value per block and one more for the timelike entry.
    """
    rng = np.random.default_rng(seed)
    vals = rng.normal(size=len(partition) + 1)
    diag = np.concatenate([np.full(n, v) for n, v in zip(partition, vals)] + [vals[-1:] + 10.0])
    k = diag.size
    ad = np.kron(np.diag(diag), np.eye(k)) - np.kron(np.eye(k), np.diag(diag))
    return int(np.linalg.matrix_rank(ad, tol=1e-9))


def pseudo_unitary(rng, k=3, scale=0.6):
    """Random element of SU(2,1) built without the library: a boost times a block rotation."""
    from scipy.linalg import expm

    m = np.diag([-1.0, -1.0, 1.0])
    A = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    # X with X^dagger m + m X = 0 and zero trace generates the group
    X = A - m @ A.conj().T @ m
    X = X - np.trace(X) / k * np.eye(k)
    return expm(scale * X / np.abs(X).max())
