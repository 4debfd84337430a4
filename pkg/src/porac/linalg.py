"""Small dense complex linear algebra helpers.

Vectors and matrices are plain ``numpy`` arrays of dtype ``complex128``.
Everything here is deterministic given its inputs; randomness only enters
through an explicit :class:`numpy.random.Generator`.
"""

from __future__ import annotations

import numpy as np

TOL = 1e-9
"""Default tolerance for objects built from exact expressions."""

PRINTED_TOL = 5e-3
"""Tolerance for objects typed in from 4-5 digit decimal tables."""

_MASK64 = (1 << 64) - 1


class LinalgError(ValueError):
    pass


def as_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1 or arr.size == 0:
        raise LinalgError(f"expected a non-empty 1-d vector, got shape {arr.shape}")
    return arr


def inner_product(a, b) -> complex:
    """Return ``<a|b> = sum(conj(a_i) * b_i)``."""
    a = as_vector(a)
    b = as_vector(b)
    if a.shape != b.shape:
        raise LinalgError(f"dimension mismatch: {a.size} vs {b.size}")
    return complex(np.vdot(a, b))


def outer_product(v, tol: float = TOL) -> np.ndarray:
    """Return the projector ``|v><v|`` of a normalized vector.

    Raises
    ------
    LinalgError
        If ``| <v|v> - 1 | > tol``.
    """
    v = as_vector(v)
    dev = abs(np.vdot(v, v).real - 1.0)
    if dev > tol:
        raise LinalgError(f"vector is not normalized: |<v|v> - 1| = {dev:.3e} > {tol:g}")
    return np.outer(v, v.conj())


def unitarity_deviation(u) -> float:
    """max(|U^dag U - I|, |U U^dag - I|), entrywise."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise LinalgError(f"expected a square matrix, got shape {u.shape}")
    eye = np.eye(u.shape[0])
    uh = u.conj().T
    return float(max(np.abs(uh @ u - eye).max(), np.abs(u @ uh - eye).max()))


def is_unitary(u, tol: float = TOL) -> bool:
    return unitarity_deviation(u) <= tol


def hermiticity_deviation(a) -> float:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise LinalgError(f"expected a square matrix, got shape {a.shape}")
    return float(np.abs(a - a.conj().T).max())


def is_hermitian(a, tol: float = TOL) -> bool:
    return hermiticity_deviation(a) <= tol


def qr_retract(m: np.ndarray) -> np.ndarray:
    """Map a (stack of) full-rank square matrices to the nearest-by-QR unitary.

    The Q factor is multiplied by the phases of diag(R), which makes the
    result unique and turns Q of a complex Ginibre matrix into a Haar sample.
    Works on arrays of shape ``(..., n, n)``.
    """
    q, r = np.linalg.qr(m)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    mag = np.abs(diag)
    phases = np.where(mag > 0, diag / np.where(mag > 0, mag, 1.0), 1.0)
    return q * phases[..., None, :]


def make_rng(seed: int) -> np.random.Generator:
    """Generator for a 64-bit unsigned seed. Same seed, same stream."""
    if not 0 <= seed <= _MASK64:
        raise LinalgError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(seed))


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def child_seed(seed: int, stream: int) -> int:
    """Seed of the ``stream``-th child: ``seed XOR splitmix64(stream)``."""
    return (seed & _MASK64) ^ _splitmix64(stream)


def child_rng(seed: int, stream: int) -> np.random.Generator:
    return make_rng(child_seed(seed, stream))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random ``dim x dim`` unitary.

    QR of a complex Gaussian matrix followed by the diag(R) phase fix.
    """
    if dim < 1:
        raise LinalgError(f"dimension must be >= 1, got {dim}")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    return qr_retract(z)


def orthonormal_completion(partial, dim: int, tol: float = 1e-6) -> list[np.ndarray]:
    """Extend ``partial`` to an orthonormal basis of C^dim.

    Canonical basis vectors e_0, e_1, ... are tried in index order; each is
    orthogonalised (twice, for stability) against everything accepted so far
    and kept if a non-negligible component survives.  The input vectors are
    not modified and are not required to be exactly orthonormal; the new
    vectors are orthogonal to their span.

    Returns the ``dim - len(partial)`` new vectors.
    """
    vecs = [as_vector(v) for v in partial]
    for v in vecs:
        if v.size != dim:
            raise LinalgError(f"vector of dimension {v.size} does not live in C^{dim}")
    if len(vecs) >= dim:
        raise LinalgError(f"need fewer than {dim} vectors, got {len(vecs)}")
    if vecs:
        sv = np.linalg.svd(np.column_stack(vecs), compute_uv=False)
        if sv[-1] <= tol * max(sv[0], 1.0):
            raise LinalgError("input vectors are linearly dependent")
        # orthonormal basis of the span, used only for projecting
        q, _ = np.linalg.qr(np.column_stack(vecs))
        basis = [q[:, k] for k in range(q.shape[1])]
    else:
        basis = []

    new: list[np.ndarray] = []
    for k in range(dim):
        if len(basis) == dim:
            break
        w = np.zeros(dim, dtype=complex)
        w[k] = 1.0
        for _ in range(2):
            for b in basis:
                w = w - np.vdot(b, w) * b
        norm = np.linalg.norm(w)
        if norm > 1e-3:
            w = w / norm
            basis.append(w)
            new.append(w)
    return new
