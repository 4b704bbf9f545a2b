"""Dense Hermitian eigensolver, Gram products and snapshot-method PCA."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DimensionError, RankError, SymmetryError

MAX_SWEEPS = 30
HERMITIAN_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenpairs of a Hermitian matrix.

    ``eigenvalues`` are real and sorted non-increasing; column ``i`` of
    ``eigenvectors`` pairs with ``eigenvalues[i]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0


@dataclass(frozen=True, eq=False)
class PrincipalSubspace:
    """Orthonormal basis ``B_k`` (p x k) and its retained eigenvalues."""

    basis: np.ndarray
    eigenvalues: np.ndarray
    spectrum: np.ndarray  # every eigenvalue of the Gram matrix, descending
    rank: int

    @property
    def p(self):
        return self.basis.shape[0]

    @property
    def k(self):
        return self.basis.shape[1]


def _as_square(M):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DimensionError("matrix has non-finite entries")
    if np.iscomplexobj(M):
        return M.astype(np.complex128)
    return M.astype(np.float64)


def canonicalize_phase(V):
    """Rotate each column so its largest-magnitude entry is real and positive."""
    V = np.array(V, copy=True)
    if V.size == 0:
        return V
    pivots = np.argmax(np.abs(V), axis=0)
    ref = V[pivots, np.arange(V.shape[1])]
    mag = np.abs(ref)
    phase = np.where(mag > 0, ref / np.where(mag > 0, mag, 1.0), 1.0)
    V = V / phase[np.newaxis, :]
    if np.iscomplexobj(V):
        V[pivots, np.arange(V.shape[1])] = V[pivots, np.arange(V.shape[1])].real
    return V


def hermitian_eig(M, tol=1e-14, max_sweeps=MAX_SWEEPS):
    """Eigendecomposition of a Hermitian (or real symmetric) matrix.

    Cyclic Jacobi: every sweep visits the upper-triangular pairs ``(p, q)`` in
    row order and annihilates ``M[p, q]`` with a complex Givens rotation.  The
    rotation first strips the phase of ``M[p, q]`` and then applies the real
    symmetric Jacobi angle, so real input stays real throughout.

    Iteration stops once ``max |off-diagonal| <= tol * ||M||_F``.

    Parameters
    ----------
    M : (n, n) array_like
        Hermitian within ``1e-9 * max|M|``; the Hermitian part is used.
    tol : float
        Relative off-diagonal threshold.
    max_sweeps : int
        Cap on full sweeps; exceeding it raises :class:`ConvergenceError`.

    Returns
    -------
    EigenDecomposition
        Eigenvalues descending, eigenvectors phase-canonicalized.
    """
    A = _as_square(M)
    n = A.shape[0]
    scale = np.max(np.abs(A)) if A.size else 0.0
    if np.max(np.abs(A - A.conj().T), initial=0.0) > HERMITIAN_RTOL * scale:
        raise SymmetryError("matrix is not Hermitian within tolerance")
    A = 0.5 * (A + A.conj().T)
    V = np.eye(n, dtype=A.dtype)

    threshold = tol * np.linalg.norm(A)
    sweeps = 0
    iu = np.triu_indices(n, 1)
    real = not np.iscomplexobj(A)
    while True:
        off = np.max(np.abs(A[iu]), initial=0.0)
        if off <= threshold:
            break
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal {off:.3e})"
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = complex(A[p, q])
                r = abs(apq)
                if r <= threshold:
                    continue
                phase = apq / r
                theta = 0.5 * math.atan2(2.0 * r, A[q, q].real - A[p, p].real)
                c, s = math.cos(theta), math.sin(theta)
                if real:
                    phase = phase.real
                cph = phase.conjugate()
                # J = diag(1, conj(phase)) @ [[c, s], [-s, c]]; A <- J^H A J, V <- V J
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * ap - (s * cph) * aq
                A[:, q] = s * ap + (c * cph) * aq
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - (s * phase) * rq
                A[q, :] = s * rp + (c * phase) * rq
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - (s * cph) * vq
                V[:, q] = s * vp + (c * cph) * vq
        sweeps += 1

    w = np.real(np.diag(A)).copy()
    order = np.argsort(-w, kind="stable")
    return EigenDecomposition(w[order], canonicalize_phase(V[:, order]), sweeps)


def gram(Z, serial=False):
    """``Z^H Z`` as an exactly Hermitian matrix.

    The default path uses a BLAS product; ``serial=True`` evaluates each upper
    entry with its own dot product in a fixed order and is the bit-reproducible
    reference.
    """
    Z = np.asarray(Z)
    if Z.ndim != 2 or Z.size == 0:
        raise DimensionError(f"gram needs a non-empty 2-D matrix, got shape {Z.shape}")
    n = Z.shape[1]
    if serial:
        T = np.empty((n, n), dtype=np.result_type(Z.dtype, np.float64))
        cols = [np.ascontiguousarray(Z[:, j]) for j in range(n)]
        for i in range(n):
            for j in range(i, n):
                T[i, j] = np.vdot(cols[i], cols[j])
                T[j, i] = np.conj(T[i, j])
            T[i, i] = T[i, i].real
        return T
    T = Z.conj().T @ Z
    T = np.triu(T) + np.triu(T, 1).conj().T
    T[np.diag_indices(n)] = T.diagonal().real
    return T


def numerical_rank(eigenvalues, n=None, reference=0.0):
    """Count of eigenvalues above ``n * eps * max(lambda_max, reference)``.

    ``reference`` lets callers that derived the matrix from larger data (e.g.
    after centering) measure rounding residue against the original scale.
    """
    w = np.asarray(eigenvalues, dtype=float)
    if w.size == 0:
        return 0
    n = w.size if n is None else n
    lam_max = max(w.max(), reference)
    if lam_max <= 0:
        return 0
    cutoff = n * np.finfo(float).eps * lam_max
    return int(np.count_nonzero(w > cutoff))


def snapshot_pca(Z, k, serial=False, tol=1e-14, reference=0.0):
    """Leading ``k`` eigenvectors of ``Z Z^H`` via the n x n Gram matrix.

    With ``T = Z^H Z = U L U^H`` the basis is ``B_k = Z U_k L_k^{-1/2}``; the
    nonzero spectra of ``Z Z^H`` and ``Z^H Z`` coincide.  ``reference`` is
    passed to :func:`numerical_rank`.
    """
    Z = np.asarray(Z)
    T = gram(Z, serial=serial)
    eig = hermitian_eig(T, tol=tol)
    rank = numerical_rank(eig.eigenvalues, reference=reference)
    k = int(k)
    if k < 1:
        raise RankError(f"k must be at least 1, got {k}", rank=rank)
    if k > rank:
        raise RankError(f"k={k} exceeds the numerical rank {rank}", rank=rank)
    lam = eig.eigenvalues[:k]
    B = (Z @ eig.eigenvectors[:, :k]) / np.sqrt(lam)[np.newaxis, :]
    return PrincipalSubspace(basis=B, eigenvalues=lam.copy(), spectrum=eig.eigenvalues.copy(), rank=rank)
