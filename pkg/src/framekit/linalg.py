"""Linear-algebra kernels: Gram volumes, Gram-Schmidt frames for selected
columns, symmetric PSD square roots, and Haar-uniform random rotations."""

import numpy as np

from .cloud import as_cloud
from .groups import Orthogonal, Rotation

PSD_SYM_TOL = 1e-10
PSD_EIG_FLOOR = -1e-10
GS_RANK_TOL = 1e-9


class LinalgError(ValueError):
    pass


def gram_delta(V):
    """Volume sqrt(|det(V^T V)|) of the parallelepiped spanned by the columns
    of V.  Determinants that are negative or negligible against the Hadamard
    bound prod_j ||v_j||^2 (pure roundoff) are clamped to zero, so the result
    is 0 for linearly dependent columns."""
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    G = V.T @ V
    det = np.linalg.det(G)
    hadamard = float(np.prod(np.diag(G)))
    if det <= 1e-13 * hadamard:
        return 0.0
    return float(np.sqrt(det))


def psd_sqrt(M, sym_tol=PSD_SYM_TOL):
    """Symmetric PSD square root via eigendecomposition.

    @param M: symmetric positive semidefinite matrix (eigenvalues may dip to
        -1e-10 from roundoff; they are clamped at zero).
    @return: symmetric B with B @ B == M up to roundoff.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise LinalgError("psd_sqrt needs a square matrix")
    scale = max(1.0, float(np.max(np.abs(M))))
    if np.max(np.abs(M - M.T)) > sym_tol * scale:
        raise LinalgError("psd_sqrt: matrix is not symmetric")
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    if np.min(w) < PSD_EIG_FLOOR * scale:
        raise LinalgError("psd_sqrt: matrix has negative eigenvalue %.3e" % np.min(w))
    w = np.clip(w, 0.0, None)
    B = (V * np.sqrt(w)) @ V.T
    return 0.5 * (B + B.T)


def _complete_direction(qs, d):
    """Lexicographically first standard basis vector with a nonzero residual
    after projecting out the directions in qs, normalized."""
    for i in range(d):
        v = np.zeros(d)
        v[i] = 1.0
        for q in qs:
            v -= (q @ v) * q
        nrm = np.linalg.norm(v)
        if nrm > 1e-12:
            for q in qs:
                v -= (q @ v) * q
            return v / np.linalg.norm(v)
    raise LinalgError("cannot complete orthonormal basis")


def gram_schmidt_rotation(X, idx, special=True, rank_tol=GS_RANK_TOL):
    """Orthogonal change of basis aligning selected columns of X with a
    fixed upper-triangular template.

    Runs Gram-Schmidt on the columns X[:, idx] in order.  Columns that are
    numerically dependent on their predecessors (residual below
    rank_tol * ||X||_F) contribute no new direction; the basis is then
    completed with the lexicographically-first-standard-basis-vector rule.
    Returns (g, A) with g in SO(d) (special=True) or O(d), A = g^T X[:, idx]
    upper triangular with nonnegative diagonal, and A^T A equal to the Gram
    matrix of the selected columns.

    With special=True the last completed basis vector is sign-flipped if
    needed to reach det +1, so the selected columns must span at most d-1
    dimensions for A to be unaffected; this holds whenever len(idx) <= d-1
    or the columns are rank deficient.
    """
    X = as_cloud(X)
    d = X.shape[0]
    idx = [int(i) for i in idx]
    scale = max(np.linalg.norm(X), 1.0)
    qs = []  # orthonormal directions actually spanned by the selected columns
    ranks = []  # ranks[j]: span dimension of the first j+1 selected columns
    for i in idx:
        v = X[:, i].copy()
        for q in qs:
            v -= (q @ v) * q
        nrm = np.linalg.norm(v)
        if nrm > rank_tol * scale:
            # reorthogonalize once more: the first pass loses precision when
            # the residual is small against the column norm
            for q in qs:
                v -= (q @ v) * q
            qs.append(v / np.linalg.norm(v))
        ranks.append(len(qs))
    span_rank = len(qs)
    basis = list(qs)
    while len(basis) < d:
        basis.append(_complete_direction(basis, d))
    g = np.column_stack(basis)
    if special and np.linalg.det(g) < 0:
        if span_rank >= d:
            raise LinalgError(
                "gram_schmidt_rotation: selected columns span all of R^d, "
                "cannot force det +1 without changing A"
            )
        g[:, -1] = -g[:, -1]
    A = g.T @ X[:, idx]
    # zero out the entries that are structurally below the triangle
    for j in range(len(idx)):
        A[ranks[j]:, j] = 0.0
    elem = Rotation(g) if special else Orthogonal(g)
    return elem, A


def haar_rotation(d, rng):
    """Haar-uniform element of SO(d): QR of a Gaussian matrix with the sign
    correction, then a last-column flip onto the det +1 component."""
    Z = rng.standard_normal((d, d))
    Q, R = np.linalg.qr(Z)
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, -1] = -Q[:, -1]
    return Rotation(Q)


def haar_orthogonal(d, rng):
    """Haar-uniform element of O(d): a Haar rotation times a coin-flip
    reflection of the last coordinate."""
    g = haar_rotation(d, rng)
    m = np.array(g.m)
    if rng.random() < 0.5:
        m[:, -1] = -m[:, -1]
    return Orthogonal(m)


def unit_direction(d, rng):
    """Uniform point on S^{d-1} via a normalized Gaussian."""
    while True:
        v = rng.standard_normal(d)
        nrm = np.linalg.norm(v)
        if nrm > 1e-12:
            return v / nrm
