"""Canonicalizations: maps picking one representative per group orbit.

Each map c satisfies c(g.X) = c(X) for every g in its group.  Some of them
are necessarily discontinuous at orbits with nontrivial stabilizer
(canon_lex at clouds with tied columns, canon_so2_phase at z_1 = 0); the
diagnostics module can certify that.
"""

import numpy as np

from .cloud import as_cloud
from .groups import Translation
from .linalg import psd_sqrt

GRAM_MATCH_TOL = 1e-8


class CanonError(ValueError):
    pass


def canon_translation(X):
    """Quotient by translations: move the first point to the origin.

    Returns (Y, h) with Y = X - x_1 (so Y's first column is 0) and the group
    canonicalization h with act(h, Y) == X.
    """
    X = as_cloud(X)
    h = Translation(X[:, 0].copy())
    return X - X[:, [0]], h


def canon_sort(X):
    """Sort the columns of a 1 x n cloud ascending (S_n orbit representative,
    continuous)."""
    X = as_cloud(X, d=1)
    return np.sort(X, axis=1)


def canon_lex(X):
    """Sort columns lexicographically: by first coordinate, ties broken by
    the second, and so on.  Exact comparisons, no tolerance; discontinuous
    at clouds where two columns share a prefix of coordinates."""
    X = as_cloud(X)
    order = np.lexsort(X[::-1, :])
    return X[:, order]


def canon_norm_axis(X):
    """For a single point (d x 1): rotate it onto ||x|| e_1.  Continuous on
    R^d \\ {0} and at 0 (0 maps to 0)."""
    X = as_cloud(X)
    if X.shape[1] != 1:
        raise CanonError("canon_norm_axis expects a single column")
    out = np.zeros_like(X)
    out[0, 0] = np.linalg.norm(X[:, 0])
    return out


def canon_so2_phase(Z):
    """Quotient 2 x n clouds (viewed as complex rows) by SO(2): rotate so the
    first point lands on the positive real axis.  Takes the identity branch
    when z_1 = 0; discontinuous there."""
    Z = as_cloud(Z, d=2)
    x, y = Z[0, 0], Z[1, 0]
    r = np.hypot(x, y)
    if r == 0.0:
        return Z.copy()
    c, s = x / r, y / r
    # multiply every column by conj(z_1)/|z_1|, i.e. rotate by -angle(z_1)
    rot = np.array([[c, s], [-s, c]])
    return rot @ Z


def canon_od_gram(X):
    """O(d) orbit representative of a d x n cloud with n <= d: the positive
    square root of the Gram matrix, padded back to d rows.

    Zero columns are appended to make the cloud square, Y = psd_sqrt of the
    padded Gram matrix is computed, and the first n columns of Y are
    returned.  The output has the same Gram matrix as X, so it lies on the
    same O(d) orbit, and it depends on X only through X^T X, so it is
    invariant and continuous.
    """
    X = as_cloud(X)
    d, n = X.shape
    if n > d:
        raise CanonError("canon_od_gram needs n <= d, got n=%d > d=%d" % (n, d))
    Xp = np.zeros((d, d))
    Xp[:, :n] = X
    Y = psd_sqrt(Xp.T @ Xp)
    out = Y[:, :n]
    gram_err = np.max(np.abs(out.T @ out - X.T @ X))
    if gram_err > GRAM_MATCH_TOL * (1.0 + float(np.max(np.abs(X.T @ X)))):
        raise CanonError("canon_od_gram: Gram mismatch %.3e" % gram_err)
    return out


def best_rotation_onto(X, Y):
    """Rotation R in SO(d) minimizing ||R X - Y||_F (Kabsch, det-constrained
    Procrustes).  Returns (R, residual)."""
    X = as_cloud(X)
    Y = as_cloud(Y, d=X.shape[0])
    U, _, Vt = np.linalg.svd(Y @ X.T)
    d = X.shape[0]
    signs = np.ones(d)
    signs[-1] = np.sign(np.linalg.det(U @ Vt)) or 1.0
    R = U @ np.diag(signs) @ Vt
    return R, float(np.linalg.norm(R @ X - Y, "fro"))


def canon_sod(X):
    """SO(d) orbit representative for n <= d-1 columns.  With that few
    points the SO(d) and O(d) orbits coincide (any needed reflection can be
    absorbed in the unused dimensions), so this is canon_od_gram with a
    tighter precondition.  The output is verified to lie on the input's
    SO(d) orbit via det-constrained Procrustes."""
    X = as_cloud(X)
    d, n = X.shape
    if n > d - 1:
        raise CanonError("canon_sod needs n <= d-1, got n=%d, d=%d" % (n, d))
    out = canon_od_gram(X)
    _, resid = best_rotation_onto(X, out)
    if resid > GRAM_MATCH_TOL * (1.0 + np.linalg.norm(X)):
        raise CanonError("canon_sod: output is not on the SO(d) orbit "
                         "(Procrustes residual %.3e)" % resid)
    return out


CANON_METHODS = {
    "translation": lambda X: canon_translation(X)[0],
    "sort": canon_sort,
    "lex": canon_lex,
    "norm-axis": canon_norm_axis,
    "so2-phase": canon_so2_phase,
    "od-gram": canon_od_gram,
    "sod": canon_sod,
}
