"""Point clouds as d x n arrays, columns are points, plus JSON round-trip."""

import json

import numpy as np


class CloudError(ValueError):
    pass


def as_cloud(X, d=None):
    """Validate and return a float copy of a d x n point cloud.

    @param X: array-like, shape (d, n). Columns are points.
    @param d: if given, require this ambient dimension.
    @return: np.ndarray of float64, shape (d, n).
    """
    A = np.asarray(X, dtype=float)
    if A.ndim != 2:
        raise CloudError("point cloud must be a 2-d array, got ndim=%d" % A.ndim)
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise CloudError("point cloud must have at least one row and one column")
    if d is not None and A.shape[0] != d:
        raise CloudError("expected ambient dimension %d, got %d" % (d, A.shape[0]))
    if not np.all(np.isfinite(A)):
        raise CloudError("point cloud contains non-finite entries")
    return A.copy()


def has_distinct_columns(X, tol=0.0):
    """True when no two columns coincide (within tol in max norm)."""
    X = np.asarray(X, dtype=float)
    n = X.shape[1]
    for i in range(n):
        for j in range(i + 1, n):
            if np.max(np.abs(X[:, i] - X[:, j])) <= tol:
                return False
    return True


def cloud_to_dict(X):
    X = as_cloud(X)
    d, n = X.shape
    return {"d": d, "n": n, "columns": [X[:, j].tolist() for j in range(n)]}


def cloud_from_dict(obj):
    d = int(obj["d"])
    n = int(obj["n"])
    cols = obj["columns"]
    if len(cols) != n:
        raise CloudError("cloud JSON: expected %d columns, got %d" % (n, len(cols)))
    X = np.array(cols, dtype=float).T
    return as_cloud(X, d=d)


def save_cloud(path, X):
    with open(path, "w") as fh:
        json.dump(cloud_to_dict(X), fh, indent=1)


def load_cloud(path):
    with open(path) as fh:
        return cloud_from_dict(json.load(fh))
