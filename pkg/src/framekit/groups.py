"""Group elements acting on point clouds: permutations, rotations,
orthogonal maps and translations, plus stabilizer computation.

Conventions
-----------
A point cloud is a d x n array whose columns are points.  A permutation g
acts on columns from the left: column j of g.X is column g^{-1}(j) of X,
so act(g, act(h, X)) == act(compose(g, h), X) for every pair.  Rotations
and orthogonal maps act by matrix multiplication from the left, and
translations add the same vector to every column.
"""

from dataclasses import dataclass, field

import numpy as np

from .cloud import as_cloud

ORTHO_TOL = 1e-10
DET_TOL = 1e-8
MATRIX_EQ_TOL = 1e-10


class GroupError(ValueError):
    pass


@dataclass(frozen=True)
class Permutation:
    """Element of S_n stored as the image array: perm[i] = g(i), 0-based."""

    perm: tuple

    def __post_init__(self):
        p = tuple(int(v) for v in self.perm)
        object.__setattr__(self, "perm", p)
        if sorted(p) != list(range(len(p))):
            raise GroupError("not a permutation of 0..n-1: %r" % (p,))

    @property
    def group(self):
        return "Sn"

    @property
    def n(self):
        return len(self.perm)


def _check_orthogonal(m):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise GroupError("matrix must be square")
    d = m.shape[0]
    err = np.max(np.abs(m.T @ m - np.eye(d)))
    if err > ORTHO_TOL:
        raise GroupError("matrix is not orthogonal: max |Q^T Q - I| = %.3e" % err)
    return m


@dataclass(frozen=True)
class Rotation:
    """Element of SO(d): orthogonal with determinant +1."""

    m: np.ndarray

    def __post_init__(self):
        m = _check_orthogonal(self.m)
        det = np.linalg.det(m)
        if abs(det - 1.0) > DET_TOL:
            raise GroupError("rotation must have det 1, got %.12f" % det)
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "m", m)

    @property
    def group(self):
        return "SOd"

    @property
    def d(self):
        return self.m.shape[0]


@dataclass(frozen=True)
class Orthogonal:
    """Element of O(d): orthogonal with determinant +1 or -1."""

    m: np.ndarray

    def __post_init__(self):
        m = _check_orthogonal(self.m).copy()
        det = np.linalg.det(m)
        if abs(abs(det) - 1.0) > DET_TOL:
            raise GroupError("orthogonal matrix must have |det| 1, got %.12f" % det)
        m.flags.writeable = False
        object.__setattr__(self, "m", m)

    @property
    def group(self):
        return "Od"

    @property
    def d(self):
        return self.m.shape[0]


@dataclass(frozen=True)
class Translation:
    """Element of (R^d, +), acting by adding t to every column."""

    t: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).reshape(-1).copy()
        t.flags.writeable = False
        object.__setattr__(self, "t", t)

    @property
    def group(self):
        return "Trans"

    @property
    def d(self):
        return self.t.shape[0]


GroupElement = (Permutation, Rotation, Orthogonal, Translation)


def rotation_2d(theta):
    c, s = np.cos(theta), np.sin(theta)
    return Rotation(np.array([[c, -s], [s, c]]))


def identity_element(group, size):
    """Identity of the given group tag; size is n for Sn, d otherwise."""
    if group == "Sn":
        return Permutation(tuple(range(size)))
    if group == "SOd":
        return Rotation(np.eye(size))
    if group == "Od":
        return Orthogonal(np.eye(size))
    if group == "Trans":
        return Translation(np.zeros(size))
    raise GroupError("unknown group tag %r" % group)


def act(g, X):
    """Apply a group element to a point cloud (columns are points)."""
    X = as_cloud(X)
    if isinstance(g, Permutation):
        if g.n != X.shape[1]:
            raise GroupError("permutation size %d != n=%d" % (g.n, X.shape[1]))
        inv = inverse(g)
        return X[:, list(inv.perm)]
    if isinstance(g, (Rotation, Orthogonal)):
        if g.d != X.shape[0]:
            raise GroupError("matrix size %d != d=%d" % (g.d, X.shape[0]))
        return g.m @ X
    if isinstance(g, Translation):
        if g.d != X.shape[0]:
            raise GroupError("translation size %d != d=%d" % (g.d, X.shape[0]))
        return X + g.t[:, None]
    raise GroupError("cannot act with %r" % (g,))


def compose(g, h):
    """Group product g*h (apply h first, then g)."""
    if isinstance(g, Permutation) and isinstance(h, Permutation):
        if g.n != h.n:
            raise GroupError("permutation sizes differ")
        return Permutation(tuple(g.perm[h.perm[i]] for i in range(g.n)))
    if isinstance(g, Rotation) and isinstance(h, Rotation):
        return Rotation(g.m @ h.m)
    if isinstance(g, (Rotation, Orthogonal)) and isinstance(h, (Rotation, Orthogonal)):
        return Orthogonal(g.m @ h.m)
    if isinstance(g, Translation) and isinstance(h, Translation):
        return Translation(g.t + h.t)
    raise GroupError("cannot compose %r with %r" % (type(g), type(h)))


def inverse(g):
    if isinstance(g, Permutation):
        inv = [0] * g.n
        for i, v in enumerate(g.perm):
            inv[v] = i
        return Permutation(tuple(inv))
    if isinstance(g, Rotation):
        return Rotation(g.m.T)
    if isinstance(g, Orthogonal):
        return Orthogonal(g.m.T)
    if isinstance(g, Translation):
        return Translation(-g.t)
    raise GroupError("cannot invert %r" % (g,))


def elements_equal(g, h, tol=MATRIX_EQ_TOL):
    """Equality test used for frame atom dedup: exact for permutations,
    entrywise within tol for matrices and translations."""
    if type(g) is not type(h):
        return False
    if isinstance(g, Permutation):
        return g.perm == h.perm
    if isinstance(g, (Rotation, Orthogonal)):
        return g.m.shape == h.m.shape and np.max(np.abs(g.m - h.m)) <= tol
    if isinstance(g, Translation):
        return g.t.shape == h.t.shape and np.max(np.abs(g.t - h.t)) <= tol
    raise GroupError("cannot compare %r" % (g,))


def element_to_dict(g):
    if isinstance(g, Permutation):
        return {"group": "Sn", "perm": list(g.perm)}
    if isinstance(g, Rotation):
        return {"group": "SOd", "matrix": g.m.tolist()}
    if isinstance(g, Orthogonal):
        return {"group": "Od", "matrix": g.m.tolist()}
    if isinstance(g, Translation):
        return {"group": "Trans", "t": g.t.tolist()}
    raise GroupError("cannot serialize %r" % (g,))


def element_from_dict(obj):
    tag = obj["group"]
    if tag == "Sn":
        return Permutation(tuple(obj["perm"]))
    if tag == "SOd":
        return Rotation(np.array(obj["matrix"], dtype=float))
    if tag == "Od":
        return Orthogonal(np.array(obj["matrix"], dtype=float))
    if tag == "Trans":
        return Translation(np.array(obj["t"], dtype=float))
    raise GroupError("unknown group tag %r" % tag)


# ---------------------------------------------------------------------------
# stabilizer descriptors


@dataclass(frozen=True)
class Trivial:
    kind = "trivial"


@dataclass(frozen=True)
class FullGroup:
    kind = "full"


@dataclass(frozen=True)
class SnPartition:
    """Stabilizer of X in S_n: product of symmetric groups over the classes
    of equal columns.  classes is a tuple of tuples of column indices."""

    classes: tuple
    kind = "sn-partition"

    def __post_init__(self):
        cl = tuple(tuple(int(i) for i in c) for c in self.classes)
        object.__setattr__(self, "classes", cl)

    def order(self):
        from math import factorial

        out = 1
        for c in self.classes:
            out *= factorial(len(c))
        return out


@dataclass(frozen=True)
class RotSpan:
    """Stabilizer of a rank-deficient X in SO(d) or O(d): maps fixing
    span(X) pointwise.  basis is a d x rank orthonormal basis of the span."""

    rank: int
    basis: np.ndarray
    kind = "rot-span"

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float).copy()
        b.flags.writeable = False
        object.__setattr__(self, "basis", b)


def numerical_rank(X, rank_tol=1e-9):
    """Rank of X with singular values below rank_tol * sigma_max treated as 0."""
    X = np.asarray(X, dtype=float)
    s = np.linalg.svd(X, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rank_tol * s[0]))


def stabilizer(X, group, eq_tol=0.0, rank_tol=1e-9):
    """Describe the stabilizer of X in the given group.

    For Sn the descriptor is the partition of columns into classes of equal
    columns (within eq_tol, max norm); all-singleton partitions collapse to
    Trivial.  For SOd / Od the descriptor is FullGroup at X = 0, Trivial when
    the rank is large enough for the pointwise span-fixing subgroup to be
    trivial (rank >= d-1 for SOd, rank >= d for Od), and otherwise RotSpan
    with an orthonormal basis of span(X).  Translations act freely: Trivial.
    """
    X = as_cloud(X)
    d, n = X.shape
    if group == "Trans":
        return Trivial()
    if group == "Sn":
        classes = []
        assigned = [False] * n
        for i in range(n):
            if assigned[i]:
                continue
            cls = [i]
            assigned[i] = True
            for j in range(i + 1, n):
                if not assigned[j] and np.max(np.abs(X[:, i] - X[:, j])) <= eq_tol:
                    cls.append(j)
                    assigned[j] = True
            classes.append(tuple(cls))
        if all(len(c) == 1 for c in classes):
            return Trivial()
        return SnPartition(tuple(classes))
    if group in ("SOd", "Od"):
        if np.max(np.abs(X)) == 0.0:
            return FullGroup()
        r = numerical_rank(X, rank_tol=rank_tol)
        if group == "SOd" and r >= d - 1:
            return Trivial()
        if group == "Od" and r >= d:
            return Trivial()
        u, s, _ = np.linalg.svd(X)
        return RotSpan(rank=r, basis=u[:, :r])
    raise GroupError("unknown group tag %r" % group)
