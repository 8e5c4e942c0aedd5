"""Group-averaging projection operators built from weighted frames.

project_invariant turns any function of a cloud into an (approximately)
invariant one, project_equivariant into an equivariant one, and
project_canonical does the same by composing with a canonicalization.
average_over_stabilizer implements the stabilizer smoothing that weak
equivariance is stated through.
"""

import itertools
import math

import numpy as np

from .cloud import as_cloud
from .frames import WeightedFrame, make_frame, pushforward, reynolds_frame
from .groups import (
    FullGroup,
    Orthogonal,
    Permutation,
    Rotation,
    RotSpan,
    SnPartition,
    Trivial,
    act,
    compose,
    inverse,
)
from .linalg import haar_orthogonal, haar_rotation


class ProjectError(ValueError):
    pass


def _resolve_frame(frame_or_map, X):
    if isinstance(frame_or_map, WeightedFrame):
        return frame_or_map
    return frame_or_map(X)


def project_invariant(frame_or_map, f, X):
    """Weighted invariant average: sum_g w_g f(g^{-1}.X).

    frame_or_map is either a WeightedFrame or a map X -> WeightedFrame;
    f maps a cloud to a scalar or array.
    """
    X = as_cloud(X)
    mu = _resolve_frame(frame_or_map, X)
    acc = None
    for w, g in mu.atoms:
        val = w * np.asarray(f(act(inverse(g), X)), dtype=float)
        acc = val if acc is None else acc + val
    return acc


def project_equivariant(frame_or_map, f, X):
    """Weighted equivariant average: sum_g w_g g.f(g^{-1}.X).

    f must map a d x n cloud to a d x n cloud (same group action on the
    output as on the input).
    """
    X = as_cloud(X)
    mu = _resolve_frame(frame_or_map, X)
    acc = None
    for w, g in mu.atoms:
        val = w * act(g, np.asarray(f(act(inverse(g), X)), dtype=float))
        acc = val if acc is None else acc + val
    return acc


def project_canonical(canon, f, X):
    """Invariant by canonicalization: f(c(X))."""
    return f(canon(as_cloud(X)))


# ---------------------------------------------------------------------------
# stabilizer averaging

CIRCLE_QUAD_K = 256


def _sn_partition_elements(part, n):
    """All permutations preserving every class of the partition."""
    classes = [list(c) for c in part.classes]
    pools = [list(itertools.permutations(c)) for c in classes]
    out = []
    for choice in itertools.product(*pools):
        perm = list(range(n))
        for cls, img in zip(classes, choice):
            for a, b in zip(cls, img):
                perm[a] = b
        out.append(Permutation(tuple(perm)))
    return out


def _planar_rotation(u, v, theta):
    """Rotation by theta inside the plane spanned by the orthonormal pair
    (u, v), identity on the complement."""
    d = u.shape[0]
    c, s = math.cos(theta), math.sin(theta)
    P = np.outer(u, u) + np.outer(v, v)
    R = np.eye(d) - P
    R += c * (np.outer(u, u) + np.outer(v, v)) + s * (np.outer(v, u) - np.outer(u, v))
    return R


def _octahedral_rotations():
    """The 24 rotation matrices of the cube: signed permutation matrices
    with determinant +1."""
    out = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1.0, -1.0), repeat=3):
            M = np.zeros((3, 3))
            for r, c in enumerate(perm):
                M[r, c] = signs[r]
            if np.linalg.det(M) > 0:
                out.append(M)
    return out


def stabilizer_quadrature(stab, group, d, n, quad_k=CIRCLE_QUAD_K):
    """Finite list of (weight, element) pairs averaging over the stabilizer.

    Exact for finite stabilizers (Trivial, SnPartition, the single
    reflection of O(d) at rank d-1).  Continuous stabilizers get cyclic
    quadratures: the full circle for SO(2)/O(2) at the origin, the circle of
    rotations about the span for rank-deficient clouds in d=3, and the
    24-element cube rotation group for the full SO(3)/O(3) at the origin
    (exact for the linear probe functions used by measure_distance).
    Anything left (d >= 4 with a stabilizer of dimension > 1) is rejected.
    """
    if isinstance(stab, Trivial):
        return [(1.0, _identity_for(group, d, n))]
    if isinstance(stab, SnPartition):
        els = _sn_partition_elements(stab, n)
        w = 1.0 / len(els)
        return [(w, g) for g in els]
    if isinstance(stab, FullGroup):
        if group == "Sn":
            fr = reynolds_frame(n)
            return list(fr.atoms)
        if d == 2:
            mk = Rotation if group == "SOd" else Orthogonal
            out = []
            for k in range(quad_k):
                th = 2 * math.pi * k / quad_k
                c, s = math.cos(th), math.sin(th)
                out.append((1.0 / quad_k, mk(np.array([[c, -s], [s, c]]))))
            if group == "Od":
                refl = np.array([[1.0, 0.0], [0.0, -1.0]])
                out = [(0.5 * w, g) for w, g in out] + [
                    (0.5 * w, Orthogonal(g.m @ refl)) for w, g in out
                ]
            return out
        if d == 3:
            mk = Rotation if group == "SOd" else Orthogonal
            mats = _octahedral_rotations()
            out = [(1.0 / len(mats), mk(M)) for M in mats]
            if group == "Od":
                out = [(0.5 * w, g) for w, g in out] + [
                    (0.5 * w, Orthogonal(-g.m)) for w, g in out
                ]
            return out
        raise ProjectError("no quadrature rule for the full group in d=%d" % d)
    if isinstance(stab, RotSpan):
        basis = np.asarray(stab.basis)
        d = basis.shape[0]
        comp_dim = d - stab.rank
        # orthonormal basis of the complement
        full = np.linalg.svd(basis, full_matrices=True)[0]
        comp = full[:, stab.rank:]
        if comp_dim <= 0:
            return [(1.0, _identity_for(group, d, n))]
        if comp_dim == 1:
            if group == "SOd":
                return [(1.0, Rotation(np.eye(d)))]
            refl = np.eye(d) - 2.0 * np.outer(comp[:, 0], comp[:, 0])
            return [(0.5, Orthogonal(np.eye(d))), (0.5, Orthogonal(refl))]
        if comp_dim == 2 and d <= 3:
            u, v = comp[:, 0], comp[:, 1]
            mk = Rotation if group == "SOd" else Orthogonal
            out = []
            for k in range(quad_k):
                th = 2 * math.pi * k / quad_k
                out.append((1.0 / quad_k, mk(_planar_rotation(u, v, th))))
            if group == "Od":
                refl = np.eye(d) - 2.0 * np.outer(v, v)
                out = [(0.5 * w, g) for w, g in out] + [
                    (0.5 * w, Orthogonal(g.m @ refl)) for w, g in out
                ]
            return out
        raise ProjectError(
            "no quadrature rule for a %d-dimensional stabilizer in d=%d" % (comp_dim, d)
        )
    raise ProjectError("unsupported stabilizer descriptor %r" % (stab,))


def _identity_for(group, d, n):
    from .groups import identity_element

    return identity_element(group, n if group == "Sn" else d)


def average_over_stabilizer(frame, stab, quad_k=CIRCLE_QUAD_K, d=None, n=None):
    """Stabilizer-smoothed frame: the average of the pushforwards s_*mu over
    the stabilizer described by stab.  Finite stabilizers are exact;
    continuous ones use the quadratures of stabilizer_quadrature."""
    if d is None or n is None:
        g0 = frame.atoms[0][1]
        if frame.group == "Sn":
            n = g0.n
            d = 1
        else:
            d = g0.d
            n = n or 1
    quad = stabilizer_quadrature(stab, frame.group, d, n, quad_k=quad_k)
    atoms = []
    for ws, s in quad:
        for w, g in frame.atoms:
            atoms.append((ws * w, compose(s, g)))
    if frame.group == "Sn":
        return make_frame(frame.group, atoms)
    # matrix-group quadratures can be large; dedup would be quadratic and
    # the downstream probe distance does not need it
    return WeightedFrame(frame.group, atoms)


# ---------------------------------------------------------------------------
# stable functions


def stable_fn_so2(q):
    """Make a cloud map stable at the origin for SO(2) by subtracting its
    value at zero: Z |-> q(Z) - q(0)."""

    def f(Z):
        Z = as_cloud(Z, d=2)
        return np.asarray(q(Z)) - np.asarray(q(np.zeros_like(Z)))

    return f


def stable_fn_o3(coeff):
    """Equivariant-by-construction cloud map for O(3): column k of the
    output is sum_j C[k, j] x_j with C = coeff(X) an n x n coefficient
    matrix.  If coeff is an invariant function of X the result is stable:
    everything fixing all columns of X fixes the output columns too."""

    def f(X):
        X = as_cloud(X, d=3)
        C = np.asarray(coeff(X), dtype=float)
        if C.shape != (X.shape[1],) * 2:
            raise ProjectError("coefficient matrix must be n x n")
        return X @ C.T

    return f


def stable_fn_so3(coeff, cross_coeff):
    """Stable cloud map for SO(3): the O(3) span part plus cross-product
    terms, column k gets sum_{i,j} D[k, i, j] (x_i x x_j)."""

    base = stable_fn_o3(coeff)

    def f(X):
        X = as_cloud(X, d=3)
        n = X.shape[1]
        D = np.asarray(cross_coeff(X), dtype=float)
        if D.shape != (n, n, n):
            raise ProjectError("cross coefficient tensor must be n x n x n")
        out = base(X)
        crosses = np.zeros((n, n, 3))
        for i in range(n):
            for j in range(n):
                crosses[i, j] = np.cross(X[:, i], X[:, j])
        out += np.einsum("kij,ijc->ck", D, crosses)
        return out

    return f


# ---------------------------------------------------------------------------
# plain Reynolds (full group) averaging, for baselines


def reynolds_invariant(f, X, group, budget=512, rng=None, quad_k=CIRCLE_QUAD_K):
    """Average f over the whole group: exact for S_n (n <= 8), circle
    quadrature for SO(2), Monte Carlo over Haar samples for SO(3)/O(3)."""
    X = as_cloud(X)
    d, n = X.shape
    if group == "Sn":
        fr = reynolds_frame(n)
        return project_invariant(fr, f, X)
    if group == "SOd" and d == 2:
        acc = None
        for k in range(quad_k):
            th = 2 * math.pi * k / quad_k
            g = Rotation(np.array([[math.cos(th), -math.sin(th)],
                                   [math.sin(th), math.cos(th)]]))
            val = np.asarray(f(act(inverse(g), X)), dtype=float) / quad_k
            acc = val if acc is None else acc + val
        return acc
    if group in ("SOd", "Od"):
        if rng is None:
            raise ProjectError("Monte Carlo averaging needs an rng")
        draw = haar_rotation if group == "SOd" else haar_orthogonal
        acc = None
        for _ in range(budget):
            g = draw(d, rng)
            val = np.asarray(f(act(inverse(g), X)), dtype=float) / budget
            acc = val if acc is None else acc + val
        return acc
    raise ProjectError("reynolds_invariant: unsupported group %r in d=%d" % (group, d))
