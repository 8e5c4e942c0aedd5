"""Weighted frames: finitely supported probability measures on a group,
attached to each point cloud so that group averaging stays continuous.

A frame here is a list of (weight, element) atoms.  The convention
throughout: an atom g enters projections as f(g^{-1}.X), so for sorting
frames the stored element is the sorting permutation itself and
act(inverse(g), X) is the sorted cloud.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .cloud import as_cloud
from .groups import (
    Orthogonal,
    Permutation,
    Rotation,
    act,
    compose,
    element_from_dict,
    element_to_dict,
    elements_equal,
    identity_element,
    inverse,
)
from .linalg import gram_delta, gram_schmidt_rotation, unit_direction

WEIGHT_SUM_TOL = 1e-12
WEIGHT_FLOOR = 1e-14


class FrameError(ValueError):
    pass


@dataclass
class WeightedFrame:
    """Finitely supported probability measure on a group."""

    group: str
    atoms: list  # list of (weight, element) pairs

    def __post_init__(self):
        for w, g in self.atoms:
            if w < 0:
                raise FrameError("negative atom weight %r" % w)
            if g.group != self.group:
                raise FrameError("atom group %r != frame group %r" % (g.group, self.group))
        total = sum(w for w, _ in self.atoms)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise FrameError("atom weights sum to %.17g, expected 1" % total)

    @property
    def size(self):
        return len(self.atoms)

    def weights(self):
        return np.array([w for w, _ in self.atoms])

    def elements(self):
        return [g for _, g in self.atoms]

    def sample(self, rng):
        """Draw one group element according to the atom weights."""
        w = self.weights()
        i = rng.choice(len(w), p=w / w.sum())
        return self.atoms[i][1]


def merge_atoms(atoms):
    """Combine duplicate atoms (exact permutation equality, matrices within
    1e-10) by summing their weights; drops zero-weight atoms."""
    atoms = [(w, g) for w, g in atoms if w != 0.0]
    if atoms and isinstance(atoms[0][1], Permutation):
        acc = {}
        for w, g in atoms:
            if g.perm in acc:
                acc[g.perm] = (acc[g.perm][0] + w, g)
            else:
                acc[g.perm] = (w, g)
        return list(acc.values())
    out = []
    for w, g in atoms:
        for k, (wk, gk) in enumerate(out):
            if elements_equal(g, gk):
                out[k] = (wk + w, gk)
                break
        else:
            out.append((w, g))
    return out


def make_frame(group, atoms, renormalize=False):
    atoms = merge_atoms(atoms)
    if not atoms:
        raise FrameError("frame has no atoms")
    if renormalize:
        total = sum(w for w, _ in atoms)
        atoms = [(w / total, g) for w, g in atoms]
    return WeightedFrame(group, atoms)


def pushforward(g, frame):
    """Image measure under left multiplication by g: atom h -> g*h."""
    return WeightedFrame(frame.group, [(w, compose(g, h)) for w, h in frame.atoms])


def frame_to_dict(frame):
    return {
        "group": frame.group,
        "atoms": [dict(element_to_dict(g), weight=w) for w, g in frame.atoms],
    }


def frame_from_dict(obj):
    atoms = [(float(a["weight"]), element_from_dict(a)) for a in obj["atoms"]]
    return WeightedFrame(obj["group"], atoms)


# ---------------------------------------------------------------------------
# permutation frames


def reynolds_frame(n):
    """Uniform measure on all of S_n.  Exact but factorially large; capped
    at n <= 8."""
    if n > 8:
        raise FrameError("reynolds_frame capped at n <= 8, got n=%d" % n)
    w = 1.0 / math.factorial(n)
    return WeightedFrame("Sn", [(w, Permutation(p)) for p in itertools.permutations(range(n))])


def _argsort_perm(vals):
    """Stable sorting permutation tau with vals[tau(0)] <= vals[tau(1)] <= ...
    Ties keep the original column order."""
    return Permutation(tuple(int(i) for i in np.argsort(vals, kind="stable")))


def is_a_separated(X, a):
    """Sorting permutation of the projections a^T x_j if they are strictly
    separated, else None.  Ties are exact comparisons: any two projected
    values that coincide exactly make X unseparated by a."""
    X = as_cloud(X)
    a = np.asarray(a, dtype=float).reshape(-1)
    vals = a @ X
    order = np.argsort(vals, kind="stable")
    sv = vals[order]
    if np.any(sv[1:] == sv[:-1]):
        return None
    return Permutation(tuple(int(i) for i in order))


def separated_collection(n, d, rng):
    """n(d-1) random unit directions; almost every draw separates almost
    every cloud with distinct columns."""
    m = n * (d - 1)
    return np.array([unit_direction(d, rng) for _ in range(m)])


def frame_separated(X, directions):
    """Margin-weighted sorting frame over a direction collection.

    Each direction a_i contributes the sorting permutation of a_i^T X with
    raw weight min_{s<t} |a_i^T (x_s - x_t)| (the separation margin);
    zero-margin directions are dropped.  Weights are normalized; duplicate
    permutations are merged.
    """
    X = as_cloud(X)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    n = X.shape[1]
    atoms = []
    for a in directions:
        vals = a @ X
        diffs = np.abs(vals[:, None] - vals[None, :])
        margin = np.min(diffs[np.triu_indices(n, k=1)]) if n > 1 else 1.0
        if margin > 0.0:
            atoms.append((float(margin), _argsort_perm(vals)))
    if not atoms:
        raise FrameError("collection fails to separate X")
    return make_frame("Sn", atoms, renormalize=True)


def _nullspace_vector(rows, d, rng=None):
    """Unit vector orthogonal to the given row vectors (requires that they
    span a proper subspace)."""
    if len(rows) == 0:
        v = np.zeros(d)
        v[0] = 1.0
        return v
    M = np.array(rows, dtype=float)
    _, s, Vt = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > 1e-12 * max(s[0], 1.0))) if s.size else 0
    if rank >= d:
        return None
    return Vt[-1]


def adversarial_unseparated(directions, n, tie_tol=1e-9):
    """A cloud with n distinct columns unseparated by every given direction.

    Exists whenever the collection has at most d(n-1) - 1 nonzero
    directions.  The construction: x_1 = 0; x_2 a nonzero vector orthogonal
    to the first d-1 directions; one extra point per following block of d
    independent directions, solving the block's homogeneous equations plus
    one tie-with-x_2 equation; one extra point orthogonal to each remaining
    (smaller or dependent) block; generic distinct fillers to reach n
    columns.  Every direction then projects two columns to equal values.

    Ties are produced by floating-point solves, so the internal verification
    checks the per-direction separation margin against tie_tol rather than
    exact equality.
    """
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    d = directions.shape[1]
    if d < 2 or n < 2:
        raise FrameError("adversarial_unseparated needs d >= 2 and n >= 2")
    norms = np.linalg.norm(directions, axis=1)
    live = [directions[i] / norms[i] for i in range(len(directions)) if norms[i] > 0]
    if len(live) > d * (n - 1) - 1:
        raise FrameError(
            "adversarial_unseparated: %d nonzero directions exceed the "
            "constructible budget d(n-1)-1 = %d" % (len(live), d * (n - 1) - 1)
        )
    pts = [np.zeros(d)]
    head = live[: d - 1]
    x2 = _nullspace_vector(head, d)
    if x2 is None:
        raise FrameError("adversarial_unseparated: leading directions span R^d")
    pts.append(x2)
    rest = live[d - 1:]
    budget = n - 2  # points still available
    # how many full blocks of d must be solved as linear systems
    v = max(0, len(rest) - budget * (d - 1))
    if v > budget:
        raise FrameError("adversarial_unseparated: not enough points for the blocks")
    pos = 0
    blocks_done = 0
    while pos < len(rest):
        take_system = blocks_done < v and len(rest) - pos >= d
        block = rest[pos: pos + (d if take_system else d - 1)]
        if take_system:
            M = np.array(block)
            if abs(np.linalg.det(M)) > 1e-10:
                rhs = np.zeros(d)
                rhs[-1] = block[-1] @ x2
                x = np.linalg.solve(M, rhs)
                pts.append(x)
                pos += d
                blocks_done += 1
                continue
            # dependent block: fall through to the orthogonal-point case
            block = rest[pos: pos + (d - 1)]
        x = _nullspace_vector(block, d)
        if x is None:
            raise FrameError("adversarial_unseparated: block unexpectedly spans R^d")
        # scale for distinctness from earlier points
        scale = 1.0
        while any(np.linalg.norm(scale * x - p) < 1e-9 for p in pts):
            scale *= 1.618
        pts.append(scale * x)
        pos += len(block)
    if len(pts) > n:
        raise FrameError("adversarial_unseparated: construction overflowed n points")
    # distinct generic fillers; duplicating an existing point never removes a tie
    k = 0
    while len(pts) < n:
        filler = pts[1] * (2.0 + k) + pts[0] + (3.0 + k) * x2
        k += 1
        if all(np.linalg.norm(filler - p) > 1e-9 for p in pts):
            pts.append(filler)
    X = np.column_stack(pts)
    scale = max(1.0, float(np.max(np.abs(X))))
    for a in directions:
        vals = a @ X
        diffs = np.abs(vals[:, None] - vals[None, :])
        margin = np.min(diffs[np.triu_indices(n, k=1)])
        if margin > tie_tol * scale:
            raise FrameError(
                "adversarial_unseparated: verification failed, direction %r "
                "separates the output with margin %.3e" % (a, margin)
            )
    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(X[:, i] - X[:, j]) < 1e-10:
                raise FrameError("adversarial_unseparated: output columns collide")
    return X


def frame_argsort_exact_d2(X):
    """Exact argsort frame in the plane: the weight of a sorting permutation
    is the fraction of the unit circle whose directions produce it.

    Critical angles are where some pair of distinct columns projects
    equally; between them the stable argsort is constant, so each arc's
    length (over 2 pi) is the weight of the permutation found at the arc
    midpoint.  Clouds whose distinct-pair set is empty (all columns equal,
    including X = 0) give a single identity atom.
    """
    X = as_cloud(X, d=2)
    n = X.shape[1]
    crit = set()
    for i in range(n):
        for j in range(i + 1, n):
            v = X[:, i] - X[:, j]
            if v[0] == 0.0 and v[1] == 0.0:
                continue
            th = math.atan2(-v[0], v[1]) % (2 * math.pi)
            crit.add(th)
            crit.add((th + math.pi) % (2 * math.pi))
    if not crit:
        return WeightedFrame("Sn", [(1.0, identity_element("Sn", n))])
    angles = sorted(crit)
    atoms = []
    for k in range(len(angles)):
        lo = angles[k]
        hi = angles[k + 1] if k + 1 < len(angles) else angles[0] + 2 * math.pi
        mid = 0.5 * (lo + hi)
        a = np.array([math.cos(mid), math.sin(mid)])
        atoms.append(((hi - lo) / (2 * math.pi), _argsort_perm(a @ X)))
    return make_frame("Sn", atoms, renormalize=True)


def frame_argsort_mc(X, samples, rng):
    """Monte Carlo argsort frame in any dimension: empirical distribution of
    the stable sorting permutation over uniformly random directions."""
    X = as_cloud(X)
    d, n = X.shape
    if samples < 1:
        raise FrameError("frame_argsort_mc needs at least one sample")
    A = rng.standard_normal((samples, d))
    nrm = np.linalg.norm(A, axis=1)
    A = A[nrm > 1e-12]
    proj = A @ X
    orders = np.argsort(proj, axis=1, kind="stable")
    uniq, counts = np.unique(orders, axis=0, return_counts=True)
    atoms = [
        (c / len(orders), Permutation(tuple(int(i) for i in row)))
        for row, c in zip(uniq, counts)
    ]
    return make_frame("Sn", atoms, renormalize=True)


def argsort_cardinality_bound(n, d):
    """Upper bound on the number of sorting permutations a d-dimensional
    cloud of n points can realize: 2 * sum_{k<d} C((n^2-n-2)/2, k), from the
    region count of the central hyperplane arrangement with C(n,2)
    hyperplanes."""
    m = (n * n - n - 2) // 2
    return 2 * sum(math.comb(m, k) for k in range(d))


def sn_frame_lower_bound(n, d):
    """Lower bound on the worst-case support size of any continuous weakly
    equivariant S_n frame on d x n clouds:

        (d-1) floor(n/2) + 1 - sum_{i=1}^{floor(n/2)} max(d-1-2^{i-1}, 0).

    The support at least doubles with each of floor(n/2) de-duplication
    steps until the increments saturate at d-1, which is exactly the sum
    1 + sum_i min(2^{i-1}, d-1) written with the saturation deficit pulled
    out.  (With 2^i in place of 2^{i-1} the bound would exceed the argsort
    frame's own cardinality at n=2, d>=3, so the i-th step's increment is
    capped by the support *before* the step.)
    """
    half = n // 2
    total = (d - 1) * half + 1
    total -= sum(max(d - 1 - 2 ** (i - 1), 0) for i in range(1, half + 1))
    return total


# ---------------------------------------------------------------------------
# rotation frames


def ramp_weight(r, eta):
    """Continuous ramp: 0 below eta, linear on [eta, 1], 1 above 1."""
    if r <= eta:
        return 0.0
    if r >= 1.0:
        return 1.0
    return (r - eta) / (1.0 - eta)


def frame_so2(Z, eta=0.5):
    """SO(2) frame on 2 x n clouds viewed as complex numbers: one atom per
    point at phase z_i/|z_i|, weighted by a ramp in the relative magnitude
    |z_i| / max_j |z_j| so that points vanishing into the origin drop out
    continuously.  Z = 0 gives the single identity atom (every phase would
    be the identity anyway, with uniform weights 1/n)."""
    Z = as_cloud(Z, d=2)
    norms = np.linalg.norm(Z, axis=0)
    mx = float(np.max(norms))
    if mx == 0.0:
        return WeightedFrame("SOd", [(1.0, identity_element("SOd", 2))])
    atoms = []
    for i in range(Z.shape[1]):
        w = ramp_weight(norms[i] / mx, eta)
        if w <= 0.0:
            continue
        c, s = Z[0, i] / norms[i], Z[1, i] / norms[i]
        atoms.append((w, Rotation(np.array([[c, -s], [s, c]]))))
    return make_frame("SOd", atoms, renormalize=True)


def frame_so2_stable(Z, eta=0.5):
    """Stable variant of the SO(2) frame: each atom g is split into the pair
    {g, -g} with half weight, so averaging with functions that are stable at
    the origin stays equivariant."""
    base = frame_so2(Z, eta=eta)
    flip = Rotation(-np.eye(2))
    atoms = []
    for w, g in base.atoms:
        atoms.append((0.5 * w, g))
        atoms.append((0.5 * w, compose(g, flip)))
    return make_frame("SOd", atoms)


def _nested_gram_frames(X, r, weight_floor):
    """Shared enumeration for the SO(d)/O(d) frames: all index sequences
    (i_1 .. i_r) with positive cumulative weight, where the weight of
    appending j is the parallelepiped-volume ratio
    Delta(x_{i_1}..x_{i_t}, x_j) / sum_l Delta(x_{i_1}..x_{i_t}, x_l)."""
    X = as_cloud(X)
    n = X.shape[1]
    out = []

    def recurse(prefix, weight):
        if len(prefix) == r:
            out.append((tuple(prefix), weight))
            return
        base = [X[:, i] for i in prefix]
        vols = np.array([gram_delta(np.column_stack(base + [X[:, j]])) for j in range(n)])
        total = vols.sum()
        if total <= 0.0:
            return  # the prefix already exhausts the span; cannot extend
        for j in range(n):
            if j in prefix:
                continue  # repeated index: exactly dependent, volume 0
            w = weight * vols[j] / total
            if w > weight_floor:
                recurse(prefix + [j], w)

    recurse([], 1.0)
    return out


def frame_sod(X, weight_floor=WEIGHT_FLOOR):
    """SO(d) frame from nested Gram-volume weights.

    With r = min(rank X, d-1), each index sequence (i_1 .. i_r) of
    independent columns carries the product of volume-ratio weights and an
    atom: the rotation aligning those columns with the upper-triangular
    Gram-Schmidt template.  X = 0 gives the single identity atom.
    """
    X = as_cloud(X)
    d = X.shape[0]
    from .groups import numerical_rank

    rank = numerical_rank(X)
    if rank == 0:
        return WeightedFrame("SOd", [(1.0, identity_element("SOd", d))])
    r = min(rank, d - 1)
    atoms = []
    for seq, w in _nested_gram_frames(X, r, weight_floor):
        g, _ = gram_schmidt_rotation(X, seq, special=True)
        atoms.append((w, g))
    return make_frame("SOd", atoms, renormalize=True)


def frame_od(X, weight_floor=WEIGHT_FLOOR):
    """O(d) frame: same nested Gram-volume weights as frame_sod.

    For full-rank X the sequences stop at length d-1 and each contributes
    both sign completions of the Gram-Schmidt basis (the element is only
    determined up to reflection through the span of the selected columns),
    with half weight each.  For rank-deficient X one completion per
    sequence of length rank suffices, since the leftover reflection sits in
    the stabilizer.  X = 0 gives the single identity atom.
    """
    X = as_cloud(X)
    d = X.shape[0]
    from .groups import numerical_rank

    rank = numerical_rank(X)
    if rank == 0:
        return WeightedFrame("Od", [(1.0, identity_element("Od", d))])
    atoms = []
    if rank == d:
        for seq, w in _nested_gram_frames(X, d - 1, weight_floor):
            g, _ = gram_schmidt_rotation(X, seq, special=True)
            m2 = np.array(g.m)
            m2[:, -1] = -m2[:, -1]
            atoms.append((0.5 * w, Orthogonal(g.m)))
            atoms.append((0.5 * w, Orthogonal(m2)))
    else:
        for seq, w in _nested_gram_frames(X, rank, weight_floor):
            g, _ = gram_schmidt_rotation(X, seq, special=False)
            atoms.append((w, Orthogonal(g.m)))
    return make_frame("Od", atoms, renormalize=True)


SO3_STABLE_DIAGONALS = [
    np.diag([1.0, 1.0, 1.0]),
    np.diag([1.0, -1.0, -1.0]),
    np.diag([-1.0, -1.0, 1.0]),
    np.diag([-1.0, 1.0, -1.0]),
]


def frame_so3_stable(X, weight_floor=WEIGHT_FLOOR):
    """Stable SO(3) frame: every atom g of the nested Gram frame is split
    into the four right-translates g * diag-sign-matrix (the diagonal
    subgroup {I, diag(1,-1,-1), diag(-1,-1,1), diag(-1,1,-1)} of SO(3)),
    each with quarter weight."""
    X = as_cloud(X, d=3)
    base = frame_sod(X, weight_floor=weight_floor)
    atoms = []
    for w, g in base.atoms:
        for Dm in SO3_STABLE_DIAGONALS:
            atoms.append((0.25 * w, Rotation(g.m @ Dm)))
    return make_frame("SOd", atoms)
