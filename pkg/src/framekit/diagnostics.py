"""Continuity and equivariance diagnostics for frames, canonicalizations
and projection operators.

The probes walk a geometric schedule X_k = X + decay^k * Delta toward a
base cloud and watch a distance: between stabilizer-averaged frames for
frame maps, between output values for operators.  Discontinuity hunting
samples pairs of nearby inputs and certifies a jump when the normalized
output gap exceeds a threshold.
"""

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .cloud import as_cloud
from .frames import WeightedFrame, pushforward
from .groups import Permutation, act, compose, inverse, stabilizer
from .project import average_over_stabilizer

CONV_TOL = 1e-3
CERT_THRESHOLD = 0.1
BURN_IN = 3
PROBE_FAMILY_SIZE = 32
PROBE_SEED = 20240817


class DiagnosticsError(ValueError):
    pass


@dataclass
class ProbeSchedule:
    """Geometric approach schedule toward a base cloud."""

    base: np.ndarray
    delta: np.ndarray
    steps: int = 20
    decay: float = 0.5

    def __post_init__(self):
        self.base = as_cloud(self.base)
        self.delta = as_cloud(self.delta, d=self.base.shape[0])
        if self.delta.shape != self.base.shape:
            raise DiagnosticsError("delta must have the same shape as the base cloud")
        if not (0 < self.decay < 1):
            raise DiagnosticsError("decay must be in (0, 1)")

    def points(self):
        return [self.base + self.decay ** (k + 1) * self.delta for k in range(self.steps)]


@dataclass
class DiagnosticReport:
    target: str
    distances: list
    verdict: str  # "converges" | "diverges" | "inconclusive"
    certificate: dict | None = None
    config: dict = field(default_factory=dict)

    def to_dict(self):
        out = asdict(self)
        out["distances"] = [float(v) for v in self.distances]
        return out


def _probe_clouds(d, count=PROBE_FAMILY_SIZE):
    rng = np.random.default_rng(PROBE_SEED + d)
    return [rng.standard_normal((d, 3)) for _ in range(count)]


def measure_distance(mu, nu, method="auto"):
    """Distance between two finitely supported measures on the same group.

    "tv": total variation 0.5 * sum |mu - nu| after matching atoms exactly
    (permutations; matrices match within 1e-10).  "probe": maximum over a
    fixed seeded family of linear probe functions h(g) = entries of g.P of
    |int h dmu - int h dnu|; a pseudometric suited to matrix groups where
    atoms never align exactly.  "auto" picks tv for S_n and probe otherwise.
    """
    if mu.group != nu.group:
        raise DiagnosticsError("measures live on different groups")
    if method == "auto":
        method = "tv" if mu.group == "Sn" else "probe"
    if method == "tv":
        if mu.group == "Sn":
            acc = {}
            for w, g in mu.atoms:
                acc[g.perm] = acc.get(g.perm, 0.0) + w
            for w, g in nu.atoms:
                acc[g.perm] = acc.get(g.perm, 0.0) - w
            return 0.5 * sum(abs(v) for v in acc.values())
        # matrices: greedy matching within tolerance
        from .groups import elements_equal

        rem = [[w, g] for w, g in nu.atoms]
        total = 0.0
        for w, g in mu.atoms:
            for item in rem:
                if item[0] > 0 and elements_equal(g, item[1]):
                    m = min(w, item[0])
                    item[0] -= m
                    w -= m
                    if w == 0:
                        break
            total += w
        total += sum(item[0] for item in rem)
        return 0.5 * total
    if method == "probe":
        d = mu.atoms[0][1].m.shape[0]
        Em = sum(w * g.m for w, g in mu.atoms)
        En = sum(w * g.m for w, g in nu.atoms)
        best = 0.0
        for P in _probe_clouds(d):
            best = max(best, float(np.max(np.abs((Em - En) @ P))))
        return best
    raise DiagnosticsError("unknown distance method %r" % method)


def _verdict(distances, conv_tol, burn_in=BURN_IN):
    final = distances[-1]
    tail = distances[burn_in:]
    slack = max(1e-12, 0.05 * max(distances))
    nonincreasing = all(tail[i + 1] <= tail[i] + slack for i in range(len(tail) - 1))
    if final < conv_tol and nonincreasing:
        return "converges"
    if final >= conv_tol and min(distances[-3:]) >= conv_tol:
        return "diverges"
    return "inconclusive"


def probe_frame_continuity(frame_map, sched, group, conv_tol=CONV_TOL,
                           method="auto", quad_k=256, target="frame"):
    """Watch measure_distance(<mu_{X_k}>_X, <mu_X>_X) along the schedule,
    where <.>_X averages over the stabilizer of the base cloud."""
    X = sched.base
    stab = stabilizer(X, group)
    d, n = X.shape
    base_frame = average_over_stabilizer(frame_map(X), stab, quad_k=quad_k, d=d, n=n)
    dists = []
    for Xk in sched.points():
        fk = average_over_stabilizer(frame_map(Xk), stab, quad_k=quad_k, d=d, n=n)
        dists.append(measure_distance(fk, base_frame, method=method))
    verdict = _verdict(dists, conv_tol)
    return DiagnosticReport(
        target=target,
        distances=dists,
        verdict=verdict,
        config={"conv_tol": conv_tol, "steps": sched.steps, "decay": sched.decay,
                "group": group, "method": method, "quad_k": quad_k},
    )


def probe_operator_continuity(op, sched, conv_tol=CONV_TOL, target="operator"):
    """Watch ||op(X_k) - op(X)|| along the schedule."""
    base = np.asarray(op(sched.base), dtype=float)
    dists = []
    for Xk in sched.points():
        dists.append(float(np.max(np.abs(np.asarray(op(Xk), dtype=float) - base))))
    verdict = _verdict(dists, conv_tol)
    return DiagnosticReport(
        target=target,
        distances=dists,
        verdict=verdict,
        config={"conv_tol": conv_tol, "steps": sched.steps, "decay": sched.decay},
    )


def find_discontinuity(op, X0, rng, radius=1e-6, trials=200,
                       cert_threshold=CERT_THRESHOLD, target="operator"):
    """Hunt for a jump of op near X0: sample clouds X0 + radius * U with
    random unit-Frobenius perturbations U, and report the pair with the
    largest output gap normalized by the larger output norm.  A Lipschitz
    map scores on the order of radius * L, far below any sane threshold; a
    genuine jump scores O(1).

    Returns a DiagnosticReport; when the best normalized gap exceeds
    cert_threshold the certificate records the witnessing pair.
    """
    X0 = as_cloud(X0)
    scale = radius * (1.0 + float(np.linalg.norm(X0)))
    outs = []
    pts = []
    for _ in range(trials):
        U = rng.standard_normal(X0.shape)
        U /= np.linalg.norm(U)
        Xi = X0 + scale * U
        pts.append(Xi)
        outs.append(np.asarray(op(Xi), dtype=float).ravel())
    outs = np.array(outs)
    norms = np.linalg.norm(outs, axis=1)
    best_gap = 0.0
    best_pair = (0, 0)
    for i in range(trials):
        gaps = np.linalg.norm(outs[i + 1:] - outs[i], axis=1)
        denom = np.maximum(np.maximum(norms[i + 1:], norms[i]), 1e-12)
        rel = gaps / denom
        j = int(np.argmax(rel)) if rel.size else 0
        if rel.size and rel[j] > best_gap:
            best_gap = float(rel[j])
            best_pair = (i, i + 1 + j)
    found = best_gap > cert_threshold
    cert = None
    if found:
        i, j = best_pair
        cert = {
            "gap": best_gap,
            "x_first": pts[i].tolist(),
            "x_second": pts[j].tolist(),
            "input_distance": float(np.linalg.norm(pts[i] - pts[j])),
        }
    return DiagnosticReport(
        target=target,
        distances=[best_gap],
        verdict="diverges" if found else "converges",
        certificate=cert,
        config={"radius": radius, "trials": trials, "cert_threshold": cert_threshold},
    )


def check_weak_equivariance(frame_map, X, g, group, method="auto", quad_k=256):
    """Distance between <mu_{g.X}>_{g.X} and g_* <mu_X>_X; zero (up to
    quadrature) for weakly equivariant frames."""
    X = as_cloud(X)
    gX = act(g, X)
    d, n = X.shape
    left = average_over_stabilizer(frame_map(gX), stabilizer(gX, group),
                                   quad_k=quad_k, d=d, n=n)
    right = pushforward(g, average_over_stabilizer(frame_map(X), stabilizer(X, group),
                                                   quad_k=quad_k, d=d, n=n))
    return measure_distance(left, right, method=method)
