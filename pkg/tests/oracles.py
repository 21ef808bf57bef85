"""Independent referees used by the test suite.

These deliberately avoid the library's own optimization code paths.  The
support defect at a boundary sample is a pointwise max of affine functions of
the slope, hence convex; that structure gives three solver-free referees:

* ``grid_search_defect`` — a dense zoomed scan over the slope plane.  Convexity
  means the scan has a single basin, so it locates the unconstrained minimum.
* ``certificate_defects`` — direct arithmetic on claimed per-anchor support
  slopes.  A support certificate is its own proof: recomputing the defect from
  the raw samples and checking the slope norm requires no search at all.
* ``prove_infeasible_below`` — an interval branch-and-bound on the slope disk.
  Each box gets a rigorous lower bound (per-affine minimum over the box, then
  max over affines); boxes whose bound clears the tolerance are discarded, and
  an emptied queue is a proof that no admissible slope exists.  This is the
  only sound way to confirm infeasibility: scans give upper bounds only, and
  near-degenerate data produces slope valleys so flat that a scan's stall is
  indistinguishable from a genuinely positive minimum.
"""

import numpy as np


def _sample_arrays(samples):
    pts = np.array([p for p, _ in samples], dtype=float)
    phi = np.array([v for _, v in samples], dtype=float)
    return pts, phi


def grid_search_defect(samples, i, side, box=10.0, stages=14, pts=41, shrink=0.35):
    """Smallest support defect at anchor ``i`` over slopes in [-box, box]^2."""
    Z, phi = _sample_arrays(samples)
    dP = Z - Z[i]
    dphi = phi - phi[i]
    sign = 1.0 if side == "lower" else -1.0
    center = np.zeros(2)
    half = box
    best = np.inf
    for _ in range(stages):
        ax = np.linspace(center[0] - half, center[0] + half, pts)
        ay = np.linspace(center[1] - half, center[1] + half, pts)
        A = np.stack(np.meshgrid(ax, ay, indexing="ij"), -1).reshape(-1, 2)
        vals = np.max(sign * (A @ dP.T) - sign * dphi[None, :], axis=1)
        k = int(np.argmin(vals))
        best = min(best, float(vals[k]))
        center = A[k]
        half *= shrink
    return best


def certificate_defects(samples, per_point):
    """Recompute the defects of claimed support certificates by direct arithmetic.

    ``per_point`` is a sequence of objects with ``lower_slope`` / ``upper_slope``
    attributes, one per sample (anchor).  Returns ``(worst_defect, worst_norm)``
    where ``worst_defect`` is the largest violation of the support inequalities
    over all anchors, sides, and samples, and ``worst_norm`` the largest
    Euclidean slope norm.  ``worst_defect <= eps`` and ``worst_norm <= Q``
    together verify that Q admits a full family of eps-slack supports.
    """
    Z, phi = _sample_arrays(samples)
    worst_defect = -np.inf
    worst_norm = 0.0
    for i, cert in enumerate(per_point):
        dP = Z - Z[i]
        dphi = phi - phi[i]
        for slope, sign in ((cert.lower_slope, 1.0), (cert.upper_slope, -1.0)):
            a = np.asarray(slope, dtype=float)
            defect = float(np.max(sign * (dP @ a) - sign * dphi))
            worst_defect = max(worst_defect, defect)
            worst_norm = max(worst_norm, float(np.hypot(a[0], a[1])))
    return worst_defect, worst_norm


def _prove_side_infeasible(dP, dphi, sign, Q, eps, max_levels=48, max_boxes=4_000_000):
    """Branch-and-bound proof that min over |a| <= Q of the one-sided defect
    exceeds eps.  Returns (proved, best_value_found)."""
    C = sign * dP
    d = sign * dphi
    l1 = np.abs(C).sum(axis=1)
    centers = np.zeros((1, 2))
    half = Q
    best = np.inf
    for _ in range(max_levels):
        inside = (centers**2).sum(axis=1) <= Q * Q
        if inside.any():
            vals = np.max(centers[inside] @ C.T - d[None, :], axis=1)
            best = min(best, float(vals.min()))
            if best <= eps:
                return False, best
        # Per-affine minimum over the box [c - half, c + half]^2 is the value
        # at the center minus half * |slope|_1; the max of those minima lower
        # bounds the max-of-affines over the box.
        lower = np.max(centers @ C.T - d[None, :] - half * l1[None, :], axis=1)
        near_disk = np.sqrt((centers**2).sum(axis=1)) - half * np.sqrt(2.0) <= Q
        centers = centers[(lower <= eps) & near_disk]
        if len(centers) == 0:
            return True, best
        if len(centers) * 4 > max_boxes:
            return False, best
        half *= 0.5
        off = np.array([[-half, -half], [-half, half], [half, -half], [half, half]])
        centers = (centers[:, None, :] + off[None, :, :]).reshape(-1, 2)
    return False, best


def prove_infeasible_below(samples, Q, eps):
    """Prove that no eps-slack support family with slope norms <= Q exists.

    Scans anchors in order and stops at the first one whose lower- or
    upper-support system is branch-and-bound infeasible on the slope disk of
    radius Q.  Returns ``(proved, detail)`` with the witnessing anchor index,
    side, and the best defect value encountered during the proof.
    """
    Z, phi = _sample_arrays(samples)
    for i in range(len(Z)):
        dP = Z - Z[i]
        dphi = phi - phi[i]
        for side, sign in (("lower", 1.0), ("upper", -1.0)):
            proved, best = _prove_side_infeasible(dP, dphi, sign, Q, eps)
            if proved:
                return True, {"anchor": i, "side": side, "best_defect": best}
    return False, {}
