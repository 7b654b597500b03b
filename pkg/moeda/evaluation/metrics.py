"""
Quality metrics for objective-space fronts: hypervolume, reference points
and per-objective improvements against a baseline solution.
"""
import numpy as np
from pymoo.indicators.hv import HV

from moeda.config import HV_REFERENCE_FACTOR
from moeda.core.errors import InvalidReferenceError

OBJECTIVE_NAMES = ("d_wc", "p_total", "a_gate")


def _as_matrix(points):
    matrix = np.asarray([tuple(p) for p in points], dtype=float)
    return matrix.reshape(-1, 3)


def reference_point(*point_sets, factor=HV_REFERENCE_FACTOR):
    """factor x componentwise maximum over every given set"""
    stacked = np.vstack([_as_matrix(s) for s in point_sets if len(s)])
    return tuple(float(v) for v in factor * stacked.max(axis=0))


def hypervolume(front, reference):
    """
    Exact volume dominated by `front` and bounded by `reference`.

    Every point must strictly dominate the reference point.
    """
    points = _as_matrix(front)
    ref = np.asarray(reference, dtype=float)
    if points.size == 0:
        return 0.0
    bad = ~np.all(points < ref, axis=1)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise InvalidReferenceError(
            f"Point {i} {tuple(points[i])} does not dominate reference {tuple(ref)}"
        )
    return float(HV(ref_point=ref)(points))


def relative_change(objectives, reference):
    """Per-objective (value - ref) / ref; negative is an improvement"""
    return {name: (float(v) - float(r)) / float(r)
            for name, v, r in zip(OBJECTIVE_NAMES, objectives, reference)}


def best_improvements(population, reference):
    """
    For each objective, the member that improves it most while no other
    objective is worse than `reference`.

    Returns {objective: (index, relative improvement) or None}; ties go to
    the earlier member.
    """
    points = _as_matrix(getattr(p, "objectives", p) for p in population)
    ref = np.asarray(reference, dtype=float)
    result = {}
    for k, name in enumerate(OBJECTIVE_NAMES):
        others = [j for j in range(3) if j != k]
        ok = np.all(points[:, others] <= ref[others], axis=1) & (points[:, k] < ref[k])
        if not ok.any():
            result[name] = None
            continue
        candidates = np.flatnonzero(ok)
        best = int(candidates[np.argmin(points[candidates, k])])
        result[name] = (best, float((ref[k] - points[best, k]) / ref[k]))
    return result


def improves_all(objectives, reference):
    return all(v < r for v, r in zip(objectives, reference))
