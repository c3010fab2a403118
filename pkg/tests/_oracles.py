"""Independent reference computations used only by the tests.

Everything here is deliberately written with plain dict/float arithmetic,
separate from the library's vectorized lattice recursions, so the two can
cross-check each other.
"""

import itertools
import math
from math import comb

import numpy as np


def reachable_coords(family, n):
    """Per-step sets of pooled integer sum coordinates."""
    lat = family.lattice
    atom_coords = sorted({lat.coord(v) for m in family.members for v, _ in m.atoms})
    levels = [{0}]
    for _ in range(n):
        levels.append({s + a for s in levels[-1] for a in atom_coords})
    return levels


def sum_value(family, k, coord):
    lat = family.lattice
    return k * lat.origin + coord * lat.step


def _member_coord_atoms(family):
    lat = family.lattice
    return [[(lat.coord(v), w) for v, w in m.atoms] for m in family.members]


def history_tree_max(family, n, phi):
    """Backward recursion over realized histories.

    By backward induction this equals the exhaustive maximum of the forward
    expectation over every deterministic history-dependent member selection
    (mixtures cannot beat it: the objective is linear in each node's weights).
    """
    members = [list(m.atoms) for m in family.members]

    def rec(xs):
        if len(xs) == n:
            return phi(sum(xs) / n)
        return max(sum(w * rec(xs + (v,)) for v, w in atoms) for atoms in members)

    return rec(())


def sum_policy_count(family, n):
    levels = reachable_coords(family, n)
    return len(family.members) ** sum(len(levels[k]) for k in range(n))


def eval_sum_policy(family, n, phi, assignment):
    """Forward expectation under an explicit (step, sum coord) -> member map."""
    atoms = _member_coord_atoms(family)
    dist = {0: 1.0}
    for k in range(n):
        nxt = {}
        for coord, pr in dist.items():
            for c, w in atoms[assignment[(k, coord)]]:
                nxt[coord + c] = nxt.get(coord + c, 0.0) + pr * w
        dist = nxt
    return sum(pr * phi(sum_value(family, n, coord) / n) for coord, pr in dist.items())


def enumerate_sum_policies_max(family, n, phi):
    """Literal maximum over every deterministic sum-state policy."""
    levels = reachable_coords(family, n)
    states = [(k, c) for k in range(n) for c in sorted(levels[k])]
    best = -math.inf
    for choice in itertools.product(range(len(family.members)), repeat=len(states)):
        best = max(best, eval_sum_policy(family, n, phi, dict(zip(states, choice))))
    return best


def _histories(family, depth):
    atoms = sorted({v for m in family.members for v, _ in m.atoms})
    out = [()]
    for _ in range(depth):
        out = [h + (a,) for h in out for a in atoms]
    return out


def history_nodes(family, n):
    nodes = []
    for k in range(n):
        nodes.extend(_histories(family, k))
    return nodes


def history_policy_count(family, n):
    return len(family.members) ** len(history_nodes(family, n))


def eval_history_policy(family, n, phi, assignment):
    members = [list(m.atoms) for m in family.members]
    total = 0.0
    stack = [((), 1.0)]
    while stack:
        h, pr = stack.pop()
        if len(h) == n:
            total += pr * phi(sum(h) / n)
            continue
        for v, w in members[assignment[h]]:
            if w:
                stack.append((h + (v,), pr * w))
    return total


def enumerate_history_policies_max(family, n, phi):
    """Literal maximum over every deterministic full-history policy."""
    nodes = history_nodes(family, n)
    best = -math.inf
    for choice in itertools.product(range(len(family.members)), repeat=len(nodes)):
        best = max(best, eval_history_policy(family, n, phi, dict(zip(nodes, choice))))
    return best


def fair_coin_expectation(n, phi):
    """E[phi(S_n/n)] for a single fair coin on {-1, +1}, by binomial enumeration."""
    return math.fsum(comb(n, k) * 0.5**n * phi((2 * k - n) / n) for k in range(n + 1))


def grid_upper_variance(family, step=1e-6):
    """Dense grid scan of g(mu) = max_P E_P[(x - mu)^2] over the mean interval.

    The grid uses the exact requested step from the left endpoint (plus the
    right endpoint) so decimal-offset kinks are hit without drift.
    """
    means = [m.mean for m in family.members]
    lo, hi = min(means), max(means)
    if hi == lo:
        mus = np.array([lo])
    else:
        mus = lo + step * np.arange(int(math.floor((hi - lo) / step)) + 1)
        if mus[-1] < hi:
            mus = np.concatenate([mus, [hi]])
    m1 = np.array(means)
    m2 = np.array([m.abs_moment(2.0) for m in family.members])
    g = (m2[:, None] - 2.0 * np.outer(m1, mus)).max(axis=0) + mus * mus
    i = int(np.argmin(g))
    return float(g[i]), float(mus[i])


def dense_interval_max(phi, lo, hi, points=10_000_001, chunk=1_000_000):
    """Brute-force rescan of the interval maximum on a much finer grid."""
    if hi == lo:
        return float(phi(np.array([lo]))[0])
    grid = np.linspace(lo, hi, points)
    best = -math.inf
    for start in range(0, points, chunk):
        best = max(best, float(np.max(phi(grid[start : start + chunk]))))
    return best
