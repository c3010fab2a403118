"""Exact worst-case expectations for sums of independent ambiguous draws.

Partial sums of lattice atoms stay on a (shifted) lattice, so the nested
worst-case expectation of ``phi(S_n / n)`` collapses to a backward
recursion over reachable sums:

    v_n(s) = phi(s / n)
    v_k(s) = max over members P of  sum_j P(a_j) * v_{k+1}(s + a_j)

with ``v_0(0)`` the final value.  The module also evaluates constructed
selection policies and mixture measures forward, extracts the maximizing
policy, and evaluates small-n joint functionals over the full history
tree (the brute-force cross-check for the sum-state reduction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ambiguity import AmbiguityFamily, _require_valid

__all__ = [
    "DEFAULT_STATE_CAP",
    "SupportOverflow",
    "PolicyIncomplete",
    "SumSupport",
    "ValueTable",
    "SelectionPolicy",
    "build_support",
    "value_table",
    "iid_sum_expectation",
    "lower_iid_sum_expectation",
    "extract_argmax_policy",
    "expectation_under_policy",
    "joint_expectation_bruteforce",
]

DEFAULT_STATE_CAP = 10_000_000

_SUM_TOL = 1e-9


class SupportOverflow(RuntimeError):
    """The requested computation would exceed the configured state cap."""


class PolicyIncomplete(ValueError):
    """A reachable state has no (or an invalid) selection."""


def _pairwise_fold(terms: list[np.ndarray]) -> np.ndarray:
    """Sum a list of equal-length arrays by a fixed binary tree (leftmost-first)."""
    items = list(terms)
    while len(items) > 1:
        nxt = [items[i] + items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def pairwise_total(values: np.ndarray) -> float:
    """Binary-tree summation of a 1-D array; deterministic and drift-bounded."""
    a = np.asarray(values, dtype=float)
    if a.size == 0:
        return 0.0
    while a.size > 1:
        even = a.size - (a.size % 2)
        b = a[0:even:2] + a[1:even:2]
        if a.size % 2:
            b = np.concatenate([b, a[-1:]])
        a = b
    return float(a[0])


def _eval_phi(phi: Callable, xs: np.ndarray) -> np.ndarray:
    """Evaluate phi on an array, falling back to per-point calls."""
    try:
        out = np.asarray(phi(xs), dtype=float)
        if out.shape == xs.shape:
            return out
    except Exception:
        pass
    return np.array([float(phi(float(x))) for x in xs])


@dataclass(frozen=True)
class _Grid:
    origin: float
    step: float
    k_min: int
    k_max: int
    coords: tuple[np.ndarray, ...]
    shifts: tuple[np.ndarray, ...]
    weights: tuple[np.ndarray, ...]

    @property
    def span(self) -> int:
        return self.k_max - self.k_min


def _grid(family: AmbiguityFamily) -> _Grid:
    coords = tuple(family.member_coords(i) for i in range(len(family.members)))
    k_min = min(int(c.min()) for c in coords)
    k_max = max(int(c.max()) for c in coords)
    shifts = tuple(c - k_min for c in coords)
    weights = tuple(np.asarray(m.weights) for m in family.members)
    return _Grid(family.lattice.origin, family.lattice.step, k_min, k_max, coords, shifts, weights)


@dataclass(frozen=True)
class SumSupport:
    """Reachable partial-sum lattice, one boolean mask per step.

    At step k the dense coordinate window is ``[k*k_min, k*k_max]``; entry i
    of ``masks[k]`` marks whether ``k*origin + (k*k_min + i)*step`` is a sum
    of k atoms (members' atom sets pooled).
    """

    origin: float
    step: float
    k_min: int
    k_max: int
    n: int
    masks: tuple[np.ndarray, ...]

    @property
    def span(self) -> int:
        return self.k_max - self.k_min

    def size(self, k: int) -> int:
        return k * self.span + 1

    def values(self, k: int) -> np.ndarray:
        """Dense window of sum values at step k (reachable and not)."""
        coords = k * self.k_min + np.arange(self.size(k))
        return k * self.origin + coords * self.step

    def reachable_values(self, k: int) -> np.ndarray:
        return self.values(k)[self.masks[k]]

    def dense_index(self, k: int, sum_value: float) -> int:
        """Dense window index of a reachable sum at step k; KeyError otherwise."""
        if not 0 <= k <= self.n:
            raise KeyError(f"step {k} outside 0..{self.n}")
        coord = round((sum_value - k * self.origin) / self.step)
        if abs(k * self.origin + coord * self.step - sum_value) > _SUM_TOL:
            raise KeyError(f"{sum_value!r} is not a lattice sum at step {k}")
        i = int(coord) - k * self.k_min
        if not 0 <= i < self.size(k) or not self.masks[k][i]:
            raise KeyError(f"{sum_value!r} is not reachable at step {k}")
        return i


def build_support(family: AmbiguityFamily, n: int, state_cap: int = DEFAULT_STATE_CAP) -> SumSupport:
    """Reachable sums for n draws; raises SupportOverflow past the state cap."""
    _require_valid(family)
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    g = _grid(family)
    total = (n + 1) + g.span * n * (n + 1) // 2
    if total > state_cap:
        raise SupportOverflow(
            f"{total} sum states for n={n} exceed the cap of {state_cap}; "
            "the lattice is too fine for this horizon"
        )
    union_shifts = sorted({int(s) for c in g.shifts for s in c})
    masks = [np.ones(1, dtype=bool)]
    for k in range(n):
        cur = masks[k]
        nxt = np.zeros(cur.size + g.span, dtype=bool)
        for s in union_shifts:
            nxt[s : s + cur.size] |= cur
        masks.append(nxt)
    return SumSupport(g.origin, g.step, g.k_min, g.k_max, n, tuple(masks))


@dataclass(frozen=True)
class ValueTable:
    """Backward-recursion values; meaningful at reachable support points."""

    support: SumSupport
    values: tuple[np.ndarray, ...]

    @property
    def root(self) -> float:
        return float(self.values[0][0])

    def value_at(self, k: int, sum_value: float) -> float:
        return float(self.values[k][self.support.dense_index(k, sum_value)])


@dataclass(frozen=True)
class SelectionPolicy:
    """Deterministic member choice per (step, reachable running sum)."""

    support: SumSupport
    selections: tuple[np.ndarray, ...]

    @property
    def horizon(self) -> int:
        return self.support.n

    def member_at(self, k: int, sum_value: float) -> int:
        if not 0 <= k < len(self.selections):
            raise PolicyIncomplete(f"policy has no step {k}")
        try:
            i = self.support.dense_index(k, sum_value)
        except KeyError as exc:
            raise PolicyIncomplete(str(exc)) from exc
        m = int(self.selections[k][i])
        if m < 0:
            raise PolicyIncomplete(f"no selection at step {k}, sum {sum_value!r}")
        return m

    @classmethod
    def constant(
        cls,
        family: AmbiguityFamily,
        n: int,
        member_index: int,
        state_cap: int = DEFAULT_STATE_CAP,
    ) -> "SelectionPolicy":
        if not 0 <= member_index < len(family.members):
            raise PolicyIncomplete(f"member index {member_index} out of range")
        support = build_support(family, n, state_cap)
        sels = []
        for k in range(n):
            sel = np.full(support.size(k), -1, dtype=np.int32)
            sel[support.masks[k]] = member_index
            sels.append(sel)
        return cls(support, tuple(sels))


def _backward(
    family: AmbiguityFamily,
    n: int,
    phi: Callable,
    state_cap: int,
    want_table: bool = False,
    want_policy: bool = False,
):
    support = build_support(family, n, state_cap)
    g = _grid(family)
    vals = np.zeros(support.size(n))
    mask = support.masks[n]
    vals[mask] = _eval_phi(phi, support.values(n)[mask] / n)
    tables: list[np.ndarray] = [vals]
    policies: list[np.ndarray] = []
    v_next = vals
    for k in range(n - 1, -1, -1):
        size_k = support.size(k)
        member_vals = np.empty((len(family.members), size_k))
        for m in range(len(family.members)):
            terms = [w * v_next[s : s + size_k] for w, s in zip(g.weights[m], g.shifts[m])]
            member_vals[m] = _pairwise_fold(terms)
        if want_policy:
            sel = np.argmax(member_vals, axis=0).astype(np.int32)
            sel[~support.masks[k]] = -1
            policies.append(sel)
        v_next = member_vals.max(axis=0)
        if want_table:
            tables.append(v_next)
    value = float(v_next[0])
    table = ValueTable(support, tuple(reversed(tables))) if want_table else None
    policy = SelectionPolicy(support, tuple(reversed(policies))) if want_policy else None
    return value, support, table, policy


def iid_sum_expectation(
    family: AmbiguityFamily,
    n: int,
    phi: Callable,
    state_cap: int = DEFAULT_STATE_CAP,
) -> float:
    """Worst-case expectation of ``phi(S_n / n)`` by exact backward recursion."""
    _require_valid(family)
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    value, _, _, _ = _backward(family, n, phi, state_cap)
    return value


def lower_iid_sum_expectation(
    family: AmbiguityFamily,
    n: int,
    phi: Callable,
    state_cap: int = DEFAULT_STATE_CAP,
) -> float:
    """Best-case (lower) expectation of ``phi(S_n / n)``: -upper of -phi."""
    return -iid_sum_expectation(family, n, lambda x: -phi(x), state_cap)


def value_table(
    family: AmbiguityFamily,
    n: int,
    phi: Callable,
    state_cap: int = DEFAULT_STATE_CAP,
) -> ValueTable:
    """Full backward-recursion table for ``phi(S_n / n)``."""
    _require_valid(family)
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    _, _, table, _ = _backward(family, n, phi, state_cap, want_table=True)
    return table


def extract_argmax_policy(
    family: AmbiguityFamily,
    n: int,
    phi: Callable,
    state_cap: int = DEFAULT_STATE_CAP,
) -> SelectionPolicy:
    """Lowest-index maximizing member at every reachable (step, sum) state."""
    _require_valid(family)
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    _, _, _, policy = _backward(family, n, phi, state_cap, want_policy=True)
    return policy


def _check_weights(w, member_count: int) -> np.ndarray:
    arr = np.asarray(w, dtype=float)
    if arr.shape != (member_count,):
        raise PolicyIncomplete(f"mixture weights have shape {arr.shape}, expected ({member_count},)")
    if not np.all(np.isfinite(arr)) or np.any(arr < -1e-12):
        raise PolicyIncomplete(f"mixture weights {arr!r} are not nonnegative")
    if abs(float(arr.sum()) - 1.0) > 1e-12:
        raise PolicyIncomplete(f"mixture weights {arr!r} do not sum to one")
    return np.maximum(arr, 0.0)


def _forward_policy(family, n, support, g, policy: SelectionPolicy) -> np.ndarray:
    if policy.horizon < n:
        raise PolicyIncomplete(f"policy horizon {policy.horizon} is shorter than n={n}")
    same_grid = (
        policy.support.k_min == support.k_min
        and policy.support.k_max == support.k_max
        and policy.support.origin == support.origin
        and policy.support.step == support.step
    )
    if not same_grid:
        raise PolicyIncomplete("policy was extracted for a different lattice grid")
    mass = np.array([1.0])
    for k in range(n):
        sel = policy.selections[k]
        bad = support.masks[k] & (sel[: support.size(k)] < 0)
        if bad.any():
            i = int(np.nonzero(bad)[0][0])
            raise PolicyIncomplete(f"no selection at step {k}, sum {support.values(k)[i]!r}")
        nxt = np.zeros(mass.size + support.span)
        for m in range(len(family.members)):
            picked = np.where(sel[: mass.size] == m, mass, 0.0)
            if not picked.any():
                continue
            for w, s in zip(g.weights[m], g.shifts[m]):
                nxt[s : s + mass.size] += w * picked
        mass = nxt
    return mass


def _forward_stepwise(family, n, support, g, measure) -> np.ndarray:
    mass = np.array([1.0])
    for k in range(n):
        w_members = _check_weights(measure.mixture_weights(k), len(family.members))
        nxt = np.zeros(mass.size + support.span)
        for m, wm in enumerate(w_members):
            if wm == 0.0:
                continue
            for w, s in zip(g.weights[m], g.shifts[m]):
                nxt[s : s + mass.size] += (wm * w) * mass
        mass = nxt
    return mass


def _forward_sum_rule(family, n, support, g, measure) -> np.ndarray:
    mass = np.array([1.0])
    for k in range(n):
        nxt = np.zeros(mass.size + support.span)
        vals_k = support.values(k)
        for i in np.nonzero(support.masks[k])[0]:
            w_members = _check_weights(
                measure.mixture_weights(k, total=float(vals_k[i])), len(family.members)
            )
            if mass[i] == 0.0:
                continue
            for m, wm in enumerate(w_members):
                if wm == 0.0:
                    continue
                for w, s in zip(g.weights[m], g.shifts[m]):
                    nxt[i + s] += (wm * w) * mass[i]
        mass = nxt
    return mass


def _forward_history_rule(family, n, support, g, measure, state_cap: int) -> np.ndarray:
    coords, values, w_matrix = family.union_atoms()
    mass = np.zeros(support.size(n))
    visited = 0
    stack: list[tuple[int, int, float, tuple[float, ...]]] = [(0, 0, 1.0, ())]
    while stack:
        k, coord, prob, hist = stack.pop()
        if k == n:
            mass[coord - n * support.k_min] += prob
            continue
        w_members = _check_weights(
            measure.mixture_weights(k, history=hist), len(family.members)
        )
        q = w_matrix @ w_members
        for a in range(len(coords)):
            if q[a] == 0.0:
                continue
            visited += 1
            if visited > state_cap:
                raise SupportOverflow(
                    f"history-dependent forward pass exceeds the cap of {state_cap} paths"
                )
            stack.append((k + 1, coord + int(coords[a]), prob * float(q[a]), hist + (float(values[a]),)))
    return mass


def expectation_under_policy(
    family: AmbiguityFamily,
    n: int,
    phi: Callable,
    policy,
    state_cap: int = DEFAULT_STATE_CAP,
) -> float:
    """Exact expectation of ``phi(S_n / n)`` under a policy or mixture measure.

    ``policy`` is either a :class:`SelectionPolicy` or any measure-like
    object with ``mixture_weights(step, total=..., history=...)``, a
    ``depends_on`` tag in {"none", "sum", "history"} and a ``horizon``.
    The probability mass is propagated exactly (over sum states, or over
    the history tree when the rule is genuinely history-dependent) and the
    terminal distribution is averaged against phi.
    """
    _require_valid(family)
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    support = build_support(family, n, state_cap)
    g = _grid(family)
    if isinstance(policy, SelectionPolicy):
        mass = _forward_policy(family, n, support, g, policy)
    elif hasattr(policy, "mixture_weights") and hasattr(policy, "depends_on"):
        if getattr(policy, "horizon", n) < n:
            raise PolicyIncomplete(f"measure horizon {policy.horizon} is shorter than n={n}")
        if policy.depends_on == "none":
            mass = _forward_stepwise(family, n, support, g, policy)
        elif policy.depends_on == "sum":
            mass = _forward_sum_rule(family, n, support, g, policy)
        elif policy.depends_on == "history":
            mass = _forward_history_rule(family, n, support, g, policy, state_cap)
        else:
            raise PolicyIncomplete(f"unknown dependence tag {policy.depends_on!r}")
    else:
        raise TypeError(f"unsupported policy object: {policy!r}")
    mask = support.masks[n]
    phi_vals = _eval_phi(phi, support.values(n)[mask] / n)
    return pairwise_total(mass[mask] * phi_vals)


def joint_expectation_bruteforce(
    family: AmbiguityFamily,
    n: int,
    phi_n: Callable,
    state_cap: int = DEFAULT_STATE_CAP,
) -> float:
    """Nested worst-case evaluation of ``phi_n(X_1, ..., X_n)`` over the history tree.

    Evaluates the inner-to-outer recursion directly: at every realized
    history the next draw's expectation is maximized over the members.
    Exponential in n; intended for small-n cross checks of the sum-state
    reduction (for phi_n depending only on the sum, this must agree with
    :func:`iid_sum_expectation`).
    """
    _require_valid(family)
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    branching = len(family.members) * max(len(m.atoms) for m in family.members)
    if branching**n > state_cap:
        raise SupportOverflow(
            f"history tree with branching {branching}^{n} exceeds the cap of {state_cap}"
        )
    members = [list(m.atoms) for m in family.members]

    def value(xs: tuple[float, ...]) -> float:
        if len(xs) == n:
            return float(phi_n(*xs))
        best = None
        for atoms in members:
            e = math.fsum(w * value(xs + (v,)) for v, w in atoms)
            if best is None or e > best:
                best = e
        return best

    return value(())
