"""Discrete placement: candidate grid, exact selection solver, and oracle.

Practical hardware restricts antennas to a grid of candidate positions (parallel
waveguides along y, uniformly spaced slots along x). Choosing the best N of the
G candidates for the max-min SNR objective is a binary quadratic program; it is
linearized exactly by introducing one auxiliary binary z per selectable pair
with the three product-linking inequalities

    z <= b_i,   z <= b_j,   z >= b_i + b_j - 1,

under which z = b_i * b_j for any binary assignment. The resulting MILP is
solved to global optimality by an in-repo branch-and-bound (`solve_milp`), kept
honest by an exhaustive-enumeration oracle (`brute_force_select`).

The per-user signal power of a selection expands as

    |h_k^T b|^2 = sum_i |h_ki|^2 b_i + sum_{i<j} 2 Re(h_ki* h_kj) b_i b_j,

and reported SNR values follow the same convention as the continuous model:
mu = P * |h_k^T b|^2 / (N sigma^2), minimized over users.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from math import comb
from typing import Optional, Sequence

import numpy as np

from .channel import Scenario, derive_radio_params, make_scenario
from .errors import BudgetExceededError, ParameterError

OPTIMAL = "optimal"
TIMEOUT = "timeout"
INFEASIBLE = "infeasible"

ENUMERATION_BUDGET = 10_000_000  # default cap on C(G, N) for the oracle


@dataclass(frozen=True)
class CandidateGrid:
    """Uniform G1 x G2 grid of candidate antenna positions on the plane z=height.

    Waveguides run along x; waveguide ``r`` sits at ``y = -D/2 + r * row_spacing``
    and is fed at ``x = -D/2``. Candidate ``g`` has row ``g // slots_per_waveguide``
    and column ``g % slots_per_waveguide``.
    """

    side_length: float
    height: float
    num_waveguides: int
    slots_per_waveguide: int
    row_spacing: float
    col_spacing: float
    points: np.ndarray  # (G, 3)

    @property
    def num_candidates(self) -> int:
        return self.points.shape[0]

    def waveguide_of(self, g: int) -> int:
        return g // self.slots_per_waveguide

    def feed_point_of(self, waveguide: int) -> np.ndarray:
        y = -self.side_length / 2.0 + waveguide * self.row_spacing
        return np.array([-self.side_length / 2.0, y, self.height])


def build_grid(side_length: float, num_waveguides: int, slots_per_waveguide: int,
               height: float) -> CandidateGrid:
    """Lay out the candidate grid; both axes span [-D/2, D/2] inclusive."""
    if num_waveguides < 2 or slots_per_waveguide < 2:
        raise ParameterError("grid needs at least 2 waveguides and 2 slots (spacing undefined)")
    if side_length <= 0 or height <= 0:
        raise ParameterError("side_length and height must be positive")
    half = side_length / 2.0
    dy = side_length / (num_waveguides - 1)
    dx = side_length / (slots_per_waveguide - 1)
    ys = -half + dy * np.arange(num_waveguides)
    xs = -half + dx * np.arange(slots_per_waveguide)
    xx, yy = np.meshgrid(xs, ys)  # row-major: g = row * slots + col
    points = np.column_stack([xx.ravel(), yy.ravel(), np.full(xx.size, float(height))])
    return CandidateGrid(
        side_length=float(side_length),
        height=float(height),
        num_waveguides=int(num_waveguides),
        slots_per_waveguide=int(slots_per_waveguide),
        row_spacing=dy,
        col_spacing=dx,
        points=points,
    )


def grid_for_spacing(side_length: float, spacing: float, height: float) -> CandidateGrid:
    """Square grid with (approximately) the requested spacing on both axes."""
    if spacing <= 0 or spacing >= side_length:
        raise ParameterError(f"spacing must be in (0, side_length), got {spacing!r}")
    steps = round(side_length / spacing)
    return build_grid(side_length, steps + 1, steps + 1, height)


@dataclass(frozen=True)
class DiscreteChannelTable:
    """Per-user complex channel coefficients for every candidate position.

    ``gains[k, g]`` combines the free-space amplitude and phase toward user k
    with the guided phase accumulated from the candidate's own waveguide feed,
    i.e. over the travel distance ``x_g + D/2`` at the guided wavelength.
    """

    gains: np.ndarray  # (K, G) complex
    grid: CandidateGrid


def discrete_channel_table(grid: CandidateGrid, scenario: Scenario) -> DiscreteChannelTable:
    """Evaluate the K x G channel matrix for a grid under a scenario."""
    if not math.isclose(grid.height, scenario.height):
        raise ParameterError("grid height differs from scenario height")
    if not math.isclose(grid.side_length, scenario.side_length):
        raise ParameterError("grid side length differs from scenario side length")
    r = scenario.radio
    ue = scenario.ue_xy()  # (K, 2)
    pts = grid.points
    dx = pts[None, :, 0] - ue[:, 0, None]
    dy = pts[None, :, 1] - ue[:, 1, None]
    d_free = np.sqrt(dx * dx + dy * dy + grid.height**2)  # (K, G)
    travel = pts[:, 0] + grid.side_length / 2.0  # distance from each row's feed
    gains = (math.sqrt(r.eta) / d_free) * np.exp(-2j * math.pi * d_free / r.lambda_c)
    gains = gains * np.exp(-2j * math.pi * travel / r.lambda_g)[None, :]
    return DiscreteChannelTable(gains=gains, grid=grid)


def conflict_set(grid: CandidateGrid, min_separation: float) -> set[tuple[int, int]]:
    """Unordered candidate pairs closer than min_separation (joint selection forbidden)."""
    pts = grid.points
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1)
    iu, ju = np.triu_indices(len(pts), k=1)
    close = d2[iu, ju] < min_separation**2
    return {(int(i), int(j)) for i, j in zip(iu[close], ju[close])}


@dataclass(frozen=True)
class SelectionVector:
    """Binary choice over grid candidates; complete when exactly N flags are set."""

    flags: np.ndarray  # (G,) of 0/1

    @classmethod
    def from_indices(cls, indices, num_candidates: int) -> "SelectionVector":
        flags = np.zeros(num_candidates, dtype=np.int8)
        flags[list(indices)] = 1
        return cls(flags=flags)

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.flags)

    @property
    def count(self) -> int:
        return int(self.flags.sum())


@dataclass
class MilpModel:
    """Linearized selection problem.

    Binary b (one per candidate) with the cardinality constraint sum(b) = N and
    conflict constraints b_i + b_j <= 1; binary z (one per selectable pair,
    conflicting pairs are folded out since their product is forced to 0) linked
    by the three product inequalities; per-user signal power is the linear form
    Gamma_k(b, z) = linear_coeff[k] . b + pair_coeff[k] . z, and the max-min
    objective mu satisfies Gamma_k >= (N sigma^2 / P) mu for every user.
    """

    num_candidates: int
    num_selected: int
    gains: np.ndarray        # (K, G) complex channel matrix
    linear_coeff: np.ndarray  # (K, G) |h_kg|^2
    pair_index: np.ndarray   # (P, 2) selectable pairs i<j carrying a z variable
    pair_coeff: np.ndarray   # (K, P) 2*Re(h_ki^* h_kj)
    conflicts: np.ndarray    # (C, 2) forbidden pairs
    snr_scale: float         # mu = snr_scale * min_k Gamma_k; equals P/(N sigma^2)

    def signal_power(self, b, z) -> np.ndarray:
        """Gamma_k for explicit (b, z) vectors; z must follow pair_index order."""
        b = np.asarray(b, dtype=float)
        z = np.asarray(z, dtype=float)
        return self.linear_coeff @ b + self.pair_coeff @ z

    def pair_products(self, b) -> np.ndarray:
        """The z vector implied by a binary b (z_p = b_i * b_j)."""
        b = np.asarray(b)
        return b[self.pair_index[:, 0]] * b[self.pair_index[:, 1]]

    @staticmethod
    def mccormick_feasible(bi: int, bj: int, z: int) -> bool:
        """Whether (b_i, b_j, z) satisfies the three product-linking inequalities."""
        return z <= bi and z <= bj and z >= bi + bj - 1

    def selection_feasible(self, selection: SelectionVector) -> bool:
        b = selection.flags
        if int(b.sum()) != self.num_selected:
            return False
        return not any(b[i] and b[j] for i, j in self.conflicts)

    def mu_of_selection(self, selection: SelectionVector) -> float:
        """Linear max-min SNR of a complete selection (exact complex evaluation)."""
        idx = selection.indices()
        s = self.gains[:, idx].sum(axis=1)
        return float(self.snr_scale * (np.abs(s) ** 2).min())


def build_milp(table: DiscreteChannelTable, conflicts: set[tuple[int, int]],
               num_selected: int, scenario: Scenario) -> MilpModel:
    """Assemble the linearized model from a channel table and a conflict set."""
    gains = table.gains
    k, g = gains.shape
    if num_selected < 1:
        raise ParameterError("must select at least one candidate")
    if num_selected > g:
        raise ParameterError(
            f"cannot select {num_selected} of {g} candidates: infeasible by construction"
        )
    iu, ju = np.triu_indices(g, k=1)
    if conflicts:
        conflict_arr = np.array(sorted(conflicts), dtype=np.int64)
        forbidden = np.zeros((g, g), dtype=bool)
        forbidden[conflict_arr[:, 0], conflict_arr[:, 1]] = True
        keep = ~forbidden[iu, ju]
        iu, ju = iu[keep], ju[keep]
    else:
        conflict_arr = np.empty((0, 2), dtype=np.int64)
    pair_index = np.column_stack([iu, ju])
    pair_coeff = 2.0 * np.real(np.conj(gains[:, iu]) * gains[:, ju])
    r = scenario.radio
    return MilpModel(
        num_candidates=g,
        num_selected=int(num_selected),
        gains=gains,
        linear_coeff=np.abs(gains) ** 2,
        pair_index=pair_index,
        pair_coeff=pair_coeff,
        conflicts=conflict_arr,
        snr_scale=r.tx_power_w / (num_selected * r.noise_power_w),
    )


@dataclass
class MilpResult:
    selection: Optional[SelectionVector]
    mu: float
    status: str
    gap: float          # relative optimality gap (0 when optimal)
    root_bound: float   # valid upper bound on mu computed at the root
    nodes: int


def _lex_smaller(idx_a: Sequence[int], idx_b: Sequence[int]) -> bool:
    """True when selection a has the lexicographically smaller flag vector.

    Flag vectors differ first at the smallest index in their symmetric
    difference; the selection *not* containing that index is smaller.
    """
    sa, sb = set(idx_a), set(idx_b)
    diff = sa.symmetric_difference(sb)
    if not diff:
        return False
    return min(diff) in sb


def _suffix_top_sums(amps: np.ndarray, max_m: int) -> np.ndarray:
    """suffix[m, k, p] = sum of the m largest amps[k, q] over q >= p."""
    k, g = amps.shape
    out = np.zeros((max_m + 1, k, g + 1))
    for ki in range(k):
        top: list[float] = []  # ascending, at most max_m entries
        for p in range(g - 1, -1, -1):
            a = amps[ki, p]
            if len(top) < max_m:
                top.append(a)
                top.sort()
            elif a > top[0]:
                top[0] = a
                top.sort()
            acc = 0.0
            for m in range(1, max_m + 1):
                acc += top[-m] if m <= len(top) else 0.0
                out[m, ki, p] = acc
    return out


def greedy_selection(model: MilpModel) -> Optional[SelectionVector]:
    """Conflict-respecting greedy pick of the N strongest candidates (sum |h|^2)."""
    strength = model.linear_coeff.sum(axis=0)
    order = np.argsort(-strength, kind="stable")
    forbidden = _conflict_matrix(model)
    chosen: list[int] = []
    for g in order:
        if forbidden is not None and any(forbidden[g, c] for c in chosen):
            continue
        chosen.append(int(g))
        if len(chosen) == model.num_selected:
            return SelectionVector.from_indices(chosen, model.num_candidates)
    return None


def _conflict_matrix(model: MilpModel) -> Optional[np.ndarray]:
    if len(model.conflicts) == 0:
        return None
    g = model.num_candidates
    mat = np.zeros((g, g), dtype=bool)
    mat[model.conflicts[:, 0], model.conflicts[:, 1]] = True
    mat |= mat.T
    return mat


def local_search(model: MilpModel, selection: SelectionVector,
                 max_rounds: int = 100) -> SelectionVector:
    """Deterministic best-improvement swap search; never decreases mu."""
    forbidden = _conflict_matrix(model)
    idx = list(int(i) for i in selection.indices())
    s = model.gains[:, idx].sum(axis=1)
    mu = float((np.abs(s) ** 2).min())
    g = model.num_candidates
    for _ in range(max_rounds):
        best_gain = mu
        best_move = None
        in_sel = np.zeros(g, dtype=bool)
        in_sel[idx] = True
        for pos, i in enumerate(idx):
            s_wo = s - model.gains[:, i]
            cand_mask = ~in_sel
            if forbidden is not None:
                others = [j for j in idx if j != i]
                if others:
                    cand_mask &= ~forbidden[others].any(axis=0)
            cands = np.flatnonzero(cand_mask)
            if len(cands) == 0:
                continue
            vals = (np.abs(s_wo[:, None] + model.gains[:, cands]) ** 2).min(axis=0)
            j = int(np.argmax(vals))
            if vals[j] > best_gain:
                best_gain = float(vals[j])
                best_move = (pos, int(cands[j]))
        if best_move is None:
            break
        pos, newcand = best_move
        s = s - model.gains[:, idx[pos]] + model.gains[:, newcand]
        idx[pos] = newcand
        mu = best_gain
    return SelectionVector.from_indices(idx, g)


def _root_lp_bound(model: MilpModel) -> Optional[float]:
    """LP relaxation bound (b, z in [0,1]) via scipy; None when unavailable/too big."""
    n_pairs = len(model.pair_index)
    if model.num_candidates > 40 or n_pairs > 900:
        return None
    try:
        from scipy.optimize import linprog
    except ImportError:  # pragma: no cover
        return None
    g, p, k = model.num_candidates, n_pairs, model.gains.shape[0]
    nv = g + p + 1  # [b, z, gamma_min]
    c = np.zeros(nv)
    c[-1] = -1.0
    rows, cols, vals, rhs = [], [], [], []

    def add_row(entries, bound):
        r = len(rhs)
        for col, v in entries:
            rows.append(r)
            cols.append(col)
            vals.append(v)
        rhs.append(bound)

    for pi, (i, j) in enumerate(model.pair_index):
        add_row([(g + pi, 1.0), (i, -1.0)], 0.0)            # z <= b_i
        add_row([(g + pi, 1.0), (j, -1.0)], 0.0)            # z <= b_j
        add_row([(g + pi, -1.0), (i, 1.0), (j, 1.0)], 1.0)  # z >= b_i + b_j - 1
    for i, j in model.conflicts:
        add_row([(int(i), 1.0), (int(j), 1.0)], 1.0)
    for ki in range(k):
        entries = [(i, -model.linear_coeff[ki, i]) for i in range(g)]
        entries += [(g + pi, -model.pair_coeff[ki, pi]) for pi in range(p)]
        entries.append((nv - 1, 1.0))
        add_row(entries, 0.0)                                # gamma_min <= Gamma_k

    from scipy.sparse import coo_matrix

    a_ub = coo_matrix((vals, (rows, cols)), shape=(len(rhs), nv))
    a_eq = coo_matrix((np.ones(g), (np.zeros(g, dtype=int), np.arange(g))), shape=(1, nv))
    bounds = [(0.0, 1.0)] * (g + p) + [(0.0, None)]
    res = linprog(c, A_ub=a_ub, b_ub=np.asarray(rhs), A_eq=a_eq,
                  b_eq=np.array([float(model.num_selected)]), bounds=bounds, method="highs")
    if not res.success:
        return None
    return float(model.snr_scale * (-res.fun))


class _Search:
    """Depth-first exact search over index-ordered selections with pruning.

    Candidates are visited in decreasing total-strength order; a node that has
    selected `depth` candidates bounds every completion by giving each user its
    current coherent sum plus the m largest remaining amplitudes fully aligned
    (a relaxation of the pair-linking constraints), then prunes against the
    incumbent. Conflict masks restrict expansions when a conflict set exists.
    """

    def __init__(self, model: MilpModel, deadline: float):
        self.model = model
        self.scale = model.snr_scale
        self.n_select = model.num_selected
        strength = model.linear_coeff.sum(axis=0)
        self.order = np.argsort(-strength, kind="stable")
        self.h = np.ascontiguousarray(model.gains[:, self.order])
        self.amps = np.abs(self.h)
        self.suffix = _suffix_top_sums(self.amps, self.n_select)
        full = _conflict_matrix(model)
        self.conflict = None if full is None else full[np.ix_(self.order, self.order)]
        self.deadline = deadline
        self.g = model.num_candidates
        self.best_mu = -np.inf
        self.best_sel: Optional[tuple[int, ...]] = None  # ordered-space indices
        self.path: list[int] = []
        self.nodes = 0
        self.timed_out = False
        self.pending_bound = -np.inf

    def root_bound(self) -> float:
        return float(self.scale * (self.suffix[self.n_select, :, 0] ** 2).min())

    def seed_incumbent(self, selection: SelectionVector):
        ordered = np.empty(self.g, dtype=np.int64)
        ordered[self.order] = np.arange(self.g)
        idx = tuple(sorted(int(ordered[i]) for i in selection.indices()))
        mu = self.model.mu_of_selection(selection)
        self._offer(mu, idx)

    def _offer(self, mu: float, sel_ordered: tuple[int, ...]):
        if mu > self.best_mu:
            self.best_mu = mu
            self.best_sel = sel_ordered
        elif mu == self.best_mu and self.best_sel is not None:
            a = sorted(int(self.order[i]) for i in sel_ordered)
            b = sorted(int(self.order[i]) for i in self.best_sel)
            if _lex_smaller(a, b):
                self.best_sel = sel_ordered

    def _check_time(self):
        if not self.timed_out and (self.nodes & 0xFF) == 0:
            if time.perf_counter() > self.deadline:
                self.timed_out = True

    def run(self):
        s0 = np.zeros(self.model.gains.shape[0], dtype=complex)
        allowed = None if self.conflict is None else np.ones(self.g, dtype=bool)
        self._expand(s0, 0, 0, allowed)

    def _candidates(self, start: int, allowed) -> np.ndarray:
        if allowed is None:
            return np.arange(start, self.g)
        return start + np.flatnonzero(allowed[start:])

    def _complete(self, s_final: np.ndarray, tail: list[int]):
        """Exact evaluation of a fully forced completion."""
        mu = float(self.scale * (np.abs(s_final) ** 2).min())
        self._offer(mu, tuple(self.path + tail))

    def _leaf_scan(self, s: np.ndarray, cands: np.ndarray):
        vals = self.scale * (np.abs(s[:, None] + self.h[:, cands]) ** 2).min(axis=0)
        mx = float(vals.max())
        if mx < self.best_mu:
            return
        for idx in np.flatnonzero(vals == mx):
            self._offer(mx, tuple(self.path + [int(cands[idx])]))

    def _expand(self, s: np.ndarray, start: int, depth: int, allowed):
        self.nodes += 1
        self._check_time()
        if self.timed_out:
            return
        m_rem = self.n_select - depth
        cands = self._candidates(start, allowed)
        if len(cands) < m_rem:
            return
        if len(cands) == m_rem:
            # forced completion; only valid when mutually compatible
            if self.conflict is None or not self.conflict[np.ix_(cands, cands)].any():
                self._complete(s + self.h[:, cands].sum(axis=1), [int(c) for c in cands])
            return
        if m_rem == 1:
            self._leaf_scan(s, cands)
            return

        sums = s[:, None] + self.h[:, cands]  # (K, C)
        ub = self.scale * ((np.abs(sums) + self.suffix[m_rem - 1][:, cands + 1]) ** 2).min(axis=0)
        keep = np.flatnonzero(ub > self.best_mu)
        if len(keep) == 0:
            return
        keep = keep[np.argsort(-ub[keep], kind="stable")]
        for pos, ci in enumerate(keep):
            if self.timed_out:
                rest = ub[keep[pos:]]
                self.pending_bound = max(self.pending_bound, float(rest.max()))
                return
            if ub[ci] <= self.best_mu:  # incumbent improved since sorting
                continue
            c = int(cands[ci])
            child_allowed = None
            if self.conflict is not None:
                child_allowed = allowed & ~self.conflict[c]
            self.path.append(c)
            self._expand(sums[:, ci], c + 1, depth + 1, child_allowed)
            self.path.pop()


def solve_milp(model: MilpModel, time_budget: float = 60.0,
               warm_start: Optional[SelectionVector] = None) -> MilpResult:
    """Exact branch-and-bound for the linearized selection problem.

    Returns the optimal selection (status "optimal"), the best incumbent with a
    valid relative gap when the time budget runs out ("timeout"), or
    "infeasible" when no selection satisfies cardinality plus conflicts.
    An optional warm start (validated) seeds the incumbent after a local-search
    polish, which also makes nested-grid refinements monotone.
    """
    deadline = time.perf_counter() + time_budget
    search = _Search(model, deadline)

    incumbents = []
    g = greedy_selection(model)
    if g is not None:
        incumbents.append(local_search(model, g))
    if warm_start is not None:
        if not model.selection_feasible(warm_start):
            raise ParameterError("warm start violates cardinality or conflict constraints")
        incumbents.append(local_search(model, warm_start))
    for sel in incumbents:
        search.seed_incumbent(sel)

    root = search.root_bound()
    lp = _root_lp_bound(model)
    if lp is not None:
        root = min(root, lp)

    search.run()

    if search.best_sel is None:
        if search.timed_out:
            return MilpResult(None, float("nan"), TIMEOUT, float("inf"), root, search.nodes)
        return MilpResult(None, float("nan"), INFEASIBLE, float("inf"), root, search.nodes)

    original = sorted(int(search.order[i]) for i in search.best_sel)
    selection = SelectionVector.from_indices(original, model.num_candidates)
    mu = model.mu_of_selection(selection)
    if search.timed_out:
        remaining = max(search.pending_bound, mu)
        gap = (remaining - mu) / mu if mu > 0 else float("inf")
        return MilpResult(selection, mu, TIMEOUT, gap, root, search.nodes)
    return MilpResult(selection, mu, OPTIMAL, 0.0, root, search.nodes)


def brute_force_select(table: DiscreteChannelTable, conflicts: set[tuple[int, int]],
                       num_selected: int, scenario: Scenario,
                       budget: int = ENUMERATION_BUDGET) -> tuple[SelectionVector, float]:
    """Exhaustive oracle: enumerate every N-subset, filter conflicts, maximize mu."""
    from itertools import combinations, islice

    gains = table.gains
    g = gains.shape[1]
    if num_selected < 1 or num_selected > g:
        raise ParameterError(f"cannot select {num_selected} of {g} candidates")
    total = comb(g, num_selected)
    if total > budget:
        raise BudgetExceededError(
            f"enumeration of C({g},{num_selected}) = {total} subsets exceeds budget {budget}"
        )
    model = build_milp(table, conflicts, num_selected, scenario)
    forbidden = _conflict_matrix(model)

    best_mu = -np.inf
    best: Optional[tuple[int, ...]] = None
    combos = combinations(range(g), num_selected)
    chunk_size = 65536
    while True:
        chunk = list(islice(combos, chunk_size))
        if not chunk:
            break
        arr = np.array(chunk, dtype=np.int64)  # (B, N)
        ok = np.ones(len(arr), dtype=bool)
        if forbidden is not None:
            for a in range(num_selected):
                for b in range(a + 1, num_selected):
                    ok &= ~forbidden[arr[:, a], arr[:, b]]
        if not ok.any():
            continue
        arr = arr[ok]
        sums = gains[:, arr].sum(axis=2)  # (K, B)
        vals = model.snr_scale * (np.abs(sums) ** 2).min(axis=0)
        for j in np.flatnonzero(vals >= best_mu):
            v, sel = float(vals[j]), tuple(int(c) for c in arr[j])
            if v > best_mu or best is None:
                best_mu, best = v, sel
            elif v == best_mu and _lex_smaller(sel, best):
                best = sel
    if best is None:
        raise ParameterError("no conflict-free selection of the requested size exists")
    return SelectionVector.from_indices(best, g), best_mu


def embed_selection(coarse: CandidateGrid, fine: CandidateGrid,
                    selection: SelectionVector) -> SelectionVector:
    """Map a coarse-grid selection onto a refined grid containing the same points."""
    fine_pts = fine.points
    indices = []
    for g in selection.indices():
        p = coarse.points[g]
        d2 = ((fine_pts - p) ** 2).sum(axis=1)
        j = int(np.argmin(d2))
        if d2[j] > 1e-18:
            raise ParameterError("coarse grid point is not a point of the fine grid")
        indices.append(j)
    return SelectionVector.from_indices(indices, fine.num_candidates)


# Instance files: a self-describing JSON document carrying everything the
# solver needs, so solved cases can be frozen as regression fixtures.

_INSTANCE_FORMAT = "pass2d-discrete-instance"


def dump_instance(path, table: DiscreteChannelTable, conflicts: set[tuple[int, int]],
                  num_selected: int, scenario: Scenario) -> None:
    grid = table.grid
    r = scenario.radio
    doc = {
        "format": _INSTANCE_FORMAT,
        "version": 1,
        "side_length": grid.side_length,
        "height": grid.height,
        "num_waveguides": grid.num_waveguides,
        "slots_per_waveguide": grid.slots_per_waveguide,
        "num_selected": num_selected,
        "min_separation": scenario.min_separation,
        "feed_z": scenario.feed_point.z,
        "carrier_freq_hz": r.carrier_freq_hz,
        "n_eff": r.n_eff,
        "tx_power_w": r.tx_power_w,
        "noise_power_w": r.noise_power_w,
        "ues": [[u.x, u.y, u.z] for u in scenario.ues],
        "gains_real": table.gains.real.tolist(),
        "gains_imag": table.gains.imag.tolist(),
        "conflicts": sorted([int(i), int(j)] for i, j in conflicts),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


@dataclass
class LoadedInstance:
    table: DiscreteChannelTable
    conflicts: set[tuple[int, int]]
    num_selected: int
    scenario: Scenario


def load_instance(path) -> LoadedInstance:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != _INSTANCE_FORMAT:
        raise ParameterError(f"{path}: not a discrete instance file")
    radio = derive_radio_params(doc["carrier_freq_hz"], doc["n_eff"],
                                doc["tx_power_w"], doc["noise_power_w"])
    scenario = make_scenario(
        [(u[0], u[1]) for u in doc["ues"]],
        side_length=doc["side_length"],
        height=doc["height"],
        radio=radio,
        min_separation=doc["min_separation"],
        feed_z=doc["feed_z"],
    )
    grid = build_grid(doc["side_length"], doc["num_waveguides"],
                      doc["slots_per_waveguide"], doc["height"])
    gains = np.asarray(doc["gains_real"], dtype=float) + 1j * np.asarray(doc["gains_imag"], dtype=float)
    table = DiscreteChannelTable(gains=gains, grid=grid)
    conflicts = {(int(i), int(j)) for i, j in doc["conflicts"]}
    return LoadedInstance(table=table, conflicts=conflicts,
                          num_selected=int(doc["num_selected"]), scenario=scenario)
