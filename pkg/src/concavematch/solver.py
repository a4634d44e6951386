"""Frank-Wolfe solvers over matching polytopes.

Two variants:

* :func:`frank_wolfe` minimizes a quadratic energy over the doubly
  stochastic polytope with an exact linear-assignment oracle and an exact
  quadratic line search. On conditionally concave energies every accepted
  step is a full step to a permutation.
* :func:`fw_concave_search` minimizes over one-sided matchings. The step
  LP has a closed form (per-row argmin); when the plain step does not
  descend, a convex diagonal energy that is constant on the matching set
  is subtracted with increasing weight until a descent step appears, the
  terminal weight making the surrogate concave so its step cannot ascend.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConcavematchError, DimensionError
from .polytope import MatchingState, PolytopeKind, is_vertex
from ._utils import as_float_matrix, as_seed_sequence

VERTEX_TOL = 1e-6


@dataclass(frozen=True)
class SolverConfig:
    """Iteration caps and tolerances for the Frank-Wolfe loops.

    ``stationarity_tol`` scales the stop threshold on the Frank-Wolfe gap
    <grad E(X), X - X1> as tol * (1 + |E(X)|).
    """

    max_iters: int = 500
    stationarity_tol: float = 1e-8
    line_search: str = "exact-quadratic"
    seed: int = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.stationarity_tol <= 0:
            raise ValueError("stationarity_tol must be positive")
        if self.line_search not in ("exact-quadratic", "unit-step"):
            raise ValueError("line_search must be 'exact-quadratic' or 'unit-step'")


@dataclass(frozen=True)
class SolverResult:
    x: MatchingState
    energy: float
    iterations: int
    converged: bool
    is_vertex: bool
    trace: tuple  # of (energy after step, step size)

    @property
    def assignment(self):
        """Matched column per row (argmax of the final point)."""
        return np.argmax(self.x.entries, axis=1)

    def to_dict(self):
        return {
            "assignment": [int(j) for j in self.assignment],
            "energy": self.energy,
            "iterations": self.iterations,
            "converged": self.converged,
            "is_vertex": self.is_vertex,
            "trace": [[float(e), float(t)] for e, t in self.trace],
        }


def _check_finite(cost):
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix must be finite")


def lap_oracle(cost):
    """Exact linear assignment: argmin_{X in DS} <cost, X>, returned as the
    matched column per row.

    A linear program over the doubly stochastic polytope attains its
    optimum at a permutation. Solved by the O(n^3) shortest augmenting
    path method; among cost-minimal assignments the lexicographically
    smallest one (in row order) is returned, found by restricting to
    zero-reduced-cost edges of the optimal duals.
    """
    cost = as_float_matrix(cost, "cost")
    n, n0 = cost.shape
    if n != n0:
        raise DimensionError(f"assignment cost must be square, got {n}x{n0}")
    _check_finite(cost)
    assignment, u, v = _shortest_augmenting_path(cost)
    tol = 1e-9 * (1.0 + float(np.abs(cost).max()))
    reduced = cost - u[:, None] - v[None, :]
    tight = reduced <= tol
    # ties exist only if some row has a second tight column
    if np.any(tight.sum(axis=1) > 1):
        assignment = _lex_smallest_matching(tight, assignment)
    return assignment


def _shortest_augmenting_path(cost):
    """Jonker-Volkenant style LAP solve; returns (col per row, duals u, v)."""
    n = cost.shape[0]
    u = np.zeros(n)
    v = np.zeros(n + 1)  # index n is the virtual start column
    row_at = np.full(n + 1, -1, dtype=int)  # row matched to each column
    for i in range(n):
        row_at[n] = i
        j0 = n
        minv = np.full(n, np.inf)
        way = np.full(n, n, dtype=int)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = row_at[j0]
            free = np.flatnonzero(~used[:n])
            cur = cost[i0, free] - u[i0] - v[free]
            better = cur < minv[free]
            improved = free[better]
            minv[improved] = cur[better]
            way[improved] = j0
            j1 = free[int(np.argmin(minv[free]))]
            delta = minv[j1]
            used_cols = np.flatnonzero(used)
            u[row_at[used_cols]] += delta
            v[used_cols] -= delta
            minv[free] -= delta
            j0 = j1
            if row_at[j0] < 0:
                break
        while j0 != n:
            j1 = way[j0]
            row_at[j0] = row_at[j1]
            j0 = j1
    assignment = np.empty(n, dtype=int)
    assignment[row_at[:n]] = np.arange(n)
    return assignment, u, v[:n]


def _lex_smallest_matching(tight, assignment):
    """Lexicographically smallest perfect matching inside the tight graph,
    starting from a known perfect matching."""
    n = tight.shape[0]
    col_of = assignment.copy()
    row_of = np.full(n, -1, dtype=int)
    row_of[col_of] = np.arange(n)
    adjacency = [np.flatnonzero(tight[i]) for i in range(n)]

    def try_augment(start_row, banned_rows, visited):
        # Kuhn DFS: free a column for start_row among non-fixed columns
        for j in adjacency[start_row]:
            if j in visited:
                continue
            visited.add(j)
            owner = row_of[j]
            if owner < 0 or (owner not in banned_rows and try_augment(owner, banned_rows, visited)):
                row_of[j] = start_row
                col_of[start_row] = j
                return True
        return False

    fixed_rows = set()
    for i in range(n):
        current = col_of[i]
        for j in adjacency[i]:
            if j >= current:
                break
            owner = row_of[j]
            if owner in fixed_rows:
                continue  # fixed rows keep their columns
            # tentatively give column j to row i, rematch the displaced row
            saved_col_of = col_of.copy()
            saved_row_of = row_of.copy()
            row_of[current] = -1
            col_of[i] = j
            row_of[j] = i
            fixed_rows.add(i)
            if owner < 0 or try_augment(owner, fixed_rows, {j}):
                fixed_rows.discard(i)
                break
            fixed_rows.discard(i)
            col_of[:] = saved_col_of
            row_of[:] = saved_row_of
        fixed_rows.add(i)
    return col_of


def assignment_to_matrix(assignment, n0=None):
    """0/1 matrix with a single 1 per row at the assigned column."""
    assignment = np.asarray(assignment, dtype=int)
    n = assignment.size
    n0 = n if n0 is None else n0
    x = np.zeros((n, n0))
    x[np.arange(n), assignment] = 1.0
    return x


def _line_search_step(seg, mode):
    """Optimal t in [0, 1] for q(t) = c0 + c1 t + c2 t^2."""
    if mode == "unit-step":
        return 1.0 if seg.value(1.0) < seg.c0 else 0.0
    if seg.c2 <= 0.0:
        return 1.0 if seg.c1 + seg.c2 < 0.0 else 0.0
    return float(np.clip(-seg.c1 / (2.0 * seg.c2), 0.0, 1.0))


def frank_wolfe(h, x0, config=None):
    """Frank-Wolfe over the doubly stochastic polytope.

    Each iteration solves the assignment LP on the gradient, then takes
    the exact quadratic line-search step. Stops when the Frank-Wolfe gap
    falls below tol * (1 + |E|), when the line search refuses to move, or
    at ``max_iters``.
    """
    if config is None:
        config = SolverConfig()
    if x0.kind is not PolytopeKind.PERMUTATION:
        raise DimensionError("frank_wolfe expects a permutation-polytope start")
    x = np.array(x0.entries, dtype=float)
    trace = []
    converged = False
    iterations = 0
    for _ in range(config.max_iters):
        grad = h.gradient(x)
        iterations += 1
        x1 = assignment_to_matrix(lap_oracle(grad))
        gap = float(np.sum(grad * (x - x1)))
        energy = h.value(x)
        if gap <= config.stationarity_tol * (1.0 + abs(energy)):
            converged = True
            break
        seg = h.segment(x, x1)
        t = _line_search_step(seg, config.line_search)
        if t <= 0.0:
            converged = True
            break
        x = x1 if t >= 1.0 else (1.0 - t) * x + t * x1
        trace.append((seg.value(t), t))
    state = MatchingState(x, PolytopeKind.PERMUTATION)
    return SolverResult(
        x=state,
        energy=h.value(x),
        iterations=iterations,
        converged=converged,
        is_vertex=is_vertex(state, tol=VERTEX_TOL),
        trace=tuple(trace),
    )


def row_argmin_lp(cost):
    """Closed-form LP over one-sided matchings: a 1 at each row's minimal
    cost entry, ties to the smallest column index."""
    cost = as_float_matrix(cost, "cost")
    _check_finite(cost)
    cols = np.argmin(cost, axis=1)
    return MatchingState(
        assignment_to_matrix(cols, cost.shape[1]), PolytopeKind.ONESIDED
    )


@dataclass(frozen=True)
class DiagonalRegularizer:
    """Uniform diagonal shift delta*I with delta an absolute-row-sum bound
    of the Hessian, so M - delta*I is negative semidefinite."""

    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("regularizer must be nonnegative")


def gershgorin_regularizer(h):
    """Gershgorin bound on the Hessian's largest eigenvalue, computed from
    the Kronecker terms without materializing M: the absolute row sums of
    B (x) A factor into products of factor row sums, and summing the
    per-term products bounds the row sums of the signed sum.
    """
    n, n0 = h.shape
    radii = np.zeros((n, n0))
    for s, b, a in h.terms:
        radii += abs(s) * np.outer(
            np.abs(a).sum(axis=1), np.abs(b).sum(axis=1)
        )
    return DiagonalRegularizer(float(radii.max()) if radii.size else 0.0)


def _next_critical_lambda(grad, x, delta, lam):
    """Smallest lambda' > lam at which some row's argmin of
    grad - 2 lambda delta x changes. Returns inf when none exists."""
    if delta <= 0.0:
        return math.inf
    cost = grad - (2.0 * lam * delta) * x
    n = x.shape[0]
    cur = np.argmin(cost, axis=1)
    x_cur = x[np.arange(n), cur][:, None]
    g_cur = grad[np.arange(n), cur][:, None]
    steeper = x > x_cur  # columns whose cost falls faster than the argmin's
    with np.errstate(divide="ignore", invalid="ignore"):
        crossings = (grad - g_cur) / (2.0 * delta * (x - x_cur))
    crossings = np.where(steeper, crossings, math.inf)
    crossings = np.where(crossings > lam + 1e-15, crossings, math.inf)
    smallest = float(crossings.min())
    return smallest


def _best_single_row_swap(h, grad, x, cols):
    """Energy change of every single-row reassignment, evaluated exactly:
    E(X + D) - E(X) = <grad, D> + vec(D)^T M vec(D) with D supported on one
    row. Returns (delta_energy, row, new_col) of the best swap."""
    n, n0 = x.shape
    rows = np.arange(n)
    lin = grad - grad[rows, cols][:, None]
    quad = np.zeros((n, n0))
    for s, b, a in h.terms:
        da = np.diag(a)
        db = np.diag(b)
        quad += s * (
            np.outer(da, db)
            + (da * db[cols])[:, None]
            - 2.0 * da[:, None] * b[cols, :]
        )
    change = lin + quad
    change[rows, cols] = math.inf
    r, c = divmod(int(np.argmin(change)), n0)
    return float(change[r, c]), r, c


def fw_concave_search(h, x0, config=None):
    """Frank-Wolfe with a concave search over one-sided matchings.

    From the current point, the per-row-argmin LP step on the cost
    grad E(X) - 2 lambda delta X is tried with lambda = 0; while it fails
    to strictly decrease the energy, lambda advances through the step's
    critical values (where a row's argmin changes), capped at lambda = 1.
    At the cap the surrogate Hessian M - delta I is negative semidefinite,
    so from a vertex the step cannot increase the energy. When the whole
    scan yields no strict descent, single-row reassignments are searched
    exactly; the returned vertex therefore has no improving 1-swap.
    """
    if config is None:
        config = SolverConfig()
    if x0.kind is not PolytopeKind.ONESIDED:
        raise DimensionError("fw_concave_search expects a one-sided start")
    x = np.array(x0.entries, dtype=float)
    n, n0 = x.shape
    delta = gershgorin_regularizer(h).value
    energy = h.value(x)
    trace = []
    converged = False
    iterations = 0
    for _ in range(config.max_iters):
        grad = h.gradient(x)
        accept_tol = 1e-10 * (1.0 + abs(energy))
        accepted = None
        lam = 0.0
        at_cap_state = None
        for _ in range(n * n0 + 2):
            cost = grad - (2.0 * lam * delta) * x
            x1 = row_argmin_lp(cost).entries
            e1 = h.value(x1)
            if e1 < energy - accept_tol:
                accepted = (x1, e1)
                break
            if lam >= 1.0:
                at_cap_state = (x1, e1)
                break
            crossing = _next_critical_lambda(grad, x, delta, lam)
            # step just past the crossing so the new argmin takes effect
            lam = min(crossing * (1.0 + 1e-10) + 1e-18, 1.0)
        else:
            raise ConcavematchError("lambda scan failed to terminate")
        iterations += 1
        if accepted is not None:
            x, energy = accepted
            trace.append((energy, 1.0))
            continue
        vertex_now = is_vertex(
            MatchingState(x, PolytopeKind.ONESIDED), tol=VERTEX_TOL
        )
        if not vertex_now:
            # round onto a vertex with the guaranteed-concave step
            x, energy = at_cap_state
            trace.append((energy, 1.0))
            continue
        if at_cap_state is not None and at_cap_state[1] > energy + 1e-8 * (1.0 + abs(energy)):
            raise ConcavematchError(
                "concave step at lambda=1 increased the energy; "
                "regularizer invariant violated"
            )
        cols = np.argmax(x, axis=1)
        change, r, c = _best_single_row_swap(h, grad, x, cols)
        if change < -accept_tol:
            x = x.copy()
            x[r, cols[r]] = 0.0
            x[r, c] = 1.0
            energy = h.value(x)
            trace.append((energy, 1.0))
            continue
        converged = True
        break
    state = MatchingState(x, PolytopeKind.ONESIDED)
    return SolverResult(
        x=state,
        energy=energy,
        iterations=iterations,
        converged=converged,
        is_vertex=is_vertex(state, tol=VERTEX_TOL),
        trace=tuple(trace),
    )


def _anchor_start(descriptor, anchors, rng):
    """Feasible start biased toward random anchor pairs: anchored rows are
    one-hot, the rest uniform; blended 9:1 with the uniform center so the
    start is strictly positive.

    For the permutation polytope the anchored matrix is completed to the
    doubly stochastic limit of its Sinkhorn projection, which has a closed
    form: unanchored rows spread uniformly over the unanchored columns.
    """
    n, n0 = descriptor.n, descriptor.n0
    base = np.full((n, n0), 1.0 / n0)
    count = min(anchors, n, n0)
    if count == 0:
        return MatchingState(base, descriptor.kind)
    rows = rng.choice(n, size=count, replace=False)
    cols = rng.choice(n0, size=count, replace=False)
    if descriptor.kind is PolytopeKind.PERMUTATION:
        anchored = np.zeros((n, n0))
        free_rows = np.setdiff1d(np.arange(n), rows)
        free_cols = np.setdiff1d(np.arange(n0), cols)
        if free_rows.size:
            anchored[np.ix_(free_rows, free_cols)] = 1.0 / free_cols.size
        anchored[rows, cols] = 1.0
    else:
        anchored = np.full((n, n0), 1.0 / n0)
        anchored[rows] = 0.0
        anchored[rows, cols] = 1.0
    x0 = 0.1 * base + 0.9 * anchored
    return MatchingState(x0, descriptor.kind)


def multi_start(h, descriptor, anchors=3, restarts=10, config=None, seed=None,
                threads=1):
    """Best-of-``restarts`` local matching: each restart builds a start
    from ``anchors`` random anchor pairs and runs the polytope's solver
    (Frank-Wolfe for permutations, concave search one-sided).

    Restarts draw per-task seeds and may run on a worker pool
    (``threads`` > 1); the reduction takes the lowest energy with ties to
    the earliest restart, so the result is deterministic given the seed
    regardless of scheduling.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if config is None:
        config = SolverConfig()
    if seed is None:
        seed = config.seed
    streams = as_seed_sequence(seed).spawn(restarts)
    solve = (
        frank_wolfe
        if descriptor.kind is PolytopeKind.PERMUTATION
        else fw_concave_search
    )

    def run(stream):
        rng = np.random.default_rng(stream)
        x0 = _anchor_start(descriptor, anchors, rng)
        return solve(h, x0, config)

    if threads and threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, streams))
    else:
        results = [run(stream) for stream in streams]
    best = results[0]
    for result in results[1:]:
        if result.energy < best.energy:
            best = result
    return best
