"""Concavity certificates and convex-direction probability machinery.

A quadratic energy is conditionally concave when its Hessian restricted to
the matching polytope's lin space is negative definite; then Frank-Wolfe
behaves like a concave minimizer and stops at vertices. When the restricted
Hessian is indefinite, the chance that a Haar-random d-dimensional subspace
restriction is positive semidefinite can still be tiny; the Chernoff bound
on that probability, its closed form for two-level spectra, Monte-Carlo
estimates, and the orthogonally invariant random-Hessian ensemble used to
study vertex local minima all live here.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DenseLimitError, DimensionError
from .polytope import (
    PolytopeDescriptor,
    PolytopeKind,
    is_vertex,
    face_dimension,
    random_direction_in_lin,
    random_interior_point,
)
from .energy import LinSpaceHessian, restricted_spectrum
from ._utils import as_generator, as_seed_sequence

PSD_TOL = 1e-12


@dataclass(frozen=True)
class ConcavityCertificate:
    """Outcome of the restricted-spectrum test.

    ``classification`` is "concave" when the largest restricted eigenvalue
    is strictly negative (beyond a scale-relative tolerance), else
    "indefinite". ``margin`` is minus the largest restricted eigenvalue.
    """

    classification: str
    margin: float
    max_eigenvalue: float
    min_eigenvalue: float

    @property
    def concave(self):
        return self.classification == "concave"


def certify_conditional_concavity(h, descriptor, dense_limit=64):
    """Certify negative definiteness of H restricted to the lin space."""
    spectrum = restricted_spectrum(h, descriptor, dense_limit=dense_limit)
    top = float(spectrum[-1])
    bottom = float(spectrum[0])
    scale = float(np.max(np.abs(spectrum))) if spectrum.size else 0.0
    tol = 1e-10 * scale
    classification = "concave" if top < -tol else "indefinite"
    return ConcavityCertificate(classification, -top, top, bottom)


def _log_mgf_slope(t, eigenvalues):
    # derivative of -(1/2) sum log(1 - 2 t lam): sum lam / (1 - 2 t lam)
    return float(np.sum(eigenvalues / (1.0 - 2.0 * t * eigenvalues)))


def _log_bound(t, eigenvalues, d):
    return -0.5 * d * float(np.sum(np.log(1.0 - 2.0 * t * eigenvalues)))


def chernoff_bound(eigenvalues, d=1):
    """Upper bound on the probability that the restriction of a symmetric
    matrix with the given eigenvalues to a Haar-random d-dimensional
    subspace is positive semidefinite.

    Minimizes prod_i (1 - 2 t lam_i)^(-d/2) over t in (0, 1/(2 lam_max)).
    The optimal t does not depend on d (the log objective scales linearly
    in d), so bound(d) = bound(1)^d. Returns ``(bound, t_star)`` with the
    bound clamped to [0, 1].

    Edge cases: a spectrum with no positive eigenvalue but some negative
    one gives bound 0 (t -> infinity); an all-zero spectrum gives bound 1.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size == 0:
        raise DimensionError("eigenvalue list must be nonempty")
    if d < 1:
        raise ValueError("subspace dimension d must be >= 1")
    lam_max = float(lam.max())
    if lam_max <= 0.0:
        if np.any(lam < 0.0):
            return 0.0, math.inf
        return 1.0, 0.0
    if float(lam.sum()) >= 0.0:
        # slope of the log bound is nonnegative at t=0: infimum at t -> 0
        return 1.0, 0.0
    hi = (1.0 - 1e-12) / (2.0 * lam_max)
    lo = 0.0
    # slope is negative at 0 (trace < 0) and positive near the pole
    if _log_mgf_slope(hi, lam) <= 0.0:
        t_star = hi
    else:
        t_star = brentq(
            _log_mgf_slope, lo, hi, args=(lam,), xtol=1e-18, rtol=1e-14
        )
    bound = math.exp(min(_log_bound(t_star, lam, d), 0.0))
    return min(bound, 1.0), float(t_star)


@dataclass(frozen=True)
class SpectrumTemplate:
    """Two-level eigenvalue profile: ceil(p*m) positive eigenvalues in
    (0, pos_bound], the rest at or below -neg_bound.

    ``mode="fixed"`` puts the positives exactly at +pos_bound and the
    negatives at -neg_bound; ``mode="sampled"`` draws them uniformly from
    [0, pos_bound] and [-neg_bound - 1, -neg_bound].
    """

    m: int
    p: float
    pos_bound: float = 1.0
    neg_bound: float = 1.0
    mode: str = "fixed"

    def __post_init__(self):
        if self.m < 1:
            raise DimensionError("m must be >= 1")
        if not 0.0 <= self.p < 0.5:
            raise ValueError("positive fraction p must lie in [0, 1/2)")
        if self.pos_bound <= 0 or self.neg_bound <= 0:
            raise ValueError("pos_bound and neg_bound must be positive")
        if self.mode not in ("fixed", "sampled"):
            raise ValueError("mode must be 'fixed' or 'sampled'")

    @property
    def n_positive(self):
        return int(math.ceil(self.p * self.m))

    @property
    def n_negative(self):
        return self.m - self.n_positive

    @property
    def p_effective(self):
        """Realized positive fraction after rounding the count up."""
        return self.n_positive / self.m

    def eigenvalues(self, seed=None):
        """Spectrum vector, negatives first."""
        if self.mode == "fixed":
            neg = np.full(self.n_negative, -self.neg_bound)
            pos = np.full(self.n_positive, self.pos_bound)
        else:
            rng = as_generator(seed)
            neg = -self.neg_bound - rng.uniform(0.0, 1.0, self.n_negative)
            pos = rng.uniform(0.0, self.pos_bound, self.n_positive)
        return np.concatenate([neg, pos])


def closed_form_bound(template):
    """Closed-form convex-direction bound for a fixed two-level spectrum:

        ((a^(1-p) b^p / ((a+b)/2)) * (1/2) (1-p)^(p-1) p^(-p))^(m/2)

    with a = pos_bound, b = neg_bound and p the realized positive fraction,
    so the value matches :func:`chernoff_bound` on the same fixed spectrum
    exactly. Requires a <= b, which makes the base < 1 and the bound decay
    exponentially in m. At p = 0 the formula's limit (a/(a+b))^(m/2) is
    returned; the Chernoff route reports 0 there, and both upper-bound the
    (zero) probability.
    """
    if template.mode != "fixed":
        raise ValueError("closed form needs a fixed-mode template")
    a, b = template.pos_bound, template.neg_bound
    if a > b:
        raise ValueError("closed form needs pos_bound <= neg_bound")
    p = template.p_effective
    if p == 0.0:
        entropy = 1.0
    else:
        entropy = (1.0 - p) ** (p - 1.0) * p ** (-p)
    base = (a ** (1.0 - p) * b**p) / (0.5 * (a + b)) * 0.5 * entropy
    return base ** (template.m / 2.0)


@dataclass(frozen=True)
class BoundReport:
    """Chernoff bound and Monte-Carlo estimate for one restricted Hessian.

    ``epsilon_hat`` is bound^(1/d), the per-dimension rate implied by the
    bound. ``chernoff_value`` is None when the spectrum was unavailable.
    """

    chernoff_value: float
    optimal_t: float
    subspace_dim: int
    mc_estimate: float
    mc_samples: int
    mc_hits: int
    epsilon_hat: float = field(default=None)

    def __post_init__(self):
        if self.chernoff_value is not None and self.epsilon_hat is None:
            eps = self.chernoff_value ** (1.0 / self.subspace_dim)
            object.__setattr__(self, "epsilon_hat", eps)

    def mc_within_bound(self, num_std=3.0):
        """Statistical validity: bound >= estimate - num_std binomial SEs."""
        if self.chernoff_value is None:
            return True
        slack = num_std * math.sqrt(self.mc_estimate / max(self.mc_samples, 1))
        return self.chernoff_value >= self.mc_estimate - slack


def _hits_from_spectrum(eigenvalues, samples, rng, batch_cap=2**24):
    """Count samples with sum_i lam_i g_i^2 >= 0, g iid standard normal.

    This is the law of v^T M v for v uniform on the unit sphere expressed
    in M's eigenbasis (the sign is scale invariant), so hits are identical
    in distribution to explicit direction sampling. Large spectra draw in
    float32: the sign test is insensitive to the reduced precision while
    generation throughput roughly doubles.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    m = lam.size
    dtype = np.float32 if m >= 1024 else np.float64
    weights = lam.astype(dtype)
    batch = max(1, min(samples, batch_cap // max(m, 1)))
    buffer = np.empty((batch, m), dtype=dtype)
    hits = 0
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        block = buffer[:b]
        rng.standard_normal(out=block, dtype=dtype)
        np.square(block, out=block)
        hits += int(np.count_nonzero(block @ weights >= 0.0))
        done += b
    return hits


def _orthonormalize_columns(g):
    q, r = np.linalg.qr(g)
    return q


def mc_convexity_probability(
    hessian,
    where,
    d=1,
    samples=10_000,
    seed=None,
    eigenvalues=None,
    dense_limit=64,
):
    """Monte-Carlo estimate of the probability that a Haar-random
    d-dimensional subspace restriction of the Hessian is positive
    semidefinite, together with the matching Chernoff bound.

    ``hessian`` is a Kronecker/lin-space Hessian with ``where`` a
    :class:`PolytopeDescriptor` (directions drawn in the polytope's lin
    space), or a dense symmetric matrix with ``where`` its ambient
    dimension (directions drawn Gaussian in R^m), or None with explicit
    ``eigenvalues`` (d = 1 only). For d = 1 each sample tests
    v^T M v >= 0; for d > 1 the d x d restriction to an orthonormalized
    Gaussian frame must have smallest eigenvalue >= -1e-12. When the
    restricted spectrum is available (given via ``eigenvalues`` or
    computable) d = 1 sampling runs in the eigenbasis, which draws the
    identically distributed quadratic form directly.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = as_generator(seed)

    if hessian is None:
        if eigenvalues is None:
            raise ValueError("need a Hessian, a dense matrix, or eigenvalues")
        if d != 1:
            raise DimensionError("eigenvalues-only sampling supports d = 1")
        bound, t_star = chernoff_bound(eigenvalues, d=d)
        hits = _hits_from_spectrum(eigenvalues, samples, rng)
        return BoundReport(
            chernoff_value=bound,
            optimal_t=t_star,
            subspace_dim=d,
            mc_estimate=hits / samples,
            mc_samples=samples,
            mc_hits=hits,
        )

    dense = isinstance(hessian, np.ndarray)
    if dense:
        matrix = np.asarray(hessian, dtype=float)
        ambient = int(where) if not isinstance(where, PolytopeDescriptor) else where.lin_dimension
        if matrix.shape != (ambient, ambient):
            raise DimensionError(
                f"matrix shape {matrix.shape} != ambient dimension {ambient}"
            )
        if eigenvalues is None:
            eigenvalues = np.linalg.eigvalsh(matrix)
    else:
        descriptor = where
        if eigenvalues is None:
            try:
                eigenvalues = restricted_spectrum(
                    hessian, descriptor, dense_limit=dense_limit
                )
            except DenseLimitError:
                eigenvalues = None
        ambient = descriptor.lin_dimension

    if eigenvalues is not None:
        bound, t_star = chernoff_bound(eigenvalues, d=d)
    else:
        bound, t_star = None, None

    if d == 1 and eigenvalues is not None:
        hits = _hits_from_spectrum(eigenvalues, samples, rng)
    elif d == 1:
        hits = 0
        for _ in range(samples):
            v = random_direction_in_lin(where, rng)
            if hessian.quadratic_form(v) >= 0.0:
                hits += 1
    else:
        hits = 0
        for _ in range(samples):
            frame = _orthonormalize_columns(rng.standard_normal((ambient, d)))
            if dense:
                restriction = frame.T @ matrix @ frame
            else:
                vs = [_lift_coefficients(hessian, where, frame[:, j]) for j in range(d)]
                applied = [hessian.apply(v) for v in vs]
                restriction = np.array(
                    [[float(np.sum(vs[i] * applied[j])) for j in range(d)] for i in range(d)]
                )
                restriction = 0.5 * (restriction + restriction.T)
            if np.linalg.eigvalsh(restriction)[0] >= -PSD_TOL:
                hits += 1

    return BoundReport(
        chernoff_value=bound,
        optimal_t=t_star,
        subspace_dim=d,
        mc_estimate=hits / samples,
        mc_samples=samples,
        mc_hits=hits,
    )


def _lift_coefficients(hessian, descriptor, coeffs):
    """Map lin-space coordinates to the matrix they represent."""
    f = descriptor.basis().columns
    if descriptor.kind is PolytopeKind.PERMUTATION:
        y = coeffs.reshape((descriptor.n - 1, descriptor.n - 1), order="F")
        return f @ y @ f.T
    y = coeffs.reshape((descriptor.n, descriptor.n0 - 1), order="F")
    return y @ f.T


def sample_omega_hessian(template, seed=None, dense_limit=5000):
    """Draw U Lambda U^T with U Haar-uniform on the orthogonal group.

    U comes from the QR factorization of an iid Gaussian matrix with the
    sign-of-R-diagonal correction, which makes the distribution exactly
    Haar. The output spectrum equals the template spectrum.
    """
    m = template.m
    if m > dense_limit:
        raise DenseLimitError(f"dense ensemble sampling limited to m <= {dense_limit}")
    rng = as_generator(seed)
    g = rng.standard_normal((m, m))
    q, r = np.linalg.qr(g)
    q = q * np.where(np.diag(r) < 0.0, -1.0, 1.0)
    lam = template.eigenvalues(rng)
    out = (q * lam) @ q.T
    return 0.5 * (out + out.T)


@dataclass(frozen=True)
class EnsembleReport:
    """Vertex statistics of Frank-Wolfe limits over random-Hessian trials.

    ``vertex_fraction`` counts trials whose limit (the lowest-energy run of
    the trial's restarts) is a vertex; ``run_vertex_fraction`` counts every
    run individually.
    """

    trials: int
    restarts: int
    total_runs: int
    vertex_trials: int
    vertex_fraction: float
    run_vertex_fraction: float
    face_dimension_histogram: dict
    mean_iterations: float


def vertex_local_minima_experiment(
    template, n, trials, restarts=1, seed=None, config=None, vertex_tol=1e-6
):
    """Sample Hessians from the orthogonally invariant ensemble, lift them
    onto the doubly stochastic polytope, run Frank-Wolfe from random
    interior points, and record how often the limit is a permutation.

    Each trial draws one Hessian and ``restarts`` interior starts; the
    trial's limit is its lowest-energy run. Non-vertex limits are
    summarized by the dimension of the minimal polytope face containing
    them. Requires template.m == (n-1)^2.
    """
    from .solver import SolverConfig, frank_wolfe

    m = (n - 1) ** 2
    if template.m != m:
        raise DimensionError(
            f"template.m = {template.m} must equal (n-1)^2 = {m}"
        )
    if config is None:
        config = SolverConfig()
    descriptor = PolytopeDescriptor(PolytopeKind.PERMUTATION, n)
    seeds = as_seed_sequence(seed).spawn(trials)
    vertex_trials = 0
    vertex_runs = 0
    histogram = {}
    iterations = 0
    total = 0
    for trial_seq in seeds:
        streams = trial_seq.spawn(restarts + 1)
        matrix = sample_omega_hessian(template, np.random.default_rng(streams[0]))
        h = LinSpaceHessian(matrix, descriptor)
        best = None
        for r in range(restarts):
            rng = np.random.default_rng(streams[r + 1])
            x0 = random_interior_point(descriptor, rng)
            result = frank_wolfe(h, x0, config)
            total += 1
            iterations += result.iterations
            if is_vertex(result.x, tol=vertex_tol):
                vertex_runs += 1
            if best is None or result.energy < best.energy:
                best = result
        if is_vertex(best.x, tol=vertex_tol):
            vertex_trials += 1
        else:
            dim = face_dimension(best.x, tol=vertex_tol)
            histogram[dim] = histogram.get(dim, 0) + 1
    return EnsembleReport(
        trials=trials,
        restarts=restarts,
        total_runs=total,
        vertex_trials=vertex_trials,
        vertex_fraction=vertex_trials / trials,
        run_vertex_fraction=vertex_runs / total,
        face_dimension_histogram=dict(sorted(histogram.items())),
        mean_iterations=iterations / total,
    )
