"""Figure rendering for the CLI report path.

Each helper writes one PNG next to the delimited output. Matplotlib runs
on the Agg backend so reports render in headless environments.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_energy_trace(trace, path):
    """Energy per accepted Frank-Wolfe step."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    if trace:
        energies = [e for e, _ in trace]
        ax.plot(range(1, len(energies) + 1), energies, marker="o", ms=3)
    ax.set_xlabel("accepted step")
    ax.set_ylabel("energy")
    ax.set_title("energy trace")
    return _finish(fig, path)


def plot_spectrum(eigenvalues, path, title="restricted spectrum"):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.hist(np.asarray(eigenvalues, dtype=float), bins=40, color="#4878a8")
    ax.axvline(0.0, color="k", lw=0.8)
    ax.set_xlabel("eigenvalue")
    ax.set_ylabel("count")
    ax.set_title(title)
    return _finish(fig, path)


def plot_bound_objective(eigenvalues, t_star, path):
    """Log Chernoff objective over the admissible t interval."""
    lam = np.asarray(eigenvalues, dtype=float)
    lam_max = lam.max()
    if lam_max <= 0:
        hi = 1.0
    else:
        hi = (1.0 - 1e-6) / (2.0 * lam_max)
    ts = np.linspace(hi * 1e-4, hi, 400)
    vals = [-0.5 * np.sum(np.log(1.0 - 2.0 * t * lam)) for t in ts]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(ts, vals)
    if t_star is not None and np.isfinite(t_star):
        ax.axvline(t_star, color="crimson", ls="--", lw=0.9, label="t*")
        ax.legend()
    ax.set_xlabel("t")
    ax.set_ylabel("log bound")
    ax.set_title("Chernoff objective")
    return _finish(fig, path)


def plot_face_histogram(histogram, vertex_fraction, path):
    """Face dimensions of non-vertex Frank-Wolfe limits."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    if histogram:
        dims = sorted(int(d) for d in histogram)
        counts = [histogram[d] if d in histogram else histogram[str(d)] for d in dims]
        ax.bar(dims, counts, color="#a85448")
        ax.set_xticks(dims)
    ax.set_xlabel("face dimension of non-vertex limits")
    ax.set_ylabel("count")
    ax.set_title(f"vertex fraction {vertex_fraction:.3f}")
    return _finish(fig, path)


def plot_dissimilarity(dissimilarity, path):
    fig, ax = plt.subplots(figsize=(4.6, 4.2))
    img = ax.imshow(dissimilarity.values, cmap="viridis")
    fig.colorbar(img, ax=ax, shrink=0.85)
    n = dissimilarity.n
    if n <= 20:
        ax.set_xticks(range(n))
        ax.set_yticks(range(n))
        ax.set_xticklabels(dissimilarity.labels, rotation=90, fontsize=6)
        ax.set_yticklabels(dissimilarity.labels, fontsize=6)
    ax.set_title("pairwise dissimilarity")
    return _finish(fig, path)


def plot_embedding(labels, coords, path):
    """Scatter of the first two embedding axes."""
    coords = np.asarray(coords, dtype=float)
    fig, ax = plt.subplots(figsize=(4.6, 4.2))
    xs = coords[:, 0]
    ys = coords[:, 1] if coords.shape[1] > 1 else np.zeros_like(xs)
    ax.scatter(xs, ys, s=18, color="#4878a8")
    for label, x, y in zip(labels, xs, ys):
        ax.annotate(label, (x, y), fontsize=6, xytext=(2, 2), textcoords="offset points")
    ax.set_xlabel("axis 1")
    ax.set_ylabel("axis 2")
    ax.set_title("embedding")
    ax.set_aspect("equal", adjustable="datalim")
    return _finish(fig, path)
