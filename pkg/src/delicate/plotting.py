"""Figures written next to the tabular reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# no timestamps or version strings, so reruns give identical files
_METADATA = {"Software": None}


def _figure(width: float = 6.0):
    golden = (5**0.5 - 1) / 2
    fig, ax = plt.subplots(figsize=(width, width * golden))
    ax.grid(alpha=0.3)
    return fig, ax


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_METADATA)
    plt.close(fig)


def plot_density(rows, path) -> None:
    """rows: (N, Q_N, K_N, ratio) tuples."""
    fig, ax = _figure()
    Ns = [r[0] for r in rows]
    ax.plot(Ns, [r[3] for r in rows], "o-", label=r"$K_N \ln N / N$")
    ax.plot(Ns, [r[1] and r[2] / r[1] for r in rows], "s--", label=r"$K_N / Q_N$")
    ax.set_xscale("log")
    ax.set_xlabel("N")
    ax.legend()
    _save(fig, path)


def plot_series(estimates, path) -> None:
    fig, ax = _figure()
    Xs = [e.X for e in estimates]
    ax.plot(Xs, [float(e.partial_sum) for e in estimates], "o-", label="partial sum")
    ax.set_xscale("log")
    ax.set_xlabel("X")
    ax2 = ax.twinx()
    ax2.plot(Xs, [float(e.last_block_increment) for e in estimates], "s--", color="C1", label="block (X/2, X]")
    ax2.set_yscale("log")
    ax.legend(loc="upper left")
    ax2.legend(loc="lower right")
    _save(fig, path)


def plot_sieve_ratio(points, path) -> None:
    fig, ax = _figure()
    xs = [p.x for p in points]
    ax.plot(xs, [p.ratio for p in points], "o-")
    ax.axhspan(0.5, 3.0, alpha=0.1, color="C2")
    ax.set_xscale("log")
    ax.set_xlabel("x")
    ax.set_ylabel("normalized / product factor")
    _save(fig, path)


def plot_coverage(audits, path) -> None:
    fig, ax = _figure()
    used = [au for au in audits if au.primes]
    labels = [f"{au.family[:3]}" for au in used]
    n = range(len(used))
    ax.bar([i - 0.2 for i in n], [au.uncovered / (au.i_max + 1) for au in used], 0.4, label="observed")
    ax.bar([i + 0.2 for i in n], [float(au.predicted_bound) / (au.i_max + 1) for au in used], 0.4, label="product bound")
    ax.set_xticks(list(n), labels, rotation=60, fontsize=7)
    ax.set_ylabel("uncovered fraction")
    ax.legend()
    _save(fig, path)
