"""Samplers and exact laws for site percolation and divide-and-color."""
from __future__ import annotations

import itertools

import numpy as np

from ..planar.graph import Graph
from ..rng import make_rng
from .configs import ExactMeasure, Partition, SiteConfig
from .kernels import component_labels


def _check_p(p):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")


def bernoulli_sites(host: Graph, p: float, seed) -> SiteConfig:
    _check_p(p)
    rng = make_rng(seed)
    return SiteConfig(host, (rng.random(len(host.vertices)) < p).astype(np.uint8))


def bernoulli_batch(n_vertices: int, p: float, N: int, seed) -> np.ndarray:
    """``N`` independent Bernoulli(p) site configurations as an (N, V) uint8 array."""
    _check_p(p)
    rng = make_rng(seed)
    return (rng.random((N, n_vertices)) < p).astype(np.uint8)


def clusters(cfg: SiteConfig, state: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Cluster labels (``-1`` off-state) and cluster sizes."""
    indptr, indices = cfg.host.csr()
    labels = component_labels(indptr, indices, cfg.bits == state)
    n = int(labels.max()) + 1 if labels.size else 0
    sizes = np.bincount(labels[labels >= 0], minlength=n)
    return labels, sizes


def divide_and_color(P: Partition, p: float, seed) -> SiteConfig:
    """Colour each class of ``P`` open with probability ``p``, independently.

    One uniform per class, drawn in order of first occurrence.
    """
    _check_p(p)
    rng = make_rng(seed)
    classes = P.classes()
    u = rng.random(len(classes))
    bits = np.zeros(len(P.labels), dtype=np.uint8)
    for c, members in enumerate(classes):
        if u[c] < p:
            bits[members] = 1
    return SiteConfig(P.host, bits)


def monotone_coupling(host: Graph, p: float, seed) -> tuple[SiteConfig, SiteConfig]:
    """Shared-uniform coupling of Bernoulli(p) below Bernoulli(1-p)."""
    _check_p(p)
    if p > 0.5:
        raise ValueError("monotone coupling needs p <= 1/2")
    u = make_rng(seed).random(len(host.vertices))
    sigma = SiteConfig(host, (u < p).astype(np.uint8))
    tau = SiteConfig(host, (u < 1 - p).astype(np.uint8))
    return sigma, tau


def bernoulli_law(m: int, p) -> ExactMeasure:
    """Product law on {0,1}^m; ``p`` is a scalar or one probability per site."""
    ps = np.broadcast_to(np.asarray(p, dtype=float), (m,))
    configs = list(itertools.product((0, 1), repeat=m))
    probs = [float(np.prod([ps[i] if b else 1 - ps[i] for i, b in enumerate(c)])) for c in configs]
    return ExactMeasure(configs, probs)


def divide_and_color_law(P: Partition, p: float) -> ExactMeasure:
    """Exact law of ``divide_and_color`` by enumerating class colourings."""
    _check_p(p)
    classes = P.classes()
    m = len(P.labels)
    acc = {c: 0.0 for c in itertools.product((0, 1), repeat=m)}
    for colours in itertools.product((0, 1), repeat=len(classes)):
        bits = [0] * m
        for col, members in zip(colours, classes):
            for i in members:
                bits[i] = col
        k = sum(colours)
        acc[tuple(bits)] += p ** k * (1 - p) ** (len(classes) - k)
    configs = list(acc)
    return ExactMeasure(configs, [acc[c] for c in configs])


def site_law_from_samples(samples: np.ndarray) -> ExactMeasure:
    """Empirical law of a (N, m) 0/1 sample array, over all of {0,1}^m."""
    N, m = samples.shape
    codes = samples.astype(np.int64) @ (1 << np.arange(m))
    counts = np.bincount(codes, minlength=1 << m)
    configs = [tuple((c >> i) & 1 for i in range(m)) for c in range(1 << m)]
    return ExactMeasure(configs, counts / N, atol=1e-9)
