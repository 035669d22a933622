"""Seeded synthetic interaction graphs (stand-ins for real social networks)."""

from __future__ import annotations

import networkx as nx
import numpy as np
import scipy.sparse as sp

from ..errors import ConfigurationError
from .config import GraphSpec


def make_graph(spec: GraphSpec, n_units: int, rng: np.random.Generator) -> sp.csr_matrix:
    """Symmetric 0/1 adjacency matrix without self loops."""
    if not 1 <= spec.mean_degree < n_units:
        raise ConfigurationError(f"mean degree {spec.mean_degree} must lie in [1, {n_units})")
    seed = int(rng.integers(2**31 - 1))
    if spec.generator == "preferential_attachment":
        m = max(1, int(round(spec.mean_degree / 2)))
        m = min(m, n_units - 1)
        G = nx.barabasi_albert_graph(n_units, m, seed=seed)
    elif spec.generator == "configuration_model":
        degrees = rng.poisson(spec.mean_degree, size=n_units)
        degrees = np.clip(degrees, 1, n_units - 1)
        if degrees.sum() % 2:
            degrees[int(rng.integers(n_units))] += 1
        G = nx.Graph(nx.configuration_model(degrees.tolist(), seed=seed))
        G.remove_edges_from(nx.selfloop_edges(G))
    else:
        k = int(round(spec.mean_degree))
        if (k * n_units) % 2:
            k += 1
        if k >= n_units:
            raise ConfigurationError(f"cannot build a {k}-regular graph on {n_units} nodes")
        G = nx.random_regular_graph(k, n_units, seed=seed)
    A = nx.to_scipy_sparse_array(G, nodelist=range(n_units), format="csr", dtype=np.float64)
    return sp.csr_matrix(A)


def row_normalize(A: sp.csr_matrix) -> sp.csr_matrix:
    """Row-stochastic version of ``A``; all-zero rows stay zero."""
    deg = np.asarray(A.sum(axis=1)).ravel()
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    return sp.csr_matrix(sp.diags(inv) @ A)
