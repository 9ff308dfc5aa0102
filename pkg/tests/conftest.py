"""Shared fixtures and independent dense reference builders.

The dense builders assemble supra matrices directly from definitions with
plain numpy, so operator/eigensolver tests compare against arithmetic
that shares no code with the package internals.
"""

from pathlib import Path

import numpy as np
import pytest

from mpxmbo import MultiplexNetwork, Partition, compute_degrees, load_network

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


# ---------------------------------------------------------------- dense refs


def dense_supra(net):
    """Supra-adjacency: intra blocks plus omega-scaled identity couplings."""
    n, L = net.n, net.L
    a = np.zeros((n * L, n * L))
    for l in range(L):
        a[l * n : (l + 1) * n, l * n : (l + 1) * n] = net.intra[l].toarray()
    eye = np.eye(n)
    for p in range(L):
        for q in range(L):
            if p != q and net.coupling[p, q] != 0.0:
                a[p * n : (p + 1) * n, q * n : (q + 1) * n] += (
                    net.omega * net.coupling[p, q] * eye
                )
    return a


def dense_laplacian(net):
    a = dense_supra(net)
    return np.diag(a.sum(axis=1)) - a


def dense_balance(net, gamma):
    """Block-diagonal rank-1 balance matrix, (gamma_l/m_l) d_l d_l^T."""
    n, L = net.n, net.L
    k = np.zeros((n * L, n * L))
    for l in range(L):
        d = net.intra[l].toarray().sum(axis=1)
        s = d.sum()  # 2 m_l
        if s > 0:
            k[l * n : (l + 1) * n, l * n : (l + 1) * n] = (
                2.0 * gamma[l] / s
            ) * np.outer(d, d)
    return k


def dense_modularity(net, gamma):
    """Supra modularity matrix: intra null-model corrections, couplings kept."""
    m = dense_supra(net)
    n = net.n
    for l in range(net.L):
        d = net.intra[l].toarray().sum(axis=1)
        s = d.sum()
        if s > 0:
            m[l * n : (l + 1) * n, l * n : (l + 1) * n] -= (gamma[l] / s) * np.outer(d, d)
    return m


def dense_sigma(net, gamma):
    """Gershgorin-style bound used by the shifted operator."""
    a = dense_supra(net)
    supra_deg = a.sum(axis=1)
    parts = []
    for l in range(net.L):
        d = net.intra[l].toarray().sum(axis=1)
        parts.append(2.0 * supra_deg[l * net.n : (l + 1) * net.n] + 2.0 * gamma[l] * d)
    return float(np.max(np.concatenate(parts)))


def dense_modularity_value(partition, net, gamma):
    """Literal trace-form Q from the dense modularity matrix."""
    a = dense_modularity(net, gamma)
    u = partition.one_hot()
    two_mu = dense_supra(net).sum()
    return float(np.trace(u.T @ a @ u) / two_mu)


# ---------------------------------------------------------------- generators


def random_network(rng, n_max=20, l_max=3, omega_choices=(0.0, 0.5, 1.0), density=0.35):
    """Random weighted multiplex network with at least one intra edge."""
    n = int(rng.integers(3, n_max + 1))
    L = int(rng.integers(1, l_max + 1))
    layers = []
    for _ in range(L):
        a = np.zeros((n, n))
        iu, ju = np.triu_indices(n, 1)
        mask = rng.random(iu.size) < density
        a[iu[mask], ju[mask]] = np.round(rng.random(mask.sum()) * 4.0 + 0.25, 3)
        layers.append(a + a.T)
    if all(layer.sum() == 0.0 for layer in layers):
        layers[0][0, 1] = layers[0][1, 0] = 1.0
    omega = float(rng.choice(omega_choices)) if L > 1 else float(rng.choice((0.0, 1.0)))
    return MultiplexNetwork.from_dense_layers(layers, coupling=None, omega=omega)


def connected_network(rng, n, L, omega=1.0):
    """Every node gets intra edges in layer 1 (spanning cycle), so no
    physical node is isolated in all layers."""
    layers = []
    for l in range(L):
        a = np.zeros((n, n))
        if l == 0:
            for j in range(n):
                a[j, (j + 1) % n] = a[(j + 1) % n, j] = 1.0 + 0.1 * j
        iu, ju = np.triu_indices(n, 1)
        mask = rng.random(iu.size) < 0.25
        a[iu[mask], ju[mask]] += np.round(rng.random(mask.sum()) * 2.0 + 0.5, 3)
        layers.append(np.triu(a, 1) + np.triu(a, 1).T)
    return MultiplexNetwork.from_dense_layers(layers, coupling=None, omega=omega)


def isolate_node(net, node):
    """Copy of net with one physical node stripped of all intra edges."""
    layers = []
    for l in range(net.L):
        a = net.intra[l].toarray()
        a[node, :] = 0.0
        a[:, node] = 0.0
        layers.append(a)
    return MultiplexNetwork.from_dense_layers(layers, coupling=net.coupling, omega=net.omega)


def random_gamma(rng, L):
    return rng.uniform(0.3, 2.0, size=L)


def random_partition(rng, nL, n_c):
    return Partition(rng.integers(1, n_c + 1, size=nL).astype(np.int64), n_c)


# ------------------------------------------------------------------ fixtures


@pytest.fixture(scope="session")
def florentine():
    net = load_network(DATA_DIR / "florentine.mpx", omega=1.0)
    return net, compute_degrees(net)


@pytest.fixture(scope="session")
def two_triangles():
    net = load_network(DATA_DIR / "two_triangles.mpx", omega=0.0)
    return net, compute_degrees(net)


def florentine_best_assignment():
    """The modularity-optimal three-group split of the Florentine network:
    one business-marriage bloc, the Medici-centered remainder, and the
    two families without ties grouped separately."""
    bloc = np.array([4, 5, 7, 8, 11, 15]) - 1
    iso = np.array([12, 17]) - 1
    lab = np.full(34, 3, dtype=np.int64)
    for off in (0, 17):
        lab[off + bloc] = 2
        lab[off + iso] = 1
    return lab
