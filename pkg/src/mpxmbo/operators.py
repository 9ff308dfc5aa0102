"""Matrix-free linear operators on the supra (node-layer) space.

All operators act on vectors of length nL indexed layer-major: entry
(l-1)*n + j is node j in layer l.  None of them assemble an nL x nL
matrix; layer blocks use the sparse intra-layer matvec and the coupling
part reshapes to (L, n) and multiplies by the small L x L coupling
matrix.
"""

from __future__ import annotations

import numpy as np

from .network import gamma_vector

__all__ = [
    "LinearOperator",
    "supra_adjacency_op",
    "supra_laplacian_op",
    "balance_op",
    "modularity_op",
    "shifted_neg_lk_op",
]


class LinearOperator:
    """Symmetric operator given by a matvec closure."""

    __slots__ = ("dim", "label", "_matvec")

    def __init__(self, dim, matvec, label):
        self.dim = int(dim)
        self.label = label
        self._matvec = matvec

    def apply(self, x):
        """Apply to a vector (nL,) or to the columns of a matrix (nL, m)."""
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.shape[0] != self.dim:
            raise ValueError(f"operand has leading dimension {x.shape[0]}, expected {self.dim}")
        if x.ndim == 1:
            return self._matvec(x)
        if x.ndim != 2:
            raise ValueError("operand must be 1-D or 2-D")
        out = np.empty_like(x)
        for j in range(x.shape[1]):
            out[:, j] = self._matvec(np.ascontiguousarray(x[:, j]))
        return out

    def to_dense(self):
        """Materialize by applying to the identity (small problems, tests)."""
        return self.apply(np.eye(self.dim))


def supra_adjacency_op(net):
    """blkdiag of the intra-layer matrices plus omega-scaled coupling.

    The coupling contributes omega * C[k, l] between copies of the same
    physical node in layers k and l.
    """
    n, L, omega = net.n, net.L, net.omega
    coupling = net.coupling
    intra = net.intra

    def mv(x):
        xl = x.reshape(L, n)
        y = np.empty_like(x)
        yl = y.reshape(L, n)
        for l in range(L):
            yl[l] = intra[l].matvec(xl[l])
        if omega != 0.0 and L > 1:
            yl += omega * (coupling @ xl)
        return y

    return LinearOperator(n * L, mv, "supra_adjacency")


def supra_laplacian_op(net, deg):
    """diag(supra degrees) minus the supra-adjacency."""
    adj = supra_adjacency_op(net)
    d = deg.supra_degrees

    def mv(x):
        return d * x - adj.apply(x)

    return LinearOperator(net.nL, mv, "supra_laplacian")


def balance_op(deg, gamma):
    """Block-diagonal rank-one balance terms (gamma_l / m_l) d_l d_l^T.

    Layers with zero strength contribute nothing.  With m_l denoting half
    the layer strength, the coefficient is 2 * gamma_l / strength_l.
    """
    L, n = deg.intra_degrees.shape
    gamma = gamma_vector(gamma, L)
    coef = np.zeros(L)
    nz = deg.layer_strengths > 0
    coef[nz] = 2.0 * gamma[nz] / deg.layer_strengths[nz]
    dl = deg.intra_degrees

    def mv(x):
        xl = x.reshape(L, n)
        inner = np.einsum("ln,ln->l", dl, xl)
        y = (coef * inner)[:, None] * dl
        return y.reshape(-1)

    return LinearOperator(n * L, mv, "balance")


def modularity_op(net, deg, gamma):
    """Supra modularity operator: adjacency minus per-layer null model.

    Diagonal blocks are A_l - (gamma_l / strength_l) d_l d_l^T, and the
    off-diagonal blocks are the omega-scaled coupling, identical to the
    supra-adjacency there.
    """
    L, n = net.L, net.n
    gamma = gamma_vector(gamma, L)
    adj = supra_adjacency_op(net)
    coef = np.zeros(L)
    nz = deg.layer_strengths > 0
    coef[nz] = gamma[nz] / deg.layer_strengths[nz]
    dl = deg.intra_degrees

    def mv(x):
        y = adj.apply(x)
        xl = x.reshape(L, n)
        yl = y.reshape(L, n)
        inner = np.einsum("ln,ln->l", dl, xl)
        yl -= (coef * inner)[:, None] * dl
        return y

    return LinearOperator(net.nL, mv, "modularity")


def shifted_neg_lk_op(net, deg, gamma):
    """Return (sigma*I - (Laplacian + balance), sigma) with sigma >= lambda_max.

    The shift is the largest row-sum bound over the supra rows,
    2 * supra_degree + 2 * gamma_l * intra_degree, which dominates the
    spectrum of Laplacian + balance; the shifted operator is therefore
    positive semi-definite and its top eigenvectors are the bottom ones
    of Laplacian + balance.
    """
    L, n = net.L, net.n
    gamma = gamma_vector(gamma, L)
    lap = supra_laplacian_op(net, deg)
    bal = balance_op(deg, gamma)
    bound = 2.0 * deg.supra_degrees + 2.0 * np.repeat(gamma, n) * deg.intra_degrees.ravel()
    sigma = float(bound.max())

    def mv(x):
        return sigma * x - lap.apply(x) - bal.apply(x)

    return LinearOperator(net.nL, mv, "shifted_neg_lk"), sigma
