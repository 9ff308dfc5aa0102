"""Truncated eigendecompositions of symmetric operators.

`largest_eigenpairs` computes the k algebraically largest eigenpairs of a
symmetric LinearOperator.  Small operators (dim <= dense_cutoff) are
solved directly with a dense decomposition, which resolves repeated
eigenvalues exactly.  Larger ones use thick-restart Lanczos with full
reorthogonalization (two-pass Gram-Schmidt); the projected matrix is
filled from the actual Gram-Schmidt coefficients rather than assumed
tridiagonal, and after a restart the basis is compressed to the leading
Ritz vectors and the projection resumes from their diagonal block.

Convergence is always certified by explicit residual norms
``||A x - theta x|| <= tol * scale``, where ``scale`` is the larger of
``scale_floor`` and a spectral-radius estimate (the largest Ritz value
magnitude seen, which Lanczos only ever underestimates, so the check
errs strict); it is never inferred from the projected problem alone.  A
single Krylov sequence cannot split a repeated eigenvalue, so converged
residuals alone may silently return only one copy of a multiple
eigenvalue; the iteration therefore accepts a result only after a
re-expansion seeded with a fresh random direction reproduces the same
top-k Ritz values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import gamma_vector
from .operators import modularity_op, shifted_neg_lk_op

__all__ = [
    "SpectralBasis",
    "ConvergenceError",
    "largest_eigenpairs",
    "basis_for_method",
    "save_basis",
    "load_basis",
]

METHODS = ("mpbtv", "dgfm3")


class ConvergenceError(RuntimeError):
    """Eigensolver failed to reach the residual tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


@dataclass(frozen=True)
class SpectralBasis:
    """Truncated spectral decomposition of a symmetric operator.

    ``eigenvalues`` are sorted descending; ``eigenvectors`` has the
    matching orthonormal columns; ``residuals[i]`` is the verified norm
    ||A v_i - lambda_i v_i||.  ``shift`` records the spectral shift that
    was applied while solving (0 when none); stored eigenvalues are
    always un-shifted.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    operator_label: str
    shift: float = 0.0

    def __post_init__(self):
        if self.eigenvectors.ndim != 2 or self.eigenvalues.ndim != 1:
            raise ValueError("bad basis shapes")
        if self.eigenvectors.shape[1] != self.eigenvalues.size:
            raise ValueError("eigenvalue/eigenvector count mismatch")
        if np.any(np.diff(self.eigenvalues) > 0):
            raise ValueError("eigenvalues must be sorted descending")

    @property
    def k(self):
        return self.eigenvalues.size

    @property
    def dim(self):
        return self.eigenvectors.shape[0]

    def truncate(self, k):
        """Keep the leading k columns."""
        if not 1 <= k <= self.k:
            raise ValueError(f"cannot truncate basis of size {self.k} to {k}")
        return SpectralBasis(
            self.eigenvalues[:k].copy(),
            self.eigenvectors[:, :k].copy(),
            self.residuals[:k].copy(),
            self.operator_label,
            self.shift,
        )


def _orthonormal_random(basis, ncols, rng, dim):
    """Draw a random vector orthonormal to the first ncols basis columns."""
    for _ in range(5):
        w = rng.standard_normal(dim)
        for _ in range(2):
            w -= basis[:, :ncols] @ (basis[:, :ncols].T @ w)
        nrm = np.linalg.norm(w)
        if nrm > 1e-8 * math.sqrt(dim):
            return w / nrm
    return None


def _dense_eigenpairs(op, k, tol, scale_floor):
    """Direct dense solve used below the size cutoff.

    Resolves repeated eigenvalues exactly, which a single Krylov
    sequence cannot, and keeps structurally-zero eigenvector entries at
    machine-epsilon size.
    """
    a = op.to_dense()
    vals, vecs = np.linalg.eigh(a)
    theta = np.ascontiguousarray(vals[::-1][:k])
    ritz = np.ascontiguousarray(vecs[:, ::-1][:, :k])
    resid = np.linalg.norm(a @ ritz - ritz * theta, axis=0)
    scale = max(float(np.abs(vals).max()), scale_floor, np.finfo(float).tiny)
    if not np.all(resid <= tol * scale):
        raise ConvergenceError("dense eigendecomposition failed the residual check", resid)
    return SpectralBasis(theta, ritz, resid, op.label)


def largest_eigenpairs(
    op,
    k,
    tol=1e-8,
    max_restarts=500,
    rng_seed=0,
    subspace_factor=2.0,
    scale_floor=0.0,
    dense_cutoff=600,
):
    """Compute the k largest eigenpairs of a symmetric operator.

    Parameters
    ----------
    op : LinearOperator
        Must be symmetric; only ``apply`` is used (plus ``to_dense`` on
        the dense path).
    k : int
        Number of requested eigenpairs, 1 <= k < op.dim.
    tol : float
        Relative residual tolerance.
    max_restarts : int
        Restart budget before giving up.
    rng_seed : int
        Seed for the start vector (and any breakdown replacements), making
        the computation deterministic.
    subspace_factor : float
        Working subspace size m = min(dim, max(ceil(factor * k), k + 15)).
    scale_floor : float
        Lower bound for the residual scale; pass the spectral shift when
        solving a shifted problem.
    dense_cutoff : int
        Problems with op.dim <= dense_cutoff are solved densely; pass 0
        to force the iterative path.

    Returns
    -------
    SpectralBasis

    Raises
    ------
    ValueError
        If k is out of range.
    ConvergenceError
        If residuals fail to reach tol * scale within the restart budget.
    """
    dim = op.dim
    if not 1 <= k < dim:
        raise ValueError(f"need 1 <= k < dim, got k={k}, dim={dim}")
    if dim <= dense_cutoff:
        return _dense_eigenpairs(op, k, tol, scale_floor)
    m = min(dim, max(int(math.ceil(subspace_factor * k)), k + 15))
    rng = np.random.default_rng(rng_seed)
    V = np.zeros((dim, m + 1))
    H = np.zeros((m, m))
    v0 = rng.standard_normal(dim)
    V[:, 0] = v0 / np.linalg.norm(v0)
    completed = 0  # projection columns finished so far
    nb = 1  # orthonormal basis vectors currently held
    best_resid = None
    prev_theta = None  # converged Ritz values awaiting re-expansion check
    force_random = False
    for _ in range(max_restarts):
        while completed < m:
            j = completed
            w = op.apply(V[:, j])
            c = V[:, :nb].T @ w
            w -= V[:, :nb] @ c
            c2 = V[:, :nb].T @ w
            w -= V[:, :nb] @ c2
            c += c2
            H[:nb, j] = c[:nb]
            H[j, :nb] = c[:nb]
            beta = np.linalg.norm(w)
            completed = j + 1
            if completed == m:
                V[:, m] = w / beta if beta > 0 else 0.0
                break
            floor = 1e-13 * max(abs(H[j, j]), scale_floor, 1.0)
            if beta > floor:
                V[:, completed] = w / beta
                H[completed, j] = beta
                H[j, completed] = beta
            else:
                # invariant subspace hit: continue in a fresh direction
                repl = _orthonormal_random(V, completed, rng, dim)
                if repl is None:
                    break
                V[:, completed] = repl
            nb = completed + 1
        ncols = completed
        theta, s = np.linalg.eigh(H[:ncols, :ncols])
        theta = theta[::-1]
        s = s[:, ::-1]
        ritz = V[:, :ncols] @ s[:, :k]
        av = op.apply(ritz)
        resid = np.linalg.norm(av - ritz * theta[:k], axis=0)
        best_resid = resid
        scale = max(abs(theta[0]), abs(theta[-1]), scale_floor, np.finfo(float).tiny)
        if np.all(resid <= tol * scale):
            vtol = max(10.0 * tol, 1e-10) * scale
            if prev_theta is not None and np.all(np.abs(theta[:k] - prev_theta) <= vtol):
                return SpectralBasis(theta[:k].copy(), ritz, resid, op.label)
            # a converged set can still lack a copy of a repeated
            # eigenvalue; re-expand from a random direction and accept
            # only when the Ritz values come back unchanged
            prev_theta = theta[:k].copy()
            force_random = True
        # thick restart: compress to the leading Ritz vectors and resume
        keep = min(k + 8, ncols - 1) if ncols > 1 else 1
        V[:, :keep] = V[:, :ncols] @ s[:, :keep]
        H[:, :] = 0.0
        H[np.arange(keep), np.arange(keep)] = theta[:keep]
        nrm = 0.0
        if not force_random:
            # continue from the worst monitored pair's residual vector:
            # it is Galerkin-orthogonal to the kept Ritz vectors and
            # extends the space exactly where convergence lags
            worst = int(np.argmax(resid))
            nxt = av[:, worst] - theta[worst] * ritz[:, worst]
            nrm = np.linalg.norm(nxt)
            if nrm <= 1e-13 * scale:
                nxt = V[:, m]
                nrm = np.linalg.norm(nxt)
            if nrm > 1e-13:
                nxt = nxt / nrm
                nxt -= V[:, :keep] @ (V[:, :keep].T @ nxt)
                nrm = np.linalg.norm(nxt)
        if nrm > 1e-8:
            V[:, keep] = nxt / nrm
        else:
            repl = _orthonormal_random(V, keep, rng, dim)
            if repl is None:
                raise ConvergenceError("cannot extend basis", best_resid)
            V[:, keep] = repl
        force_random = False
        completed = keep
        nb = keep + 1
    raise ConvergenceError(
        f"no convergence after {max_restarts} restarts; "
        f"worst residual {float(best_resid.max()):.3e}",
        best_resid,
    )


def basis_for_method(method, net, deg, gamma, k, tol=1e-8, rng_seed=0, subspace_factor=2.0):
    """Build the spectral basis a detection method diffuses in.

    ``mpbtv`` uses the k least-negative eigenpairs of minus (Laplacian +
    balance), computed through the positive-shifted operator and stored
    un-shifted (all eigenvalues <= 0).  ``dgfm3`` uses the k largest
    eigenpairs of the modularity operator.

    Parameters
    ----------
    method : str
        "mpbtv" or "dgfm3".
    net, deg : MultiplexNetwork, DegreeData
    gamma : float or sequence
        Per-layer resolution parameters.
    k : int
        Basis size, 1 <= k < nL.

    Returns
    -------
    SpectralBasis
    """
    gamma = gamma_vector(gamma, net.L)
    if method == "mpbtv":
        op, sigma = shifted_neg_lk_op(net, deg, gamma)
        raw = largest_eigenpairs(
            op, k, tol=tol, rng_seed=rng_seed, subspace_factor=subspace_factor, scale_floor=sigma
        )
        return SpectralBasis(
            raw.eigenvalues - sigma, raw.eigenvectors, raw.residuals, op.label, shift=sigma
        )
    if method == "dgfm3":
        op = modularity_op(net, deg, gamma)
        return largest_eigenpairs(
            op, k, tol=tol, rng_seed=rng_seed, subspace_factor=subspace_factor
        )
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def save_basis(basis, path, meta=None):
    """Cache a basis to an .npz file, with optional metadata strings."""
    meta = meta or {}
    items = {f"meta_{key}": np.str_(str(val)) for key, val in meta.items()}
    np.savez(
        path,
        eigenvalues=basis.eigenvalues,
        eigenvectors=basis.eigenvectors,
        residuals=basis.residuals,
        operator_label=np.str_(basis.operator_label),
        shift=np.float64(basis.shift),
        **items,
    )


def load_basis(path):
    """Load a cached basis; returns (SpectralBasis, metadata dict)."""
    with np.load(path) as npz:
        basis = SpectralBasis(
            npz["eigenvalues"],
            npz["eigenvectors"],
            npz["residuals"],
            str(npz["operator_label"]),
            float(npz["shift"]),
        )
        meta = {key[5:]: str(npz[key]) for key in npz.files if key.startswith("meta_")}
    return basis, meta
