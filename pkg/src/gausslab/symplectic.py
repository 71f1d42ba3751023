"""Symplectic linear algebra for bosonic Gaussian states.

Conventions used throughout the package:

* mode ordering is interleaved, xi = (q1, p1, ..., qN, pN);
* the symplectic form Omega is the direct sum of N blocks [[0, 1], [-1, 0]];
* the vacuum covariance matrix is the identity, so a thermal single mode
  has covariance lam * I2 with lam = 2*nbar + 1 >= 1.

A covariance matrix C describes a pure state iff (C Omega)^2 = -I, which is
equivalent to C = S S^T for some symplectic S (S Omega S^T = Omega).  Two
symplectic matrices give the same covariance exactly when they differ by a
right factor u with u u^T = I (the "gauge" freedom).
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

SYMPLECTIC_TOL = 1e-10
PURITY_TOL = 1e-8


def build_omega(n_modes: int) -> np.ndarray:
    """Canonical symplectic form, direct sum of [[0, 1], [-1, 0]] blocks."""
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")
    om = np.zeros((2 * n_modes, 2 * n_modes))
    for i in range(n_modes):
        om[2 * i, 2 * i + 1] = 1.0
        om[2 * i + 1, 2 * i] = -1.0
    return om


def _check_even_square(mat: np.ndarray, name: str = "matrix") -> int:
    """Return the mode count of a 2N x 2N matrix, raising on bad shape."""
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{name} must be square, got shape {mat.shape}")
    if mat.shape[0] % 2 != 0:
        raise ValueError(f"{name} must have even dimension, got {mat.shape[0]}")
    return mat.shape[0] // 2


def symplectic_residual(s: np.ndarray) -> float:
    """Max-abs entry of S Omega S^T - Omega."""
    n = _check_even_square(s, "S")
    om = build_omega(n)
    return float(np.max(np.abs(s @ om @ s.T - om)))


def is_symplectic(s: np.ndarray, tol: float = SYMPLECTIC_TOL) -> bool:
    return symplectic_residual(s) <= tol


def purity_residual(c: np.ndarray) -> float:
    """Max-abs entry of (C Omega)^2 + I; zero exactly for pure states."""
    n = _check_even_square(c, "C")
    om = build_omega(n)
    co = c @ om
    return float(np.max(np.abs(co @ co + np.eye(2 * n))))


def is_pure(c: np.ndarray, tol: float = PURITY_TOL) -> bool:
    return purity_residual(c) <= tol


def covariance_from_symplectic(
    s: np.ndarray, validate: bool = True, tol: float = SYMPLECTIC_TOL
) -> np.ndarray:
    """Pure-state covariance C = S S^T (symmetrized against roundoff)."""
    if validate and not is_symplectic(s, tol):
        raise ValueError(
            f"input is not symplectic within {tol:g} "
            f"(residual {symplectic_residual(s):.3e})"
        )
    c = s @ s.T
    return 0.5 * (c + c.T)


def subset_indices(modes: Sequence[int], n_modes: int) -> np.ndarray:
    """Interleaved (q, p) row/column indices of the given modes."""
    modes = list(modes)
    if len(modes) == 0:
        raise ValueError("mode subset must not be empty")
    if any(m < 0 or m >= n_modes for m in modes):
        raise ValueError(f"mode indices must lie in [0, {n_modes}), got {modes}")
    if any(b <= a for a, b in zip(modes, modes[1:])):
        raise ValueError(f"mode indices must be strictly increasing, got {modes}")
    idx = np.empty(2 * len(modes), dtype=int)
    for k, m in enumerate(modes):
        idx[2 * k] = 2 * m
        idx[2 * k + 1] = 2 * m + 1
    return idx


def restrict(c: np.ndarray, modes: Sequence[int]) -> np.ndarray:
    """Restriction of a covariance matrix to a subset of modes.

    Keeps the 2x2 blocks (rows and columns) of the selected modes, in the
    given order.  The result is the covariance matrix of the reduced state.
    """
    n = _check_even_square(c, "C")
    idx = subset_indices(modes, n)
    return np.array(c[np.ix_(idx, idx)])


def symplectic_spectrum(c: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues of a positive definite covariance matrix.

    The eigenvalues of Omega C come in pairs +/- i*nu with nu > 0; each nu is
    reported once, in descending order.  For a single mode this reduces to
    sqrt(det C), which is used directly.  Physical states have nu_k >= 1,
    pure states have all nu_k = 1.
    """
    n = _check_even_square(c, "C")
    c = np.asarray(c, dtype=float)
    if np.max(np.abs(c - c.T)) > 1e-10 * max(1.0, np.max(np.abs(c))):
        raise np.linalg.LinAlgError("covariance matrix is not symmetric")
    if np.min(np.linalg.eigvalsh(0.5 * (c + c.T))) <= 0.0:
        raise np.linalg.LinAlgError("covariance matrix is not positive definite")
    if n == 1:
        return np.array([np.sqrt(np.linalg.det(c))])
    om = build_omega(n)
    moduli = np.sort(np.abs(np.linalg.eigvals(om @ c)))[::-1]
    # eigenvalues come in +/- i*nu pairs; keep one representative per pair
    return moduli[::2].copy()


def state_hamiltonian(c_block: np.ndarray) -> np.ndarray:
    """Quadratic Hamiltonian matrix q of a strictly mixed one-mode state.

    Returns the symmetric 2x2 matrix q such that rho ~ exp(-xi^T q xi)
    reproduces the covariance c_block.  In closed form q = nu * arccoth(nu)
    * c_block^{-1} with nu = sqrt(det c_block); the arccot branch is fixed so
    that q is positive definite for nu > 1 (thermal states have positive
    Hamiltonians), which is validated by the Fock-space roundtrip test.

    Diverges as nu -> 1 (pure marginal); inputs with nu <= 1 + 1e-8 are
    rejected and must be special-cased by the caller.
    """
    c_block = np.asarray(c_block, dtype=float)
    if c_block.shape != (2, 2):
        raise ValueError(f"expected a one-mode 2x2 covariance, got {c_block.shape}")
    if np.abs(c_block[0, 1] - c_block[1, 0]) > 1e-12 * max(1.0, np.max(np.abs(c_block))):
        raise ValueError("covariance block must be symmetric")
    nu = float(np.sqrt(np.linalg.det(c_block)))
    if nu <= 1.0 + 1e-8:
        raise ValueError(
            f"state Hamiltonian diverges for nu <= 1 (pure marginal); got nu = {nu!r}"
        )
    beta = nu * 0.5 * np.log((nu + 1.0) / (nu - 1.0))
    q = beta * np.linalg.inv(c_block)
    return 0.5 * (q + q.T)


def _haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    ph = np.diag(r)
    return q * (ph / np.abs(ph)).conj()


def _grouped_to_interleaved(n_modes: int) -> np.ndarray:
    """Index array mapping (q1..qN, p1..pN) blocks to interleaved ordering."""
    idx = np.empty(2 * n_modes, dtype=int)
    idx[0::2] = np.arange(n_modes)
    idx[1::2] = np.arange(n_modes) + n_modes
    return idx


def random_symplectic_orthogonal(
    n_modes: int, rng: np.random.Generator | int | None = None
) -> np.ndarray:
    """Haar-random element of Sp(2N, R) intersected with O(2N).

    These are the passive (number-conserving) transformations, isomorphic to
    U(N): the unitary u = X + iY embeds as [[X, -Y], [Y, X]] in grouped
    (qq|pp) ordering, then gets permuted to the interleaved convention.
    """
    rng = np.random.default_rng(rng)
    u = _haar_unitary(n_modes, rng)
    x, y = np.real(u), np.imag(u)
    grouped = np.block([[x, -y], [y, x]])
    idx = _grouped_to_interleaved(n_modes)
    return grouped[np.ix_(idx, idx)]


def random_symplectic(
    n_modes: int,
    squeeze_bound: float = 1.0,
    seed: np.random.Generator | int | None = None,
) -> np.ndarray:
    """Random symplectic matrix from a passive-squeeze-passive factorization.

    S = O1 Z O2 with O1, O2 Haar-random symplectic orthogonals and Z a
    diagonal squeezer diag(e^{r_1}, e^{-r_1}, ...) with r_i uniform in
    [-squeeze_bound, squeeze_bound].  Deterministic for a fixed seed.
    """
    if squeeze_bound < 0:
        raise ValueError("squeeze_bound must be >= 0")
    rng = np.random.default_rng(seed)
    o1 = random_symplectic_orthogonal(n_modes, rng)
    o2 = random_symplectic_orthogonal(n_modes, rng)
    r = rng.uniform(-squeeze_bound, squeeze_bound, size=n_modes)
    z = np.zeros(2 * n_modes)
    z[0::2] = np.exp(r)
    z[1::2] = np.exp(-r)
    return o1 @ np.diag(z) @ o2


def two_mode_squeezer(r: float) -> np.ndarray:
    """Symplectic matrix of a two-mode squeezer in interleaved ordering.

    Applied to the vacuum it produces the standard two-mode squeezed state:
    both single-mode blocks of S S^T equal cosh(2r) * I2 and the cross block
    is sinh(2r) * diag(1, -1).
    """
    ch, sh = np.cosh(r), np.sinh(r)
    return np.array(
        [
            [ch, 0.0, sh, 0.0],
            [0.0, ch, 0.0, -sh],
            [sh, 0.0, ch, 0.0],
            [0.0, -sh, 0.0, ch],
        ]
    )


def embedded_two_mode_squeezer(n_modes: int, i: int, j: int, r: float) -> np.ndarray:
    """Two-mode squeezer acting on modes (i, j) of an N-mode system."""
    if i == j:
        raise ValueError("two-mode squeezer needs two distinct modes")
    s4 = two_mode_squeezer(r)
    s = np.eye(2 * n_modes)
    idx = np.array([2 * i, 2 * i + 1, 2 * j, 2 * j + 1])
    s[np.ix_(idx, idx)] = s4
    return s
