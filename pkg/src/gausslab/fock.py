"""Brute-force oracle in truncated Fock space.

Everything here is deliberately independent of the closed-form machinery:
density matrices are finite-dimensional arrays, traces of powers are matrix
powers, displacement operators are matrix exponentials, and phase-space
integrals are tensor-grid quadratures.  Only states with a controlled
geometric tail are representable, so every constructor documents (and
enforces) its truncation bound.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from .symplectic import build_omega

# hard cap on the Fock cutoff; states needing more are rejected
CUTOFF_CAP = 2000


def required_cutoff(lam: float, tail: float = 1e-12, cap: int = CUTOFF_CAP) -> int:
    """Smallest cutoff with geometric tail q^(cutoff+1) < tail, q = (lam-1)/(lam+1)."""
    if lam < 1.0:
        raise ValueError(f"marginal eigenvalue must be >= 1, got {lam}")
    q = (lam - 1.0) / (lam + 1.0)
    if q == 0.0:
        return 2
    need = int(math.ceil(math.log(tail) / math.log(q))) + 1
    if need > cap:
        raise ValueError(
            f"lam = {lam} needs cutoff {need} > cap {cap}; state too hot to truncate"
        )
    return max(need, 2)


def thermal_state(lam: float, cutoff: int | None = None) -> np.ndarray:
    """Thermal one-mode density matrix with covariance lam * I2.

    Diagonal in the number basis, (1-q) q^n with q = (lam-1)/(lam+1),
    renormalized over the truncated space.  Rejects cutoffs below the
    tail bound of required_cutoff with a hint.
    """
    need = required_cutoff(lam)
    if cutoff is None:
        cutoff = need
    elif cutoff < need:
        raise ValueError(f"cutoff {cutoff} too small for lam = {lam}; need >= {need}")
    q = (lam - 1.0) / (lam + 1.0)
    n = np.arange(cutoff + 1)
    probs = (1.0 - q) * q**n if q > 0 else np.where(n == 0, 1.0, 0.0)
    probs = probs / probs.sum()
    return np.diag(probs).astype(complex)


def trace_power(rho: np.ndarray, x: int) -> float:
    """Tr rho^x by direct matrix power."""
    if x < 2 or x != int(x):
        raise ValueError(f"power must be an integer >= 2, got {x}")
    return float(np.trace(np.linalg.matrix_power(rho, x)).real)


def destroy(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1)), k=1).astype(complex)


def quadrature_ops(cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """Position and momentum matrices, q = (a + a+)/sqrt(2), p = -i(a - a+)/sqrt(2)."""
    a = destroy(cutoff)
    q = (a + a.conj().T) / math.sqrt(2.0)
    p = -1j * (a - a.conj().T) / math.sqrt(2.0)
    return q, p


def _mode_ops(cutoff: int, n_modes: int) -> list[np.ndarray]:
    """Interleaved quadrature operators (q1, p1, ..., qm, pm) on the product space."""
    if n_modes not in (1, 2):
        raise ValueError("Fock oracle supports 1 or 2 modes only")
    q, p = quadrature_ops(cutoff)
    eye = np.eye(cutoff + 1, dtype=complex)
    if n_modes == 1:
        return [q, p]
    return [np.kron(q, eye), np.kron(p, eye), np.kron(eye, q), np.kron(eye, p)]


def _expm_skew(h: np.ndarray) -> np.ndarray:
    """exp(-i h) for Hermitian h, via eigendecomposition."""
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * vals)) @ vecs.conj().T


def displacement(r, cutoff: int) -> np.ndarray:
    """Displacement operator D_r = exp(-i r^T Omega xi) on 1 or 2 modes.

    Unitary up to truncation error; satisfies the product relation
    D_r D_r' = exp(i/2 r^T Omega r') D_{r+r'} to a cutoff-dependent
    tolerance.  Warns when the displacement is large relative to the cutoff
    (mean photon number |r|^2/2 beyond about a quarter of the cutoff).
    """
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or len(r) not in (2, 4):
        raise ValueError(f"r must have length 2 or 4, got shape {r.shape}")
    n_modes = len(r) // 2
    if np.dot(r, r) / 2.0 > 0.25 * cutoff:
        warnings.warn(
            f"displacement |r|^2/2 = {np.dot(r, r) / 2.0:.1f} is large for "
            f"cutoff {cutoff}; expect truncation artifacts"
        )
    ops = _mode_ops(cutoff, n_modes)
    coeff = r @ build_omega(n_modes)
    h = sum(c * op for c, op in zip(coeff, ops))
    return _expm_skew(h)


def displacement_group_law_residual(r1, r2, cutoff: int, interior: int | None = None) -> float:
    """Max-abs defect of D_r D_r' = exp(-i/2 r^T Omega r') D_{r+r'}.

    The phase follows the standard composition of displacement operators
    under [q, p] = +i (equivalently D_a D_b = e^{(a b* - a* b)/2} D_{a+b} in
    complex form).  The last few rows and columns of a truncated
    displacement are corrupted by the cutoff regardless of how small r is,
    so the defect is measured on the interior block of photon numbers below
    `interior` (default cutoff // 2); it shrinks as the cutoff grows.
    """
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    if interior is None:
        interior = cutoff // 2
    om = build_omega(len(r1) // 2)
    lhs = displacement(r1, cutoff) @ displacement(r2, cutoff)
    rhs = np.exp(-0.5j * (r1 @ om @ r2)) * displacement(r1 + r2, cutoff)
    diff = lhs - rhs
    return float(np.max(np.abs(diff[:interior, :interior])))


def gaussian_state_from_hamiltonian(qmat: np.ndarray, cutoff: int) -> np.ndarray:
    """Normalized rho = exp(-xi^T q xi) / Tr for a one-mode quadratic q."""
    qmat = np.asarray(qmat, dtype=float)
    if qmat.shape != (2, 2):
        raise ValueError("one-mode Hamiltonian matrix must be 2x2")
    qop, pop = quadrature_ops(cutoff)
    h = (
        qmat[0, 0] * (qop @ qop)
        + qmat[1, 1] * (pop @ pop)
        + qmat[0, 1] * (qop @ pop + pop @ qop)
    )
    vals, vecs = np.linalg.eigh(h)
    rho = (vecs * np.exp(-(vals - vals.min()))) @ vecs.conj().T
    return rho / np.trace(rho).real


def covariance_of(rho: np.ndarray, n_modes: int = 1) -> np.ndarray:
    """Covariance matrix Tr[rho (xi_a xi_b + xi_b xi_a)] of a Fock operator."""
    dim = rho.shape[0]
    cutoff = int(round(dim ** (1.0 / n_modes))) - 1
    if (cutoff + 1) ** n_modes != dim:
        raise ValueError(f"dimension {dim} is not a {n_modes}-mode product space")
    ops = _mode_ops(cutoff, n_modes)
    c = np.empty((2 * n_modes, 2 * n_modes))
    for i, oi in enumerate(ops):
        for k, ok in enumerate(ops):
            c[i, k] = np.trace(rho @ (oi @ ok + ok @ oi)).real
    return c


def characteristic_function(c_a: np.ndarray, r) -> float:
    """Gaussian characteristic function exp(-1/4 r^T Omega^T C_A Omega r)."""
    c_a = np.asarray(c_a, dtype=float)
    r = np.asarray(r, dtype=float)
    n = c_a.shape[0] // 2
    om = build_omega(n)
    w = om @ r
    return float(np.exp(-0.25 * w @ c_a @ w))


def char_function_fock(rho: np.ndarray, r, n_modes: int = 1) -> complex:
    """Tr[rho D_r] evaluated in the truncated number basis."""
    dim = rho.shape[0]
    cutoff = int(round(dim ** (1.0 / n_modes))) - 1
    return complex(np.trace(rho @ displacement(r, cutoff)))


def _gauss_hermite_sum(fn, dim: int, scales, nodes: int) -> complex:
    """Tensor Gauss-Hermite quadrature of int fn(r) d^dim r.

    scales holds one grid scale per axis; folding removes the e^{-x^2}
    weight, so fn must decay at least like a Gaussian wider than the scales.
    Evaluates one slab of the grid at a time to bound memory.
    """
    scales = np.broadcast_to(np.asarray(scales, dtype=float), (dim,))
    x, w = np.polynomial.hermite.hermgauss(nodes)
    wf = w * np.exp(x * x)
    if dim == 1:
        return scales[0] * np.sum(wf * fn(scales[0] * x[:, None]))
    rest = np.meshgrid(*([x] * (dim - 1)), indexing="ij")
    w_rest = wf
    for _ in range(dim - 2):
        w_rest = np.multiply.outer(w_rest, wf)
    total = 0.0 + 0.0j
    flat_rest = np.stack([g.ravel() for g in rest], axis=-1)
    for i in range(nodes):
        pts = np.concatenate(
            [np.full((flat_rest.shape[0], 1), x[i]), flat_rest], axis=1
        )
        vals = np.asarray(fn(pts * scales))
        total += wf[i] * np.sum(w_rest.ravel() * vals)
    return float(np.prod(scales)) * total


def _converging_quadrature(fn, dim, scales, ladder, tol, label) -> float:
    prev = None
    for nodes in ladder:
        est = _gauss_hermite_sum(fn, dim, scales, nodes)
        if abs(est.imag) > 1e-8 * max(1.0, abs(est.real)):
            warnings.warn(f"{label}: imaginary residue {est.imag:.2e}")
        if prev is not None and abs(est.real - prev) <= 0.5 * tol:
            return float(est.real)
        prev = est.real
    raise RuntimeError(
        f"{label}: quadrature did not converge to {tol:g} "
        f"(last two estimates differ by more than tol/2)"
    )


def purity_by_quadrature(c_a: np.ndarray, tol: float = 1e-6) -> float:
    """Tr rho^2 = (2 pi)^{-N_A} int chi^2 d^{2 N_A} r by quadrature.

    Limited to 1 or 2 modes (tensor-grid cost); matches det(C_A)^(-1/2).
    """
    c_a = np.asarray(c_a, dtype=float)
    n = c_a.shape[0] // 2
    if n not in (1, 2):
        raise ValueError("quadrature purity supports 1 or 2 modes only")
    om = build_omega(n)
    kmat = om.T @ c_a @ om
    # rotate to the principal axes of chi^2 (a rotation leaves the integral
    # invariant) and match each grid scale to its decay rate, critically:
    # the folded e^{+u^2} weight against exp(-d_i (s_i u)^2 / 2)
    dvals, _ = np.linalg.eigh(kmat)
    scales = np.sqrt(2.0 / dvals)

    def fn(pts):
        return np.exp(-0.5 * np.sum(dvals * pts * pts, axis=1))

    ladder = (12, 24, 48) if n == 1 else (12, 16, 24, 32)
    val = _converging_quadrature(fn, 2 * n, scales, ladder, tol, "purity quadrature")
    return val / (2.0 * math.pi) ** n


def coherent_rep_trace(
    c_a: np.ndarray, x: int = 3, tol: float = 1e-5, include_phase: bool = True
) -> float:
    """Tr rho^3 of a one-mode Gaussian state from its phase-space replicas.

    Direct quadrature of

      (2 pi)^{-2} int chi(r1) chi(r2) chi(-r1-r2) e^{i/2 r1^T Omega r2} d4r,

    the two-replica coherent-state representation.  include_phase=False
    drops the oscillatory factor (negative control: the result then
    disagrees with the Renyi trace).  Only x = 3 on one mode is supported;
    higher orders scale too badly for a tensor grid.
    """
    if x != 3:
        raise ValueError("coherent-state trace is implemented for x = 3 only")
    c_a = np.asarray(c_a, dtype=float)
    if c_a.shape != (2, 2):
        raise ValueError("coherent-state trace supports one mode only")
    om = build_omega(1)
    kmat = om.T @ c_a @ om
    qblock = 0.5 * np.block([[2.0 * kmat, kmat], [kmat, 2.0 * kmat]])
    eigmin = float(np.min(np.linalg.eigvalsh(qblock)))
    scale = math.sqrt(2.0 / eigmin)

    def fn(pts):
        r1, r2 = pts[:, :2], pts[:, 2:]
        quad = (
            np.einsum("ki,ij,kj->k", r1, kmat, r1)
            + np.einsum("ki,ij,kj->k", r2, kmat, r2)
            + np.einsum("ki,ij,kj->k", r1 + r2, kmat, r1 + r2)
        )
        out = np.exp(-0.25 * quad).astype(complex)
        if include_phase:
            cross = r1[:, 0] * r2[:, 1] - r1[:, 1] * r2[:, 0]
            out *= np.exp(0.5j * cross)
        return out

    val = _converging_quadrature(fn, 4, scale, (16, 24, 32, 48, 64), tol, "replica trace")
    return val / (2.0 * math.pi) ** 2
