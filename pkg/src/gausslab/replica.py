"""Replica-space determinant identities and the mean-field saddle point.

The ensemble average of Tr rho_A^x over constrained pure Gaussian states
reduces, at leading order in the total mode number, to a single determinant
in replica space,

    2^{N_A (x-1)} det[ Chat_A (x) M  -  i Omega (x) J ]^(-1/2),

where (x) is the Kronecker product, M = I_{x-1} + e e^T with e the all-ones
vector, and J is the antisymmetric matrix with +1 above the diagonal.  This
module realizes that master determinant together with every closed-form
reduction of it (antiperiodic shift operator, tridiagonal Toeplitz cofactor,
per-mode determinant Delta_j) down to the product formula
prod_j 2^x / ((mu_j+1)^x - (mu_j-1)^x), plus the stationary-point solution
of the multiplier integrals and the exact radial prefactor.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constraints import ConstraintSpec, hat_projection, scenario_one
from .symplectic import build_omega


@dataclass(frozen=True)
class ReplicaMatrices:
    """Replica-space operators at order x: shift T, phase matrix J, M = I + ee^T."""

    x: int
    t: np.ndarray
    j: np.ndarray
    m: np.ndarray
    e: np.ndarray


def build_replica_matrices(x: int) -> ReplicaMatrices:
    """Integer-valued T, J, M on the (x-1)-dimensional replica space.

    T is the antiperiodic cyclic shift (T^{x-1} = -I); J = sum_{l=1}^{x-2} T^l
    has +1 everywhere above the diagonal; det M = x and det(I - T) = 2.
    For x = 2 all three are 1x1: T = [-1], J = [0], M = [2].
    """
    if x < 2 or x != int(x):
        raise ValueError(f"replica order must be an integer >= 2, got {x}")
    d = x - 1
    t = np.zeros((d, d), dtype=int)
    for i in range(d - 1):
        t[i, i + 1] = 1
    t[d - 1, 0] = -1
    j = np.triu(np.ones((d, d), dtype=int), k=1)
    j = j - j.T
    m = np.eye(d, dtype=int) + np.ones((d, d), dtype=int)
    return ReplicaMatrices(x=x, t=t, j=j, m=m, e=np.ones(d, dtype=int))


def j_geometric_identity_check(x: int) -> float:
    """Residual of J = (I + T)(I - T)^{-1}; zero by the geometric sum."""
    if x < 2:
        raise ValueError("need x >= 2")
    rm = build_replica_matrices(x)
    d = x - 1
    rhs = (np.eye(d) + rm.t) @ np.linalg.inv(np.eye(d) - rm.t)
    return float(np.max(np.abs(rm.j - rhs)))


def master_determinant(chat_a: np.ndarray, x: int, imag_tol: float = 1e-9) -> float:
    """Replica master formula 2^{N_A(x-1)} det[Chat_A (x) M - i Omega (x) J]^(-1/2).

    The determinant of the complex 2 N_A (x-1) dimensional matrix is
    accumulated in log form through a pivoted factorization, so large
    eigenvalues and high replica orders do not overflow.  For physical input
    the determinant is real positive; a relative imaginary part above
    imag_tol signals an unphysical matrix and raises.
    """
    chat_a = np.asarray(chat_a, dtype=float)
    if chat_a.ndim != 2 or chat_a.shape[0] != chat_a.shape[1] or chat_a.shape[0] % 2:
        raise ValueError(f"constraint block must be 2 N_A x 2 N_A, got {chat_a.shape}")
    n_a = chat_a.shape[0] // 2
    rm = build_replica_matrices(x)
    om = build_omega(n_a)
    kmat = np.kron(chat_a, rm.m.astype(float)) - 1j * np.kron(om, rm.j.astype(float))
    sign, logabs = np.linalg.slogdet(kmat)
    phase = float(np.angle(sign))
    if abs(phase) > 2.0 * imag_tol:
        raise ValueError(
            f"replica determinant is not real positive (phase {phase:.3e}); "
            "unphysical constraint block"
        )
    log_val = n_a * (x - 1) * math.log(2.0) - 0.5 * logabs
    return math.exp(log_val) * math.cos(0.5 * phase)


def toeplitz_cofactor(mu: float, x: int) -> float:
    """Closed form of the (x-2) dimensional tridiagonal Toeplitz cofactor.

    Equals (-1)^x [(mu+1)^{2x-2} - (mu-1)^{2x-2}] / (4 mu); the sign
    alternates with the parity of x.  For x = 2 the determinant is empty and
    the value is 1.
    """
    if x < 2:
        raise ValueError("need x >= 2")
    if mu <= 1.0:
        raise ValueError(f"need mu > 1, got {mu}")
    if x == 2:
        return 1.0
    return (-1) ** x * ((mu + 1.0) ** (2 * x - 2) - (mu - 1.0) ** (2 * x - 2)) / (4.0 * mu)


def toeplitz_cofactor_direct(mu: float, x: int) -> float:
    """Explicit determinant of the tridiagonal matrix, for verification.

    Diagonal entries are -2(mu^2 + 1), off-diagonal entries mu^2 - 1.
    """
    if x < 2:
        raise ValueError("need x >= 2")
    d = x - 2
    if d == 0:
        return 1.0
    mat = (
        -2.0 * (mu**2 + 1.0) * np.eye(d)
        + (mu**2 - 1.0) * np.eye(d, k=1)
        + (mu**2 - 1.0) * np.eye(d, k=-1)
    )
    return float(np.linalg.det(mat))


def delta_j(mu: float, x: int) -> float:
    """Per-mode replica determinant Delta_j in its final closed form.

    Delta_j = [2 (mu^2-1)^{x-1} + (mu+1)^{2x-1} - (mu-1)^{2x-1}]^2
              / (4 x [(mu+1)^{x-1} + (mu-1)^{x-1}]^2)

    and the per-mode Renyi trace is (2^{x-1} / sqrt(x)) * Delta_j^(-1/2).
    """
    if x < 2:
        raise ValueError("need x >= 2")
    if mu < 1.0:
        raise ValueError(f"need mu >= 1, got {mu}")
    num = 2.0 * (mu**2 - 1.0) ** (x - 1) + (mu + 1.0) ** (2 * x - 1) - (mu - 1.0) ** (
        2 * x - 1
    )
    den = 4.0 * x * ((mu + 1.0) ** (x - 1) + (mu - 1.0) ** (x - 1)) ** 2
    return num**2 / den


def delta_j_intermediate(mu: float, x: int) -> float:
    """Delta_j assembled from the cofactor route, for verification.

    Uses X = (-1)^x 4 cof / [(mu+1)^{x-1} + (mu-1)^{x-1}]^2 with the
    tridiagonal cofactor, then
    Delta_j = [(mu+1)^{x-1} + (mu-1)^{x-1}]^2 (1 + mu^2 X)^2 / (4 x).
    """
    if mu <= 1.0:
        raise ValueError(f"need mu > 1 on the cofactor route, got {mu}")
    s = (mu + 1.0) ** (x - 1) + (mu - 1.0) ** (x - 1)
    x_corner = (-1) ** x * 4.0 * toeplitz_cofactor(mu, x) / s**2
    return s**2 * (1.0 + mu**2 * x_corner) ** 2 / (4.0 * x)


def delta_j_direct(mu: float, x: int) -> float:
    """Delta_j from its replica-space definition det(mu^2 M - J M^{-1} J)."""
    rm = build_replica_matrices(x)
    m = rm.m.astype(float)
    j = rm.j.astype(float)
    return float(np.linalg.det(mu**2 * m - j @ np.linalg.inv(m) @ j))


def renyi_product(mu_list, x: int) -> float:
    """Product closed form prod_j 2^x / ((mu_j+1)^x - (mu_j-1)^x)."""
    out = 1.0
    for mu in mu_list:
        out *= 2.0**x / ((mu + 1.0) ** x - (mu - 1.0) ** x)
    return out


def constraint_block(mu_list) -> np.ndarray:
    """Isotropic block-diagonal constraint matrix diag(mu_1 I2, ...)."""
    mu_list = list(mu_list)
    chat = np.zeros((2 * len(mu_list), 2 * len(mu_list)))
    for i, mu in enumerate(mu_list):
        chat[2 * i, 2 * i] = mu
        chat[2 * i + 1, 2 * i + 1] = mu
    return chat


def final_identity_check(mu_list, x: int) -> float:
    """Relative error of the master determinant against the product form."""
    lhs = master_determinant(constraint_block(mu_list), x)
    rhs = renyi_product(mu_list, x)
    return abs(lhs - rhs) / abs(rhs)


def _isotropic_lambdas(chat: np.ndarray) -> np.ndarray:
    """Per-mode eigenvalues of a block-diagonal isotropic constraint matrix."""
    chat = np.asarray(chat, dtype=float)
    if chat.ndim != 2 or chat.shape[0] != chat.shape[1] or chat.shape[0] % 2:
        raise ValueError(f"constraint matrix must be 2N x 2N, got {chat.shape}")
    n = chat.shape[0] // 2
    lams = np.array([chat[2 * i, 2 * i] for i in range(n)])
    ref = np.zeros_like(chat)
    for i in range(n):
        ref[2 * i, 2 * i] = lams[i]
        ref[2 * i + 1, 2 * i + 1] = lams[i]
    if np.max(np.abs(chat - ref)) > 1e-12 * max(1.0, np.max(np.abs(chat))):
        raise ValueError("constraint matrix must be block-diagonal with lam * I2 blocks")
    return lams


def saddle_point_solution(chat: np.ndarray, n_total: int) -> tuple[np.ndarray, np.ndarray]:
    """Stationary multiplier matrices (A0, B0) of the constrained ensemble.

    With Y = (Chat + Omega) / N the stationarity conditions

        Omega   = (N/2) [ (eps - iA + B)^{-1} - (eps - iA - B)^{-1} ]
        Chat_(j)= (N/2) [ {(eps - iA + B)^{-1}}_(j) + {(eps - iA - B)^{-1}}_(j) ]

    are solved exactly at eps = 0 by  -i A0 + B0 = N (Chat + Omega)^{-1}:

        B0 = (N/2) [ (Chat + Omega)^{-1} - (Chat - Omega)^{-1} ]   (real, antisym)
        A0 = (N/2i)[ (Chat + Omega)^{-1} + (Chat - Omega)^{-1} ]^(-1 on the i)
           = i (N/2) [ (Chat + Omega)^{-1} + (Chat - Omega)^{-1} ] (imaginary, sym)

    Both inherit the block-diagonal pattern of Chat.  The saddle is reachable
    only for symplectic eigenvalues strictly above 1; eigenvalues at or below
    1 raise.
    """
    lams = _isotropic_lambdas(chat)
    if np.min(lams) <= 1.0:
        raise ValueError(
            f"saddle point unreachable: all marginal eigenvalues must exceed 1, "
            f"min is {np.min(lams)}"
        )
    if n_total < 1:
        raise ValueError("n_total must be >= 1")
    n_modes = chat.shape[0] // 2
    om = build_omega(n_modes)
    inv_plus = np.linalg.inv(chat + om)
    inv_minus = np.linalg.inv(chat - om)
    b0 = 0.5 * n_total * (inv_plus - inv_minus)
    a0 = 0.5j * n_total * (inv_plus + inv_minus)
    return a0, b0


def saddle_residuals(
    a0: np.ndarray,
    b0: np.ndarray,
    chat: np.ndarray,
    n_total: int,
    spec: ConstraintSpec | None = None,
    eps: float = 0.0,
) -> tuple[float, float]:
    """Max-abs residuals of the two stationarity conditions.

    The inverses of (eps - iA0 +/- B0) are computed independently, so this is
    a genuine substitution check rather than an algebraic identity.  spec
    selects the window blocks entering the marginal condition; by default
    every mode is its own window.
    """
    n_modes = chat.shape[0] // 2
    if spec is None:
        spec = scenario_one([1.0] * n_modes)
    om = build_omega(n_modes)
    eye = np.eye(2 * n_modes)
    y_plus = np.linalg.inv(eps * eye - 1j * a0 + b0)
    y_minus = np.linalg.inv(eps * eye - 1j * a0 - b0)
    res_form = np.max(np.abs(om - 0.5 * n_total * (y_plus - y_minus)))
    marg = hat_projection(np.real(0.5 * n_total * (y_plus + y_minus)), spec)
    imag_leak = np.max(np.abs(np.imag(0.5 * n_total * (y_plus + y_minus))))
    res_marg = max(float(np.max(np.abs(marg - chat))), float(imag_leak))
    return float(res_form), res_marg


def a_tilde(a0: np.ndarray, b0: np.ndarray, eps: float) -> np.ndarray:
    """Symmetrized resolvent (eps - iA0 + B0)^{-1} + (eps - iA0 - B0)^{-1}.

    At the saddle this equals (2/N) Chat up to O(eps) corrections.
    """
    dim = a0.shape[0]
    eye = np.eye(dim)
    return np.linalg.inv(eps * eye - 1j * a0 + b0) + np.linalg.inv(
        eps * eye - 1j * a0 - b0
    )


def prefactor_integral(n_total: int, n_a: int) -> float:
    """Exact radial prefactor (N - N_A - 1)! / (N - 1)!.

    Arises from reducing the 2 N_A dimensional integral of (1 + r^T r)^{-N}
    against the Gaussian normalization to a Beta over Gamma ratio.
    Evaluated with log-gamma.  N_A = 0 is degenerate and returns 1 with a
    warning.
    """
    if n_a == 0:
        warnings.warn("degenerate N_A = 0 prefactor, returning 1 by convention")
        return 1.0
    if n_a < 0 or n_total <= n_a:
        raise ValueError(f"need N > N_A >= 1, got N = {n_total}, N_A = {n_a}")
    return math.exp(math.lgamma(n_total - n_a) - math.lgamma(n_total))


def prefactor_integral_mc(
    n_total: int,
    n_a: int,
    n_samples: int = 1_000_000,
    seed: int | None = 0,
    n_blocks: int = 100,
) -> tuple[float, float]:
    """Monte Carlo verification of the radial prefactor.

    Estimates int (1 + r^T r)^{-N} d^{2 N_A} r  /  int e^{-r^T r} d^{2 N_A} r
    by importance sampling from an even mixture of the Gaussian e^{-r^T r}
    and a heavy-tailed multivariate Student-t (2 degrees of freedom), which
    dominates both integrands with finite variance.  Returns (estimate,
    standard error) from block-wise ratio estimates.
    """
    if n_total <= n_a or n_a < 1:
        raise ValueError(f"need N > N_A >= 1, got N = {n_total}, N_A = {n_a}")
    dim = 2 * n_a
    if 2 * n_total <= dim + 2:
        raise ValueError("integrand too heavy-tailed for the t(2) proposal")
    rng = np.random.default_rng(seed)
    nu_t = 2.0

    log_norm_gauss = -0.5 * dim * math.log(math.pi)
    log_norm_t = (
        math.lgamma(0.5 * (nu_t + dim))
        - math.lgamma(0.5 * nu_t)
        - 0.5 * dim * math.log(nu_t * math.pi)
    )

    block = n_samples // n_blocks
    ratios = np.empty(n_blocks)
    for b in range(n_blocks):
        pick_t = rng.random(block) < 0.5
        z = rng.normal(size=(block, dim))
        w_chi = rng.chisquare(nu_t, size=block)
        r = np.where(
            pick_t[:, None], z * np.sqrt(nu_t / w_chi)[:, None], z / np.sqrt(2.0)
        )
        s = np.sum(r * r, axis=1)
        log_q = np.logaddexp(
            log_norm_gauss - s, log_norm_t - 0.5 * (nu_t + dim) * np.log1p(s / nu_t)
        ) - math.log(2.0)
        w_num = np.exp(-n_total * np.log1p(s) - log_q)
        w_den = np.exp(-s - log_q)
        ratios[b] = np.sum(w_num) / np.sum(w_den)
    est = float(np.mean(ratios))
    stderr = float(np.std(ratios, ddof=1) / math.sqrt(n_blocks))
    return est, stderr
