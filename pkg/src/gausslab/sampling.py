"""Monte Carlo sampling of the constrained pure Gaussian state ensemble.

The target ensemble is the set of symplectic matrices S whose covariance
C = S S^T matches a constraint matrix Chat on its window-diagonal blocks,
weighted by the flat measure on S with delta functions on the constraints.
Two samplers are provided:

* ambient-soft: the small-N reference.  The flat matrix measure restricted
  by the symplecticity delta is exactly the invariant (Haar) measure of the
  symplectic group, and a Cayley random walk with sign-symmetric Lie
  increments leaves that measure stationary; the walk therefore runs on the
  group itself and only the marginal-constraint delta is replaced by a
  Gaussian kernel of width eps/3 (the schedule entry eps is the *active
  residual tolerance*: emitted samples are filtered to residual <= eps).
  The epsilon schedule is run as a replica-exchange ladder, so tight kernels
  stay mobile through swaps with loose ones; observables are reported per
  eps and Richardson-extrapolated to eps -> 0 (kernel bias is O(eps^2)).
* manifold-walk: the workhorse.  Proposals move along the symplectic group
  and are pulled back onto the constraint set by a damped Gauss-Newton
  retraction.  Converged proposals are accepted under the
  proposal-symmetrization approximation; the residual sampling bias is
  bounded empirically by cross-validation against the ambient sampler at
  small N.

Every emitted sample is checked: symplecticity residual <= 1e-8, purity
residual <= 1e-6, constraint residual below the active tolerance.  Identical
(config, seed) pairs reproduce batches exactly.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .constraints import (
    ConstraintSpec,
    build_constraint_matrix,
    constraint_residual,
    spec_to_dict,
)
from .entropy import entropy_mixed, renyi_trace_mixed
from .symplectic import (
    build_omega,
    embedded_two_mode_squeezer,
    purity_residual,
    restrict,
    symplectic_residual,
)

MANIFOLD_RESIDUAL_TOL = 1e-8
EMIT_PURITY_TOL = 1e-6
MIN_SAMPLING_LAMBDA = 1.0 + 1e-6


@dataclass(frozen=True)
class SamplerConfig:
    """Controls for one sampling campaign."""

    spec: ConstraintSpec
    method: str = "manifold-walk"
    n_samples: int = 500
    seed: int = 0
    n_chains: int = 4
    burn_in: int = 400
    thinning: int = 5
    step_size: float = 0.5
    epsilon_schedule: tuple[float, ...] = (0.5, 0.36, 0.26, 0.19, 0.14, 0.1)

    def __post_init__(self):
        if self.method not in ("manifold-walk", "ambient-soft"):
            raise ValueError(f"unknown sampling method {self.method!r}")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.n_chains < 1 or self.thinning < 1 or self.burn_in < 0:
            raise ValueError("bad chain controls")
        if min(self.spec.lambdas) <= MIN_SAMPLING_LAMBDA:
            raise ValueError(
                "sampling requires every marginal eigenvalue > 1 + 1e-6 "
                "(pure marginals are degenerate points of the constraint set)"
            )
        eps = tuple(float(e) for e in self.epsilon_schedule)
        object.__setattr__(self, "epsilon_schedule", eps)
        if self.method == "ambient-soft":
            if self.spec.n_modes > 6:
                raise ValueError("ambient sampler is a small-N reference (N <= 6)")
            if len(eps) < 2 or any(b >= a for a, b in zip(eps, eps[1:])):
                raise ValueError("epsilon schedule must be strictly decreasing, >= 2 entries")


def config_to_dict(config: SamplerConfig) -> dict:
    return {
        "spec": spec_to_dict(config.spec),
        "method": config.method,
        "n_samples": config.n_samples,
        "seed": config.seed,
        "n_chains": config.n_chains,
        "burn_in": config.burn_in,
        "thinning": config.thinning,
        "step_size": config.step_size,
        "epsilon_schedule": list(config.epsilon_schedule),
    }


def config_hash(config: SamplerConfig) -> str:
    blob = json.dumps(config_to_dict(config), sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class SampleBatch:
    """Covariance samples plus per-sample diagnostics."""

    samples: np.ndarray
    constraint_residuals: np.ndarray
    symplectic_residuals: np.ndarray
    purity_residuals: np.ndarray
    weights: np.ndarray
    chain_ids: np.ndarray
    metadata: dict = field(default_factory=dict)
    epsilon: float | None = None

    def __len__(self) -> int:
        return self.samples.shape[0]


# ---------------------------------------------------------------------------
# symplectic Lie algebra helpers


def _cayley(y: np.ndarray) -> np.ndarray:
    """(I - Y/2)^{-1} (I + Y/2): exactly symplectic for Y in sp(2N)."""
    dim = y.shape[0]
    eye = np.eye(dim)
    return np.linalg.solve(eye - 0.5 * y, eye + 0.5 * y)


def _random_lie_element(rng: np.random.Generator, omega: np.ndarray, scale: float) -> np.ndarray:
    """scale * Omega H with H symmetric Gaussian, spectral size ~ scale."""
    dim = omega.shape[0]
    g = rng.normal(size=(dim, dim))
    h = 0.5 * (g + g.T)
    return (scale / math.sqrt(dim)) * (omega @ h)


def symplectify(s: np.ndarray, tol: float = 1e-12, max_iter: int = 60) -> np.ndarray:
    """Newton projection of a near-symplectic matrix onto Sp(2N, R).

    Iterates S <- S - (1/2) (S Omega S^T - Omega)(S Omega S^T)^{-1} S, damped
    when the defect does not shrink; converges quadratically near the group.
    """
    n2 = s.shape[0]
    om = build_omega(n2 // 2)
    err = np.max(np.abs(s @ om @ s.T - om))
    for _ in range(max_iter):
        if err <= tol:
            return s
        g = s @ om @ s.T
        full = 0.5 * (g - om) @ np.linalg.solve(g, s)
        for damp in (1.0, 0.5, 0.25):
            s_try = s - damp * full
            err_try = np.max(np.abs(s_try @ om @ s_try.T - om))
            if err_try < err:
                s, err = s_try, err_try
                break
        else:
            break
    if err > 10 * tol:
        raise RuntimeError(f"symplectic cleanup did not converge (defect {err:.2e})")
    return s


# ---------------------------------------------------------------------------
# constraint residual map and its Jacobian in Lie-algebra coordinates


def _constraint_rows(spec: ConstraintSpec) -> tuple[np.ndarray, np.ndarray]:
    """Row index pairs (p, q), p <= q, of the window-diagonal components."""
    ps, qs = [], []
    for a, b in spec.window_slices():
        lo, hi = 2 * a, 2 * b
        for p in range(lo, hi):
            for q in range(p, hi):
                ps.append(p)
                qs.append(q)
    return np.array(ps), np.array(qs)


def _residual_vector(c, chat, rows) -> np.ndarray:
    ps, qs = rows
    return c[ps, qs] - chat[ps, qs]


def _constraint_jacobian(c, omega, rows, tri) -> np.ndarray:
    """d residual / d H for updates S -> cayley(Omega H) S, at H = 0.

    The covariance moves by dC = Y C + C Y^T with Y = Omega H, so the row for
    component (p, q) has coefficient of H_{st}:
        Omega[p, s] C[t, q] + Omega[q, s] C[t, p]   (symmetrized over s, t).
    """
    ps, qs = rows
    ia, ib = tri
    k1 = np.einsum("rs,rt->rst", omega[ps, :], c[:, qs].T)
    k2 = np.einsum("rs,rt->rst", omega[qs, :], c[:, ps].T)
    k = k1 + k2
    return np.where(ia == ib, k[:, ia, ib], k[:, ia, ib] + k[:, ib, ia])


def _unpack_sym(vec, tri, dim) -> np.ndarray:
    ia, ib = tri
    h = np.zeros((dim, dim))
    h[ia, ib] = vec
    h[ib, ia] = vec
    return h


def _retract(
    s: np.ndarray,
    chat: np.ndarray,
    rows,
    omega: np.ndarray,
    tri,
    tol: float = 1e-10,
    max_iter: int = 40,
) -> tuple[np.ndarray, bool]:
    """Damped Gauss-Newton pullback of S onto the constraint set.

    Solves for a minimum-norm Lie-algebra correction at each iteration and
    applies it through the Cayley map, so iterates stay exactly symplectic.
    Returns (S', converged).
    """
    dim = s.shape[0]
    c = s @ s.T
    res = _residual_vector(c, chat, rows)
    err = np.max(np.abs(res))
    for _ in range(max_iter):
        if err <= tol:
            return s, True
        jac = _constraint_jacobian(c, omega, rows, tri)
        gram = jac @ jac.T
        reg = 1e-13 * np.trace(gram) / gram.shape[0] + 1e-300
        y = np.linalg.solve(gram + reg * np.eye(gram.shape[0]), -res)
        h = _unpack_sym(jac.T @ y, tri, dim)
        step = omega @ h
        improved = False
        for damp in (1.0, 0.5, 0.25, 0.1):
            s_try = _cayley(damp * step) @ s
            c_try = s_try @ s_try.T
            res_try = _residual_vector(c_try, chat, rows)
            err_try = np.max(np.abs(res_try))
            if err_try < err:
                s, c, res, err = s_try, c_try, res_try, err_try
                improved = True
                break
        if not improved:
            return s, False
    return s, err <= tol


def _cross_window_ring(spec: ConstraintSpec) -> list[tuple[int, int]]:
    """Squeezer pairs over a round-robin mode ordering across windows.

    Keeps ring links between different windows whenever possible, so the
    start point carries no forbidden intra-window correlations to undo.
    """
    groups = [list(range(a, b)) for a, b in spec.window_slices()]
    order = []
    while any(groups):
        for g in groups:
            if g:
                order.append(g.pop(0))
    n = len(order)
    if n == 2:
        return [(order[0], order[1])]
    return [(order[i], order[(i + 1) % n]) for i in range(n)]


def feasible_start(
    spec: ConstraintSpec, rng: np.random.Generator, ring_squeeze: float = 0.3
) -> np.ndarray:
    """Constructive point on the constraint set.

    Builds a ring of two-mode squeezers (pure, entangled, no special
    structure), then walks the marginal targets up to the requested spec
    with the Newton retraction at each homotopy stage.
    """
    n = spec.n_modes
    lams = np.array(spec.lambdas)
    if n == 1:
        raise ValueError("a single mode with lam > 1 admits no pure state")
    excess = lams - 1.0
    if np.max(excess) > np.sum(excess) - np.max(excess) + 1e-9:
        raise ValueError(
            "infeasible marginals: largest eigenvalue excess exceeds the sum "
            "of the others (no pure state exists)"
        )
    om = build_omega(n)
    rows = _constraint_rows(spec)
    tri = np.triu_indices(2 * n)
    pairs = _cross_window_ring(spec)
    last_stage = None
    for _ in range(4):
        s = np.eye(2 * n)
        for i, j in pairs:
            r = ring_squeeze * (0.8 + 0.4 * rng.random())
            s = embedded_two_mode_squeezer(n, i, j, r) @ s
        ok = True
        for t in (0.2, 0.35, 0.55, 0.75, 0.9, 1.0):
            lam_t = 1.0 + t * excess
            chat_t = np.zeros((2 * n, 2 * n))
            for i, lam in enumerate(lam_t):
                chat_t[2 * i, 2 * i] = lam
                chat_t[2 * i + 1, 2 * i + 1] = lam
            s, ok = _retract(s, chat_t, rows, om, tri, tol=1e-11, max_iter=80)
            if not ok:
                last_stage = t
                break
        if ok:
            return symplectify(s)
    raise RuntimeError(
        f"could not reach the constraint set (homotopy stage t={last_stage}); "
        "the spec may be infeasible or nearly degenerate"
    )


# ---------------------------------------------------------------------------
# manifold walk


def sample_manifold(config: SamplerConfig) -> SampleBatch:
    """Constraint-manifold Metropolis walk; every sample has residual <= 1e-8."""
    if config.method != "manifold-walk":
        raise ValueError("config.method must be 'manifold-walk'")
    spec = config.spec
    n = spec.n_modes
    chat = build_constraint_matrix(spec)
    om = build_omega(n)
    rows = _constraint_rows(spec)
    tri = np.triu_indices(2 * n)

    seeds = np.random.SeedSequence(config.seed).spawn(config.n_chains)
    per_chain = -(-config.n_samples // config.n_chains)

    all_samples, all_chain, all_symp = [], [], []
    n_proposed = n_converged = 0
    for chain_idx in range(config.n_chains):
        rng = np.random.default_rng(seeds[chain_idx])
        s = feasible_start(spec, rng)
        collected = 0
        steps_since_emit = 0
        steps_total = 0
        while collected < per_chain:
            x = _random_lie_element(rng, om, config.step_size)
            s_prop = _cayley(x) @ s
            s_new, ok = _retract(s_prop, chat, rows, om, tri)
            n_proposed += 1
            if ok:
                n_converged += 1
                s = s_new
            steps_total += 1
            if steps_total % 64 == 0:
                s = symplectify(s)
                s, _ = _retract(s, chat, rows, om, tri)
            steps_since_emit += 1
            if steps_total > config.burn_in and steps_since_emit >= config.thinning:
                steps_since_emit = 0
                all_samples.append(s @ s.T)
                all_symp.append(symplectic_residual(s))
                all_chain.append(chain_idx)
                collected += 1

    batch = _finalize_batch(
        np.array(all_samples),
        np.array(all_chain),
        np.array(all_symp),
        spec,
        chat,
        active_tolerance=MANIFOLD_RESIDUAL_TOL,
        metadata={
            "method": "manifold-walk",
            "config_hash": config_hash(config),
            "seed": config.seed,
            "acceptance_rate": n_converged / max(n_proposed, 1),
            "retraction_discard_fraction": 1.0 - n_converged / max(n_proposed, 1),
            "spec": spec_to_dict(spec),
        },
    )
    return batch


def _finalize_batch(
    samples, chain_ids, symp_residuals, spec, chat, active_tolerance, metadata, epsilon=None
):
    n_s = samples.shape[0]
    res_c = np.empty(n_s)
    res_s = np.asarray(symp_residuals, dtype=float)
    res_p = np.empty(n_s)
    for k in range(n_s):
        c = 0.5 * (samples[k] + samples[k].T)
        samples[k] = c
        res_c[k] = constraint_residual(c, chat, spec)
        res_p[k] = purity_residual(c)
    bad = (
        (res_c > active_tolerance)
        | (res_p > EMIT_PURITY_TOL)
        | (res_s > MANIFOLD_RESIDUAL_TOL)
    )
    if np.any(bad):
        raise RuntimeError(
            f"{int(np.sum(bad))} samples violate emission tolerances "
            f"(max constraint {res_c.max():.2e}, max purity {res_p.max():.2e})"
        )
    metadata = dict(metadata)
    metadata["active_tolerance"] = active_tolerance
    metadata["n_samples"] = int(n_s)
    return SampleBatch(
        samples=samples,
        constraint_residuals=res_c,
        symplectic_residuals=res_s,
        purity_residuals=res_p,
        weights=np.ones(n_s),
        chain_ids=np.asarray(chain_ids),
        metadata=metadata,
        epsilon=epsilon,
    )


# ---------------------------------------------------------------------------
# ambient softened sampler (replica exchange on the symplectic group)


def _marginal_energy(s: np.ndarray, chat: np.ndarray, rows) -> float:
    """Sum of squared marginal-constraint components of S S^T."""
    ps, qs = rows
    c = s @ s.T
    f = c[ps, qs] - chat[ps, qs]
    return float(f @ f)


def sample_ambient(config: SamplerConfig) -> list[SampleBatch]:
    """Softened-constraint reference sampler; one batch per schedule entry.

    Each of n_chains independent replicas carries one walker per epsilon
    level.  Walkers move on the symplectic group by Cayley steps (leaving
    the flat-measure-with-symplectic-delta, i.e. Haar, stationary) against
    the Gaussian marginal kernel of width eps/3, and adjacent levels
    exchange states with the standard tempering test.  burn_in and thinning
    count ladder sweeps.  Emitted covariances are exactly pure (the walker
    never leaves the group) and are filtered to constraint residual <= eps.
    """
    if config.method != "ambient-soft":
        raise ValueError("config.method must be 'ambient-soft'")
    spec = config.spec
    n = spec.n_modes
    chat = build_constraint_matrix(spec)
    om = build_omega(n)
    rows = _constraint_rows(spec)
    tri = np.triu_indices(2 * n)

    ladder = list(config.epsilon_schedule)
    widths = [eps / 3.0 for eps in ladder]
    betas = [1.0 / (2.0 * w * w) for w in widths]
    n_lev = len(ladder)

    seeds = np.random.SeedSequence(config.seed).spawn(config.n_chains)
    per_chain = -(-config.n_samples // config.n_chains)

    level_samples = [[] for _ in ladder]
    level_chain = [[] for _ in ladder]
    level_symp = [[] for _ in ladder]
    skipped = [0] * n_lev
    acc_rates = []
    swap_rates = []
    for chain_idx in range(config.n_chains):
        rng = np.random.default_rng(seeds[chain_idx])
        start = feasible_start(spec, rng)
        # disperse the replica start along the constraint set
        for _ in range(100):
            x = _random_lie_element(rng, om, 0.5)
            s_new, ok = _retract(_cayley(x) @ start, chat, rows, om, tri)
            if ok:
                start = s_new
        walkers = [start.copy() for _ in ladder]
        energies = [_marginal_energy(s, chat, rows) for s in walkers]
        sigmas = [1.2 * w for w in widths]
        acc = [0] * n_lev
        tot = [0] * n_lev
        swap_acc = swap_tot = 0
        emitted = 0
        sweep = 0
        while emitted < per_chain:
            sweep += 1
            for i in range(n_lev):
                prop = _cayley(_random_lie_element(rng, om, sigmas[i])) @ walkers[i]
                e_prop = _marginal_energy(prop, chat, rows)
                tot[i] += 1
                if math.log(rng.random()) < -betas[i] * (e_prop - energies[i]):
                    walkers[i], energies[i] = prop, e_prop
                    acc[i] += 1
                if sweep < 2000 and tot[i] % 50 == 0:
                    rate = acc[i] / tot[i]
                    if rate > 0.4:
                        sigmas[i] *= 1.2
                    elif rate < 0.2:
                        sigmas[i] /= 1.2
            if sweep % 2 == 0:
                off = (sweep // 2) % 2
                for i in range(off, n_lev - 1, 2):
                    gap = (betas[i] - betas[i + 1]) * (energies[i + 1] - energies[i])
                    swap_tot += 1
                    if math.log(rng.random()) < -gap:
                        walkers[i], walkers[i + 1] = walkers[i + 1], walkers[i]
                        energies[i], energies[i + 1] = energies[i + 1], energies[i]
                        swap_acc += 1
            if sweep % 256 == 0:
                for i in range(n_lev):
                    walkers[i] = symplectify(walkers[i])
                    energies[i] = _marginal_energy(walkers[i], chat, rows)
            if sweep > config.burn_in and sweep % config.thinning == 0:
                for i in range(n_lev):
                    c = walkers[i] @ walkers[i].T
                    if constraint_residual(c, chat, spec) <= ladder[i]:
                        level_samples[i].append(c)
                        level_symp[i].append(symplectic_residual(walkers[i]))
                        level_chain[i].append(chain_idx)
                        if i == n_lev - 1:
                            emitted += 1
                    else:
                        skipped[i] += 1
            if sweep > config.burn_in + 400 * config.thinning * per_chain:
                raise RuntimeError(
                    "ambient sampler cannot fill the coldest level; "
                    "loosen the epsilon schedule or raise thinning"
                )
        acc_rates.append([a / max(t, 1) for a, t in zip(acc, tot)])
        swap_rates.append(swap_acc / max(swap_tot, 1))

    mean_acc = np.mean(np.array(acc_rates), axis=0)
    overall = float(np.mean(mean_acc))
    if not 0.05 <= overall <= 0.7:
        raise RuntimeError(
            f"ambient acceptance rate {overall:.3f} outside [0.05, 0.7]; "
            f"per-level rates {np.round(mean_acc, 3).tolist()}"
        )
    batches = []
    for i, eps in enumerate(ladder):
        batches.append(
            _finalize_batch(
                np.array(level_samples[i]),
                np.array(level_chain[i]),
                np.array(level_symp[i]),
                spec,
                chat,
                active_tolerance=eps,
                metadata={
                    "method": "ambient-soft",
                    "config_hash": config_hash(config),
                    "seed": config.seed,
                    "acceptance_rate": float(mean_acc[i]),
                    "swap_rate": float(np.mean(swap_rates)),
                    "kernel_width": widths[i],
                    "skipped_over_tolerance": skipped[i],
                    "spec": spec_to_dict(spec),
                },
                epsilon=eps,
            )
        )
    return batches


# ---------------------------------------------------------------------------
# observable estimation


@dataclass(frozen=True)
class ObservableStat:
    observable: str
    x: int | None
    mean: float
    stderr: float
    ess: float
    n: int


def _block_stats(values: np.ndarray, chain_ids: np.ndarray, weights: np.ndarray):
    """Weighted mean with batch-means standard error and effective sample size.

    With three or more chains the blocks are the per-chain means, so slow
    modes that de-correlate only across independent chains still inflate the
    reported error; otherwise contiguous within-chain blocks are used.
    """
    mean = float(np.average(values, weights=weights))
    chains = np.unique(chain_ids)
    block_means = []
    if len(chains) >= 3:
        block_means = [np.mean(values[chain_ids == c]) for c in chains]
    else:
        for c in chains:
            v = values[chain_ids == c]
            n_blocks = min(16, max(1, len(v) // 8))
            block_means += [np.mean(p) for p in np.array_split(v, n_blocks) if len(p)]
    block_means = np.array(block_means)
    n = len(values)
    if len(block_means) < 2 or np.var(values) == 0.0:
        return mean, 0.0, float(n)
    sem = float(np.std(block_means, ddof=1) / math.sqrt(len(block_means)))
    if sem == 0.0:
        return mean, 0.0, float(n)
    ess = float(min(n, np.var(values, ddof=1) / sem**2))
    return mean, sem, ess


def sample_values(batch: SampleBatch, subsystem, observable: str, x: int | None = None):
    """Per-sample observable values on a mode subset."""
    out = np.empty(len(batch))
    for k in range(len(batch)):
        c_a = restrict(batch.samples[k], subsystem)
        if observable == "renyi":
            out[k] = renyi_trace_mixed(c_a, x)
        elif observable == "entropy":
            out[k] = entropy_mixed(c_a)
        else:
            raise ValueError(f"unknown observable {observable!r}")
    return out


def estimate_observables(
    batch: SampleBatch, subsystem, x_list=(2,), min_ess: float = 10.0
) -> list[ObservableStat]:
    """Means, batch-means errors, and effective sample sizes for one batch."""
    if len(batch) == 0:
        raise ValueError("empty sample batch")
    stats = []
    for x in x_list:
        v = sample_values(batch, subsystem, "renyi", int(x))
        mean, sem, ess = _block_stats(v, batch.chain_ids, batch.weights)
        stats.append(ObservableStat("renyi", int(x), mean, sem, ess, len(batch)))
    v = sample_values(batch, subsystem, "entropy")
    mean, sem, ess = _block_stats(v, batch.chain_ids, batch.weights)
    stats.append(ObservableStat("entropy", None, mean, sem, ess, len(batch)))
    worst = min(s.ess for s in stats)
    if worst < min_ess:
        raise ValueError(
            f"effective sample size {worst:.1f} below {min_ess}; "
            "increase n_samples or thinning"
        )
    return stats


def richardson_pair(eps1, f1, s1, eps2, f2, s2):
    """Extrapolate an O(eps^2)-biased pair of estimates to eps -> 0."""
    c = eps2**2 / (eps1**2 - eps2**2)
    f0 = f2 + c * (f2 - f1)
    var = ((1.0 + c) * s2) ** 2 + (c * s1) ** 2
    return float(f0), float(math.sqrt(var))


def ambient_observables(
    batches: list[SampleBatch], subsystem, x_list=(2,), min_ess: float = 10.0
):
    """Per-eps observable table plus Richardson extrapolation to eps -> 0.

    Returns (extrapolated stats list, per-eps table dict).  The last two
    schedule entries feed the extrapolation.
    """
    if len(batches) < 2:
        raise ValueError("need at least two epsilon batches to extrapolate")
    per_eps = [
        (b.epsilon, estimate_observables(b, subsystem, x_list, min_ess)) for b in batches
    ]
    (e1, stats1), (e2, stats2) = per_eps[-2], per_eps[-1]
    extrapolated = []
    for s1, s2 in zip(stats1, stats2):
        f0, sem0 = richardson_pair(e1, s1.mean, s1.stderr, e2, s2.mean, s2.stderr)
        extrapolated.append(
            ObservableStat(s1.observable, s1.x, f0, sem0, min(s1.ess, s2.ess), s2.n)
        )
    table = {
        "per_epsilon": [
            {
                "epsilon": eps,
                "stats": [vars(s) for s in stats],
            }
            for eps, stats in per_eps
        ]
    }
    return extrapolated, table


def mode_pair_correlation(batch: SampleBatch, i: int, j: int) -> dict:
    """Distribution summary of the cross-correlation block norm ||C_ij||_F."""
    if i == j:
        raise ValueError("need two distinct modes")
    windows = batch.metadata.get("spec", {}).get("windows")
    if windows is not None:
        start = 0
        for w in windows:
            end = start + len(w)
            if start <= i < end and start <= j < end:
                raise ValueError(
                    f"modes {i} and {j} share a window; their correlation is constrained"
                )
            start = end
    norms = np.empty(len(batch))
    for k in range(len(batch)):
        block = batch.samples[k][2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
        norms[k] = np.linalg.norm(block)
    return {
        "n": len(batch),
        "mean": float(np.mean(norms)),
        "std": float(np.std(norms)),
        "median": float(np.median(norms)),
        "min": float(np.min(norms)),
        "max": float(np.max(norms)),
    }


# ---------------------------------------------------------------------------
# persistence


def save_batch(batch: SampleBatch, outdir, prefix: str = "batch") -> list[Path]:
    """Write a batch as metadata JSON + .npy covariance dump + residual CSV.

    The .npy file holds the (n, 2N, 2N) covariance array row-major with the
    standard NumPy header; the CSV lists per-sample residuals.  Outputs are
    byte-for-byte reproducible for identical (config, seed).
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    meta_path = outdir / f"{prefix}_meta.json"
    npy_path = outdir / f"{prefix}_samples.npy"
    csv_path = outdir / f"{prefix}_residuals.csv"
    meta = dict(batch.metadata)
    meta["epsilon"] = batch.epsilon
    meta["shape"] = list(batch.samples.shape)
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    np.save(npy_path, batch.samples)
    lines = ["index,chain,constraint_residual,symplectic_residual,purity_residual,weight"]
    for k in range(len(batch)):
        lines.append(
            f"{k},{int(batch.chain_ids[k])},{batch.constraint_residuals[k]:.6e},"
            f"{batch.symplectic_residuals[k]:.6e},{batch.purity_residuals[k]:.6e},"
            f"{batch.weights[k]:.6e}"
        )
    csv_path.write_text("\n".join(lines) + "\n")
    return [meta_path, npy_path, csv_path]


def write_stats_csv(stats: list[ObservableStat], path) -> None:
    lines = ["observable,x,mean,stderr,ess,n"]
    for s in stats:
        xs = "" if s.x is None else str(s.x)
        lines.append(f"{s.observable},{xs},{s.mean:.12g},{s.stderr:.12g},{s.ess:.6g},{s.n}")
    Path(path).write_text("\n".join(lines) + "\n")
