"""Closed-form Renyi traces, entropies, and the small-subsystem Page slope.

All formulas are functions of symplectic eigenvalues.  A single bosonic mode
with marginal covariance lam * I2 has

    Tr rho^x = 2^x / ((lam+1)^x - (lam-1)^x),        x = 1, 2, 3, ...
    S        = -log 2 + (lam+1)/2 log(lam+1) - (lam-1)/2 log(lam-1)

and a multi-mode Gaussian state factorizes over its symplectic spectrum.
Entropies are in nats; convert with / log(2) for bits if needed.
"""

from __future__ import annotations

import json
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constraints import ConstraintSpec
from .symplectic import restrict, symplectic_spectrum

# symplectic eigenvalues this close to 1 are treated as exactly pure
NU_CLAMP = 1e-8


def renyi_trace_single(lam: float, x: int) -> float:
    """Tr rho^x of a thermal one-mode state with covariance lam * I2."""
    if lam < 1.0:
        raise ValueError(f"marginal eigenvalue must be >= 1, got {lam}")
    if x < 1 or x != int(x):
        raise ValueError(f"power x must be a positive integer, got {x}")
    return renyi_trace_continued(lam, float(x))


def renyi_trace_continued(lam: float, x: float) -> float:
    """Analytic continuation of the Renyi trace to real x > 0.

    Used by the entropy derivative check: the von Neumann entropy is
    -d/dx Tr rho^x at x = 1.
    """
    if lam < 1.0:
        raise ValueError(f"marginal eigenvalue must be >= 1, got {lam}")
    lam = 1.0 if lam <= 1.0 + NU_CLAMP else lam
    if lam == 1.0:
        return 1.0
    # work in logs to stay finite for large lam and x
    la, lb = x * math.log(lam + 1.0), x * math.log(lam - 1.0)
    return math.exp(x * math.log(2.0) - la) / (1.0 - math.exp(lb - la))


def entropy_single(lam: float) -> float:
    """Von Neumann entropy (nats) of a thermal one-mode state."""
    if lam < 1.0:
        raise ValueError(f"marginal eigenvalue must be >= 1, got {lam}")
    if lam <= 1.0 + NU_CLAMP:
        return 0.0
    return (
        -math.log(2.0)
        + 0.5 * (lam + 1.0) * math.log(lam + 1.0)
        - 0.5 * (lam - 1.0) * math.log(lam - 1.0)
    )


def _physical_spectrum(c_a: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    nus = symplectic_spectrum(np.asarray(c_a, dtype=float))
    if np.min(nus) < 1.0 - tol:
        raise ValueError(
            f"unphysical symplectic spectrum (min nu = {np.min(nus):.6g} < 1)"
        )
    return np.where(nus <= 1.0 + NU_CLAMP, 1.0, nus)


def renyi_trace_mixed(c_a: np.ndarray, x: int) -> float:
    """Tr rho^x of a Gaussian state, product over its symplectic spectrum.

    For x = 2 this equals det(C_A)^(-1/2), the Gaussian purity.
    """
    if x < 1 or x != int(x):
        raise ValueError(f"power x must be a positive integer, got {x}")
    nus = _physical_spectrum(c_a)
    return float(np.prod([renyi_trace_continued(nu, float(x)) for nu in nus]))


def entropy_mixed(c_a: np.ndarray) -> float:
    """Von Neumann entropy (nats) of a Gaussian state, sum over the spectrum."""
    nus = _physical_spectrum(c_a)
    return float(sum(entropy_single(nu) for nu in nus))


def finite_n_purity(chat_a: np.ndarray, n_total: int, n_a: int) -> float:
    """Finite-size mean-field purity of an N_A-mode subsystem.

    Evaluates 2^{N_A} (N - N_A - 1)! / (N - 1)! * det((2/N) Chat_A)^(-1/2),
    the mean-field ensemble average before the large-N simplification.  It
    converges to det(Chat_A)^(-1/2) as N grows at fixed N_A.  Factorials are
    evaluated with log-gamma so that very large N stays finite.
    """
    chat_a = np.asarray(chat_a, dtype=float)
    if chat_a.shape != (2 * n_a, 2 * n_a):
        raise ValueError(
            f"subsystem constraint matrix has shape {chat_a.shape}, "
            f"expected {(2 * n_a, 2 * n_a)}"
        )
    if n_a < 1:
        raise ValueError("subsystem must contain at least one mode")
    if n_total <= n_a:
        raise ValueError(f"need N > N_A, got N = {n_total}, N_A = {n_a}")
    sign, logdet = np.linalg.slogdet((2.0 / n_total) * chat_a)
    if sign <= 0:
        raise ValueError("constraint matrix must be positive definite")
    log_val = (
        n_a * math.log(2.0)
        + math.lgamma(n_total - n_a)
        - math.lgamma(n_total)
        - 0.5 * logdet
    )
    return math.exp(log_val)


def page_slope(
    spec: ConstraintSpec, ordering: Sequence[int] | None = None
) -> list[tuple[int, float]]:
    """Initial segment of the Page curve: cumulative marginal entropies.

    Returns (n_a, sum of entropy_single over the first n_a modes) for
    n_a = 0..N, with modes taken in emission (conformal time) order, or in
    the order given by `ordering` (a permutation of mode indices).
    """
    lams = spec.lambdas
    n = len(lams)
    if ordering is None:
        ordering = range(n)
    ordering = list(ordering)
    if sorted(ordering) != list(range(n)):
        raise ValueError(f"ordering must be a permutation of 0..{n - 1}")
    rows = [(0, 0.0)]
    total = 0.0
    for k, mode in enumerate(ordering, start=1):
        total += entropy_single(lams[mode])
        rows.append((k, total))
    return rows


def write_page_slope_csv(rows: list[tuple[int, float]], path) -> None:
    lines = ["n_a,cumulative_entropy_nats"]
    lines += [f"{n_a},{val:.12g}" for n_a, val in rows]
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class EntropyReport:
    """Closed-form predictions for one subsystem of a covariance matrix."""

    subsystem: tuple[int, ...]
    renyi_traces: dict[int, float]
    von_neumann: float
    purity: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "subsystem": list(self.subsystem),
                "renyi_traces": {str(x): v for x, v in self.renyi_traces.items()},
                "von_neumann_nats": self.von_neumann,
                "purity": self.purity,
            },
            indent=2,
            sort_keys=True,
        )


def entropy_report(
    c: np.ndarray, subsystem: Sequence[int], x_values: Sequence[int] = (2, 3, 4)
) -> EntropyReport:
    c_a = restrict(c, subsystem)
    x_values = sorted(set(int(x) for x in x_values) | {2})
    traces = {x: renyi_trace_mixed(c_a, x) for x in x_values}
    return EntropyReport(
        subsystem=tuple(subsystem),
        renyi_traces=traces,
        von_neumann=entropy_mixed(c_a),
        purity=traces[2],
    )
