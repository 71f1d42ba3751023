"""Marginal constraint matrices for the constrained Gaussian ensemble.

A constraint specification groups modes into ordered windows.  Every mode i
carries a target marginal covariance lam_i * I2 (lam_i >= 1), and modes that
share a window are additionally constrained to have vanishing mutual
correlations.  Two scenarios arise:

* scenario I:  every window holds a single mode (only marginals are fixed);
* scenario II: at least one window holds several modes (marginals fixed and
  intra-window correlation blocks forced to zero).

The "hat" projection keeps exactly the window-diagonal blocks of a matrix,
so membership in the ensemble reads hat(S S^T) = Chat.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .symplectic import _check_even_square

SPEC_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ConstraintSpec:
    """Ordered windows of per-mode marginal eigenvalues."""

    windows: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.windows) == 0:
            raise ValueError("constraint spec needs at least one window")
        windows = tuple(tuple(float(v) for v in w) for w in self.windows)
        object.__setattr__(self, "windows", windows)
        for w in windows:
            if len(w) == 0:
                raise ValueError("windows must not be empty")
            for lam in w:
                if lam < 1.0:
                    raise ValueError(f"marginal eigenvalues must be >= 1, got {lam}")

    @property
    def n_modes(self) -> int:
        return sum(len(w) for w in self.windows)

    @property
    def lambdas(self) -> tuple[float, ...]:
        return tuple(lam for w in self.windows for lam in w)

    @property
    def scenario(self) -> str:
        return "I" if all(len(w) == 1 for w in self.windows) else "II"

    def window_slices(self) -> list[tuple[int, int]]:
        """Half-open mode index ranges of the windows, in order."""
        out, start = [], 0
        for w in self.windows:
            out.append((start, start + len(w)))
            start += len(w)
        return out


def scenario_one(lambdas) -> ConstraintSpec:
    """Spec with one mode per window (marginal constraints only)."""
    return ConstraintSpec(windows=tuple((float(lam),) for lam in lambdas))


def build_constraint_matrix(spec: ConstraintSpec) -> np.ndarray:
    """Block-diagonal target matrix: lam_i * I2 per mode, zeros elsewhere.

    Intra-window cross blocks are explicitly zero, which encodes the
    scenario II requirement of uncorrelated modes within a window.
    """
    lams = spec.lambdas
    chat = np.zeros((2 * len(lams), 2 * len(lams)))
    for i, lam in enumerate(lams):
        chat[2 * i, 2 * i] = lam
        chat[2 * i + 1, 2 * i + 1] = lam
    return chat


def window_mask(spec: ConstraintSpec) -> np.ndarray:
    """Boolean mask that is True inside the window-diagonal blocks."""
    n = spec.n_modes
    mask = np.zeros((2 * n, 2 * n), dtype=bool)
    for a, b in spec.window_slices():
        mask[2 * a : 2 * b, 2 * a : 2 * b] = True
    return mask


def hat_projection(c: np.ndarray, spec: ConstraintSpec) -> np.ndarray:
    """Zero every entry outside the window-diagonal blocks (idempotent)."""
    n = _check_even_square(c, "C")
    if n != spec.n_modes:
        raise ValueError(f"matrix has {n} modes but spec describes {spec.n_modes}")
    return np.where(window_mask(spec), c, 0.0)


def constraint_residual(c: np.ndarray, chat: np.ndarray, spec: ConstraintSpec) -> float:
    """Max-abs entry of hat(C) - Chat; zero iff the constraints hold exactly."""
    chat = np.asarray(chat)
    if chat.shape != np.asarray(c).shape:
        raise ValueError(f"shape mismatch: C {np.asarray(c).shape} vs Chat {chat.shape}")
    return float(np.max(np.abs(hat_projection(c, spec) - chat)))


@dataclass(frozen=True)
class HawkingModel:
    """Mode bookkeeping for black hole radiation in Planck units.

    The lifetime is discretized into time windows; during window t the mass
    is m_t = initial_mass - k*t (in Planck masses) and the window holds about
    m_t excited modes at temperature 1/m_t with frequency spacing 1/m_t^2,
    up to order-one constants.
    """

    initial_mass: float
    k: float

    def __post_init__(self):
        if self.initial_mass <= 0:
            raise ValueError("initial_mass must be positive")
        if self.k <= 0:
            raise ValueError("k must be positive")

    @property
    def n_windows(self) -> int:
        """Number of windows with at least one excited mode (m_t >= 1)."""
        if self.initial_mass < 1.0:
            return 0
        return int(math.floor((self.initial_mass - 1.0) / self.k)) + 1

    def window_mass(self, t: int) -> float:
        if t < 0 or t >= self.n_windows:
            raise ValueError(f"window {t} outside lifetime (0..{self.n_windows - 1})")
        return self.initial_mass - self.k * t

    def temperature(self, t: int) -> float:
        return 1.0 / self.window_mass(t)

    def frequency_spacing(self, t: int) -> float:
        return 1.0 / self.window_mass(t) ** 2

    def modes_in_window(self, t: int) -> int:
        return max(1, int(round(self.window_mass(t))))


def hawking_mode_count(model: HawkingModel) -> float:
    """Total number of excited modes over the lifetime, M(0)^2 / (2 k m_P^2).

    Continuum estimate; grows quadratically with the initial mass and is of
    order 1e76 for a solar-mass black hole.
    """
    return model.initial_mass**2 / (2.0 * model.k)


def hawking_constraints(
    model: HawkingModel,
    window_range: tuple[int, int] | None = None,
    form: str = "exp",
) -> ConstraintSpec:
    """Scenario II constraint spec for a range of radiation time windows.

    Mode j of window t is thermal: the default prescription is
    lam = exp(j * spacing_t / T_t) = exp(j / m_t); form="coth" selects the
    standard thermal covariance coth(j * spacing_t / (2 T_t)) instead.
    Modes within a window carry no mutual correlations (zero cross blocks).
    """
    if form not in ("exp", "coth"):
        raise ValueError(f"unknown thermal form {form!r}")
    if window_range is None:
        window_range = (0, model.n_windows)
    lo, hi = window_range
    if not (0 <= lo < hi <= model.n_windows):
        raise ValueError(
            f"window range {window_range} invalid for lifetime of "
            f"{model.n_windows} windows"
        )
    windows = []
    for t in range(lo, hi):
        m_t = model.window_mass(t)
        lams = []
        for j in range(1, model.modes_in_window(t) + 1):
            arg = j * model.frequency_spacing(t) / model.temperature(t)
            lams.append(math.exp(arg) if form == "exp" else 1.0 / math.tanh(0.5 * arg))
        windows.append(tuple(lams))
    return ConstraintSpec(windows=tuple(windows))


def spec_to_dict(spec: ConstraintSpec, hawking: dict | None = None) -> dict:
    doc = {
        "format_version": SPEC_FORMAT_VERSION,
        "scenario": spec.scenario,
        "windows": [list(w) for w in spec.windows],
    }
    if hawking is not None:
        doc["hawking"] = hawking
    return doc


def save_spec(spec: ConstraintSpec, path, hawking: dict | None = None) -> None:
    """Write a constraint spec as a versioned JSON document."""
    Path(path).write_text(json.dumps(spec_to_dict(spec, hawking), indent=2) + "\n")


def load_spec(path) -> ConstraintSpec:
    """Read a constraint spec file, validating version and scenario."""
    doc = json.loads(Path(path).read_text())
    version = doc.get("format_version")
    if version != SPEC_FORMAT_VERSION:
        raise ValueError(
            f"unsupported spec format_version {version!r}; "
            f"expected {SPEC_FORMAT_VERSION}"
        )
    if "windows" in doc:
        spec = ConstraintSpec(windows=tuple(tuple(w) for w in doc["windows"]))
    elif "hawking" in doc:
        h = doc["hawking"]
        model = HawkingModel(initial_mass=h["mass_planck_units"], k=h["k"])
        rng = tuple(h["window_range"]) if "window_range" in h else None
        spec = hawking_constraints(model, rng, form=h.get("form", "exp"))
    else:
        raise ValueError("spec file needs either 'windows' or a 'hawking' preset")
    declared = doc.get("scenario")
    if declared is not None and declared != spec.scenario:
        raise ValueError(
            f"declared scenario {declared!r} does not match windows "
            f"(derived scenario {spec.scenario!r})"
        )
    return spec
