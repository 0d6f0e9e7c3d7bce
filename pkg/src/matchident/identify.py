"""Rationalizability verdicts and surplus identification from observed matchings.

An observed matching is rationalizable when it maximizes total surplus for
some nonseparable surplus matrix.  Geometrically this happens exactly when
the matching sits on the boundary of the matching polytope: an interior
matching is optimal only for separable surpluses, which value every
matching the same.  ``check_rationalizable`` returns the verdict together
with an explicit witness surplus and the verification results.

When a point verdict is too brittle (real data never sits exactly on a
face), identification proceeds through an entropy: the observed matching
is read as the optimizer of ``<mu, phi> - I(mu)``, which pins the surplus
down to ``grad I(mu_hat)`` modulo separable terms.  ``identify_entropy``
inverts any of the supported entropies this way, and ``rationalize_gauge``
does the geometric version, scaling the matching to the boundary and
reading the surplus off the binding face.  ``simulate_market`` closes the
loop for finite-sample experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    CLAMP_TOL,
    Margins,
    MarketError,
    Matching,
    Surplus,
    ValidationError,
    decompose_separable,
    is_nonseparable,
)
from .entropy import EntropyModel, grad_entropy, solve_regularized
from .lp import is_maximizer
from .polytope import GaugeResult, gauge, is_boundary

__all__ = [
    "WITNESS_ZERO_TOL",
    "RationalizabilityChecks",
    "RationalizabilityReport",
    "IdentifiedSurplus",
    "check_rationalizable",
    "rationalize_gauge",
    "identify_entropy",
    "simulate_market",
]

#: Cells with at most this much mass count as unmatched for the witness.
WITNESS_ZERO_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class RationalizabilityChecks:
    """Individual verification results backing a rationalizability verdict.

    ``boundary`` is the geometric test; ``maximizer`` records that the
    observed matching attains the LP maximum under the witness surplus;
    ``nonseparable`` that the witness actually discriminates.  For a
    rationalizable matching all three hold; for an interior one all fail
    (there is no witness to verify).
    """

    boundary: bool
    maximizer: bool
    nonseparable: bool


@dataclass(frozen=True, eq=False)
class RationalizabilityReport:
    """Verdict of ``check_rationalizable``.

    ``witness`` is a surplus for which the observed matching is optimal
    (present exactly when rationalizable).  ``t_star`` and ``mu_star``
    describe the ray from the barycenter through the observation; they are
    ``None`` when the observation *is* the barycenter, where the ray is
    undefined.
    """

    rationalizable: bool
    witness: Surplus | None
    t_star: float | None
    mu_star: Matching | None
    checks: RationalizabilityChecks

    def __post_init__(self) -> None:
        if self.rationalizable != self.checks.boundary:
            raise ValidationError(
                "report verdict must agree with the boundary check"
            )
        if self.rationalizable and self.witness is None:
            raise ValidationError("rationalizable verdict requires a witness")


@dataclass(frozen=True, eq=False)
class IdentifiedSurplus:
    """A surplus recovered from an observed matching.

    ``phi_raw`` is the representative produced by the chosen route (an
    entropy gradient, or the scaled binding-face indicator); since the data
    only ever pin the surplus down modulo separable terms,
    ``phi_canonical`` is the doubly centered residual of ``phi_raw`` under
    the observation's margins, which is the route-independent part.
    ``diagnostics`` is a map of named reals recording the verification
    quantities of the route taken.
    """

    phi_raw: Surplus
    phi_canonical: Surplus
    entropy_kind: EntropyModel | str
    diagnostics: dict[str, float]


def check_rationalizable(mu_hat: Matching) -> RationalizabilityReport:
    """Decide whether an observed matching is rationalizable, with proof.

    The verdict is the boundary test.  On the boundary an explicit witness
    is constructed: the surplus equal to -1 on the unmatched cells (mass at
    most ``WITNESS_ZERO_TOL``) and 0 elsewhere.  Any feasible matching
    scores at most 0 against it and the observation attains 0, so the
    observation is optimal; the report also records the LP verification of
    that optimality and the nonseparability of the witness.
    """
    margins = mu_hat.margins
    boundary = is_boundary(mu_hat)
    bary = np.outer(margins.p, margins.q)
    if np.abs(mu_hat.mu - bary).max() <= CLAMP_TOL:
        t_star, mu_star = None, None
    else:
        ray = gauge(mu_hat)
        t_star, mu_star = ray.t_star, ray.mu_star
    if not boundary:
        return RationalizabilityReport(
            rationalizable=False,
            witness=None,
            t_star=t_star,
            mu_star=mu_star,
            checks=RationalizabilityChecks(False, False, False),
        )
    witness = Surplus(np.where(mu_hat.mu <= WITNESS_ZERO_TOL, -1.0, 0.0))
    checks = RationalizabilityChecks(
        boundary=True,
        maximizer=is_maximizer(witness, mu_hat),
        nonseparable=is_nonseparable(witness, margins),
    )
    return RationalizabilityReport(
        rationalizable=True,
        witness=witness,
        t_star=t_star,
        mu_star=mu_star,
        checks=checks,
    )


def rationalize_gauge(mu_hat: Matching) -> tuple[GaugeResult, IdentifiedSurplus]:
    """Identify a surplus by scaling the observation to the boundary.

    The ray from the barycenter through ``mu_hat`` exits the polytope at
    stretch ``t_star`` on the face where the binding cells hit zero.  The
    face normal, scaled so that its inner product with the ray direction
    ``mu_hat - bary`` is one, is a surplus ``phi_star`` for which the exit
    point ``mu_star`` is optimal; ``t_star * phi_star`` is then the
    gradient representative of the gauge entropy at ``mu_hat``.  A boundary
    observation is its own exit point (``t_star = 1``).

    Raises ``DegenerateRayError`` when ``mu_hat`` is the barycenter.
    """
    margins = mu_hat.margins
    ray = gauge(mu_hat)
    bary = np.outer(margins.p, margins.q)
    indicator = np.zeros(mu_hat.mu.shape)
    for x, y in ray.binding_cells:
        indicator[x, y] = 1.0
    direction = mu_hat.mu - bary
    normalizer = float(np.sum(indicator * direction))
    if normalizer >= 0.0:
        # Binding cells shrink along the ray by construction, so this
        # can only happen through an internal error.
        raise MarketError(
            f"degenerate binding-face normalization ({normalizer!r})"
        )
    phi_star = Surplus(indicator / normalizer + 0.0)  # + 0.0 clears negative zeros
    phi_raw = Surplus(ray.t_star * phi_star.phi)
    parts = decompose_separable(phi_raw, margins)
    diagnostics = {
        "t_star": ray.t_star,
        "normalization": float(np.sum(phi_star.phi * direction)),
        "maximizer_verified": float(is_maximizer(phi_star, ray.mu_star)),
        "nonseparable": float(is_nonseparable(phi_raw, margins)),
    }
    identified = IdentifiedSurplus(
        phi_raw=phi_raw,
        phi_canonical=Surplus(parts.residual),
        entropy_kind="gauge-geometric",
        diagnostics=diagnostics,
    )
    return ray, identified


def _log_cross_differences(mu: np.ndarray) -> np.ndarray:
    """All ``log mu[x,y] + log mu[x',y'] - log mu[x,y'] - log mu[x',y]``."""
    lm = np.log(mu)
    return (
        lm[:, None, :, None]
        + lm[None, :, None, :]
        - lm[:, None, None, :]
        - lm[None, :, :, None]
    )


def identify_entropy(mu_hat: Matching, model: EntropyModel) -> IdentifiedSurplus:
    """Recover the surplus for which ``mu_hat`` solves the regularized problem.

    The first-order condition of ``max <mu, phi> - I(mu)`` identifies
    ``phi`` as ``grad I(mu_hat)`` up to separable terms, so the closed-form
    gradient is the raw answer and its doubly centered residual the
    canonical one.  Gradient domain errors (boundary point, kink,
    barycenter) propagate and name the offending cell.

    For the shannon entropy the canonical part is, equivalently, the matrix
    of log cross-difference contrasts of the observation, and the
    diagnostics report them directly.
    """
    margins = mu_hat.margins
    phi_raw = grad_entropy(model, mu_hat)
    parts = decompose_separable(phi_raw, margins)
    diagnostics: dict[str, float] = {
        "nonseparable": float(is_nonseparable(phi_raw, margins)),
    }
    if model.kind == "shannon":
        crosses = _log_cross_differences(mu_hat.mu)
        diagnostics["max_abs_cross_difference"] = float(np.abs(crosses).max())
        if mu_hat.mu.shape == (2, 2):
            diagnostics["cross_difference"] = float(crosses[0, 1, 0, 1])
    elif model.kind == "gauge":
        diagnostics["t_star"] = gauge(mu_hat).t_star
    return IdentifiedSurplus(
        phi_raw=phi_raw,
        phi_canonical=Surplus(parts.residual),
        entropy_kind=model,
        diagnostics=diagnostics,
    )


def simulate_market(
    phi: Surplus, margins: Margins, households: int, seed: int
) -> tuple[Matching, Matching]:
    """Simulate a finite market whose population matching is shannon-optimal.

    Solves the shannon-regularized problem for the population matching,
    then draws ``households`` pairings from it multinomially.  Returns the
    population matching and the empirical one; the empirical margins are
    recomputed from the draw (they differ from the population margins and
    may contain zero-mass types for small samples).

    The draw is reproducible: the same ``seed`` gives the same sample.
    """
    if households < 1:
        raise ValidationError(f"households must be at least 1, got {households}")
    _, report = solve_regularized(EntropyModel.shannon(), phi, margins)
    mu_true = report.mu
    weights = mu_true.mu.ravel()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(int(households), weights / weights.sum())
    empirical = counts.reshape(mu_true.mu.shape).astype(float) / float(households)
    empirical_margins = Margins(
        empirical.sum(axis=1), empirical.sum(axis=0), allow_zero_mass=True
    )
    return mu_true, Matching(empirical, empirical_margins)
