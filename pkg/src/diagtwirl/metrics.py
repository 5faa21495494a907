"""Design-quality metrics: analytic error brackets, the trace-norm certificate
obtained from a single entangled probe state, the frame potential, and
convergence tables.

The exact diamond-norm distance between the repeated-alternation twirl and
the Haar twirl is bracketed, not computed: the lower edge is the exact trace
norm of the channel difference on an entangled-pair probe (available in
closed form and cross-checked numerically here) and the upper edge is twice
the residual mixture weight.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .linalg import Dim, SizeError, pair_basis, trace_norm
from .moments import MomentMap, g_haar, p_ell, r_pow_closed

__all__ = [
    "DesignErrorBracket",
    "theorem1_bounds",
    "lower_exact_value",
    "proof_bracket",
    "lower_certificate",
    "frame_potential",
    "ConvergenceRow",
    "convergence_table",
]


@dataclass(frozen=True)
class DesignErrorBracket:
    """Certified interval for the design error after ``ell`` repetitions.

    ``lower_theorem``/``upper_theorem`` are the rounded analytic bounds,
    ``lower_exact`` the exact probe-state trace norm and ``upper_proof``
    twice the residual weight; the chain lower_theorem <= lower_exact <=
    upper_proof <= upper_theorem always holds and is asserted exactly at
    construction.
    """

    d: int
    ell: int
    lower_theorem: float
    upper_theorem: float
    lower_exact: float
    upper_proof: float


def _theorem1_bounds_exact(dim: Dim, ell: int) -> tuple[Fraction, Fraction]:
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    d = dim.d
    scale = Fraction(2, d**ell)
    return scale * (1 - Fraction(1, d - 1)), scale * (1 + Fraction(2, d - 1))


def theorem1_bounds(dim: Dim, ell: int) -> tuple[float, float]:
    """Analytic lower and upper design-error bounds, (2/d**ell)(1 -+ ...)."""
    lo, hi = _theorem1_bounds_exact(dim, ell)
    return float(lo), float(hi)


def _lower_exact_fraction(dim: Dim, ell: int) -> Fraction:
    d = dim.d
    return Fraction(2, d**ell) - Fraction(
        2 * (d ** (ell + 1) + d**ell - 2), d ** (2 * ell) * (d**2 - 1)
    )


def lower_exact_value(dim: Dim, ell: int) -> float:
    """Exact trace norm of the channel difference on an entangled-pair probe."""
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    return float(_lower_exact_fraction(dim, ell))


def proof_bracket(dim: Dim, ell: int) -> DesignErrorBracket:
    """Assemble the full bracket and assert its ordering in exact arithmetic."""
    lo_thm, hi_thm = _theorem1_bounds_exact(dim, ell)
    lo_exact = _lower_exact_fraction(dim, ell)
    hi_proof = 2 * p_ell(dim, ell)
    if not (lo_thm <= lo_exact <= hi_proof <= hi_thm):
        raise AssertionError(
            f"bracket chain violated at d={dim.d}, ell={ell}: "
            f"{lo_thm} <= {lo_exact} <= {hi_proof} <= {hi_thm}"
        )
    return DesignErrorBracket(
        d=dim.d,
        ell=ell,
        lower_theorem=float(lo_thm),
        upper_theorem=float(hi_thm),
        lower_exact=float(lo_exact),
        upper_proof=float(hi_proof),
    )


def lower_certificate(
    moment_map: MomentMap, dim: Dim, probe_pair: tuple[int, int] = (1, 0)
) -> float:
    """Trace-norm design-error certificate from one entangled probe state.

    Evaluates ``|| map(P) - haar_twirl(P) ||_1`` on the symmetric pair
    projector P for ``probe_pair = (i0, j0)``; for the closed-form repeated
    map this equals ``lower_exact_value`` independently of the chosen pair.
    Raises ``ValueError`` when the map visibly fails to preserve the probe
    trace.
    """
    i0, j0 = probe_pair
    if not (dim.d > i0 > j0 >= 0):
        raise ValueError(f"probe pair must satisfy d > i0 > j0 >= 0, got {probe_pair}")
    probe_vec = next(
        v
        for lbl, v in pair_basis(dim)
        if lbl.kind == "sym" and lbl.i == i0 and lbl.j == j0
    )
    probe = np.outer(probe_vec, probe_vec.conj())
    image = moment_map(probe)
    if abs(np.trace(image) - 1.0) > 1e-10:
        raise ValueError(
            f"{moment_map.label}: probe trace drifted to {np.trace(image):.3e}, "
            "map is not trace preserving"
        )
    return trace_norm(image - g_haar(dim)(probe))


def frame_potential(moment_map: MomentMap) -> float:
    """Second frame potential: squared Hilbert-Schmidt norm of the twirl matrix.

    Streams over matrix-unit columns instead of materialising the full
    superoperator.  For a two-fold ensemble twirl this equals the ensemble
    average of |tr(U^dag V)|**4; it is >= 2, with equality exactly for a
    unitary 2-design.
    """
    dim = moment_map.dim
    if dim.d > 8:
        raise SizeError(f"frame potential needs the full matrix envelope d <= 8, got {dim.d}")
    bmat = np.column_stack([v for _, v in pair_basis(dim)]).real
    d2 = dim.d**2
    total = 0.0
    for p in range(d2):
        for q in range(d2):
            image = moment_map.apply(np.outer(bmat[:, p], bmat[:, q]))
            total += float(np.sum(np.abs(image) ** 2))
    return total


@dataclass(frozen=True)
class ConvergenceRow:
    ell: int
    lower_theorem: float
    lower_exact: float
    upper_proof: float
    upper_theorem: float
    frame_potential_excess: float


def convergence_table(n_qubits: int, ell_max: int) -> list[ConvergenceRow]:
    """Bracket values and frame-potential excess for ell = 1 .. ell_max.

    Successive ``lower_exact`` values decay geometrically with ratio
    approaching 1/d.
    """
    if ell_max < 1:
        raise ValueError(f"ell_max must be >= 1, got {ell_max}")
    dim = Dim(n_qubits)
    rows = []
    for ell in range(1, ell_max + 1):
        bracket = proof_bracket(dim, ell)
        excess = frame_potential(r_pow_closed(dim, ell)) - 2.0
        rows.append(
            ConvergenceRow(
                ell=ell,
                lower_theorem=bracket.lower_theorem,
                lower_exact=bracket.lower_exact,
                upper_proof=bracket.upper_proof,
                upper_theorem=bracket.upper_theorem,
                frame_potential_excess=excess,
            )
        )
    return rows
