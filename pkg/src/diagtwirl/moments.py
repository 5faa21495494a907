"""Exact second-moment superoperators of random diagonal-unitary ensembles.

The maps here act on operators over the two-copy space H (x) H (dense
``d**2 x d**2`` arrays).  ``g_z_exact``/``g_x_exact`` are the exact two-fold
twirls of random unitaries diagonal in the computational and conjugate
(Hadamard-rotated) bases, ``g_haar`` is the Haar two-fold twirl, and
``r_map`` their alternating composition.  ``r_pow_closed`` evaluates the
closed form of the repeated composition without composing anything, and
``c_ell_map`` the residual channel in the mixture decomposition

    (composition)**ell  =  (1 - p_ell) * haar_twirl  +  p_ell * residual.

Scalar coefficients (``f_coeff``, ``p_ell``, ``q_ell``, recurrence
coefficients) are computed in exact rational arithmetic; floats enter only
at the operator level.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .linalg import Dim, SizeError, canonical_ops, pair_basis, pair_indices, walsh_hadamard

__all__ = [
    "InternalConsistencyError",
    "MomentMap",
    "FCoefficientTable",
    "RecurrenceCoefficients",
    "identity_map",
    "compose",
    "g_z_exact",
    "g_x_exact",
    "g_haar",
    "r_map",
    "f_coeff",
    "p_ell",
    "q_ell",
    "r_pow_closed",
    "recurrence_coeffs",
    "c_ell_map",
    "choi",
    "moment_matrix",
    "multiset_mask",
]

# Full superoperator matrices are d**4 x d**4; beyond d = 8 they do not fit.
MAX_MATRIX_D = 8
# Choi matrices live on (H(x)H)^(x)2, i.e. are d**4 x d**4 as well.
MAX_CHOI_D2 = 64


class InternalConsistencyError(RuntimeError):
    """Two supposedly-equivalent evaluation paths disagreed (implementation bug)."""


@dataclass(frozen=True)
class MomentMap:
    """A linear map on operators over H (x) H.

    ``apply`` takes and returns dense ``d**2 x d**2`` arrays.  All maps
    constructed in this module are trace preserving and unital (they are
    averages of unitary conjugations).  ``mask`` is set for maps that act
    entrywise in the computational product basis (twirls of diagonal
    ensembles) and holds the d**2 x d**2 table of matrix-unit eigenvalues.
    """

    dim: Dim
    label: str
    apply: Callable[[np.ndarray], np.ndarray]
    mask: np.ndarray | None = None

    def __call__(self, operator: np.ndarray) -> np.ndarray:
        operator = np.asarray(operator, dtype=complex)
        d2 = self.dim.d**2
        if operator.shape != (d2, d2):
            raise ValueError(
                f"{self.label}: expected operator of shape ({d2}, {d2}), got {operator.shape}"
            )
        return self.apply(operator)


def identity_map(dim: Dim) -> MomentMap:
    return MomentMap(dim=dim, label="identity", apply=lambda x: x.copy())


def compose(*maps: MomentMap) -> MomentMap:
    """Composition of maps, rightmost applied first."""
    if not maps:
        raise ValueError("compose requires at least one map")
    dim = maps[0].dim
    if any(m.dim != dim for m in maps):
        raise ValueError("compose: dimension mismatch")

    def apply(x: np.ndarray) -> np.ndarray:
        for m in reversed(maps):
            x = m.apply(x)
        return x

    label = " o ".join(m.label for m in maps)
    return MomentMap(dim=dim, label=label, apply=apply)


def multiset_mask(dim: Dim) -> np.ndarray:
    """Matrix-unit eigenvalue table of the exact Z-diagonal twirl.

    Entry [(i,j), (k,l)] is 1 exactly when the multisets {i,j} and {k,l}
    coincide, which is the surviving-phase condition for independent uniform
    phases, and 0 otherwise.
    """
    d = dim.d
    comp = np.arange(d * d)
    i, j = comp // d, comp % d
    same = (i[:, None] == i[None, :]) & (j[:, None] == j[None, :])
    swapped = (i[:, None] == j[None, :]) & (j[:, None] == i[None, :])
    return (same | swapped).astype(float)


def _mask_map(dim: Dim, mask: np.ndarray, label: str) -> MomentMap:
    return MomentMap(dim=dim, label=label, apply=lambda x: mask * x, mask=mask)


def g_z_exact(dim: Dim) -> MomentMap:
    """Exact two-fold twirl of a random Z-diagonal unitary (entrywise mask)."""
    return _mask_map(dim, multiset_mask(dim), "z-diagonal twirl")


def g_x_exact(dim: Dim) -> MomentMap:
    """Exact two-fold twirl of a random X-diagonal unitary.

    The X-diagonal ensemble is the Hadamard conjugate of the Z-diagonal one,
    so the twirl is the Z twirl sandwiched between Hadamard rotations on
    both copies.
    """
    w = walsh_hadamard(dim)
    w2 = np.kron(w, w)
    mask = multiset_mask(dim)

    def apply(x: np.ndarray) -> np.ndarray:
        return w2 @ (mask * (w2 @ x @ w2)) @ w2

    return MomentMap(dim=dim, label="x-diagonal twirl", apply=apply)


def g_haar(dim: Dim) -> MomentMap:
    """Haar two-fold twirl: project onto the symmetric/antisymmetric sectors."""
    ops = canonical_ops(dim)
    psym, panti = ops.Psym, ops.Panti
    pisym, pianti = ops.PIsym, ops.PIanti

    def apply(x: np.ndarray) -> np.ndarray:
        return np.einsum("ij,ji->", psym, x) * pisym + np.einsum("ij,ji->", panti, x) * pianti

    return MomentMap(dim=dim, label="haar twirl", apply=apply)


def r_map(dim: Dim) -> MomentMap:
    """One alternation step: Z twirl, then X twirl, then Z twirl."""
    gz = g_z_exact(dim)
    gx = g_x_exact(dim)

    def apply(x: np.ndarray) -> np.ndarray:
        return gz.apply(gx.apply(gz.apply(x)))

    return MomentMap(dim=dim, label="zxz step", apply=apply)


# ---------------------------------------------------------------------------
# The pair-overlap coefficient table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FCoefficientTable:
    """Overlap coefficients between entangled-pair projectors under the twirl.

    ``values[r][c]`` is the exact rational coefficient coupling source pair
    ``pairs[r]`` to target pair ``pairs[c]``; every value is 0 or 2/d, rows
    sum to 1, and the table is symmetric and idempotent under convolution.
    """

    d: int
    pairs: tuple[tuple[int, int], ...]
    values: tuple[tuple[Fraction, ...], ...]

    def pair_index(self, i: int, j: int) -> int:
        return self.pairs.index((i, j))

    def value(self, i: int, j: int, k: int, l: int) -> Fraction:
        return self.values[self.pair_index(i, j)][self.pair_index(k, l)]

    def as_float_matrix(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.values])


def f_coeff(dim: Dim) -> FCoefficientTable:
    """Compute the pair-coupling table by the literal sign sum, exactly.

    For each source pair (i,j) and target (k,l) the value is
    ``2/d**3 * (sum_a s(a,i) s(a,j) s(a,k) s(a,l))**2`` with s the +-1 sign
    pattern of the Walsh-Hadamard transform.  The sum collapses to d times
    the indicator of ``i^j == k^l``; both evaluations are carried out in
    integer arithmetic and cross-checked before the table is returned.
    """
    d = dim.d
    pairs = tuple(pair_indices(dim))
    # Integer sign matrix: s[a, i] = (-1)**popcount(a & i).
    alphas = np.arange(d)
    ands = alphas[:, None] & alphas[None, :]
    parity = np.zeros_like(ands)
    v = ands.copy()
    while np.any(v):
        parity ^= v & 1
        v >>= 1
    signs = 1 - 2 * parity  # entries +-1, dtype int

    rows: list[tuple[Fraction, ...]] = []
    denom = d**3
    for i, j in pairs:
        row: list[Fraction] = []
        src = signs[:, i] * signs[:, j]
        for k, l in pairs:
            total = int(np.sum(src * signs[:, k] * signs[:, l]))
            value = Fraction(2 * total * total, denom)
            xor_value = Fraction(2, d) if (i ^ j) == (k ^ l) else Fraction(0)
            if value != xor_value:
                raise InternalConsistencyError(
                    f"pair-coupling value mismatch at ({i},{j}),({k},{l}): "
                    f"sign sum gives {value}, parity-class rule gives {xor_value}"
                )
            row.append(value)
        rows.append(tuple(row))
    return FCoefficientTable(d=d, pairs=pairs, values=tuple(rows))


def p_ell(dim: Dim, ell: int) -> Fraction:
    """Mixture weight of the residual channel after ``ell`` alternation steps."""
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    d = dim.d
    return Fraction(d ** (ell + 1) + d**ell - 2, d ** (2 * ell) * (d - 1))


def q_ell(dim: Dim, ell: int) -> Fraction:
    """Weight of the diagonal-pair state in the closed form for symmetric pairs."""
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    d = dim.d
    return Fraction(2 * (d**ell - 1), d ** (2 * ell) * (d - 1))


def r_pow_closed(dim: Dim, ell: int) -> MomentMap:
    """Closed form of ``ell`` repetitions of the alternation step.

    The repeated map annihilates every off-diagonal matrix unit of the pair
    basis and sends the diagonal units to explicit combinations of the
    canonical states, so its action reduces to reading off the pair-diagonal
    of the input and reassembling three states plus two coefficient-weighted
    projector sums.
    """
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    d = dim.d
    ops = canonical_ops(dim)
    basis = pair_basis(dim)
    b_sym = np.column_stack([v for lbl, v in basis if lbl.kind == "sym"]).real
    b_anti = np.column_stack([v for lbl, v in basis if lbl.kind == "anti"]).real
    diag_idx = np.arange(d) * (d + 1)
    fmat = f_coeff(dim).as_float_matrix()

    w_sym2 = 1.0 - float(Fraction(1, d ** (2 * ell)))  # weight of PIsym for diag units
    w_lam2 = float(Fraction(1, d ** (2 * ell)))
    w_sym1 = 1.0 - float(p_ell(dim, ell))
    w_lam1 = float(q_ell(dim, ell))
    w_anti = 1.0 - float(Fraction(1, d**ell))
    w_f = float(Fraction(1, d**ell))
    pisym, pianti, lam0 = ops.PIsym, ops.PIanti, ops.Lam0

    def apply(x: np.ndarray) -> np.ndarray:
        x0 = np.sum(x[diag_idx, diag_idx])
        u_sym = np.einsum("ip,ij,jp->p", b_sym, x, b_sym)
        u_anti = np.einsum("ip,ij,jp->p", b_anti, x, b_anti)
        s_sym, s_anti = np.sum(u_sym), np.sum(u_anti)
        out = (
            (x0 * w_sym2 + s_sym * w_sym1) * pisym
            + (x0 * w_lam2 + s_sym * w_lam1) * lam0
            + (s_anti * w_anti) * pianti
        )
        out += w_f * ((b_sym * (fmat @ u_sym)) @ b_sym.T)
        out += w_f * ((b_anti * (fmat @ u_anti)) @ b_anti.T)
        return out

    return MomentMap(dim=dim, label=f"zxz step ^{ell} (closed form)", apply=apply)


@dataclass(frozen=True)
class RecurrenceCoefficients:
    """Expansion coefficients of the repeated map on entangled-pair projectors.

    ``a_plus``/``b_plus``/``c_plus`` multiply (identity + swap), the
    diagonal-pair projector and the coefficient-weighted symmetric projector
    sum in the image of a symmetric pair projector; ``a_minus``/``c_minus``
    are the analogous weights of (identity - swap) and the antisymmetric
    projector sum.  Note ``b_plus`` is normalised to the unnormalised
    diagonal projector, i.e. it equals ``q_ell / d``.
    """

    a_plus: Fraction
    b_plus: Fraction
    c_plus: Fraction
    a_minus: Fraction
    c_minus: Fraction


def recurrence_coeffs(dim: Dim, ell: int) -> RecurrenceCoefficients:
    """Iterate the one-step recurrences and check them against the closed forms.

    Both evaluation paths are exact rationals; any disagreement signals an
    implementation bug and raises ``InternalConsistencyError``.
    """
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    d = Fraction(dim.d)
    a_p = (1 / d**2) * (1 - 2 / d)
    b_p = 2 / d**3
    c_p = 1 / d
    a_m = 1 / d**2
    c_m = 1 / d
    for _ in range(ell - 1):
        a_p = a_p + (1 / d) * (1 - 1 / d) * b_p + (1 / d**2) * (1 - 2 / d) * c_p
        b_p = b_p / d**2 + 2 * c_p / d**3
        c_p = c_p / d
        a_m = a_m + c_m / d**2
        c_m = c_m / d
    closed = RecurrenceCoefficients(
        a_plus=1 / (d * (d + 1)) - (d ** (ell + 1) + d**ell - 2) / (d ** (2 * ell + 1) * (d**2 - 1)),
        b_plus=2 * (d**ell - 1) / (d ** (2 * ell + 1) * (d - 1)),
        c_plus=1 / d**ell,
        a_minus=(1 - 1 / d**ell) / (d * (d - 1)),
        c_minus=1 / d**ell,
    )
    iterated = RecurrenceCoefficients(a_plus=a_p, b_plus=b_p, c_plus=c_p, a_minus=a_m, c_minus=c_m)
    if iterated != closed:
        raise InternalConsistencyError(
            f"recurrence iteration disagrees with closed forms at d={dim.d}, ell={ell}: "
            f"{iterated} vs {closed}"
        )
    return closed


def c_ell_map(dim: Dim, ell: int) -> MomentMap:
    """Residual channel of the mixture decomposition of the repeated map.

    Built from its displayed closed form: scalar functionals of the input
    (overlap with the diagonal-pair and symmetric-pair projectors, weight in
    the antisymmetric sector, and the per-pair projector overlaps) weight a
    fixed set of output states.  The decomposition identity

        r_pow_closed(ell) == (1 - p_ell) * g_haar + p_ell * c_ell_map(ell)

    holds on the full matrix-unit basis; the channel is unital and CPTP.
    """
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    d = dim.d
    ops = canonical_ops(dim)
    basis = pair_basis(dim)
    b_sym = np.column_stack([v for lbl, v in basis if lbl.kind == "sym"]).real
    b_anti = np.column_stack([v for lbl, v in basis if lbl.kind == "anti"]).real
    diag_idx = np.arange(d) * (d + 1)
    fmat = f_coeff(dim).as_float_matrix()

    pool = d ** (ell + 1) + d**ell - 2
    w00 = float(Fraction(2 * d**ell + d - 3, pool))  # rho0 -> Lam0
    w10 = float(Fraction(2 * (d**ell - 1), pool))  # rho1 -> Lam0
    w01 = float(Fraction(2 * (d**ell - 1), pool))  # rho0 -> Lam1
    w2 = float(Fraction(2 * (d**ell - 1), pool))  # rho2 -> PIanti
    wf = float(Fraction(d**ell * (d - 1), pool))  # pair-projector transfer
    lam0, lam1, pianti = ops.Lam0, ops.Lam1, ops.PIanti

    def apply(x: np.ndarray) -> np.ndarray:
        rho0 = np.sum(x[diag_idx, diag_idx])
        u_sym = np.einsum("ip,ij,jp->p", b_sym, x, b_sym)
        u_anti = np.einsum("ip,ij,jp->p", b_anti, x, b_anti)
        rho1, rho2 = np.sum(u_sym), np.sum(u_anti)
        out = (w00 * rho0 + w10 * rho1) * lam0 + (w01 * rho0) * lam1 + (w2 * rho2) * pianti
        out += wf * ((b_sym * (fmat @ u_sym)) @ b_sym.T)
        out += wf * ((b_anti * (fmat @ u_anti)) @ b_anti.T)
        return out

    return MomentMap(dim=dim, label=f"residual channel (ell={ell})", apply=apply)


# ---------------------------------------------------------------------------
# Superoperator representations
# ---------------------------------------------------------------------------


def choi(moment_map: MomentMap) -> np.ndarray:
    """Choi matrix: apply the map to one half of a maximally entangled state.

    With D = d**2 the result is the D**2 x D**2 operator
    ``sum_{mn} map(|m><n|) (x) |m><n| / D``; it has unit trace for
    trace-preserving maps, is positive iff the map is completely positive,
    and its partial trace over the first factor is identity/D iff the map is
    trace preserving.
    """
    d2 = moment_map.dim.d**2
    if d2 > MAX_CHOI_D2:
        raise SizeError(f"choi matrix for d**2 = {d2} exceeds the d**2 <= {MAX_CHOI_D2} envelope")
    out = np.zeros((d2 * d2, d2 * d2), dtype=complex)
    unit = np.zeros((d2, d2), dtype=complex)
    for m in range(d2):
        for n in range(d2):
            unit[m, n] = 1.0
            out[m::d2, n::d2] = moment_map.apply(unit) / d2
            unit[m, n] = 0.0
    return out


def moment_matrix(moment_map: MomentMap, basis: str = "pair") -> np.ndarray:
    """Matrix of the superoperator in a matrix-unit basis.

    Column (p * d**2 + q) holds the coefficients of ``map(|p><q|)``, with
    |p>, |q> running over the frozen pair basis (``basis="pair"``) or the
    computational product basis (``basis="product"``); rows use the same
    convention.  Superoperator composition becomes matrix multiplication, so
    map equality and powers reduce to dense matrix comparisons.
    """
    dim = moment_map.dim
    if dim.d > MAX_MATRIX_D:
        raise SizeError(f"moment matrix for d = {dim.d} exceeds the d <= {MAX_MATRIX_D} envelope")
    d2 = dim.d**2
    if basis == "pair":
        bmat = np.column_stack([v for _, v in pair_basis(dim)]).real
    elif basis == "product":
        bmat = None
    else:
        raise ValueError(f"unknown basis {basis!r}")
    out = np.empty((d2 * d2, d2 * d2), dtype=complex)
    for p in range(d2):
        if bmat is None:
            bp = np.zeros(d2)
            bp[p] = 1.0
        else:
            bp = bmat[:, p]
        for q in range(d2):
            if bmat is None:
                bq = bp if q == p else np.zeros(d2)
                if q != p:
                    bq[q] = 1.0
            else:
                bq = bmat[:, q]
            image = moment_map.apply(np.outer(bp, bq))
            if bmat is not None:
                image = bmat.T @ image @ bmat
            out[:, p * d2 + q] = image.reshape(-1)
    return out
