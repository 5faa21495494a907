"""Dense complex linear algebra over the two-copy Hilbert space of N qubits.

Everything downstream works with plain ``numpy.ndarray`` operators.  This
module builds the canonical operators on H (x) H -- the swap, the symmetric /
antisymmetric projectors and their normalised states, the diagonal-pair
projectors -- together with the fixed orthonormal pair basis

    { |ii> } + { (|ij>+|ji>)/sqrt(2) : i>j } + { (|ij>-|ji>)/sqrt(2) : i>j }

whose ordering is frozen so that serialised superoperator matrices are
byte-comparable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SizeError",
    "Dim",
    "PairBasisIndex",
    "CanonicalOps",
    "tensor_product",
    "trace_norm",
    "walsh_hadamard",
    "pair_basis",
    "pair_indices",
    "canonical_ops",
    "partial_trace",
    "is_hermitian",
]

# A Kronecker product whose side length would exceed this raises SizeError.
MAX_TENSOR_DIM = 2**16

# Hermiticity threshold below which trace_norm switches to the (much more
# accurate) Hermitian eigensolve.
_HERMITIAN_TOL = 1e-10


class SizeError(ValueError):
    """A requested dense object exceeds the supported size envelope."""


@dataclass(frozen=True)
class Dim:
    """System size: ``n_qubits`` qubits, single-copy dimension ``d = 2**n_qubits``."""

    n_qubits: int
    d: int = field(init=False)

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        object.__setattr__(self, "d", 2**self.n_qubits)


@dataclass(frozen=True)
class PairBasisIndex:
    """Label of one pair-basis vector.

    ``kind`` is ``"diag"`` for |ii>, ``"sym"`` for (|ij>+|ji>)/sqrt(2) and
    ``"anti"`` for (|ij>-|ji>)/sqrt(2).  For the entangled kinds i > j.
    """

    kind: str
    i: int
    j: int

    def __post_init__(self) -> None:
        if self.kind not in ("diag", "sym", "anti"):
            raise ValueError(f"unknown pair-basis kind {self.kind!r}")
        if self.kind == "diag":
            if self.i != self.j:
                raise ValueError("diag index requires i == j")
        elif self.i <= self.j:
            raise ValueError(f"{self.kind} index requires i > j, got ({self.i}, {self.j})")


def tensor_product(a: np.ndarray, b: np.ndarray, max_dim: int = MAX_TENSOR_DIM) -> np.ndarray:
    """Kronecker product with a guard on the resulting side length."""
    a = np.asarray(a)
    b = np.asarray(b)
    out_dim = a.shape[0] * b.shape[0]
    if out_dim > max_dim:
        raise SizeError(f"tensor product dimension {out_dim} exceeds maximum {max_dim}")
    return np.kron(a, b)


def is_hermitian(a: np.ndarray, tol: float = 1e-12) -> bool:
    """Entrywise Hermiticity predicate."""
    a = np.asarray(a)
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values of a square matrix.

    Hermitian inputs (up to 1e-10 entrywise) take the eigensolve path, where
    the trace norm is the sum of absolute eigenvalues; anything else falls
    back to the SVD.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"trace_norm expects a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("trace_norm: input has non-finite entries")
    if np.max(np.abs(a - a.conj().T)) <= _HERMITIAN_TOL:
        return float(np.sum(np.abs(np.linalg.eigvalsh(a))))
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def walsh_hadamard(dim: Dim) -> np.ndarray:
    """N-fold tensor power of the 2x2 Hadamard matrix (real, symmetric, involutory)."""
    h1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    w = np.array([[1.0]])
    for _ in range(dim.n_qubits):
        w = np.kron(w, h1)
    return w


def pair_indices(dim: Dim) -> list[tuple[int, int]]:
    """(i, j) with i > j, lexicographic -- the frozen ordering of entangled pairs."""
    return [(i, j) for i in range(dim.d) for j in range(i)]


def pair_basis(dim: Dim) -> list[tuple[PairBasisIndex, np.ndarray]]:
    """Orthonormal basis of H (x) H in the frozen order: diag, sym, anti.

    Returns d**2 pairs of (label, column vector of length d**2).  Within each
    block the (i, j) labels run lexicographically with i > j.
    """
    d = dim.d
    out: list[tuple[PairBasisIndex, np.ndarray]] = []
    for i in range(d):
        v = np.zeros(d * d, dtype=complex)
        v[i * d + i] = 1.0
        out.append((PairBasisIndex("diag", i, i), v))
    for sign, kind in ((1.0, "sym"), (-1.0, "anti")):
        for i, j in pair_indices(dim):
            v = np.zeros(d * d, dtype=complex)
            v[i * d + j] = 1.0 / np.sqrt(2.0)
            v[j * d + i] = sign / np.sqrt(2.0)
            out.append((PairBasisIndex(kind, i, j), v))
    return out


@dataclass(frozen=True)
class CanonicalOps:
    """The standard operators on H (x) H used throughout.

    ``identity2`` and ``swap`` are basis independent; ``L0``/``L1`` project
    onto the doubled computational states and the symmetric entangled pairs;
    ``Psym``/``Panti`` are the symmetric/antisymmetric subspace projectors
    and ``PIsym``/``PIanti``/``Lam0``/``Lam1`` their unit-trace
    normalisations.
    """

    identity2: np.ndarray
    swap: np.ndarray
    L0: np.ndarray
    L1: np.ndarray
    Psym: np.ndarray
    Panti: np.ndarray
    PIsym: np.ndarray
    PIanti: np.ndarray
    Lam0: np.ndarray
    Lam1: np.ndarray


def canonical_ops(dim: Dim) -> CanonicalOps:
    d = dim.d
    identity2 = np.eye(d * d, dtype=complex)
    swap = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            swap[i * d + j, j * d + i] = 1.0
    L0 = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        L0[i * d + i, i * d + i] = 1.0
    L1 = np.zeros((d * d, d * d), dtype=complex)
    for label, v in pair_basis(dim):
        if label.kind == "sym":
            L1 += np.outer(v, v.conj())
    Psym = (identity2 + swap) / 2.0
    Panti = (identity2 - swap) / 2.0
    return CanonicalOps(
        identity2=identity2,
        swap=swap,
        L0=L0,
        L1=L1,
        Psym=Psym,
        Panti=Panti,
        PIsym=2.0 * Psym / (d * (d + 1)),
        PIanti=2.0 * Panti / (d * (d - 1)) if d > 1 else Panti,
        Lam0=L0 / d,
        Lam1=L1 / d,
    )


def partial_trace(rho: np.ndarray, dim_a: int, dim_b: int, keep: int) -> np.ndarray:
    """Trace out one tensor factor of a (dim_a*dim_b)-dimensional operator.

    ``keep=0`` returns the dim_a x dim_a reduction, ``keep=1`` the
    dim_b x dim_b one.
    """
    rho = np.asarray(rho)
    r = rho.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == 0:
        return np.einsum("ajbj->ab", r)
    if keep == 1:
        return np.einsum("iaib->ab", r)
    raise ValueError("keep must be 0 or 1")
