"""Finite-gate and disordered-Hamiltonian realisations of the diagonal ensembles.

A circuit layer draws one single-qubit phase from {0, 2pi/3, 4pi/3} per qubit
and one controlled phase from {0, pi} per qubit pair; these finite sets
reproduce the exact second moments of fully random diagonal phases, which is
verified here by exhaustive enumeration and Monte-Carlo sampling.  The same
layer arises as the pi-duration evolution of a disordered Ising-type
Hamiltonian with fields in {0, +-1/3} and couplings in {0, j_star}; with the
default j_star = 1/4 the coupling contributes the required two-body phase pi
(see ``hamiltonian_segment`` for the phase bookkeeping).

All sampling is driven by counter-based generators keyed on
(seed, chunk index) with a fixed chunk size, so every draw is a pure
function of (seed, draw index) and results are identical for any number of
worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .linalg import Dim, SizeError, walsh_hadamard
from .moments import MomentMap, g_z_exact

__all__ = [
    "SINGLE_PHASE_CHOICES",
    "PAIR_PHASE_CHOICES",
    "FIELD_CHOICES",
    "DEFAULT_J_STAR",
    "SEGMENT_DURATION",
    "ZLayerAssignment",
    "HamiltonianSegment",
    "EnsembleSpec",
    "rng_for_chunk",
    "sample_z_layer",
    "enumerate_z_layers",
    "layer_unitary",
    "circuit_unitary",
    "ensemble_moment_exact",
    "ensemble_moment_mc",
    "hamiltonian_segment",
    "hamiltonian_unitary",
    "hamiltonian_moment_exact",
    "ell_for_epsilon",
    "gate_count",
]

SINGLE_PHASE_CHOICES = (0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0)
PAIR_PHASE_CHOICES = (0.0, math.pi)
FIELD_CHOICES = (0.0, 1.0 / 3.0, -1.0 / 3.0)
# Nonzero coupling value: duration pi turns J into a two-body phase 4*pi*J,
# so 1/4 yields the required pi while 1/2 yields a trivial 2*pi.
DEFAULT_J_STAR = 0.25
SEGMENT_DURATION = math.pi

ENUMERATION_LIMIT = 10**6
# Monte-Carlo draws are keyed per fixed-size chunk for thread-count-independent
# reproducibility.
MC_CHUNK = 1024


@dataclass(frozen=True)
class ZLayerAssignment:
    """Phases of one commuting layer: N single-qubit and N(N-1)/2 pair phases.

    ``pair_phases`` is indexed lexicographically over pairs (k, l), k < l.
    """

    single_phases: np.ndarray
    pair_phases: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.single_phases)
        if len(self.pair_phases) != n * (n - 1) // 2:
            raise ValueError(
                f"expected {n * (n - 1) // 2} pair phases for {n} qubits, "
                f"got {len(self.pair_phases)}"
            )


@dataclass(frozen=True)
class HamiltonianSegment:
    """One pi-duration slice of the disordered dynamics.

    ``basis`` is "Z" or "X"; ``fields`` holds the N local field values and
    ``couplings`` the N(N-1)/2 pair couplings (lexicographic (k, l), k < l).
    """

    basis: str
    fields: np.ndarray
    couplings: np.ndarray

    def __post_init__(self) -> None:
        if self.basis not in ("Z", "X"):
            raise ValueError(f"basis must be 'Z' or 'X', got {self.basis!r}")
        n = len(self.fields)
        if len(self.couplings) != n * (n - 1) // 2:
            raise ValueError(
                f"expected {n * (n - 1) // 2} couplings for {n} qubits, "
                f"got {len(self.couplings)}"
            )


@dataclass(frozen=True)
class EnsembleSpec:
    """Configuration of one ensemble experiment."""

    n_qubits: int
    ell: int = 1
    kind: str = "circuit"
    seed: int = 0
    samples: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("circuit", "hamiltonian", "continuous"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.ell < 1:
            raise ValueError(f"ell must be >= 1, got {self.ell}")
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")


def rng_for_chunk(seed: int, chunk: int) -> np.random.Generator:
    """Counter-based generator for one chunk: a pure function of (seed, chunk)."""
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) | int(chunk)))


def _qubit_bits(n_qubits: int) -> np.ndarray:
    """bits[n, k] = k-th qubit of basis state n (qubit 0 is the leftmost factor)."""
    d = 2**n_qubits
    shifts = np.arange(n_qubits - 1, -1, -1)
    return (np.arange(d)[:, None] >> shifts[None, :]) & 1


def _pair_list(n_qubits: int) -> list[tuple[int, int]]:
    return [(k, l) for k in range(n_qubits) for l in range(k + 1, n_qubits)]


def _pair_bits(n_qubits: int) -> np.ndarray:
    """pair_bits[n, idx] = n_k * n_l for the idx-th pair (k, l)."""
    bits = _qubit_bits(n_qubits)
    pairs = _pair_list(n_qubits)
    if not pairs:
        return np.zeros((2**n_qubits, 0), dtype=int)
    return np.stack([bits[:, k] * bits[:, l] for k, l in pairs], axis=1)


def sample_z_layer(n_qubits: int, rng: np.random.Generator) -> ZLayerAssignment:
    """Draw one layer: phases uniform and independent over their finite sets."""
    n_pairs = n_qubits * (n_qubits - 1) // 2
    singles = np.array(SINGLE_PHASE_CHOICES)[rng.integers(0, 3, n_qubits)]
    pairs = np.array(PAIR_PHASE_CHOICES)[rng.integers(0, 2, n_pairs)]
    return ZLayerAssignment(single_phases=singles, pair_phases=pairs)


def enumerate_z_layers(n_qubits: int) -> list[ZLayerAssignment]:
    """All 3**N * 2**(N(N-1)/2) layer assignments, in a fixed order."""
    n_pairs = n_qubits * (n_qubits - 1) // 2
    count = 3**n_qubits * 2**n_pairs
    if count > ENUMERATION_LIMIT:
        raise SizeError(f"enumeration of {count} layer assignments exceeds {ENUMERATION_LIMIT}")
    out = []
    for singles in product(SINGLE_PHASE_CHOICES, repeat=n_qubits):
        for pairs in product(PAIR_PHASE_CHOICES, repeat=n_pairs):
            out.append(
                ZLayerAssignment(
                    single_phases=np.array(singles), pair_phases=np.array(pairs)
                )
            )
    return out


def _layer_phase_vector(assignment: ZLayerAssignment) -> np.ndarray:
    """Diagonal phases of the layer on each computational basis state."""
    n = len(assignment.single_phases)
    bits = _qubit_bits(n)
    phases = bits @ assignment.single_phases
    if len(assignment.pair_phases):
        phases = phases + _pair_bits(n) @ assignment.pair_phases
    return phases


def layer_unitary(assignment: ZLayerAssignment) -> np.ndarray:
    """Diagonal unitary of one layer."""
    return np.diag(np.exp(1j * _layer_phase_vector(assignment)))


def circuit_unitary(n_qubits: int, layers: list[ZLayerAssignment]) -> np.ndarray:
    """Alternating circuit: each layer is followed by Hadamards on all qubits.

    ``layers[0]`` acts first.  For the full construction the list has odd
    length 2*ell + 1.
    """
    w = walsh_hadamard(Dim(n_qubits))
    u = np.eye(2**n_qubits, dtype=complex)
    for layer in layers:
        u = (w * np.exp(1j * _layer_phase_vector(layer))[None, :]) @ u
    return u


def _mask_from_phases(phases: np.ndarray) -> np.ndarray:
    """Average two-copy twirl mask of diagonal unitaries with the given phases.

    ``phases`` has one row per ensemble element; entry [(ij), (kl)] of the
    result is the mean of exp(i(ph_i + ph_j - ph_k - ph_l)).
    """
    w = np.exp(1j * phases)
    u = (w[:, :, None] * w[:, None, :]).reshape(w.shape[0], -1)
    return (u.T @ u.conj()) / w.shape[0]


def ensemble_moment_exact(n_qubits: int) -> MomentMap:
    """Exact two-fold twirl of a single circuit layer, by full enumeration.

    The result coincides with the continuous-phase twirl ``g_z_exact``: the
    finite phase sets form an exact diagonal 2-design.
    """
    layers = enumerate_z_layers(n_qubits)
    phases = np.stack([_layer_phase_vector(a) for a in layers])
    mask = _mask_from_phases(phases)
    dim = Dim(n_qubits)
    return MomentMap(
        dim=dim,
        label=f"circuit-layer twirl (exact, {len(layers)} elements)",
        apply=lambda x: mask * x,
        mask=mask,
    )


def _segment_phase_vectors(
    n_qubits: int, fields: np.ndarray, couplings: np.ndarray
) -> np.ndarray:
    """Diagonal eigenphases exp-i*pi*H for batches of Z-basis segments.

    ``fields`` is (m, N), ``couplings`` (m, n_pairs); returns (m, d) phases.
    The energy of |n> is -sum_i B_i s_i - sum_pairs J s_k s_l with s = +-1.
    """
    bits = _qubit_bits(n_qubits)
    signs = 1 - 2 * bits  # (d, N)
    pairs = _pair_list(n_qubits)
    energies = -(fields @ signs.T)
    if pairs:
        pair_signs = np.stack([signs[:, k] * signs[:, l] for k, l in pairs], axis=1)
        energies = energies - couplings @ pair_signs.T
    return -SEGMENT_DURATION * energies


def hamiltonian_segment(segment: HamiltonianSegment) -> np.ndarray:
    """Evolution operator of one segment over its fixed pi duration.

    All terms commute, so the exponential is exact and entrywise on the
    eigenphases; X-basis segments are the Hadamard conjugate of the Z-basis
    construction.
    """
    n = len(segment.fields)
    phases = _segment_phase_vectors(
        n, segment.fields[None, :], segment.couplings[None, :]
    )[0]
    u = np.diag(np.exp(1j * phases))
    if segment.basis == "X":
        w = walsh_hadamard(Dim(n))
        u = w @ u @ w
    return u


def _draw_segment(
    n_qubits: int, rng: np.random.Generator, basis: str, j_star: float
) -> HamiltonianSegment:
    n_pairs = n_qubits * (n_qubits - 1) // 2
    fields = np.array(FIELD_CHOICES)[rng.integers(0, 3, n_qubits)]
    couplings = rng.integers(0, 2, n_pairs) * j_star
    return HamiltonianSegment(basis=basis, fields=fields, couplings=couplings)


def hamiltonian_unitary(
    spec: EnsembleSpec, rng: np.random.Generator, j_star: float = DEFAULT_J_STAR
) -> np.ndarray:
    """Evolution of the disordered dynamics over 2*ell+1 Z and 2*ell X segments.

    Segments alternate starting and ending with the Z basis, each with fresh
    independent field/coupling draws; total duration is (4*ell + 1) * pi.
    """
    if spec.kind != "hamiltonian":
        raise ValueError(f"spec.kind must be 'hamiltonian', got {spec.kind!r}")
    u = np.eye(2**spec.n_qubits, dtype=complex)
    for index in range(4 * spec.ell + 1):
        basis = "Z" if index % 2 == 0 else "X"
        u = hamiltonian_segment(_draw_segment(spec.n_qubits, rng, basis, j_star)) @ u
    return u


def hamiltonian_moment_exact(n_qubits: int, j_star: float = DEFAULT_J_STAR) -> MomentMap:
    """Exact two-fold twirl of one Z-basis segment, over all field/coupling draws.

    At j_star = 1/4 this equals the circuit-layer twirl (and hence
    ``g_z_exact``); the value 1/2 zeroes out the two-body phase mod 2*pi and
    demonstrably breaks the equality.
    """
    n_pairs = n_qubits * (n_qubits - 1) // 2
    count = 3**n_qubits * 2**n_pairs
    if count > ENUMERATION_LIMIT:
        raise SizeError(f"enumeration of {count} segment draws exceeds {ENUMERATION_LIMIT}")
    fields = np.array(list(product(FIELD_CHOICES, repeat=n_qubits)))
    couplings = np.array(list(product((0.0, j_star), repeat=n_pairs)))
    if n_pairs == 0:
        couplings = couplings.reshape(1, 0)
    f_rep = np.repeat(fields, len(couplings), axis=0)
    c_rep = np.tile(couplings, (len(fields), 1))
    phases = _segment_phase_vectors(n_qubits, f_rep, c_rep)
    mask = _mask_from_phases(phases)
    dim = Dim(n_qubits)
    return MomentMap(
        dim=dim,
        label=f"hamiltonian-segment twirl (exact, j_star={j_star}, {count} draws)",
        apply=lambda x: mask * x,
        mask=mask,
    )


def _chunk_phases(
    spec: EnsembleSpec, chunk: int, count: int, j_star: float
) -> np.ndarray:
    """Per-basis-state phases for ``count`` draws of the configured ensemble."""
    rng = rng_for_chunk(spec.seed, chunk)
    n = spec.n_qubits
    d = 2**n
    n_pairs = n * (n - 1) // 2
    if spec.kind == "continuous":
        return rng.uniform(0.0, 2.0 * math.pi, size=(count, d))
    if spec.kind == "circuit":
        singles = np.array(SINGLE_PHASE_CHOICES)[rng.integers(0, 3, (count, n))]
        pairs = np.array(PAIR_PHASE_CHOICES)[rng.integers(0, 2, (count, n_pairs))]
        phases = singles @ _qubit_bits(n).T
        if n_pairs:
            phases = phases + pairs @ _pair_bits(n).T
        return phases
    # hamiltonian: Z-basis segment draws
    fields = np.array(FIELD_CHOICES)[rng.integers(0, 3, (count, n))]
    couplings = rng.integers(0, 2, (count, n_pairs)) * j_star
    return _segment_phase_vectors(n, fields, couplings)


def ensemble_moment_mc(
    spec: EnsembleSpec,
    j_star: float = DEFAULT_J_STAR,
    threads: int = 1,
) -> tuple[MomentMap, float]:
    """Monte-Carlo estimate of the two-fold twirl, with a standard-error bound.

    Returns the estimated map and the largest per-entry standard error of
    its matrix-unit table (every sample contributes a unit-modulus phase per
    entry, so the per-entry standard error is sqrt((1 - |mean|^2) / M)).
    The accumulation order is fixed by chunk index, independent of
    ``threads``.
    """
    if spec.samples < 100:
        raise ValueError(f"need at least 100 samples, got {spec.samples}")
    m = spec.samples
    chunks = [(c, min(MC_CHUNK, m - c * MC_CHUNK)) for c in range((m + MC_CHUNK - 1) // MC_CHUNK)]

    def one_chunk(job: tuple[int, int]) -> np.ndarray:
        c, count = job
        phases = _chunk_phases(spec, c, count, j_star)
        w = np.exp(1j * phases)
        u = (w[:, :, None] * w[:, None, :]).reshape(count, -1)
        return u.T @ u.conj()

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(one_chunk, chunks))
    else:
        partials = [one_chunk(job) for job in chunks]
    total = partials[0]
    for part in partials[1:]:
        total = total + part
    mask = total / m
    se = float(np.sqrt(np.maximum(0.0, 1.0 - np.abs(mask) ** 2) / m).max())
    dim = Dim(spec.n_qubits)
    est = MomentMap(
        dim=dim,
        label=f"{spec.kind} twirl (MC, {m} samples, seed {spec.seed})",
        apply=lambda x: mask * x,
        mask=mask,
    )
    return est, se


def ell_for_epsilon(n_qubits: int, epsilon: float) -> int:
    """Smallest repetition count whose proven upper error bound meets epsilon.

    The bound is (2 / d**ell) * (1 + 2 / (d - 1)); the result is clamped to
    1 when even a single repetition already satisfies the target.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    d = 2**n_qubits
    eps = Fraction(epsilon)
    ell = 1
    while Fraction(2, d**ell) * (1 + Fraction(2, d - 1)) > eps:
        ell += 1
    return ell


def gate_count(n_qubits: int, ell: int) -> int:
    """Total gates of the (2*ell+1)-block circuit: phases, pair phases, Hadamards."""
    n = n_qubits
    return (2 * ell + 1) * (2 * n + n * (n - 1) // 2)
