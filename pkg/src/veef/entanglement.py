"""Bipartite entanglement: Schmidt spectra, von Neumann entropy, Page value.

Entropies are in bits (log base 2) throughout.  The default path computes
the Schmidt spectrum from a singular value decomposition of the reshaped
amplitude vector, which is better conditioned than diagonalizing the reduced
density matrix and works in the smaller of the two subsystem dimensions; the
explicit reduced-density-matrix path is kept as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .state import PureState

# Eigenvalues below this are treated as exact zeros in the entropy sum; the
# clip perturbs S by well under 1e-12 bits while avoiding log(0).
EIGENVALUE_CLIP = 1e-14


@dataclass(frozen=True)
class Bipartition:
    """A|B split of the sites; subsystem_a holds the site indices of A."""

    subsystem_a: tuple
    n_sites: int

    def __post_init__(self):
        a = tuple(sorted(int(s) for s in self.subsystem_a))
        if len(set(a)) != len(a):
            raise ValueError("subsystem_a contains duplicate sites")
        if not a or len(a) >= self.n_sites:
            raise ValueError(
                f"subsystem must contain between 1 and {self.n_sites - 1} sites")
        if a[0] < 0 or a[-1] >= self.n_sites:
            raise ValueError(f"sites {a} out of range for {self.n_sites} sites")
        object.__setattr__(self, "subsystem_a", a)

    @staticmethod
    def center(n_sites: int) -> "Bipartition":
        """The center cut: sites 0 .. N/2 - 1 against the rest."""
        if n_sites < 2:
            raise ValueError("center cut needs at least 2 sites")
        return Bipartition(tuple(range(n_sites // 2)), n_sites)

    @property
    def subsystem_b(self) -> tuple:
        a = set(self.subsystem_a)
        return tuple(s for s in range(self.n_sites) if s not in a)

    @property
    def n_a(self) -> int:
        return len(self.subsystem_a)

    @property
    def n_b(self) -> int:
        return self.n_sites - self.n_a


@dataclass(frozen=True)
class EntanglementSpectrum:
    """Squared Schmidt coefficients, sorted descending, summing to 1."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("spectrum must be a non-empty 1-D array")
        if np.any(lam < -1e-9) or np.any(lam > 1 + 1e-9):
            raise ValueError("eigenvalues outside [0, 1]")
        total = lam.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"spectrum sums to {total!r}, expected 1")
        lam = np.sort(np.clip(lam, 0.0, 1.0))[::-1].copy()
        lam.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)


def schmidt_matrix(amplitudes: np.ndarray, cut: Bipartition) -> np.ndarray:
    """Reshape amplitudes into a (2^N_B, 2^N_A) matrix for the given cut.

    Column index runs over subsystem-A configurations (lowest listed site is
    the least significant bit), row index over B.  For the contiguous
    low-site cut this is a plain reshape.
    """
    n = cut.n_sites
    a_sites = cut.subsystem_a
    dim_a = 2 ** cut.n_a
    dim_b = 2 ** cut.n_b
    if a_sites == tuple(range(cut.n_a)):
        return amplitudes.reshape(dim_b, dim_a)
    tensor = amplitudes.reshape([2] * n)
    # axis j of the tensor is site n-1-j; most significant site first per group
    perm = [n - 1 - s for s in sorted(cut.subsystem_b, reverse=True)]
    perm += [n - 1 - s for s in sorted(a_sites, reverse=True)]
    return tensor.transpose(perm).reshape(dim_b, dim_a)


def schmidt_unflatten(matrix: np.ndarray, cut: Bipartition) -> np.ndarray:
    """Inverse of :func:`schmidt_matrix`: back to a flat amplitude vector."""
    n = cut.n_sites
    if cut.subsystem_a == tuple(range(cut.n_a)):
        return matrix.reshape(-1)
    perm = [n - 1 - s for s in sorted(cut.subsystem_b, reverse=True)]
    perm += [n - 1 - s for s in sorted(cut.subsystem_a, reverse=True)]
    inverse = np.argsort(perm)
    return matrix.reshape([2] * n).transpose(inverse).reshape(-1)


def entanglement_spectrum(state: PureState, cut: Bipartition) -> EntanglementSpectrum:
    """Schmidt spectrum of the state across the cut (squared singular values)."""
    if cut.n_sites != state.n_sites:
        raise ValueError(f"cut is for {cut.n_sites} sites, state has {state.n_sites}")
    sv = np.linalg.svd(schmidt_matrix(state.amplitudes, cut), compute_uv=False)
    return EntanglementSpectrum(sv * sv)


def spectrum_via_density_matrix(state: PureState, cut: Bipartition) -> EntanglementSpectrum:
    """Same spectrum via explicit diagonalization of the reduced density matrix.

    Kept as an independent path for cross-checking the SVD route.
    """
    if cut.n_sites != state.n_sites:
        raise ValueError(f"cut is for {cut.n_sites} sites, state has {state.n_sites}")
    m = schmidt_matrix(state.amplitudes, cut)
    rho_a = m.T @ m.conj()
    lam = np.linalg.eigvalsh(rho_a)[::-1]
    lam = np.clip(lam, 0.0, 1.0)
    return EntanglementSpectrum(lam / lam.sum())


def von_neumann_entropy(spectrum: EntanglementSpectrum | np.ndarray) -> float:
    """-sum lambda_i log2 lambda_i in bits, with 0 log 0 = 0."""
    lam = spectrum.eigenvalues if isinstance(spectrum, EntanglementSpectrum) else np.asarray(spectrum)
    lam = lam[lam > EIGENVALUE_CLIP]
    if lam.size == 0:
        return 0.0
    return float(-np.sum(lam * np.log2(lam)))


def entropy_of_state(state: PureState, cut: Bipartition) -> float:
    return von_neumann_entropy(entanglement_spectrum(state, cut))


def entropy_from_amplitudes(amplitudes: np.ndarray, cut: Bipartition) -> float:
    """Entropy across the cut, directly from an amplitude array (hot path)."""
    sv = np.linalg.svd(schmidt_matrix(amplitudes, cut), compute_uv=False)
    return von_neumann_entropy(sv * sv)


def entropy_symmetric_check(state: PureState, cut: Bipartition) -> tuple[float, float]:
    """(S_A, S_B) computed independently from rho_A and rho_B.

    For a pure state the two must agree (Schmidt duality); useful as a
    runtime sanity check.
    """
    m = schmidt_matrix(state.amplitudes, cut)
    rho_a = m.T @ m.conj()
    rho_b = m @ m.conj().T
    lam_a = np.clip(np.linalg.eigvalsh(rho_a), 0.0, 1.0)
    lam_b = np.clip(np.linalg.eigvalsh(rho_b), 0.0, 1.0)
    return von_neumann_entropy(lam_a), von_neumann_entropy(lam_b)


def page_value(n_a: int, n_b: int) -> float:
    """Average entanglement entropy of Haar-random pure states, in bits.

    Two leading terms only: N_A - N_A / (2 ln2 N_B).  The dropped remainder
    is O(1/2^N), so the value is asymptotic; for very small subsystems
    (e.g. one spin against one spin) it undershoots the exact Haar average
    noticeably (1/3 nats ~ 0.481 bits for 1|1, versus 0.2787 here).
    """
    if n_a < 1 or n_b < 1:
        raise ValueError("subsystem sizes must be positive")
    if n_a > n_b:
        raise ValueError(f"expected n_a <= n_b, got {n_a} > {n_b}")
    return n_a - n_a / (2 * np.log(2) * n_b)
