"""Null-space precoders that keep SN-to-SN signaling invisible to OFDMA receivers."""

from dataclasses import dataclass

import numpy as np

from .channel import ConvolutionPair
from .exceptions import NullspaceDimensionMismatch
from .ofdm import OfdmGrid, cp_removal, dft_matrix, subcarrier_selector

__all__ = [
    "Precoder",
    "null_space",
    "demod_operator",
    "forward_constraint",
    "backward_constraint",
    "forward_nullspace",
    "backward_nullspace",
    "rotation_from_svd",
]


@dataclass(frozen=True)
class Precoder:
    """Semi-unitary basis ``gamma`` of the admissible signaling subspace.

    ``rotation`` is the stream-mixing unitary applied in front of it; it
    starts as the identity and is replaced by the right singular basis of
    the whitened link once the receiver statistics are known.
    """

    gamma: np.ndarray
    rotation: np.ndarray
    phase: str

    @property
    def streams(self) -> int:
        return self.gamma.shape[1]

    def with_rotation(self, rotation) -> "Precoder":
        return Precoder(self.gamma, np.asarray(rotation), self.phase)


def null_space(m: np.ndarray):
    """Orthonormal basis of ``null(m)`` from the SVD, plus the rank cutoff used.

    Singular values at or below ``max(m.shape) * eps * s_max * 1e3`` count
    as zero.
    """
    _, s, vh = np.linalg.svd(m)
    smax = s[0] if s.size else 0.0
    tol = max(m.shape) * np.finfo(float).eps * smax * 1e3
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T, tol


def demod_operator(grid: OfdmGrid, which: int) -> np.ndarray:
    """``D F B``: CP removal, DFT and masking to the subcarriers of link ``which``."""
    return subcarrier_selector(grid, which) @ dft_matrix(grid.n_subcarriers) @ cp_removal(grid)


def forward_constraint(h_ii: ConvolutionPair, h_ij: ConvolutionPair, grid: OfdmGrid, i: int) -> np.ndarray:
    """Stack of the two operators the forward signaling of SN ``i`` must annihilate."""
    j = 3 - i
    return np.vstack([demod_operator(grid, i) @ h_ii.lower, demod_operator(grid, j) @ h_ij.lower])


def backward_constraint(h_s: ConvolutionPair, grid: OfdmGrid, j: int) -> np.ndarray:
    return demod_operator(grid, j) @ h_s.lower


def _checked_basis(constraint, expected, phase):
    gamma, _ = null_space(constraint)
    if gamma.shape[1] != expected:
        raise NullspaceDimensionMismatch(expected, gamma.shape[1])
    return Precoder(gamma, np.eye(expected, dtype=complex), phase)


def forward_nullspace(h_ii: ConvolutionPair, h_ij: ConvolutionPair, grid: OfdmGrid, i: int) -> Precoder:
    """Forward-phase precoder of SN ``i``; exactly L streams on generic channels.

    Both conditions are enforced by stacking the operators rather than
    summing them, so a vector that cancels across the two terms is never
    admitted.
    """
    return _checked_basis(forward_constraint(h_ii, h_ij, grid, i), grid.cp_len, "forward")


def backward_nullspace(h_s: ConvolutionPair, grid: OfdmGrid, j: int) -> Precoder:
    """Backward-phase precoder of the SN talking to SN ``j``.

    The admissible space has ``N + L - |set_j|`` dimensions.
    """
    expected = grid.block_len - grid.size(j)
    return _checked_basis(backward_constraint(h_s, grid, j), expected, "backward")


def rotation_from_svd(whitening) -> np.ndarray:
    return whitening.right_basis
