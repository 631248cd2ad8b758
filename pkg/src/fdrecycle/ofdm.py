"""OFDM block machinery: DFT, cyclic prefix, subcarrier selection.

All matrices are built densely. Subcarrier indices are zero-based.
"""

import functools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "OfdmGrid",
    "dft_matrix",
    "cp_insertion",
    "cp_removal",
    "subcarrier_selector",
    "reduced_selector",
    "ofdm_modulate",
]


@dataclass(frozen=True)
class OfdmGrid:
    """N subcarriers, L cyclic-prefix samples and a two-way subcarrier split.

    If ``set_1`` is omitted the first half of the band goes to link 1 and
    the rest to link 2.
    """

    n_subcarriers: int
    cp_len: int
    set_1: Optional[Sequence[int]] = None
    set_2: Optional[Sequence[int]] = field(default=None)

    def __post_init__(self):
        n, l = self.n_subcarriers, self.cp_len
        if n < 1 or l < 1:
            raise ValueError("n_subcarriers and cp_len must be positive")
        if l >= n:
            raise ValueError(f"cp_len ({l}) must be smaller than n_subcarriers ({n})")
        s1 = self.set_1
        if s1 is None:
            s1 = range(n // 2)
        s1 = tuple(sorted(int(k) for k in s1))
        s2 = self.set_2
        if s2 is None:
            s2 = [k for k in range(n) if k not in set(s1)]
        s2 = tuple(sorted(int(k) for k in s2))
        if set(s1) & set(s2):
            raise ValueError("subcarrier sets overlap")
        if set(s1) | set(s2) != set(range(n)) or len(s1) + len(s2) != n:
            raise ValueError("subcarrier sets must partition range(n_subcarriers)")
        object.__setattr__(self, "set_1", s1)
        object.__setattr__(self, "set_2", s2)

    @property
    def block_len(self) -> int:
        return self.n_subcarriers + self.cp_len

    def subcarriers(self, which: int) -> tuple:
        if which == 1:
            return self.set_1
        if which == 2:
            return self.set_2
        raise ValueError(f"link index must be 1 or 2, got {which}")

    def size(self, which: int) -> int:
        return len(self.subcarriers(which))


@functools.lru_cache(maxsize=8)
def _dft(n: int) -> np.ndarray:
    k = np.arange(n)
    f = np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
    f.setflags(write=False)
    return f


def dft_matrix(n: int) -> np.ndarray:
    """Unitary n-point DFT matrix, ``F[m, k] = exp(-2j*pi*m*k/n) / sqrt(n)``.

    The returned array is cached and read-only.
    """
    if n < 1:
        raise ValueError("n must be positive")
    return _dft(int(n))


def cp_insertion(grid: OfdmGrid) -> np.ndarray:
    """(N+L) x N matrix that prepends the last L samples of a block."""
    n, l = grid.n_subcarriers, grid.cp_len
    a = np.zeros((n + l, n))
    a[:l, n - l:] = np.eye(l)
    a[l:, :] = np.eye(n)
    return a


def cp_removal(grid: OfdmGrid) -> np.ndarray:
    """N x (N+L) matrix that discards the first L samples of a block."""
    n, l = grid.n_subcarriers, grid.cp_len
    return np.hstack([np.zeros((n, l)), np.eye(n)])


def subcarrier_selector(grid: OfdmGrid, which: int) -> np.ndarray:
    d = np.zeros(grid.n_subcarriers)
    d[list(grid.subcarriers(which))] = 1.0
    return np.diag(d)


def reduced_selector(grid: OfdmGrid, which: int) -> np.ndarray:
    """Rows of the identity picked by the (ordered) subcarrier set of ``which``.

    Unlike :func:`subcarrier_selector` the result is ``|set| x N``, so it
    drops the zero entries of a demodulated vector instead of masking them.
    """
    return np.eye(grid.n_subcarriers)[list(grid.subcarriers(which)), :]


def ofdm_modulate(u, grid: OfdmGrid, which: Optional[int] = None) -> np.ndarray:
    """Map frequency-domain symbols to a CP-extended time block, ``A F^-1 u``.

    When ``which`` is given, ``u`` must vanish outside that link's
    subcarriers.
    """
    u = np.asarray(u, dtype=complex)
    n = grid.n_subcarriers
    if u.shape != (n,):
        raise ValueError(f"expected a length-{n} vector, got shape {u.shape}")
    if which is not None:
        outside = np.ones(n, dtype=bool)
        outside[list(grid.subcarriers(which))] = False
        if np.any(u[outside] != 0):
            raise ValueError(f"u has energy outside the subcarriers of link {which}")
    # F^-1 = F^H; ifft with orthonormal scaling is the same operator
    time = np.fft.ifft(u, norm="ortho")
    return np.concatenate([time[n - grid.cp_len:], time])
