"""Sampling of Gaussian field matrices and deterministic structured matrices.

A raw field matrix has entries

    Z[j1, j2] = n^{-1/2} * sum_k h(k1, k2) * U(j1 - k1, j2 - k2)

over an i.i.d. Gaussian noise sheet U, and its periodized companion
replaces the noise indices by (j1 - k1) mod N and (j2 - k2) mod n so
that only the N x n noise block is consumed.  Both constructions read
the same sampled noise object, so their difference is confined to a
border band of width equal to the filter radius.

Randomness is counter-based and fully reproducible: each noise matrix
draws from ``Philox(key=(seed, kind_code))``, one stream per (seed,
matrix kind) pair.  Everything downstream of the noise is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .symbols import FilterSequence1D, FilterSequence2D, SpectralSymbol1D

__all__ = [
    "KIND_CODES",
    "FieldMatrix",
    "NoiseSpec",
    "sample_noise",
    "build_field",
    "build_periodized_field",
    "build_toeplitz",
    "build_circulant",
    "build_pseudo_diagonal",
    "save_matrix_csv",
    "load_matrix_csv",
]

# Stream-splitting rule: Philox key word 0 is the user seed, word 1 the
# matrix-kind code below.
KIND_CODES = {
    "noise": 0,
    "raw_field": 1,
    "periodized_field": 2,
    "toeplitz": 3,
    "circulant": 4,
    "pseudo_diagonal": 5,
    "generic": 6,
}

_UINT64_MASK = (1 << 64) - 1


class FieldMatrix:
    """A tagged N x n matrix (random field, noise sheet, or deterministic).

    ``kind`` is one of ``KIND_CODES``; ``seed`` records the noise seed the
    entries derive from (0 for purely deterministic matrices).  ``margin``
    is nonzero only for noise sheets sampled on an enlarged window.
    Instances are treated as immutable once built.
    """

    def __init__(self, entries, kind="generic", seed=0, margin=0):
        if kind not in KIND_CODES:
            raise ValueError(f"unknown matrix kind: {kind!r}")
        entries = np.asarray(entries)
        if entries.ndim != 2:
            raise ValueError("entries must be a 2-d array")
        if kind == "pseudo_diagonal":
            off = entries.copy()
            np.fill_diagonal(off, 0.0)
            if np.any(off != 0):
                raise ValueError("pseudo_diagonal matrix has off-diagonal entries")
        if kind in ("toeplitz", "circulant"):
            if entries.shape[0] != entries.shape[1]:
                raise ValueError(f"{kind} matrix must be square")
            if entries.shape[0] > 1 and \
                    np.any(entries[1:, 1:] != entries[:-1, :-1]):
                raise ValueError(f"{kind} matrix has non-constant diagonals")
            if kind == "circulant" and entries.shape[0] > 1 and \
                    np.any(entries[1] != np.roll(entries[0], 1)):
                raise ValueError("circulant matrix rows are not cyclic shifts")
        self.entries = entries
        self.kind = kind
        self.seed = int(seed)
        self.margin = int(margin)

    @property
    def rows(self):
        return self.entries.shape[0]

    @property
    def cols(self):
        return self.entries.shape[1]

    @property
    def shape(self):
        return self.entries.shape

    def __add__(self, other):
        a = other.entries if isinstance(other, FieldMatrix) else np.asarray(other)
        if a.shape != self.entries.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {a.shape}")
        return FieldMatrix(self.entries + a, kind="generic", seed=self.seed)

    def __sub__(self, other):
        a = other.entries if isinstance(other, FieldMatrix) else np.asarray(other)
        if a.shape != self.entries.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {a.shape}")
        return FieldMatrix(self.entries - a, kind="generic", seed=self.seed)


@dataclass(frozen=True)
class NoiseSpec:
    """Noise model: complex or real standard Gaussian entries.

    ``complex_standard`` draws U = A + iB with A, B independent real
    Gaussians of standard deviation 1/sqrt(2), so E U = 0, E U^2 = 0 and
    E |U|^2 = 1.  ``real_standard`` draws plain N(0, 1) variables.
    """

    distribution: str = "complex_standard"
    seed: int = 0

    def __post_init__(self):
        if self.distribution not in ("complex_standard", "real_standard"):
            raise ValueError(f"unknown distribution: {self.distribution!r}")


def _rng(seed, kind):
    key = np.array([seed & _UINT64_MASK, KIND_CODES[kind]], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_noise(N, n, spec, margin=0):
    """I.i.d. noise on the window [-margin, N+margin) x [-margin, n+margin).

    The enlarged window lets a raw field use genuinely out-of-window
    noise; the periodized field reads only the central N x n block.
    Index (j1, j2) is stored at (j1 + margin, j2 + margin).
    """
    if N < 1 or n < 1:
        raise ValueError(f"dimensions must be positive, got {N} x {n}")
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    rows, cols = N + 2 * margin, n + 2 * margin
    rng = _rng(spec.seed, "noise")
    if spec.distribution == "complex_standard":
        parts = rng.standard_normal(size=(2, rows, cols))
        entries = (parts[0] + 1j * parts[1]) / np.sqrt(2.0)
    else:
        entries = rng.standard_normal(size=(rows, cols))
    return FieldMatrix(entries, kind="noise", seed=spec.seed, margin=margin)


def _window_block(noise, N, n):
    m = noise.margin
    if noise.rows - 2 * m < N or noise.cols - 2 * m < n:
        raise ValueError(
            f"noise window {noise.rows - 2 * m} x {noise.cols - 2 * m} "
            f"smaller than requested {N} x {n}")
    return noise.entries[m:m + N, m:m + n]


def build_field(h: FilterSequence2D, noise: FieldMatrix, N, n):
    """Raw field: Z[j1, j2] = n^{-1/2} sum_k h(k) U(j1-k1, j2-k2)."""
    if noise.kind != "noise":
        raise ValueError("build_field needs a noise matrix")
    _window_block(noise, N, n)  # dimension sanity
    m = noise.margin
    if h.radius > m:
        raise ValueError(
            f"noise margin {m} too small for filter radius {h.radius}")
    k1s, k2s, coeffs = h.arrays()
    out = np.zeros((N, n), dtype=np.complex128)
    for k1, k2, c in zip(k1s, k2s, coeffs):
        r0, c0 = m - k1, m - k2
        out += c * noise.entries[r0:r0 + N, c0:c0 + n]
    out /= np.sqrt(n)
    if h.is_real and not np.iscomplexobj(noise.entries):
        out = out.real
    return FieldMatrix(out, kind="raw_field", seed=noise.seed)


def build_periodized_field(h: FilterSequence2D, noise: FieldMatrix, N, n):
    """Periodized field: noise indices reduced mod N and mod n.

    Uses only the central N x n block of the same noise sheet, so the
    raw and periodized fields built from one sheet are coupled.
    """
    if noise.kind != "noise":
        raise ValueError("build_periodized_field needs a noise matrix")
    block = _window_block(noise, N, n)
    k1s, k2s, coeffs = h.arrays()
    out = np.zeros((N, n), dtype=np.complex128)
    for k1, k2, c in zip(k1s, k2s, coeffs):
        # roll(A, (k1, k2))[j1, j2] == A[(j1 - k1) mod N, (j2 - k2) mod n]
        out += c * np.roll(block, shift=(int(k1), int(k2)), axis=(0, 1))
    out /= np.sqrt(n)
    if h.is_real and not np.iscomplexobj(noise.entries):
        out = out.real
    return FieldMatrix(out, kind="periodized_field", seed=noise.seed)


def build_toeplitz(a: FilterSequence1D, n):
    """Toeplitz matrix A[j1, j2] = a(j1 - j2)."""
    if n < 1:
        raise ValueError("n must be positive")
    table = np.zeros(2 * n - 1, dtype=np.complex128)  # index j + n - 1
    js, coeffs = a.arrays()
    for j, c in zip(js, coeffs):
        if -n < j < n:
            table[j + n - 1] = c
    idx = np.arange(n)
    entries = table[(idx[:, None] - idx[None, :]) + n - 1]
    if a.is_real:
        entries = entries.real
    return FieldMatrix(entries, kind="toeplitz")


def circulant_coefficients(a: FilterSequence1D, n):
    """Wrapped diagonal values atilde(j) of the circulant approximant.

    atilde(0) = a(0) + a(n) + a(-n), atilde(j) = a(j) + a(j - n) for
    0 < j <= n-1 and atilde(j) = a(j) + a(j + n) for -n+1 <= j < 0.
    Returned as an array indexed by j + n - 1 for j in (-n, n).
    """
    table = np.zeros(2 * n - 1, dtype=np.complex128)
    table[n - 1] = a[0] + a[n] + a[-n]
    for j in range(1, n):
        table[j + n - 1] = a[j] + a[j - n]
        table[-j + n - 1] = a[-j] + a[-j + n]
    return table


def build_circulant(a: FilterSequence1D, n):
    """Circulant approximant of the Toeplitz matrix of ``a``.

    Entries are atilde(j1 - j2) from :func:`circulant_coefficients`,
    which is the exact closed form of the Fourier sum
    (1/n) sum_k psi_n(k/n) e^{-2 pi i k (j1-j2)/n} with psi_n the symbol
    truncated to |j| <= n.  The Fourier matrix diagonalizes the result
    with eigenvalues psi_n(k/n).
    """
    if n < 1:
        raise ValueError("n must be positive")
    table = circulant_coefficients(a, n)
    idx = np.arange(n)
    entries = table[(idx[:, None] - idx[None, :]) + n - 1]
    if a.is_real:
        entries = entries.real
    return FieldMatrix(entries, kind="circulant")


def circulant_eigenvalues(a: FilterSequence1D, n):
    """Diagonal psi_n(k/n), k = 0..n-1, of the Fourier-conjugated circulant."""
    sym = SpectralSymbol1D(a, truncation=n)
    return np.asarray(sym.eval(np.arange(n) / n), dtype=np.complex128)


def build_pseudo_diagonal(diag, N, n):
    """Rectangular N x n matrix with ``diag`` on the main diagonal."""
    diag = np.asarray(diag)
    if diag.ndim != 1 or len(diag) != min(N, n):
        raise ValueError(
            f"diagonal length {diag.shape} does not match min({N}, {n})")
    entries = np.zeros((N, n), dtype=np.complex128)
    entries[np.arange(len(diag)), np.arange(len(diag))] = diag
    return FieldMatrix(entries, kind="pseudo_diagonal")


def save_matrix_csv(mat: FieldMatrix, path):
    """Write a matrix as CSV: metadata header then (row, col, re, im) lines.

    Layout: line 1 ``rows,cols,kind,seed``, line 2 the values, line 3 the
    column header, then one line per entry with 17 significant digits
    (lossless for doubles).  :func:`load_matrix_csv` round-trips exactly.
    """
    e = mat.entries
    with open(path, "w") as fh:
        fh.write("rows,cols,kind,seed\n")
        fh.write(f"{mat.rows},{mat.cols},{mat.kind},{mat.seed}\n")
        fh.write("row,col,re,im\n")
        for i in range(mat.rows):
            for j in range(mat.cols):
                v = complex(e[i, j])
                fh.write(f"{i},{j},{v.real:.17g},{v.imag:.17g}\n")


def load_matrix_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header != ["rows", "cols", "kind", "seed"]:
            raise ValueError(f"malformed matrix CSV header in {path}")
        rows_s, cols_s, kind, seed_s = fh.readline().strip().split(",")
        rows, cols, seed = int(rows_s), int(cols_s), int(seed_s)
        fh.readline()  # column header
        entries = np.zeros((rows, cols), dtype=np.complex128)
        for line in fh:
            i_s, j_s, re_s, im_s = line.strip().split(",")
            entries[int(i_s), int(j_s)] = complex(float(re_s), float(im_s))
    if np.all(entries.imag == 0.0):
        entries = entries.real.copy()
    return FieldMatrix(entries, kind=kind, seed=seed)
