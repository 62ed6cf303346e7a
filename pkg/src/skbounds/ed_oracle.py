"""Exact diagonalization of the transverse-field SK model for small N.

    H = -(1/sqrt(N)) sum_{i<j} g_ij sz_i sz_j - b sum_j sx_j

in the sz product basis; site 0 is the most significant bit, matching
``kron(s_0, s_1, ...)``.  The quenched density (1/N) E log Tr exp(-beta H)
is estimated by sampling couplings g_ij ~ N(0, 1).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial
import math

import numpy as np

from .errors import ConfigurationError, DomainError

MIN_SPINS = 2
MAX_SPINS = 10
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True, eq=False)
class SpinSystem:
    n: int
    couplings: np.ndarray
    b: float

    def __post_init__(self):
        if not MIN_SPINS <= self.n <= MAX_SPINS:
            raise ConfigurationError(f"n must be in [{MIN_SPINS}, {MAX_SPINS}], got {self.n}")
        g = np.asarray(self.couplings, dtype=float)
        if g.shape != (self.n * (self.n - 1) // 2,):
            raise ConfigurationError(
                f"expected {self.n * (self.n - 1) // 2} couplings for n={self.n}, got shape {g.shape}"
            )
        if not self.b >= 0:
            raise ConfigurationError(f"b must be non-negative, got {self.b}")
        g.setflags(write=False)
        object.__setattr__(self, "couplings", g)

    @property
    def dim(self):
        return 1 << self.n


@dataclass(frozen=True)
class DisorderEstimate:
    """Monte Carlo mean and standard error over coupling draws."""

    mean: float
    stderr: float
    samples: int
    seed: int
    failures: int = 0


def _sz_table(n):
    states = np.arange(1 << n)
    bits = (states[None, :] >> (n - 1 - np.arange(n))[:, None]) & 1
    return 1.0 - 2.0 * bits


def _pair_table(n):
    sz = _sz_table(n)
    i, j = np.triu_indices(n, k=1)
    return sz[i] * sz[j]


def _flip_matrix(n):
    dim = 1 << n
    x = np.zeros((dim, dim))
    states = np.arange(dim)
    for k in range(n):
        x[states, states ^ (1 << k)] = 1.0
    return x


def _hamiltonians(n, g, b):
    """Stack of Hamiltonians for coupling rows ``g`` of shape (S, n(n-1)/2)."""
    diag = -(g @ _pair_table(n)) / math.sqrt(n)
    h = np.broadcast_to(-b * _flip_matrix(n), (g.shape[0], 1 << n, 1 << n)).copy()
    idx = np.arange(1 << n)
    h[:, idx, idx] = diag
    return h


def build_hamiltonian(sys):
    """Dense real symmetric Hamiltonian of dimension 2^n."""
    return _hamiltonians(sys.n, sys.couplings[None, :], sys.b)[0]


def log_partition(beta, eigenvalues):
    """log sum_i exp(-beta lambda_i), shifted by the ground-state energy."""
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size == 0:
        raise DomainError("empty spectrum")
    lo = lam.min()
    return float(-beta * lo + np.log(np.sum(np.exp(-beta * (lam - lo)))))


def gaussian_stream(seed, index, count):
    """``count`` standard normals for sample ``index`` of stream ``seed``.

    A Philox-4x64 counter-based generator keyed by ``seed`` starts at counter
    (0, 0, 0, index), so samples are independent and individually
    reproducible.  Raw 64-bit words become uniforms on (0, 1] via
    ``((w >> 11) + 1) * 2^-53`` and pairs are mapped by Box-Muller:
    ``sqrt(-2 log u1) * (cos, sin)(2 pi u2)``.
    """
    bitgen = np.random.Philox(key=int(seed) & _MASK64, counter=[0, 0, 0, int(index)])
    pairs = (count + 1) // 2
    raw = bitgen.random_raw(2 * pairs)
    u = ((raw >> np.uint64(11)).astype(float) + 1.0) * 2.0**-53
    r = np.sqrt(-2.0 * np.log(u[0::2]))
    theta = 2.0 * np.pi * u[1::2]
    return np.column_stack((r * np.cos(theta), r * np.sin(theta))).ravel()[:count]


def draw_system(n, b, seed, index):
    return SpinSystem(n, gaussian_stream(seed, index, n * (n - 1) // 2), b)


def _chunk_spectra(n, b, seed, indices):
    g = np.stack([gaussian_stream(seed, i, n * (n - 1) // 2) for i in indices])
    h = _hamiltonians(n, g, b)
    try:
        return np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError:
        pass
    out = np.full((len(indices), 1 << n), np.nan)
    for k in range(len(indices)):
        try:
            out[k] = np.linalg.eigvalsh(h[k])
        except np.linalg.LinAlgError:
            pass  # NaN row, counted as a failed sample
    return out


_SPECTRA_CACHE = {}
_SPECTRA_CACHE_SIZE = 8


def disorder_spectra(n, b, samples, seed, threads=1, chunk=64):
    """Spectra of ``samples`` coupling draws, one row per sample index.

    Independent of beta, so results are memoized for a few (n, b, samples,
    seed) keys.  Failed eigensolves leave NaN rows.
    """
    key = (n, float(b), samples, seed)
    hit = _SPECTRA_CACHE.get(key)
    if hit is not None:
        return hit
    blocks = [range(i, min(i + chunk, samples)) for i in range(0, samples, chunk)]
    job = partial(_chunk_spectra, n, b, seed)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(job, blocks))
    else:
        parts = [job(bl) for bl in blocks]
    spectra = np.concatenate(parts)
    spectra.setflags(write=False)
    if len(_SPECTRA_CACHE) >= _SPECTRA_CACHE_SIZE:
        _SPECTRA_CACHE.pop(next(iter(_SPECTRA_CACHE)))
    _SPECTRA_CACHE[key] = spectra
    return spectra


def phi_n_estimate(n, c, samples, seed=0, threads=1):
    """Estimate (1/n) E log Z_n(beta, b, g) over ``samples`` coupling draws.

    Draws are diagonalized in chunks on a thread pool and gathered by sample
    index, so the estimate does not depend on scheduling.
    """
    if not MIN_SPINS <= n <= MAX_SPINS:
        raise ConfigurationError(f"n must be in [{MIN_SPINS}, {MAX_SPINS}], got {n}")
    if samples < 10:
        raise ConfigurationError(f"need at least 10 samples, got {samples}")
    if not 0 <= seed <= _MASK64:
        raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    spectra = disorder_spectra(n, c.b, samples, seed, threads)
    good = np.all(np.isfinite(spectra), axis=1)
    lam = spectra[good]
    if lam.shape[0] < 2:
        raise DomainError("fewer than two disorder samples succeeded")
    lo = lam.min(axis=1, keepdims=True)
    values = (-c.beta * lo[:, 0] + np.log(np.sum(np.exp(-c.beta * (lam - lo)), axis=1))) / n
    return DisorderEstimate(float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size)),
                            int(values.size), int(seed), int(samples - values.size))


def z2_check(sys, beta):
    """max_i |Tr sz_i exp(-beta H)| / Tr exp(-beta H); zero by flip symmetry."""
    lam, vec = np.linalg.eigh(build_hamiltonian(sys))
    p = np.exp(-beta * (lam - lam.min()))
    mags = _sz_table(sys.n) @ ((vec * vec) @ p)
    return float(np.max(np.abs(mags)) / p.sum())
