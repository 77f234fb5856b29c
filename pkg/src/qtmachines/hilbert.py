"""Dense operator and state algebra.

Operators are plain complex ``numpy`` arrays. Density matrices are the same
arrays with the usual trace/positivity constraints, checked on demand by
:func:`check_density_matrix`. Internally hbar = k_B = 1.

All matrix functions of hermitian arguments (exp, log, sqrt) go through the
eigendecomposition.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, InvalidInputError

HERMITIAN_RTOL = 1e-12
STATE_ATOL = 1e-10
EIG_CLIP = 1e-10
ENTROPY_CUTOFF = 1e-14
SUPPORT_TOL = 1e-12


def dag(a):
    return np.conj(np.swapaxes(a, -1, -2))


def is_hermitian(a, rtol=HERMITIAN_RTOL):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = np.abs(a).max() if a.size else 0.0
    return bool(np.abs(a - dag(a)).max(initial=0.0) <= rtol * max(scale, 1e-300))


def check_hermitian(a, name="operator"):
    a = np.asarray(a, dtype=complex)
    if not is_hermitian(a):
        raise InvalidInputError(f"{name} is not hermitian")
    return a


def check_density_matrix(rho, atol=STATE_ATOL, name="rho"):
    """Validate ``rho`` as a density matrix and return it as a complex array."""
    rho = check_hermitian(rho, name)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > atol:
        raise InvalidInputError(f"{name} has trace {tr!r}, expected 1")
    evals = np.linalg.eigvalsh(rho)
    if evals[0] < -atol:
        raise InvalidInputError(f"{name} has negative eigenvalue {evals[0]!r}")
    return rho


def hermitize(a):
    return 0.5 * (a + dag(a))


def clip_state(rho):
    """Hermitize, clip eigenvalues below ``EIG_CLIP`` to zero and renormalize."""
    evals, evecs = np.linalg.eigh(hermitize(np.asarray(rho, dtype=complex)))
    evals = np.where(evals < EIG_CLIP, 0.0, evals)
    evals = evals / evals.sum()
    return (evecs * evals) @ dag(evecs)


def herm_fn(a, fn):
    """Apply the scalar function ``fn`` to a hermitian matrix via its eigenbasis."""
    evals, evecs = np.linalg.eigh(a)
    return (evecs * fn(evals)) @ dag(evecs)


def expectation(rho, a):
    return np.trace(rho @ a).real


def commutator(a, b):
    return a @ b - b @ a


def ground_projector(h, tol=1e-10):
    evals, evecs = np.linalg.eigh(h)
    scale = max(np.abs(evals).max(), 1.0)
    ground = evecs[:, evals - evals[0] <= tol * scale]
    return ground @ dag(ground) / ground.shape[1]


def thermal_state(h, beta, return_partition=False):
    """Gibbs state ``exp(-beta H) / Z``.

    ``beta = np.inf`` returns the uniform mixture over the ground space. The
    partition function is referenced to the ground energy, i.e. the returned
    ``Z`` is ``sum exp(-beta (E_n - E_0))``.
    """
    h = check_hermitian(h, "H")
    if np.isnan(beta) or beta < 0:
        raise InvalidInputError(f"beta must be >= 0, got {beta!r}")
    if np.isinf(beta):
        rho = ground_projector(h)
        z = float(round(1.0 / np.trace(rho @ rho).real))
        return (rho, z) if return_partition else rho
    evals, evecs = np.linalg.eigh(h)
    weights = np.exp(-beta * (evals - evals[0]))
    z = weights.sum()
    rho = (evecs * (weights / z)) @ dag(evecs)
    return (rho, z) if return_partition else rho


def von_neumann_entropy(rho):
    p = np.linalg.eigvalsh(hermitize(np.asarray(rho, dtype=complex)))
    p = p[p > ENTROPY_CUTOFF]
    return float(-(p * np.log(p)).sum())


def relative_entropy(rho, sigma):
    """Quantum relative entropy ``S(rho || sigma) = tr rho (ln rho - ln sigma)``.

    Raises :class:`DivergenceError` when the support of ``rho`` is not contained
    in the support of ``sigma``.
    """
    rho = hermitize(np.asarray(rho, dtype=complex))
    sigma = hermitize(np.asarray(sigma, dtype=complex))
    p, u = np.linalg.eigh(rho)
    s, v = np.linalg.eigh(sigma)
    # overlaps[i, j] = |<u_i|v_j>|^2
    overlaps = np.abs(dag(u) @ v) ** 2
    keep_p = p > SUPPORT_TOL
    null_s = s <= SUPPORT_TOL
    leak = (p[keep_p, None] * overlaps[np.ix_(keep_p, null_s)]).sum()
    if leak > SUPPORT_TOL:
        raise DivergenceError("support of rho is not contained in support of sigma")
    pk = p[keep_p]
    log_s = np.log(np.where(null_s, 1.0, s))
    cross = (pk[:, None] * overlaps[keep_p][:, ~null_s] * log_s[~null_s]).sum()
    return float((pk * np.log(pk)).sum() - cross)


def fidelity(rho, sigma):
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``."""
    sq = herm_fn(hermitize(np.asarray(rho, dtype=complex)), lambda x: np.sqrt(np.clip(x, 0, None)))
    inner = hermitize(sq @ sigma @ sq)
    f = np.sqrt(np.clip(np.linalg.eigvalsh(inner), 0, None)).sum() ** 2
    return float(min(max(f, 0.0), 1.0))


def bures_length(rho, sigma):
    """Bures length (angle) ``arccos(sqrt(F))``, in ``[0, pi/2]``."""
    return float(np.arccos(np.sqrt(fidelity(rho, sigma))))


def _subsystem_index(keep):
    if keep in (0, "A", "a"):
        return 0
    if keep in (1, "B", "b"):
        return 1
    raise InvalidInputError(f"unknown subsystem {keep!r}")


def partial_trace(rho, dims, keep):
    """Reduced state of a bipartite ``rho`` on ``dims = (d_A, d_B)``.

    Subsystem A is the slow tensor index. ``keep`` is ``"A"``/``0`` or
    ``"B"``/``1``.
    """
    d_a, d_b = dims
    rho = np.asarray(rho)
    if rho.shape != (d_a * d_b, d_a * d_b):
        raise InvalidInputError(f"state of shape {rho.shape} does not match dims {dims}")
    t = rho.reshape(d_a, d_b, d_a, d_b)
    if _subsystem_index(keep) == 0:
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijil->jl", t)


@dataclass(frozen=True)
class BipartiteState:
    rho: np.ndarray
    dims: tuple

    def __post_init__(self):
        d_a, d_b = self.dims
        if self.rho.shape != (d_a * d_b, d_a * d_b):
            raise InvalidInputError(f"state shape {self.rho.shape} does not match dims {self.dims}")
        check_density_matrix(self.rho)

    def reduced(self, keep):
        return partial_trace(self.rho, self.dims, keep)

    @classmethod
    def product(cls, rho_a, rho_b):
        return cls(np.kron(rho_a, rho_b), (rho_a.shape[0], rho_b.shape[0]))


def random_unitary(dim, rng):
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density_matrix(dim, rng, rank=None):
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ dag(g)
    return rho / np.trace(rho).real


def random_hermitian(dim, rng, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * hermitize(a)
