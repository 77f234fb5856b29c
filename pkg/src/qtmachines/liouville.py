"""Liouville-space superoperators.

Convention: a state evolves as ``i d|rho>/dt = L |rho>`` (hbar = 1), so the
propagator over time ``t`` is ``exp(-i L t)``. With this convention the
Hamiltonian part is the commutator superoperator ``H x I - I x H^T`` and a
Lindblad dissipator carries an explicit factor ``i``. Vectorization is
row-major, ``vec(A rho B) = (A kron B^T) vec(rho)``.
"""
import numpy as np
from scipy.linalg import expm, schur, svd

from .errors import AmbiguityError, InvalidInputError
from .hilbert import check_hermitian, dag, hermitize

TRACE_TOL = 1e-10
KERNEL_TOL = 1e-8


def vec(rho):
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {rho.shape}")
    return rho.reshape(-1).copy()


def unvec(v):
    v = np.asarray(v)
    n = int(round(np.sqrt(v.size)))
    if n * n != v.size:
        raise InvalidInputError(f"length {v.size} is not a perfect square")
    return v.reshape(n, n).copy()


def hilbert_dim(superop):
    n = int(round(np.sqrt(superop.shape[0])))
    if n * n != superop.shape[0] or superop.shape[0] != superop.shape[1]:
        raise InvalidInputError(f"superoperator shape {superop.shape} is not N^2 x N^2")
    return n


def left_mult(a):
    """Superoperator of ``rho -> a @ rho``."""
    return np.kron(a, np.eye(a.shape[0]))


def right_mult(b):
    """Superoperator of ``rho -> rho @ b``."""
    return np.kron(np.eye(b.shape[0]), b.T)


def sandwich(a, b=None):
    """Superoperator of ``rho -> a @ rho @ b`` (``b`` defaults to ``a^dagger``)."""
    b = dag(a) if b is None else b
    return np.kron(a, b.T)


def hamiltonian_superop(h):
    h = check_hermitian(h, "H")
    return left_mult(h) - right_mult(h)


def dissipator_superop(ops, dim=None):
    """LGKS dissipator ``i sum_k (S rho S^+ - 1/2 {S^+ S, rho})`` in Liouville space.

    ``dim`` is only needed when ``ops`` is empty.
    """
    ops = [np.asarray(s, dtype=complex) for s in ops]
    if not ops:
        if dim is None:
            raise InvalidInputError("dim is required for an empty operator list")
        return np.zeros((dim * dim, dim * dim), dtype=complex)
    n = ops[0].shape[0]
    if any(s.shape != (n, n) for s in ops) or (dim is not None and dim != n):
        raise InvalidInputError("dissipator operators have mismatched dimensions")
    out = np.zeros((n * n, n * n), dtype=complex)
    for s in ops:
        sds = dag(s) @ s
        out += sandwich(s) - 0.5 * left_mult(sds) - 0.5 * right_mult(sds)
    return 1j * out


def lindblad_rhs(h, ops, rho):
    """Hilbert-space ``d rho / dt`` for the same generator (reference implementation)."""
    out = -1j * (h @ rho - rho @ h)
    for s in ops:
        sds = dag(s) @ s
        out += s @ rho @ dag(s) - 0.5 * (sds @ rho + rho @ sds)
    return out


def is_normal(m, tol=1e-12):
    scale = max(np.abs(m).max(), 1e-300)
    comm = m @ dag(m) - dag(m) @ m
    return np.abs(comm).max() <= tol * scale * scale


def propagate(generator, t):
    """One-time-step map ``exp(-i L t)``."""
    if t < 0:
        raise InvalidInputError(f"time must be >= 0, got {t!r}")
    generator = np.asarray(generator, dtype=complex)
    if t == 0:
        return np.eye(generator.shape[0], dtype=complex)
    a = -1j * t * generator
    if is_normal(a):
        # the Schur form of a normal matrix is diagonal
        t_form, q = schur(a, output="complex")
        return (q * np.exp(np.diag(t_form))) @ dag(q)
    return expm(a)


def integrated_propagator(generator, t):
    """Return ``(exp(-i L t), int_0^t exp(-i L s) ds)`` via one block exponential."""
    if t < 0:
        raise InvalidInputError(f"time must be >= 0, got {t!r}")
    n = generator.shape[0]
    block = np.zeros((2 * n, 2 * n), dtype=complex)
    block[:n, :n] = -1j * generator
    block[:n, n:] = np.eye(n)
    e = expm(block * t)
    return e[:n, :n], e[:n, n:]


def spectral_norm(superop):
    return float(np.linalg.norm(superop, 2))


def action_norm(schedule):
    """Sum of ``||L_i|| * dt_i`` over a piecewise-constant schedule."""
    total = 0.0
    for gen, dt in schedule:
        if dt < 0:
            raise InvalidInputError(f"negative duration {dt!r}")
        total += spectral_norm(gen) * dt
    return total


def trace_functional(n):
    """Row vector ``<vec(I)|``."""
    return vec(np.eye(n)).astype(complex)


def expect(op, v):
    """``tr(op rho)`` for ``v = vec(rho)``, i.e. ``<op^dagger | rho>`` in Liouville space."""
    return np.dot(vec(op.T), v)


def stationary_state(generator, tol=KERNEL_TOL):
    """Unique kernel vector of ``generator`` as a normalized density matrix."""
    hilbert_dim(generator)
    _, s, vh = svd(generator)
    null = s <= tol * (s[0] if s[0] > 0 else 1.0)
    if null.sum() > 1:
        raise AmbiguityError(f"kernel dimension {null.sum()} > 1")
    rho = unvec(np.conj(vh[-1]))
    tr = np.trace(rho)
    if abs(tr) < 1e-14:
        raise AmbiguityError("kernel vector is traceless")
    return hermitize(rho / tr)


def fixed_point(channel, tol=KERNEL_TOL):
    """Fixed point of a map ``Lambda`` as a normalized density matrix."""
    return stationary_state(channel - np.eye(channel.shape[0]), tol=tol)
