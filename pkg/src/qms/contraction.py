"""Trace-norm contraction coefficients and induced 1->1 norms.

The contraction coefficient tau(L) is the worst-case trace-norm growth on
traceless Hermitian inputs; for Hermiticity-preserving maps it equals half
the maximal output distance over pairs of orthogonal pure states.  On
qubits every traceless Hermitian extreme point is a Bloch direction, so a
dense sphere grid plus local refinement serves as the oracle.  For d >= 3
the values come from multistart local ascent and are *lower bounds*; the
spread over restarts is reported as a quality signal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.optimize

from .channels import SuperOperator
from .errors import DimensionError, DomainError
from .linalg import spectral_norm, trace_norm, trace_norm_batch
from .rng import SplitMix64, derive_seed

DEFAULT_RESTARTS = 64
DEFAULT_GRID = 20000
TOL_OPT = 1e-6
FD_STEP = 1e-5
_REL_IMPROVEMENT = 1e-10


@dataclass
class ContractionEstimate:
    """An optimizer output; ``value`` is a certified lower bound.

    ``best_witness`` reproduces ``value`` when plugged back into the
    objective.  ``convergence_spread`` is max - min over restart optima
    that converged (0.0 for grid and analytic methods).
    """

    value: float
    method: str                      # qubit_grid | multistart_manifold | analytic
    restarts: int
    best_witness: object
    convergence_spread: float
    error_bound: Optional[float] = None

    def to_dict(self) -> dict:
        return {"value": self.value, "method": self.method,
                "restarts": self.restarts,
                "convergence_spread": self.convergence_spread,
                "error_bound": self.error_bound}


# ---------------------------------------------------------------------------
# batched application helpers


def _apply_matrix_batch(m: np.ndarray, mats: np.ndarray, d: int) -> np.ndarray:
    n = mats.shape[0]
    v = mats.transpose(0, 2, 1).reshape(n, d * d)
    return (v @ m.T).reshape(n, d, d).transpose(0, 2, 1)


def _swap_conjugate(m: np.ndarray, d: int) -> np.ndarray:
    """Theta M Theta for the transpose permutation Theta (vec(X) -> vec(X^T))."""
    m4 = m.reshape(d, d, d, d)
    return m4.transpose(1, 0, 3, 2).reshape(d * d, d * d)


def hermiticity_preserving_residual(t: SuperOperator) -> float:
    """|| conj(M) - Theta M Theta ||_2; zero iff the map is Hermiticity-preserving."""
    return float(spectral_norm(t.matrix.conj() - _swap_conjugate(t.matrix, t.dim)))


def _require_hermiticity_preserving(t: SuperOperator, context: str):
    res = hermiticity_preserving_residual(t)
    if res > 1e-8 * max(1.0, spectral_norm(t.matrix)):
        raise DomainError(
            f"{context}: map is not Hermiticity-preserving (residual {res:.3g}); "
            "use the traceless-Hermitian path (traceless_hermitian=True)")


# ---------------------------------------------------------------------------
# qubit grid oracle


def fibonacci_sphere(n: int) -> np.ndarray:
    """n near-uniform unit vectors on S^2 (deterministic lattice)."""
    i = np.arange(n, dtype=float)
    z = 1.0 - 2.0 * (i + 0.5) / n
    phi = i * (np.pi * (3.0 - np.sqrt(5.0)))
    r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _bloch_matrices(dirs: np.ndarray) -> np.ndarray:
    """n . sigma for an (N, 3) stack of Bloch vectors."""
    x, y, z = dirs[:, 0], dirs[:, 1], dirs[:, 2]
    out = np.empty((len(dirs), 2, 2), dtype=complex)
    out[:, 0, 0] = z
    out[:, 0, 1] = x - 1j * y
    out[:, 1, 0] = x + 1j * y
    out[:, 1, 1] = -z
    return out


def tau_exact_qubit(t: SuperOperator, grid: int = DEFAULT_GRID) -> ContractionEstimate:
    """Contraction coefficient of a qubit map by dense Bloch-sphere search.

    Evaluates (1/2) ||L(n.sigma)||_1 on a Fibonacci lattice of ``grid``
    directions, then polishes the best candidates with Nelder-Mead.  The
    reported ``error_bound`` is the objective's Lipschitz estimate
    2 ||M||_2 times the lattice covering radius (about 2.6/sqrt(grid)).
    """
    if t.dim != 2:
        raise DimensionError(f"qubit grid oracle requires dim 2, got {t.dim}")
    m = t.matrix

    def objective_dirs(dirs):
        return 0.5 * trace_norm_batch(_apply_matrix_batch(m, _bloch_matrices(dirs), 2))

    dirs = fibonacci_sphere(grid)
    vals = objective_dirs(dirs)
    top = np.argsort(vals)[-4:]

    def neg(x):
        nrm = np.linalg.norm(x)
        if nrm == 0.0:
            return 0.0
        return -float(objective_dirs((x / nrm)[None, :])[0])

    best_dir = dirs[top[-1]]
    best_val = float(vals[top[-1]])
    for idx in top:
        res = scipy.optimize.minimize(neg, dirs[idx], method="Nelder-Mead",
                                      options={"xatol": 1e-12, "fatol": 1e-14,
                                               "maxiter": 600})
        if -res.fun > best_val:
            best_val = float(-res.fun)
            best_dir = res.x / np.linalg.norm(res.x)

    sigma = _bloch_matrices(best_dir[None, :])[0]
    evals, evecs = np.linalg.eigh(sigma)
    psi, phi = evecs[:, 0], evecs[:, 1]          # eigenvalues -1, +1
    witness = (phi, psi)
    value = 0.5 * trace_norm(
        t.apply(np.outer(phi, phi.conj()) - np.outer(psi, psi.conj())))
    value = max(value, best_val)
    lipschitz = 2.0 * spectral_norm(m)
    return ContractionEstimate(value=value, method="qubit_grid", restarts=0,
                               best_witness=witness, convergence_spread=0.0,
                               error_bound=lipschitz * 2.6 / np.sqrt(grid))


# ---------------------------------------------------------------------------
# batched multistart ascent


def _fd_gradient(f: Callable, xs: np.ndarray, h: float) -> np.ndarray:
    a, p = xs.shape
    pert = np.repeat(xs[:, None, :], 2 * p, axis=1)
    idx = np.arange(p)
    pert[:, 2 * idx, idx] += h
    pert[:, 2 * idx + 1, idx] -= h
    vals = f(pert.reshape(a * 2 * p, p)).reshape(a, 2 * p)
    return (vals[:, 0::2] - vals[:, 1::2]) / (2.0 * h)


def _multistart_ascent(objective, tangent_project, retract, x0: np.ndarray,
                       maxiter: int = 300):
    """Lockstep projected-gradient ascent with per-restart step halving.

    Each restart's trajectory depends only on its own state, so results are
    identical to running the restarts individually (and hence independent
    of any parallel schedule).
    """
    xs = x0.copy()
    fs = objective(xs)
    nrestarts = xs.shape[0]
    alpha = np.full(nrestarts, 0.25)
    converged = np.zeros(nrestarts, dtype=bool)
    have_grad = np.zeros(nrestarts, dtype=bool)
    grads = np.zeros_like(xs)

    for _ in range(maxiter):
        active = ~converged
        if not active.any():
            break
        need = active & ~have_grad
        if need.any():
            g = _fd_gradient(objective, xs[need], FD_STEP)
            grads[need] = tangent_project(xs[need], g)
            have_grad[need] = True
        act = np.nonzero(active)[0]
        trial = retract(xs[act] + alpha[act, None] * grads[act])
        ft = objective(trial)
        gain = ft - fs[act]
        improved = gain > 0.0
        acc, rej = act[improved], act[~improved]
        xs[acc] = trial[improved]
        fs[acc] = ft[improved]
        have_grad[acc] = False
        small = gain[improved] <= _REL_IMPROVEMENT * np.maximum(np.abs(fs[acc]), 1.0)
        converged[acc[small]] = True
        alpha[acc] = np.minimum(alpha[acc] * 1.5, 0.5)
        alpha[rej] *= 0.5
        converged[rej[alpha[rej] < 1e-12]] = True
    return xs, fs, converged


def _sphere_project_blocks(xs: np.ndarray, gs: np.ndarray, blocks) -> np.ndarray:
    out = gs.copy()
    for lo, hi in blocks:
        x = xs[:, lo:hi]
        g = gs[:, lo:hi]
        coef = np.sum(x * g, axis=1, keepdims=True)
        nrm2 = np.maximum(np.sum(x * x, axis=1, keepdims=True), 1e-300)
        out[:, lo:hi] = g - x * (coef / nrm2)
    return out


def _sphere_retract_blocks(xs: np.ndarray, blocks) -> np.ndarray:
    out = xs.copy()
    for lo, hi in blocks:
        nrm = np.linalg.norm(out[:, lo:hi], axis=1, keepdims=True)
        nrm = np.where(nrm == 0.0, 1.0, nrm)
        out[:, lo:hi] /= nrm
    return out


class _VectorPairProblem:
    """Rank-one inputs u v^dag over independent unit vectors (general 1->1 norm)."""

    def __init__(self, t: SuperOperator):
        self.m = t.matrix
        self.d = t.dim
        d = t.dim
        self.nparams = 4 * d
        self.blocks = [(0, 2 * d), (2 * d, 4 * d)]

    def _split(self, xs):
        d = self.d
        u = xs[:, :d] + 1j * xs[:, d:2 * d]
        v = xs[:, 2 * d:3 * d] + 1j * xs[:, 3 * d:]
        return u, v

    def objective(self, xs):
        u, v = self._split(xs)
        mats = u[:, :, None] * v.conj()[:, None, :]
        return trace_norm_batch(_apply_matrix_batch(self.m, mats, self.d))

    def tangent(self, xs, gs):
        return _sphere_project_blocks(xs, gs, self.blocks)

    def retract(self, xs):
        return _sphere_retract_blocks(xs, self.blocks)

    def initial(self, gen: SplitMix64):
        x = gen.normals(self.nparams)
        return self.retract(x[None, :])[0]

    def witness(self, x):
        u, v = self._split(x[None, :])
        return (u[0], v[0])

    def evaluate_witness(self, w):
        u, v = w
        return trace_norm(_apply_matrix_batch(self.m, (np.outer(u, v.conj()))[None],
                                              self.d)[0])


class _SingleVectorProblem:
    """Pure-state inputs psi psi^dag (Hermitian-restricted 1->1 norm)."""

    def __init__(self, t: SuperOperator):
        self.m = t.matrix
        self.d = t.dim
        self.nparams = 2 * t.dim
        self.blocks = [(0, 2 * t.dim)]

    def _psi(self, xs):
        d = self.d
        return xs[:, :d] + 1j * xs[:, d:]

    def objective(self, xs):
        psi = self._psi(xs)
        mats = psi[:, :, None] * psi.conj()[:, None, :]
        return trace_norm_batch(_apply_matrix_batch(self.m, mats, self.d))

    def tangent(self, xs, gs):
        return _sphere_project_blocks(xs, gs, self.blocks)

    def retract(self, xs):
        return _sphere_retract_blocks(xs, self.blocks)

    def initial(self, gen: SplitMix64):
        return self.retract(gen.normals(self.nparams)[None, :])[0]

    def witness(self, x):
        return self._psi(x[None, :])[0]

    def evaluate_witness(self, psi):
        return trace_norm(_apply_matrix_batch(
            self.m, np.outer(psi, psi.conj())[None], self.d)[0])


class _OrthoPairProblem:
    """Orthonormal pairs (phi, psi) as the first two columns of a unitary."""

    def __init__(self, t: SuperOperator):
        self.m = t.matrix
        self.d = t.dim
        self.nparams = 4 * t.dim

    def _q(self, xs):
        d = self.d
        return (xs[:, :2 * d] + 1j * xs[:, 2 * d:]).reshape(-1, d, 2)

    def _x(self, q):
        flat = q.reshape(-1, 2 * self.d)
        return np.concatenate([flat.real, flat.imag], axis=1)

    def objective(self, xs):
        q = self._q(xs)
        phi, psi = q[:, :, 0], q[:, :, 1]
        mats = phi[:, :, None] * phi.conj()[:, None, :] \
            - psi[:, :, None] * psi.conj()[:, None, :]
        return 0.5 * trace_norm_batch(_apply_matrix_batch(self.m, mats, self.d))

    def tangent(self, xs, gs):
        q = self._q(xs)
        g = self._q(gs)
        qhg = np.einsum("bij,bik->bjk", q.conj(), g)
        herm = (qhg + qhg.conj().transpose(0, 2, 1)) / 2
        return self._x(g - np.einsum("bij,bjk->bik", q, herm))

    def retract(self, xs):
        q = self._q(xs)
        qq, rr = np.linalg.qr(q)
        diag = np.einsum("bii->bi", rr)
        phase = np.where(np.abs(diag) > 0, diag / np.maximum(np.abs(diag), 1e-300), 1.0)
        return self._x(qq * phase[:, None, :])

    def initial(self, gen: SplitMix64):
        q = gen.complex_normals((self.d, 2))
        return self.retract(self._x(q[None, :, :]))[0]

    def witness(self, x):
        q = self._q(x[None, :])[0]
        return (q[:, 0], q[:, 1])

    def evaluate_witness(self, w):
        phi, psi = w
        sigma = np.outer(phi, phi.conj()) - np.outer(psi, psi.conj())
        return 0.5 * trace_norm(_apply_matrix_batch(self.m, sigma[None], self.d)[0])


def traceless_hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal (Hilbert-Schmidt) basis of traceless Hermitian d x d matrices."""
    out = []
    for i in range(d):
        for j in range(i + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[i, j] = m[j, i] = 1.0 / np.sqrt(2.0)
            out.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[i, j], m[j, i] = -1j / np.sqrt(2.0), 1j / np.sqrt(2.0)
            out.append(m)
    for k in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        for i in range(k):
            m[i, i] = 1.0
        m[k, k] = -k
        out.append(m / np.sqrt(k * (k + 1)))
    return np.array(out)


class _TracelessHermitianProblem:
    """Direct ratio ||L(sigma)||_1 / ||sigma||_1 over traceless Hermitian sigma."""

    def __init__(self, t: SuperOperator):
        self.m = t.matrix
        self.d = t.dim
        self.basis = traceless_hermitian_basis(t.dim)
        self.nparams = len(self.basis)
        self.blocks = [(0, self.nparams)]

    def _sigma(self, xs):
        return np.einsum("bp,pij->bij", xs, self.basis)

    def objective(self, xs):
        sig = self._sigma(xs)
        denom = np.maximum(trace_norm_batch(sig), 1e-300)
        return trace_norm_batch(_apply_matrix_batch(self.m, sig, self.d)) / denom

    def tangent(self, xs, gs):
        return _sphere_project_blocks(xs, gs, self.blocks)

    def retract(self, xs):
        return _sphere_retract_blocks(xs, self.blocks)

    def initial(self, gen: SplitMix64):
        return self.retract(gen.normals(self.nparams)[None, :])[0]

    def witness(self, x):
        return self._sigma(x[None, :])[0]

    def evaluate_witness(self, sigma):
        return (trace_norm(_apply_matrix_batch(self.m, sigma[None], self.d)[0])
                / trace_norm(sigma))


def _run_multistart(problem, restarts: int, seed: int, method: str,
                    maxiter: int = 300) -> ContractionEstimate:
    x0 = np.stack([problem.initial(SplitMix64(derive_seed(seed, r)))
                   for r in range(restarts)])
    xs, fs, converged = _multistart_ascent(problem.objective, problem.tangent,
                                           problem.retract, x0, maxiter=maxiter)
    best = int(np.argmax(fs))
    witness = problem.witness(xs[best])
    value = float(problem.evaluate_witness(witness))
    conv_vals = fs[converged] if converged.any() else fs
    spread = float(conv_vals.max() - conv_vals.min()) if len(conv_vals) else 0.0
    return ContractionEstimate(value=value, method=method, restarts=restarts,
                               best_witness=witness, convergence_spread=spread)


# ---------------------------------------------------------------------------
# public estimators


def tau(t: SuperOperator, restarts: int = DEFAULT_RESTARTS, seed: int = 0,
        traceless_hermitian: bool = False, grid: int = DEFAULT_GRID,
        maxiter: int = 300) -> ContractionEstimate:
    """Trace-norm contraction coefficient tau(L), as a lower-bound estimate.

    For qubit maps this delegates to the dense-grid oracle
    :func:`tau_exact_qubit`.  For d >= 3 it runs ``restarts`` independent
    projected-gradient ascents over pairs of orthonormal vectors (restart r
    is seeded with seed * 0x9E3779B97F4A7C15 + r, so prefixes of the
    restart stream are reproducible).

    The orthogonal-pure-state form requires a Hermiticity-preserving map;
    for other maps pass ``traceless_hermitian=True`` to optimize the
    defining ratio over traceless Hermitian inputs directly.
    """
    if traceless_hermitian:
        return _run_multistart(_TracelessHermitianProblem(t), restarts, seed,
                               "multistart_manifold", maxiter)
    _require_hermiticity_preserving(t, "tau")
    if t.dim == 2:
        return tau_exact_qubit(t, grid=grid)
    return _run_multistart(_OrthoPairProblem(t), restarts, seed,
                           "multistart_manifold", maxiter)


def norm_1to1(t: SuperOperator, restarts: int = DEFAULT_RESTARTS, seed: int = 0,
              hermitian_only: bool = False, maxiter: int = 300) -> ContractionEstimate:
    """Induced 1->1 norm sup ||L(X)||_1 / ||X||_1, as a lower-bound estimate.

    General mode optimizes over rank-one X = u v^dag (the extreme points of
    the trace-norm ball); ``hermitian_only`` restricts to Hermitian X,
    whose extreme points are +/- psi psi^dag.
    """
    problem = _SingleVectorProblem(t) if hermitian_only else _VectorPairProblem(t)
    return _run_multistart(problem, restarts, seed, "multistart_manifold", maxiter)


def tau_of_powers_check(t: SuperOperator, n_max: int,
                        restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                        grid: int = DEFAULT_GRID) -> list:
    """Tabulate (n, tau(L^n), tau(L)^n) for n = 1..n_max.

    Raises :class:`DomainError` if the estimates violate submultiplicativity
    beyond TOL_OPT (which would indicate an estimator defect, not
    mathematics).
    """
    _require_hermiticity_preserving(t, "tau_of_powers_check")
    rows = []
    tau1 = tau(t, restarts=restarts, seed=seed, grid=grid).value
    power = SuperOperator(t.dim, np.eye(t.dim ** 2, dtype=complex))
    for n in range(1, n_max + 1):
        power = SuperOperator(t.dim, power.matrix @ t.matrix)
        tau_n = tau(power, restarts=restarts, seed=derive_seed(seed, n),
                    grid=grid).value
        rows.append((n, tau_n, tau1 ** n))
        if tau_n > tau1 ** n + TOL_OPT:
            raise DomainError(
                f"submultiplicativity violated at n={n}: "
                f"tau(L^n)={tau_n:.9g} > tau(L)^n={tau1 ** n:.9g} + {TOL_OPT:g}")
    return rows


# ---------------------------------------------------------------------------
# probe-based lower bounds (cheap, used for empirical certificate checks)


def probe_inputs(d: int, n_random: int = 64, seed: int = 0) -> np.ndarray:
    """A deterministic family of unit-trace-norm probe inputs, shape (m, d, d).

    Contains all matrix units E_ij (basis-aligned rank-one extreme points)
    plus seeded random u v^dag pairs and pure-state projectors.
    """
    probes = []
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0
            probes.append(e)
    gen = SplitMix64(derive_seed(seed, 0xA11CE))
    for _ in range(n_random):
        u = gen.complex_normals(d)
        v = gen.complex_normals(d)
        u /= np.linalg.norm(u)
        v /= np.linalg.norm(v)
        probes.append(np.outer(u, v.conj()))
        psi = gen.complex_normals(d)
        psi /= np.linalg.norm(psi)
        probes.append(np.outer(psi, psi.conj()))
    return np.array(probes)


def norm_lower_bound_probes(matrix: np.ndarray, probes: np.ndarray) -> float:
    """max_j ||L(X_j)||_1 over probe inputs of unit trace norm."""
    d = probes.shape[-1]
    return float(trace_norm_batch(_apply_matrix_batch(matrix, probes, d)).max())
