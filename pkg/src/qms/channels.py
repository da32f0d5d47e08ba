"""Quantum channels and positive trace-preserving maps.

A map T on d x d matrices is stored as its d^2 x d^2 superoperator matrix
in the column-stacking convention of :mod:`qms.linalg`.  A channel built
from Kraus operators {A_k} has superoperator

    M = sum_k  conj(A_k) (x) A_k,

so that ``unvec(M @ vec(rho))`` equals ``sum_k A_k rho A_k^dag``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, PreconditionError, ValidationError
from .linalg import as_matrix, dagger, kron, matrix_exp, spectral_norm, unvec, vec
from .rng import SplitMix64

PROVENANCES = ("kraus", "explicit", "stochastic_embedding",
               "exponential_of_generator", "composed")

DEFAULT_POSITIVITY_SAMPLES = 1000


@dataclass
class SuperOperator:
    """A linear map on M_d(C) as a d^2 x d^2 matrix (column stacking).

    ``trace_preserving`` records the outcome of the algebraic TP check at
    construction time; None means it was not determined.
    """

    dim: int
    matrix: np.ndarray
    provenance: str = "explicit"
    trace_preserving: Optional[bool] = None
    label: Optional[str] = None

    def __post_init__(self):
        self.matrix = as_matrix(self.matrix, square=True, name="superoperator matrix")
        if self.matrix.shape[0] != self.dim ** 2:
            raise DimensionError(
                f"superoperator matrix is {self.matrix.shape[0]}x{self.matrix.shape[1]}, "
                f"expected {self.dim ** 2}x{self.dim ** 2} for dim={self.dim}")
        if self.provenance not in PROVENANCES:
            raise ValidationError(f"unknown provenance {self.provenance!r}")
        if self.trace_preserving:
            res = self.tp_residual()
            if res > 1e-10:
                raise ValidationError(
                    f"map flagged trace-preserving has TP residual {res:.3g}")

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Apply the map to a d x d matrix."""
        x = as_matrix(x, square=True, name="channel input")
        if x.shape[0] != self.dim:
            raise DimensionError(f"input is {x.shape[0]}x{x.shape[1]}, map has dim {self.dim}")
        return unvec(self.matrix @ vec(x), self.dim)

    def apply_batch(self, mats: np.ndarray) -> np.ndarray:
        """Apply the map to a stack of matrices, shape (n, d, d) -> (n, d, d)."""
        d = self.dim
        n = mats.shape[0]
        v = mats.transpose(0, 2, 1).reshape(n, d * d)
        w = v @ self.matrix.T
        return w.reshape(n, d, d).transpose(0, 2, 1)

    def __matmul__(self, other: "SuperOperator") -> "SuperOperator":
        return compose(self, other)

    def tp_residual(self) -> float:
        """|| vec(I)^dag M - vec(I)^dag ||_2 (zero iff trace-preserving)."""
        vi = vec(np.eye(self.dim))
        return float(np.linalg.norm(dagger(self.matrix) @ vi - vi))


@dataclass
class DensityMatrix:
    """d x d density matrix: Hermitian, PSD and unit trace within 1e-10."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = as_matrix(self.matrix, square=True, name="density matrix")
        if self.matrix.shape[0] != self.dim:
            raise DimensionError(f"density matrix shape {self.matrix.shape} != dim {self.dim}")
        herm = float(spectral_norm(self.matrix - dagger(self.matrix)))
        if herm > 1e-10:
            raise ValidationError(f"density matrix not Hermitian (residual {herm:.3g})")
        tr = complex(np.trace(self.matrix))
        if abs(tr - 1.0) > 1e-10:
            raise ValidationError(f"density matrix trace {tr:.12g} != 1")
        lo = float(np.linalg.eigvalsh((self.matrix + dagger(self.matrix)) / 2).min())
        if lo < -1e-10:
            raise ValidationError(f"density matrix has eigenvalue {lo:.3g} < -1e-10")


@dataclass
class GeneratorMap:
    """Superoperator of a semigroup generator; trace-annihilating."""

    dim: int
    matrix: np.ndarray
    provenance: str = "explicit"

    def __post_init__(self):
        self.matrix = as_matrix(self.matrix, square=True, name="generator matrix")
        if self.matrix.shape[0] != self.dim ** 2:
            raise DimensionError(
                f"generator matrix is {self.matrix.shape}, expected dim^2 = {self.dim ** 2}")
        if self.provenance not in ("lindblad_parts", "explicit"):
            raise ValidationError(f"unknown generator provenance {self.provenance!r}")
        vi = vec(np.eye(self.dim))
        res = float(np.linalg.norm(dagger(self.matrix) @ vi))
        if res > 1e-10:
            raise ValidationError(
                f"generator is not trace-annihilating (residual {res:.3g})")


@dataclass
class ValidationReport:
    """Outcome of the structural checks on a map."""

    trace_preserving: bool
    tp_residual: float
    hermiticity_preserving: bool
    hp_residual: float
    completely_positive: bool
    min_choi_eigenvalue: float
    unital: bool
    unital_residual: float
    positivity: str                      # "no_counterexample" | "counterexample"
    positivity_samples: int
    positivity_witness: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        out = {
            "trace_preserving": self.trace_preserving,
            "tp_residual": self.tp_residual,
            "hermiticity_preserving": self.hermiticity_preserving,
            "hp_residual": self.hp_residual,
            "completely_positive": self.completely_positive,
            "min_choi_eigenvalue": self.min_choi_eigenvalue,
            "unital": self.unital,
            "unital_residual": self.unital_residual,
            "positivity": self.positivity,
            "positivity_samples": self.positivity_samples,
        }
        if self.positivity_witness is not None:
            out["positivity_witness"] = [
                [[float(z.real), float(z.imag)] for z in row]
                for row in np.outer(self.positivity_witness,
                                    self.positivity_witness.conj())
            ]
        return out


# ---------------------------------------------------------------------------
# constructors


def identity_channel(d: int) -> SuperOperator:
    return SuperOperator(d, np.eye(d * d, dtype=complex), provenance="kraus",
                         trace_preserving=True, label="identity")


def from_kraus(operators: Sequence[np.ndarray], label: str | None = None) -> SuperOperator:
    """Build the superoperator sum_k conj(A_k) (x) A_k of a Kraus family.

    The result is completely positive by construction; it is flagged
    trace-preserving iff sum_k A_k^dag A_k = I within 1e-10.
    """
    if len(operators) == 0:
        raise ValidationError("from_kraus: empty Kraus list")
    ops = [as_matrix(a, square=True, name=f"Kraus operator {k}")
           for k, a in enumerate(operators)]
    d = ops[0].shape[0]
    for k, a in enumerate(ops):
        if a.shape[0] != d:
            raise DimensionError(f"Kraus operator {k} is {a.shape[0]}x{a.shape[1]}, "
                                 f"expected {d}x{d}")
    m = np.zeros((d * d, d * d), dtype=complex)
    comp = np.zeros((d, d), dtype=complex)
    for a in ops:
        m += kron(a.conj(), a)
        comp += dagger(a) @ a
    tp = bool(spectral_norm(comp - np.eye(d)) <= 1e-10)
    return SuperOperator(d, m, provenance="kraus", trace_preserving=tp, label=label)


def from_stochastic(s, label: str | None = None) -> SuperOperator:
    """Embed a row-stochastic matrix S as a channel on diagonal states.

    The embedded map sends |i><i| to sum_j S[i, j] |j><j| (so probability
    column vectors evolve by p -> S^T p) and annihilates all off-diagonal
    matrix units.
    """
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DimensionError(f"stochastic matrix must be square, got {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ValidationError("stochastic matrix has non-finite entries")
    if np.any(s < -1e-12):
        raise ValidationError("stochastic matrix has negative entries")
    rows = s.sum(axis=1)
    if np.any(np.abs(rows - 1.0) > 1e-10):
        bad = int(np.argmax(np.abs(rows - 1.0)))
        raise ValidationError(f"row {bad} of stochastic matrix sums to {rows[bad]:.12g}, not 1")
    d = s.shape[0]
    m = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            m[j * d + j, i * d + i] = s[i, j]
    return SuperOperator(d, m, provenance="stochastic_embedding",
                         trace_preserving=True, label=label)


def compose(t1: SuperOperator, t2: SuperOperator) -> SuperOperator:
    """Superoperator of t1 after t2 (matrix product of superoperators)."""
    if t1.dim != t2.dim:
        raise DimensionError(f"cannot compose maps of dims {t1.dim} and {t2.dim}")
    tp = True if (t1.trace_preserving and t2.trace_preserving) else None
    return SuperOperator(t1.dim, t1.matrix @ t2.matrix, provenance="composed",
                         trace_preserving=tp)


def dual(t: SuperOperator) -> SuperOperator:
    """Hilbert-Schmidt adjoint: the conjugate transpose of the superoperator.

    For Hermiticity-preserving maps this is the map T* with
    tr[T*(A) B] = tr[A T(B)].  An involution: dual(dual(T)) == T exactly.
    """
    return SuperOperator(t.dim, dagger(t.matrix), provenance="explicit",
                         trace_preserving=None, label=t.label)


def generator_exponential(gen: GeneratorMap, t: float) -> SuperOperator:
    """The semigroup element e^{t L} as a superoperator."""
    m = matrix_exp(gen.matrix, t)
    so = SuperOperator(gen.dim, m, provenance="exponential_of_generator")
    so.trace_preserving = bool(so.tp_residual() <= 1e-10)
    return so


def from_lindblad(h, jumps: Sequence[np.ndarray]) -> GeneratorMap:
    """Generator L(X) = -i[H, X] + sum_k (L_k X L_k^dag - {L_k^dag L_k, X}/2)."""
    h = as_matrix(h, square=True, name="Hamiltonian")
    if spectral_norm(h - dagger(h)) > 1e-12 * max(1.0, spectral_norm(h)):
        raise ValidationError("Hamiltonian must be Hermitian")
    d = h.shape[0]
    eye = np.eye(d)
    m = -1j * (kron(eye, h) - kron(h.T, eye))
    for k, l in enumerate(jumps):
        l = as_matrix(l, square=True, name=f"jump operator {k}")
        if l.shape[0] != d:
            raise DimensionError(f"jump operator {k} has shape {l.shape}, expected {d}x{d}")
        ll = dagger(l) @ l
        m += kron(l.conj(), l) - 0.5 * kron(eye, ll) - 0.5 * kron(ll.T, eye)
    return GeneratorMap(d, m, provenance="lindblad_parts")


# ---------------------------------------------------------------------------
# analysis


def choi_matrix(t: SuperOperator) -> np.ndarray:
    """Choi matrix J(T) = (id (x) T)(|Omega><Omega|), |Omega> unnormalized.

    T is completely positive iff J(T) >= 0, and tr J(T) = d for
    trace-preserving T.
    """
    d = t.dim
    j = np.zeros((d * d, d * d), dtype=complex)
    units = np.zeros((d * d, d, d), dtype=complex)
    for i in range(d):
        for k in range(d):
            units[i * d + k, i, k] = 1.0
    images = t.apply_batch(units)
    for i in range(d):
        for k in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, k] = 1.0
            j += kron(e, images[i * d + k])
    return j


def hermiticity_residual(t: SuperOperator) -> float:
    """Spectral norm of J(T) - J(T)^dag; zero iff T is Hermiticity-preserving."""
    j = choi_matrix(t)
    return float(spectral_norm(j - dagger(j)))


def validate(t: SuperOperator, n_samples: int = DEFAULT_POSITIVITY_SAMPLES,
             seed: int = 0) -> ValidationReport:
    """Structural checks: TP, Hermiticity preservation, CP, unitality.

    TP/unitality are algebraic (residuals reported); CP is decided by the
    minimum Choi eigenvalue.  Positivity without CP is only *sampled*: the
    report says "no_counterexample(n)" rather than "positive", since
    deciding positivity of a map is hard.  Deterministic given ``seed``.
    """
    if n_samples < 1:
        raise ValidationError("n_samples must be >= 1")
    d = t.dim
    vi = vec(np.eye(d))
    tp_res = t.tp_residual()
    unital_res = float(np.linalg.norm(t.matrix @ vi - vi))

    j = choi_matrix(t)
    hp_res = float(spectral_norm(j - dagger(j)))
    min_choi = float(np.linalg.eigvalsh((j + dagger(j)) / 2).min())

    gen = SplitMix64(seed)
    states = gen.complex_normals((n_samples, d))
    states /= np.linalg.norm(states, axis=1, keepdims=True)
    projectors = states[:, :, None] * states.conj()[:, None, :]
    images = t.apply_batch(projectors)
    images = (images + images.conj().transpose(0, 2, 1)) / 2
    min_eigs = np.linalg.eigvalsh(images)[:, 0]
    bad = np.nonzero(min_eigs < -1e-8)[0]
    witness = states[bad[0]] if len(bad) else None

    return ValidationReport(
        trace_preserving=bool(tp_res <= 1e-10), tp_residual=tp_res,
        hermiticity_preserving=bool(hp_res <= 1e-10), hp_residual=hp_res,
        completely_positive=bool(min_choi >= -1e-8), min_choi_eigenvalue=min_choi,
        unital=bool(unital_res <= 1e-10), unital_residual=unital_res,
        positivity="counterexample" if witness is not None else "no_counterexample",
        positivity_samples=n_samples, positivity_witness=witness)


# ---------------------------------------------------------------------------
# states and stock channels


def basis_state(d: int, i: int) -> DensityMatrix:
    m = np.zeros((d, d), dtype=complex)
    m[i, i] = 1.0
    return DensityMatrix(d, m)


def maximally_mixed(d: int) -> DensityMatrix:
    return DensityMatrix(d, np.eye(d, dtype=complex) / d)


def pure_state(v) -> DensityMatrix:
    v = np.asarray(v, dtype=complex).reshape(-1)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValidationError("pure_state: zero vector")
    v = v / n
    return DensityMatrix(len(v), np.outer(v, v.conj()))


def check_stationary(t: SuperOperator, rho: DensityMatrix, tol: float = 1e-9) -> float:
    """Trace-norm residual ||T(rho) - rho||_1; raises if above tol."""
    from .linalg import trace_norm
    res = trace_norm(t.apply(rho.matrix) - rho.matrix)
    if res > tol:
        raise PreconditionError(
            f"state is not stationary for the map (residual {res:.3g} > {tol:g})",
            residual=res)
    return res


_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_channel(px: float, py: float, pz: float) -> SuperOperator:
    p0 = 1.0 - px - py - pz
    if min(p0, px, py, pz) < -1e-12:
        raise ValidationError("Pauli probabilities must be nonnegative and sum to <= 1")
    ops = [np.sqrt(max(p, 0.0)) * _PAULI[s]
           for p, s in zip((p0, px, py, pz), "IXYZ")]
    return from_kraus(ops, label=f"pauli({px:g},{py:g},{pz:g})")


def depolarizing_channel(p: float, d: int = 2) -> SuperOperator:
    """T(X) = (1-p) X + p tr[X] I/d, as a superoperator."""
    if not 0.0 <= p <= 1.0 + 1e-12:
        raise ValidationError("depolarizing parameter must lie in [0, 1]")
    eye = np.eye(d * d, dtype=complex)
    m = (1.0 - p) * eye + p * np.outer(vec(np.eye(d) / d), vec(np.eye(d)).conj())
    return SuperOperator(d, m, provenance="explicit", trace_preserving=True,
                         label=f"depolarizing(p={p:g}, d={d})")


def completely_depolarizing(d: int = 2) -> SuperOperator:
    return depolarizing_channel(1.0, d)


def amplitude_damping_channel(gamma: float) -> SuperOperator:
    if not 0.0 <= gamma <= 1.0:
        raise ValidationError("damping parameter must lie in [0, 1]")
    a0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    a1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return from_kraus([a0, a1], label=f"amplitude_damping({gamma:g})")


def depolarizing_generator(gamma: float, d: int = 2) -> GeneratorMap:
    """Generator L(X) = gamma (tr[X] I/d - X); e^{tL} is depolarizing."""
    eye = np.eye(d * d, dtype=complex)
    m = gamma * (np.outer(vec(np.eye(d) / d), vec(np.eye(d)).conj()) - eye)
    return GeneratorMap(d, m, provenance="explicit")
