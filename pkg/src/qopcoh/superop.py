"""Superoperations: linear maps acting on Choi states.

A superoperation can be built three ways:

* as a sandwich (post, pre) of two operations, acting by
  Phi -> post o Phi o pre;
* as an operator-sum map C -> sum_n K_n C K_n+ with Kraus operators K_n
  living on the d^2-dimensional Choi space;
* directly as a d^4 x d^4 matrix acting on column-stacked Choi matrices.

A sandwich induces the Choi-space Kraus set {pre_m^T (x) post_p}, so every
form reduces to the canonical matrix representation, and all membership
tests below are exact linear-algebra identities on those matrices.

The phase-out superoperation deletes the off-diagonal Choi entries; its
sandwich form (dephase outputs, dephase inputs) and its Kraus form
{|ia><ia|} produce the same matrix, which the test suite asserts.

Membership tests, with T the phase-out matrix and M the superoperation
matrix:

* nongenerating (MISO):      M T = T M T
* nonactivating (MISO*):     T M = T M T
* de-phase incoherent (DISO): both.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .channel import (
    ChoiState,
    QuantumOperation,
    dephasing_operation,
    is_cptp,
    random_cptp,
    random_incoherent_cptp,
    rng_from,
)
from .exceptions import (
    DimensionMismatchError,
    GeneratorExhaustedError,
    InputNotCPTPError,
    InvalidKrausError,
    NoKrausFormError,
    WeightError,
)
from .linalg import as_complex_matrix, dagger, devectorize, kron, max_abs, vectorize
from .tolerances import admission_atol


class Superoperation:
    """A linear map on Choi matrices with a canonical matrix form."""

    def __init__(self, d: int, form: str, *, post=None, pre=None, choi_kraus=None, matrix=None):
        self.d = d
        self.form = form
        self.post = post
        self.pre = pre
        self._choi_kraus = choi_kraus
        self._matrix = matrix

    @classmethod
    def from_sandwich(cls, post: QuantumOperation, pre: QuantumOperation) -> "Superoperation":
        if post.dim != pre.dim:
            raise DimensionMismatchError("sandwich halves must share one dimension")
        return cls(post.dim, "sandwich", post=post, pre=pre)

    @classmethod
    def from_kraus_on_choi(cls, operators) -> "Superoperation":
        ks = [as_complex_matrix(k) for k in operators]
        if not ks:
            raise InvalidKrausError("empty Choi-space Kraus list")
        n = ks[0].shape[0]
        d = int(round(np.sqrt(n)))
        if d * d != n or any(k.shape != (n, n) for k in ks):
            raise DimensionMismatchError("Choi-space Kraus operators must be d^2 x d^2")
        return cls(d, "kraus_on_choi", choi_kraus=tuple(ks))

    @classmethod
    def from_matrix(cls, matrix, d: int) -> "Superoperation":
        m = as_complex_matrix(matrix).copy()
        if m.shape != (d**4, d**4):
            raise DimensionMismatchError(f"expected {d**4}x{d**4} matrix, got {m.shape}")
        m.setflags(write=False)
        return cls(d, "matrix", matrix=m)

    @cached_property
    def choi_kraus(self) -> tuple | None:
        """Choi-space Kraus operators, when the form provides them."""
        if self._choi_kraus is not None:
            return self._choi_kraus
        if self.form == "sandwich":
            return tuple(
                kron(b.T, a)
                for a in self.post.kraus_operators
                for b in self.pre.kraus_operators
            )
        return None

    @cached_property
    def matrix(self) -> np.ndarray:
        """Canonical d^4 x d^4 matrix, acting on column-stacked Choi matrices."""
        if self._matrix is not None:
            return self._matrix
        dd = self.d * self.d
        m = np.zeros((dd * dd, dd * dd), dtype=complex)
        for k in self.choi_kraus:
            m += kron(k.conj(), k)
        m.setflags(write=False)
        return m

    def apply_to_choi_matrix(self, c: np.ndarray) -> np.ndarray:
        return devectorize(self.matrix @ vectorize(c), self.d * self.d)


def as_matrix(s: Superoperation) -> np.ndarray:
    return s.matrix


def probe_matrix(s: Superoperation) -> np.ndarray:
    """Rebuild the matrix by probing with all matrix units of the Choi space.

    Independent of the kron-based construction; used to assert that every
    constructor form and its cached matrix agree.
    """
    dd = s.d * s.d
    out = np.zeros((dd * dd, dd * dd), dtype=complex)
    for c in range(dd * dd):
        unit = np.zeros(dd * dd, dtype=complex)
        unit[c] = 1.0
        e = devectorize(unit, dd)
        if s.choi_kraus is not None:
            image = sum(k @ e @ dagger(k) for k in s.choi_kraus)
        else:
            image = devectorize(s.matrix @ unit, dd)
        out[:, c] = vectorize(image)
    return out


def identity_superoperation(d: int) -> Superoperation:
    return Superoperation.from_kraus_on_choi([np.eye(d * d, dtype=complex)])


def phase_out(d: int) -> Superoperation:
    """The superoperation that strips all off-diagonal Choi entries.

    Kraus form {|ia><ia|}; identical, as a matrix, to the sandwich of
    completely dephasing channels on the output and input sides.
    """
    if d < 2:
        raise DimensionMismatchError("phase_out requires d >= 2")
    dd = d * d
    eye = np.eye(dd, dtype=complex)
    return Superoperation.from_kraus_on_choi([np.outer(eye[m], eye[m]) for m in range(dd)])


def phase_out_sandwich(d: int) -> Superoperation:
    """Phase-out built the sandwich way: dephase outputs, dephase inputs."""
    return Superoperation.from_sandwich(dephasing_operation(d), dephasing_operation(d))


def apply(s: Superoperation, op: QuantumOperation) -> QuantumOperation:
    """Transform an operation; no trace renormalization is applied."""
    if op.dim != s.d:
        raise DimensionMismatchError(f"superoperation dim {s.d} vs operation dim {op.dim}")
    out = s.apply_to_choi_matrix(op.choi.matrix)
    return QuantumOperation.from_choi(ChoiState(out, s.d))


def kraus_outcomes(s: Superoperation, op: QuantumOperation) -> list:
    """Selective outcomes (p_n, Lambda_n) of an operator-sum superoperation.

    Each branch K_n C K_n+ with weight p_n = tr(K_n C K_n+) above 1e-12 is
    renormalized to a trace-one Choi state.
    """
    if s.choi_kraus is None:
        raise NoKrausFormError("superoperation has no operator-sum form")
    if op.dim != s.d:
        raise DimensionMismatchError(f"superoperation dim {s.d} vs operation dim {op.dim}")
    c = op.choi.matrix
    outcomes = []
    total = 0.0
    for k in s.choi_kraus:
        branch = k @ c @ dagger(k)
        p = float(np.trace(branch).real)
        total += p
        if p > 1e-12:
            outcomes.append((p, QuantumOperation.from_choi(ChoiState(branch / p, s.d))))
    if total > 1.0 + admission_atol():
        raise InvalidKrausError(f"outcome weights sum to {total:.9f} > 1")
    return outcomes


def compose(s1: Superoperation, s2: Superoperation) -> Superoperation:
    """s1 after s2, i.e. (s1 o s2)(Phi) = s1(s2(Phi))."""
    if s1.d != s2.d:
        raise DimensionMismatchError("composed superoperations must share one dimension")
    return Superoperation.from_matrix(s1.matrix @ s2.matrix, s1.d)


def convex_combine(weights, sops) -> Superoperation:
    p = np.asarray(weights, dtype=float)
    if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise WeightError(f"weights must be nonnegative and sum to 1, got {weights}")
    if len(sops) != p.size:
        raise WeightError("one weight per superoperation required")
    d = sops[0].d
    if any(s.d != d for s in sops):
        raise DimensionMismatchError("combined superoperations must share one dimension")
    m = sum(w * s.matrix for w, s in zip(p, sops))
    return Superoperation.from_matrix(m, d)


@dataclass(frozen=True)
class ClassificationReport:
    in_miso: bool
    in_miso_star: bool
    in_diso: bool
    miso_residual: float
    miso_star_residual: float
    diso_residual: float


def classify(s: Superoperation, atol: float | None = None) -> ClassificationReport:
    """Test the three membership conditions on the matrix representation."""
    atol = admission_atol() if atol is None else atol
    m = s.matrix
    t = phase_out(s.d).matrix
    mt = m @ t
    tm = t @ m
    tmt = tm @ t
    r_miso = max_abs(mt - tmt)
    r_star = max_abs(tm - tmt)
    r_diso = max(r_miso, r_star, max_abs(mt - tm))
    in_miso = r_miso <= atol
    in_star = r_star <= atol
    return ClassificationReport(
        in_miso=in_miso,
        in_miso_star=in_star,
        in_diso=in_miso and in_star,
        miso_residual=r_miso,
        miso_star_residual=r_star,
        diso_residual=r_diso,
    )


@dataclass(frozen=True)
class StructuralReport:
    """Composition-with-phase-out relations for a single superoperation."""

    phaseout_after_is_miso: bool
    phaseout_both_sides_is_miso: bool
    input_in_miso_star: bool
    phaseout_after_is_miso_star: bool | None
    phaseout_before_is_miso_star: bool | None

    @property
    def ok(self) -> bool:
        holds = self.phaseout_after_is_miso and self.phaseout_both_sides_is_miso
        if self.input_in_miso_star:
            holds = holds and self.phaseout_after_is_miso_star and self.phaseout_before_is_miso_star
        return holds


def check_structural_relations(s: Superoperation) -> StructuralReport:
    """Phase-out composition always lands in MISO; MISO* survives both sides."""
    theta = phase_out(s.d)
    after = classify(compose(theta, s))
    both = classify(compose(theta, compose(s, theta)))
    own = classify(s)
    if own.in_miso_star:
        before = classify(compose(s, theta))
        star_after = after.in_miso_star
        star_before = before.in_miso_star
    else:
        star_after = None
        star_before = None
    return StructuralReport(
        phaseout_after_is_miso=after.in_miso,
        phaseout_both_sides_is_miso=both.in_miso,
        input_in_miso_star=own.in_miso_star,
        phaseout_after_is_miso_star=star_after,
        phaseout_before_is_miso_star=star_before,
    )


@dataclass(frozen=True)
class CptpPreservationReport:
    ok: bool
    min_eigenvalue: float
    marginal_residual: float


def check_cptp_preservation(op: QuantumOperation) -> CptpPreservationReport:
    """Phase-out must map a CPTP operation to a CPTP operation."""
    base = is_cptp(op.choi)
    if not base.ok:
        raise InputNotCPTPError(
            f"input is not CPTP (min eig {base.min_eigenvalue:.3e}, "
            f"marginal residual {base.marginal_residual:.3e})"
        )
    dephased = apply(phase_out(op.dim), op)
    verdict = is_cptp(dephased.choi)
    return CptpPreservationReport(verdict.ok, verdict.min_eigenvalue, verdict.marginal_residual)


# ---------------------------------------------------------------------------
# Class-member sampling and the closure harness
# ---------------------------------------------------------------------------

CLASS_NAMES = ("miso", "miso_star", "diso")


def random_sandwich(d: int, rng) -> Superoperation:
    """Sandwich of two random CPTP channels with small random environments."""
    rng = rng_from(rng)
    post = random_cptp(d, int(rng.integers(1, 3)), rng)
    pre = random_cptp(d, int(rng.integers(1, 3)), rng)
    return Superoperation.from_sandwich(post, pre)


def random_incoherent_sandwich(d: int, rng) -> Superoperation:
    rng = rng_from(rng)
    return Superoperation.from_sandwich(
        random_incoherent_cptp(d, rng), random_incoherent_cptp(d, rng)
    )


def _in_class(report: ClassificationReport, name: str) -> bool:
    return {
        "miso": report.in_miso,
        "miso_star": report.in_miso_star,
        "diso": report.in_diso,
    }[name]


def sample_class_member(name: str, d: int, rng, max_attempts: int = 64) -> Superoperation:
    """Draw a verified member of one of the three superoperation classes.

    MISO members apply phase-out after a random sandwich (or are
    sandwiches of incoherent channels), MISO* members apply phase-out
    first, DISO members apply it on both sides.  Every candidate is
    re-verified by the classifier before it is returned.
    """
    if name not in CLASS_NAMES:
        raise ValueError(f"unknown class {name!r}; expected one of {CLASS_NAMES}")
    rng = rng_from(rng)
    theta = phase_out(d)
    for _ in range(max_attempts):
        base = random_sandwich(d, rng)
        if name == "miso":
            candidate = (
                compose(theta, base)
                if rng.uniform() < 0.5
                else random_incoherent_sandwich(d, rng)
            )
        elif name == "miso_star":
            candidate = compose(base, theta)
        else:
            candidate = compose(theta, compose(base, theta))
        if _in_class(classify(candidate), name):
            return candidate
    raise GeneratorExhaustedError(f"failed to sample a {name} member in {max_attempts} attempts")


COMBINATION_WEIGHTS = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass
class ClosureViolation:
    class_name: str
    pair_index: int
    kind: str  # "compose" or "convex p=..."
    report: ClassificationReport


@dataclass
class ClosureReport:
    class_name: str
    pairs: int
    violations: list = field(default_factory=list)
    max_residual: float = 0.0
    intersection_consistent: bool = True

    @property
    def ok(self) -> bool:
        return not self.violations and self.intersection_consistent


def closure_harness(class_name: str, samples: int, seed, d: int = 2) -> ClosureReport:
    """Check closure of a superoperation class under composition and mixing.

    Draws ``samples`` pairs of verified class members; composes them and
    combines them convexly at the fixed weight grid, classifying every
    result.  Also records whether the de-phase incoherent verdict always
    equals the conjunction of the other two.
    """
    name = class_name.lower().replace("*", "_star").replace("-", "_")
    if name not in CLASS_NAMES:
        raise ValueError(f"unknown class {class_name!r}")
    rng = rng_from(seed)
    report = ClosureReport(class_name=name, pairs=samples)
    for i in range(samples):
        s1 = sample_class_member(name, d, rng)
        s2 = sample_class_member(name, d, rng)
        candidates = [("compose", compose(s1, s2))]
        for p in COMBINATION_WEIGHTS:
            candidates.append((f"convex p={p}", convex_combine([p, 1.0 - p], [s1, s2])))
        for kind, candidate in candidates:
            verdict = classify(candidate)
            in_class = _in_class(verdict, name)
            report.max_residual = max(
                report.max_residual,
                {
                    "miso": verdict.miso_residual,
                    "miso_star": verdict.miso_star_residual,
                    "diso": verdict.diso_residual,
                }[name],
            )
            if not in_class:
                report.violations.append(ClosureViolation(name, i, kind, verdict))
            if verdict.in_diso != (verdict.in_miso and verdict.in_miso_star):
                report.intersection_consistent = False
    return report
