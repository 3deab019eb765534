"""Named verification suites behind ``qopcoh verify``.

Each suite re-derives one of the package's headline guarantees from
scratch at desk scale and emits machine-readable pass/fail checks.  The
single-qubit suite cross-validates the closed-form measure against a
brute-force minimum computed through the full Uhlmann-fidelity path, which
never touches the closed form.
"""

import math

import numpy as np

from .channel import (
    ChoiState,
    QuantumOperation,
    haar_unitary,
    hadamard_operation,
    identity_operation,
    pauli_x_operation,
    random_cptp,
    rng_from,
)
from .coherence import (
    SQRT2_OVER_2,
    SQRT3_OVER_2,
    max_coherent_operation,
    mf_pure,
    mf_single_qubit_unitary,
    uhlmann_fidelity,
    verify_axioms,
)
from .exceptions import UnknownSuiteError
from .linalg import max_abs
from .superop import (
    CLASS_NAMES,
    check_cptp_preservation,
    check_structural_relations,
    closure_harness,
    phase_out,
    phase_out_sandwich,
    random_sandwich,
    sample_class_member,
)
from .tolerances import ALGEBRA_ATOL, EIG_ATOL, admission_atol

SUITE_NAMES = ("theorem11", "theorem12", "theorem21", "corollary32", "axioms", "all")


def mf_pure_brute_force(choi: ChoiState) -> float:
    """Minimum of sqrt(1 - F) over the incoherent basis states, by brute force.

    Runs every basis state through the general Uhlmann fidelity; serves as
    the independent oracle for the closed-form single-qubit measure.
    """
    n = choi.d * choi.d
    best = math.inf
    for m in range(n):
        basis = np.zeros((n, n), dtype=complex)
        basis[m, m] = 1.0
        f = uhlmann_fidelity(choi.matrix, basis)
        best = min(best, math.sqrt(max(1.0 - f, 0.0)))
    return best


def _check(name: str, ok: bool, **details) -> dict:
    return {"name": name, "pass": bool(ok), "details": details}


def suite_theorem11(samples: int, seed) -> list:
    """Phase-out: sandwich and Kraus constructions agree; idempotence."""
    checks = []
    for d in (2, 3):
        kraus_form = phase_out(d)
        sandwich_form = phase_out_sandwich(d)
        gap = max_abs(kraus_form.matrix - sandwich_form.matrix)
        checks.append(
            _check(f"theorem11 sandwich equals kraus form (d={d})", gap <= ALGEBRA_ATOL, residual=gap)
        )
        idem = max_abs(kraus_form.matrix @ kraus_form.matrix - kraus_form.matrix)
        checks.append(_check(f"theorem11 phase-out idempotent (d={d})", idem <= ALGEBRA_ATOL, residual=idem))
    return checks


def suite_theorem12(samples: int, seed) -> list:
    """Phase-out maps random CPTP channels to CPTP channels."""
    rng = rng_from(seed)
    checks = []
    for d, count in ((2, samples), (3, max(1, (samples * 2) // 5))):
        worst_marginal = 0.0
        worst_eig = 0.0
        ok = True
        for _ in range(count):
            op = random_cptp(d, int(rng.integers(1, 4)), rng)
            rep = check_cptp_preservation(op)
            ok = ok and rep.ok
            worst_marginal = max(worst_marginal, rep.marginal_residual)
            worst_eig = min(worst_eig, rep.min_eigenvalue)
        checks.append(
            _check(
                f"theorem12 dephased channels stay CPTP (d={d}, {count} channels)",
                ok and worst_marginal <= admission_atol(),
                channels=count,
                max_marginal_residual=worst_marginal,
                min_eigenvalue=worst_eig,
            )
        )
    return checks


def suite_theorem21(samples: int, seed) -> list:
    """Closure of the three superoperation classes, plus structural relations."""
    rng = rng_from(seed)
    checks = []
    intersection_ok = True
    for name in CLASS_NAMES:
        rep = closure_harness(name, samples, rng)
        intersection_ok = intersection_ok and rep.intersection_consistent
        checks.append(
            _check(
                f"theorem21 closure of {name} ({samples} pairs)",
                rep.ok,
                violations=len(rep.violations),
                max_residual=rep.max_residual,
            )
        )
    checks.append(_check("theorem21 diso equals miso intersection miso*", intersection_ok))

    eq24_ok = True
    for _ in range(samples):
        rep = check_structural_relations(random_sandwich(2, rng))
        eq24_ok = eq24_ok and rep.phaseout_after_is_miso and rep.phaseout_both_sides_is_miso
    checks.append(
        _check(f"theorem21 phase-out compositions are MISO ({samples} superoperations)", eq24_ok)
    )

    eq25_ok = True
    for _ in range(samples):
        member = sample_class_member("miso_star", 2, rng)
        rep = check_structural_relations(member)
        eq25_ok = eq25_ok and rep.input_in_miso_star and bool(rep.ok)
    checks.append(
        _check(f"theorem21 MISO* survives phase-out composition ({samples} members)", eq25_ok)
    )
    return checks


def suite_corollary32(samples: int, seed) -> list:
    """Single-qubit closed form versus brute force, range, and extremes."""
    rng = rng_from(seed)
    checks = []
    worst_gap = 0.0
    lo, hi = math.inf, -math.inf
    for _ in range(samples):
        u = haar_unitary(2, rng)
        closed = mf_single_qubit_unitary(u).value
        brute = mf_pure_brute_force(QuantumOperation.from_unitary(u).choi)
        worst_gap = max(worst_gap, abs(closed - brute))
        lo, hi = min(lo, closed), max(hi, closed)
    checks.append(
        _check(
            f"theorem31 closed form matches brute-force oracle ({samples} unitaries)",
            worst_gap <= EIG_ATOL,
            max_gap=worst_gap,
        )
    )

    for op in (identity_operation(2), pauli_x_operation(), hadamard_operation()):
        v = mf_single_qubit_unitary(op.unitary).value
        lo, hi = min(lo, v), max(hi, v)
    checks.append(
        _check(
            "corollary32 measure range within [sqrt2/2, sqrt3/2]",
            lo >= SQRT2_OVER_2 - 1e-9 and hi <= SQRT3_OVER_2 + 1e-9,
            min_observed=lo,
            max_observed=hi,
        )
    )
    gap_i = abs(mf_single_qubit_unitary(identity_operation(2).unitary).value - SQRT2_OVER_2)
    gap_x = abs(mf_single_qubit_unitary(pauli_x_operation().unitary).value - SQRT2_OVER_2)
    gap_h = abs(mf_single_qubit_unitary(hadamard_operation().unitary).value - SQRT3_OVER_2)
    checks.append(
        _check(
            "corollary32 identity and X attain the lower endpoint",
            max(gap_i, gap_x) <= 1e-12,
            identity_gap=gap_i,
            pauli_x_gap=gap_x,
        )
    )
    checks.append(_check("corollary32 Hadamard attains the upper endpoint", gap_h <= 1e-12, gap=gap_h))

    phi_count = max(1, samples // 10)
    worst_phi = 0.0
    for _ in range(phi_count):
        thetas = rng.uniform(0.0, 2.0 * math.pi, size=4)
        value = mf_pure(max_coherent_operation(thetas)).value
        worst_phi = max(worst_phi, abs(value - SQRT3_OVER_2))
    checks.append(
        _check(
            f"corollary33 maximally coherent operation scores sqrt3/2 ({phi_count} angle draws)",
            worst_phi <= 1e-12,
            max_gap=worst_phi,
        )
    )
    return checks


def suite_axioms(samples: int, seed) -> list:
    """Measure-axiom harness; inconclusive checks are reported, never passed."""
    report = verify_axioms(samples=samples, seed=seed)
    checks = []
    for axiom in ("nonnegativity", "monotonicity", "strong_monotonicity", "convexity"):
        entries = [c for c in report.checks if c.axiom == axiom]
        fails = [c for c in entries if c.status == "fail"]
        inconclusive = [c for c in entries if c.status == "inconclusive"]
        checks.append(
            _check(
                f"axiom {axiom}",
                not fails,
                checks=len(entries),
                failed=len(fails),
                inconclusive=len(inconclusive),
                inconclusive_cases=[c.description for c in inconclusive],
            )
        )
    return checks


_SUITES = {
    "theorem11": suite_theorem11,
    "theorem12": suite_theorem12,
    "theorem21": suite_theorem21,
    "corollary32": suite_corollary32,
    "axioms": suite_axioms,
}


def run_suite(name: str, samples: int, seed) -> list:
    """Run one named suite (or all of them) and return its check list."""
    if name == "all":
        checks = []
        rng = rng_from(seed)
        for key in ("theorem11", "theorem12", "theorem21", "corollary32", "axioms"):
            checks.extend(_SUITES[key](samples, rng))
        return checks
    if name not in _SUITES:
        raise UnknownSuiteError(f"unknown suite {name!r}; expected one of {SUITE_NAMES}")
    return _SUITES[name](samples, seed)
