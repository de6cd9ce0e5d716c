"""Conjugation-invariant jump processes on a finite group: jump measures,
admissibility, and the heat kernel Q_t computed by two independent routes
(truncated Poisson series of convolution powers, and a character sum).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .groups import (
    CharacterTable,
    ClassDensity,
    ClassMeasure,
    ConjugacyClassTable,
    FiniteGroup,
    character_table,
    conjugacy_classes,
    convolve,
    fourier_coefficient,
)

__all__ = [
    "JumpMeasure",
    "HeatKernel",
    "jump_measure_from_class_rates",
    "uniform_jump_measure",
    "check_admissible",
    "heat_kernel_series",
    "heat_kernel_characters",
    "positivity_support_check",
    "poisson_truncation_index",
]

DEFAULT_TAIL_TOL = 1e-12


@dataclass(frozen=True)
class JumpMeasure:
    """A finite conjugation-invariant measure on G with no mass at 1."""

    measure: ClassMeasure

    def __post_init__(self):
        if self.measure.weights[0] != 0:
            raise ValueError("jump measure must vanish at the identity")
        if any(w < 0 for w in self.measure.weights):
            raise ValueError("jump measure must be non-negative")

    @property
    def group(self) -> FiniteGroup:
        return self.measure.group

    @property
    def total_rate(self):
        return self.measure.mass

    @property
    def inversion_invariant(self) -> bool:
        inv = self.group.inv
        w = self.measure.weights
        return all(w[x] == w[inv[x]] for x in range(self.group.n))

    def support(self) -> list[int]:
        return [x for x, w in enumerate(self.measure.weights) if w != 0]

    def normalized(self) -> ClassMeasure:
        """Pi_1 = Pi / Pi(G), the jump-target probability measure."""
        m = self.total_rate
        if m == 0:
            raise ValueError("zero jump measure cannot be normalized")
        if isinstance(m, Fraction) and all(
            isinstance(w, (int, Fraction)) for w in self.measure.weights
        ):
            return ClassMeasure(
                self.group, tuple(Fraction(w) / m for w in self.measure.weights)
            )
        return self.measure.scaled(1.0 / float(m))


def jump_measure_from_class_rates(
    G: FiniteGroup, rates: dict, classes: ConjugacyClassTable | None = None
) -> JumpMeasure:
    """Expand per-class rates (keyed by class index or representative label)
    into singleton weights: a class with rate w gets w/|C| per element."""
    if classes is None:
        classes = conjugacy_classes(G)
    per_class = [Fraction(0)] * classes.r
    for key, rate in rates.items():
        if isinstance(key, int):
            c = key
        else:
            matches = [
                c for c in range(classes.r) if classes.rep_label(c) == str(key)
            ]
            if not matches:
                raise ValueError(f"no conjugacy class with representative {key!r}")
            c = matches[0]
        if not (0 <= c < classes.r):
            raise ValueError(f"class index {c} out of range")
        per_class[c] = Fraction(rate) if not isinstance(rate, float) else rate
    weights = [
        per_class[classes.class_of[x]] / classes.sizes[classes.class_of[x]]
        if per_class[classes.class_of[x]] != 0
        else Fraction(0)
        for x in range(G.n)
    ]
    return JumpMeasure(ClassMeasure(G, tuple(weights)))


def uniform_jump_measure(G: FiniteGroup, total_rate=1) -> JumpMeasure:
    """Rate spread uniformly over the non-identity elements, Pi(G) = total."""
    if G.n < 2:
        raise ValueError("group must have a non-identity element")
    w = Fraction(total_rate, G.n - 1) if not isinstance(total_rate, float) \
        else total_rate / (G.n - 1)
    weights = tuple([Fraction(0)] + [w] * (G.n - 1))
    return JumpMeasure(ClassMeasure(G, weights))


@dataclass
class AdmissibilityReport:
    conjugation_invariant: bool
    generated_subgroup: frozenset[int]
    generates_group: bool
    inversion_invariant: bool
    inversion_required: bool

    @property
    def admissible(self) -> bool:
        ok = self.conjugation_invariant and self.generates_group
        if self.inversion_required:
            ok = ok and self.inversion_invariant
        return ok


def check_admissible(
    pi: JumpMeasure,
    require_inversion: bool = False,
    classes: ConjugacyClassTable | None = None,
) -> AdmissibilityReport:
    """Admissibility in the finite-group sense: the support of the jump
    measure must generate the whole group (then Q_t > 0 everywhere)."""
    G = pi.group
    if classes is None:
        classes = conjugacy_classes(G)
    H = G.subgroup_generated(pi.support())
    return AdmissibilityReport(
        conjugation_invariant=pi.measure.is_class_constant(classes),
        generated_subgroup=H,
        generates_group=len(H) == G.n,
        inversion_invariant=pi.inversion_invariant,
        inversion_required=require_inversion,
    )


def poisson_truncation_index(rate_times_t: float, tail_tol: float) -> int:
    """Smallest K with P(Poisson(m) > K) <= tail_tol, m = rate*t."""
    m = float(rate_times_t)
    if m == 0:
        return 0
    term = math.exp(-m)
    cum = term
    k = 0
    while 1.0 - cum > tail_tol:
        k += 1
        term *= m / k
        cum += term
        if k > 100_000:
            raise RuntimeError("Poisson truncation did not converge")
    return k


@dataclass
class HeatKernel:
    """Heat kernel of the jump process with Lévy measure Pi.

    Per-irrep exponents lambda_alpha = Pi(G) - Pi^(alpha)/d_alpha drive the
    character route; evaluations are cached per t.
    """

    pi: JumpMeasure
    table: CharacterTable
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.exponents = tuple(
            complex(float(self.pi.total_rate))
            - fourier_coefficient(self.pi.measure, a, self.table) / self.table.dims[a]
            for a in range(self.table.r)
        )

    @property
    def group(self) -> FiniteGroup:
        return self.pi.group

    def density(self, t: float) -> ClassDensity:
        """Q_t by the character route (cached)."""
        key = float(t)
        if key not in self._cache:
            self._cache[key] = heat_kernel_characters(self.pi, t, self.table)
        return self._cache[key]

    def density_series(self, t: float, tail_tol: float = DEFAULT_TAIL_TOL) -> ClassDensity:
        return heat_kernel_series(self.pi, t, tail_tol)


def heat_kernel_series(
    pi: JumpMeasure, t: float, tail_tol: float = DEFAULT_TAIL_TOL
) -> ClassDensity:
    """Q_t(x) = n e^{-t Pi(G)} sum_k (t^k/k!) Pi^{*k}({x}), truncated so the
    neglected Poisson tail is at most tail_tol, then renormalized."""
    if t < 0:
        raise ValueError("time must be non-negative")
    G = pi.group
    n = G.n
    rate = float(pi.total_rate)
    if t == 0 or rate == 0:
        return ClassDensity(G, tuple([float(n)] + [0.0] * (n - 1)))
    K = poisson_truncation_index(rate * t, tail_tol)
    vals = np.zeros(n)
    power = np.zeros(n)
    power[0] = 1.0  # Pi^{*0} = delta_1
    pi_w = pi.measure.as_floats()
    # precompute convolution as matrix action: (mu * Pi)(x) = sum_y mu(y) Pi(y^-1 x)
    conv = np.zeros((n, n))
    for y in range(n):
        iy = G.inv[y]
        for x in range(n):
            conv[y, x] = pi_w[G.mul[iy][x]]
    log_coeff = -rate * t
    coeff = math.exp(log_coeff)
    vals += coeff * power
    for k in range(1, K + 1):
        power = power @ conv
        coeff *= t / k
        vals += coeff * power
    vals *= n
    total = vals.sum() / n
    vals /= total  # declared normalization defect <= tail_tol
    return ClassDensity(G, tuple(vals))


def heat_kernel_characters(
    pi: JumpMeasure, t: float, table: CharacterTable | None = None
) -> ClassDensity:
    """Q_t(x) = e^{-t Pi(G)} sum_alpha e^{t Pi^(alpha)/d_alpha} d_alpha chi_alpha(x)."""
    if t < 0:
        raise ValueError("time must be non-negative")
    G = pi.group
    if table is None:
        table = character_table(G)
    classes = table.classes
    rate = float(pi.total_rate)
    coeffs = []
    for a in range(table.r):
        ph = fourier_coefficient(pi.measure, a, table)
        coeffs.append(cmath_exp(t * ph / table.dims[a] - t * rate) * table.dims[a])
    vals = []
    for x in range(G.n):
        c = classes.class_of[x]
        z = sum(coeffs[a] * table.table[a, c] for a in range(table.r))
        if abs(z.imag) > 1e-9:
            raise ArithmeticError(
                f"residual imaginary part {z.imag:.3e} in character sum"
            )
        vals.append(z.real)
    return ClassDensity(G, tuple(vals))


def cmath_exp(z: complex) -> complex:
    import cmath

    return cmath.exp(z)


@dataclass
class SupportReport:
    subgroup: frozenset[int]
    min_on_subgroup: float
    max_off_subgroup: float
    positive_on_subgroup: bool
    vanishes_off_subgroup: bool

    @property
    def ok(self) -> bool:
        return self.positive_on_subgroup and self.vanishes_off_subgroup


def positivity_support_check(
    pi: JumpMeasure, t: float, tail_tol: float = DEFAULT_TAIL_TOL, tol: float = 1e-10
) -> SupportReport:
    """Q_t is positive exactly on the subgroup generated by supp(Pi)."""
    if t <= 0:
        raise ValueError("time must be positive")
    H = pi.group.subgroup_generated(pi.support())
    q = heat_kernel_series(pi, t, tail_tol)
    on = [q.values[x] for x in sorted(H)]
    off = [q.values[x] for x in range(pi.group.n) if x not in H]
    return SupportReport(
        subgroup=H,
        min_on_subgroup=min(on),
        max_off_subgroup=max(map(abs, off)) if off else 0.0,
        positive_on_subgroup=min(on) > 0,
        vanishes_off_subgroup=(not off) or max(map(abs, off)) <= tol,
    )
