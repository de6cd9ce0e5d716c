"""The discrete holonomy field over a finite group: uniform measures with
conjugacy-class constraints on boundary circuits and marked cycles, the
heat-kernel weighted field, partition functions by brute force over edge
configurations and by the closed convolution formula, surgery operators on
partition functions, and exact joint laws of loop holonomies.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .groups import (
    ClassMeasure,
    ConjugacyClassTable,
    FiniteGroup,
    conjugacy_classes,
    convolve,
    convolution_power,
    delta_class,
    eta_measure,
    kappa_measure,
)
from .levy import HeatKernel
from .loops import EdgeWord, holonomy_of_word
from .surface import RibbonMap, SurfaceSpec, faces, is_orientable

__all__ = [
    "GConstraints",
    "SymmetricClassFunction",
    "CapExceeded",
    "constrained_configurations",
    "sample_uniform_constrained",
    "uniform_constrained_mass",
    "df_weight",
    "partition_graph",
    "measure_m",
    "partition_formula",
    "z_function",
    "upsilon",
    "beta1",
    "beta2",
    "marginal_generators",
    "sample_df",
    "gauge_transform",
]

DEFAULT_CAP = 10 ** 8


class CapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class GConstraints:
    """Conjugacy-class constraints: one class per boundary circuit of the
    map, plus optional marked cycles (edge-disjoint simple cycles given as
    dart sequences) with their own classes."""

    boundary_classes: tuple[int, ...] = ()
    marks: tuple[tuple[tuple[int, ...], int], ...] = ()

    def cycles_and_classes(self, m: RibbonMap):
        if len(self.boundary_classes) != len(m.boundary):
            raise ValueError("need one class per boundary circuit")
        out = [(tuple(circ), c)
               for circ, c in zip(m.boundary, self.boundary_classes)]
        out += [(tuple(cyc), c) for cyc, c in self.marks]
        used = set()
        for cyc, _ in out:
            for d in cyc:
                e = min(d, m.alpha[d])
                if e in used:
                    raise ValueError("constrained cycles must be edge-disjoint")
                used.add(e)
        return out


def _cycle_forced_value(G: FiniteGroup, m: RibbonMap, config: dict[int, int],
                        cyc: tuple[int, ...], target: int) -> int:
    """Value of the last edge of the cycle making the cycle holonomy equal
    target, given values of the earlier edges."""
    h = 0
    for d in cyc[:-1]:
        e = m.edge_of(d)
        x = config[e] if d == e else G.inv[config[e]]
        h = G.mul[x][h]
    # want val(last dart) * h = target
    val = G.mul[target][G.inv[h]]
    d = cyc[-1]
    e = m.edge_of(d)
    return val if d == e else G.inv[val]


def constrained_configurations(G: FiniteGroup, m: RibbonMap, C: GConstraints,
                               classes: ConjugacyClassTable,
                               cap: int = DEFAULT_CAP):
    """Iterate (config, probability weight) pairs whose mixture is the
    uniform measure with constraints: free edges uniform, one edge per
    constrained cycle forced so the cycle holonomy is uniform on its class."""
    cycles = C.cycles_and_classes(m)
    forced = [m.edge_of(cyc[-1]) for cyc, _ in cycles]
    free = [e for e in m.edges() if e not in set(forced)]
    n = G.n
    count = n ** len(free)
    for _, c in cycles:
        count *= classes.sizes[c]
    if count > cap:
        raise CapExceeded(f"{count} configurations exceed the cap {cap}")
    weight = 1.0 / count
    targets = [classes.elements_of(c) for _, c in cycles]
    for vals in itertools.product(range(n), repeat=len(free)):
        base = dict(zip(free, vals))
        for ys in itertools.product(*targets):
            config = dict(base)
            for (cyc, _), y in zip(cycles, ys):
                e = m.edge_of(cyc[-1])
                config[e] = _cycle_forced_value(G, m, config, cyc, y)
            yield config, weight


def uniform_constrained_mass(G: FiniteGroup, m: RibbonMap, C: GConstraints,
                             f, classes: ConjugacyClassTable | None = None,
                             cap: int = DEFAULT_CAP) -> float:
    """Exact expectation of a configuration functional under the uniform
    measure with constraints."""
    if classes is None:
        classes = conjugacy_classes(G)
    return sum(w * f(config)
               for config, w in constrained_configurations(G, m, C, classes, cap))


def sample_uniform_constrained(G: FiniteGroup, m: RibbonMap, C: GConstraints,
                               seed: int,
                               classes: ConjugacyClassTable | None = None,
                               count: int = 1):
    """Draw configurations from the constrained uniform measure."""
    if classes is None:
        classes = conjugacy_classes(G)
    rng = random.Random(seed)
    cycles = C.cycles_and_classes(m)
    forced = [m.edge_of(cyc[-1]) for cyc, _ in cycles]
    free = [e for e in m.edges() if e not in set(forced)]
    out = []
    for _ in range(count):
        config = {e: rng.randrange(G.n) for e in free}
        for cyc, c in cycles:
            y = rng.choice(classes.elements_of(c))
            config[m.edge_of(cyc[-1])] = _cycle_forced_value(G, m, config, cyc, y)
        out.append(config)
    return out if count > 1 else out[0]


def df_weight(G: FiniteGroup, m: RibbonMap, hk: HeatKernel,
              config: dict[int, int]) -> float:
    """Product over faces of the heat kernel at the facial holonomy."""
    if m.areas is None:
        raise ValueError("face areas are not assigned")
    if not is_orientable(m) and not hk.pi.inversion_invariant:
        raise ValueError(
            "non-orientable maps need an inversion-invariant jump measure")
    fs = faces(m)
    w = 1.0
    for i, cyc in enumerate(fs.cycles):
        word = EdgeWord(m.vertex_of(cyc[0][0]), tuple(d for d, _ in cyc))
        h = holonomy_of_word(G, m, config, word)
        w *= hk.density(m.areas[i]).values[h]
    return w


def partition_graph(G: FiniteGroup, m: RibbonMap, C: GConstraints,
                    hk: HeatKernel, classes=None, cap: int = DEFAULT_CAP) -> float:
    """Partition function over edge configurations:
    Z = E[prod_F Q_{t_F}(h(dF))] under the constrained uniform measure."""
    return uniform_constrained_mass(
        G, m, C, lambda cfg: df_weight(G, m, hk, cfg), classes, cap)


def measure_m(G: FiniteGroup, spec: SurfaceSpec,
              classes: ConjugacyClassTable | None = None) -> ClassMeasure:
    """The invariant probability measure of a surface: commutators (through
    eta) for orientable surfaces, squares (through kappa) otherwise, then
    one class convolution per boundary."""
    if classes is None:
        classes = conjugacy_classes(G)
    if spec.orientable:
        mu = convolution_power(eta_measure(G), spec.genus // 2)
    else:
        mu = convolution_power(kappa_measure(G), spec.genus)
    for c in spec.constraints:
        mu = convolve(mu, delta_class(G, c, classes))
    return mu


def partition_formula(G: FiniteGroup, spec: SurfaceSpec, hk: HeatKernel,
                      classes: ConjugacyClassTable | None = None) -> float:
    """Z = sum_x Q_t(x) m({x})."""
    if not spec.orientable and not hk.pi.inversion_invariant:
        raise ValueError(
            "non-orientable surfaces need an inversion-invariant jump measure")
    mu = measure_m(G, spec, classes)
    q = hk.density(spec.area)
    return float(sum(float(w) * q.values[x] for x, w in enumerate(mu.weights)))


@dataclass
class SymmetricClassFunction:
    """A function of p conjugacy classes, symmetric in its arguments."""

    group: FiniteGroup
    classes: ConjugacyClassTable
    arity: int
    values: dict[tuple[int, ...], float]

    def __call__(self, *cs: int) -> float:
        if len(cs) != self.arity:
            raise ValueError("wrong arity")
        return self.values[tuple(sorted(cs))]

    def at_element(self, *xs: int) -> float:
        return self(*(self.classes.class_of[x] for x in xs))

    def check_symmetry(self, tol: float = 0.0) -> bool:
        for key in self.values:
            for perm in itertools.permutations(key):
                if abs(self.values[tuple(sorted(perm))] - self.values[key]) > tol:
                    return False
        return True


def z_function(G: FiniteGroup, orientable: bool, p: int, g: int, t: float,
               hk: HeatKernel,
               classes: ConjugacyClassTable | None = None) -> SymmetricClassFunction:
    """Tabulate the partition function over all p-tuples of classes."""
    if classes is None:
        classes = conjugacy_classes(G)
    if not orientable and not hk.pi.inversion_invariant:
        raise ValueError(
            "non-orientable surfaces need an inversion-invariant jump measure")
    if orientable:
        base = convolution_power(eta_measure(G), g // 2)
    else:
        base = convolution_power(kappa_measure(G), g)
    q = hk.density(t)
    out = {}
    for tup in itertools.combinations_with_replacement(range(classes.r), p):
        mu = base
        for c in tup:
            mu = convolve(mu, delta_class(G, c, classes))
        out[tup] = float(sum(float(w) * q.values[x]
                             for x, w in enumerate(mu.weights)))
    return SymmetricClassFunction(G, classes, p, out)


def upsilon(Z: SymmetricClassFunction) -> SymmetricClassFunction:
    """(1/n) sum_x Z(..., class(x^2))."""
    if Z.arity < 1:
        raise ValueError("arity must be at least 1")
    G, classes = Z.group, Z.classes
    out = {}
    for tup in itertools.combinations_with_replacement(range(classes.r), Z.arity - 1):
        s = sum(Z(*tup, classes.class_of[G.mul[x][x]]) for x in range(G.n))
        out[tup] = s / G.n
    return SymmetricClassFunction(G, classes, Z.arity - 1, out)


def beta1(Z: SymmetricClassFunction) -> SymmetricClassFunction:
    """(1/n) sum_x Z(..., class(x), class(x^{-1}))."""
    if Z.arity < 2:
        raise ValueError("arity must be at least 2")
    G, classes = Z.group, Z.classes
    out = {}
    for tup in itertools.combinations_with_replacement(range(classes.r), Z.arity - 2):
        s = sum(Z(*tup, classes.class_of[x], classes.class_of[G.inv[x]])
                for x in range(G.n))
        out[tup] = s / G.n
    return SymmetricClassFunction(G, classes, Z.arity - 2, out)


def beta2(Z1: SymmetricClassFunction, Z2: SymmetricClassFunction) -> SymmetricClassFunction:
    """(1/n) sum_z Z1(..., class(z)) Z2(..., class(z^{-1}))."""
    if Z1.arity < 1 or Z2.arity < 1:
        raise ValueError("arities must be at least 1")
    G, classes = Z1.group, Z1.classes
    arity = Z1.arity + Z2.arity - 2
    out = {}
    for tup in itertools.combinations_with_replacement(range(classes.r), arity):
        part1, part2 = tup[: Z1.arity - 1], tup[Z1.arity - 1:]
        out[tup] = sum(
            Z1(*part1, classes.class_of[z])
            * Z2(*part2, classes.class_of[G.inv[z]])
            for z in range(G.n)
        ) / G.n
    return SymmetricClassFunction(G, classes, arity, out)


def marginal_generators(G: FiniteGroup, m: RibbonMap, C: GConstraints,
                        gens: list[EdgeWord], hk: HeatKernel | None = None,
                        classes: ConjugacyClassTable | None = None,
                        cap: int = DEFAULT_CAP,
                        normalize: bool = False):
    """Exact joint pmf of the holonomies of the given words under the
    constrained uniform measure, weighted by the field density when a heat
    kernel is supplied. Returns (pmf dict, total mass)."""
    if classes is None:
        classes = conjugacy_classes(G)
    pmf: dict[tuple[int, ...], float] = {}
    total = 0.0
    for config, w in constrained_configurations(G, m, C, classes, cap):
        if hk is not None:
            w = w * df_weight(G, m, hk, config)
        key = tuple(holonomy_of_word(G, m, config, g) for g in gens)
        pmf[key] = pmf.get(key, 0.0) + w
        total += w
    if normalize:
        pmf = {k: v / total for k, v in pmf.items()}
    return pmf, total


def gauge_transform(G: FiniteGroup, m: RibbonMap, config: dict[int, int],
                    j: dict[int, int]) -> dict[int, int]:
    """Act on a configuration by a vertex-indexed family of group elements;
    loop holonomies are conjugated, so invariant functionals are unchanged."""
    out = {}
    for e in m.edges():
        tail = m.vertex_of(e)
        head = m.vertex_of(m.alpha[e])
        out[e] = G.mul[j[tail]][G.mul[config[e]][G.inv[j[head]]]]
    return out


def sample_df(G: FiniteGroup, m: RibbonMap, C: GConstraints, hk: HeatKernel,
              seed: int, count: int = 1,
              classes: ConjugacyClassTable | None = None,
              exact_limit: int = 10 ** 6, sweeps: int = 50):
    """Samples from the field measure: exact categorical sampling when the
    configuration space is small, otherwise seeded single-edge heat-bath
    sweeps (unconstrained maps only)."""
    if classes is None:
        classes = conjugacy_classes(G)
    rng = random.Random(seed)
    space = G.n ** m.n_edges
    if space <= exact_limit:
        items = []
        acc = 0.0
        for config, w in constrained_configurations(G, m, C, classes,
                                                    cap=exact_limit * 4):
            w = w * df_weight(G, m, hk, config)
            acc += w
            items.append((acc, config))
        out = []
        for _ in range(count):
            u = rng.random() * acc
            lo, hi = 0, len(items) - 1
            while lo < hi:
                mid = (lo + hi) // 2
                if items[mid][0] < u:
                    lo = mid + 1
                else:
                    hi = mid
            out.append(dict(items[lo][1]))
        return out if count > 1 else out[0]
    if C.boundary_classes or C.marks:
        raise CapExceeded(
            "heat-bath sampling supports unconstrained maps only")
    return _heat_bath(G, m, hk, rng, count, sweeps)


def _edge_faces(m: RibbonMap):
    fs = faces(m)
    out = {e: [] for e in m.edges()}
    for i, cyc in enumerate(fs.cycles):
        for d, _ in cyc:
            out[m.edge_of(d)].append(i)
    return out


def _heat_bath(G: FiniteGroup, m: RibbonMap, hk: HeatKernel, rng, count, sweeps):
    fs = faces(m)
    owners = _edge_faces(m)
    words = [EdgeWord(m.vertex_of(cyc[0][0]), tuple(d for d, _ in cyc))
             for cyc in fs.cycles]
    out = []
    config = {e: rng.randrange(G.n) for e in m.edges()}
    for _ in range(count):
        for _ in range(sweeps):
            for e in m.edges():
                weights = []
                for x in range(G.n):
                    config[e] = x
                    w = 1.0
                    for i in set(owners[e]):
                        h = holonomy_of_word(G, m, config, words[i])
                        w *= hk.density(m.areas[i]).values[h]
                    weights.append(w)
                tot = sum(weights)
                u = rng.random() * tot
                acc = 0.0
                for x, w in enumerate(weights):
                    acc += w
                    if u <= acc:
                        config[e] = x
                        break
        out.append(dict(config))
    return out if count > 1 else out[0]
