"""Partition functions, surgery maps, joint holonomy laws and sampling."""

import math
import random
from collections import Counter

import pytest

from holofield.groups import (
    build_group,
    character_table,
    conjugacy_classes,
)
from holofield.holonomy import (
    CapExceeded,
    GConstraints,
    beta1,
    beta2,
    df_weight,
    gauge_transform,
    marginal_generators,
    measure_m,
    partition_formula,
    partition_graph,
    sample_df,
    upsilon,
    z_function,
)
from holofield.levy import HeatKernel, uniform_jump_measure
from holofield.loops import tame_generators
from holofield.surface import (
    RibbonMap,
    SurfaceSpec,
    faces,
    split_face,
    standard_map,
    subdivide_edge,
)


def make_hk(name, rate=1.0):
    G = build_group(name)
    pi = uniform_jump_measure(G, rate)
    return G, HeatKernel(pi, character_table(G))


def torus_map(area=1.0):
    return RibbonMap((1, 0, 3, 2), (2, 3, 1, 0), (1, 1, 1, 1), areas=(area,))


def test_torus_partition_z2_closed_form():
    """Z2 with unit uniform rate: exponents 0 and 2, so Z = 1 + e^{-2t}."""
    G, hk = make_hk("Z2")
    for t in (0.3, 1.0, 2.5):
        spec = SurfaceSpec(True, 2, 0, t)
        assert partition_formula(G, spec, hk) == pytest.approx(
            1.0 + math.exp(-2.0 * t), abs=1e-12)


def test_sphere_partition_is_kernel_at_identity():
    for name in ("Z4", "S3", "Q8"):
        G, hk = make_hk(name)
        table = character_table(G)
        for t in (0.5, 2.0):
            spec = SurfaceSpec(True, 0, 0, t)
            by_chars = sum(
                table.dims[a] ** 2 * math.exp(-t * hk.exponents[a].real)
                for a in range(table.r))
            assert partition_formula(G, spec, hk) == pytest.approx(
                by_chars, abs=1e-12)


def test_disk_partition_is_kernel_at_class():
    G, hk = make_hk("S3")
    classes = conjugacy_classes(G)
    t = 1.2
    q = hk.density(t)
    for c in range(classes.r):
        spec = SurfaceSpec(True, 0, 1, t, (c,))
        rep = classes.reps[c]
        assert partition_formula(G, spec, hk) == pytest.approx(
            q.values[rep], abs=1e-12)


def test_torus_partition_is_exponent_sum():
    """For the torus the class sum against the commutator measure collapses
    to a plain sum of exponentials over the irreps."""
    for name in ("S3", "Q8"):
        G, hk = make_hk(name)
        table = character_table(G)
        t = 0.8
        spec = SurfaceSpec(True, 2, 0, t)
        direct = sum(math.exp(-t * hk.exponents[a].real)
                     for a in range(table.r))
        assert partition_formula(G, spec, hk) == pytest.approx(
            direct, abs=1e-11)


GRAPH_CASES = [
    ("torus", SurfaceSpec(True, 2, 0, 1.0),
     RibbonMap((1, 0, 3, 2), (2, 3, 1, 0), (1, 1, 1, 1), areas=(1.0,))),
    ("klein", SurfaceSpec(False, 2, 0, 1.0), None),
    ("disk", SurfaceSpec(True, 0, 1, 1.0, (1,)), None),
    ("three-holed sphere", SurfaceSpec(True, 0, 3, 1.0, (1, 1, 2)), None),
]


@pytest.mark.parametrize("name,spec,m", GRAPH_CASES)
@pytest.mark.parametrize("gname", ["Z3", "S3"])
def test_partition_graph_matches_formula(name, spec, m, gname):
    G, hk = make_hk(gname)
    classes = conjugacy_classes(G)
    if max(spec.constraints, default=0) >= classes.r:
        pytest.skip("class index not present in this group")
    if m is None:
        m = standard_map(spec)
    C = GConstraints(boundary_classes=spec.constraints)
    lhs = partition_graph(G, m, C, hk)
    rhs = partition_formula(G, spec, hk)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_partition_graph_invariant_under_refinement():
    G, hk = make_hk("S3")
    spec = SurfaceSpec(True, 2, 0, 1.0)
    m = standard_map(spec)
    C = GConstraints()
    z = partition_graph(G, m, C, hk)
    sub, _ = subdivide_edge(m, 0)
    assert partition_graph(G, sub, C, hk) == pytest.approx(z, abs=1e-10)
    fine, _ = split_face(m, 0, 0, 2)
    assert partition_graph(G, fine, C, hk) == pytest.approx(z, abs=1e-10)


def test_upsilon_trades_boundary_for_crosscap():
    G, hk = make_hk("S3")
    t = 0.7
    for p, g in [(1, 0), (2, 2), (1, 2)]:
        lhs = upsilon(z_function(G, True, p, g, t, hk))
        rhs = z_function(G, False, p - 1, g + 1, t, hk)
        for key in rhs.values:
            assert lhs.values[key] == pytest.approx(rhs.values[key], abs=1e-10)


def test_beta1_trades_two_boundaries_for_handle():
    G, hk = make_hk("Z4")
    t = 0.5
    for p, g in [(2, 0), (3, 2)]:
        lhs = beta1(z_function(G, True, p, g, t, hk))
        rhs = z_function(G, True, p - 2, g + 2, t, hk)
        for key in rhs.values:
            assert lhs.values[key] == pytest.approx(rhs.values[key], abs=1e-10)


def test_beta2_glues_two_surfaces():
    G, hk = make_hk("S3")
    z1 = z_function(G, True, 1, 0, 0.5, hk)
    z2 = z_function(G, True, 2, 2, 1.0, hk)
    lhs = beta2(z1, z2)
    rhs = z_function(G, True, 1, 2, 1.5, hk)
    for key in rhs.values:
        assert lhs.values[key] == pytest.approx(rhs.values[key], abs=1e-10)


def test_z_function_is_symmetric():
    G, hk = make_hk("S3")
    z = z_function(G, True, 3, 0, 1.0, hk)
    assert z.check_symmetry(tol=1e-12)


def test_tame_marginal_matches_closed_form():
    """Joint law of the tame generator holonomies on a split torus:
    n^{1-g-f} prod_i Q_{t_i}(z_i) on tuples satisfying the relation."""
    G, hk = make_hk("S3")
    m = torus_map()
    fine, _ = split_face(m, 0, 0, 2)
    tame = tame_generators(fine)
    fs = faces(fine)
    f = len(fs.cycles)
    assert f == 2
    gens = tame.a + tame.l
    pmf, _ = marginal_generators(G, fine, GConstraints(), gens, hk)
    # the exponent counts handles twice: one factor of n per free edge
    pre = G.n ** (1 - 2 - f)
    qs = [hk.density(fine.areas[i]) for i in range(f)]
    for key, val in pmf.items():
        a1, a2, z1, z2 = key
        avals = (a1, a2)
        wa = 0
        for i, s in tame.w:
            x = avals[i] if s == 1 else G.inv[avals[i]]
            wa = G.mul[wa][x]
        assert G.mul[z1][z2] == wa
        expect = pre * qs[0].values[z1] * qs[1].values[z2]
        assert val == pytest.approx(expect, abs=1e-12)


def test_df_weight_gauge_invariant():
    G, hk = make_hk("S4")
    m = standard_map(SurfaceSpec(True, 2, 1, 1.0, (1,)))
    rng = random.Random(5)
    for _ in range(20):
        config = {e: rng.randrange(G.n) for e in m.edges()}
        j = {v: rng.randrange(G.n) for v in range(m.n_vertices)}
        moved = gauge_transform(G, m, config, j)
        assert df_weight(G, m, hk, moved) == pytest.approx(
            df_weight(G, m, hk, config), rel=1e-12)


def test_measure_m_is_probability():
    G = build_group("S3")
    for spec in (SurfaceSpec(True, 4, 0, 1.0),
                 SurfaceSpec(False, 3, 1, 1.0, (1,)),
                 SurfaceSpec(True, 0, 2, 1.0, (1, 2))):
        mu = measure_m(G, spec)
        assert float(sum(mu.weights)) == pytest.approx(1.0, abs=1e-14)
        assert all(w >= 0 for w in mu.weights)


def test_sample_df_exact_matches_pmf():
    G, hk = make_hk("Z3")
    m = torus_map()
    C = GConstraints()
    pmf, total = marginal_generators(
        G, m, C, tame_generators(m).a, hk, normalize=True)
    draws = sample_df(G, m, C, hk, seed=17, count=4000)
    tame = tame_generators(m)
    counts = Counter()
    from holofield.loops import holonomy_of_word

    for config in draws:
        counts[tuple(holonomy_of_word(G, m, config, w)
                     for w in tame.a)] += 1
    for key, p in pmf.items():
        assert counts[key] / 4000 == pytest.approx(p, abs=0.03)


def test_constrained_cap_raises():
    G, hk = make_hk("S4")
    m = standard_map(SurfaceSpec(True, 4, 0, 1.0))
    with pytest.raises(CapExceeded):
        partition_graph(G, m, GConstraints(), hk, cap=100)


def test_nonorientable_needs_symmetric_jumps():
    G = build_group("Z3")
    from holofield.levy import jump_measure_from_class_rates

    pi = jump_measure_from_class_rates(G, {1: 1.0})
    hk = HeatKernel(pi, character_table(G))
    m = standard_map(SurfaceSpec(False, 1, 0, 1.0))
    with pytest.raises(ValueError):
        partition_graph(G, m, GConstraints(), hk)
