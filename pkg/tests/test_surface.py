import json

import pytest

from holofield.surface import (
    MapError,
    RibbonMap,
    SurfaceSpec,
    default_areas,
    euler_and_genus,
    faces,
    gauge_flip,
    is_orientable,
    map_from_json,
    map_to_json,
    split_face,
    standard_map,
    subdivide_edge,
)


def torus_map():
    # one vertex, two loops a, b with rotation a b a^-1 b^-1
    return RibbonMap((1, 0, 3, 2), (2, 3, 1, 0), (1, 1, 1, 1))


def theta_map():
    # two vertices joined by three parallel edges, planar embedding
    return RibbonMap((1, 0, 3, 2, 5, 4), (2, 5, 4, 1, 0, 3), (1,) * 6)


def projective_map():
    return RibbonMap((1, 0), (1, 0), (-1, -1))


def klein_map():
    return standard_map(SurfaceSpec(False, 2, 0, 1.0))


def test_torus_faces():
    m = torus_map()
    fs = faces(m)
    chi, orientable, g, p = euler_and_genus(m)
    assert len(fs.cycles) == 1
    assert chi == 0 and orientable and g == 2 and p == 0


def test_theta_faces():
    m = theta_map()
    fs = faces(m)
    chi, orientable, g, p = euler_and_genus(m)
    assert len(fs.cycles) == 3
    assert chi == 2 and orientable and g == 0 and p == 0


def test_projective_plane():
    m = projective_map()
    chi, orientable, g, p = euler_and_genus(m)
    assert chi == 1 and not orientable and g == 1 and p == 0


def test_klein_bottle():
    m = klein_map()
    chi, orientable, g, p = euler_and_genus(m)
    assert chi == 0 and not orientable and g == 2 and p == 0


def test_bad_alpha_rejected():
    with pytest.raises(MapError):
        RibbonMap((0, 1), (1, 0), (1, 1))  # alpha has fixed points
    with pytest.raises(MapError):
        RibbonMap((1, 0), (1, 0), (1, -1))  # lam not constant per edge


STANDARD_SPECS = [
    SurfaceSpec(True, 0, 0, 1.0),
    SurfaceSpec(True, 2, 0, 1.0),
    SurfaceSpec(True, 4, 0, 2.0),
    SurfaceSpec(True, 0, 1, 1.0, (0,)),
    SurfaceSpec(True, 0, 3, 1.0, (0, 0, 0)),
    SurfaceSpec(True, 2, 1, 1.0, (0,)),
    SurfaceSpec(False, 1, 0, 1.0),
    SurfaceSpec(False, 2, 0, 1.0),
    SurfaceSpec(False, 3, 2, 1.0, (0, 0)),
]


@pytest.mark.parametrize("spec", STANDARD_SPECS)
def test_standard_map_topology(spec):
    m = standard_map(spec)
    chi, orientable, g, p = euler_and_genus(m)
    assert orientable == spec.orientable
    assert g == spec.genus
    assert p == spec.boundaries
    assert chi == 2 - spec.genus - spec.boundaries
    assert sum(m.areas) == pytest.approx(spec.area)


def test_orientable_genus_parity_enforced():
    with pytest.raises(MapError):
        SurfaceSpec(True, 1, 0, 1.0)
    with pytest.raises(MapError):
        SurfaceSpec(False, 0, 0, 1.0)


def test_subdivide_edge_preserves_topology_and_area():
    m = standard_map(SurfaceSpec(True, 2, 0, 1.0))
    m2, cont = subdivide_edge(m, 0)
    assert m2.n_edges == m.n_edges + 1
    assert euler_and_genus(m2) == euler_and_genus(m)
    assert sum(m2.areas) == pytest.approx(sum(m.areas))
    assert set(cont.values()) <= set(range(len(faces(m).cycles)))


def test_split_face_adds_one_face():
    m = standard_map(SurfaceSpec(True, 2, 0, 1.0))
    m2, cont = split_face(m, 0, 0, 2, (0.4, 0.6))
    assert len(faces(m2).cycles) == len(faces(m).cycles) + 1
    assert euler_and_genus(m2)[0] == euler_and_genus(m)[0]
    assert sorted(m2.areas) == [pytest.approx(0.4), pytest.approx(0.6)]


def test_split_face_default_areas_are_proportional():
    m = standard_map(SurfaceSpec(True, 2, 0, 1.0))
    m2, _ = split_face(m, 0, 0, 2)
    assert sum(m2.areas) == pytest.approx(1.0)
    assert all(a > 0 for a in m2.areas)


def test_split_face_bad_areas_rejected():
    m = standard_map(SurfaceSpec(True, 2, 0, 1.0))
    with pytest.raises(MapError):
        split_face(m, 0, 0, 2, (0.4, 0.7))


def test_split_then_subdivide_chain():
    m = standard_map(SurfaceSpec(True, 2, 0, 1.0))
    m2, _ = split_face(m, 0, 0, 2, (0.4, 0.6))
    m3, _ = subdivide_edge(m2, 0)
    chi, orientable, g, p = euler_and_genus(m3)
    assert (chi, orientable, g, p) == (0, True, 2, 0)
    assert sum(m3.areas) == pytest.approx(1.0)


def test_gauge_flip_preserves_topology():
    m = theta_map()
    for v in range(len(m.vertex_cycles())):
        flipped = gauge_flip(m, v)
        assert euler_and_genus(flipped) == euler_and_genus(m)
        assert len(faces(flipped).cycles) == len(faces(m).cycles)


def test_gauge_flip_makes_lambda_nontrivial_but_orientable():
    m = torus_map()
    flipped = gauge_flip(m, 0)
    assert is_orientable(flipped)


def test_json_roundtrip():
    m = standard_map(SurfaceSpec(True, 2, 1, 1.5, (0,)))
    text = map_to_json(m)
    m2 = map_from_json(text)
    assert m2.alpha == m.alpha
    assert m2.sigma == m.sigma
    assert m2.lam == m.lam
    assert m2.boundary == m.boundary
    assert m2.areas == pytest.approx(m.areas)
    data = json.loads(text)
    assert data["darts"] == m.n_darts


def test_default_areas_proportional_to_perimeter():
    m = theta_map()
    m2 = default_areas(m, 3.0)
    assert sum(m2.areas) == pytest.approx(3.0)
    fs = faces(m)
    perims = [len(c) for c in fs.cycles]
    for a, per in zip(m2.areas, perims):
        assert a == pytest.approx(3.0 * per / sum(perims))


def test_boundary_darts_excluded_from_faces():
    spec = SurfaceSpec(True, 0, 1, 1.0, (0,))
    m = standard_map(spec)
    boundary = set(m.boundary_darts())
    for cyc in faces(m).cycles:
        for d, eps in cyc:
            # a boundary dart appears only with its bounding side
            if d in boundary:
                assert eps == 1
