"""Command line interface: commands, formats, determinism, exit codes."""

import json

import pytest

from holofield.cli import run


@pytest.fixture
def files(tmp_path):
    def write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return str(path)

    return {
        "s3": write("s3.json", {"kind": "builtin", "name": "S3"}),
        "z2": write("z2.json", {"kind": "builtin", "name": "Z2"}),
        "levy_s3": write("levy_s3.json",
                         {"rates": {"021": 0.5, "120": 0.5}}),
        "levy_z2": write("levy_z2.json", {"rates": {"1": 1.0}}),
        "torus": write("torus.json", {"orientable": True, "genus": 2,
                                      "boundaries": 0, "area": 1.0}),
        "klein": write("klein.json", {"orientable": False, "genus": 2,
                                      "boundaries": 0, "area": 1.0}),
        "disk": write("disk.json", {"orientable": True, "genus": 0,
                                    "boundaries": 1, "area": 1.0,
                                    "constraints": [1]}),
        "table": write("table.json", {
            "kind": "table",
            "order": 2,
            "table": [[0, 1], [1, 0]],
            "labels": ["e", "f"],
        }),
        "broken": write("broken.json", {"kind": "builtin", "name": "nope"}),
        "tmp": tmp_path,
    }


def run_json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out else None)


def test_group_info(files, capsys):
    code, doc = run_json(capsys, ["group-info", "--group", files["s3"]])
    assert code == 0
    assert doc["order"] == 6
    assert sorted(d["dimension"] for d in doc["irreps"]) == [1, 1, 2]


def test_group_info_table_kind(files, capsys):
    code, doc = run_json(capsys, ["group-info", "--group", files["table"]])
    assert code == 0
    assert doc["order"] == 2


def test_faces_torus(files, capsys, tmp_path):
    from holofield.surface import RibbonMap, map_to_json

    m = RibbonMap((1, 0, 3, 2), (2, 3, 1, 0), (1, 1, 1, 1), areas=(1.0,))
    path = tmp_path / "torus_map.json"
    path.write_text(map_to_json(m))
    code, doc = run_json(capsys, ["faces", "--map", str(path)])
    assert code == 0
    assert len(doc["faces"]) == 1
    assert doc["euler_characteristic"] == 0
    assert doc["genus"] == 2 and doc["boundaries"] == 0


def test_partition_routes_agree(files, capsys):
    args = ["partition", "--group", files["s3"], "--surface", files["torus"],
            "--levy", files["levy_s3"]]
    code, by_formula = run_json(capsys, args + ["--via", "formula"])
    assert code == 0
    code, by_graph = run_json(capsys, args + ["--via", "graph"])
    assert code == 0
    assert by_graph["value"] == pytest.approx(by_formula["value"], abs=1e-10)
    assert by_graph["pass"] is True


@pytest.mark.parametrize("suite", [
    "semigroup", "kappa-eta", "surgery", "subdivision", "tame",
    "holo-mono", "counting",
])
def test_verify_suites_pass(files, capsys, suite):
    code, doc = run_json(capsys, [
        "verify", suite, "--group", files["s3"],
        "--surface", files["torus"], "--levy", files["levy_s3"]])
    assert code == 0
    assert doc["cases"]
    assert all(case["pass"] for case in doc["cases"])


def test_verify_on_nonorientable_surface(files, capsys):
    code, doc = run_json(capsys, [
        "verify", "holo-mono", "--group", files["z2"],
        "--surface", files["klein"], "--levy", files["levy_z2"]])
    assert code == 0


def test_verify_with_boundary(files, capsys):
    code, doc = run_json(capsys, [
        "verify", "holo-mono", "--group", files["s3"],
        "--surface", files["disk"], "--levy", files["levy_s3"]])
    assert code == 0


def test_cover_enumerate(files, capsys):
    code, doc = run_json(capsys, [
        "cover", "enumerate", "--k", "2", "--group", files["s3"],
        "--surface", files["torus"], "--levy", files["levy_s3"]])
    assert code == 0
    assert doc["cases"]
    for rec in doc["cases"]:
        assert rec["aut_order"] >= 1


def test_cover_mass_matches_partition(files, capsys):
    code, doc = run_json(capsys, [
        "cover", "mass", "--group", files["s3"],
        "--surface", files["torus"], "--levy", files["levy_s3"]])
    assert code == 0
    assert doc["pass"] is True


def test_cover_sample_deterministic(files, capsys):
    argv = ["cover", "sample", "--count", "3", "--seed", "11",
            "--group", files["z2"], "--surface", files["torus"],
            "--levy", files["levy_z2"]]
    code1, doc1 = run_json(capsys, argv)
    code2, doc2 = run_json(capsys, argv)
    assert code1 == code2 == 0
    assert doc1 == doc2


def test_output_is_byte_stable(files, capsys):
    argv = ["group-info", "--group", files["s3"]]
    run(argv)
    first = capsys.readouterr().out
    run(argv)
    second = capsys.readouterr().out
    assert first == second


def test_csv_format(files, capsys):
    code = run(["verify", "semigroup", "--group", files["z2"],
                "--levy", files["levy_z2"], "--format", "csv"])
    out = capsys.readouterr().out
    assert code == 0
    lines = [l for l in out.strip().splitlines() if l]
    assert len(lines) >= 2
    assert "pass" in lines[0]


def test_bad_group_file_is_input_error(files, capsys):
    assert run(["group-info", "--group", files["broken"]]) == 2


def test_missing_file_is_input_error(files, capsys):
    assert run(["group-info", "--group", str(files["tmp"] / "nope.json")]) == 2


def test_malformed_json_is_input_error(files, capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["group-info", "--group", str(bad)]) == 2


def test_cap_exit_code(files, capsys):
    code = run(["cover", "enumerate", "--k", "5", "--cap", "10",
                "--group", files["s3"], "--surface", files["torus"],
                "--levy", files["levy_s3"]])
    assert code == 3


def test_verify_failure_exit_code(files, capsys, tmp_path):
    """A jump measure missing inversion symmetry is rejected as bad input
    on a non-orientable surface."""
    levy = tmp_path / "levy_z3.json"
    levy.write_text(json.dumps({"rates": {"1": 1.0}}))
    group = tmp_path / "z3.json"
    group.write_text(json.dumps({"kind": "builtin", "name": "Z3"}))
    surface = tmp_path / "proj.json"
    surface.write_text(json.dumps({"orientable": False, "genus": 1,
                                   "boundaries": 0, "area": 1.0}))
    code = run(["partition", "--group", str(group),
                "--surface", str(surface), "--levy", str(levy)])
    assert code == 2
