import json

from qindex import io as qio
from qindex.cli import main
from qindex.fusion import validate_fusion
from qindex.generators import gen_regular_module


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report_of(stdout):
    return json.loads(stdout.strip().splitlines()[-1])


def pinching_spec(tmp_path):
    spec = {
        "inclusion": {
            "source": {"blocks": [1, 1]},
            "target": {"blocks": [2]},
            "matrix": [[[1, 0]] + [[0, 0]],
                       [[0, 0], [0, 0]],
                       [[0, 0], [0, 0]],
                       [[0, 0], [1, 0]]],
        }
    }
    path = tmp_path / "pinch.json"
    path.write_text(json.dumps(spec))
    return str(path)


def test_index_compute_pinching(tmp_path, capsys):
    out_path = tmp_path / "report.json"
    code, out, _ = run(capsys, "index", "compute", "--spec", pinching_spec(tmp_path),
                       "-o", str(out_path))
    assert code == 0
    results = report_of(out)["results"]
    assert abs(results["index_norm"] - 2.0) <= 1e-9
    assert abs(results["scalar_index"] - 2.0) <= 1e-9
    assert abs(results["prob_lower"] - 2.0) <= 1e-9
    assert results["quasi_basis_size"] >= 2
    assert json.loads(out_path.read_text()) == results


def test_index_compute_identity(tmp_path, capsys):
    spec = {
        "inclusion": {
            "source": {"blocks": [2]},
            "target": {"blocks": [2]},
            "matrix": [[[1, 0], [0, 0], [0, 0], [0, 0]],
                       [[0, 0], [1, 0], [0, 0], [0, 0]],
                       [[0, 0], [0, 0], [1, 0], [0, 0]],
                       [[0, 0], [0, 0], [0, 0], [1, 0]]],
        }
    }
    path = tmp_path / "id.json"
    path.write_text(json.dumps(spec))
    code, out, _ = run(capsys, "index", "compute", "--spec", str(path))
    assert code == 0
    results = report_of(out)["results"]
    for key in ("index_norm", "scalar_index", "prob_lower", "prob_upper"):
        assert abs(results[key] - 1.0) <= 1e-9


def test_index_compute_rank_deficient_exits_3(tmp_path, capsys):
    spec = {
        "inclusion": {
            "source": {"blocks": [1]},
            "target": {"blocks": [2]},
            "matrix": [[[1, 0]], [[0, 0]], [[0, 0]], [[1, 0]]],
        },
        "map": [
            [[1, 0], [0, 0], [0, 0], [0, 0]],
            [[0, 0], [0, 0], [0, 0], [0, 0]],
            [[0, 0], [0, 0], [0, 0], [0, 0]],
            [[1, 0], [0, 0], [0, 0], [0, 0]],
        ],
    }
    path = tmp_path / "rankdef.json"
    path.write_text(json.dumps(spec))
    code, out, _ = run(capsys, "index", "compute", "--spec", str(path))
    assert code == 3
    results = report_of(out)["results"]
    assert results["scalar_index"] == "inf"


def test_malformed_json_exits_1(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"oops":')
    code, _, err = run(capsys, "index", "compute", "--spec", str(path))
    assert code == 1
    assert "line" in err


def test_schema_violation_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"inclusion": {"source": {"blocks": []},
                                              "target": {"blocks": [2]},
                                              "matrix": []}}))
    code, _, err = run(capsys, "index", "compute", "--spec", str(path))
    assert code == 2


def test_generate_round_trips(tmp_path, capsys):
    out_path = tmp_path / "tlj7.json"
    code, _, _ = run(capsys, "fusion", "generate", "tlj", "--n", "7",
                     "-o", str(out_path))
    assert code == 0
    ring = qio.ring_from_json(json.loads(out_path.read_text()))
    assert len(ring.labels) == 6
    assert validate_fusion(ring) == []

    out_path = tmp_path / "v4.json"
    code, _, _ = run(capsys, "fusion", "generate", "pointed", "--factors", "2,2",
                     "-o", str(out_path))
    assert code == 0
    ring = qio.ring_from_json(json.loads(out_path.read_text()))
    assert len(ring.labels) == 4
    assert validate_fusion(ring) == []


def test_generate_tlj4_has_three_labels(tmp_path, capsys):
    out_path = tmp_path / "tlj4.json"
    code, out, _ = run(capsys, "fusion", "generate", "tlj", "--n", "4",
                       "-o", str(out_path))
    assert code == 0
    assert len(json.loads(out_path.read_text())["irr"]) == 3


def test_fusion_trace_regular(tmp_path, capsys):
    ring_path = tmp_path / "tlj4.json"
    run(capsys, "fusion", "generate", "tlj", "--n", "4", "-o", str(ring_path))
    code, out, _ = run(capsys, "fusion", "trace", "--ring", str(ring_path),
                       "--module", "regular")
    assert code == 0
    trace = report_of(out)["results"]["trace"]
    assert abs(trace["0"] - 1.0) <= 1e-9
    assert abs(trace["1"] - 1.41421356) <= 1e-7
    assert abs(trace["2"] - 1.0) <= 1e-9


def test_fusion_trace_module_file(tmp_path, capsys):
    ring_path = tmp_path / "z4.json"
    run(capsys, "fusion", "generate", "pointed", "--factors", "4",
        "-o", str(ring_path))
    ring = qio.ring_from_json(json.loads(ring_path.read_text()))
    module_path = tmp_path / "reg.json"
    module_path.write_text(json.dumps(qio.module_to_json(gen_regular_module(ring))))
    code, out, _ = run(capsys, "fusion", "trace", "--ring", str(ring_path),
                       "--module", str(module_path))
    assert code == 0
    assert report_of(out)["results"]["status"] == "ok"


def test_fusion_jones(capsys):
    code, out, _ = run(capsys, "fusion", "jones", "--value", "2.618033988")
    assert code == 0
    results = report_of(out)["results"]
    assert results["member"] is True and results["witness"] == 5

    code, out, _ = run(capsys, "fusion", "jones", "--value", "3.5")
    results = report_of(out)["results"]
    assert results["member"] is False


def test_fusion_descent(tmp_path, capsys):
    ring_path = tmp_path / "tlj4.json"
    run(capsys, "fusion", "generate", "tlj", "--n", "4", "-o", str(ring_path))
    code, out, _ = run(capsys, "fusion", "descent", "--ring", str(ring_path),
                       "--module", "regular", "--subring", "0,2")
    assert code == 0
    results = report_of(out)["results"]
    assert results["classes"] == [["0", "2"], ["1"]]
    for u, entry in results["functors"].items():
        assert entry["locally_constant"] is True

    # restricted to a single action functor
    code, out, _ = run(capsys, "fusion", "descent", "--ring", str(ring_path),
                       "--module", "regular", "--subring", "0,2",
                       "--action-by", "1")
    assert code == 0
    functors = report_of(out)["results"]["functors"]
    assert list(functors) == ["1"]

    # unclosed subring is a validation failure
    code, _, _ = run(capsys, "fusion", "descent", "--ring", str(ring_path),
                     "--module", "regular", "--subring", "0,1")
    assert code == 2


def test_classify_table(capsys):
    code, out, _ = run(capsys, "classify", "--lie-type", "D4")
    assert code == 0
    entries = report_of(out)["results"]["entries"]
    assert [e["index"] for e in entries] == [1, 2, 2, 2, 4]

    code, out, _ = run(capsys, "classify", "--lie-type", "E8")
    entries = report_of(out)["results"]["entries"]
    assert [e["index"] for e in entries] == [1]


def test_classify_irrep(capsys):
    code, out, _ = run(capsys, "classify", "irrep", "--lie-type", "A1",
                       "--weight", "1", "--subgroup", "Q")
    assert code == 0
    assert report_of(out)["results"]["member"] is False

    code, out, _ = run(capsys, "classify", "irrep", "--lie-type", "A1",
                       "--weight", "2", "--subgroup", "Q")
    assert report_of(out)["results"]["member"] is True

    code, out, _ = run(capsys, "classify", "irrep", "--lie-type", "E6",
                       "--weight", "0,0,0,0,0,0", "--subgroup", "Q")
    assert report_of(out)["results"]["member"] is True


def test_classify_rejects_unknown_type(capsys):
    code, _, err = run(capsys, "classify", "--lie-type", "Z9")
    assert code == 2


def test_reports_byte_stable_for_fixed_seed(tmp_path, capsys):
    spec = pinching_spec(tmp_path)
    outputs = []
    for _ in range(2):
        code, out, _ = run(capsys, "index", "compute", "--spec", spec,
                           "--seed", "7")
        assert code == 0
        report = report_of(out)
        report.pop("wall_ms")  # the one run-dependent field
        outputs.append(json.dumps(report, sort_keys=True))
    assert outputs[0] == outputs[1]
