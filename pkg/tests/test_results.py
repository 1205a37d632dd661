import json

import pytest

from foal import (
    FoalError,
    make_synthetic_stream,
    parse_manifest,
    parse_results,
    results_to_dict,
    run_experiment,
    RunConfig,
    serialize_results,
    write_results,
)


@pytest.fixture(scope="module")
def run_outputs(tmp_path_factory):
    out = tmp_path_factory.mktemp("resstream")
    path = make_synthetic_stream(out, tasks=2, classes_per_task=2,
                                 samples_per_class=20,
                                 test_samples_per_class=10,
                                 block_count=2, block_dim=8, seed=3)
    manifest = parse_manifest(path)
    report, acc, _ = run_experiment(manifest, RunConfig(projection_dim=64,
                                                        seed=3))
    return report, acc


def test_round_trip_is_lossless(run_outputs, tmp_path):
    report, acc = run_outputs
    document = results_to_dict(report, acc, include_timing=True)
    path = tmp_path / "results.json"
    write_results(document, path)
    assert parse_results(path) == document


def test_serialization_is_deterministic(run_outputs):
    report, acc = run_outputs
    a = serialize_results(results_to_dict(report, acc))
    b = serialize_results(results_to_dict(report, acc))
    assert a == b


def test_timing_is_opt_in(run_outputs):
    report, acc = run_outputs
    assert "timing" not in results_to_dict(report, acc)
    timed = results_to_dict(report, acc, include_timing=True)
    assert timed["timing"]["batch_seconds"] == report.batch_seconds


def test_document_shape(run_outputs):
    report, acc = run_outputs
    document = results_to_dict(report, acc)
    assert document["schema_version"] == 1
    assert document["num_tasks"] == 2
    assert [len(row) for row in document["accuracy_matrix"]] == [1, 2]
    assert document["config"]["gamma"] == 1.0
    assert document["config"]["projection_dim"] == 64
    assert document["last_accuracy"] == document["per_task_accuracy"][-1]
    assert len(document["weight_norms"]) == 4


def test_floats_survive_json_exactly(run_outputs):
    report, acc = run_outputs
    document = results_to_dict(report, acc, include_timing=True)
    reparsed = json.loads(serialize_results(document))
    assert reparsed["average_accuracy"] == document["average_accuracy"]
    assert reparsed["timing"]["batch_seconds"] == document["timing"]["batch_seconds"]


def test_unknown_schema_version_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"schema_version": 99}))
    with pytest.raises(FoalError, match="schema version"):
        parse_results(path)
