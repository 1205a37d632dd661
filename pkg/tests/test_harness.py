import json

import numpy as np
import pytest

from foal import (
    ActivationBatch,
    BlockFeatureSet,
    FoalError,
    LabelBatch,
    RunConfig,
    evaluate,
    make_synthetic_stream,
    new_classifier,
    parse_manifest,
    read_header,
    results_to_dict,
    run_experiment,
    serialize_results,
    update,
    write_features,
)


@pytest.fixture(scope="module")
def small_manifest(tmp_path_factory):
    out = tmp_path_factory.mktemp("stream")
    path = make_synthetic_stream(out, tasks=3, classes_per_task=2,
                                 samples_per_class=30,
                                 test_samples_per_class=15,
                                 block_count=3, block_dim=12, seed=5)
    return parse_manifest(path)


@pytest.fixture(scope="module")
def small_config():
    return RunConfig(projection_dim=200, seed=5)


class TestRunExperiment:
    def test_self_consistency_on_train_as_test(self, tmp_path):
        # 1 task whose test set is its train set: near-perfect accuracy
        rng = np.random.default_rng(0)
        centers = {0: 3.0, 1: -3.0}
        samples = [(c, BlockFeatureSet(
                    (centers[c] + 0.4 * rng.standard_normal((2, 8)))
                    .astype(np.float32)))
                   for c in rng.integers(0, 2, size=80)]
        write_features(samples, tmp_path / "t.foal")
        document = {
            "dataset": "self", "block_count": 2, "block_dim": 8,
            "tasks": [{"k": 1, "classes": [0, 1], "train": "t.foal",
                       "test": "t.foal"}],
        }
        (tmp_path / "m.json").write_text(json.dumps(document))
        manifest = parse_manifest(tmp_path / "m.json")
        report, acc, _ = run_experiment(manifest, RunConfig(projection_dim=100))
        assert acc.get(1, 1) >= 0.95
        assert report.final_forgetting is None
        assert report.per_task_forgetting == []

    def test_two_runs_serialize_byte_identical(self, small_manifest,
                                               small_config):
        docs = []
        for _ in range(2):
            report, acc, _ = run_experiment(small_manifest, small_config)
            docs.append(serialize_results(results_to_dict(report, acc)))
        assert docs[0] == docs[1]

    def test_batch_size_does_not_change_the_outcome(self, small_manifest):
        _, acc_whole, state_whole = run_experiment(
            small_manifest, RunConfig(projection_dim=150, seed=5,
                                      batch_size=60))
        _, acc_single, state_single = run_experiment(
            small_manifest, RunConfig(projection_dim=150, seed=5,
                                      batch_size=1))
        rel = (np.linalg.norm(state_single.W - state_whole.W)
               / np.linalg.norm(state_whole.W))
        assert rel <= 1e-8
        # final accuracy row must agree exactly: margins dwarf fp noise
        m = small_manifest.num_tasks
        assert acc_whole.row(m).tolist() == acc_single.row(m).tolist()

    def test_one_pass_accounting(self, small_manifest, small_config):
        report, _, state = run_experiment(small_manifest, small_config)
        declared = [read_header(t.train).sample_count
                    for t in small_manifest.tasks]
        assert report.samples_per_task == declared
        assert state.samples_seen == sum(declared)
        assert len(report.batch_seconds) == sum(
            -(-count // small_config.batch_size) for count in declared)

    def test_partial_final_batch_is_processed(self, small_manifest):
        # 60 samples per task, batch 17 -> 4 batches per task (last short)
        report, _, _ = run_experiment(
            small_manifest, RunConfig(projection_dim=100, seed=5,
                                      batch_size=17))
        assert len(report.batch_seconds) == 4 * small_manifest.num_tasks

    def test_label_outside_declared_classes_rejected(self, tmp_path):
        rng = np.random.default_rng(1)
        samples = [(7, BlockFeatureSet(rng.normal(size=(2, 4))
                                       .astype(np.float32)))]
        write_features(samples, tmp_path / "t.foal")
        document = {
            "dataset": "bad", "block_count": 2, "block_dim": 4,
            "tasks": [{"k": 1, "classes": [0], "train": "t.foal",
                       "test": "t.foal"}],
        }
        (tmp_path / "m.json").write_text(json.dumps(document))
        manifest = parse_manifest(tmp_path / "m.json")
        with pytest.raises(FoalError, match="class 7"):
            run_experiment(manifest, RunConfig(projection_dim=10))

    def test_report_metrics_are_consistent(self, small_manifest, small_config):
        report, acc, _ = run_experiment(small_manifest, small_config)
        m = small_manifest.num_tasks
        assert report.last_accuracy == report.per_task_accuracy[-1]
        assert report.average_accuracy == pytest.approx(
            np.mean(report.per_task_accuracy))
        assert report.last_accuracy == pytest.approx(
            float(np.mean([acc.get(m, j) for j in range(1, m + 1)])))
        assert len(report.weight_norms) == m * 2  # classes_per_task = 2

    def test_batch_diagnostics_flag(self, small_manifest):
        config = RunConfig(projection_dim=60, seed=5, batch_size=30)
        report, _, _ = run_experiment(small_manifest, config,
                                      collect_batch_diagnostics=True)
        assert len(report.batch_diagnostics) == len(report.batch_seconds)
        assert report.batch_diagnostics[0]["task"] == 1
        assert 0.0 <= report.batch_diagnostics[0]["task_test_accuracy"] <= 1.0
        # diagnostics never leak into the canonical document
        document = results_to_dict(report, run_experiment(
            small_manifest, config)[1])
        assert "batch_diagnostics" not in document


class TestEvaluate:
    def _trained(self):
        state = new_classifier(2, 1.0)
        X = np.array([[1.0, 0.0], [0.0, 1.0]], dtype=np.float32)
        return update(state, ActivationBatch(X), LabelBatch([0, 1]))

    def test_all_correct(self):
        state = self._trained()
        X = ActivationBatch(np.array([[1.0, 0.0], [0.0, 1.0]],
                                     dtype=np.float32))
        assert evaluate(state, X, [0, 1]) == 1.0

    def test_none_correct(self):
        state = self._trained()
        X = ActivationBatch(np.array([[1.0, 0.0], [0.0, 1.0]],
                                     dtype=np.float32))
        assert evaluate(state, X, [1, 0]) == 0.0

    def test_three_of_four(self):
        state = self._trained()
        X = ActivationBatch(np.array(
            [[1, 0], [1, 0], [0, 1], [0, 1]], dtype=np.float32))
        assert evaluate(state, X, [0, 0, 1, 0]) == 0.75

    def test_empty_test_set_rejected(self):
        with pytest.raises(FoalError, match="empty"):
            evaluate(self._trained(),
                     ActivationBatch(np.ones((1, 2), dtype=np.float32)), [])
