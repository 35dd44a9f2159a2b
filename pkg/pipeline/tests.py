import json
import os
import shutil
import tempfile
import xml.etree.ElementTree as ET
from pathlib import Path
from unittest import skipUnless

import numpy as np
import pytest
from django.test import SimpleTestCase

from core.exceptions import (
    ConfigurationError, ConsistencyError, DomainError, PipelineError,
)
from core.files import dump_json
from deepnn.models import PredictionSet, TrainParams
from sofm.models import ClusterPartition, SofmParams
from taskgen.generator import generate_campaign, split_temporal
from taskgen.models import Dataset, GenerationConfig, TaskRecord
from .artifacts import (
    COMPARISON_FILE, CONTINGENCY_FILE, DATASET_FILE, PARTITION_SUMMARY_FILE, PLOT_FILE,
    RANKING_FILE, SOFM_FILE, network_file, report_file,
)
from .metrics import evaluate, paired_differences
from .models import (
    VARIANT_BASELINE, VARIANT_COMBINED, VARIANT_PREC, EvaluationReport, ExperimentConfig,
    RunSettings, VariantResult,
)
from .plotting import accuracy_chart
from .serializers import EvaluationReportSerializer
from .services import (
    ExperimentService, combine_with_precl, run_baseline, run_full_experiment, run_precdeepnn,
)

SVG_NS = '{http://www.w3.org/2000/svg}'
SMALL_TRAINING = TrainParams(epochs=5, batch_size=16, patience=5)


def make_records(labels):
    return Dataset(tuple(
        TaskRecord(id=i + 1, day=1, hour=i % 24, minute=i % 60, duration_min=10 * (1 + i % 6),
                   battery_pct=1 + i % 10, latitude=48.47, longitude=-81.33, grid_number=0,
                   on_peak=1 if 7 <= i % 24 <= 11 else 0, coverage_m=50,
                   legitimacy=int(label))
        for i, label in enumerate(labels)
    ))


def small_config(**overrides):
    values = {
        'seed': 11,
        'generation': GenerationConfig(total_tasks=300, fake_fraction=0.2),
        'relieff_k': 3,
        'relieff_samples': 60,
        'sofm_rows': 2,
        'sofm_cols': 2,
        'sofm_params': SofmParams(epochs=5),
        'train_params': SMALL_TRAINING,
        'hidden_layers': (4,),
        'n_runs': 2,
    }
    values.update(overrides)
    return ExperimentConfig(**values)


def all_mixed(dataset):
    return ClusterPartition(
        legitimate_only=dataset.subset([]),
        mixed=dataset.subset(range(len(dataset))),
        assignment=np.zeros(len(dataset), dtype=np.int64),
        legitimate_indices=np.empty(0, dtype=np.int64),
        mixed_indices=np.arange(len(dataset)),
    )


class EvaluateTests(SimpleTestCase):
    """Tests for confusion counts and derived metrics."""

    def test_identical_labels_are_perfect(self):
        labels = np.array([1, 0, 1, 1, 0])
        metrics = evaluate(labels, labels)
        self.assertEqual((metrics.tp, metrics.tn, metrics.fp, metrics.fn), (3, 2, 0, 0))
        self.assertEqual(metrics.accuracy, 1.0)
        self.assertEqual(metrics.f1, 1.0)
        self.assertEqual(metrics.undefined, ())

    def test_complement_has_zero_accuracy(self):
        labels = np.array([1, 0, 1, 1, 0])
        metrics = evaluate(1 - labels, labels)
        self.assertEqual(metrics.accuracy, 0.0)
        self.assertEqual(metrics.fp, 2)
        self.assertEqual(metrics.fn, 3)

    def test_matches_tally(self):
        rng = np.random.default_rng(5)
        predicted = rng.integers(0, 2, size=500)
        actual = rng.integers(0, 2, size=500)
        metrics = evaluate(predicted, actual)

        tally = {'tp': 0, 'tn': 0, 'fp': 0, 'fn': 0}
        for p, a in zip(predicted, actual):
            key = ('t' if p == a else 'f') + ('p' if p == 1 else 'n')
            tally[key] += 1
        self.assertEqual((metrics.tp, metrics.tn, metrics.fp, metrics.fn),
                         (tally['tp'], tally['tn'], tally['fp'], tally['fn']))
        self.assertEqual(metrics.total, 500)
        self.assertAlmostEqual(metrics.accuracy, (tally['tp'] + tally['tn']) / 500, places=12)
        precision = tally['tp'] / (tally['tp'] + tally['fp'])
        recall = tally['tp'] / (tally['tp'] + tally['fn'])
        self.assertAlmostEqual(metrics.f1, 2 * precision * recall / (precision + recall),
                               places=12)

    def test_zero_denominators_are_flagged(self):
        metrics = evaluate(np.zeros(4, dtype=int), np.zeros(4, dtype=int))
        self.assertEqual(metrics.accuracy, 1.0)
        self.assertEqual(metrics.precision, 0.0)
        self.assertEqual(set(metrics.undefined), {'precision', 'recall', 'f1'})
        self.assertEqual(metrics.as_run(3)['undefined'], list(metrics.undefined))

    def test_length_mismatch(self):
        with self.assertRaises(DomainError):
            evaluate(np.array([1, 0]), np.array([1, 0, 1]))

    def test_paired_differences(self):
        labels = np.array([1, 0, 1, 0])
        runs_a = [evaluate(labels, labels), evaluate(1 - labels, labels)]
        runs_b = [evaluate(np.array([1, 1, 1, 1]), labels)] * 2
        a = EvaluationReport.from_runs(VARIANT_COMBINED, (10, 11), runs_a, 0, {})
        b = EvaluationReport.from_runs(VARIANT_BASELINE, (10, 11), runs_b, 0, {})
        paired = paired_differences(a, b)
        self.assertEqual(paired['seeds'], [10, 11])
        self.assertEqual(paired['differences'], [0.5, -0.5])
        self.assertEqual(paired['mean_difference'], 0.0)


class EvaluationReportTests(SimpleTestCase):

    def test_population_standard_deviation(self):
        labels = np.array([1, 0, 1, 0])
        runs = [evaluate(labels, labels), evaluate(np.array([1, 1, 1, 1]), labels)]
        report = EvaluationReport.from_runs(VARIANT_BASELINE, (10, 11), runs, 0,
                                            {'seed': 0, 'train': 4, 'test': 4})
        self.assertEqual(report.mean_accuracy, 0.75)
        self.assertAlmostEqual(report.std_accuracy, 0.25, places=12)

    def test_run_seeds_follow_master_seed(self):
        self.assertEqual(RunSettings(seed=7).run_seeds(3), (17, 18, 19))


class CombineWithPreclTests(SimpleTestCase):
    """Tests for merging mixed-cluster predictions with the PrecL records."""

    def test_three_predicted_two_precl(self):
        predictions = PredictionSet(np.array([0.2, 0.9, 0.4]), np.array([0, 1, 0]),
                                    np.array([0, 2, 4]))
        merged = combine_with_precl(predictions, np.array([1, 3]), 5)
        self.assertEqual(len(merged), 5)
        np.testing.assert_array_equal(merged.labels, [0, 1, 1, 1, 0])
        np.testing.assert_array_equal(merged.index_map, np.arange(5))
        self.assertEqual(merged.probabilities[1], 1.0)
        self.assertEqual(merged.probabilities[3], 1.0)
        self.assertEqual(merged.probabilities[2], 0.9)

    def test_overlap_is_rejected(self):
        predictions = PredictionSet(np.array([0.2, 0.9]), np.array([0, 1]), np.array([0, 1]))
        with self.assertRaises(ConsistencyError):
            combine_with_precl(predictions, np.array([1, 2]), 3)

    def test_gap_is_rejected(self):
        predictions = PredictionSet(np.array([0.2, 0.9]), np.array([0, 1]), np.array([0, 1]))
        with self.assertRaises(ConsistencyError):
            combine_with_precl(predictions, np.array([3]), 4)

    def test_everything_precl(self):
        empty = PredictionSet(np.empty(0), np.empty(0, dtype=np.int64),
                              np.empty(0, dtype=np.int64))
        merged = combine_with_precl(empty, np.arange(3), 3)
        np.testing.assert_array_equal(merged.labels, [1, 1, 1])


class CombinedVariantTests(SimpleTestCase):
    """Tests for the combined variant built from the mixed-cluster runs."""

    def setUp(self):
        self.test_set = make_records([1, 0, 1, 1, 0, 1])
        precl = np.array([0, 1, 3])
        mixed = np.array([2, 4, 5])
        self.partition = ClusterPartition(
            legitimate_only=self.test_set.subset(precl),
            mixed=self.test_set.subset(mixed),
            assignment=np.array([0, 0, 1, 0, 1, 1]),
            legitimate_indices=precl,
            mixed_indices=mixed,
        )
        prediction = PredictionSet(np.array([0.8, 0.7, 0.1]), np.array([1, 1, 0]), mixed)
        self.mixed_metrics = evaluate(prediction.labels, self.partition.mixed.labels)
        report = EvaluationReport.from_runs(VARIANT_PREC, (10,), [self.mixed_metrics],
                                            self.partition.precl_fakes,
                                            {'seed': 0, 'train': 0, 'test': 6}, argmin_seed=10)
        self.prec_result = VariantResult(report=report, predictions=[prediction])

    def test_leakage_counts_as_false_positive(self):
        result = ExperimentService.run_combined(self.prec_result, self.partition)
        combined = result.report.runs[0]
        precl_legitimate = len(self.partition.legitimate_only) - self.partition.precl_fakes

        self.assertEqual(self.partition.precl_fakes, 1)
        self.assertEqual(result.report.precl_leakage, 1)
        self.assertEqual(combined.fp, self.mixed_metrics.fp + self.partition.precl_fakes)
        self.assertEqual(combined.tp, self.mixed_metrics.tp + precl_legitimate)
        self.assertEqual(combined.tn, self.mixed_metrics.tn)
        self.assertEqual(combined.fn, self.mixed_metrics.fn)
        self.assertEqual(combined.total, len(self.test_set))

    def test_reuses_prec_seeds(self):
        result = ExperimentService.run_combined(self.prec_result, self.partition)
        self.assertEqual(result.report.variant, VARIANT_COMBINED)
        self.assertEqual(result.report.seeds, (10,))
        self.assertEqual(result.report.argmin_seed, 10)


class VariantTests(SimpleTestCase):
    """Tests for the baseline and the mixed-cluster variants on a small campaign."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        config = small_config()
        dataset = generate_campaign(config.effective_generation())
        cls.train, cls.test = split_temporal(dataset, 0.8)
        cls.settings = RunSettings(seed=3, params=SMALL_TRAINING, hidden_layers=(4,))

    def test_all_mixed_partition_reduces_to_baseline(self):
        baseline = run_baseline(self.train, self.test, [0, 3, 4], 2, self.settings)
        prec = run_precdeepnn(all_mixed(self.train), all_mixed(self.test), [0, 3, 4], 2,
                              self.settings)
        self.assertEqual(prec.report.seeds, baseline.report.seeds)
        self.assertEqual([m.accuracy for m in prec.report.runs],
                         [m.accuracy for m in baseline.report.runs])
        self.assertEqual(prec.report.precl_leakage, 0)
        self.assertEqual(prec.report.argmin_seed, baseline.report.argmin_seed)

    def test_baseline_reports_every_run(self):
        result = run_baseline(self.train, self.test, [0, 3], 3, self.settings)
        self.assertEqual(result.report.seeds, (13, 14, 15))
        self.assertEqual(len(result.predictions), 3)
        self.assertIn(result.report.argmin_seed, result.report.seeds)
        for metrics in result.report.runs:
            self.assertEqual(metrics.total, len(self.test))

    def test_empty_mixed_training_subset(self):
        partition = ClusterPartition(
            legitimate_only=self.train,
            mixed=self.train.subset([]),
            assignment=np.zeros(len(self.train), dtype=np.int64),
            legitimate_indices=np.arange(len(self.train)),
            mixed_indices=np.empty(0, dtype=np.int64),
        )
        with self.assertRaises(PipelineError) as ctx:
            run_precdeepnn(partition, all_mixed(self.test), [0], 1, self.settings)
        self.assertEqual(ctx.exception.stage, VARIANT_PREC)
        self.assertIsInstance(ctx.exception.cause, DomainError)


class FullExperimentTests(SimpleTestCase):
    """Tests for the end-to-end experiment."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.out_dir = tempfile.mkdtemp(prefix='fakeguard-test-')
        cls.result = run_full_experiment(small_config(), cls.out_dir)

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.out_dir, ignore_errors=True)
        super().tearDownClass()

    def test_writes_every_artifact(self):
        names = {Path(path).name for path in self.result.artifacts}
        expected = {DATASET_FILE, RANKING_FILE, SOFM_FILE, CONTINGENCY_FILE,
                    PARTITION_SUMMARY_FILE, COMPARISON_FILE, PLOT_FILE}
        for variant in (VARIANT_BASELINE, VARIANT_PREC, VARIANT_COMBINED):
            expected |= {report_file(variant), network_file(variant)}
        self.assertEqual(names, expected)

    def test_deterministic_for_a_seed(self):
        again = run_full_experiment(small_config())
        for variant, report in self.result.reports.items():
            self.assertEqual(again.reports[variant].as_payload(), report.as_payload())
        self.assertEqual(again.selected, self.result.selected)

    def test_partitions_reconstruct_their_sources(self):
        self.assertEqual(self.result.train_partition.reconstruct().records,
                         self.result.train.records)
        self.assertEqual(self.result.test_partition.reconstruct().records,
                         self.result.test.records)
        self.assertEqual(self.result.train_partition.precl_fakes, 0)

    def test_combined_leakage_matches_test_partition(self):
        combined = self.result.reports[VARIANT_COMBINED]
        prec = self.result.reports[VARIANT_PREC]
        self.assertEqual(combined.precl_leakage, self.result.test_partition.precl_fakes)
        self.assertEqual(combined.seeds, prec.seeds)
        for merged, mixed in zip(combined.runs, prec.runs):
            self.assertEqual(merged.fp, mixed.fp + combined.precl_leakage)

    def test_plot_bars_carry_report_means(self):
        tree = ET.parse(os.path.join(self.out_dir, PLOT_FILE))
        bars = {}
        for group in tree.getroot().iter(f'{SVG_NS}g'):
            rect = group.find(f'{SVG_NS}rect')
            if rect is not None and rect.get('class') == 'bar':
                bars[group.get('data-variant')] = float(rect.get('data-mean'))
        self.assertEqual(bars, {variant: report.mean_accuracy
                                for variant, report in self.result.reports.items()})

    def test_report_reserializes_identically(self):
        for variant in (VARIANT_BASELINE, VARIANT_PREC, VARIANT_COMBINED):
            text = Path(self.out_dir, report_file(variant)).read_text(encoding='utf-8')
            serializer = EvaluationReportSerializer(data=json.loads(text))
            self.assertTrue(serializer.is_valid(), serializer.errors)
            self.assertEqual(dump_json(serializer.to_report().as_payload()), text)

    def test_report_echoes_configuration(self):
        payload = json.loads(Path(self.out_dir, report_file(VARIANT_BASELINE)).read_text())
        self.assertEqual(payload['config']['seed'], 11)
        self.assertEqual(payload['config']['seeds']['runs'], [21, 22])
        self.assertEqual([run['seed'] for run in payload['runs']], [21, 22])

    def test_single_variant_writes_only_its_report(self):
        with tempfile.TemporaryDirectory() as out_dir:
            result = run_full_experiment(small_config(variants=(VARIANT_BASELINE,)), out_dir)
            names = {Path(path).name for path in result.artifacts}
        self.assertIn(report_file(VARIANT_BASELINE), names)
        self.assertNotIn(report_file(VARIANT_PREC), names)
        self.assertNotIn(SOFM_FILE, names)
        self.assertNotIn(COMPARISON_FILE, names)
        self.assertIsNone(result.sofm_map)

    def test_sequential_selection(self):
        result = run_full_experiment(small_config(selection='sequential', top_k=3,
                                                  variants=(VARIANT_BASELINE,)))
        self.assertGreaterEqual(len(result.selected), 1)
        self.assertLessEqual(len(result.selected), 3)
        self.assertEqual(result.selected[0], result.ranking.order[0])


class ExperimentFailureTests(SimpleTestCase):

    def test_zero_fake_fraction_is_rejected(self):
        config = small_config(generation=GenerationConfig(total_tasks=300, fake_fraction=0.0))
        with self.assertRaises(PipelineError) as ctx:
            run_full_experiment(config)
        self.assertEqual(ctx.exception.stage, 'generate')
        self.assertIsInstance(ctx.exception.cause, ConfigurationError)

    def test_invalid_config_fails_in_config_stage(self):
        with self.assertRaises(PipelineError) as ctx:
            run_full_experiment(small_config(n_runs=0))
        self.assertEqual(ctx.exception.stage, 'config')

    def test_missing_dataset_file(self):
        with self.assertRaises(PipelineError) as ctx:
            run_full_experiment(small_config(dataset_path='/nonexistent/tasks.csv'))
        self.assertEqual(ctx.exception.stage, 'generate')


class AccuracyChartTests(SimpleTestCase):

    def test_one_bar_and_dot_per_run(self):
        labels = np.array([1, 0, 1, 0])
        runs = [evaluate(labels, labels), evaluate(np.array([1, 1, 1, 1]), labels)]
        report = EvaluationReport.from_runs(VARIANT_BASELINE, (10, 11), runs, 0, {})
        root = ET.fromstring(accuracy_chart([report]))
        self.assertEqual(len([r for r in root.iter(f'{SVG_NS}rect')
                              if r.get('class') == 'bar']), 1)
        dots = [c for c in root.iter(f'{SVG_NS}circle') if c.get('class') == 'run']
        self.assertEqual([int(c.get('data-seed')) for c in dots], [10, 11])


@pytest.mark.slow
@skipUnless(os.environ.get('FAKEGUARD_RUN_SLOW') == '1', "set FAKEGUARD_RUN_SLOW=1 to run")
class FullScaleTests(SimpleTestCase):
    """Full-size campaign with the default configuration."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.result = run_full_experiment(ExperimentConfig(workers=4))
        cls.reports = cls.result.reports

    def test_combined_variant_beats_baseline(self):
        baseline = self.reports[VARIANT_BASELINE]
        combined = self.reports[VARIANT_COMBINED]
        self.assertEqual(baseline.dataset['train'] + baseline.dataset['test'], 14306)
        self.assertGreaterEqual(baseline.mean_accuracy, 0.92)
        self.assertLessEqual(baseline.mean_accuracy, 1.0)
        self.assertGreaterEqual(combined.mean_accuracy, baseline.mean_accuracy)
        self.assertAlmostEqual(combined.mean_accuracy, 0.97, delta=0.05)

    def test_training_partition_mitigates_imbalance(self):
        partition = self.result.train_partition
        shares = partition.fake_shares(self.result.train)
        self.assertGreater(len(partition.legitimate_only), 0)
        self.assertEqual(partition.precl_fakes, 0)
        self.assertEqual(shares['legitimate_only'], 0.0)
        self.assertGreater(shares['mixed'], shares['full'])

    def test_test_leakage_is_small(self):
        combined = self.reports[VARIANT_COMBINED]
        prec = self.reports[VARIANT_PREC]
        test_fakes = self.result.test.fake_total
        self.assertEqual(combined.precl_leakage, self.result.test_partition.precl_fakes)
        self.assertLessEqual(combined.precl_leakage, 0.02 * test_fakes)
        for merged, mixed in zip(combined.runs, prec.runs):
            self.assertEqual(merged.fp - mixed.fp, combined.precl_leakage)
