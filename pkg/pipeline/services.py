"""
Service layer for the three detection variants and the full experiment.
"""

import logging
from contextlib import contextmanager
from dataclasses import replace

import numpy as np

from core.exceptions import (
    ConsistencyError, DomainError, FakeGuardError, PipelineError,
)
from core.logging import log_stage_activity, log_system_error
from deepnn.models import PredictionSet, TrainParams
from deepnn.network import predict
from deepnn.services import TrainingService
from features.models import FeatureMatrix
from features.relieff import relieff
from features.scaling import fit_scaler, transform
from features.selection import holdout_evaluator, select_top_k, sequential_forward_select
from sofm.clustering import cluster_counts, label_map, partition
from sofm.training import init_map, train_sofm
from taskgen.generator import generate_campaign, split_temporal
from taskgen.models import LEGITIMATE
from taskgen.serializers import read_dataset_csv
from .artifacts import write_artifacts
from .metrics import evaluate
from .models import (
    RELIEFF_SEED_OFFSET, SELECTION_SEQUENTIAL, SOFM_SEED_OFFSET, VARIANT_BASELINE,
    VARIANT_COMBINED, VARIANT_PREC, EvaluationReport, ExperimentResult, RunSettings,
    VariantResult,
)

logger = logging.getLogger('fakeguard.pipeline')

# shallow network used to score candidate subsets during sequential selection
SELECTION_PARAMS = TrainParams(epochs=30, patience=5)


def scaled_features(dataset, scaler, feature_indices):
    """Candidate features of a dataset, min-max scaled, restricted to the selection."""
    return transform(scaler, FeatureMatrix.from_dataset(dataset)).select_columns(feature_indices)


def combine_with_precl(predictions, precl_indices, test_size):
    """
    Predictions over the whole test set: model labels for the mixed records
    and label 1 for every pre-clustered legitimate record. Both index sets
    must be disjoint and together cover 0..test_size-1 exactly once.
    """
    mixed = np.asarray(predictions.index_map, dtype=np.int64)
    precl = np.asarray(precl_indices, dtype=np.int64)
    if np.unique(mixed).size != mixed.size or np.unique(precl).size != precl.size:
        raise ConsistencyError("a test record appears twice in one subset.")
    overlap = np.intersect1d(mixed, precl)
    if overlap.size:
        raise ConsistencyError(
            f"{overlap.size} test records are both predicted and pre-clustered.",
            details={'overlap': overlap[:10].tolist()},
        )
    covered = np.union1d(mixed, precl)
    if covered.size != test_size or (test_size and (covered[0] != 0 or covered[-1] != test_size - 1)):
        raise ConsistencyError(
            f"predicted and pre-clustered records cover {covered.size} positions, "
            f"expected exactly 0..{test_size - 1}."
        )

    labels = np.empty(test_size, dtype=np.int64)
    probabilities = np.empty(test_size, dtype=np.float64)
    labels[mixed] = predictions.labels
    probabilities[mixed] = predictions.probabilities
    # accepted without scoring
    labels[precl] = LEGITIMATE
    probabilities[precl] = 1.0
    return PredictionSet(probabilities, labels, np.arange(test_size), predictions.threshold)


@contextmanager
def stage(name):
    """Re-raise any failure inside a stage as a PipelineError tagged with it."""
    try:
        yield
    except PipelineError:
        raise
    except (FakeGuardError, OSError) as exc:
        raise PipelineError(name, exc) from exc
    except Exception as exc:
        log_system_error(exc, {'stage': name})
        raise PipelineError(name, exc) from exc


class ExperimentService:
    """Runs the detection variants and the end-to-end experiment."""

    @staticmethod
    def _run_variant(variant, train_rows, eval_rows, index_map, n_runs, settings,
                     precl_leakage, dataset_info):
        if n_runs < 1:
            raise DomainError(f"n_runs must be >= 1, got {n_runs}.")
        seeds = settings.run_seeds(n_runs)
        outcomes = TrainingService.train_restarts(
            train_rows.rows, train_rows.labels, settings.params, seeds,
            hidden_layers=settings.hidden_layers, workers=settings.workers, variant=variant,
        )
        predictions = [predict(outcome.network, eval_rows.rows, settings.threshold, index_map)
                       for outcome in outcomes]
        runs = [evaluate(prediction.labels, eval_rows.labels) for prediction in predictions]
        argmin = TrainingService.select_argmin(outcomes)
        report = EvaluationReport.from_runs(variant, seeds, runs, precl_leakage, dataset_info,
                                            argmin_seed=argmin.seed, config=settings.config)
        log_stage_activity(variant, 'variant evaluated', details={
            'runs': n_runs,
            'mean_accuracy': report.mean_accuracy,
        })
        return VariantResult(report=report, predictions=predictions, argmin=argmin)

    @staticmethod
    def run_baseline(train, test, feature_indices, n_runs, settings=None):
        """Networks trained on the full training set, evaluated on the full test set."""
        settings = settings or RunSettings()
        scaler = fit_scaler(FeatureMatrix.from_dataset(train))
        return ExperimentService._run_variant(
            VARIANT_BASELINE,
            scaled_features(train, scaler, feature_indices),
            scaled_features(test, scaler, feature_indices),
            np.arange(len(test)),
            n_runs, settings, 0,
            {'seed': settings.seed, 'train': len(train), 'test': len(test)},
        )

    @staticmethod
    def run_precdeepnn(train_partition, test_partition, feature_indices, n_runs, settings=None):
        """
        Networks trained on the mixed training records only and evaluated on
        the mixed test records. Scaling is fitted on the whole training set.
        """
        settings = settings or RunSettings()
        if len(train_partition.mixed) == 0:
            raise PipelineError(VARIANT_PREC, DomainError(
                "the mixed training subset is empty; every training record was pre-clustered."))
        train = train_partition.reconstruct()
        scaler = fit_scaler(FeatureMatrix.from_dataset(train))
        return ExperimentService._run_variant(
            VARIANT_PREC,
            scaled_features(train_partition.mixed, scaler, feature_indices),
            scaled_features(test_partition.mixed, scaler, feature_indices),
            test_partition.mixed_indices,
            n_runs, settings, test_partition.precl_fakes,
            {'seed': settings.seed, 'train': len(train), 'test': len(test_partition)},
        )

    @staticmethod
    def run_combined(prec_result, test_partition, settings=None):
        """Mixed-cluster predictions of every run with the test PrecL appended as legitimate."""
        settings = settings or RunSettings()
        truth = test_partition.reconstruct().labels
        predictions = [combine_with_precl(prediction, test_partition.legitimate_indices,
                                          len(test_partition))
                       for prediction in prec_result.predictions]
        runs = [evaluate(prediction.labels, truth) for prediction in predictions]
        prec_report = prec_result.report
        report = EvaluationReport.from_runs(
            VARIANT_COMBINED, prec_report.seeds, runs, test_partition.precl_fakes,
            prec_report.dataset, argmin_seed=prec_report.argmin_seed, config=settings.config,
        )
        log_stage_activity(VARIANT_COMBINED, 'variant evaluated', details={
            'runs': len(runs),
            'mean_accuracy': report.mean_accuracy,
            'precl_leakage': report.precl_leakage,
        })
        return VariantResult(report=report, predictions=predictions, argmin=prec_result.argmin)

    @staticmethod
    def run_full_experiment(config, out_dir=None):
        """
        Generate (or load), split, normalise, select features, pre-cluster,
        run the requested variants and optionally write every artifact.
        """
        with stage('config'):
            config.validate()
            echoed = config.describe()
        seed = config.seed

        with stage('generate'):
            if config.dataset_path:
                dataset = read_dataset_csv(config.dataset_path)
            else:
                dataset = generate_campaign(config.effective_generation())

        with stage('split'):
            train, test = split_temporal(dataset, config.train_fraction)

        with stage('normalize'):
            train_matrix = FeatureMatrix.from_dataset(train)
            scaler = fit_scaler(train_matrix)
            scaled_train = transform(scaler, train_matrix)

        with stage('select'):
            ranking = relieff(scaled_train, config.relieff_k, config.relieff_samples,
                              rng_seed=seed + RELIEFF_SEED_OFFSET, workers=config.workers)
            if config.feature_indices is not None:
                selected = list(config.feature_indices)
            elif config.selection == SELECTION_SEQUENTIAL:
                evaluator = holdout_evaluator(
                    scaled_train, params=replace(SELECTION_PARAMS,
                                                 rng_seed=seed + RELIEFF_SEED_OFFSET))
                selected = sequential_forward_select(scaled_train, ranking, config.top_k,
                                                     evaluator)
            else:
                selected = select_top_k(ranking, config.top_k)

        result = ExperimentResult(config=echoed, dataset=dataset, train=train, test=test,
                                  ranking=ranking, scaler=scaler, selected=selected)
        settings = RunSettings(seed=seed, params=config.train_params,
                               hidden_layers=tuple(config.hidden_layers),
                               threshold=config.threshold, workers=config.workers,
                               config=echoed)

        if config.needs_partition:
            with stage('sofm'):
                train_samples = scaled_train.select_columns(selected)
                sofm_map = init_map(config.sofm_rows, config.sofm_cols, len(selected),
                                    seed + SOFM_SEED_OFFSET)
                sofm_map.feature_names = train_samples.feature_names
                sofm_map = train_sofm(sofm_map, train_samples.rows,
                                      replace(config.sofm_params, rng_seed=seed + SOFM_SEED_OFFSET))
                sofm_map = label_map(sofm_map, train_samples.rows, train_samples.labels,
                                     config.purity_threshold)

            with stage('partition'):
                test_samples = scaled_features(test, scaler, selected)
                result.sofm_map = sofm_map
                result.train_partition = partition(sofm_map, train, train_samples.rows)
                result.test_partition = partition(sofm_map, test, test_samples.rows)
                result.contingency = (
                    cluster_counts(result.train_partition.assignment, train.labels,
                                   sofm_map.neuron_count),
                    cluster_counts(result.test_partition.assignment, test.labels,
                                   sofm_map.neuron_count),
                )
                log_stage_activity('partition', 'datasets partitioned', details={
                    'train_precl': len(result.train_partition.legitimate_only),
                    'test_precl': len(result.test_partition.legitimate_only),
                    'test_precl_fakes': result.test_partition.precl_fakes,
                })

        if VARIANT_BASELINE in config.variants:
            with stage(VARIANT_BASELINE):
                result.results[VARIANT_BASELINE] = ExperimentService.run_baseline(
                    train, test, selected, config.n_runs, settings)

        if config.needs_partition:
            with stage(VARIANT_PREC):
                result.results[VARIANT_PREC] = ExperimentService.run_precdeepnn(
                    result.train_partition, result.test_partition, selected, config.n_runs,
                    settings)
            if VARIANT_COMBINED in config.variants:
                with stage(VARIANT_COMBINED):
                    result.results[VARIANT_COMBINED] = ExperimentService.run_combined(
                        result.results[VARIANT_PREC], result.test_partition, settings)

        if out_dir is not None:
            with stage('artifacts'):
                result.artifacts = write_artifacts(result, out_dir, config.variants)
        return result


run_baseline = ExperimentService.run_baseline
run_precdeepnn = ExperimentService.run_precdeepnn
run_full_experiment = ExperimentService.run_full_experiment
