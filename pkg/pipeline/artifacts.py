"""
Writers for every file a full experiment emits. Each file is written whole
and atomically; the returned paths keep a fixed order.
"""

from pathlib import Path

from core.files import atomic_write_json, atomic_write_text
from deepnn.serializers import network_to_payload
from sofm.serializers import contingency_to_csv, map_to_payload
from taskgen.serializers import write_dataset_csv
from .metrics import paired_differences
from .models import VARIANT_BASELINE, VARIANT_COMBINED, VARIANT_KEYS, VARIANT_PREC
from .plotting import accuracy_chart

DATASET_FILE = 'dataset.csv'
RANKING_FILE = 'ranking.json'
SOFM_FILE = 'sofm.json'
CONTINGENCY_FILE = 'contingency.csv'
PARTITION_SUMMARY_FILE = 'partition_summary.json'
COMPARISON_FILE = 'comparison.json'
PLOT_FILE = 'accuracy.svg'

VARIANT_FILE_KEYS = {variant: key for key, variant in VARIANT_KEYS.items()}


def report_file(variant):
    return f"report_{VARIANT_FILE_KEYS[variant]}.json"


def network_file(variant):
    return f"network_{VARIANT_FILE_KEYS[variant]}.json"


def partition_summary(result):
    """Sizes and fake shares of both partitions."""
    def describe(partition, source):
        return {
            'total': len(source),
            'precl': len(partition.legitimate_only),
            'precl_fake': partition.precl_fakes,
            'mixed': len(partition.mixed),
            'mixed_legitimate': partition.mixed.legitimate_total,
            'mixed_fake': partition.mixed.fake_total,
            'fake_share': partition.fake_shares(source),
        }

    return {
        'legitimate_only_neurons': [i + 1 for i in result.sofm_map.legitimate_only_neurons()],
        'train': describe(result.train_partition, result.train),
        'test': describe(result.test_partition, result.test),
    }


def comparison(result):
    """Paired per-seed accuracy differences of the combined variant."""
    reports = result.reports
    combined = reports[VARIANT_COMBINED]
    payload = {
        'mean_accuracy': {variant: report.mean_accuracy for variant, report in reports.items()},
    }
    if VARIANT_BASELINE in reports:
        payload['combined_minus_baseline'] = paired_differences(combined, reports[VARIANT_BASELINE])
    if VARIANT_PREC in reports:
        payload['combined_minus_prec'] = paired_differences(combined, reports[VARIANT_PREC])
    return payload


def input_features(result):
    names = [result.ranking.feature_names[i] for i in result.selected]
    return {
        'names': names,
        'minimums': [result.scaler.minimums[i] for i in result.selected],
        'maximums': [result.scaler.maximums[i] for i in result.selected],
    }


def write_artifacts(result, out_dir, variants):
    """Write the artifacts of the requested variants; returns the written paths."""
    out = Path(out_dir)
    written = [write_dataset_csv(result.dataset, out / DATASET_FILE)]

    ranking = result.ranking.as_report(result.selected)
    written.append(atomic_write_json(out / RANKING_FILE, ranking))

    if result.sofm_map is not None:
        written.append(atomic_write_json(out / SOFM_FILE, map_to_payload(result.sofm_map)))
        train_counts, test_counts = result.contingency
        written.append(atomic_write_text(
            out / CONTINGENCY_FILE,
            contingency_to_csv(result.sofm_map, train_counts, test_counts)))
        written.append(atomic_write_json(out / PARTITION_SUMMARY_FILE, partition_summary(result)))

    reported = [variant for variant in (VARIANT_BASELINE, VARIANT_PREC, VARIANT_COMBINED)
                if variant in variants and variant in result.results]
    for variant in reported:
        variant_result = result.results[variant]
        written.append(atomic_write_json(out / report_file(variant),
                                         variant_result.report.as_payload()))
        if variant_result.argmin is not None:
            written.append(atomic_write_json(
                out / network_file(variant),
                network_to_payload(variant_result.argmin.network, input_features(result))))

    if VARIANT_COMBINED in reported and len(reported) > 1:
        written.append(atomic_write_json(out / COMPARISON_FILE, comparison(result)))

    written.append(atomic_write_text(
        out / PLOT_FILE,
        accuracy_chart(result.results[variant].report for variant in reported)))
    return [str(path) for path in written]
