import json
from pathlib import Path

from cli.base import FakeGuardCommand
from cli.serializers import first_error
from core.exceptions import ArtifactParseError
from core.files import atomic_write_text, dump_json
from deepnn.serializers import NetworkSerializer, network_to_payload
from features.serializers import FeatureRankingSerializer
from pipeline.serializers import EvaluationReportSerializer
from sofm.serializers import SofmMapSerializer, map_to_payload
from taskgen.serializers import dataset_to_csv, parse_dataset_csv

KIND_DATASET = 'dataset'
KIND_REPORT = 'report'
KIND_NETWORK = 'network'
KIND_SOFM = 'sofm'
KIND_RANKING = 'ranking'


def detect_kind(payload, path):
    if 'variant' in payload and 'runs' in payload:
        return KIND_REPORT
    if 'layer_sizes' in payload:
        return KIND_NETWORK
    if 'rows' in payload and 'cols' in payload:
        return KIND_SOFM
    if 'order' in payload and 'weights' in payload:
        return KIND_RANKING
    raise ArtifactParseError(f"{path}: not a report, network, map or ranking file.",
                             field='kind', path=path)


def validated(serializer_class, payload, path):
    serializer = serializer_class(data=payload)
    if not serializer.is_valid():
        field, message = first_error(serializer.errors)
        raise ArtifactParseError(f"{path}: {field}: {message}", field=field, path=path)
    return serializer


def inspect_dataset(text, path):
    dataset = parse_dataset_csv(text, source=str(path))
    summary = {
        'kind': KIND_DATASET,
        'records': len(dataset),
        'legitimate': dataset.legitimate_total,
        'fake': dataset.fake_total,
        'days': {str(day): count for day, count in dataset.day_histogram().items()},
    }
    return summary, dataset_to_csv(dataset)


def inspect_report(payload, path):
    report = validated(EvaluationReportSerializer, payload, path).to_report()
    summary = {
        'kind': KIND_REPORT,
        'variant': report.variant,
        'runs': len(report.runs),
        'seeds': list(report.seeds),
        'mean_accuracy': report.mean_accuracy,
        'std_accuracy': report.std_accuracy,
        'precl_leakage': report.precl_leakage,
        'argmin_seed': report.argmin_seed,
    }
    return summary, dump_json(report.as_payload())


def inspect_network(payload, path):
    serializer = validated(NetworkSerializer, payload, path)
    network = serializer.to_network()
    features = serializer.validated_data.get('input')
    summary = {
        'kind': KIND_NETWORK,
        'layer_sizes': list(network.layer_sizes),
        'parameters': network.parameter_count,
        'seed': network.rng_seed,
        'inputs': list(features['names']) if features else [],
    }
    return summary, dump_json(network_to_payload(network, features))


def inspect_sofm(payload, path):
    sofm_map = validated(SofmMapSerializer, payload, path).to_map()
    summary = {
        'kind': KIND_SOFM,
        'grid': f"{sofm_map.rows}x{sofm_map.cols}",
        'features': list(sofm_map.feature_names),
        'trained': sofm_map.trained,
        'seed': sofm_map.rng_seed,
        'cluster_marks': list(sofm_map.cluster_marks or ()),
        'legitimate_only_neurons': [i + 1 for i in sofm_map.legitimate_only_neurons()],
        'lattice': sofm_map.mark_lattice(),
    }
    return summary, dump_json(map_to_payload(sofm_map))


def inspect_ranking(payload, path):
    serializer = validated(FeatureRankingSerializer, payload, path)
    ranking = serializer.to_ranking()
    selected = serializer.validated_data['selected']
    names = ranking.feature_names or tuple(str(i) for i in range(len(ranking.weights)))
    summary = {
        'kind': KIND_RANKING,
        'order': [names[i] for i in ranking.order],
        'selected': [names[i] for i in selected],
        'weights': {names[i]: float(ranking.weights[i]) for i in ranking.order},
    }
    return summary, dump_json(ranking.as_report(selected))


INSPECTORS = {
    KIND_REPORT: inspect_report,
    KIND_NETWORK: inspect_network,
    KIND_SOFM: inspect_sofm,
    KIND_RANKING: inspect_ranking,
}


def inspect_file(path):
    """Summary and canonical re-serialization of a saved artifact."""
    text = Path(path).read_text(encoding='utf-8')
    if not text.strip():
        raise ArtifactParseError(f"{path} is empty.", field='content', path=path)
    if not text.lstrip().startswith(('{', '[')):
        return inspect_dataset(text, path)
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArtifactParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}.",
                                 field='content', path=path) from exc
    if not isinstance(payload, dict):
        raise ArtifactParseError(f"{path}: expected a JSON object.", field='content', path=path)
    return INSPECTORS[detect_kind(payload, path)](payload, path)


class Command(FakeGuardCommand):
    help = "Validate and summarise a saved dataset, report, network, map or ranking"
    command_name = 'inspect'

    def add_command_arguments(self, parser):
        parser.add_argument('path', help="Artifact to inspect")
        parser.add_argument('--reserialize', help="Write the canonical form of the file here")

    def run_command(self, config, options):
        summary, canonical = inspect_file(options['path'])
        if options.get('reserialize'):
            atomic_write_text(options['reserialize'], canonical)
            summary['reserialized'] = options['reserialize']
        return summary, None
