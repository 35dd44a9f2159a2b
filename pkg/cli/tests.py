import json
import os
import shutil
import tempfile
import xml.etree.ElementTree as ET
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from core.exceptions import ConfigurationError
from .config import CliConfig, parse_feature_list, parse_grid

SVG_NS = '{http://www.w3.org/2000/svg}'

SMALL_RUN = {
    'generation': {'total_tasks': 300, 'fake_fraction': 0.2},
    'features': {'relieff_k': 3, 'relieff_samples': 60},
    'sofm': {'epochs': 5},
    'training': {'epochs': 5, 'batch_size': 16, 'patience': 5, 'hidden_layers': [4]},
}


def write_config(directory, payload):
    path = Path(directory) / 'config.json'
    path.write_text(json.dumps(payload), encoding='utf-8')
    return str(path)


def run_command(*args, **options):
    out = StringIO()
    call_command(*args, stdout=out, **options)
    return out.getvalue()


class TempDirMixin:

    def setUp(self):
        super().setUp()
        self.tmp = tempfile.mkdtemp(prefix='fakeguard-cli-')
        self.addCleanup(shutil.rmtree, self.tmp, ignore_errors=True)


class CliConfigTests(TempDirMixin, SimpleTestCase):
    """Tests for configuration layering."""

    def test_settings_defaults(self):
        config = CliConfig.resolve('run', {})
        self.assertEqual(config.runs, 10)
        self.assertEqual(config.sections['sofm']['rows'], 4)
        self.assertEqual(config.output_format, 'text')
        self.assertEqual(len(config.variants), 3)

    def test_flag_beats_file_beats_settings(self):
        path = write_config(self.tmp, {'seed': 5, 'runs': 3, 'sofm': {'rows': 3}})
        from_file = CliConfig.resolve('run', {'config_path': path})
        self.assertEqual((from_file.seed, from_file.runs), (5, 3))
        self.assertEqual(from_file.sections['sofm']['rows'], 3)
        self.assertEqual(from_file.sections['sofm']['cols'], 4)

        flagged = CliConfig.resolve('run', {'config_path': path, 'seed': 9, 'sofm_grid': '2x5'})
        self.assertEqual((flagged.seed, flagged.runs), (9, 3))
        self.assertEqual((flagged.sections['sofm']['rows'], flagged.sections['sofm']['cols']),
                         (2, 5))

    def test_unknown_section_is_named(self):
        path = write_config(self.tmp, {'sofm': {'bogus': 1}})
        with self.assertRaises(ConfigurationError) as ctx:
            CliConfig.resolve('run', {'config_path': path})
        self.assertEqual(ctx.exception.details['field'], 'sofm.bogus')

    def test_invalid_value_is_named(self):
        path = write_config(self.tmp, {'training': {'batch_size': 0}})
        with self.assertRaises(ConfigurationError) as ctx:
            CliConfig.resolve('run', {'config_path': path})
        self.assertEqual(ctx.exception.details['field'], 'training.batch_size')

    def test_experiment_config(self):
        config = CliConfig.resolve('run', {'features': '4,5,8,6', 'variant': 'baseline',
                                           'seed': 3})
        experiment = config.experiment_config()
        self.assertEqual(experiment.feature_indices, (4, 5, 8, 6))
        self.assertEqual(experiment.variants, ('DeepNN',))
        self.assertEqual(experiment.generation.rng_seed, 3)
        self.assertEqual(experiment.hidden_layers, (15, 15, 15, 15))

    def test_parsers(self):
        self.assertEqual(parse_grid('4x4'), (4, 4))
        self.assertEqual(parse_grid('3X5'), (3, 5))
        self.assertEqual(parse_feature_list('4, 5,8'), [4, 5, 8])
        with self.assertRaises(ConfigurationError):
            parse_grid('16')
        with self.assertRaises(ConfigurationError):
            parse_feature_list('a,b')


class GenerateCommandTests(TempDirMixin, SimpleTestCase):
    """Tests for the generate command."""

    def test_writes_requested_campaign(self):
        path = os.path.join(self.tmp, 'campaign.csv')
        output = run_command('generate', total=500, fake_fraction=0.124, seed=7, out=path,
                             output_format='json')
        summary = json.loads(output)
        self.assertEqual(summary['total'], 500)
        self.assertEqual(summary['fake'], 62)
        self.assertEqual(summary['legitimate'], 438)
        self.assertEqual(sum(summary['days'].values()), 500)
        lines = Path(path).read_text(encoding='utf-8').splitlines()
        self.assertEqual(len(lines), 501)
        self.assertTrue(lines[0].startswith('id,day,hour'))

    def test_rerun_is_byte_identical(self):
        first = os.path.join(self.tmp, 'a.csv')
        second = os.path.join(self.tmp, 'b.csv')
        run_command('generate', total=300, seed=4, out=first)
        run_command('generate', total=300, seed=4, out=second)
        self.assertEqual(Path(first).read_bytes(), Path(second).read_bytes())

    def test_zero_total_fails(self):
        with self.assertRaises(CommandError) as ctx:
            run_command('generate', total=0, out=os.path.join(self.tmp, 'x.csv'))
        self.assertIn('configuration_error', str(ctx.exception))
        self.assertFalse(os.path.exists(os.path.join(self.tmp, 'x.csv')))

    def test_csv_summary_is_day_histogram(self):
        output = run_command('generate', total=300, seed=4, output_format='csv',
                             out=os.path.join(self.tmp, 'c.csv'))
        rows = output.splitlines()
        self.assertEqual(rows[0], 'day,tasks')
        self.assertEqual(sum(int(row.split(',')[1]) for row in rows[1:]), 300)

    def test_text_summary(self):
        output = run_command('generate', total=300, seed=4, out=os.path.join(self.tmp, 't.csv'))
        self.assertIn('total: 300', output)
        self.assertIn('fake: 37', output)


class RunCommandTests(SimpleTestCase):
    """Tests for the run and inspect commands on one small experiment."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = tempfile.mkdtemp(prefix='fakeguard-run-')
        cls.out_dir = os.path.join(cls.tmp, 'out')
        cls.config_path = write_config(cls.tmp, SMALL_RUN)
        cls.summary = json.loads(run_command(
            'run', config_path=cls.config_path, out_dir=cls.out_dir, runs=2, sofm_grid='2x2',
            seed=5, output_format='json'))

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.tmp, ignore_errors=True)
        super().tearDownClass()

    def artifact(self, name):
        return os.path.join(self.out_dir, name)

    def test_emits_reports_contingency_and_plot(self):
        for name in ('report_baseline.json', 'report_prec.json', 'report_combined.json',
                     'contingency.csv', 'accuracy.svg', 'sofm.json', 'network_baseline.json',
                     'comparison.json', 'partition_summary.json', 'ranking.json'):
            self.assertTrue(os.path.exists(self.artifact(name)), name)
        self.assertEqual(set(self.summary['variants']), {'DeepNN', 'PrecDeepNN', 'PrecDeepNNPrecL'})

    def test_plot_matches_reports(self):
        root = ET.parse(self.artifact('accuracy.svg')).getroot()
        means = {}
        for group in root.iter(f'{SVG_NS}g'):
            rect = group.find(f'{SVG_NS}rect')
            if rect is not None and rect.get('class') == 'bar':
                means[group.get('data-variant')] = float(rect.get('data-mean'))
        for key, variant in (('baseline', 'DeepNN'), ('prec', 'PrecDeepNN'),
                             ('combined', 'PrecDeepNNPrecL')):
            report = json.loads(Path(self.artifact(f'report_{key}.json')).read_text())
            self.assertEqual(means[variant], report['mean_accuracy'])

    def test_contingency_lists_every_neuron(self):
        rows = Path(self.artifact('contingency.csv')).read_text().splitlines()
        self.assertEqual(rows[0], 'cluster,mark,train_legitimate,train_fake,test_legitimate,test_fake')
        self.assertEqual([row.split(',')[0] for row in rows[1:]],
                         ['1', '2', '3', '4', 'precl', 'mixed'])

    def test_reports_echo_config(self):
        report = json.loads(Path(self.artifact('report_combined.json')).read_text())
        self.assertEqual(report['config']['seed'], 5)
        self.assertEqual(report['config']['sofm_grid'], [2, 2])
        self.assertEqual([run['seed'] for run in report['runs']], [15, 16])

    def test_rerun_writes_identical_bytes(self):
        out_dir = os.path.join(self.tmp, 'again')
        run_command('run', config_path=self.config_path, out_dir=out_dir, runs=2,
                    sofm_grid='2x2', seed=5, output_format='json')
        for name in ('dataset.csv', 'report_baseline.json', 'report_prec.json',
                     'report_combined.json', 'contingency.csv', 'accuracy.svg'):
            self.assertEqual(Path(out_dir, name).read_bytes(),
                             Path(self.artifact(name)).read_bytes(), name)

    def test_baseline_only(self):
        out_dir = os.path.join(self.tmp, 'baseline')
        run_command('run', config_path=self.config_path, out_dir=out_dir, runs=1, seed=5,
                    variant='baseline')
        names = set(os.listdir(out_dir))
        self.assertIn('report_baseline.json', names)
        self.assertNotIn('report_prec.json', names)
        self.assertNotIn('report_combined.json', names)

    def test_loads_existing_dataset(self):
        out_dir = os.path.join(self.tmp, 'loaded')
        output = json.loads(run_command(
            'run', config_path=self.config_path, out_dir=out_dir, runs=2, sofm_grid='2x2',
            seed=5, output_format='json', dataset=self.artifact('dataset.csv')))
        self.assertEqual(output['variants'], self.summary['variants'])

    def test_inspect_sofm_lattice(self):
        summary = json.loads(run_command('inspect', self.artifact('sofm.json'),
                                         output_format='json'))
        self.assertEqual(summary['kind'], 'sofm')
        self.assertEqual(len(summary['cluster_marks']), 4)
        self.assertEqual(len(summary['lattice']), 2)
        self.assertTrue(all(set(row) <= {'L', 'M'} for row in summary['lattice']))

    def test_inspect_reserializes_byte_identical(self):
        for name in ('sofm.json', 'report_prec.json', 'network_combined.json', 'ranking.json',
                     'dataset.csv'):
            target = os.path.join(self.tmp, f'copy-{name}')
            run_command('inspect', self.artifact(name), reserialize=target)
            self.assertEqual(Path(target).read_bytes(), Path(self.artifact(name)).read_bytes(),
                             name)

    def test_inspect_report_text(self):
        output = run_command('inspect', self.artifact('report_baseline.json'))
        self.assertIn('kind: report', output)
        self.assertIn('variant: DeepNN', output)
        self.assertIn('seeds: 15, 16', output)


class InspectFailureTests(TempDirMixin, SimpleTestCase):
    """Tests for inspect on unusable files."""

    def test_empty_file(self):
        path = os.path.join(self.tmp, 'empty.json')
        Path(path).write_text('')
        with self.assertRaises(CommandError) as ctx:
            run_command('inspect', path)
        self.assertIn('parse_error', str(ctx.exception))

    def test_missing_field_is_named(self):
        path = os.path.join(self.tmp, 'map.json')
        Path(path).write_text(json.dumps({'rows': 1, 'cols': 2, 'feature_names': [],
                                          'weights': [[0.1], [0.2]], 'cluster_marks': None,
                                          'params': None, 'seed': 0}))
        with self.assertRaises(CommandError) as ctx:
            run_command('inspect', path)
        self.assertIn('trained', str(ctx.exception))

    def test_unknown_json_kind(self):
        path = os.path.join(self.tmp, 'other.json')
        Path(path).write_text('{"hello": 1}')
        with self.assertRaises(CommandError) as ctx:
            run_command('inspect', path)
        self.assertIn('parse_error', str(ctx.exception))

    def test_bad_csv_row(self):
        path = os.path.join(self.tmp, 'bad.csv')
        Path(path).write_text('id,day\n1,1\n')
        with self.assertRaises(CommandError):
            run_command('inspect', path)
