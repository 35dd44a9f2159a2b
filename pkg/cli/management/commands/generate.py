from pathlib import Path

from cli.base import FakeGuardCommand
from taskgen.generator import generate_campaign
from taskgen.serializers import write_dataset_csv

DATASET_FILE = 'dataset.csv'


class Command(FakeGuardCommand):
    help = "Generate a synthetic crowdsensing campaign and write it as CSV"
    command_name = 'generate'

    def add_command_arguments(self, parser):
        parser.add_argument('--total', type=int, help="Number of tasks")
        parser.add_argument('--fake-fraction', dest='fake_fraction', type=float,
                            help="Share of fake tasks")
        parser.add_argument('--days', type=int, help="Campaign length in days")
        parser.add_argument('--out', help="CSV path (default: <out-dir>/dataset.csv)")

    def run_command(self, config, options):
        # same zones and seeds as a `run` with the same flags
        generation = config.experiment_config().effective_generation()
        dataset = generate_campaign(generation)
        path = Path(options.get('out') or Path(config.out_dir) / DATASET_FILE)
        write_dataset_csv(dataset, path)

        days = dataset.day_histogram()
        summary = {
            'path': str(path),
            'total': len(dataset),
            'legitimate': dataset.legitimate_total,
            'fake': dataset.fake_total,
            'seed': generation.rng_seed,
            'days': {str(day): count for day, count in days.items()},
        }
        table = [('day', 'tasks')] + [(day, count) for day, count in days.items()]
        return summary, table
