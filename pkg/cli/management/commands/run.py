from cli.base import FakeGuardCommand
from cli.serializers import VARIANT_ALL
from pipeline.models import SELECTION_CHOICES, VARIANT_KEYS
from pipeline.services import ExperimentService


class Command(FakeGuardCommand):
    help = "Run the full fake task detection experiment and write every artifact"
    command_name = 'run'

    def add_command_arguments(self, parser):
        parser.add_argument('--variant', choices=(VARIANT_ALL, *VARIANT_KEYS),
                            help="Variant to report (default: all)")
        parser.add_argument('--features', help="Comma-separated candidate feature indices")
        parser.add_argument('--runs', type=int, help="Training runs per variant")
        parser.add_argument('--sofm-grid', dest='sofm_grid', help="Map size as RxC")
        parser.add_argument('--selection', choices=SELECTION_CHOICES,
                            help="Feature selection mode")
        parser.add_argument('--dataset', help="Existing campaign CSV instead of generating one")
        parser.add_argument('--workers', type=int, help="Parallel training runs")
        parser.add_argument('--total', type=int, help="Number of generated tasks")
        parser.add_argument('--fake-fraction', dest='fake_fraction', type=float,
                            help="Share of generated fake tasks")

    def run_command(self, config, options):
        result = ExperimentService.run_full_experiment(config.experiment_config(),
                                                       config.out_dir)
        reports = {variant: report for variant, report in result.reports.items()
                   if variant in config.variants}

        summary = {
            'out_dir': str(config.out_dir),
            'selected_features': [result.ranking.feature_names[i] for i in result.selected],
            'variants': {
                variant: (f"mean={report.mean_accuracy:.4f} std={report.std_accuracy:.4f} "
                          f"leakage={report.precl_leakage} argmin_seed={report.argmin_seed}")
                for variant, report in reports.items()
            },
            'artifacts': result.artifacts,
        }
        if config.output_format == 'json':
            summary['variants'] = {
                variant: {
                    'mean_accuracy': report.mean_accuracy,
                    'std_accuracy': report.std_accuracy,
                    'precl_leakage': report.precl_leakage,
                    'argmin_seed': report.argmin_seed,
                }
                for variant, report in reports.items()
            }
        table = [('variant', 'mean_accuracy', 'std_accuracy', 'precl_leakage', 'argmin_seed')]
        table.extend((variant, report.mean_accuracy, report.std_accuracy, report.precl_leakage,
                      report.argmin_seed) for variant, report in reports.items())
        return summary, table
