import csv
import io
import json

from django.core.management.base import BaseCommand, CommandError

from core.exceptions import FakeGuardError, error_payload
from core.files import dump_json
from core.logging import log_system_error
from .config import CliConfig
from .serializers import OUTPUT_FORMATS


def render(summary, output_format, table=None):
    """
    Text for a command summary. csv prints ``table`` (header row first) when
    given, otherwise key,value rows; text prints one key per line.
    """
    if output_format == 'json':
        return dump_json(summary)
    if output_format == 'csv':
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        if table:
            writer.writerows(table)
        else:
            writer.writerow(('key', 'value'))
            for key, value in summary.items():
                writer.writerow((key, value if isinstance(value, (str, int, float))
                                 else json.dumps(value)))
        return buffer.getvalue()

    lines = []
    for key, value in summary.items():
        if isinstance(value, dict):
            lines.append(f"{key}:")
            lines.extend(f"  {k}: {v}" for k, v in value.items())
        elif key == 'lattice':
            lines.append(f"{key}:")
            lines.extend(f"  {row}" for row in value)
        elif isinstance(value, (list, tuple)):
            lines.append(f"{key}: {', '.join(str(v) for v in value)}")
        else:
            lines.append(f"{key}: {value}")
    return '\n'.join(lines) + '\n'


class FakeGuardCommand(BaseCommand):
    """Shared flags, configuration resolution and error reporting."""
    command_name = None

    def add_arguments(self, parser):
        parser.add_argument('--seed', type=int, help="Master seed")
        parser.add_argument('--config', dest='config_path', help="JSON configuration file")
        parser.add_argument('--out-dir', dest='out_dir', help="Output directory")
        parser.add_argument('--format', dest='output_format', choices=OUTPUT_FORMATS,
                            help="Summary format")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def run_command(self, config, options):
        """Return (summary dict, optional csv table)."""
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            config = CliConfig.resolve(self.command_name, options)
            summary, table = self.run_command(config, options)
        except (FakeGuardError, OSError) as exc:
            payload = error_payload(exc)
            raise CommandError(f"{payload['error']}: {payload['message']}") from exc
        except Exception as exc:
            log_system_error(exc, {'command': self.command_name})
            raise CommandError(f"internal_error: {exc}") from exc
        self.stdout.write(render(summary, config.output_format, table), ending='')
