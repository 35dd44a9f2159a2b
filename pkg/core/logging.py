import logging

# Get logger for the experiment tooling
logger = logging.getLogger('fakeguard')

_RESERVED = set(logging.LogRecord('', 0, '', 0, '', (), None).__dict__) | {'message', 'asctime'}


class StructuredFormatter(logging.Formatter):
    """Append the ``extra`` fields of a record as sorted key=value pairs."""

    def format(self, record):
        base = super().format(record)
        fields = {
            key: value for key, value in record.__dict__.items()
            if key not in _RESERVED and not key.startswith('_')
        }
        if not fields:
            return base
        pairs = ' '.join(f"{key}={fields[key]}" for key in sorted(fields))
        return f"{base} | {pairs}"


def log_stage_activity(stage, action, details=None):
    """Log experiment stage activities."""
    extra_data = {
        'stage': stage,
        'action': action,
    }

    if details:
        extra_data['details'] = details

    logger.info(
        f"Stage {stage}: {action}",
        extra=extra_data
    )


def log_training_run(variant, seed, trace, details=None):
    """Log the outcome of one network training run."""
    extra_data = {
        'variant': variant,
        'seed': seed,
        'epochs_run': len(trace.losses),
        'final_loss': trace.losses[-1] if trace.losses else None,
        'stopped_early': trace.stopped_early,
    }

    if details:
        extra_data['details'] = details

    logger.info(
        f"Training run {variant}: seed {seed}",
        extra=extra_data
    )


def log_system_error(error, context=None):
    """Log system errors with context."""
    extra_data = {'error_type': type(error).__name__}

    if context:
        extra_data.update(context)

    logger.error(
        f"System error: {str(error)}",
        extra=extra_data,
        exc_info=True
    )
