import logging
import os
import tempfile

import numpy as np
from django.test import SimpleTestCase

from .exceptions import (
    ConfigurationError, DomainError, PipelineError, TrainingError, error_payload,
)
from .files import atomic_write_json, atomic_write_text, dump_json
from .logging import StructuredFormatter
from .validators import (
    ConfigValidationMixin, require_binary_labels, require_both_classes, require_width,
)


class ErrorPayloadTests(SimpleTestCase):
    """Tests for the uniform error payload."""

    def test_known_error_keeps_code_and_details(self):
        payload = error_payload(ConfigurationError("bad seed", details={'field': 'seed'}))
        self.assertEqual(payload['error'], 'configuration_error')
        self.assertEqual(payload['details'], {'field': 'seed'})

    def test_pipeline_error_carries_stage_and_cause(self):
        cause = TrainingError("loss diverged", epoch=3, learning_rate=0.5)
        payload = error_payload(PipelineError('PrecDeepNN', cause))
        self.assertEqual(payload['error'], 'pipeline_error')
        self.assertTrue(payload['message'].startswith('[PrecDeepNN]'))
        self.assertEqual(payload['details']['stage'], 'PrecDeepNN')
        self.assertEqual(payload['details']['cause'], 'training_error')
        self.assertEqual(payload['details']['epoch'], 3)

    def test_os_error_names_path(self):
        payload = error_payload(FileNotFoundError(2, 'No such file', '/missing.csv'))
        self.assertEqual(payload['error'], 'io_error')
        self.assertEqual(payload['details'], {'path': '/missing.csv'})

    def test_unexpected_error_is_internal(self):
        with self.assertLogs('fakeguard.core', level='ERROR'):
            payload = error_payload(RuntimeError("boom"))
        self.assertEqual(payload['error'], 'internal_error')


class AtomicWriteTests(SimpleTestCase):

    def test_json_has_trailing_newline_and_no_leftovers(self):
        with tempfile.TemporaryDirectory() as directory:
            path = atomic_write_json(os.path.join(directory, 'nested', 'a.json'), {'b': 1})
            self.assertEqual(path.read_text(encoding='utf-8'), '{\n  "b": 1\n}\n')
            self.assertEqual(os.listdir(path.parent), ['a.json'])

    def test_overwrites_whole_file(self):
        with tempfile.TemporaryDirectory() as directory:
            target = os.path.join(directory, 'x.txt')
            atomic_write_text(target, 'a much longer first version\n')
            atomic_write_text(target, 'short\n')
            with open(target, encoding='utf-8') as stream:
                self.assertEqual(stream.read(), 'short\n')

    def test_dump_json_is_stable(self):
        self.assertEqual(dump_json({'a': [1, 2]}), dump_json({'a': [1, 2]}))


class StructuredFormatterTests(SimpleTestCase):

    def test_extra_fields_sorted(self):
        formatter = StructuredFormatter('%(message)s')
        record = logging.LogRecord('fakeguard', logging.INFO, __file__, 1, "Stage sofm: done",
                                   (), None)
        record.stage = 'sofm'
        record.action = 'done'
        self.assertEqual(formatter.format(record), "Stage sofm: done | action=done stage=sofm")

    def test_plain_record_unchanged(self):
        formatter = StructuredFormatter('%(message)s')
        record = logging.LogRecord('fakeguard', logging.INFO, __file__, 1, "plain", (), None)
        self.assertEqual(formatter.format(record), "plain")


class ValidatorTests(SimpleTestCase):

    def setUp(self):
        self.mixin = ConfigValidationMixin()

    def test_interval_bounds(self):
        self.assertEqual(self.mixin.validate_interval(1.0, 0.5, 1.0, 'purity', low_open=True), 1.0)
        with self.assertRaises(ConfigurationError) as ctx:
            self.mixin.validate_interval(0.5, 0.5, 1.0, 'purity', low_open=True)
        self.assertEqual(ctx.exception.details, {'field': 'purity'})

    def test_missing_interval_value(self):
        with self.assertRaises(ConfigurationError) as ctx:
            self.mixin.validate_interval(None, 0.5, 1.0, 'purity', low_open=True)
        self.assertEqual(ctx.exception.details, {'field': 'purity'})

    def test_open_fraction(self):
        for value in (0, 1, -0.1):
            with self.assertRaises(ConfigurationError):
                self.mixin.validate_open_fraction(value, 'fake_fraction')

    def test_seed(self):
        self.assertEqual(self.mixin.validate_seed(2 ** 64 - 1), 2 ** 64 - 1)
        with self.assertRaises(ConfigurationError):
            self.mixin.validate_seed(-1)

    def test_labels(self):
        np.testing.assert_array_equal(require_binary_labels([1, 0, 1]), [1, 0, 1])
        with self.assertRaises(DomainError):
            require_binary_labels([1, 2])
        with self.assertRaises(DomainError):
            require_both_classes([1, 1, 1])

    def test_width(self):
        self.assertEqual(require_width(np.zeros((3, 4)), 4).shape, (3, 4))
        self.assertEqual(require_width([], 4).shape, (0, 4))
        with self.assertRaises(DomainError):
            require_width(np.zeros((3, 2)), 4)
