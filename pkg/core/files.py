"""
Whole-file atomic writers used for every emitted artifact.
"""

import json
import os
import tempfile
from pathlib import Path


def atomic_write_text(path, text):
    """Write text to path through a temporary sibling file and a rename."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    handle, temp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        with os.fdopen(handle, 'w', encoding='utf-8', newline='\n') as stream:
            stream.write(text)
        os.replace(temp_name, target)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    return target


def dump_json(payload):
    """Canonical JSON text for artifacts: two-space indent, trailing newline."""
    return json.dumps(payload, indent=2, ensure_ascii=True) + '\n'


def atomic_write_json(path, payload):
    return atomic_write_text(path, dump_json(payload))
