from datetime import datetime
import json

import numpy as np
from pytz import UTC

__all__ = ['JsonEncoder', 'utc_now']


def utc_now():
    """The current time as a timezone-aware UTC datetime."""
    return datetime.now(UTC)


class JsonEncoder(json.JSONEncoder):
    """
    Extended JSON encoder for run reports and sidecars.

    Handles numpy scalars and arrays, complex numbers (as ``[real, imag]``),
    namedtuples with a ``to_dict`` method and datetimes.
    """

    def __init__(self, use_timestamp=False, **kwargs):
        super(JsonEncoder, self).__init__(**kwargs)
        self.use_timestamp = use_timestamp

    def _default_object_handler(self, o):
        if isinstance(o, datetime):
            if o.tzinfo is None:
                # naive datetimes are UTC throughout this project
                o = o.replace(tzinfo=UTC)
            if self.use_timestamp:
                yield o.timestamp()
            else:
                yield o.astimezone(UTC).isoformat()
        elif isinstance(o, bytes):
            try:
                yield o.decode('utf-8')
            except UnicodeDecodeError:
                yield repr(o)

    def _numpy_object_handler(self, o):
        if isinstance(o, np.integer):
            yield int(o)
        elif isinstance(o, np.bool_):
            yield bool(o)
        elif isinstance(o, (complex, np.complexfloating)):
            yield [float(o.real), float(o.imag)]
        elif isinstance(o, np.floating):
            yield float(o)
        elif isinstance(o, np.ndarray):
            yield o.tolist()

    def _report_object_handler(self, o):
        if hasattr(o, 'to_dict'):
            yield o.to_dict()

    #: List of object serialization handlers
    OBJECT_HANDLERS = [_default_object_handler, _numpy_object_handler,
                       _report_object_handler]

    def default(self, o):
        for handler in self.OBJECT_HANDLERS:
            for obj in handler(self, o):
                return obj
        return super(JsonEncoder, self).default(o)
