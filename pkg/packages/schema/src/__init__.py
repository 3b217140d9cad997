from . import schema
from . import schema_types
