from . import data_utils
from . import errors
