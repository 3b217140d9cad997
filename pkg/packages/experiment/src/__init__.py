from . import experiment_config
from . import reports
from . import experiment
