from packages.config.src.config import init, worker_count, ConfigService
import packages.utils.src as Utils
from packages.utils.src.errors import Errors
from packages.channel.src import channel as Channel
from packages.constellation.src import constellation as Constellation
from packages.rate_engine.src import mixture as Mixture
from packages.rate_engine.src import rates as Rates
from packages.rate_engine.src import oracle as Oracle
from packages.firefly.src import firefly as Firefly
import packages.zf_ao.src as ZfAo
import packages.schema.src as Schema
from packages.experiment.src import experiment_config as ExperimentConfig
from packages.experiment.src import experiment as Experiment
from packages.experiment.src import reports as Reports
