from . import mixture
from . import rates
from . import oracle
