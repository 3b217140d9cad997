from . import basis
from . import pmf_solver
from . import ccp
from . import ao
