from . import firefly
