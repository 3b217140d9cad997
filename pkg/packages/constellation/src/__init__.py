from . import constellation
