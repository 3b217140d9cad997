from .service import ConfigService
from .config import init, worker_count
