from . import model
from . import decay