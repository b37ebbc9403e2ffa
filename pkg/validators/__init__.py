"""Wire-format validators and the data error hierarchy."""

from .schema_validators import *  # noqa: F401,F403
from .schema_validators import __all__  # noqa: F401
