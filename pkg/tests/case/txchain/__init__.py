from .code_case import *
from .mapping_case import *
