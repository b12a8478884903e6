from .algebra_case import *
from .moments_case import *
