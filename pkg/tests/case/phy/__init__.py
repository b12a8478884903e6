from .pilot_case import *
