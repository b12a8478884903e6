from .config_case import *
