from .summary_case import *
