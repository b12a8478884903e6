from .gmsg import *
from .phy import *
from .txchain import *
from .receiver import *
from .config import *
from .harness import *
