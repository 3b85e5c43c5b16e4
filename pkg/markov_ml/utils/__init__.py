from .fileutils import *
from .json_encoder import *
from .parser import *
