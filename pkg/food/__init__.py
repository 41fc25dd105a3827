from .misc import *

from .errors import FoodError
from .tensor import Tensor, no_grad, backward
from .model import FoodConfig, FoodModel, build
from .dataset import Dataset, Label
from .config import RunConfig
