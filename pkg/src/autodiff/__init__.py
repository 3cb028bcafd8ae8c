"""Dense reverse-mode differentiation, parameters and optimization."""

from . import ops
from .gradcheck import grad_check
from .optim import AdamState, adam_step
from .params import ParameterStore, glorot_uniform
from .tape import Tape, Tensor, as_tensor
