from ntnlink.nn.core import LayerSpec, ParamStore, Tensor
from ntnlink.nn.optim import Adam, LrSchedule, adam_step, lr_at_epoch

__all__ = ["LayerSpec", "ParamStore", "Tensor", "Adam", "LrSchedule",
           "adam_step", "lr_at_epoch"]
