# From-scratch differentiable kernel: layers, networks, SGD, gradient audit
from .layers import Conv2d, CropIntegrate, Dense, Flatten, Layer, MaxPool2d, ReLU, SigmoidHead, layer_from_spec
from .network import Network, integrate_crop_features, preset_config
from .optim import sgd_step, step_decay
