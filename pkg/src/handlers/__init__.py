# Subcommand handlers
from .evaluate import cmd_eval
from .gen_data import cmd_gen_data
from .grad_check import cmd_grad_check
from .reproduce import cmd_reproduce
from .train import cmd_train
