# Evaluation measures
from .concordance import Concordance, c_index, c_index_bruteforce, c_index_subset
from .report import c2_mask, metric_report
from .roc import AucResult, auc, auc_bruteforce
