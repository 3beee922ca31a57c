"""
Bundle the evaluation measures of one prediction vector into a MetricReport.
"""

import numpy as np

from metrics.concordance import c_index, c_index_subset
from metrics.roc import auc
from models.schemas import C2Group, MetricReport
from survival.losses import cancer_probability


def c2_mask(data, group: C2Group) -> np.ndarray:
    """Records the second concordance index is restricted to."""
    if C2Group(group) == C2Group.DISEASE:
        return np.asarray(data.labels) == 1
    return np.asarray(data.events) == 1


def metric_report(f_hat, data, group: C2Group = C2Group.EVENTS, with_auc: bool = False) -> MetricReport:
    """C1 over all records, C2 over ``group``, and AUC of sigmoid(f) when asked."""
    c1 = c_index(f_hat, data)
    c2 = c_index_subset(f_hat, data, c2_mask(data, group))
    auc_value = auc(cancer_probability(f_hat), data.labels).value if with_auc else None
    return MetricReport(
        auc=auc_value,
        c1=c1.value,
        c2=c2.value,
        n_pairs_c1=c1.n_pairs,
        n_pairs_c2=c2.n_pairs,
    )
