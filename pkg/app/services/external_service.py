# app/services/external_service.py
import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import normalized_mutual_info_score
from sklearn.metrics.cluster import contingency_matrix

from app.models.stats import ContingencyTable
from app.models.trial import Partition
from app.utils.validators import validate_same_length


class ExternalService:
    @staticmethod
    def contingency(a: Partition, b: Partition) -> ContingencyTable:
        validate_same_length(a.labels, b.labels)
        counts = contingency_matrix(a.labels, b.labels)
        return ContingencyTable(counts=counts, n=a.n)

    @staticmethod
    def nmi(a: Partition, b: Partition) -> float:
        """2 I(A;B) / (H(A) + H(B)); 1 when both partitions are a single cluster"""
        validate_same_length(a.labels, b.labels)
        if a.k == 1 and b.k == 1:
            return 1.0
        if a.k == 1 or b.k == 1:
            return 0.0
        value = normalized_mutual_info_score(a.labels, b.labels, average_method="arithmetic")
        return float(np.clip(value, 0.0, 1.0))

    @staticmethod
    def clustering_accuracy(truth: Partition, pred: Partition) -> float:
        """Best one-to-one label matching by rectangular assignment on the contingency table"""
        table = ExternalService.contingency(truth, pred)
        rows, cols = linear_sum_assignment(table.counts, maximize=True)
        return float(table.counts[rows, cols].sum() / table.n)
