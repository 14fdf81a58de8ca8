from .data import Dataset, load_idx, synthetic_dataset
from .loss import cross_entropy
from .network import Network, reduced_network, table1_network
from .train import MetricsLog, MetricsRecord, TrainProtocol, evaluate, train

__all__ = [
    "Dataset",
    "load_idx",
    "synthetic_dataset",
    "cross_entropy",
    "Network",
    "reduced_network",
    "table1_network",
    "MetricsLog",
    "MetricsRecord",
    "TrainProtocol",
    "evaluate",
    "train",
]
