from .model import (
    HgtConfig, HgtParameters, ModelError, Normalizer, batch_graphs, forward, init_params,
    loss_rmse, mse_and_grads, predict,
)
from .train import TrainingDiverged, TrainLog, dataset_rmse, train

__all__ = [
    "HgtConfig", "HgtParameters", "ModelError", "Normalizer", "batch_graphs", "forward",
    "init_params", "loss_rmse", "mse_and_grads", "predict", "TrainingDiverged", "TrainLog",
    "dataset_rmse", "train",
]
