from src.surrogate.gp import SurrogateModel, load_model, predict, save_model, train
from src.surrogate.training import QOI_SELECTORS, build_training_set, evaluate_qoi

__all__ = [
    "SurrogateModel",
    "load_model",
    "predict",
    "save_model",
    "train",
    "QOI_SELECTORS",
    "build_training_set",
    "evaluate_qoi",
]
