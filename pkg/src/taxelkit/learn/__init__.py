"""From-scratch classifiers, training loops and evaluation."""

from .evaluation import (
    AblationError,
    EvalReport,
    KindMismatchError,
    ablation_run,
    evaluate,
    render_ablation_table,
)
from .forest import DecisionTree, RandomForest, RFConfig, train_rf
from .modelio import load_model, save_model
from .nets import (
    CNN1DConfig,
    CNN1DNet,
    DivergenceError,
    LSTMConfig,
    LSTMNet,
    MLPConfig,
    MLPNet,
    TrainedModel,
    TrainingHistory,
    train_cnn1d,
    train_lstm,
    train_mlp,
)
from .optim import AdamState, adam_step, gradient_check, init_adam

__all__ = [
    "AblationError",
    "AdamState",
    "CNN1DConfig",
    "CNN1DNet",
    "DecisionTree",
    "DivergenceError",
    "EvalReport",
    "KindMismatchError",
    "LSTMConfig",
    "LSTMNet",
    "MLPConfig",
    "MLPNet",
    "RFConfig",
    "RandomForest",
    "TrainedModel",
    "TrainingHistory",
    "ablation_run",
    "adam_step",
    "evaluate",
    "gradient_check",
    "init_adam",
    "load_model",
    "render_ablation_table",
    "save_model",
    "train_cnn1d",
    "train_lstm",
    "train_mlp",
    "train_rf",
]
