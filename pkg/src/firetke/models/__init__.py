from .base import (DEFAULT_KINDS, DISPLAY_NAMES, REGISTRY, ModelConfig, TrainedModel,
                   fit_model, load_model, predict_batch, save_model)
from .boosting import (GradientBoostingRegressor, RegularizedBoostingRegressor, gb_fit,
                       xgb_fit)
from .forest import RandomForestRegressor, rf_fit
from .gpr import (ElasticNetGPRegressor, GaussianProcessRegressor, cholesky_with_jitter,
                  elastic_net_weights,
                  gpr_fit, gpr_regularized_fit, l1_kill_threshold, sq_exp_kernel)
from .knn import KNNRegressor, knn_fit_predict
from .mlp import MLPRegressor, mlp_fit
from .tree import Tree, grow_tree, tree_fit

__all__ = [
    "DEFAULT_KINDS", "DISPLAY_NAMES", "REGISTRY", "ModelConfig", "TrainedModel", "fit_model",
    "load_model", "predict_batch", "save_model", "GradientBoostingRegressor",
    "RegularizedBoostingRegressor", "gb_fit", "xgb_fit", "RandomForestRegressor", "rf_fit",
    "ElasticNetGPRegressor", "GaussianProcessRegressor", "cholesky_with_jitter",
    "elastic_net_weights", "gpr_fit",
    "gpr_regularized_fit", "l1_kill_threshold", "sq_exp_kernel", "KNNRegressor",
    "knn_fit_predict", "MLPRegressor", "mlp_fit", "Tree", "grow_tree", "tree_fit",
]
