from snap_toolkit.errors import SnapError, ShapeError, ParameterError, \
    InputError, DegenerateInputError, AlignmentError, NumericError, \
    SingularityError, ParseError, ConfigError
from snap_toolkit.numerics import matmul, new_rng, child_seed, sample_normal, \
    finite_diff_grad
from snap_toolkit.lstm import init_stack, lstm_step, lstm_forward, \
    lstm_backward
from snap_toolkit.data import load_panel, save_panel, panel_tensor, \
    window_batch, rank_normalize, cross_sectional_means, synthesize, \
    SyntheticSpec
from snap_toolkit.snap import SnapHyper, init_model, predict, predict_split, \
    loss, loss_and_gradient, adam_step, train, estimate_alpha
from snap_toolkit.stats import shapiro_wilk, ks_normality, mann_whitney_u, \
    welch_t, mispricing_test, ols_robust
from snap_toolkit.portfolio import r2_predictive, decile_long_short, sharpe, \
    arbitrage_portfolio, eval_report
from snap_toolkit.clustering import kmeans, elbow_detect, \
    monthly_cluster_sharpes, sharpe_trend
from snap_toolkit.importance import perturb_importance, importance_report
from snap_toolkit.benchmarks import fit_regularized, fit_ffn, \
    factor_regression
from snap_toolkit.checkpoint import read_checkpoint, write_checkpoint

__version__ = '1.0.0'
