"""Pool-based active learning with zero-shot priors and balance-aware sampling."""

from ._kernels import active_backend
from .data import (Bundle, ClassSplit, DatasetError, LabelMatrix, Pool,
                   RelationMatrix, SourceBank, generate_synthetic, load_dataset,
                   make_class_split, save_dataset)
from .engine import (Session, SessionFinished, QueryMismatch, create_session,
                     propose_queries, run_result, run_result_json,
                     run_to_completion, step, submit_label)
from .metrics import LearningCurve, average_precision, export_curves_csv, mean_ap
from .prior import PriorSchedule, ZeroShotPrior, combined_score, mix_weights, zs_score
from .sampler import (BalanceStat, LikelihoodTracker, StrategyConfig, ZoneTag,
                      partition, select_query, update_balance, update_tracker)
from .svm import (LinearModel, SolverConfig, check_kkt, decision_value,
                  train_incremental)

__version__ = "0.1.0"
