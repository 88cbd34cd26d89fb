"""Active summarization under a labeling budget.

Pick which documents to annotate by how much a model's stochastic summaries
of them disagree, filter out pathological documents whose disagreement is
near-maximal, retrain after each batch, and account for the compute cost of
the whole loop.
"""

from actisum.acquisition import AcquisitionPolicy, UncertaintyRecord, apply_threshold, select
from actisum.corpus import Document, LabeledExample, PoolState, load_corpus, write_corpus
from actisum.engine import ExperimentConfig, RunResult, StepRecord, run
from actisum.errors import ActisumError
from actisum.metrics import BleuVarScore, RougeScore, bleu, bleuvar, rouge_l, rouge_n, tokenize
from actisum.protocol import Learner, LearnerConfig, ModelHandle, StochasticBatch
from actisum.toy import ToyLearner

__version__ = "0.1.0"

__all__ = [
    "AcquisitionPolicy",
    "ActisumError",
    "BleuVarScore",
    "Document",
    "ExperimentConfig",
    "LabeledExample",
    "Learner",
    "LearnerConfig",
    "ModelHandle",
    "PoolState",
    "RougeScore",
    "RunResult",
    "StepRecord",
    "StochasticBatch",
    "ToyLearner",
    "UncertaintyRecord",
    "apply_threshold",
    "bleu",
    "bleuvar",
    "load_corpus",
    "rouge_l",
    "rouge_n",
    "run",
    "select",
    "tokenize",
    "write_corpus",
    "__version__",
]
