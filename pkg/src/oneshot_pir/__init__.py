"""One-shot, refined and lifted private information retrieval over prime fields."""

from .audit import correctness_suite, privacy_exact_check, privacy_statistical_check
from .config import PRESETS, SchemeConfig, load_config
from .errors import (ConsistencyError, InfeasibleParametersError, NotDecodableError, ParameterError,
                     PirError, ValidationError)
from .field import FieldElement, FieldVector
from .lifted import DecodingPlan, answer_batch, decode, instantiate_queries, lifted_plan, measured_rate, refine
from .mds import Database, PirParams, encode, make_generator
from .oneshot import (build_explicit_oneshot, build_geometrical_oneshot, build_secret_sharing_oneshot,
                      rotate_oneshot, verify_oneshot)
from .rates import capacity, lifted_rate, rate_formulas
from .symbolic import build_symbolic

__version__ = "0.1.0"
