"""Mining high-utility sequential rules whose utility keeps rising along expansions."""

__version__ = "0.1.0"

from .engine import MiningConfig, MiningResult, MinedRule, mine, variant_config  # noqa: E402
from .formats import load_database, load_spmf, parse_database, parse_spmf  # noqa: E402
from .model import SequenceDatabase, SequentialRule  # noqa: E402

__all__ = ["MiningConfig", "MiningResult", "MinedRule", "mine", "variant_config",
           "load_database", "load_spmf", "parse_database", "parse_spmf",
           "SequenceDatabase", "SequentialRule"]
