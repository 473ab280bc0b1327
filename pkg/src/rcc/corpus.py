"""The bundled sample corpus."""

from functools import lru_cache
from importlib import resources

from .frontend import parse_program

# functions checked stage by stage
PIPELINE_FUNCTIONS = (
    "count",
    "rev_onto",
    "reverse",
    "append",
    "map_suc_acc",
    "map_suc",
    "fold_add",
    "sum",
    "countdown",
    "pow_snd",
    "head_or_none",
    "is_leaf",
)

# functions of the relatedness criterion
RELATEDNESS_FUNCTIONS = ("count", "map_suc", "append", "reverse", "fold_add")


def corpus_source():
    return resources.files("rcc.data").joinpath("corpus.rcc").read_text()


@lru_cache(maxsize=None)
def corpus_program():
    return parse_program(corpus_source())
