from .keywords import (ALL_KEYWORDS, DIRECTIONS, Keyword, double,
                       eligible_keywords, keyword_by_name, ordinal, single)
from .mislead import NoMisleadingPossible, generate_misleading, impossible_directions
from .templates import (CONNECTIVES, Instruction, TemplateBank, bank_from_json,
                        bank_to_json, generate_instruction, render)
from .vocab import (UNK, Vocabulary, build_vocabulary, load_vocabulary,
                    load_word_vectors, save_vocabulary)

__all__ = [
    "ALL_KEYWORDS", "DIRECTIONS", "Keyword", "double", "eligible_keywords",
    "keyword_by_name", "ordinal", "single",
    "NoMisleadingPossible", "generate_misleading", "impossible_directions",
    "CONNECTIVES", "Instruction", "TemplateBank", "bank_from_json",
    "bank_to_json", "generate_instruction", "render",
    "UNK", "Vocabulary", "build_vocabulary", "load_vocabulary",
    "load_word_vectors", "save_vocabulary",
]
