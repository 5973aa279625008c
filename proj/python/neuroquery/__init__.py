from ._core import (
    Bm25Index,
    Error,
    GatewayProtocolError,
    GatewayUnavailable,
    ParseError,
    QueryError,
    Session,
    TranslationUnparsable,
    bleu,
    canonicalize,
    em_score,
    f1_score,
    from_python_syntax,
    normalize_answer,
    parse_term,
    porter_stem,
    tokenize,
)

__all__ = [
    "Bm25Index",
    "Error",
    "GatewayProtocolError",
    "GatewayUnavailable",
    "ParseError",
    "QueryError",
    "Session",
    "TranslationUnparsable",
    "bleu",
    "canonicalize",
    "em_score",
    "f1_score",
    "from_python_syntax",
    "normalize_answer",
    "parse_term",
    "porter_stem",
    "tokenize",
]
