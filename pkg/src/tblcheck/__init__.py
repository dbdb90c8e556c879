"""tblcheck: learn symbolic error-detection rules from corpora and apply them
as a grammar checker."""

from .corpus import (
    Corpus,
    ErrAnnotation,
    Lexicon,
    Sentence,
    Token,
    load_column_corpus,
    parse_err_markup,
    save_column_corpus,
    tag_corpus,
    tokenize,
)
from .confusion import (
    CharConfusionModel,
    ConfusionSet,
    SeedPolicy,
    extract_confusion_sets,
    generate_typo_variants,
    seed_errors,
    seed_missing_word,
    seed_runon_splits,
)
from .learner import (
    Atom,
    LearnerConfig,
    Template,
    TransformationRule,
    apply_rule,
    default_templates,
    instantiate_candidates,
    learn,
    match,
    score_rule,
)
from .checker import (
    Diagnostic,
    PatternRule,
    RulePack,
    check,
    compile_pack,
    compile_rule,
    export_xml,
    filter_noisy_rules,
    import_xml,
)
from .evaluation import (
    EvalReport,
    ExperimentConfig,
    ExperimentResult,
    evaluate,
    run_experiment,
)

__all__ = [
    "Corpus", "ErrAnnotation", "Lexicon", "Sentence", "Token",
    "load_column_corpus", "parse_err_markup", "save_column_corpus",
    "tag_corpus", "tokenize",
    "CharConfusionModel", "ConfusionSet", "SeedPolicy",
    "extract_confusion_sets", "generate_typo_variants",
    "seed_errors", "seed_missing_word", "seed_runon_splits",
    "Atom", "LearnerConfig", "Template", "TransformationRule",
    "apply_rule", "default_templates", "instantiate_candidates",
    "learn", "match", "score_rule",
    "Diagnostic", "PatternRule", "RulePack", "check", "compile_pack",
    "compile_rule", "export_xml", "filter_noisy_rules", "import_xml",
    "EvalReport", "ExperimentConfig", "ExperimentResult",
    "evaluate", "run_experiment",
]

__version__ = "0.1.0"
