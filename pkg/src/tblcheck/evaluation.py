"""Precision/recall measurement of rule packs against gold corpora and the
naive-vs-mixed experiment harness.

A diagnostic counts as a true positive only when it fires on an error token
and suggests its true label; a right trigger with a wrong suggestion is a
false positive. 0/0 ratios are reported as 0 and flagged undefined.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .checker import RulePack, check, compile_pack
from .confusion import ConfusionSet, SeedPolicy, extract_pairs_from_corpus, seed_errors
from .corpus import Corpus, Lexicon
from .learner import LearnerConfig, learn


@dataclass
class EvalReport:
    corpus_name: str
    true_positives: int
    false_positives: int
    false_negatives: int
    precision: float
    recall: float
    precision_defined: bool
    recall_defined: bool
    rule_fires: dict[str, int] = field(default_factory=dict)


def _ratio(numerator: int, denominator: int) -> tuple[float, bool]:
    if denominator == 0:
        return 0.0, False
    return numerator / denominator, True


def evaluate(pack: RulePack, gold: Corpus) -> EvalReport:
    """Score a pack against a corpus carrying true labels.

    On fully clean corpora every diagnostic is a false positive and recall is
    flagged undefined.
    """
    errors = {
        (si, ti)
        for si, ti, token in gold.iter_tokens()
        if token.is_error
    }
    diagnostics = check(gold, pack)
    fires: dict[str, int] = {rule.id: 0 for rule in pack.rules}
    tp_positions = set()
    fp = 0
    sentences = gold.sentences
    for diag in diagnostics:
        fires[diag.rule_id] = fires.get(diag.rule_id, 0) + 1
        key = (diag.sentence_index, diag.span[0])
        token = sentences[diag.sentence_index].tokens[diag.span[0]]
        if key in errors and diag.suggestion == token.true_label:
            tp_positions.add(key)
        else:
            fp += 1
    tp = len(tp_positions)
    fn = len(errors) - tp
    precision, p_def = _ratio(tp, tp + fp)
    recall, r_def = _ratio(tp, tp + fn)
    return EvalReport(
        corpus_name=gold.name,
        true_positives=tp,
        false_positives=fp,
        false_negatives=fn,
        precision=precision,
        recall=recall,
        precision_defined=p_def,
        recall_defined=r_def,
        rule_fires=fires,
    )


@dataclass
class ExperimentConfig:
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    policy: SeedPolicy = field(default_factory=SeedPolicy)
    lexicon: Lexicon | None = None
    dictionary: set[str] | None = None
    lang: str = "en"


@dataclass
class ExperimentResult:
    """The 2x2 grid of reports: {naive, mixed} x {training, held-out}."""

    naive_train: EvalReport
    naive_heldout: EvalReport
    mixed_train: EvalReport
    mixed_heldout: EvalReport
    sets: list[ConfusionSet] = field(default_factory=list)
    naive_pack: RulePack | None = None
    mixed_pack: RulePack | None = None


def run_experiment(
    error_corpus: Corpus,
    clean_train: Corpus,
    heldout: Corpus,
    config: ExperimentConfig,
) -> ExperimentResult:
    """Contrast naive learning (directly on the error corpus) with mixed
    learning (confusion sets seeded into a clean corpus); both packs are
    evaluated on their training corpus and on the held-out corpus seeded with
    the same sets."""
    naive_rules = learn(error_corpus, config.learner)
    naive_pack = compile_pack(naive_rules, lang=config.lang, source=error_corpus.name)

    sets = extract_pairs_from_corpus(error_corpus, config.dictionary)
    seeded_train = seed_errors(clean_train, sets, config.policy, config.lexicon)
    mixed_rules = learn(seeded_train, config.learner)
    mixed_pack = compile_pack(mixed_rules, lang=config.lang, source=clean_train.name)

    seeded_heldout = seed_errors(heldout, sets, config.policy, config.lexicon)
    return ExperimentResult(
        naive_train=evaluate(naive_pack, error_corpus),
        naive_heldout=evaluate(naive_pack, seeded_heldout),
        mixed_train=evaluate(mixed_pack, seeded_train),
        mixed_heldout=evaluate(mixed_pack, seeded_heldout),
        sets=sets,
        naive_pack=naive_pack,
        mixed_pack=mixed_pack,
    )


def _pct(value: float, defined: bool) -> str:
    text = f"{value * 100:.2f}%"
    return text if defined else text + " (undefined)"


def format_report_tsv(report: EvalReport) -> str:
    lines = [
        f"corpus\t{report.corpus_name}",
        f"tp\t{report.true_positives}",
        f"fp\t{report.false_positives}",
        f"fn\t{report.false_negatives}",
        f"precision\t{report.precision:.4f}\t{'defined' if report.precision_defined else 'undefined'}",
        f"recall\t{report.recall:.4f}\t{'defined' if report.recall_defined else 'undefined'}",
    ]
    for rule_id, fires in sorted(report.rule_fires.items()):
        lines.append(f"fires\t{rule_id}\t{fires}")
    return "\n".join(lines) + "\n"


def format_report_table(report: EvalReport) -> str:
    lines = [
        f"Corpus: {report.corpus_name}",
        f"  TP {report.true_positives}  FP {report.false_positives}  FN {report.false_negatives}",
        f"  Precision  {_pct(report.precision, report.precision_defined)}",
        f"  Recall     {_pct(report.recall, report.recall_defined)}",
    ]
    return "\n".join(lines) + "\n"


def format_experiment_tsv(result: ExperimentResult) -> str:
    rows = [("corpus", "measure", "naive", "mixed")]
    grid = [
        ("training", result.naive_train, result.mixed_train),
        ("held-out", result.naive_heldout, result.mixed_heldout),
    ]
    for corpus, naive, mixed in grid:
        rows.append((corpus, "recall", f"{naive.recall:.4f}", f"{mixed.recall:.4f}"))
        rows.append(
            (corpus, "precision", f"{naive.precision:.4f}", f"{mixed.precision:.4f}")
        )
    return "\n".join("\t".join(row) for row in rows) + "\n"


def format_experiment_table(result: ExperimentResult) -> str:
    header = f"{'Corpus type':<18}{'Measure':<12}{'Naive learning':<18}{'Mixed learning':<18}"
    lines = [header.rstrip()]
    grid = [
        ("Training corpus", result.naive_train, result.mixed_train),
        ("Held-out corpus", result.naive_heldout, result.mixed_heldout),
    ]
    for label, naive, mixed in grid:
        lines.append(
            f"{label:<18}{'Recall':<12}"
            f"{_pct(naive.recall, naive.recall_defined):<18}"
            f"{_pct(mixed.recall, mixed.recall_defined):<18}".rstrip()
        )
        lines.append(
            f"{'':<18}{'Precision':<12}"
            f"{_pct(naive.precision, naive.precision_defined):<18}"
            f"{_pct(mixed.precision, mixed.precision_defined):<18}".rstrip()
        )
    return "\n".join(lines) + "\n"
