"""Command-line pipeline: extract, seed, seed-null, seed-runon, learn, filter,
export, check, eval, experiment.

Every stage reads and writes plain files so intermediate rules can be
inspected and refined by hand. Exit codes: 0 success, 1 validation error,
2 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import checker, confusion, corpus, evaluation, learner


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as f:
        return f.read()


def _write_output(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def _load_corpus(path: str, lexicon: corpus.Lexicon | None = None) -> corpus.Corpus:
    """Column corpus for .tsv files, raw text otherwise (tagged if a lexicon
    is given)."""
    name = os.path.splitext(os.path.basename(path))[0]
    if path.endswith(".tsv"):
        return corpus.load_column_corpus(path)
    loaded = corpus.Corpus(corpus.tokenize(_read_text(path)), name=name)
    if lexicon is not None:
        loaded = corpus.tag_corpus(loaded, lexicon)
    return loaded


def _load_lexicon(args) -> corpus.Lexicon | None:
    if getattr(args, "lexicon", None):
        return corpus.Lexicon.from_file(args.lexicon)
    return None


def _load_dictionary(args) -> set[str] | None:
    if getattr(args, "dictionary", None):
        words = set()
        for line in _read_text(args.dictionary).split("\n"):
            if line.strip():
                words.add(line.strip())
        return words
    return None


def _policy(args) -> confusion.SeedPolicy:
    return confusion.SeedPolicy(mode=args.policy, rate=args.rate, seed=args.seed)


def _templates(args) -> tuple[learner.Template, ...]:
    if args.templates == "default":
        return learner.default_templates()
    if args.templates == "default+far":
        return learner.default_templates(far=True)
    return learner.load_templates(args.templates)


def _learner_config(args) -> learner.LearnerConfig:
    sets = None
    if getattr(args, "sets", None):
        sets = tuple(confusion.load_confusion_sets(args.sets))
    return learner.LearnerConfig(
        templates=_templates(args),
        threshold=args.threshold,
        max_rules=args.max_rules,
        sets=sets,
    )


def _add_policy_flags(parser) -> None:
    parser.add_argument(
        "--policy",
        choices=[confusion.REPLACE_ALL, confusion.ROUND_ROBIN, confusion.SAMPLE],
        default=confusion.REPLACE_ALL,
        help="how member occurrences are corrupted",
    )
    parser.add_argument(
        "--rate", type=float, default=1.0, help="replacement rate for sample mode"
    )
    parser.add_argument("--seed", type=int, default=0, help="RNG seed for sample mode")


def _add_learner_flags(parser) -> None:
    parser.add_argument(
        "--templates",
        default="default",
        help="template set: default, default+far, or a template file",
    )
    parser.add_argument(
        "--threshold", type=int, default=2, help="minimum rule score (>= 1)"
    )
    parser.add_argument("--max-rules", type=int, default=None, help="rule count cap")
    parser.add_argument(
        "--sets", default=None, help="confusion-set file constraining rewrites"
    )


def _cmd_extract(args) -> None:
    _, annotations = corpus.parse_err_markup(_read_text(args.input))
    sets = confusion.extract_confusion_sets(annotations, _load_dictionary(args))
    _write_output("".join(cs.format() + "\n" for cs in sets), args.output)


def _cmd_seed(args) -> None:
    lexicon = _load_lexicon(args)
    clean = _load_corpus(args.input, lexicon)
    sets = confusion.load_confusion_sets(args.sets)
    seeded = confusion.seed_errors(clean, sets, _policy(args), lexicon)
    _write_output(corpus.dump_column_corpus(seeded), args.output)


def _cmd_seed_null(args) -> None:
    clean = _load_corpus(args.input, _load_lexicon(args))
    seeded = confusion.seed_missing_word(clean, args.word)
    _write_output(corpus.dump_column_corpus(seeded), args.output)


def _cmd_seed_runon(args) -> None:
    clean = _load_corpus(args.input, _load_lexicon(args))
    pairs = confusion.load_confusion_sets(args.sets)
    seeded = confusion.seed_runon_splits(clean, pairs)
    _write_output(corpus.dump_column_corpus(seeded), args.output)


def _cmd_learn(args) -> None:
    train = corpus.load_column_corpus(args.input)
    rules = learner.learn(train, _learner_config(args))
    _write_output(
        "".join(learner.rule_to_text(r) + "\n" for r in rules), args.output
    )


def _cmd_filter(args) -> None:
    rules = learner.load_rules(args.input)
    pack = checker.compile_pack(rules)
    clean = _load_corpus(args.clean, _load_lexicon(args))
    kept, dropped = checker.filter_noisy_rules(pack, clean, args.max_matches)
    kept_text = "".join(
        learner.rule_to_text(r.provenance) + "\n" for r in kept.rules
    )
    _write_output(kept_text, args.output)
    if args.dropped:
        dropped_text = "".join(
            f"{fires}\t{learner.rule_to_text(rule.provenance)}\n"
            for rule, fires in dropped
        )
        _write_output(dropped_text, args.dropped)


def _cmd_export(args) -> None:
    rules = learner.load_rules(args.input)
    pack = checker.compile_pack(rules, lang=args.lang, source=args.source)
    _write_output(checker.export_xml(pack), args.output)


def _format_diagnostics(diagnostics) -> str:
    lines = ["sentence\tstart\tend\trule\tobserved\tsuggestion"]
    for d in diagnostics:
        lines.append(
            f"{d.sentence_index}\t{d.span[0]}\t{d.span[1]}\t{d.rule_id}"
            f"\t{d.observed}\t{d.suggestion}"
        )
    return "\n".join(lines) + "\n"


def _cmd_check(args) -> None:
    pack = checker.import_xml(_read_text(args.rules))
    text_corpus = _load_corpus(args.input, _load_lexicon(args))
    diagnostics = checker.check(text_corpus, pack)
    _write_output(_format_diagnostics(diagnostics), args.output)


def _cmd_eval(args) -> None:
    pack = checker.import_xml(_read_text(args.rules))
    gold = corpus.load_column_corpus(args.input)
    report = evaluation.evaluate(pack, gold)
    if args.format == "tsv":
        _write_output(evaluation.format_report_tsv(report), args.output)
    else:
        _write_output(evaluation.format_report_table(report), args.output)


def _cmd_experiment(args) -> None:
    lexicon = _load_lexicon(args)
    error_corpus, _ = corpus.parse_err_markup(_read_text(args.error_corpus))
    if lexicon is not None:
        error_corpus = corpus.tag_corpus(error_corpus, lexicon)
    clean_train = _load_corpus(args.clean, lexicon)
    heldout = _load_corpus(args.heldout, lexicon)
    config = evaluation.ExperimentConfig(
        learner=_learner_config(args),
        policy=_policy(args),
        lexicon=lexicon,
        dictionary=_load_dictionary(args),
    )
    result = evaluation.run_experiment(error_corpus, clean_train, heldout, config)
    if args.format == "tsv":
        _write_output(evaluation.format_experiment_tsv(result), args.output)
    else:
        _write_output(evaluation.format_experiment_table(result), args.output)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tblcheck",
        description="Learn error-detection rules from corpora and apply them "
        "as a grammar checker.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="ERR-markup text -> confusion-set file")
    p.add_argument("input")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--dictionary", default=None, help="word list; drops non-word pairs")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("seed", help="clean corpus + confusion sets -> column corpus")
    p.add_argument("input")
    p.add_argument("--sets", required=True)
    p.add_argument("--lexicon", default=None)
    p.add_argument("-o", "--output", default=None)
    _add_policy_flags(p)
    p.set_defaults(func=_cmd_seed)

    p = sub.add_parser("seed-null", help="delete a word, leaving NULL placeholders")
    p.add_argument("input")
    p.add_argument("--word", required=True)
    p.add_argument("--lexicon", default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_seed_null)

    p = sub.add_parser("seed-runon", help="replace joined words by composite tokens")
    p.add_argument("input")
    p.add_argument("--sets", required=True)
    p.add_argument("--lexicon", default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_seed_runon)

    p = sub.add_parser("learn", help="column corpus -> ranked rule file")
    p.add_argument("input")
    p.add_argument("-o", "--output", default=None)
    _add_learner_flags(p)
    p.set_defaults(func=_cmd_learn)

    p = sub.add_parser("filter", help="drop rules noisy on a clean corpus")
    p.add_argument("input", help="rule file")
    p.add_argument("--clean", required=True)
    p.add_argument("--max-matches", type=int, default=None)
    p.add_argument("--lexicon", default=None)
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--dropped", default=None, help="file for dropped rules with counts")
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("export", help="rule file -> XML rule pack")
    p.add_argument("input")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--lang", default="en")
    p.add_argument("--source", default="")
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("check", help="flag errors in text with an XML rule pack")
    p.add_argument("input")
    p.add_argument("--rules", required=True)
    p.add_argument("--lexicon", default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("eval", help="precision/recall of a pack on a gold corpus")
    p.add_argument("input", help="gold column corpus")
    p.add_argument("--rules", required=True)
    p.add_argument("--format", choices=["tsv", "table"], default="table")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("experiment", help="naive-vs-mixed 2x2 comparison")
    p.add_argument("error_corpus", help="ERR-markup text file")
    p.add_argument("clean", help="clean training corpus")
    p.add_argument("heldout", help="disjoint held-out corpus")
    p.add_argument("--lexicon", default=None)
    p.add_argument("--dictionary", default=None)
    p.add_argument("--format", choices=["tsv", "table"], default="table")
    p.add_argument("-o", "--output", default=None)
    _add_policy_flags(p)
    _add_learner_flags(p)
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except OSError as exc:
        print(f"tblcheck: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"tblcheck: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
