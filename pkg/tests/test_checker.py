import random

import pytest

from tblcheck.checker import (
    INSERTION,
    RUNON,
    SUBSTITUTION,
    PatternRule,
    PatternVariant,
    RulePack,
    SchemaError,
    TokenTest,
    UnsupportedRuleError,
    check,
    compile_pack,
    compile_rule,
    count_fires,
    export_xml,
    filter_noisy_rules,
    import_xml,
)
from tblcheck.confusion import ConfusionSet, seed_missing_word, seed_runon_splits
from tblcheck.corpus import Corpus, Sentence, Token, tokenize
from tblcheck.learner import SURFACE, TAG, Atom, TransformationRule, match

from conftest import make_corpus


def rule(atoms, from_class, to_class, **counts):
    return TransformationRule(tuple(Atom(*a) for a in atoms), from_class, to_class, **counts)


OF_THERE = rule([(SURFACE, -1, "of")], "there", "their", good=5, bad=0, score=5)


class TestCompile:
    def test_context_rule(self):
        compiled = compile_rule(OF_THERE)
        (variant,) = compiled.variants
        assert variant.tests == (
            TokenTest(surface="of"),
            TokenTest(surface="there"),
        )
        assert variant.mark == 1
        assert compiled.suggestion == "their"
        assert compiled.kind == SUBSTITUTION

    def test_identity_rule_single_token(self):
        compiled = compile_rule(rule([(SURFACE, 0, "Jame")], "Jame", "James"))
        (variant,) = compiled.variants
        assert variant.tests == (TokenTest(surface="Jame"),)
        assert variant.mark == 0

    def test_window_expands_to_siblings(self):
        compiled = compile_rule(rule([(SURFACE, (-3, -1), ",")], "end", "and"))
        assert len(compiled.variants) == 3  # one sibling per window position

    def test_gap_offsets_match_anything(self):
        compiled = compile_rule(rule([(TAG, 2, "DT")], "they", "the"))
        (variant,) = compiled.variants
        assert variant.tests == (
            TokenTest(surface="they"),
            TokenTest(),
            TokenTest(tag="DT"),
        )

    def test_offset_beyond_limit_rejected(self):
        with pytest.raises(UnsupportedRuleError, match="offset"):
            compile_rule(rule([(TAG, 10, "DT")], "they", "the"))

    def test_unsatisfiable_surface_conflict_rejected(self):
        with pytest.raises(UnsupportedRuleError, match="unsatisfiable"):
            compile_rule(rule([(SURFACE, 0, "other")], "there", "their"))

    def test_insertion_rule(self):
        compiled = compile_rule(rule([(SURFACE, -1, "uczy")], "NULL", "się"))
        assert compiled.kind == INSERTION

    def test_runon_rule_has_split_and_merged_forms(self):
        compiled = compile_rule(rule([], "no-body", "nobody"))
        assert compiled.kind == RUNON
        split = [v for v in compiled.variants if v.width == 2]
        merged = [v for v in compiled.variants if v.width == 1]
        assert split[0].tests == (TokenTest(surface="no"), TokenTest(surface="body"))
        assert merged[0].tests == (TokenTest(surface="no-body"),)


class TestCheck:
    def test_of_there_diagnostic(self):
        pack = compile_pack([OF_THERE])
        diagnostics = check(Corpus(tokenize("all of there books")), pack)
        (diag,) = diagnostics
        assert (diag.observed, diag.suggestion) == ("there", "their")

    def test_clean_sentence_no_diagnostics(self):
        pack = compile_pack([OF_THERE])
        assert check(Corpus(tokenize("all of their books")), pack) == []

    def test_first_matching_rule_wins(self):
        higher = rule([(SURFACE, -1, "of")], "there", "their", good=9, bad=0, score=9)
        lower = rule([(SURFACE, 0, "there")], "there", "they're", good=1, bad=0, score=1)
        pack = compile_pack([higher, lower])
        diagnostics = check(Corpus(tokenize("all of there books")), pack)
        (diag,) = diagnostics
        assert diag.rule_id == "r1" and diag.suggestion == "their"

    def test_diagnostics_position_sorted(self):
        pack = compile_pack(
            [rule([], "teh", "the"), rule([(SURFACE, -1, "of")], "there", "their")]
        )
        diagnostics = check(Corpus(tokenize("out of there teh cat. And teh dog of there.")), pack)
        keys = [(d.sentence_index, d.span) for d in diagnostics]
        assert keys == sorted(keys)

    def test_semantic_preservation_randomized(self):
        vocab = ["the", "cat", "dog", "of", "there", "on", "end", ","]
        tags = ["DT", "NN", "IN", "UNK"]
        rng = random.Random(11)
        for _ in range(200):
            from_class = rng.choice(vocab)
            to_class = rng.choice([w for w in vocab if w != from_class])
            atoms = []
            if rng.random() < 0.5:
                atoms.append((SURFACE, 0, from_class))
            for _ in range(rng.randrange(0, 2)):
                kind = rng.choice([SURFACE, TAG])
                if rng.random() < 0.3:
                    lo = rng.choice([-3, -2, 1])
                    atoms.append((kind, (lo, lo + rng.randrange(0, 3)) if lo > 0 or lo + 2 < 0 else (1, 3), rng.choice(vocab + ["SENT_START", "SENT_END"])))
                else:
                    atoms.append((kind, rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice(vocab + tags + ["SENT_START", "SENT_END"])))
            try:
                t = rule(atoms, from_class, to_class)
                compiled = compile_rule(t)
            except (ValueError, UnsupportedRuleError):
                continue
            words = [rng.choice(vocab) for _ in range(rng.randrange(1, 9))]
            sentence = Sentence([Token(w, rng.choice(tags)) for w in words])
            expected = {
                i for i in range(len(sentence.tokens))
                if not sentence.tokens[i].is_sentinel and match(t, sentence, i)
            }
            pack = RulePack([compiled])
            fired = {d.span[0] for d in check([sentence], pack)}
            assert fired == expected, (t.canonical_text(), words)

    def test_insertion_on_seeded_corpus(self):
        seeded = seed_missing_word(make_corpus([["on", "uczy", "się", "dobrze"]]), "się")
        pack = compile_pack([rule([(SURFACE, -1, "uczy")], "NULL", "się")])
        (diag,) = check(seeded, pack)
        token = seeded.sentences[0].tokens[diag.span[0]]
        assert token.true_label == "się"

    def test_insertion_on_fresh_text(self):
        pack = compile_pack([rule([(SURFACE, -1, "uczy")], "NULL", "się")])
        (diag,) = check(Corpus(tokenize("on uczy dobrze")), pack)
        assert diag.suggestion == "się"
        # the flagged gap sits before "dobrze"
        assert diag.observed == "NULL"

    def test_runon_on_split_tokens(self):
        pack = compile_pack([rule([], "no-body", "nobody")])
        (diag,) = check(Corpus(tokenize("i saw no body there")), pack)
        assert diag.observed == "no body"
        assert diag.suggestion == "nobody"
        assert diag.span == (3, 4)

    def test_runon_on_seeded_composite(self):
        seeded = seed_runon_splits(
            make_corpus([["nobody", "came"]]), [ConfusionSet(("no-body", "nobody"))]
        )
        pack = compile_pack([rule([], "no-body", "nobody")])
        (diag,) = check(seeded, pack)
        assert diag.observed == "no-body" and diag.suggestion == "nobody"


class TestFilterNoisy:
    def test_noisy_rule_dropped(self):
        noisy = rule([(SURFACE, 0, "the")], "the", "thee")
        quiet = rule([(SURFACE, -1, "of")], "there", "their")
        pack = compile_pack([noisy, quiet])
        clean = make_corpus([["the", "cat"], ["the", "dog"], ["the", "end"]])
        kept, dropped = filter_noisy_rules(pack, clean, max_matches=2)
        assert [r.id for r in kept.rules] == ["r2"]
        assert [(r.id, n) for r, n in dropped] == [("r1", 3)]

    def test_unlimited_keeps_everything(self):
        pack = compile_pack([rule([(SURFACE, 0, "the")], "the", "thee")])
        clean = make_corpus([["the"] * 50])
        kept, dropped = filter_noisy_rules(pack, clean, max_matches=None)
        assert kept is pack and dropped == []

    def test_zero_fires_kept(self):
        pack = compile_pack([OF_THERE])
        clean = make_corpus([["nothing", "relevant"]])
        kept, dropped = filter_noisy_rules(pack, clean, max_matches=0)
        assert len(kept.rules) == 1 and dropped == []

    def test_order_preserved_and_partition_complete(self):
        rules = [
            rule([(SURFACE, 0, w)], w, w + "x")
            for w in ["a", "b", "c", "d"]
        ]
        pack = compile_pack(rules)
        clean = make_corpus([["a", "c", "a"]])
        kept, dropped = filter_noisy_rules(pack, clean, max_matches=1)
        assert [r.id for r in kept.rules] == ["r2", "r3", "r4"]
        assert len(kept.rules) + len(dropped) == len(pack.rules)


GOLDEN_XML = """<?xml version="1.0" encoding="UTF-8"?>
<rules lang="en" source="demo">
  <rule id="r1" good="5" bad="0" score="5" kind="substitution" tbl="CLASS=there ∧ SURFACE@-1=of =&gt; their">
    <pattern mark="1">
      <token surface="of"/>
      <token surface="there"/>
    </pattern>
    <suggestion>their</suggestion>
    <message>Did you mean "their"?</message>
  </rule>
</rules>
"""


class TestXml:
    def test_golden_document(self):
        pack = compile_pack([OF_THERE], lang="en", source="demo")
        assert export_xml(pack) == GOLDEN_XML

    def test_empty_pack(self):
        document = export_xml(RulePack([], lang="en", source=""))
        assert "<rules" in document and import_xml(document).rules == []

    def test_round_trip_ten_rules(self):
        vocab = ["alpha", "beta", "gamma", "delta"]
        rules = []
        for i, w in enumerate(vocab):
            rules.append(rule([(SURFACE, 0, w)], w, w + "s", good=i, bad=0, score=i))
            rules.append(rule([(TAG, -1, "DT"), (SURFACE, (1, 3), w)], w + "x", w))
        rules.append(rule([(SURFACE, -1, "uczy")], "NULL", "się"))
        rules.append(rule([], "no-body", "nobody"))
        pack = compile_pack(rules, lang="pl", source="unit")
        assert import_xml(export_xml(pack)) == pack

    def test_malformed_xml_names_path(self):
        with pytest.raises(SchemaError, match="rules"):
            import_xml("<rules lang='x' source='y'><rule></wrong>")

    def test_schema_violation_names_element(self):
        document = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            '<rules lang="en" source="s">\n  <rule id="r1" good="1" bad="0" '
            'score="1" kind="substitution">\n  </rule>\n</rules>\n'
        )
        with pytest.raises(SchemaError, match=r"rules/rule\[1\]"):
            import_xml(document)

    def test_unknown_token_attribute_rejected(self):
        document = GOLDEN_XML.replace('<token surface="of"/>', '<token regexp="o."/>')
        with pytest.raises(SchemaError, match="regexp"):
            import_xml(document)

    def test_counts_preserved(self):
        pack = compile_pack([OF_THERE])
        loaded = import_xml(export_xml(pack))
        assert (loaded.rules[0].good, loaded.rules[0].bad, loaded.rules[0].score) == (5, 0, 5)
