"""Compile learned transformations into declarative pattern rules, run them as
a grammar checker, filter noisy rules against a clean corpus, and round-trip
rule packs through an XML notation.

Window atoms compile by expansion into sibling patterns under one rule id, so
the exported notation stays a plain ordered-token-test formalism.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from itertools import product
from xml.sax.saxutils import escape, quoteattr

from .confusion import JOIN_MARKER
from .corpus import NULL, SENT_END, SENT_START, Corpus, Sentence, Token
from .learner import TransformationRule, rule_from_text

SUBSTITUTION = "substitution"
INSERTION = "insertion"
RUNON = "runon"

_MAX_OFFSET = 9


class UnsupportedRuleError(ValueError):
    """Rule cannot be expressed as a token pattern."""


class SchemaError(ValueError):
    """XML document violates the rule-pack schema."""


@dataclass(frozen=True)
class TokenTest:
    """Test on one token: a surface literal, a tag literal, both, or anything."""

    surface: str | None = None
    tag: str | None = None

    def matches(self, surface: str, tag: str) -> bool:
        if self.surface is not None and self.surface != surface:
            return False
        if self.tag is not None and self.tag != tag:
            return False
        return True


@dataclass(frozen=True)
class PatternVariant:
    """One contiguous token pattern; the trigger starts at index `mark` and
    covers `width` tokens (width > 1 only for split run-on patterns)."""

    tests: tuple[TokenTest, ...]
    mark: int
    width: int = 1


@dataclass
class PatternRule:
    id: str
    variants: tuple[PatternVariant, ...]
    suggestion: str
    message: str
    kind: str = SUBSTITUTION
    good: int = 0
    bad: int = 0
    score: int = 0
    provenance: TransformationRule | None = None


@dataclass
class RulePack:
    rules: list[PatternRule] = field(default_factory=list)
    lang: str = "en"
    source: str = ""

    def __post_init__(self):
        ids = [r.id for r in self.rules]
        if len(set(ids)) != len(ids):
            raise ValueError("rule ids in a pack must be unique")


@dataclass(frozen=True)
class Diagnostic:
    sentence_index: int
    span: tuple[int, int]  # inclusive token indices; (i, i) gap for insertions
    rule_id: str
    observed: str
    suggestion: str


def _expand_atoms(rule: TransformationRule) -> list[list[tuple[str, int, str]]]:
    """Window atoms become one exact-offset alternative per window position."""
    alternatives = []
    for atom in rule.atoms:
        if isinstance(atom.pos, tuple):
            lo, hi = atom.pos
            alternatives.append([(atom.kind, k, atom.value) for k in range(lo, hi + 1)])
        else:
            alternatives.append([(atom.kind, atom.pos, atom.value)])
    return [list(combo) for combo in product(*alternatives)]


def _merge_test(tests: dict[int, dict], offset: int, kind: str, value: str) -> bool:
    """Add a constraint at an offset; False if it contradicts an existing one."""
    slot = tests.setdefault(offset, {})
    key = "surface" if kind == "SURFACE" else "tag"
    if key in slot and slot[key] != value:
        return False
    slot[key] = value
    return True


def _build_variant(
    constraints: dict[int, dict], trigger_offsets: list[int]
) -> PatternVariant:
    lo = min(list(constraints) + trigger_offsets)
    hi = max(list(constraints) + trigger_offsets)
    tests = []
    for offset in range(lo, hi + 1):
        slot = constraints.get(offset, {})
        tests.append(TokenTest(surface=slot.get("surface"), tag=slot.get("tag")))
    return PatternVariant(
        tuple(tests), mark=trigger_offsets[0] - lo, width=len(trigger_offsets)
    )


def _default_message(rule: TransformationRule) -> str:
    if rule.from_class == NULL:
        return f'Possibly missing word "{rule.to_class}".'
    return f'Did you mean "{rule.to_class}"?'


def compile_rule(
    t: TransformationRule, rule_id: str = "r1", message: str | None = None
) -> PatternRule:
    """Compile a transformation into a pattern rule.

    Exact offsets become fixed positions (gaps match anything); window atoms
    expand into sibling variants; NULL rewrites become insertion rules;
    composite run-on forms compile both a split multi-token pattern and a
    merged single-token pattern.
    """
    for atom in t.atoms:
        offsets = atom.pos if isinstance(atom.pos, tuple) else (atom.pos,)
        if any(abs(k) > _MAX_OFFSET for k in offsets):
            raise UnsupportedRuleError(
                f"atom offset beyond +-{_MAX_OFFSET}: {atom.format()}"
            )

    if t.from_class == NULL:
        kind = INSERTION
    elif JOIN_MARKER in t.from_class and len(t.from_class) > 1:
        kind = RUNON
    else:
        kind = SUBSTITUTION

    variants: list[PatternVariant] = []
    for expansion in _expand_atoms(t):
        if kind == RUNON:
            variants.extend(_runon_variants(t, expansion))
        else:
            constraints: dict[int, dict] = {}
            ok = _merge_test(constraints, 0, "SURFACE", t.from_class)
            for akind, offset, value in expansion:
                ok = ok and _merge_test(constraints, offset, akind, value)
            if ok:
                variants.append(_build_variant(constraints, [0]))
    seen = set()
    unique = []
    for v in variants:
        if v not in seen:
            seen.add(v)
            unique.append(v)
    if not unique:
        raise UnsupportedRuleError(f"unsatisfiable rule: {t.canonical_text()}")
    return PatternRule(
        id=rule_id,
        variants=tuple(unique),
        suggestion=t.to_class,
        message=message if message is not None else _default_message(t),
        kind=kind,
        good=t.good,
        bad=t.bad,
        score=t.score,
        provenance=t,
    )


def _runon_variants(t: TransformationRule, expansion) -> list[PatternVariant]:
    parts = t.from_class.split(JOIN_MARKER)
    if any(not p for p in parts):
        raise UnsupportedRuleError(f"malformed composite form: {t.from_class!r}")
    n = len(parts)

    # split form: the composite occupies n adjacent tokens
    constraints: dict[int, dict] = {}
    ok = True
    for i, part in enumerate(parts):
        ok = ok and _merge_test(constraints, i, "SURFACE", part)
    for akind, offset, value in expansion:
        if offset == 0:
            # a SURFACE@0 test equal to the composite is implied by the part
            # tests; anything else cannot hold on split tokens
            if akind == "SURFACE" and value != t.from_class:
                ok = False
            elif akind == "TAG":
                ok = ok and _merge_test(constraints, 0, "TAG", value)
            continue
        mapped = offset if offset < 0 else offset + n - 1
        ok = ok and _merge_test(constraints, mapped, akind, value)
    out = []
    if ok:
        out.append(_build_variant(constraints, list(range(n))))

    # merged form: the composite is a single seeded token
    constraints = {}
    ok = _merge_test(constraints, 0, "SURFACE", t.from_class)
    for akind, offset, value in expansion:
        ok = ok and _merge_test(constraints, offset, akind, value)
    if ok:
        out.append(_build_variant(constraints, [0]))
    return out


def compile_pack(
    rules: list[TransformationRule],
    lang: str = "en",
    source: str = "",
    messages: dict[int, str] | None = None,
) -> RulePack:
    """Compile a ranked rule list, assigning ids r1..rN in ranking order."""
    compiled = []
    for i, rule in enumerate(rules):
        message = messages.get(i) if messages else None
        compiled.append(compile_rule(rule, rule_id=f"r{i + 1}", message=message))
    return RulePack(compiled, lang=lang, source=source)


# -- checking ----------------------------------------------------------------


def _surface_at(tokens, j: int) -> str:
    if j < 0:
        return SENT_START
    if j >= len(tokens):
        return SENT_END
    return tokens[j].surface


def _tag_at(tokens, j: int) -> str:
    if j < 0:
        return SENT_START
    if j >= len(tokens):
        return SENT_END
    return tokens[j].tag


def _variant_matches(tokens, trigger: int, variant: PatternVariant) -> bool:
    anchor = trigger - variant.mark
    for k, test in enumerate(variant.tests):
        j = anchor + k
        if not test.matches(_surface_at(tokens, j), _tag_at(tokens, j)):
            return False
    return True


def _null_view(sentence: Sentence) -> tuple[list[Token], dict[int, int]]:
    """Sentence with a NULL placeholder in every inter-token gap, plus a map
    from view NULL indices to the index of the original token after the gap."""
    tokens = sentence.tokens
    content = [(i, t) for i, t in enumerate(tokens) if not t.is_sentinel]
    if not content:
        return list(tokens), {}
    view = [tokens[0]]
    gap_map: dict[int, int] = {}
    for orig_index, token in content:
        gap_map[len(view)] = orig_index
        view.append(Token(NULL, NULL, NULL, NULL))
        view.append(token)
    gap_map[len(view)] = content[-1][0] + 1
    view.append(Token(NULL, NULL, NULL, NULL))
    view.append(tokens[-1])
    return view, gap_map


def check(sentences: Corpus | list[Sentence], pack: RulePack) -> list[Diagnostic]:
    """Apply pattern rules in pack order; first matching rule wins per token.

    Insertion rules fire at NULL tokens when the input already carries them
    (seeded corpora), otherwise at every inter-token gap of a virtual
    NULL-interleaved view. Run-on rules fire on adjacent split tokens and on
    seeded composite tokens.
    """
    if isinstance(sentences, Corpus):
        sentences = sentences.sentences
    diagnostics: list[Diagnostic] = []
    for si, sentence in enumerate(sentences):
        tokens = sentence.tokens
        has_null = any(t.surface == NULL for t in tokens if not t.is_sentinel)
        view = gap_map = None
        claimed: set = set()
        for rule in pack.rules:
            if rule.kind == INSERTION:
                if has_null:
                    targets = [
                        (tokens, i, ("tok", i), (i, i))
                        for i, t in enumerate(tokens)
                        if not t.is_sentinel and t.surface == NULL
                    ]
                else:
                    if view is None:
                        view, gap_map = _null_view(sentence)
                    targets = [
                        (view, vi, ("gap", oi), (oi, oi)) for vi, oi in gap_map.items()
                    ]
                for toks, i, key, span in targets:
                    if key in claimed:
                        continue
                    if any(_variant_matches(toks, i, v) for v in rule.variants):
                        claimed.add(key)
                        diagnostics.append(
                            Diagnostic(si, span, rule.id, NULL, rule.suggestion)
                        )
            else:
                for i, token in enumerate(tokens):
                    if token.is_sentinel:
                        continue
                    for variant in rule.variants:
                        keys = [("tok", i + k) for k in range(variant.width)]
                        if any(k in claimed for k in keys):
                            continue
                        last = i + variant.width - 1
                        if last >= len(tokens) or tokens[last].is_sentinel:
                            continue
                        if not _variant_matches(tokens, i, variant):
                            continue
                        claimed.update(keys)
                        observed = " ".join(
                            tokens[i + k].surface for k in range(variant.width)
                        )
                        diagnostics.append(
                            Diagnostic(si, (i, last), rule.id, observed, rule.suggestion)
                        )
                        break
    diagnostics.sort(key=lambda d: (d.sentence_index, d.span))
    return diagnostics


def count_fires(rule: PatternRule, corpus: Corpus) -> int:
    """Matches of a single rule on a corpus, ignoring pack-order claiming."""
    solo = RulePack([rule], lang="", source="")
    return len(check(corpus, solo))


def filter_noisy_rules(
    pack: RulePack, clean: Corpus, max_matches: int | None
) -> tuple[RulePack, list[tuple[PatternRule, int]]]:
    """Drop rules firing more than max_matches times on a clean corpus."""
    if max_matches is None:
        return pack, []
    kept = []
    dropped = []
    for rule in pack.rules:
        fires = count_fires(rule, clean)
        if fires > max_matches:
            dropped.append((rule, fires))
        else:
            kept.append(rule)
    return RulePack(kept, lang=pack.lang, source=pack.source), dropped


# -- XML round trip ------------------------------------------------------------


def export_xml(pack: RulePack) -> str:
    """Serialize a pack: UTF-8, 2-space indent, fixed attribute order."""
    lines = ['<?xml version="1.0" encoding="UTF-8"?>']
    lines.append(f"<rules lang={quoteattr(pack.lang)} source={quoteattr(pack.source)}>")
    for rule in pack.rules:
        attrs = (
            f"id={quoteattr(rule.id)} good=\"{rule.good}\" bad=\"{rule.bad}\""
            f" score=\"{rule.score}\" kind={quoteattr(rule.kind)}"
        )
        if rule.provenance is not None:
            attrs += f" tbl={quoteattr(rule.provenance.canonical_text())}"
        lines.append(f"  <rule {attrs}>")
        for variant in rule.variants:
            pattern_attrs = f'mark="{variant.mark}"'
            if variant.width != 1:
                pattern_attrs += f' span="{variant.width}"'
            lines.append(f"    <pattern {pattern_attrs}>")
            for test in variant.tests:
                attr_parts = []
                if test.surface is not None:
                    attr_parts.append(f"surface={quoteattr(test.surface)}")
                if test.tag is not None:
                    attr_parts.append(f"postag={quoteattr(test.tag)}")
                if attr_parts:
                    lines.append(f"      <token {' '.join(attr_parts)}/>")
                else:
                    lines.append("      <token/>")
            lines.append("    </pattern>")
        lines.append(f"    <suggestion>{escape(rule.suggestion)}</suggestion>")
        lines.append(f"    <message>{escape(rule.message)}</message>")
        lines.append("  </rule>")
    lines.append("</rules>")
    return "\n".join(lines) + "\n"


def _require(condition: bool, path: str, detail: str) -> None:
    if not condition:
        raise SchemaError(f"{path}: {detail}")


def import_xml(document: str) -> RulePack:
    """Parse an exported rule pack; import(export(p)) == p."""
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise SchemaError(f"rules: not well-formed XML ({exc})") from exc
    _require(root.tag == "rules", "rules", f"root element must be <rules>, got <{root.tag}>")
    _require("lang" in root.attrib, "rules", "missing lang attribute")
    _require("source" in root.attrib, "rules", "missing source attribute")
    rules = []
    for ri, elem in enumerate(root, start=1):
        path = f"rules/rule[{ri}]"
        _require(elem.tag == "rule", path, f"unexpected element <{elem.tag}>")
        for attr in ("id", "good", "bad", "score", "kind"):
            _require(attr in elem.attrib, path, f"missing {attr} attribute")
        kind = elem.attrib["kind"]
        _require(
            kind in (SUBSTITUTION, INSERTION, RUNON), path, f"unknown kind {kind!r}"
        )
        variants = []
        suggestion = message = None
        for ci, child in enumerate(elem, start=1):
            cpath = f"{path}/{child.tag}[{ci}]"
            if child.tag == "pattern":
                _require(suggestion is None, cpath, "pattern after suggestion")
                _require("mark" in child.attrib, cpath, "missing mark attribute")
                tests = []
                for token_elem in child:
                    _require(
                        token_elem.tag == "token",
                        cpath,
                        f"unexpected element <{token_elem.tag}>",
                    )
                    extra = set(token_elem.attrib) - {"surface", "postag"}
                    _require(not extra, cpath, f"unknown token attributes {sorted(extra)}")
                    tests.append(
                        TokenTest(
                            surface=token_elem.attrib.get("surface"),
                            tag=token_elem.attrib.get("postag"),
                        )
                    )
                _require(len(tests) >= 1, cpath, "empty pattern")
                mark = int(child.attrib["mark"])
                width = int(child.attrib.get("span", "1"))
                _require(0 <= mark < len(tests), cpath, "mark outside pattern bounds")
                variants.append(PatternVariant(tuple(tests), mark=mark, width=width))
            elif child.tag == "suggestion":
                suggestion = child.text or ""
            elif child.tag == "message":
                message = child.text or ""
            else:
                raise SchemaError(f"{cpath}: unexpected element <{child.tag}>")
        _require(bool(variants), path, "rule has no pattern")
        _require(suggestion is not None, path, "missing <suggestion>")
        _require(message is not None, path, "missing <message>")
        provenance = None
        if "tbl" in elem.attrib:
            rule_text = (
                f"{elem.attrib['tbl']} ; good={elem.attrib['good']}"
                f" bad={elem.attrib['bad']} score={elem.attrib['score']}"
            )
            provenance = rule_from_text(rule_text)
        rules.append(
            PatternRule(
                id=elem.attrib["id"],
                variants=tuple(variants),
                suggestion=suggestion,
                message=message,
                kind=kind,
                good=int(elem.attrib["good"]),
                bad=int(elem.attrib["bad"]),
                score=int(elem.attrib["score"]),
                provenance=provenance,
            )
        )
    return RulePack(rules, lang=root.attrib["lang"], source=root.attrib["source"])
