"""Transformation-Based Learning core: template instantiation at error sites,
rule scoring, greedy selection, and iterative corpus rewriting.

A rule is a conjunction of context atoms over a token window plus a
from-class -> to-class rewrite, scored as good - bad where good counts
corrected positions and bad counts positions the rewrite would corrupt.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from itertools import product

from .confusion import ConfusionSet
from .corpus import SENT_END, SENT_START, Corpus, Sentence

SURFACE = "SURFACE"
TAG = "TAG"
CLASS = "CLASS"

_FEATURE_KINDS = (SURFACE, TAG, CLASS)


class RuleSyntaxError(ValueError):
    """Malformed rule or template text."""


# Positions are an exact offset (int) or an inclusive [a, b] window (tuple)
# meaning "some position in the window has the value".


def _check_position(kind: str, pos) -> None:
    if kind not in _FEATURE_KINDS:
        raise ValueError(f"unknown feature kind: {kind}")
    if isinstance(pos, tuple):
        a, b = pos
        if a > b:
            raise ValueError(f"window bounds out of order: [{a},{b}]")
        if a <= 0 <= b:
            raise ValueError("window atoms never include offset 0")
        if kind == CLASS:
            raise ValueError("CLASS atoms only use offset 0")
    elif kind == CLASS and pos != 0:
        raise ValueError("CLASS atoms only use offset 0")


@dataclass(frozen=True)
class Atom:
    """One bound condition: a feature value at an exact offset or in a window."""

    kind: str
    pos: int | tuple[int, int]
    value: str

    def __post_init__(self):
        _check_position(self.kind, self.pos)

    def format(self) -> str:
        return _format_atom((self.kind, self.pos, self.value))


def _format_atom(raw: tuple) -> str:
    kind, pos, value = raw
    if isinstance(pos, tuple):
        return f"{kind}[{pos[0]},{pos[1]}]={value}"
    return f"{kind}@{pos}={value}"


def _atom_sort_key(raw: tuple):
    kind, pos, value = raw
    if isinstance(pos, tuple):
        return (kind, 1, pos[0], pos[1], value)
    return (kind, 0, pos, 0, value)


@dataclass(frozen=True)
class Template:
    """Atom schemas (feature kind + position, value unbound); the CLASS@0
    binding is always implicit."""

    schemas: tuple[tuple[str, int | tuple[int, int]], ...]

    def __post_init__(self):
        if len(self.schemas) > 2:
            raise ValueError("at most two context schemas per template")
        for kind, pos in self.schemas:
            if kind == CLASS:
                raise ValueError("the CLASS@0 schema is implicit")
            _check_position(kind, pos)

    def format(self) -> str:
        parts = ["CLASS=*"]
        parts.extend(_format_atom((kind, pos, "*")) for kind, pos in self.schemas)
        return " ∧ ".join(parts)


def default_templates(far: bool = False) -> tuple[Template, ...]:
    """Template shapes mirroring the learned-rule excerpts: identity, exact
    offsets within +-3, and [-3,-1] / [1,3] windows. `far` opts in to the
    long-distance TAG@5 / TAG@-2 shapes."""
    templates = [Template(((SURFACE, 0),))]
    offsets = [-3, -2, -1, 1, 2, 3]
    templates.extend(Template(((SURFACE, k),)) for k in offsets)
    templates.extend(Template(((TAG, k),)) for k in offsets)
    templates.append(Template(((SURFACE, (-3, -1)),)))
    templates.append(Template(((SURFACE, (1, 3)),)))
    templates.append(Template(((TAG, (1, 3)),)))
    if far:
        for extra in (Template(((TAG, 5),)), Template(((TAG, -2),))):
            if extra not in templates:
                templates.append(extra)
    return tuple(templates)


@dataclass(frozen=True)
class TransformationRule:
    atoms: tuple[Atom, ...]
    from_class: str
    to_class: str
    good: int = 0
    bad: int = 0
    score: int = 0

    def __post_init__(self):
        if self.from_class == self.to_class:
            raise ValueError("rule must change the class")
        ordered = tuple(sorted(self.atoms, key=lambda a: _atom_sort_key((a.kind, a.pos, a.value))))
        object.__setattr__(self, "atoms", ordered)

    def canonical_text(self) -> str:
        """Condition and rewrite without the counts; the tie-break key."""
        parts = [f"CLASS={self.from_class}"]
        parts.extend(a.format() for a in self.atoms)
        return " ∧ ".join(parts) + f" => {self.to_class}"

    def with_counts(self, good: int, bad: int) -> "TransformationRule":
        return replace(self, good=good, bad=bad, score=good - bad)


@dataclass
class LearnerConfig:
    templates: tuple[Template, ...] = field(default_factory=default_templates)
    threshold: int = 2
    max_rules: int | None = None
    sets: tuple[ConfusionSet, ...] | None = None

    def __post_init__(self):
        if self.threshold < 1:
            raise ValueError("score threshold must be >= 1")
        self.templates = tuple(self.templates)


# -- rule text round trip ----------------------------------------------------

_ATOM_RE = re.compile(
    r"(SURFACE|TAG|CLASS)(?:@(-?\d+)|\[(-?\d+),(-?\d+)\])=(\S+)$"
)
_COUNTS_RE = re.compile(r"good=(\d+) bad=(\d+) score=(-?\d+)$")


def rule_to_text(rule: TransformationRule) -> str:
    return (
        rule.canonical_text()
        + f" ; good={rule.good} bad={rule.bad} score={rule.score}"
    )


def _parse_atom(text: str) -> tuple[str, int | tuple[int, int], str]:
    m = _ATOM_RE.match(text)
    if m is None:
        raise RuleSyntaxError(f"bad atom: {text!r}")
    kind, exact, lo, hi, value = m.groups()
    pos = int(exact) if exact is not None else (int(lo), int(hi))
    return kind, pos, value


def rule_from_text(line: str) -> TransformationRule:
    line = line.strip()
    try:
        head, counts = line.rsplit(" ; ", 1)
        cond, to_class = head.rsplit(" => ", 1)
    except ValueError:
        raise RuleSyntaxError(f"bad rule line: {line!r}") from None
    m = _COUNTS_RE.match(counts)
    if m is None:
        raise RuleSyntaxError(f"bad counts in rule line: {counts!r}")
    good, bad, score = (int(g) for g in m.groups())
    parts = cond.split(" ∧ ")
    if not parts[0].startswith("CLASS="):
        raise RuleSyntaxError(f"rule must start with CLASS=...: {line!r}")
    from_class = parts[0][len("CLASS="):]
    atoms = tuple(Atom(*_parse_atom(p)) for p in parts[1:])
    return TransformationRule(atoms, from_class, to_class, good, bad, score)


def save_rules(rules: list[TransformationRule], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for rule in rules:
            f.write(rule_to_text(rule) + "\n")


def load_rules(path: str) -> list[TransformationRule]:
    rules = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                rules.append(rule_from_text(line))
    return rules


def parse_template_line(line: str) -> Template:
    parts = [p.strip() for p in line.strip().split(" ∧ ")]
    schemas = []
    for part in parts:
        if part == "CLASS=*":
            continue
        kind, pos, value = _parse_atom(part)
        if value != "*":
            raise RuleSyntaxError(f"template values must be '*': {part!r}")
        schemas.append((kind, pos))
    return Template(tuple(schemas))


def load_templates(path: str) -> tuple[Template, ...]:
    templates = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                templates.append(parse_template_line(line))
    return tuple(templates)


# -- matching and scoring ----------------------------------------------------

_FEATURE_ATTR = {SURFACE: "surface", TAG: "tag", CLASS: "class_label"}


def _feature_at(tokens, j: int, kind: str) -> str:
    """Feature value with sentinel extension beyond the sentence bounds."""
    if j < 0:
        return SENT_START
    if j >= len(tokens):
        return SENT_END
    return getattr(tokens[j], _FEATURE_ATTR[kind])


def _atoms_match(tokens, i: int, atoms) -> bool:
    for kind, pos, value in atoms:
        if isinstance(pos, tuple):
            lo = max(i + pos[0], 0)
            hi = min(i + pos[1], len(tokens) - 1)
            attr = _FEATURE_ATTR[kind]
            if not any(getattr(tokens[j], attr) == value for j in range(lo, hi + 1)):
                return False
        elif _feature_at(tokens, i + pos, kind) != value:
            return False
    return True


def _raw_atoms(rule: TransformationRule) -> tuple:
    return tuple((a.kind, a.pos, a.value) for a in rule.atoms)


def match(rule: TransformationRule, sentence: Sentence, i: int) -> bool:
    """True iff token i's class equals from_class and every atom holds."""
    tokens = sentence.tokens
    if tokens[i].class_label != rule.from_class:
        return False
    return _atoms_match(tokens, i, _raw_atoms(rule))


def score_rule(rule: TransformationRule, corpus: Corpus) -> tuple[int, int, int]:
    """(good, bad, score) of the rule on the corpus.

    good: matching error positions the rewrite corrects; bad: matching
    positions it would corrupt (correct tokens, or errors with a different
    true label)."""
    good = bad = 0
    atoms = _raw_atoms(rule)
    for sentence in corpus.sentences:
        tokens = sentence.tokens
        for i, token in enumerate(tokens):
            if token.is_sentinel or token.class_label != rule.from_class:
                continue
            if not _atoms_match(tokens, i, atoms):
                continue
            if token.class_label != token.true_label and rule.to_class == token.true_label:
                good += 1
            else:
                bad += 1
    return good, bad, good - bad


def _bind(tokens, i: int, template: Template):
    """Yield sorted raw-atom tuples binding the template at position i."""
    choices = []
    for kind, pos in template.schemas:
        if isinstance(pos, tuple):
            lo = max(i + pos[0], 0)
            hi = min(i + pos[1], len(tokens) - 1)
            attr = _FEATURE_ATTR[kind]
            values = []
            for j in range(lo, hi + 1):
                v = getattr(tokens[j], attr)
                if v not in values:
                    values.append(v)
            if not values:
                return
            choices.append([(kind, pos, v) for v in values])
        else:
            choices.append([(kind, pos, _feature_at(tokens, i + pos, kind))])
    for combo in product(*choices):
        yield tuple(sorted(combo, key=_atom_sort_key))


def _pair_filter(sets) -> "callable":
    if sets is None:
        return lambda a, b: True
    member_sets: dict[str, list[ConfusionSet]] = {}
    for cs in sets:
        for m in cs.members:
            member_sets.setdefault(m, []).append(cs)
    def allowed(from_class: str, to_class: str) -> bool:
        return any(to_class in cs for cs in member_sets.get(from_class, ()))
    return allowed


def instantiate_candidates(
    corpus: Corpus,
    templates: tuple[Template, ...],
    sets: tuple[ConfusionSet, ...] | None = None,
) -> set[TransformationRule]:
    """All template instantiations at current error sites (deduplicated)."""
    allowed = _pair_filter(sets)
    candidates: set[TransformationRule] = set()
    for sentence in corpus.sentences:
        tokens = sentence.tokens
        for i, token in enumerate(tokens):
            if token.is_sentinel or token.class_label == token.true_label:
                continue
            if not allowed(token.class_label, token.true_label):
                continue
            for template in templates:
                for atoms in _bind(tokens, i, template):
                    candidates.add(
                        TransformationRule(
                            tuple(Atom(*a) for a in atoms),
                            token.class_label,
                            token.true_label,
                        )
                    )
    return candidates


def apply_rule(rule: TransformationRule, corpus: Corpus) -> Corpus:
    """Rewrite class_label to to_class at every matching position."""
    atoms = _raw_atoms(rule)
    sentences = []
    for sentence in corpus.sentences:
        tokens = list(sentence.tokens)
        hits = [
            i
            for i, t in enumerate(tokens)
            if not t.is_sentinel
            and t.class_label == rule.from_class
            and _atoms_match(tokens, i, atoms)
        ]
        for i in hits:
            tokens[i] = replace(tokens[i], class_label=rule.to_class)
        sentences.append(Sentence([t for t in tokens if not t.is_sentinel]))
    return Corpus(sentences, name=corpus.name)


# -- the greedy learning loop ------------------------------------------------


def _canonical_cond_text(from_class: str, atoms, to_class: str) -> str:
    parts = [f"CLASS={from_class}"]
    parts.extend(_format_atom(a) for a in atoms)
    return " ∧ ".join(parts) + f" => {to_class}"


class _LearnState:
    """Candidate bookkeeping for the greedy loop.

    good[(cond, to)] counts error positions generating the condition with that
    true label; matches[cond] counts all positions where the condition holds.
    A condition is a (from_class, raw-atom tuple) pair; positions generate
    exactly the conditions that match there, so counts stay exact under the
    incremental per-position updates done after each rule application.
    """

    def __init__(self, work, templates, allowed):
        self.work = work  # list of token lists (with sentinels), mutated in place
        self.templates = templates
        self.allowed = allowed
        self.good: dict[tuple, int] = {}
        self.matches: dict[tuple, int] = {}
        self.pos_by_class: dict[str, set[tuple[int, int]]] = {}

        positions = []
        for si, tokens in enumerate(work):
            for ti, token in enumerate(tokens):
                if token.is_sentinel:
                    continue
                positions.append((si, ti))
                self.pos_by_class.setdefault(token.class_label, set()).add((si, ti))
        for si, ti in positions:
            token = work[si][ti]
            if token.class_label != token.true_label and allowed(
                token.class_label, token.true_label
            ):
                for cond in self._conds_at(si, ti):
                    key = (cond, token.true_label)
                    self.good[key] = self.good.get(key, 0) + 1
        for cond, _to in self.good:
            self.matches.setdefault(cond, 0)
        for si, ti in positions:
            for cond in self._conds_at(si, ti):
                if cond in self.matches:
                    self.matches[cond] += 1

    def _conds_at(self, si: int, ti: int):
        tokens = self.work[si]
        from_class = tokens[ti].class_label
        seen = set()
        for template in self.templates:
            for atoms in _bind(tokens, ti, template):
                cond = (from_class, atoms)
                if cond not in seen:
                    seen.add(cond)
                    yield cond

    def select(self) -> tuple[tuple | None, int]:
        """Max-score candidate; ties broken by smallest canonical rule text."""
        best = None
        best_score = 0
        best_text = None
        for (cond, to), g in self.good.items():
            if g <= 0:
                continue
            score = 2 * g - self.matches[cond]
            if best is None or score > best_score:
                best, best_score, best_text = (cond, to), score, None
            elif score == best_score:
                if best_text is None:
                    best_text = _canonical_cond_text(best[0][0], best[0][1], best[1])
                text = _canonical_cond_text(cond[0], cond[1], to)
                if text < best_text:
                    best, best_text = (cond, to), text
        return best, best_score

    def _is_error(self, token) -> bool:
        return token.class_label != token.true_label and self.allowed(
            token.class_label, token.true_label
        )

    def apply(self, cond: tuple, to_class: str) -> list[tuple[int, int]]:
        from_class, atoms = cond
        matched = sorted(
            p
            for p in self.pos_by_class.get(from_class, ())
            if _atoms_match(self.work[p[0]], p[1], atoms)
        )
        # remove stale contributions (old class labels)
        for si, ti in matched:
            token = self.work[si][ti]
            error = self._is_error(token)
            for c in self._conds_at(si, ti):
                if error:
                    self.good[(c, token.true_label)] -= 1
                if c in self.matches:
                    self.matches[c] -= 1
        # rewrite
        for si, ti in matched:
            token = self.work[si][ti]
            self.pos_by_class[token.class_label].discard((si, ti))
            self.work[si][ti] = replace(token, class_label=to_class)
            self.pos_by_class.setdefault(to_class, set()).add((si, ti))
        # add fresh contributions; new tracked conditions get a full recount
        new_conds = []
        for si, ti in matched:
            token = self.work[si][ti]
            error = self._is_error(token)
            for c in self._conds_at(si, ti):
                if error:
                    self.good[(c, token.true_label)] = (
                        self.good.get((c, token.true_label), 0) + 1
                    )
                if c in self.matches:
                    self.matches[c] += 1
                elif error:
                    new_conds.append(c)
        for c in new_conds:
            if c in self.matches:
                continue
            from_c, atoms = c
            self.matches[c] = sum(
                1
                for p in self.pos_by_class.get(from_c, ())
                if _atoms_match(self.work[p[0]], p[1], atoms)
            )
        return matched


def learn(corpus: Corpus, config: LearnerConfig) -> list[TransformationRule]:
    """Greedy TBL: repeatedly select the highest-scoring candidate rule, apply
    it to the working corpus, and record it with its at-selection counts.
    Stops when the best score drops below the threshold."""
    work = [list(sentence.tokens) for sentence in corpus.sentences]
    state = _LearnState(work, config.templates, _pair_filter(config.sets))
    rules: list[TransformationRule] = []
    while config.max_rules is None or len(rules) < config.max_rules:
        best, score = state.select()
        if best is None or score < config.threshold:
            break
        (from_class, atoms), to_class = best
        good = state.good[best]
        bad = state.matches[(from_class, atoms)] - good
        rules.append(
            TransformationRule(
                tuple(Atom(*a) for a in atoms), from_class, to_class, good, bad, score
            )
        )
        state.apply((from_class, atoms), to_class)
    return rules
