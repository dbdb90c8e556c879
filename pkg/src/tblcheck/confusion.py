"""Confusion sets, character-confusion typo models, and error seeding.

Seeding corrupts a clean corpus by swapping confusion-set members while moving
the original word into the true label, so that rule learning can recover it.
Two extra devices are provided: NULL placeholders for missing words and
composite run-on forms (join marker "-") for split/join errors.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import NULL, UNK_TAG, Corpus, ErrAnnotation, Lexicon, Sentence, Token

JOIN_MARKER = "-"

REPLACE_ALL = "replace-all"
ROUND_ROBIN = "round-robin"
SAMPLE = "sample"


class SeedError(ValueError):
    """Invalid seeding input (ambiguous sets, non-clean corpus, malformed set)."""


@dataclass(frozen=True)
class ConfusionSet:
    """A set of >= 2 mutually confusable forms, in a stable order.

    Order matters for deterministic seeding: alternatives are tried in member
    order. A member may be the NULL placeholder or a composite run-on form.
    """

    members: tuple[str, ...]

    def __post_init__(self):
        if len(self.members) < 2:
            raise ValueError(f"confusion set needs >= 2 members: {self.members}")
        if len(set(self.members)) != len(self.members):
            raise ValueError(f"duplicate members in confusion set: {self.members}")
        if any(not m for m in self.members):
            raise ValueError("empty member in confusion set")
        if sum(1 for m in self.members if m == NULL) > 1:
            raise ValueError("NULL may appear at most once in a confusion set")

    def __contains__(self, form: str) -> bool:
        return form in self.members

    def alternatives(self, form: str) -> tuple[str, ...]:
        return tuple(m for m in self.members if m != form)

    def format(self) -> str:
        return ",".join(self.members)

    @classmethod
    def parse(cls, line: str) -> "ConfusionSet":
        return cls(tuple(m.strip() for m in line.split(",") if m.strip()))


def save_confusion_sets(sets: list[ConfusionSet], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for cs in sets:
            f.write(cs.format() + "\n")


def load_confusion_sets(path: str) -> list[ConfusionSet]:
    sets = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                sets.append(ConfusionSet.parse(line))
    return sets


@dataclass
class CharConfusionModel:
    """Weighted single-character substitutions typical of one input channel."""

    replacements: dict[str, list[tuple[str, float]]]
    kind: str = "custom"

    def __post_init__(self):
        for source, repls in self.replacements.items():
            for target, weight in repls:
                if weight <= 0:
                    raise ValueError(f"non-positive weight for {source}->{target}")
                if target == source:
                    raise ValueError(f"self-replacement for {source!r}")

    @classmethod
    def qwerty(cls) -> "CharConfusionModel":
        """Physical neighbors on a QWERTY layout, weight 1 each."""
        table = {
            "q": "wa", "w": "qesa", "e": "wrds", "r": "etfd", "t": "rygf",
            "y": "tuhg", "u": "yijh", "i": "uokj", "o": "iplk", "p": "ol",
            "a": "qwsz", "s": "awedxz", "d": "serfcx", "f": "drtgvc",
            "g": "ftyhbv", "h": "gyujnb", "j": "huikmn", "k": "jiolm",
            "l": "kop", "z": "asx", "x": "zsdc", "c": "xdfv", "v": "cfgb",
            "b": "vghn", "n": "bhjm", "m": "njk",
        }
        repls = {src: [(t, 1.0) for t in targets] for src, targets in table.items()}
        return cls(repls, kind="keyboard")

    @classmethod
    def ocr(cls) -> "CharConfusionModel":
        """Glyph confusions in typical typefaces (single-character only)."""
        table = {"l": "1", "1": "l", "O": "0", "0": "O"}
        repls = {src: [(t, 1.0) for t in targets] for src, targets in table.items()}
        return cls(repls, kind="ocr")

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for source in sorted(self.replacements):
                for target, weight in self.replacements[source]:
                    f.write(f"{source}\t{target}\t{weight:g}\n")

    @classmethod
    def from_file(cls, path: str, kind: str = "custom") -> "CharConfusionModel":
        repls: dict[str, list[tuple[str, float]]] = {}
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                cols = line.rstrip("\n").split("\t")
                if len(cols) != 3:
                    raise ValueError(
                        f"{path}:{lineno}: model lines are source<TAB>replacement<TAB>weight"
                    )
                source, target, weight = cols
                repls.setdefault(source, []).append((target, float(weight)))
        return cls(repls, kind=kind)


@dataclass(frozen=True)
class SeedPolicy:
    """How occurrences of confusion-set members are corrupted.

    replace-all corrupts every occurrence; round-robin cycles through the
    alternatives per set; sample corrupts each occurrence with probability
    `rate` using the explicit `seed`.
    """

    mode: str = REPLACE_ALL
    rate: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (REPLACE_ALL, ROUND_ROBIN, SAMPLE):
            raise ValueError(f"unknown seed policy mode: {self.mode}")
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"replacement rate out of [0,1]: {self.rate}")


def extract_confusion_sets(
    annotations: list[ErrAnnotation], dictionary: set[str] | None = None
) -> list[ConfusionSet]:
    """Distinct {target, observed} pairs from error annotations.

    Pairs sharing a member are kept as separate two-element sets. With a
    dictionary, pairs containing any non-dictionary member are dropped (those
    errors are already flagged by ordinary spell checkers). Only single-token
    annotations contribute. Output is sorted for determinism.
    """
    pairs = set()
    for ann in annotations:
        if not ann.usable or ann.observed == ann.target:
            continue
        pairs.add((ann.target, ann.observed))
    return _filter_and_sort(pairs, dictionary)


def extract_pairs_from_corpus(
    corpus: Corpus, dictionary: set[str] | None = None
) -> list[ConfusionSet]:
    """Confusion pairs (true_label, class_label) read off an annotated corpus."""
    pairs = set()
    for _, _, token in corpus.iter_tokens():
        if token.is_error:
            pairs.add((token.true_label, token.class_label))
    return _filter_and_sort(pairs, dictionary)


def _filter_and_sort(
    pairs: set[tuple[str, str]], dictionary: set[str] | None
) -> list[ConfusionSet]:
    sets = [ConfusionSet(pair) for pair in pairs]
    if dictionary is not None:
        sets = [cs for cs in sets if all(m in dictionary for m in cs.members)]
    return sorted(sets, key=lambda cs: cs.members)


def generate_typo_variants(
    word: str, model: CharConfusionModel, dictionary: set[str] | None = None
) -> list[ConfusionSet]:
    """Single-substitution variants of `word` under the model, as {word, variant} pairs.

    With a dictionary, only real-word variants are kept.
    """
    if not word:
        raise ValueError("word must be non-empty")
    seen = set()
    out = []
    for i, ch in enumerate(word):
        for target, _weight in model.replacements.get(ch, []):
            variant = word[:i] + target + word[i + 1:]
            if variant == word or variant in seen:
                continue
            if dictionary is not None and variant not in dictionary:
                continue
            seen.add(variant)
            out.append(ConfusionSet((word, variant)))
    return out


def _member_index(sets: list[ConfusionSet]) -> dict[str, int]:
    index: dict[str, int] = {}
    for i, cs in enumerate(sets):
        for member in cs.members:
            if member == NULL:
                continue
            if member in index and index[member] != i:
                raise SeedError(
                    f"surface {member!r} belongs to two confusion sets: "
                    f"{{{sets[index[member]].format()}}} and {{{cs.format()}}}"
                )
            index[member] = i
    return index


def _require_clean(corpus: Corpus) -> None:
    for si, ti, token in corpus.iter_tokens():
        if token.is_error:
            raise SeedError(
                f"corpus {corpus.name!r} is not clean: token {token.surface!r} "
                f"already carries true label {token.true_label!r}"
            )


def seed_errors(
    clean: Corpus,
    sets: list[ConfusionSet],
    policy: SeedPolicy = SeedPolicy(),
    lexicon: Lexicon | None = None,
) -> Corpus:
    """Corrupt confusion-set member occurrences in a clean corpus.

    Corrupted tokens get surface/class_label set to another member and
    true_label set to the original word. With a lexicon, the tag is re-looked-up
    for the corrupted surface; otherwise the original tag is kept.
    """
    _require_clean(clean)
    index = _member_index(sets)
    cursors = [0] * len(sets)
    rng = random.Random(policy.seed)
    sentences = []
    for sentence in clean.sentences:
        tokens = []
        for token in sentence.content():
            set_id = index.get(token.surface)
            if set_id is None:
                tokens.append(token)
                continue
            alternatives = sets[set_id].alternatives(token.surface)
            if policy.mode == REPLACE_ALL:
                alt = alternatives[0]
            elif policy.mode == ROUND_ROBIN:
                alt = alternatives[cursors[set_id] % len(alternatives)]
                cursors[set_id] += 1
            else:
                if rng.random() >= policy.rate:
                    tokens.append(token)
                    continue
                alt = alternatives[rng.randrange(len(alternatives))]
            if alt == NULL:
                tag = NULL
            elif lexicon is not None:
                tag = lexicon.best_tag(alt) or UNK_TAG
            else:
                tag = token.tag
            tokens.append(Token(alt, tag, alt, token.surface))
        sentences.append(Sentence(tokens))
    return Corpus(sentences, name=clean.name)


def _null_token(true_label: str) -> Token:
    return Token(NULL, NULL, NULL, true_label)


def seed_missing_word(clean: Corpus, word: str) -> Corpus:
    """Replace every occurrence of `word` with a NULL placeholder (true_label =
    the word) and fill every other inter-token gap with a negative NULL
    placeholder (true_label = NULL)."""
    sentences = []
    for sentence in clean.sentences:
        content = sentence.content()
        if not content:
            sentences.append(Sentence([]))
            continue
        tokens: list[Token] = []
        for token in content:
            if token.surface == word:
                tokens.append(_null_token(word))
                continue
            if not tokens or tokens[-1].surface != NULL:
                tokens.append(_null_token(NULL))
            tokens.append(token)
        if tokens[-1].surface != NULL:
            tokens.append(_null_token(NULL))
        sentences.append(Sentence(tokens))
    return Corpus(sentences, name=clean.name)


def _runon_parts(cs: ConfusionSet) -> tuple[str, str]:
    """(composite, joined) members of a run-on pair, validated."""
    if len(cs.members) != 2:
        raise SeedError(f"run-on set must have exactly two members: {{{cs.format()}}}")
    composite = [m for m in cs.members if JOIN_MARKER in m]
    joined = [m for m in cs.members if JOIN_MARKER not in m]
    if len(composite) != 1 or len(joined) != 1:
        raise SeedError(
            f"run-on set needs one composite (with '{JOIN_MARKER}') and one "
            f"joined member: {{{cs.format()}}}"
        )
    return composite[0], joined[0]


def seed_runon_splits(clean: Corpus, pairs: list[ConfusionSet]) -> Corpus:
    """Replace joined words by composite run-on tokens (class = composite form,
    true = joined word)."""
    mapping: dict[str, str] = {}
    for cs in pairs:
        composite, joined = _runon_parts(cs)
        if joined in mapping and mapping[joined] != composite:
            raise SeedError(f"word {joined!r} belongs to two run-on sets")
        mapping[joined] = composite
    sentences = []
    for sentence in clean.sentences:
        tokens = []
        for token in sentence.content():
            composite = mapping.get(token.surface)
            if composite is None:
                tokens.append(token)
            else:
                tokens.append(Token(composite, token.tag, composite, token.surface))
        sentences.append(Sentence(tokens))
    return Corpus(sentences, name=clean.name)
