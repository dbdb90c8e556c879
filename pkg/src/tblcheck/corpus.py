"""Corpus representation: tokenization, ERR markup parsing, column-format I/O,
and lexicon-based POS tagging.

Sentences are normalized to carry SENT_START / SENT_END sentinel tokens so that
context rules can refer to positions beyond the first or last word.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field, replace

SENT_START = "SENT_START"
SENT_END = "SENT_END"
NULL = "NULL"
UNK_TAG = "UNK"

_TERMINAL_PUNCT = set(".,!?;:")
_SENTENCE_END = set(".!?")


class MarkupError(ValueError):
    """Malformed ERR markup."""


class ColumnFormatError(ValueError):
    """Malformed column-corpus file."""


@dataclass
class Token:
    """One token: surface form, POS tag, learnable class label and its gold value.

    For clean unannotated text, class_label == true_label == surface.
    """

    surface: str
    tag: str = UNK_TAG
    class_label: str = ""
    true_label: str = ""
    is_sentinel: bool = False

    def __post_init__(self):
        if self.class_label == "":
            self.class_label = self.surface
        if self.true_label == "":
            self.true_label = self.surface

    @property
    def is_error(self) -> bool:
        return not self.is_sentinel and self.class_label != self.true_label


def sentinel(name: str) -> Token:
    return Token(name, name, name, name, is_sentinel=True)


@dataclass
class Sentence:
    tokens: list[Token]

    def __post_init__(self):
        self.tokens = _normalize(self.tokens)

    def content(self) -> list[Token]:
        """Tokens without the sentinels."""
        return [t for t in self.tokens if not t.is_sentinel]

    def __len__(self) -> int:
        return len(self.tokens)


def _normalize(tokens: list[Token]) -> list[Token]:
    inner = [t for t in tokens if not t.is_sentinel]
    return [sentinel(SENT_START)] + inner + [sentinel(SENT_END)]


@dataclass
class Corpus:
    sentences: list[Sentence] = field(default_factory=list)
    name: str = ""

    def token_count(self) -> int:
        return sum(len(s.content()) for s in self.sentences)

    def iter_tokens(self):
        """Yield (sentence_index, token_index, token) for non-sentinel tokens."""
        for si, sentence in enumerate(self.sentences):
            for ti, token in enumerate(sentence.tokens):
                if not token.is_sentinel:
                    yield si, ti, token

    def error_count(self) -> int:
        return sum(1 for _, _, t in self.iter_tokens() if t.is_error)


def _split_chunk(chunk: str) -> list[str]:
    """Split trailing punctuation off a whitespace-delimited chunk.

    Word-internal apostrophes and hyphens stay inside the token.
    """
    tail = []
    core = chunk
    while core and core[-1] in _TERMINAL_PUNCT:
        tail.append(core[-1])
        core = core[:-1]
    parts = [core] if core else []
    parts.extend(reversed(tail))
    return parts


def _is_punct(part: str) -> bool:
    return len(part) == 1 and part in _TERMINAL_PUNCT


def _chunks_to_sentences(chunks: list[tuple[str, object]]) -> list[list[tuple[str, object]]]:
    """Group (chunk, meta) pairs into sentences of (surface, meta) pairs.

    A sentence ends at . ! ? followed by a capitalized chunk or end of input.
    Punctuation split off a chunk does not inherit the chunk's meta.
    """
    sentences: list[list[tuple[str, object]]] = []
    current: list[tuple[str, object]] = []
    for idx, (chunk, meta) in enumerate(chunks):
        parts = _split_chunk(chunk)
        for part in parts:
            current.append((part, None if _is_punct(part) else meta))
        nxt = chunks[idx + 1][0] if idx + 1 < len(chunks) else None
        if parts and parts[-1] in _SENTENCE_END and (nxt is None or nxt[:1].isupper()):
            sentences.append(current)
            current = []
    if current:
        sentences.append(current)
    return sentences


def tokenize(text: str, name: str = "") -> list[Sentence]:
    """Split raw text into normalized sentences of tokens."""
    chunks = [(c, None) for c in text.split()]
    groups = _chunks_to_sentences(chunks)
    return [Sentence([Token(surface) for surface, _ in group]) for group in groups]


@dataclass
class ErrAnnotation:
    """One ERR-markup annotation: an observed span and its suggested correction."""

    span: tuple[int, int]  # inclusive range of global (non-sentinel) token indices
    observed: str
    target: str
    usable: bool = True  # single observed token and single-word target


_ERR_OPEN = re.compile(r"<ERR\s+targ=([^>]*)>")


def parse_err_markup(text: str, name: str = "") -> tuple[Corpus, list[ErrAnnotation]]:
    """Parse text with ``<ERR targ=X> Y </ERR>`` markup into a corpus plus annotations.

    Single-token spans with a single-word target set that token's true_label;
    multi-token cases are kept as annotations flagged unusable. Annotations whose
    observed text equals the target are dropped.
    """
    segments: list[tuple[str, str | None]] = []
    pos = 0
    while True:
        start = text.find("<ERR", pos)
        if start == -1:
            segments.append((text[pos:], None))
            break
        segments.append((text[pos:start], None))
        line = text.count("\n", 0, start) + 1
        m = _ERR_OPEN.match(text, start)
        if m is None:
            raise MarkupError(f"line {line}: ERR tag missing targ attribute")
        close = text.find("</ERR>", m.end())
        if close == -1:
            raise MarkupError(f"line {line}: unclosed ERR tag")
        segments.append((text[m.end():close], m.group(1).strip()))
        pos = close + len("</ERR>")

    chunks: list[tuple[str, object]] = []
    targets: list[str] = []
    for segtext, targ in segments:
        words = segtext.split()
        if targ is None:
            chunks.extend((w, None) for w in words)
        else:
            aid = len(targets)
            targets.append(targ)
            chunks.extend((w, aid) for w in words)

    groups = _chunks_to_sentences(chunks)
    sentences = []
    spans: dict[int, list[tuple[int, Token]]] = {aid: [] for aid in range(len(targets))}
    global_index = 0
    for group in groups:
        tokens = []
        for surface, meta in group:
            token = Token(surface)
            tokens.append(token)
            if meta is not None:
                spans[meta].append((global_index, token))
            global_index += 1
        sentences.append(Sentence(tokens))

    annotations = []
    for aid, targ in enumerate(targets):
        covered = spans[aid]
        if not covered:
            continue
        observed = " ".join(token.surface for _, token in covered)
        if observed == targ:
            continue
        usable = len(covered) == 1 and len(targ.split()) == 1
        if usable:
            covered[0][1].true_label = targ
        annotations.append(
            ErrAnnotation((covered[0][0], covered[-1][0]), observed, targ, usable)
        )
    return Corpus(sentences, name=name), annotations


def dump_column_corpus(corpus: Corpus) -> str:
    """Serialize a corpus in the 4-column TSV format (SURFACE TAG CLASS TRUE)."""
    blocks = []
    for sentence in corpus.sentences:
        lines = [
            "\t".join((t.surface, t.tag, t.class_label, t.true_label))
            for t in sentence.content()
        ]
        blocks.append("\n".join(lines))
    if not blocks:
        return ""
    return "\n\n".join(blocks) + "\n"


def parse_column_corpus(text: str, name: str = "") -> Corpus:
    sentences: list[Sentence] = []
    current: list[Token] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            if current:
                sentences.append(Sentence(current))
                current = []
            continue
        cols = line.split("\t")
        if len(cols) == 4:
            surface, tag, cls, true = cols
        elif len(cols) == 3:
            surface, cls, true = cols
            tag = UNK_TAG
        else:
            raise ColumnFormatError(
                f"line {lineno}: expected 3 or 4 tab-separated columns, got {len(cols)}"
            )
        if surface in (SENT_START, SENT_END) and surface == tag == cls == true:
            continue  # sentinels are re-added by normalization
        current.append(Token(surface, tag, cls, true))
    if current:
        sentences.append(Sentence(current))
    return Corpus(sentences, name=name)


def save_column_corpus(corpus: Corpus, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(dump_column_corpus(corpus))


def load_column_corpus(path: str) -> Corpus:
    with open(path, encoding="utf-8", newline="") as f:
        text = f.read()
    name = os.path.splitext(os.path.basename(path))[0]
    return parse_column_corpus(text, name=name)


class Lexicon:
    """Surface form -> ranked (tag, frequency) list; ranked by descending
    frequency with lexicographic tie-break."""

    def __init__(self):
        self._counts: dict[str, dict[str, int]] = {}

    def add(self, surface: str, tag: str, count: int = 1) -> None:
        if count <= 0:
            raise ValueError(f"lexicon frequency must be positive: {surface}/{tag}={count}")
        self._counts.setdefault(surface, {})
        self._counts[surface][tag] = self._counts[surface].get(tag, 0) + count

    def tags(self, surface: str) -> list[tuple[str, int]]:
        counts = self._counts.get(surface, {})
        return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))

    def best_tag(self, surface: str) -> str | None:
        """Top-ranked tag: case-sensitive lookup, then lowercased fallback."""
        ranked = self.tags(surface)
        if not ranked:
            ranked = self.tags(surface.lower())
        return ranked[0][0] if ranked else None

    def __len__(self) -> int:
        return len(self._counts)

    @classmethod
    def from_file(cls, path: str) -> "Lexicon":
        lex = cls()
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                cols = line.rstrip("\n").split("\t")
                if len(cols) != 3:
                    raise ColumnFormatError(
                        f"{path}:{lineno}: lexicon lines are surface<TAB>tag<TAB>count"
                    )
                surface, tag, count = cols
                try:
                    lex.add(surface, tag, int(count))
                except ValueError as exc:
                    raise ColumnFormatError(f"{path}:{lineno}: {exc}") from exc
        return lex


def tag_corpus(corpus: Corpus, lexicon: Lexicon) -> Corpus:
    """Assign each token its most frequent lexicon tag; unknown words get UNK.

    No contextual disambiguation. Sentinels and NULL placeholders keep their tags.
    """
    sentences = []
    for sentence in corpus.sentences:
        tokens = []
        for token in sentence.content():
            if token.surface == NULL:
                tokens.append(replace(token, tag=NULL))
                continue
            tag = lexicon.best_tag(token.surface) or UNK_TAG
            tokens.append(replace(token, tag=tag))
        sentences.append(Sentence(tokens))
    return Corpus(sentences, name=corpus.name)
