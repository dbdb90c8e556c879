import random

import pytest

from tblcheck.corpus import Corpus, Lexicon, Sentence, Token, tokenize

HOLBROOK_EXCERPT = (
    "15 NOVEMBER 1960 The Redex Jack O'Malley: Boss George Green 2 "
    "Head John Young 2 head went <ERR targ=two> to </ERR> the "
    "<ERR targ=pictures> pictyres </ERR> and hit the <ERR "
    "targ=manager> maneger </ERR> and he went down the <ERR "
    "targ=stairs> stars </ERR> and hit a <ERR targ=woman> women "
    "</ERR> and <ERR targ=she> he </ERR> fainted We home."
)


@pytest.fixture
def holbrook_text():
    return HOLBROOK_EXCERPT


@pytest.fixture
def small_lexicon():
    lex = Lexicon()
    for surface, tag, count in [
        ("the", "DT", 100),
        ("a", "DT", 80),
        ("end", "NN", 60),
        ("end", "VB", 40),
        ("and", "CC", 90),
        ("advice", "NN", 30),
        ("advise", "VB", 25),
        ("he", "PRP", 50),
        ("she", "PRP", 45),
        ("went", "VBD", 20),
        ("road", "NN", 15),
        ("I", "PRP", 40),
    ]:
        lex.add(surface, tag, count)
    return lex


def make_corpus(sentences_words, name="fixture"):
    """Corpus from lists of surface words (clean: class == true == surface)."""
    return Corpus([Sentence([Token(w) for w in words]) for words in sentences_words], name=name)


def make_annotated(sentences_specs, name="fixture"):
    """Corpus from lists of (surface, tag, class, true) tuples."""
    return Corpus(
        [Sentence([Token(*spec) for spec in specs]) for specs in sentences_specs],
        name=name,
    )


SYNTHETIC_PAIRS = [
    ("two", "to"),
    ("there", "their"),
    ("advice", "advise"),
    ("woman", "women"),
    ("end", "and"),
]

_FILLER = [
    "he", "saw", "it", "near", "home", "later", "big", "small", "house",
    "garden", "walked", "spoke", "about", "old", "friend", "yesterday",
]


def _synthetic_sentence(rng, member):
    words = [rng.choice(_FILLER) for _ in range(rng.randrange(3, 7))]
    words.insert(rng.randrange(len(words) + 1), member)
    return words


def synthetic_clean_corpus(reps, seed, name):
    """Deterministic clean corpus covering every confusable member `reps` times."""
    rng = random.Random(seed)
    sentences = []
    for _ in range(reps):
        for pair in SYNTHETIC_PAIRS:
            for member in pair:
                sentences.append(_synthetic_sentence(rng, member))
    return make_corpus(sentences, name=name)


def synthetic_error_text():
    """Small error corpus: per pair, two errors in a 'qux' context that never
    occurs in the clean corpora, plus four correct uses of the observed form."""
    lines = []
    for correct, wrong in SYNTHETIC_PAIRS:
        for _ in range(2):
            lines.append(f"he said qux <ERR targ={correct}> {wrong} </ERR> again")
        for _ in range(4):
            lines.append(f"the {wrong} thing happened there yesterday okay fine")
    return "\n".join(lines)


def random_annotated_corpus(rng: random.Random, max_tokens: int = 200) -> Corpus:
    """Small corpus with random error sites, for oracle comparisons."""
    vocab = ["the", "cat", "dog", "sat", "ran", "on", "mat", "end", "and", "to", "two"]
    tags = ["DT", "NN", "VB", "IN", "UNK"]
    budget = rng.randrange(10, max_tokens)
    sentences = []
    while budget > 0:
        length = min(rng.randrange(2, 9), budget)
        budget -= length
        tokens = []
        for _ in range(length):
            surface = rng.choice(vocab)
            true = surface
            if rng.random() < 0.25:
                true = rng.choice([w for w in vocab if w != surface])
            tokens.append(Token(surface, rng.choice(tags), surface, true))
        sentences.append(Sentence(tokens))
    return Corpus(sentences, name="random")
