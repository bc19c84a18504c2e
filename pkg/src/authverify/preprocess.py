"""Raw text to padded numeric encoder input.

Pipeline: noise normalization with universal tokens, rule-based sentence
segmentation, tokenization, embedding lookup, truncation and padding to
fixed (max sentences, max words per sentence) bounds.

The normalization and segmentation rules are deliberately simple,
versioned patterns (no external NLP dependency):

* URLs, email addresses and phone numbers become the universal tokens
  ``<url>``, ``<email>`` and ``<phone>``; trailing sentence punctuation
  is kept outside the replacement so segmentation still sees it.  A
  phone number is a digit sequence with common separators carrying 7-15
  digits in total.
* Sentences split after ``.``, ``!`` or ``?`` (plus closing quotes or
  brackets) when followed by whitespace and an uppercase letter, a
  digit or an opening quote, or at end of text.  Newlines are hard
  boundaries.  A single ``.`` does not split after a known abbreviation
  (see ABBREVIATIONS) or a single uppercase initial.
* Tokens are runs of word characters, single punctuation marks, or the
  universal tokens kept atomic.
* Truncation keeps the prefix: the first max_sentences sentences and the
  first max_words tokens of each sentence.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingTable

__all__ = [
    "ABBREVIATIONS",
    "VerificationInstance",
    "EncodedDocument",
    "EmptyDocumentError",
    "CorpusFormatError",
    "normalize_text",
    "segment_sentences",
    "tokenize",
    "concatenate_known",
    "encode_document",
    "load_corpus",
    "save_corpus",
]

URL_TOKEN = "<url>"
EMAIL_TOKEN = "<email>"
PHONE_TOKEN = "<phone>"

_URL_RE = re.compile(r"(?:https?://|www\.)[^\s<>]+", re.IGNORECASE)
_EMAIL_RE = re.compile(
    r"[A-Za-z0-9][A-Za-z0-9._%+-]*@[A-Za-z0-9](?:[A-Za-z0-9.-]*[A-Za-z0-9])?"
    r"\.[A-Za-z]{2,}"
)
_PHONE_RE = re.compile(
    r"""
    (?<![\w.+-])                     # not glued to a word or number
    (?:\+\d{1,3}[ -]?)?              # optional country code
    (?:\(\d{1,4}\)[ -]?|\d{1,4}[ -])?   # optional area code
    \d{2,4}[ -]?\d{2,4}(?:[ -]?\d{1,4}){0,2}
    (?![\w-])
    """,
    re.VERBOSE,
)
_YEAR_GROUP_RE = re.compile(r"^(?:19|20)\d\d$")
_TRAILING_PUNCT_RE = re.compile(r"[.,;:!?)\]'\"]+$")

# Words after which a single period never ends a sentence.  Dotted forms
# are matched with their internal dots stripped of the final period only
# ("e.g." -> "e.g").
ABBREVIATIONS = frozenset(
    {
        "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc",
        "e.g", "i.e", "cf", "ca", "al", "fig", "eq", "sec", "no", "vol",
        "pp", "ed", "eds", "inc", "ltd", "co", "corp", "dept", "univ",
        "approx", "resp", "min", "max",
    }
)

_SENT_BOUNDARY_RE = re.compile(r"([.!?]+[\"')\]]*)(\s+|$)")
_TOKEN_RE = re.compile(r"<url>|<email>|<phone>|\w+|[^\w\s]")


class EmptyDocumentError(ValueError):
    """A document normalized and segmented down to nothing."""


class CorpusFormatError(ValueError):
    """A corpus file line is not a valid verification instance."""


def _replace_keeping_trailing_punct(token: str):
    def sub(match: re.Match) -> str:
        matched = match.group(0)
        trail = _TRAILING_PUNCT_RE.search(matched)
        if trail:
            return token + matched[trail.start():]
        return token

    return sub


_url_sub = _replace_keeping_trailing_punct(URL_TOKEN)
_email_sub = _replace_keeping_trailing_punct(EMAIL_TOKEN)


def _looks_like_phone(matched: str) -> bool:
    """Guards against number-like text the candidate regex also matches:
    requires 7-15 digits, rejects year groups (dates) unless the match
    carries a country code, and requires space-only groupings to contain
    one long group (keeps thousand-separated figures intact)."""
    digits = sum(ch.isdigit() for ch in matched)
    if not 7 <= digits <= 15:
        return False
    has_prefix = matched.lstrip().startswith(("+", "("))
    groups = [g for g in re.split(r"[ ()+-]+", matched) if g]
    if not has_prefix and any(_YEAR_GROUP_RE.match(g) for g in groups):
        return False
    if " " in matched and "-" not in matched and not has_prefix:
        if max(len(g) for g in groups) < 5:
            return False
    return True


def _phone_sub(match: re.Match) -> str:
    matched = match.group(0)
    if not _looks_like_phone(matched):
        return matched
    trail = _TRAILING_PUNCT_RE.search(matched)
    if trail:
        return PHONE_TOKEN + matched[trail.start():]
    return PHONE_TOKEN


def normalize_text(raw: str) -> str:
    """Replace URLs, email addresses and phone numbers with universal tokens.

    Everything else is left unchanged; applying the function twice gives
    the same result because the universal tokens match none of the
    patterns.
    """
    text = _URL_RE.sub(_url_sub, raw)
    text = _EMAIL_RE.sub(_email_sub, text)
    text = _PHONE_RE.sub(_phone_sub, text)
    return text


def _is_abbreviation(before: str) -> bool:
    """True when the word ending at a '.' must not close a sentence."""
    word = before.rstrip(".")
    if not word:
        return False
    tail = re.split(r"\s", word)[-1] if word else ""
    tail = tail.strip("(\"'[")
    if not tail:
        return False
    if len(tail) == 1 and tail.isalpha() and tail.isupper():
        return True  # single-letter initial, "J. Smith"
    return tail.lower() in ABBREVIATIONS


def _split_line(line: str) -> list[str]:
    sentences: list[str] = []
    start = 0
    for match in _SENT_BOUNDARY_RE.finditer(line):
        terminator, gap = match.group(1), match.group(2)
        end = match.start() + len(terminator)
        if gap:  # boundary mid-line: require a sentence-opening character
            nxt = line[match.end()] if match.end() < len(line) else ""
            if not (nxt.isupper() or nxt.isdigit() or nxt in "\"'(["):
                continue
        if terminator == "." and _is_abbreviation(line[start:end]):
            continue
        chunk = line[start:end].strip()
        if chunk:
            sentences.append(chunk)
        start = match.end()
    rest = line[start:].strip()
    if rest:
        sentences.append(rest)
    return sentences


def segment_sentences(text: str) -> list[str]:
    """Split text into sentences; whitespace-only pieces are dropped.

    Joining the result (modulo whitespace) reproduces the input; text
    with no terminator at all comes back as a single sentence.
    """
    sentences: list[str] = []
    for line in text.split("\n"):
        sentences.extend(_split_line(line))
    return sentences


def tokenize(sentence: str) -> list[str]:
    """Words, single punctuation marks, and atomic universal tokens."""
    return _TOKEN_RE.findall(sentence)


@dataclass
class VerificationInstance:
    """One verification problem: documents of a known author, a document
    in question, and the label (1 = same author, 0 = different authors)."""

    known_docs: list[str]
    unknown_doc: str
    label: int

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")
        if not self.known_docs:
            raise ValueError("known_docs must be non-empty")


def concatenate_known(instance: VerificationInstance, order: list[int]) -> str:
    """Join the known documents in the given order with newline separators.

    The newline keeps segmentation from ever merging sentences across
    document boundaries.  `order` must be a permutation of the document
    indices.
    """
    n = len(instance.known_docs)
    if sorted(order) != list(range(n)):
        raise ValueError(f"order {order!r} is not a permutation of range({n})")
    return "\n".join(instance.known_docs[k] for k in order)


@dataclass
class EncodedDocument:
    """Padded numeric form of one document.

    words: (max_sentences, max_words, dim) tensor, zero in every padded
    position.  sent_lengths holds the true token count of each real
    sentence; num_sentences is the true sentence count.
    """

    words: np.ndarray
    sent_lengths: np.ndarray
    num_sentences: int
    token_count: int = 0
    oov_count: int = 0

    def __post_init__(self) -> None:
        if self.words.ndim != 3:
            raise ValueError(f"words must be 3-D, got shape {self.words.shape}")
        if not 1 <= self.num_sentences <= self.words.shape[0]:
            raise ValueError(
                f"num_sentences {self.num_sentences} outside [1, {self.words.shape[0]}]"
            )
        if self.sent_lengths.shape != (self.num_sentences,):
            raise ValueError(
                f"sent_lengths shape {self.sent_lengths.shape} must be "
                f"({self.num_sentences},)"
            )
        if np.any(self.sent_lengths < 1) or np.any(
            self.sent_lengths > self.words.shape[1]
        ):
            raise ValueError("per-sentence lengths must lie in [1, max_words]")

    @property
    def max_sentences(self) -> int:
        return self.words.shape[0]

    @property
    def max_words(self) -> int:
        return self.words.shape[1]

    @property
    def dim(self) -> int:
        return self.words.shape[2]


def encode_document(
    text: str,
    table: EmbeddingTable,
    max_words: int,
    max_sentences: int,
    dtype=np.float64,
) -> EncodedDocument:
    """Normalize, segment, tokenize, and resolve a document to its padded
    tensor of word vectors.

    Keeps the first max_sentences sentences and the first max_words
    tokens of each; the output shape is always exactly
    (max_sentences, max_words, table.dim).
    """
    if max_words < 1 or max_sentences < 1:
        raise ValueError("max_words and max_sentences must be >= 1")
    sentences = segment_sentences(normalize_text(text))
    if not sentences:
        raise EmptyDocumentError("empty document")
    sentences = sentences[:max_sentences]
    words = np.zeros((max_sentences, max_words, table.dim), dtype=dtype)
    lengths = np.zeros(len(sentences), dtype=np.int64)
    token_count = 0
    oov_before = table.oov_count
    for k, sentence in enumerate(sentences):
        tokens = tokenize(sentence)[:max_words]
        lengths[k] = len(tokens)
        token_count += len(tokens)
        for t, token in enumerate(tokens):
            words[k, t] = table.lookup(token)
    return EncodedDocument(
        words=words,
        sent_lengths=lengths,
        num_sentences=len(sentences),
        token_count=token_count,
        oov_count=table.oov_count - oov_before,
    )


def load_corpus(path: str) -> list[VerificationInstance]:
    """Read a corpus file: one JSON object per line with fields `known`
    (array of strings), `unknown` (string) and `label` (0 or 1)."""
    instances: list[VerificationInstance] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"invalid JSON at line {lineno}: {exc}") from None
            if not isinstance(obj, dict):
                raise CorpusFormatError(f"line {lineno} is not a JSON object")
            known = obj.get("known")
            unknown = obj.get("unknown")
            label = obj.get("label")
            if (
                not isinstance(known, list)
                or not known
                or not all(isinstance(d, str) for d in known)
            ):
                raise CorpusFormatError(
                    f"line {lineno}: `known` must be a non-empty array of strings"
                )
            if not isinstance(unknown, str):
                raise CorpusFormatError(f"line {lineno}: `unknown` must be a string")
            if label not in (0, 1):
                raise CorpusFormatError(f"line {lineno}: `label` must be 0 or 1")
            instances.append(VerificationInstance(list(known), unknown, label))
    return instances


def save_corpus(instances: list[VerificationInstance], path: str) -> None:
    """Write instances in the line-JSON corpus format, UTF-8, one per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(
                json.dumps(
                    {
                        "known": inst.known_docs,
                        "unknown": inst.unknown_doc,
                        "label": inst.label,
                    },
                    ensure_ascii=False,
                )
            )
            fh.write("\n")
