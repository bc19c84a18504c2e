"""Two-level document encoder.

Level 1 maps each sentence's word vectors to a sentence embedding (the
word LSTM's final hidden state under freezing); level 2 runs over the
sentence embeddings and its final hidden state is the document embedding.
Both levels start from zero states.  Variational dropout masks, when
given, multiply the input and recurrent activations at every step of a
sequence; one level-1 mask pair is shared by all sentences of a document.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lstm import LstmParams, LstmState, LstmTape, lstm_backward, lstm_run_frozen
from .numeric import ShapeError
from .preprocess import EncodedDocument

__all__ = [
    "EncoderParams",
    "DropoutMasks",
    "DocumentTape",
    "init_encoder_params",
    "sample_dropout_masks",
    "encode_sentence",
    "encode_document",
    "encode_document_training",
    "encoder_backward",
]


@dataclass
class EncoderParams:
    """Parameters of both hierarchy levels.

    level1: words -> sentence cell (d_in = word dim, d_out = sentence dim).
    level2: sentences -> document cell (d_in = sentence dim, d_out = doc dim).
    """

    level1: LstmParams
    level2: LstmParams

    def __post_init__(self) -> None:
        if self.level2.d_in != self.level1.d_out:
            raise ShapeError(
                f"level2 input dim {self.level2.d_in} must equal "
                f"level1 output dim {self.level1.d_out}"
            )

    @property
    def d_w(self) -> int:
        return self.level1.d_in

    @property
    def d_s(self) -> int:
        return self.level1.d_out

    @property
    def d_d(self) -> int:
        return self.level2.d_out

    def arrays(self) -> dict[str, np.ndarray]:
        """Flat named view of all parameter arrays, in a fixed order."""
        out: dict[str, np.ndarray] = {}
        for level_name, level in (("level1", self.level1), ("level2", self.level2)):
            for key, a in level.arrays().items():
                out[f"{level_name}.{key}"] = a
        return out

    def copy(self) -> "EncoderParams":
        return EncoderParams(self.level1.copy(), self.level2.copy())

    @classmethod
    def zeros(cls, d_w: int, d_s: int, d_d: int, dtype=np.float64) -> "EncoderParams":
        return cls(
            level1=LstmParams.zeros(d_w, d_s, dtype=dtype),
            level2=LstmParams.zeros(d_s, d_d, dtype=dtype),
        )

    def add_(self, other: "EncoderParams") -> None:
        """In-place element-wise accumulation (gradient summing)."""
        self.level1.w += other.level1.w
        self.level1.u += other.level1.u
        self.level1.b += other.level1.b
        self.level2.w += other.level2.w
        self.level2.u += other.level2.u
        self.level2.b += other.level2.b


def init_encoder_params(
    d_w: int = 300,
    d_s: int = 150,
    d_d: int = 75,
    lo: float = -0.05,
    hi: float = 0.05,
    rng: np.random.Generator | None = None,
    dtype=np.float64,
) -> EncoderParams:
    """Uniform [lo, hi) initialization of every matrix and bias.

    Default dims halve per level from a 300-dimensional word embedding;
    draw order is level1 (w, u, b) then level2 (w, u, b).
    """
    if rng is None:
        raise ValueError("init_encoder_params requires an explicit rng")
    return EncoderParams(
        level1=LstmParams.init_uniform(d_w, d_s, lo, hi, rng, dtype),
        level2=LstmParams.init_uniform(d_s, d_d, lo, hi, rng, dtype),
    )


@dataclass
class DropoutMasks:
    """Inverted-dropout masks, sampled once per document and reused at
    every time step (the variational property).

    Entries are 0 or 1/(1-rate).  input1/recurrent1 apply to the level-1
    cell, input2/recurrent2 to the level-2 cell.
    """

    input1: np.ndarray
    recurrent1: np.ndarray
    input2: np.ndarray
    recurrent2: np.ndarray


def sample_dropout_masks(
    dims: tuple[int, int, int],
    rate: float,
    rng: np.random.Generator,
    dtype=np.float64,
) -> DropoutMasks:
    """Bernoulli(1-rate) masks scaled by 1/(1-rate) for dims (d_w, d_s, d_d).

    rate = 0 yields all-ones masks.  Draw order: input1, recurrent1,
    input2, recurrent2.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    d_w, d_s, d_d = dims
    keep = 1.0 - rate

    def draw(dim: int) -> np.ndarray:
        return (rng.random(dim) >= rate).astype(dtype) / keep

    return DropoutMasks(
        input1=draw(d_w),
        recurrent1=draw(d_s),
        input2=draw(d_s),
        recurrent2=draw(d_d),
    )


def encode_sentence(
    level1: LstmParams,
    word_vectors: np.ndarray,
    true_len: int,
    length: int,
    masks: DropoutMasks | None = None,
) -> np.ndarray:
    """Sentence embedding: level-1 final hidden state from a zero state."""
    final, _ = _encode_sentence_cached(level1, word_vectors, true_len, length, masks)
    return final.h


def _encode_sentence_cached(
    level1: LstmParams,
    word_vectors: np.ndarray,
    true_len: int,
    length: int,
    masks: DropoutMasks | None,
) -> tuple[LstmState, LstmTape]:
    in_mask = masks.input1 if masks is not None else None
    rec_mask = masks.recurrent1 if masks is not None else None
    return lstm_run_frozen(
        level1, word_vectors, true_len, length, init=None,
        in_mask=in_mask, rec_mask=rec_mask,
    )


@dataclass
class DocumentTape:
    """Forward caches of a whole document encoding, for encoder_backward."""

    sentence_tapes: list[LstmTape] = field(repr=False)
    sentence_embeddings: np.ndarray = field(repr=False)  # (num_sentences, d_s)
    level2_tape: LstmTape = field(repr=False)
    d_w: int = 0
    d_s: int = 0
    d_d: int = 0


def encode_document_training(
    params: EncoderParams,
    doc: EncodedDocument,
    masks: DropoutMasks | None = None,
) -> tuple[np.ndarray, DocumentTape]:
    """Document embedding plus the tape bundle needed for the backward pass."""
    n = doc.num_sentences
    dtype = params.level1.w.dtype
    sent_embeddings = np.zeros((n, params.d_s), dtype=dtype)
    sent_tapes: list[LstmTape] = []
    for k in range(n):
        final, tape = _encode_sentence_cached(
            params.level1, doc.words[k], int(doc.sent_lengths[k]), doc.max_words, masks
        )
        sent_embeddings[k] = final.h
        sent_tapes.append(tape)
    in_mask = masks.input2 if masks is not None else None
    rec_mask = masks.recurrent2 if masks is not None else None
    final, level2_tape = lstm_run_frozen(
        params.level2, sent_embeddings, n, doc.max_sentences, init=None,
        in_mask=in_mask, rec_mask=rec_mask,
    )
    tape_bundle = DocumentTape(
        sentence_tapes=sent_tapes,
        sentence_embeddings=sent_embeddings,
        level2_tape=level2_tape,
        d_w=params.d_w,
        d_s=params.d_s,
        d_d=params.d_d,
    )
    return final.h, tape_bundle


def encode_document(
    params: EncoderParams,
    doc: EncodedDocument,
    masks: DropoutMasks | None = None,
) -> np.ndarray:
    """Document embedding; without masks this is deterministic inference."""
    x_d, _ = encode_document_training(params, doc, masks)
    return x_d


def encoder_backward(
    params: EncoderParams,
    tape: DocumentTape,
    d_xd: np.ndarray,
) -> EncoderParams:
    """Exact parameter gradients of a scalar loss given dL/d(document embedding).

    Level-2 input gradients become the upstream hidden-state gradients of
    each sentence encoding; word-vector gradients are discarded because
    the embeddings are pretrained, not trained here.
    """
    if tape.d_w != params.d_w or tape.d_s != params.d_s or tape.d_d != params.d_d:
        raise ShapeError(
            f"tape dims ({tape.d_w}, {tape.d_s}, {tape.d_d}) do not match params "
            f"({params.d_w}, {params.d_s}, {params.d_d})"
        )
    dtype = params.level1.w.dtype
    zero_d = np.zeros(params.d_d, dtype=dtype)
    grads2, d_sent, _, _ = lstm_backward(params.level2, tape.level2_tape, d_xd, zero_d)

    grads1 = LstmParams.zeros(params.d_w, params.d_s, dtype=dtype)
    zero_s = np.zeros(params.d_s, dtype=dtype)
    for k, sent_tape in enumerate(tape.sentence_tapes):
        g, _, _, _ = lstm_backward(params.level1, sent_tape, d_sent[k], zero_s)
        grads1.w += g.w
        grads1.u += g.u
        grads1.b += g.b

    return EncoderParams(level1=grads1, level2=grads2)
