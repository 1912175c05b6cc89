"""Character-level alignment and error counting.

Text is normalized to NFC, whitespace is always removed, and a fixed
punctuation table is stripped by default; what remains is scored one code
point per token (so each CJK character is one token).  Alignment is
unit-cost Levenshtein; when several minimum-cost alignments exist the
traceback prefers substitution over deletion over insertion, making the
S/D/I split deterministic.
"""

from __future__ import annotations

import math
import string
import unicodedata
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ValidationError

__all__ = ["CharSeq", "EditCounts", "PUNCTUATION", "edit_counts", "edit_distance", "normalize_text"]

# Each normalized token is one code point; a CharSeq is just their concatenation.
CharSeq = str

# Stripped by default: ASCII punctuation plus common CJK and fullwidth marks.
PUNCTUATION = frozenset(
    string.punctuation
    + "。，、；：？！·…—～‘’“”〝〞「」『』〈〉《》（）【】〔〕［］｛｝"
    + "＜＞，．；：？！＠＃＄％＾＆＊－＿＋＝｜＼／￥〃"
)


@dataclass(frozen=True)
class EditCounts:
    """Substitution/deletion/insertion counts against a reference of length n."""

    s: int
    d: int
    i: int
    n: int

    def __post_init__(self):
        if min(self.s, self.d, self.i, self.n) < 0:
            raise ValidationError("negative edit count")
        if self.s + self.d > self.n:
            raise ValidationError("substitutions + deletions exceed reference length")

    @property
    def distance(self) -> int:
        return self.s + self.d + self.i

    @property
    def cer(self) -> Fraction | float:
        """(s + d + i) / n; +inf sentinel when n = 0 but edits exist."""
        if self.n == 0:
            return Fraction(0) if self.distance == 0 else math.inf
        return Fraction(self.distance, self.n)

    def __add__(self, other: "EditCounts") -> "EditCounts":
        return EditCounts(self.s + other.s, self.d + other.d, self.i + other.i, self.n + other.n)


def normalize_text(raw: str, strip_punctuation: bool = True) -> CharSeq:
    """NFC-normalize, drop all whitespace, optionally drop punctuation."""
    text = unicodedata.normalize("NFC", raw)
    return "".join(
        ch for ch in text if not ch.isspace() and not (strip_punctuation and ch in PUNCTUATION)
    )


def _codes(text: str) -> np.ndarray:
    return np.array([ord(c) for c in text], dtype=np.int64)


def _distance_rows(ref: str, hyp: str):
    """Yield successive DP rows d[i][0..m] of the Levenshtein table."""
    m = len(hyp)
    hyp_codes = _codes(hyp)
    js = np.arange(m + 1, dtype=np.int64)
    row = js.copy()
    yield row
    for i, ch in enumerate(ref, 1):
        neq = hyp_codes != ord(ch)
        base = np.minimum(row[:-1] + neq, row[1:] + 1)
        stacked = np.concatenate(([i], base))
        # chained insertions: d[i][j] = min_k<=j (stacked[k] + j - k)
        row = np.minimum.accumulate(stacked - js) + js
        yield row


def edit_distance(ref: str, hyp: str) -> int:
    """Unit-cost Levenshtein distance (no traceback, O(min memory))."""
    if not ref:
        return len(hyp)
    if not hyp:
        return len(ref)
    for row in _distance_rows(ref, hyp):
        pass
    return int(row[-1])


def edit_counts(ref: CharSeq, hyp: CharSeq) -> EditCounts:
    """Minimum-cost alignment counts with the fixed sub > del > ins tie-break."""
    n, m = len(ref), len(hyp)
    dtype = np.uint16 if max(n, m) < 0xFFFF else np.uint32
    table = np.empty((n + 1, m + 1), dtype=dtype)
    for i, row in enumerate(_distance_rows(ref, hyp)):
        table[i] = row
    s = d = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        here = int(table[i, j])
        if i > 0 and j > 0 and here == int(table[i - 1, j - 1]) + (ref[i - 1] != hyp[j - 1]):
            s += ref[i - 1] != hyp[j - 1]
            i -= 1
            j -= 1
        elif i > 0 and here == int(table[i - 1, j]) + 1:
            d += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return EditCounts(s=s, d=d, i=ins, n=n)
