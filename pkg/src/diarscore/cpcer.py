"""Concatenated minimum-permutation character error rate.

Three steps: merge each speaker's utterances chronologically into one
stream per side, score every pairing of reference and hypothesis streams,
and keep the assignment with the lowest total error.  The minimization is
solved as a rectangular assignment problem (edit cost is additive over
stream pairs); a factorial brute-force mode is kept as the oracle.

The denominator is always the total reference character count, regardless
of which assignment wins.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .assignment import lexsmallest_assignment
from .cer import CharSeq, EditCounts, edit_counts, edit_distance, normalize_text
from .der import SpeakerMap
from .errors import SessionMismatchError, UndefinedMetricError, ValidationError
from .formats import SpeakerTurn, TranscriptEntry

logger = logging.getLogger(__name__)

__all__ = [
    "CpcerResult",
    "SpeakerText",
    "aggregate_counts",
    "attach_order_from_rttm",
    "compute_cpcer",
    "concat_by_speaker",
]


@dataclass(frozen=True)
class SpeakerText:
    """One normalized character stream per speaker of a session."""

    session: str
    streams: Mapping[str, CharSeq]

    def total_chars(self) -> int:
        return sum(len(t) for t in self.streams.values())


def concat_by_speaker(
    entries: Iterable[TranscriptEntry],
    session: str | None = None,
    strip_punctuation: bool = True,
) -> SpeakerText:
    """Merge utterances per speaker in ascending order_key, then normalize.

    The sort is stable, so entries with equal keys keep input order; a
    duplicate (speaker, order_key) with different text is kept but warned
    about.  All entries must belong to one session.
    """
    entries = list(entries)
    for e in entries:
        if session is None:
            session = e.session
        elif e.session != session:
            raise SessionMismatchError(f"entry for session {e.session!r}, expected {session!r}")
    per_speaker: dict[str, list[TranscriptEntry]] = {}
    for e in entries:
        per_speaker.setdefault(e.speaker, []).append(e)
    streams = {}
    for spk in sorted(per_speaker):
        group = sorted(per_speaker[spk], key=lambda e: e.order_key)
        seen: dict[int, str] = {}
        for e in group:
            if e.order_key in seen and seen[e.order_key] != e.text:
                logger.warning(
                    "speaker %s has conflicting texts at order key %d; keeping both",
                    spk,
                    e.order_key,
                )
            seen[e.order_key] = e.text
        streams[spk] = normalize_text("".join(e.text for e in group), strip_punctuation)
    return SpeakerText(session=session or "", streams=streams)


def attach_order_from_rttm(
    entries: Iterable[TranscriptEntry], turns: Iterable[SpeakerTurn]
) -> list[TranscriptEntry]:
    """Replace entry order keys with start times from matching RTTM turns.

    The k-th transcript entry of a (session, speaker) pair, in file order,
    is matched to that pair's k-th turn in start order.  Pairs whose entry
    and turn counts disagree keep their file order, with a warning.
    """
    turn_starts: dict[tuple[str, str], list[int]] = {}
    for t in sorted(turns, key=lambda t: (t.session, t.interval.start, t.speaker)):
        turn_starts.setdefault((t.session, t.speaker), []).append(t.interval.start)
    grouped: dict[tuple[str, str], list[TranscriptEntry]] = {}
    ordered = []
    for e in entries:
        grouped.setdefault((e.session, e.speaker), []).append(e)
    for key, group in grouped.items():
        starts = turn_starts.get(key, [])
        if len(starts) != len(group):
            logger.warning(
                "session %s speaker %s: %d transcript entries vs %d turns; keeping file order",
                key[0],
                key[1],
                len(group),
                len(starts),
            )
            ordered.extend(group)
            continue
        ordered.extend(
            TranscriptEntry(speaker=e.speaker, session=e.session, text=e.text, order_key=start)
            for e, start in zip(group, starts)
        )
    return ordered


@dataclass(frozen=True)
class CpcerResult:
    """Winning assignment, summed edit counts, and the resulting rate."""

    assignment: SpeakerMap
    counts: EditCounts

    @property
    def cpcer(self) -> Fraction:
        value = self.counts.cer
        if not isinstance(value, Fraction):
            raise UndefinedMetricError("empty reference: cpCER undefined")
        return value


def _pad(names: Sequence[str], texts: Sequence[str], size: int) -> tuple[list[str | None], list[str]]:
    padded_names: list[str | None] = list(names) + [None] * (size - len(names))
    padded_texts = list(texts) + [""] * (size - len(texts))
    return padded_names, padded_texts


def compute_cpcer(ref: SpeakerText, hyp: SpeakerText, mode: str = "assignment") -> CpcerResult:
    """Lowest CER over all pairings of reference and hypothesis streams.

    The smaller side is padded with empty streams: an unmatched reference
    stream costs its full length in deletions, an unmatched hypothesis
    stream its full length in insertions.  mode="brute-force" enumerates
    every bijection instead of solving the assignment problem; both modes
    break ties toward the lexicographically smallest pairing.
    """
    if ref.session != hyp.session:
        raise SessionMismatchError(f"{ref.session!r} vs {hyp.session!r}")
    if mode not in ("assignment", "brute-force"):
        raise ValidationError(f"unknown mode: {mode!r}")
    if ref.total_chars() == 0:
        raise UndefinedMetricError(f"session {ref.session!r} has an empty reference")
    ref_names = sorted(ref.streams)
    hyp_names = sorted(hyp.streams)
    size = max(len(ref_names), len(hyp_names))
    r_names, r_texts = _pad(ref_names, [ref.streams[s] for s in ref_names], size)
    h_names, h_texts = _pad(hyp_names, [hyp.streams[s] for s in hyp_names], size)
    cost = np.zeros((size, size), dtype=np.int64)
    for i, rt in enumerate(r_texts):
        for j, ht in enumerate(h_texts):
            cost[i, j] = edit_distance(rt, ht)
    if mode == "assignment":
        cols = lexsmallest_assignment(cost, maximize=False)
    else:
        best: list[int] | None = None
        best_total = None
        row_idx = np.arange(size)
        for perm in permutations(range(size)):
            total = int(cost[row_idx, perm].sum())
            if best_total is None or total < best_total:
                best, best_total = list(perm), total
        cols = best if best is not None else []
    counts = EditCounts(0, 0, 0, 0)
    pairs = []
    unmatched_ref = []
    unmatched_hyp = []
    for i, j in enumerate(cols):
        counts = counts + edit_counts(r_texts[i], h_texts[j])
        r_name, h_name = r_names[i], h_names[j]
        if r_name is not None and h_name is not None:
            pairs.append((r_name, h_name))
        elif r_name is not None:
            unmatched_ref.append(r_name)
        elif h_name is not None:
            unmatched_hyp.append(h_name)
    assignment = SpeakerMap(
        pairs=tuple(sorted(pairs)),
        unmatched_ref=tuple(sorted(unmatched_ref)),
        unmatched_hyp=tuple(sorted(unmatched_hyp)),
    )
    return CpcerResult(assignment=assignment, counts=counts)


def aggregate_counts(parts: Sequence[EditCounts]) -> EditCounts:
    """Corpus total: sum edit operations and reference lengths across sessions."""
    if not parts:
        raise ValidationError("nothing to aggregate")
    total = EditCounts(0, 0, 0, 0)
    for p in parts:
        total = total + p
    return total
