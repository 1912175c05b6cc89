"""Piecewise-constant timeline algebra over speaker turns.

A Diarization maps each speaker to disjoint, sorted speech intervals; the
region tiling cuts one or more diarizations of a session at every interval
boundary so that active-speaker sets are constant within each region.  All
interval arithmetic is closed-open [start, start + dur) on integer
milliseconds, so regions tile the span exactly with no double counting.
"""

from __future__ import annotations

from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import SessionMismatchError, ValidationError
from .formats import SpeakerTurn, TimeInterval

__all__ = [
    "Diarization",
    "PairedRegion",
    "by_session",
    "build_regions",
    "joint_regions",
    "pairwise_overlap",
]


def _normalize(intervals: Iterable[TimeInterval | tuple[int, int]]) -> tuple[TimeInterval, ...]:
    parsed = [iv if isinstance(iv, TimeInterval) else TimeInterval(*iv) for iv in intervals]
    for iv in parsed:
        if iv.start < 0:
            raise ValidationError(f"negative interval start: {iv}")
        if iv.dur <= 0:
            raise ValidationError(f"non-positive interval duration: {iv}")
    parsed.sort()
    merged: list[TimeInterval] = []
    for iv in parsed:
        # merge overlapping or touching intervals of the same speaker
        if merged and iv.start <= merged[-1].end:
            last = merged[-1]
            merged[-1] = TimeInterval(last.start, max(last.end, iv.end) - last.start)
        else:
            merged.append(iv)
    return tuple(merged)


class Diarization:
    """Per-session map of speaker id -> disjoint sorted speech intervals."""

    def __init__(self, session: str, speakers: Mapping[str, Iterable[TimeInterval | tuple[int, int]]]):
        if not session or any(c.isspace() for c in session):
            raise ValidationError(f"session must be non-empty without whitespace: {session!r}")
        self.session = session
        normalized = {}
        for spk in sorted(speakers):
            if not spk or any(c.isspace() for c in spk):
                raise ValidationError(f"speaker id must be non-empty without whitespace: {spk!r}")
            intervals = _normalize(speakers[spk])
            if intervals:
                normalized[spk] = intervals
        self._speakers = normalized

    @classmethod
    def from_turns(cls, session: str, turns: Iterable[SpeakerTurn]) -> "Diarization":
        grouped: dict[str, list[TimeInterval]] = {}
        for t in turns:
            if t.session != session:
                raise SessionMismatchError(f"turn for session {t.session!r}, expected {session!r}")
            grouped.setdefault(t.speaker, []).append(t.interval)
        return cls(session, grouped)

    @property
    def speaker_ids(self) -> tuple[str, ...]:
        return tuple(self._speakers)

    def intervals(self, speaker: str) -> tuple[TimeInterval, ...]:
        return self._speakers[speaker]

    def items(self):
        return self._speakers.items()

    def total_speech(self) -> int:
        """Sum of all speakers' speech durations in ms (overlap counted per speaker)."""
        return sum(iv.dur for ivs in self._speakers.values() for iv in ivs)

    def extent(self) -> TimeInterval | None:
        """Smallest interval covering all speech, or None when empty."""
        if not self._speakers:
            return None
        start = min(ivs[0].start for ivs in self._speakers.values())
        end = max(ivs[-1].end for ivs in self._speakers.values())
        return TimeInterval(start, end - start)

    def relabel(self, mapping: Mapping[str, str]) -> "Diarization":
        """Rename speakers; ids absent from the mapping are kept as-is."""
        renamed: dict[str, list[TimeInterval]] = {}
        for spk, ivs in self._speakers.items():
            renamed.setdefault(mapping.get(spk, spk), []).extend(ivs)
        return Diarization(self.session, renamed)

    def merged_with(self, other: "Diarization") -> "Diarization":
        """Per-speaker union of two diarizations of the same session."""
        if other.session != self.session:
            raise SessionMismatchError(f"{self.session!r} vs {other.session!r}")
        combined: dict[str, list[TimeInterval]] = {s: list(ivs) for s, ivs in self._speakers.items()}
        for spk, ivs in other.items():
            combined.setdefault(spk, []).extend(ivs)
        return Diarization(self.session, combined)

    def to_turns(self, channel: str = "1") -> list[SpeakerTurn]:
        return [
            SpeakerTurn(session=self.session, channel=channel, speaker=spk, interval=iv)
            for spk, ivs in self._speakers.items()
            for iv in ivs
        ]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Diarization):
            return NotImplemented
        return self.session == other.session and self._speakers == other._speakers

    def __repr__(self) -> str:
        return f"Diarization({self.session!r}, {len(self._speakers)} speakers)"


def by_session(turns: Iterable[SpeakerTurn]) -> dict[str, Diarization]:
    """Group turns into one Diarization per session."""
    sessions: dict[str, list[SpeakerTurn]] = {}
    for t in turns:
        sessions.setdefault(t.session, []).append(t)
    return {s: Diarization.from_turns(s, ts) for s, ts in sorted(sessions.items())}


class PairedRegion(NamedTuple):
    """A region of constant activity in a (reference, hypothesis) pair."""

    interval: TimeInterval
    ref_active: frozenset[str]
    hyp_active: frozenset[str]


def joint_regions(
    diarizations: Sequence[Diarization],
) -> list[tuple[TimeInterval, tuple[frozenset[str], ...]]]:
    """Tile the union of all extents into regions of constant activity.

    Boundaries are collected from every interval of every input; each region
    between consecutive boundaries carries one active-speaker set per input.
    """
    if not diarizations:
        return []
    session = diarizations[0].session
    starts: dict[int, list[tuple[int, str]]] = {}
    ends: dict[int, list[tuple[int, str]]] = {}
    for idx, d in enumerate(diarizations):
        if d.session != session:
            raise SessionMismatchError(f"{session!r} vs {d.session!r}")
        for spk, ivs in d.items():
            for iv in ivs:
                starts.setdefault(iv.start, []).append((idx, spk))
                ends.setdefault(iv.end, []).append((idx, spk))
    times = sorted(set(starts) | set(ends))
    active: list[set[str]] = [set() for _ in diarizations]
    regions = []
    for pos, t in enumerate(times):
        for idx, spk in ends.get(t, ()):
            active[idx].discard(spk)
        for idx, spk in starts.get(t, ()):
            active[idx].add(spk)
        if pos + 1 < len(times):
            interval = TimeInterval(t, times[pos + 1] - t)
            regions.append((interval, tuple(frozenset(a) for a in active)))
    return regions


def build_regions(ref: Diarization, hyp: Diarization) -> list[PairedRegion]:
    """Region tiling of a (reference, hypothesis) pair of the same session."""
    return [PairedRegion(iv, act[0], act[1]) for iv, act in joint_regions([ref, hyp])]


def pairwise_overlap(ref: Diarization, hyp: Diarization) -> dict[tuple[str, str], int]:
    """Total ms each (ref speaker, hyp speaker) pair is simultaneously active.

    Returns a complete matrix as a dict: every pair from the two speaker sets
    is present, zeros included.
    """
    overlap = {(r, h): 0 for r in ref.speaker_ids for h in hyp.speaker_ids}
    for region in build_regions(ref, hyp):
        for r in region.ref_active:
            for h in region.hyp_active:
                overlap[(r, h)] += region.interval.dur
    return overlap
