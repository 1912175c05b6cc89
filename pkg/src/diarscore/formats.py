"""RTTM and transcript file formats.

RTTM lines carry 10 whitespace-separated fields:

    SPEAKER <session> <channel> <start> <duration> <NA> <NA> <speaker> <NA> <NA>

with start/duration in decimal seconds.  Times are stored internally as
integer milliseconds; parsing is exact decimal (no binary floating point
touches the data path) and emission rounds half-up to 2 decimals.

Transcript lines are ``<speakerID>_<sessionID><whitespace><text>``, UTF-8,
one utterance per line.  The speaker/session split is at the *last*
underscore, so speaker IDs may themselves contain underscores.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import IO, Iterable, NamedTuple

from .errors import ParseError, ValidationError

logger = logging.getLogger(__name__)

_TIME_RE = re.compile(r"^(-?)(\d+)(?:\.(\d{1,3}))?$")


class TimeInterval(NamedTuple):
    """Half-open interval [start, start + dur) in integer milliseconds."""

    start: int
    dur: int

    @property
    def end(self) -> int:
        return self.start + self.dur


@dataclass(frozen=True)
class SpeakerTurn:
    """One RTTM SPEAKER record."""

    session: str
    channel: str
    speaker: str
    interval: TimeInterval

    def __post_init__(self):
        for name in ("session", "speaker"):
            value = getattr(self, name)
            if not value or any(c.isspace() for c in value):
                raise ValidationError(f"{name} must be non-empty without whitespace: {value!r}")
        if self.interval.start < 0:
            raise ValidationError(f"negative start time: {self.interval.start} ms")
        if self.interval.dur <= 0:
            raise ValidationError(f"non-positive duration: {self.interval.dur} ms")


@dataclass(frozen=True)
class TranscriptEntry:
    """One transcript utterance; order_key is the line index or a start time."""

    speaker: str
    session: str
    text: str
    order_key: int

    @property
    def utterance_id(self) -> str:
        return join_utterance_id(self.speaker, self.session)


def seconds_to_ms(text: str) -> int:
    """Convert a decimal-seconds string to exact integer milliseconds.

    At most 3 fractional digits are accepted; anything else (including
    scientific notation) is a ParseError.  Negative values parse but are
    rejected as a ValidationError so callers can report them distinctly.
    """
    m = _TIME_RE.match(text)
    if m is None:
        raise ParseError(f"not a decimal time with at most 3 fractional digits: {text!r}")
    sign, whole, frac = m.groups()
    ms = int(whole) * 1000 + int((frac or "").ljust(3, "0") or "0")
    if sign and ms != 0:
        raise ValidationError(f"negative time: {text!r}")
    return ms


def ms_to_seconds(ms: int) -> str:
    """Format milliseconds as seconds with exactly 2 decimals, round half-up."""
    if ms < 0:
        raise ValidationError(f"negative time: {ms} ms")
    centis = (ms + 5) // 10
    return f"{centis // 100}.{centis % 100:02d}"


def join_utterance_id(speaker: str, session: str) -> str:
    return f"{speaker}_{session}"


def split_utterance_id(uid: str) -> tuple[str, str]:
    """Split an utterance ID into (speaker, session) at the last underscore."""
    speaker, sep, session = uid.rpartition("_")
    if not sep or not speaker or not session:
        raise ParseError(f"utterance ID without speaker_session shape: {uid!r}")
    return speaker, session


def parse_rttm(stream: IO[str] | Iterable[str]) -> list[SpeakerTurn]:
    """Parse RTTM text into SpeakerTurns, preserving file order.

    Only SPEAKER records are kept; other record types are skipped with a
    warning, and ``;``-comments are ignored.  Lines with fewer than 9
    fields, non-numeric times, or non-positive durations raise with the
    offending line number.
    """
    turns = []
    for lineno, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line or line.startswith(";"):
            continue
        fields = line.split()
        if fields[0] != "SPEAKER":
            logger.warning("line %d: skipping record type %r", lineno, fields[0])
            continue
        if len(fields) < 9:
            raise ParseError(f"expected at least 9 fields, got {len(fields)}", line=lineno)
        try:
            start = seconds_to_ms(fields[3])
            dur = seconds_to_ms(fields[4])
            turn = SpeakerTurn(
                session=fields[1],
                channel=fields[2],
                speaker=fields[7],
                interval=TimeInterval(start, dur),
            )
        except (ParseError, ValidationError) as exc:
            raise type(exc)(f"line {lineno}: {exc}") from None
        turns.append(turn)
    return turns


def emit_rttm(turns: Iterable[SpeakerTurn]) -> str:
    """Serialize turns as RTTM text, sorted by (session, start, speaker).

    The format carries 2-decimal seconds; a duration under 5 ms would round
    to 0.00 and produce an unparseable file, so it is rejected instead.
    """
    ordered = sorted(turns, key=lambda t: (t.session, t.interval.start, t.speaker))
    lines = []
    for t in ordered:
        dur = ms_to_seconds(t.interval.dur)
        if dur == "0.00":
            raise ValidationError(
                f"duration {t.interval.dur} ms rounds to 0.00 and cannot be emitted"
            )
        lines.append(
            f"SPEAKER {t.session} {t.channel} {ms_to_seconds(t.interval.start)} "
            f"{dur} <NA> <NA> {t.speaker} <NA> <NA>"
        )
    return "".join(line + "\n" for line in lines)


def parse_transcript(stream: IO[str] | Iterable[str]) -> list[TranscriptEntry]:
    """Parse two-column transcript text (utterance ID, then utterance).

    The first whitespace run separates the ID from the text; the text keeps
    any further internal whitespace verbatim.  order_key is the 0-based
    index among parsed entries.
    """
    entries = []
    for lineno, raw in enumerate(stream, 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        parts = line.split(None, 1)
        if len(parts) == 2:
            uid, text = parts
        elif parts[0] != line:
            uid, text = parts[0], ""  # separator present, text empty
        else:
            raise ParseError("no text column after the utterance ID", line=lineno)
        try:
            speaker, session = split_utterance_id(uid)
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        entries.append(
            TranscriptEntry(speaker=speaker, session=session, text=text, order_key=len(entries))
        )
    return entries


def emit_transcript(entries: Iterable[TranscriptEntry]) -> str:
    """Serialize transcript entries, one ``<speaker>_<session> <text>`` line each."""
    return "".join(f"{e.utterance_id} {e.text}\n" for e in entries)
