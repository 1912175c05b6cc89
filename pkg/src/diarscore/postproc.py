"""Probability post-processing and the joint-decoding manifest protocol.

The front half turns per-speaker speech probabilities into segments:
threshold, merge small gaps, drop short segments.  The back half drives
segment-level decoding from the outside: a manifest row per utterance
identifier (session, speaker, start, duration), and re-assembly of decoded
per-utterance text into one chronologically merged transcript entry per
speaker.

External file formats
---------------------
Probability matrix (UTF-8 text): header line ``<session> <frame_ms>
<spk1> <spk2> ...``, then one whitespace-separated row of probabilities
per frame, covering contiguous time from 0.

Manifest TSV: header ``session\tspeaker\tstart_ms\tdur_ms``, one row per
utterance.  The texts file for `assemble` uses the same columns plus a
final ``text`` column.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Iterable, Mapping, NamedTuple

import numpy as np

from .errors import ParseError, ValidationError
from .formats import TimeInterval, TranscriptEntry
from .timeline import Diarization

__all__ = [
    "ManifestRow",
    "ProbabilityMatrix",
    "SegmentManifest",
    "assemble_transcript",
    "binarize_probs",
    "build_manifest",
    "combine_manifests",
    "manifest_to_diarizations",
    "parse_manifest",
    "parse_matrix",
    "parse_texts",
    "smooth_segments",
]

MANIFEST_HEADER = ("session", "speaker", "start_ms", "dur_ms")


@dataclass(frozen=True)
class ProbabilityMatrix:
    """Per-speaker speech probabilities on a fixed frame grid from t=0."""

    session: str
    frame_ms: int
    speakers: tuple[str, ...]
    values: np.ndarray  # frames x speakers, each in [0, 1]

    def __post_init__(self):
        if self.frame_ms <= 0:
            raise ValidationError(f"frame_ms must be positive: {self.frame_ms}")
        if len(set(self.speakers)) != len(self.speakers):
            raise ValidationError("duplicate speaker ids in matrix")
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != len(self.speakers):
            raise ValidationError(
                f"matrix shape {values.shape} does not match {len(self.speakers)} speakers"
            )
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            raise ValidationError("probabilities must lie in [0, 1]")
        object.__setattr__(self, "values", values)


def parse_matrix(stream: IO[str] | Iterable[str]) -> ProbabilityMatrix:
    """Parse the one-header-line probability matrix format."""
    lines = iter(enumerate(stream, 1))
    header = None
    for lineno, raw in lines:
        if raw.strip():
            header = raw.split()
            break
    if header is None:
        raise ParseError("empty matrix file")
    if len(header) < 3:
        raise ParseError("header needs: session frame_ms speaker...", line=lineno)
    session = header[0]
    try:
        frame_ms = int(header[1])
    except ValueError:
        raise ParseError(f"frame_ms not an integer: {header[1]!r}", line=lineno) from None
    speakers = tuple(header[2:])
    rows = []
    for lineno, raw in lines:
        if not raw.strip():
            continue
        fields = raw.split()
        if len(fields) != len(speakers):
            raise ParseError(
                f"expected {len(speakers)} probabilities, got {len(fields)}", line=lineno
            )
        try:
            rows.append([float(x) for x in fields])
        except ValueError:
            raise ParseError(f"non-numeric probability in {fields!r}", line=lineno) from None
    values = np.array(rows, dtype=np.float64) if rows else np.empty((0, len(speakers)))
    try:
        return ProbabilityMatrix(session=session, frame_ms=frame_ms, speakers=speakers, values=values)
    except ValidationError as exc:
        raise ValidationError(f"matrix file invalid: {exc}") from None


def emit_matrix(matrix: ProbabilityMatrix) -> str:
    lines = [" ".join([matrix.session, str(matrix.frame_ms), *matrix.speakers])]
    for row in matrix.values:
        lines.append(" ".join(format(v, "g") for v in row))
    return "".join(line + "\n" for line in lines)


def binarize_probs(matrix: ProbabilityMatrix, threshold: float = 0.5) -> Diarization:
    """Maximal runs of frames with probability >= threshold become intervals."""
    if not 0.0 < threshold < 1.0:
        raise ValidationError(f"threshold must lie strictly inside (0, 1): {threshold}")
    speakers: dict[str, list[TimeInterval]] = {}
    for k, spk in enumerate(matrix.speakers):
        mask = np.concatenate(([False], matrix.values[:, k] >= threshold, [False]))
        edges = np.flatnonzero(np.diff(mask.astype(np.int8)))
        run_starts, run_ends = edges[::2], edges[1::2]
        intervals = [
            TimeInterval(int(a) * matrix.frame_ms, int(b - a) * matrix.frame_ms)
            for a, b in zip(run_starts, run_ends)
        ]
        if intervals:
            speakers[spk] = intervals
    return Diarization(matrix.session, speakers)


def smooth_segments(d: Diarization, max_gap_ms: int = 300, min_dur_ms: int = 200) -> Diarization:
    """Merge gaps shorter than max_gap_ms, then drop segments shorter than min_dur_ms.

    The order is fixed (merge before drop) and the operation is idempotent.
    """
    if max_gap_ms < 0 or min_dur_ms < 0:
        raise ValidationError("smoothing parameters must be non-negative")
    speakers: dict[str, list[TimeInterval]] = {}
    for spk, ivs in d.items():
        merged: list[TimeInterval] = []
        for iv in ivs:
            if merged and iv.start - merged[-1].end < max_gap_ms:
                last = merged[-1]
                merged[-1] = TimeInterval(last.start, iv.end - last.start)
            else:
                merged.append(iv)
        kept = [iv for iv in merged if iv.dur >= min_dur_ms]
        if kept:
            speakers[spk] = kept
    return Diarization(d.session, speakers)


class ManifestRow(NamedTuple):
    """One utterance identifier driving segment-level decoding."""

    session: str
    speaker: str
    start: int
    dur: int


@dataclass(frozen=True)
class SegmentManifest:
    """Utterance identifiers sorted by (session, start, speaker)."""

    rows: tuple[ManifestRow, ...]

    def __post_init__(self):
        for row in self.rows:
            if row.dur <= 0:
                raise ValidationError(f"non-positive duration in manifest row: {row}")
        ordered = tuple(sorted(self.rows, key=lambda r: (r.session, r.start, r.speaker)))
        object.__setattr__(self, "rows", ordered)


def build_manifest(d: Diarization) -> SegmentManifest:
    """One manifest row per interval of a session's diarization."""
    return SegmentManifest(
        rows=tuple(
            ManifestRow(d.session, spk, iv.start, iv.dur) for spk, ivs in d.items() for iv in ivs
        )
    )


def combine_manifests(manifests: Iterable[SegmentManifest]) -> SegmentManifest:
    return SegmentManifest(rows=tuple(r for m in manifests for r in m.rows))


def manifest_to_diarizations(manifest: SegmentManifest) -> dict[str, Diarization]:
    """Rebuild one Diarization per session from manifest rows."""
    sessions: dict[str, dict[str, list[TimeInterval]]] = {}
    for row in manifest.rows:
        sessions.setdefault(row.session, {}).setdefault(row.speaker, []).append(
            TimeInterval(row.start, row.dur)
        )
    return {s: Diarization(s, spk) for s, spk in sorted(sessions.items())}


def emit_manifest(manifest: SegmentManifest) -> str:
    lines = ["\t".join(MANIFEST_HEADER)]
    lines += [f"{r.session}\t{r.speaker}\t{r.start}\t{r.dur}" for r in manifest.rows]
    return "".join(line + "\n" for line in lines)


def parse_manifest(stream: IO[str] | Iterable[str]) -> SegmentManifest:
    rows = []
    for lineno, raw in enumerate(stream, 1):
        line = raw.rstrip("\r\n")
        if lineno == 1:
            if tuple(line.split("\t")) != MANIFEST_HEADER:
                raise ParseError(f"expected header {MANIFEST_HEADER}", line=lineno)
            continue
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise ParseError(f"expected 4 tab-separated fields, got {len(fields)}", line=lineno)
        try:
            rows.append(ManifestRow(fields[0], fields[1], int(fields[2]), int(fields[3])))
        except ValueError:
            raise ParseError(f"non-integer time in {fields!r}", line=lineno) from None
    return SegmentManifest(rows=tuple(rows))


def parse_texts(stream: IO[str] | Iterable[str]) -> dict[ManifestRow, str]:
    """Parse the per-row decoded-text file (manifest columns plus text)."""
    texts: dict[ManifestRow, str] = {}
    for lineno, raw in enumerate(stream, 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if lineno == 1 and tuple(fields[:4]) == MANIFEST_HEADER:
            continue
        if len(fields) != 5:
            raise ParseError(f"expected 5 tab-separated fields, got {len(fields)}", line=lineno)
        try:
            row = ManifestRow(fields[0], fields[1], int(fields[2]), int(fields[3]))
        except ValueError:
            raise ParseError(f"non-integer time in {fields!r}", line=lineno) from None
        texts[row] = fields[4]
    return texts


def assemble_transcript(
    manifest: SegmentManifest, texts: Mapping[ManifestRow, str]
) -> list[TranscriptEntry]:
    """Join each speaker's decoded texts in start order into one entry.

    Rows without a supplied text contribute the empty string; a text for a
    row absent from the manifest is an error.  Output is sorted by
    (session, speaker), order_key numbering the emitted lines.
    """
    known = set(manifest.rows)
    stray = sorted(set(texts) - known)
    if stray:
        raise ValidationError(f"text supplied for rows absent from the manifest: {stray[:3]}")
    merged: dict[tuple[str, str], list[str]] = {}
    for row in manifest.rows:  # already (session, start, speaker) ordered
        merged.setdefault((row.session, row.speaker), []).append(texts.get(row, ""))
    entries = []
    for index, (session, speaker) in enumerate(sorted(merged)):
        entries.append(
            TranscriptEntry(
                speaker=speaker,
                session=session,
                text="".join(merged[(session, speaker)]),
                order_key=index,
            )
        )
    return entries
