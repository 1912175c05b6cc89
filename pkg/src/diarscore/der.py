"""Diarization error rate: FA + MISS + SPKERR over total reference speech.

Scoring is overlap-aware and collar-free: every region of the tiling is
scored with its full active-speaker counts.  The reference-to-hypothesis
speaker mapping maximizes total paired overlap; a factorial brute-force
route over all injective maps is kept as an independent oracle.

All durations are integer milliseconds and the rate is an exact Fraction,
so component sums are identities rather than float approximations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np

from .assignment import lexsmallest_assignment
from .errors import UndefinedMetricError, ValidationError
from .timeline import Diarization, PairedRegion, build_regions, pairwise_overlap

__all__ = [
    "DerBreakdown",
    "SpeakerMap",
    "aggregate_der",
    "brute_force_der",
    "compute_der",
    "optimal_speaker_map",
]


@dataclass(frozen=True)
class DerBreakdown:
    """FA/MISS/SPKERR durations (ms), total reference speech, and the rate."""

    fa: int
    miss: int
    spkerr: int
    total: int

    def __post_init__(self):
        for name in ("fa", "miss", "spkerr", "total"):
            if getattr(self, name) < 0:
                raise ValidationError(f"negative duration component: {name}")

    @property
    def der(self) -> Fraction:
        if self.total == 0:
            raise UndefinedMetricError("no reference speech: DER undefined")
        return Fraction(self.fa + self.miss + self.spkerr, self.total)

    def rate(self, component: str) -> Fraction:
        """Component duration as a fraction of total reference speech."""
        if self.total == 0:
            raise UndefinedMetricError("no reference speech: rate undefined")
        return Fraction(getattr(self, component), self.total)


@dataclass(frozen=True)
class SpeakerMap:
    """Injective pairing between reference and hypothesis speaker ids."""

    pairs: tuple[tuple[str, str], ...]
    unmatched_ref: tuple[str, ...]
    unmatched_hyp: tuple[str, ...]

    def __post_init__(self):
        refs = [r for r, _ in self.pairs]
        hyps = [h for _, h in self.pairs]
        if len(set(refs)) != len(refs) or len(set(hyps)) != len(hyps):
            raise ValidationError("speaker map is not injective")

    def as_dict(self) -> dict[str, str]:
        return dict(self.pairs)


def optimal_speaker_map(ref: Diarization, hyp: Diarization) -> SpeakerMap:
    """Injective map maximizing total paired overlap duration.

    Speakers whose best pairing would add zero overlap are left unmatched.
    Ties between equally good assignments are broken lexicographically by
    (ref id, hyp id).
    """
    overlap = pairwise_overlap(ref, hyp)
    refs = sorted(ref.speaker_ids)
    hyps = sorted(hyp.speaker_ids)
    n = max(len(refs), len(hyps))
    if n == 0:
        return SpeakerMap(pairs=(), unmatched_ref=(), unmatched_hyp=())
    matrix = np.zeros((n, n), dtype=np.int64)
    for i, r in enumerate(refs):
        for j, h in enumerate(hyps):
            matrix[i, j] = overlap[(r, h)]
    cols = lexsmallest_assignment(matrix, maximize=True)
    pairs = []
    for i, r in enumerate(refs):
        j = cols[i]
        if j < len(hyps) and matrix[i, j] > 0:
            pairs.append((r, hyps[j]))
    matched_ref = {r for r, _ in pairs}
    matched_hyp = {h for _, h in pairs}
    return SpeakerMap(
        pairs=tuple(pairs),
        unmatched_ref=tuple(r for r in refs if r not in matched_ref),
        unmatched_hyp=tuple(h for h in hyps if h not in matched_hyp),
    )


def _score_regions(regions: Sequence[PairedRegion], pairs: Iterable[tuple[str, str]]) -> DerBreakdown:
    pair_list = list(pairs)
    fa = miss = spkerr = total = 0
    for region in regions:
        n_ref = len(region.ref_active)
        n_hyp = len(region.hyp_active)
        n_correct = sum(
            1 for r, h in pair_list if r in region.ref_active and h in region.hyp_active
        )
        dur = region.interval.dur
        total += dur * n_ref
        miss += dur * max(0, n_ref - n_hyp)
        fa += dur * max(0, n_hyp - n_ref)
        spkerr += dur * (min(n_ref, n_hyp) - n_correct)
    return DerBreakdown(fa=fa, miss=miss, spkerr=spkerr, total=total)


def compute_der(ref: Diarization, hyp: Diarization, speaker_map: SpeakerMap) -> DerBreakdown:
    """Score a hypothesis against a reference under a fixed speaker map.

    Per region with n_ref/n_hyp active speakers and n_correct matched pairs
    active on both sides:

        MISS   += dur * max(0, n_ref - n_hyp)
        FA     += dur * max(0, n_hyp - n_ref)
        SPKERR += dur * (min(n_ref, n_hyp) - n_correct)
        TOTAL  += dur * n_ref
    """
    regions = build_regions(ref, hyp)
    breakdown = _score_regions(regions, speaker_map.pairs)
    if breakdown.total == 0:
        raise UndefinedMetricError(f"session {ref.session!r} has no reference speech")
    return breakdown


def brute_force_der(ref: Diarization, hyp: Diarization) -> tuple[SpeakerMap, DerBreakdown]:
    """Minimum DER over every injective speaker map, by exhaustive enumeration.

    Enumerates all full matchings of the smaller speaker set (adding a pair
    never increases DER, so partial maps are dominated).  Factorial cost:
    intended as the oracle route for small sessions, enabled in the CLI via
    --brute-force.
    """
    regions = build_regions(ref, hyp)
    refs = sorted(ref.speaker_ids)
    hyps = sorted(hyp.speaker_ids)
    best: tuple[DerBreakdown, tuple[tuple[str, str], ...]] | None = None
    if len(refs) <= len(hyps):
        candidates = (tuple(zip(refs, combo)) for combo in permutations(hyps, len(refs)))
    else:
        candidates = (
            tuple(zip(combo, hyps)) for combo in permutations(refs, len(hyps))
        )
    for pairs in candidates:
        breakdown = _score_regions(regions, pairs)
        key = breakdown.fa + breakdown.miss + breakdown.spkerr
        if best is None or key < best[0].fa + best[0].miss + best[0].spkerr:
            best = (breakdown, pairs)
    if best is None:  # both sides empty of speakers
        best = (_score_regions(regions, ()), ())
    breakdown, pairs = best
    if breakdown.total == 0:
        raise UndefinedMetricError(f"session {ref.session!r} has no reference speech")
    overlap = pairwise_overlap(ref, hyp)
    kept = tuple(sorted((r, h) for r, h in pairs if overlap[(r, h)] > 0))
    matched_ref = {r for r, _ in kept}
    matched_hyp = {h for _, h in kept}
    speaker_map = SpeakerMap(
        pairs=kept,
        unmatched_ref=tuple(r for r in refs if r not in matched_ref),
        unmatched_hyp=tuple(h for h in hyps if h not in matched_hyp),
    )
    return speaker_map, breakdown


def aggregate_der(parts: Sequence[DerBreakdown]) -> DerBreakdown:
    """Duration-weighted corpus total: sum components, recompute the rate."""
    if not parts:
        raise ValidationError("nothing to aggregate")
    return DerBreakdown(
        fa=sum(p.fa for p in parts),
        miss=sum(p.miss for p in parts),
        spkerr=sum(p.spkerr for p in parts),
        total=sum(p.total for p in parts),
    )
