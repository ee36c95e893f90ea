"""DREAD scoring, severity banding, ranking, and printed-score verification.

A threat's score is the unweighted mean of its five sub-scores, computed
on integer tenths so it is exact. Printed scores from the source document
are data: when one disagrees with the recomputed mean the discrepancy is
reported, never silently corrected.

Severity cutoffs: Low below 2.5, Medium from 2.5 up to (not including)
3.4, High from 3.4. Everything here is a pure function; scoring can run
concurrently over shared models with identical results.
"""

from __future__ import annotations

from dataclasses import dataclass

from tmdl.model import (
    STRIDE,
    Score,
    SeverityBand,
    ThreatCategory,
    ThreatModel,
    DreadVector,
)

#: Band cutoffs in integer tenths: Medium starts at 2.5, High at 3.4.
MEDIUM_MIN_TENTHS = 25
HIGH_MIN_TENTHS = 34


@dataclass(frozen=True)
class ScoreDiscrepancy:
    """A printed score that is not the mean of its components."""

    threat_id: int
    printed_tenths: int
    computed: Score


@dataclass(frozen=True)
class RankedThreat:
    """One row of a ranking: dense 1-based rank, id, score, band."""

    rank: int
    threat_id: int
    score: Score
    band: SeverityBand


def compute_score(vector: DreadVector) -> Score:
    """The mean of the five components, exact to one decimal.

    ``tenths = 2 * sum(components)``, so five times the score is always
    the integer component sum with no rounding anywhere.
    """
    return Score(tenths=2 * vector.total())


def band_of(score: Score) -> SeverityBand:
    return band_of_tenths(score.tenths)


def band_of_tenths(tenths: int) -> SeverityBand:
    if tenths >= HIGH_MIN_TENTHS:
        return SeverityBand.HIGH
    if tenths >= MEDIUM_MIN_TENTHS:
        return SeverityBand.MEDIUM
    return SeverityBand.LOW


def rank_threats(model: ThreatModel) -> list[RankedThreat]:
    """All threats ordered by score descending.

    Ties break on higher damage first (impact wins), then on lower threat
    id; ranks are dense (1, 2, 3, ...), so the order is total and the
    output does not depend on input order.
    """
    def key(t):
        return (-compute_score(t.dread).tenths, -t.dread.damage, t.id)

    out = []
    for position, t in enumerate(sorted(model.threats, key=key), start=1):
        score = compute_score(t.dread)
        out.append(RankedThreat(position, t.id, score, band_of(score)))
    return out


def verify_printed(model: ThreatModel) -> list[ScoreDiscrepancy]:
    """Printed scores that disagree with the recomputed mean, by threat id.

    Threats without a printed score are skipped; equality is exact on
    tenths, so there is no tolerance to tune.
    """
    out = []
    for t in sorted(model.threats, key=lambda t: t.id):
        if t.printed_tenths is None:
            continue
        computed = compute_score(t.dread)
        if t.printed_tenths != computed.tenths:
            out.append(ScoreDiscrepancy(t.id, t.printed_tenths, computed))
    return out


def category_histogram(model: ThreatModel) -> dict[ThreatCategory, int]:
    """Threat counts per category, keyed in the fixed S,T,R,I,D,E order."""
    counts = {category: 0 for category in STRIDE}
    for t in model.threats:
        counts[t.category] += 1
    return counts


def severity_histogram(model: ThreatModel) -> dict[SeverityBand, int]:
    """Threat counts per severity band (computed scores), Low to High."""
    counts = {band: 0 for band in SeverityBand}
    for t in model.threats:
        counts[band_of(compute_score(t.dread))] += 1
    return counts
