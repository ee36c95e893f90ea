"""Frozen expected values for the bundled corpus.

The rows below are an independent transcription of the source scoring
worksheet (id, title, five components, printed score in tenths), kept
deliberately separate from the shipped .tmdl file so a typo in either
shows up as a mismatch. Aggregates derived here (sums, buckets, ranks)
are recomputed from the raw components on import and used as the
expected side of the acceptance checks.
"""

from __future__ import annotations

# (id, title, damage, reproducibility, exploitability, affected_users,
#  discoverability, printed score in tenths)
ROWS: tuple[tuple[int, str, int, int, int, int, int, int], ...] = (
    (1, "Spoofing a sensors identity", 4, 4, 3, 1, 3, 30),
    (2, "Spoofing the Autonomous driving ECU identity", 4, 4, 3, 1, 3, 30),
    (3, "Tampering with the message content", 4, 4, 3, 1, 3, 30),
    (4, "Stealing sensor information", 4, 4, 3, 1, 3, 30),
    (5, "Flooding the inner vehicle network", 4, 4, 3, 1, 3, 30),
    (6, "Destroying the sensors", 2, 4, 3, 1, 4, 28),
    (7, "Tampering with the enviroment", 4, 4, 1, 1, 4, 28),
    (8, "DDOS Modem", 4, 2, 3, 3, 1, 26),
    (9, "Overload LiDAR", 4, 2, 3, 2, 1, 25),
    (10, "Prior Knowledge", 4, 3, 3, 3, 3, 32),
    (11, "Machine learning tampering", 4, 2, 3, 2, 1, 24),
    (12, "Smartphone spoofing", 4, 2, 3, 3, 2, 28),
    (13, "Spoofing Snow", 4, 2, 3, 2, 2, 25),
    (14, "Spoofing Rain droplets", 4, 2, 3, 2, 2, 26),
    (15, "Fog spoofing", 4, 2, 3, 2, 2, 26),
    (16, "Tampered sensors data", 4, 4, 3, 1, 2, 28),
    (17, "Buffer overflow attack on the Modem", 4, 4, 3, 3, 2, 26),
    (18, "Software Denial of Service", 4, 4, 3, 1, 3, 30),
    (19, "GPS Spoofing", 4, 3, 4, 4, 4, 38),
    (20, "LiDAR Sensor Blinding", 3, 4, 3, 4, 3, 34),
    (21, "Camera Image Tampering", 4, 3, 4, 4, 2, 34),
    (22, "Radar Jamming", 4, 3, 2, 4, 4, 34),
    (23, "Sensor Fusion Conflict", 3, 4, 3, 4, 4, 36),
    (24, "Adversarial Visual Input", 3, 4, 4, 4, 4, 38),
    (25, "Remote Code Injection via OTA", 4, 4, 2, 3, 4, 34),
    (26, "Man-in-the-Middle (MITM) on V2X", 4, 3, 4, 4, 2, 34),
    (27, "Denial of Service on CAN Bus", 4, 4, 3, 4, 4, 38),
    (28, "Decision AI Model Poisoning", 4, 4, 3, 4, 4, 38),
    (29, "Path Planning Misguidance", 4, 4, 2, 4, 2, 32),
    (30, "Braking System Hijack", 4, 4, 3, 4, 2, 34),
    (31, "Steering Manipulation", 3, 4, 4, 4, 2, 34),
    (32, "Fake V2V Message", 4, 3, 3, 4, 2, 32),
    (33, "Cloud Data Breach", 4, 3, 4, 4, 4, 38),
    (34, "Insecure API Exposure", 3, 4, 4, 4, 3, 36),
    (35, "Unencrypted V2X Transmission", 4, 3, 4, 4, 3, 36),
    (36, "Roadside Unit Compromise", 4, 4, 4, 4, 2, 36),
    (37, "Physical ECU Tampering", 4, 4, 4, 3, 3, 36),
    (38, "Insider Threat in Manufacturing", 4, 4, 3, 4, 3, 36),
    (39, "Voice Command Exploit", 3, 4, 2, 3, 2, 28),
    (40, "Cloud-to-AV Sync Attack", 3, 4, 4, 3, 3, 34),
    (41, "Privacy Violation via Telemetry Data", 4, 3, 3, 4, 4, 36),
    (42, "False Firmware Update Notification", 4, 4, 4, 4, 3, 38),
)

# Category assignment per the narrative's per-category threat lists, with
# two rows appearing in no list and assigned by inference (17 -> E,
# 29 -> T); those two carry a "category inferred" note in the corpus.
CATEGORY_BY_ID: dict[int, str] = {
    **{i: "S" for i in (1, 2, 19, 26, 32, 39, 42)},
    **{i: "T" for i in (3, 7, 11, 12, 13, 14, 15, 16, 21, 24, 28, 29, 34, 36, 40)},
    **{i: "I" for i in (4, 10, 23, 33, 35, 41)},
    **{i: "D" for i in (5, 6, 8, 9, 18, 20, 22, 27)},
    **{i: "E" for i in (17, 25, 30, 31, 37, 38)},
}

COMPONENTS_BY_ID = {row[0]: row[2:7] for row in ROWS}
TITLE_BY_ID = {row[0]: row[1] for row in ROWS}
PRINTED_TENTHS_BY_ID = {row[0]: row[7] for row in ROWS}

#: Computed score in tenths: five-component sum times two, no rounding.
COMPUTED_TENTHS_BY_ID = {
    row[0]: 2 * sum(row[2:7]) for row in ROWS
}


def band_of_tenths(tenths: int) -> str:
    """Banding recount used as the oracle side: Low < 2.5 <= Medium < 3.4 <= High."""
    if tenths >= 34:
        return "High"
    if tenths >= 25:
        return "Medium"
    return "Low"


def severity_counts() -> dict[str, int]:
    counts = {"Low": 0, "Medium": 0, "High": 0}
    for tenths in COMPUTED_TENTHS_BY_ID.values():
        counts[band_of_tenths(tenths)] += 1
    return counts


def category_counts() -> dict[str, int]:
    counts = {letter: 0 for letter in "STRIDE"}
    for letter in CATEGORY_BY_ID.values():
        counts[letter] += 1
    return counts


def discrepancy_ids() -> dict[int, tuple[int, int]]:
    """id -> (printed tenths, computed tenths) where the two disagree."""
    return {
        i: (PRINTED_TENTHS_BY_ID[i], COMPUTED_TENTHS_BY_ID[i])
        for i in COMPUTED_TENTHS_BY_ID
        if PRINTED_TENTHS_BY_ID[i] != COMPUTED_TENTHS_BY_ID[i]
    }


def top_score_ids() -> set[int]:
    best = max(COMPUTED_TENTHS_BY_ID.values())
    return {i for i, t in COMPUTED_TENTHS_BY_ID.items() if t == best}


# Transcription self-checks: row count, id coverage, and a checksum over
# all component sums (2.4 x2, 2.6 x4, 2.8 x5, 3.0 x6, 3.2 x4, 3.4 x8,
# 3.6 x7, 3.8 x6 adds up to 676).
assert len(ROWS) == 42
assert sorted(COMPONENTS_BY_ID) == list(range(1, 43))
assert sorted(CATEGORY_BY_ID) == list(range(1, 43))
assert sum(sum(c) for c in COMPONENTS_BY_ID.values()) == 676
