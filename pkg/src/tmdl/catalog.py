"""Built-in mitigation catalog and coverage analysis.

The catalog holds the countermeasure families for each STRIDE category,
including the environmental-resilience controls for weather-degraded
sensing, tagged by the section of the source write-up each came from.
Entries from the strategy section carry the three automotive-security
standards tags together; finer attribution than that is not supported by
the source text. The catalog maps categories to mitigation families, not
individual threats to individual fixes, so coverage is computed at
category granularity with per-threat overrides supplied in the model
itself.

Built-in entries are immutable and there is deliberately no built-in
Repudiation entry: the source names no repudiation countermeasure, so a
repudiation threat with no declared mitigation reports as uncovered.
"""

from __future__ import annotations

from dataclasses import dataclass

from tmdl.model import Mitigation, ThreatCategory, ThreatModel, ThreatStatus

_ALL_STANDARDS = ("ISO/SAE 21434", "OWASP-Connected-Vehicles", "AUTOSAR")

SOURCE_RISK_SECTION = "section-2"
SOURCE_STRATEGY_SECTION = "section-5"
SOURCE_CUSTOM = "custom"

_S = ThreatCategory.SPOOFING
_T = ThreatCategory.TAMPERING
_I = ThreatCategory.INFORMATION_DISCLOSURE
_D = ThreatCategory.DENIAL_OF_SERVICE
_E = ThreatCategory.ELEVATION_OF_PRIVILEGE


@dataclass(frozen=True)
class CatalogEntry:
    """A mitigation plus the section of the source write-up it came from."""

    mitigation: Mitigation
    source: str


def _strategy(mid: str, description: str, *cats: ThreatCategory) -> CatalogEntry:
    return CatalogEntry(
        Mitigation(mid, description, tuple(cats), _ALL_STANDARDS),
        SOURCE_STRATEGY_SECTION,
    )


def _risk(mid: str, description: str, *cats: ThreatCategory) -> CatalogEntry:
    return CatalogEntry(Mitigation(mid, description, tuple(cats)), SOURCE_RISK_SECTION)


_BUILTIN: tuple[CatalogEntry, ...] = (
    # Strategy-section families, one per named control.
    _strategy("mutual_authentication", "Mutual authentication protocols between components and peers", _S),
    _strategy("digital_certificates", "Digital certificates for component identity and message origin", _S),
    _strategy("encrypted_communications", "Encrypted communications on internal and external channels", _S),
    _strategy("anomaly_detection", "Anomaly detection algorithms over sensor and bus behaviour", _T),
    _strategy("redundant_sensing", "Redundant sensing mechanisms with overlapping fields of view", _T),
    _strategy("secure_software_engineering", "Secure software engineering practices for in-vehicle code", _T),
    _strategy("network_segmentation", "Network segmentation isolating safety-critical buses", _D),
    _strategy("rate_limiting", "Rate-limiting on network interfaces and service endpoints", _D),
    _strategy("intrusion_detection", "Intrusion Detection Systems watching vehicle networks", _D),
    _strategy("encryption_standards", "Enforced encryption standards for data at rest and in transit", _I),
    _strategy("access_control_policies", "Strict access control policies on stores and services", _I),
    _strategy("secure_cloud_integration", "Secure cloud integration with audited backend interfaces", _I),
    _strategy("signed_firmware", "Signed firmware validation before installation and boot", _E),
    _strategy("hardware_security_modules", "Hardware-level security modules anchoring keys and boot state", _E),
    _strategy("role_based_access_control", "Role-based access control for maintenance and diagnostics", _E),
    # Environmental resilience: weather degradation is recorded as
    # tampering, so these address Tampering.
    _strategy("heated_waterproof_sensors", "Heated and waterproofed sensor housings for adverse weather", _T),
    _strategy("adverse_condition_training", "AI models trained for adverse weather and lighting conditions", _T),
    _strategy("system_level_redundancy", "System-level redundancy across perception inputs", _T),
    # Risk-section defenses kept as distinct entries where the phrasing
    # differs from the strategy list.
    _risk("cryptographic_signal_auth", "Cryptographic authentication of all signals", _S),
    _risk("certificate_message_verification", "Certificate-based verification of received messages", _S),
    _risk("continuous_anomaly_detection", "Continuous anomaly detection across perception and decision inputs", _S, _T),
    _risk("end_to_end_integrity", "End-to-end integrity checks on data streams", _T),
    _risk("input_validation", "Stringent input validation on exposed interfaces", _T),
    _risk("model_monitoring", "Real-time model monitoring for learning components", _T),
    _risk("hardened_interfaces", "Hardened APIs and externally reachable interfaces", _T),
    _risk("redundant_channels", "Redundant communication channels for critical traffic", _D),
    _risk("sensor_health_checks", "Sensor health-check routines detecting loss or degradation", _D),
    _risk("graceful_degradation", "Graceful degradation strategies preserving safe control", _D),
    _risk("audit_logging", "Continuous audit logging of data access and transfers", _I),
    _risk("secure_boot", "Secure-boot processes for controllers", _E),
    _risk("hardware_root_of_trust", "Hardware root-of-trust anchors", _E),
    _risk("mfa_maintenance", "Multi-factor authentication for maintenance interfaces", _E),
    _risk("supply_chain_verification", "Rigorous supply-chain verification of parts and firmware", _E),
)


def builtin_catalog() -> tuple[CatalogEntry, ...]:
    """The read-only built-in catalog; every call returns the same value."""
    return _BUILTIN


def suggestions_for(
    category: ThreatCategory, catalog: tuple[CatalogEntry, ...] | None = None
) -> tuple[CatalogEntry, ...]:
    """Exactly the catalog entries whose addresses contain the category."""
    entries = _BUILTIN if catalog is None else catalog
    return tuple(e for e in entries if category in e.mitigation.addresses)


@dataclass(frozen=True)
class CoverageRow:
    """Coverage of one threat: declared mitigations plus catalog suggestions.

    ``uncovered`` is set only when both are empty.
    """

    threat_id: int
    status: ThreatStatus
    declared: tuple[str, ...]
    suggested: tuple[str, ...]

    @property
    def uncovered(self) -> bool:
        return not self.declared and not self.suggested


def coverage_report(
    model: ThreatModel, catalog: tuple[CatalogEntry, ...] | None = None
) -> list[CoverageRow]:
    """One row per threat, in id order."""
    entries = _BUILTIN if catalog is None else catalog
    out = []
    for t in sorted(model.threats, key=lambda t: t.id):
        suggested = tuple(e.mitigation.id for e in entries if t.category in e.mitigation.addresses)
        out.append(CoverageRow(t.id, t.status, t.mitigations, suggested))
    return out


def export_catalog_json(
    catalog: tuple[CatalogEntry, ...] | None = None,
) -> list[dict]:
    """Catalog as JSON data, same conventions as the model mirror."""
    entries = _BUILTIN if catalog is None else catalog
    return [
        {
            "id": e.mitigation.id,
            "description": e.mitigation.description,
            "addresses": [c.value for c in e.mitigation.addresses],
            "standards": list(e.mitigation.standards),
            "source": e.source,
        }
        for e in entries
    ]
