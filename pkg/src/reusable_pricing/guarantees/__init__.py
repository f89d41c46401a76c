"""Ratio bounds in suffix-product coordinates and their numerical audits."""

from .audits import (AuditReport, audit_G_grid, audit_H, audit_lemma2, audit_lemma3, audit_lemma4,
                     audit_theorem2_region, audit_truncation, run_all_audits, sample_ordered_z)
from .two_unit import (TWO_UNIT_SPLIT, C2Params, TwoUnitCheck, c2_g, c2_G, c2_h, envelope_peak,
                       envelope_theta, two_unit_check)
from .zspace import (ZVector, ratio_R, ratio_R_batch, ratio_R_tilde, ratio_R_tilde_batch,
                     ratio_R_two_unit, z_from_policy)

__all__ = [
    "AuditReport", "C2Params", "TWO_UNIT_SPLIT", "TwoUnitCheck", "ZVector",
    "audit_G_grid", "audit_H", "audit_lemma2", "audit_lemma3", "audit_lemma4",
    "audit_theorem2_region", "audit_truncation", "c2_G", "c2_g", "c2_h", "envelope_peak",
    "envelope_theta", "ratio_R", "ratio_R_batch", "ratio_R_tilde", "ratio_R_tilde_batch",
    "ratio_R_two_unit", "run_all_audits", "sample_ordered_z", "two_unit_check", "z_from_policy",
]
