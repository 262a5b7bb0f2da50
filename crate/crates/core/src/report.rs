//! Report plumbing shared by the audits and the command line: stable digests
//! and the two flat CSV row shapes every report is built from.
//!
//! Digests are FNV-1a over a canonical byte stream. They are provenance tags
//! for reports (which input produced this row), not cryptographic hashes.

use std::fmt::Write as _;

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

/// Incremental FNV-1a/64 digest with a stable hex rendering.
#[derive(Clone, Copy, Debug)]
pub struct Digester(u64);

impl Digester {
    pub fn new() -> Self {
        Digester(FNV_OFFSET)
    }

    pub fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
    }

    pub fn update_u64(&mut self, v: u64) {
        self.update(&v.to_le_bytes());
    }

    pub fn finish(self) -> String {
        format!("{:016x}", self.0)
    }
}

impl Default for Digester {
    fn default() -> Self {
        Self::new()
    }
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    let mut d = Digester::new();
    d.update(bytes);
    d.finish()
}

/// `quantity,value,witness` row used by the measurement reports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportRow {
    pub quantity: String,
    pub value: String,
    pub witness: String,
}

impl ReportRow {
    pub fn new(quantity: impl Into<String>, value: impl Into<String>, witness: impl Into<String>) -> Self {
        ReportRow { quantity: quantity.into(), value: value.into(), witness: witness.into() }
    }
}

/// `audit,input_digest,measured,budget,pass` row used by every audit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditRow {
    pub audit: String,
    pub input_digest: String,
    pub measured: String,
    pub budget: String,
    pub pass: bool,
}

impl AuditRow {
    pub fn new(
        audit: impl Into<String>,
        input_digest: impl Into<String>,
        measured: impl Into<String>,
        budget: impl Into<String>,
        pass: bool,
    ) -> Self {
        AuditRow {
            audit: audit.into(),
            input_digest: input_digest.into(),
            measured: measured.into(),
            budget: budget.into(),
            pass,
        }
    }
}

/// Renders rows as a flat CSV document. Fields never contain commas by
/// construction (witnesses join ids with ';'), so no quoting is performed;
/// the renderer asserts that invariant rather than silently corrupting rows.
pub fn render_report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("quantity,value,witness\n");
    for r in rows {
        debug_assert!(!r.quantity.contains(',') && !r.value.contains(',') && !r.witness.contains(','));
        let _ = writeln!(out, "{},{},{}", r.quantity, r.value, r.witness);
    }
    out
}

pub fn render_audit_csv(rows: &[AuditRow]) -> String {
    let mut out = String::from("audit,input_digest,measured,budget,pass\n");
    for r in rows {
        debug_assert!(!r.audit.contains(',') && !r.measured.contains(',') && !r.budget.contains(','));
        let _ = writeln!(out, "{},{},{},{},{}", r.audit, r.input_digest, r.measured, r.budget, r.pass);
    }
    out
}

/// Joins ids into a comma-free witness token.
pub fn witness_ids(ids: &[u32]) -> String {
    let mut s = String::new();
    for (i, v) in ids.iter().enumerate() {
        if i > 0 {
            s.push(';');
        }
        let _ = write!(s, "{v}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_input_sensitive() {
        let a = digest_bytes(b"0 1\n1 2\n");
        let b = digest_bytes(b"0 1\n1 2\n");
        let c = digest_bytes(b"0 1\n1 3\n");
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 16);
    }

    #[test]
    fn csv_rendering_is_flat() {
        let rows = vec![ReportRow::new("delta", "1", witness_ids(&[0, 1, 2, 3]))];
        let csv = render_report_csv(&rows);
        assert_eq!(csv, "quantity,value,witness\ndelta,1,0;1;2;3\n");
        let audits = vec![AuditRow::new("projection_lipschitz", "ab", "3", "5", true)];
        let csv = render_audit_csv(&audits);
        assert_eq!(csv, "audit,input_digest,measured,budget,pass\nprojection_lipschitz,ab,3,5,true\n");
    }
}
