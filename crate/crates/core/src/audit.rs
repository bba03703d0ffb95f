//! Pass/fail records shared by the solver and Lyapunov audits.

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub t: f64,
    /// Location, when the audited quantity is a field.
    pub y: Option<f64>,
    pub value: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub name: String,
    pub passed: bool,
    /// Number of checked records.
    pub checked: usize,
    /// Records skipped by the audit's exclusion rule.
    pub excluded: usize,
    /// Smallest `limit-side margin` seen (negative on failure).
    pub worst_margin: f64,
    pub first_violation: Option<Violation>,
}

impl AuditReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: true,
            checked: 0,
            excluded: 0,
            worst_margin: f64::INFINITY,
            first_violation: None,
        }
    }

    /// Records one check: passes when `margin ≥ −tol`.
    pub fn check(&mut self, t: f64, y: Option<f64>, value: f64, limit: f64, margin: f64, tol: f64) {
        self.checked += 1;
        if margin < self.worst_margin || margin.is_nan() {
            self.worst_margin = margin;
        }
        let ok = margin >= -tol;
        if !ok && self.first_violation.is_none() {
            self.first_violation = Some(Violation { t, y, value, limit });
        }
        self.passed &= ok;
    }

    pub fn verdict(&self) -> &'static str {
        if self.passed {
            "pass"
        } else {
            "fail"
        }
    }

    /// One-line verdict with counts or the first violation.
    pub fn summary(&self) -> String {
        match &self.first_violation {
            None => format!(
                "{} ({} checked, {} excluded, worst margin {:.3e})",
                self.verdict(),
                self.checked,
                self.excluded,
                self.worst_margin
            ),
            Some(v) => format!(
                "{} (first violation at t = {:.6e}{}: value {:.6e} vs limit {:.6e})",
                self.verdict(),
                v.t,
                v.y.map(|y| format!(", y = {y:.6e}")).unwrap_or_default(),
                v.value,
                v.limit
            ),
        }
    }
}
