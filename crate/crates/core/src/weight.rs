//! The piecewise weight `𝒴` of the Lyapunov functional and its certification.
//!
//! The family is
//!
//! ```text
//! 𝒴(y) = 6Ay/5                        y ∈ [0, 1/2)
//!        −8Ay³/5 + 12Ay²/5 + A/5       y ∈ [1/2, 1)
//!        By³ + Dy² + Ey + F           y ∈ [1, 2)
//!        Mⁿ / (y + M − 2)ⁿ            y ∈ [2, ∞)
//! ```
//!
//! with `A…F` fixed by `(n, M)` so that `𝒴` is C¹ (and C² at `y = 2`).
//! Breakpoints are `α = 1/2`, `β = 1`, `δ = 2`; `γ ∈ (1, 2)` is the
//! inflection point of the third piece and `σ = n/(n+1)`.
//!
//! The nine structural constraints are checked by dense sampling plus exact
//! evaluation at breakpoints; `μ` and `λ` are safety-margined sampled
//! suprema of the ratios that define them.

use std::fmt;

use crate::error::{Error, Result};

/// Relative safety margin applied to the sampled suprema defining `μ`, `λ`.
pub const RATIO_MARGIN: f64 = 1e-6;
/// Samples per piece used when deriving `μ` and `λ`.
pub const DERIVE_SAMPLES: usize = 4096;
/// Minimum samples per piece accepted by [`validate_constraints`].
pub const MIN_VALIDATION_SAMPLES: usize = 64;
/// Relative tolerance for C¹ continuity at the breakpoints.
pub const CONTINUITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    pub n: f64,
    pub m: f64,
    pub a_coef: f64,
    pub b_coef: f64,
    pub d_coef: f64,
    pub e_coef: f64,
    pub f_coef: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub sigma: f64,
    pub mu: f64,
    pub lambda: f64,
    /// `‖𝒴‖_{L¹(ℝ⁺)}`.
    pub c_y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Piece {
    Linear,
    Cubic,
    Bridge,
    Tail,
}

impl WeightSpec {
    /// Coefficients, breakpoints and `σ` only; `μ`, `λ`, `C_𝒴` left at zero.
    fn coefficients(n: f64, m: f64) -> Self {
        let nn1 = n * (n + 1.0);
        let m2 = m * m;
        Self {
            n,
            m,
            a_coef: 1.0 + 2.0 * n / (3.0 * m) + nn1 / (6.0 * m2),
            b_coef: n / (3.0 * m) + nn1 / (3.0 * m2),
            d_coef: -2.0 * n / m - 3.0 * nn1 / (2.0 * m2),
            e_coef: 3.0 * n / m + 2.0 * nn1 / m2,
            f_coef: 1.0 - 2.0 * n / (3.0 * m) - 2.0 * nn1 / (3.0 * m2),
            alpha: 0.5,
            beta: 1.0,
            gamma: (4.0 * n * m + 3.0 * nn1) / (2.0 * n * m + 2.0 * nn1),
            delta: 2.0,
            sigma: n / (n + 1.0),
            mu: 0.0,
            lambda: 0.0,
            c_y: 0.0,
        }
    }

    fn piece_of(&self, y: f64) -> Piece {
        if y < self.alpha {
            Piece::Linear
        } else if y < self.beta {
            Piece::Cubic
        } else if y < self.delta {
            Piece::Bridge
        } else {
            Piece::Tail
        }
    }

    fn eval_piece(&self, piece: Piece, y: f64) -> (f64, f64, f64) {
        let a = self.a_coef;
        match piece {
            Piece::Linear => (1.2 * a * y, 1.2 * a, 0.0),
            Piece::Cubic => (
                (-1.6 * a * y + 2.4 * a) * y * y + 0.2 * a,
                (-4.8 * a * y + 4.8 * a) * y,
                -9.6 * a * y + 4.8 * a,
            ),
            Piece::Bridge => {
                let (b, d, e, f) = (self.b_coef, self.d_coef, self.e_coef, self.f_coef);
                (
                    ((b * y + d) * y + e) * y + f,
                    (3.0 * b * y + 2.0 * d) * y + e,
                    6.0 * b * y + 2.0 * d,
                )
            }
            Piece::Tail => {
                let z = y + self.m - 2.0;
                let v = (self.m / z).powf(self.n);
                (v, -self.n * v / z, self.n * (self.n + 1.0) * v / (z * z))
            }
        }
    }

    /// `(𝒴, 𝒴′, 𝒴″)` at `y ≥ 0`; breakpoints take the right-hand piece.
    pub fn eval(&self, y: f64) -> (f64, f64, f64) {
        self.eval_piece(self.piece_of(y), y)
    }

    /// Left-hand limits at an interior breakpoint.
    pub fn eval_left(&self, y: f64) -> (f64, f64, f64) {
        let piece = if y <= self.alpha {
            Piece::Linear
        } else if y <= self.beta {
            Piece::Cubic
        } else if y <= self.delta {
            Piece::Bridge
        } else {
            Piece::Tail
        };
        self.eval_piece(piece, y)
    }

    /// `∫_{y0}^∞ 𝒴` for `y0 ≥ δ`, in closed form.
    pub fn tail_integral(&self, y0: f64) -> f64 {
        debug_assert!(y0 >= self.delta);
        let z = y0 + self.m - 2.0;
        self.m.powf(self.n) * z.powf(1.0 - self.n) / (self.n - 1.0)
    }

    /// `∫₀^{δ} 𝒴`, exact integrals of the three polynomial pieces.
    fn polynomial_mass(&self) -> f64 {
        let a = self.a_coef;
        let linear = 3.0 * a / 20.0;
        let cubic = 17.0 * a / 40.0;
        let bridge = 15.0 * self.b_coef / 4.0 + 7.0 * self.d_coef / 3.0 + 1.5 * self.e_coef + self.f_coef;
        linear + cubic + bridge
    }

    /// Infimum of `𝒴` on `[α, δ]` over a dense sample plus the endpoints.
    pub fn inf_on_alpha_delta(&self) -> f64 {
        let mut inf = self.eval(self.alpha).0.min(self.eval(self.delta).0);
        for (lo, hi) in [(self.alpha, self.beta), (self.beta, self.gamma), (self.gamma, self.delta)] {
            for y in samples(lo, hi, DERIVE_SAMPLES) {
                inf = inf.min(self.eval(y).0);
            }
        }
        inf
    }
}

fn samples(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    let width = hi - lo;
    (0..=count).map(move |k| lo + width * k as f64 / count as f64)
}

fn check_n_m(n: f64, m: f64) -> Result<()> {
    if !(n.is_finite() && n > 1.0) {
        return Err(Error::Domain(format!("tail exponent n must exceed 1, got {n}")));
    }
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::Domain(format!("tail offset M must be positive, got {m}")));
    }
    Ok(())
}

/// Builds the weight for `(n, M)` with `μ`, `λ` and `C_𝒴` derived.
pub fn build_weight(n: f64, m: f64) -> Result<WeightSpec> {
    check_n_m(n, m)?;
    let mut w = WeightSpec::coefficients(n, m);
    let (mu, lambda) = derive_mu_lambda(&w)?;
    w.mu = mu;
    w.lambda = lambda;
    w.c_y = weight_l1_norm(&w)?;
    Ok(w)
}

pub fn eval_weight(w: &WeightSpec, y: f64) -> Result<(f64, f64, f64)> {
    if !(y.is_finite() && y >= 0.0) {
        return Err(Error::Domain(format!("weight argument must be >= 0, got {y}")));
    }
    Ok(w.eval(y))
}

/// `C_𝒴 = ‖𝒴‖_{L¹}`: exact polynomial integrals on `[0, 2]` plus `M/(n−1)`.
pub fn weight_l1_norm(w: &WeightSpec) -> Result<f64> {
    check_n_m(w.n, w.m)?;
    Ok(w.polynomial_mass() + w.m / (w.n - 1.0))
}

/// `μ ≥ sup_{(0,β)} y𝒴′/𝒴` and `λ ≥ sup_{(α,γ)} max(0, −𝒴″/𝒴)`.
pub fn derive_mu_lambda(w: &WeightSpec) -> Result<(f64, f64)> {
    // y𝒴′/𝒴 → 1 as y → 0 on the linear piece.
    let mut mu_sup: f64 = 1.0;
    for (lo, hi) in [(0.0, w.alpha), (w.alpha, w.beta)] {
        for y in samples(lo, hi, DERIVE_SAMPLES).filter(|&y| y > 0.0 && y < w.beta) {
            let (v, d1, _) = w.eval(y);
            if !(v > 0.0) {
                return Err(Error::Domain(format!("weight vanishes at interior sample y = {y}")));
            }
            mu_sup = mu_sup.max(y * d1 / v);
        }
    }
    let mut lambda_sup: f64 = 0.0;
    for (lo, hi) in [(w.alpha, w.beta), (w.beta, w.gamma)] {
        for y in samples(lo, hi, DERIVE_SAMPLES).filter(|&y| y > w.alpha && y < w.gamma) {
            let (v, _, d2) = w.eval(y);
            if !(v > 0.0) {
                return Err(Error::Domain(format!("weight vanishes at interior sample y = {y}")));
            }
            lambda_sup = lambda_sup.max(concavity_ratio(v, d2));
        }
    }
    Ok(((1.0 + RATIO_MARGIN) * mu_sup, (1.0 + RATIO_MARGIN) * lambda_sup))
}

/// `max(0, −𝒴″/𝒴)` for `𝒴 > 0`.
fn concavity_ratio(v: f64, d2: f64) -> f64 {
    (-d2 / v).max(0.0)
}

/// `η = (1 − 10⁻⁹)·min(2, 1/σ)`, so `1 < η < 2` and `ησ < 1`.
pub fn choose_eta(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Domain(format!("sigma must lie in (0, 1), got {sigma}")));
    }
    Ok((1.0 - 1e-9) * (1.0 / sigma).min(2.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRecord {
    pub id: u8,
    pub description: &'static str,
    pub satisfied: bool,
    pub worst_margin: f64,
    pub worst_location: f64,
}

/// C¹ mismatch at one breakpoint, relative to the magnitude of the values.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityRecord {
    pub at: f64,
    pub value_gap: f64,
    pub slope_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub records: Vec<ConstraintRecord>,
    pub continuity: Vec<ContinuityRecord>,
    /// Derived sign conditions `𝒴′ ≥ 0` on `[0, β]` and `𝒴′ ≤ 0` on `[β, ∞)`,
    /// reported alongside but not part of `overall`.
    pub slope_signs: Vec<ConstraintRecord>,
    pub overall: bool,
}

impl ConstraintReport {
    pub fn record(&self, id: u8) -> &ConstraintRecord {
        &self.records[usize::from(id) - 1]
    }
}

impl fmt::Display for ConstraintRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.id == 0 { "-".to_string() } else { self.id.to_string() };
        write!(
            f,
            "({tag}) {} margin {:+.3e} at y = {:.6}  {}",
            if self.satisfied { "pass" } else { "FAIL" },
            self.worst_margin,
            self.worst_location,
            self.description
        )
    }
}

impl fmt::Display for ConstraintReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            writeln!(f, "{r}")?;
        }
        for c in &self.continuity {
            writeln!(f, "continuity at y = {}: value gap {:.3e}, slope gap {:.3e}", c.at, c.value_gap, c.slope_gap)?;
        }
        for r in &self.slope_signs {
            writeln!(f, "{r}")?;
        }
        writeln!(f, "overall: {}", if self.overall { "pass" } else { "fail" })
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n: {}", self.n)?;
        writeln!(f, "M: {}", self.m)?;
        writeln!(f, "A, B, D, E, F: {:.12e}, {:.12e}, {:.12e}, {:.12e}, {:.12e}", self.a_coef, self.b_coef, self.d_coef, self.e_coef, self.f_coef)?;
        writeln!(f, "alpha, beta, gamma, delta: {}, {}, {:.12}, {}", self.alpha, self.beta, self.gamma, self.delta)?;
        writeln!(f, "sigma: {:.12}", self.sigma)?;
        writeln!(f, "mu: {:.12}", self.mu)?;
        writeln!(f, "lambda: {:.12}", self.lambda)?;
        writeln!(f, "C_Y: {:.12}", self.c_y)
    }
}

struct Tracker {
    margin: f64,
    at: f64,
}

impl Tracker {
    fn new() -> Self {
        Self {
            margin: f64::INFINITY,
            at: f64::NAN,
        }
    }

    fn see(&mut self, margin: f64, y: f64) {
        if margin < self.margin || margin.is_nan() {
            self.margin = margin;
            self.at = y;
        }
    }

    fn record(self, id: u8, description: &'static str, slack: f64) -> ConstraintRecord {
        ConstraintRecord {
            id,
            description,
            satisfied: self.margin >= -slack,
            worst_margin: self.margin,
            worst_location: self.at,
        }
    }
}

/// Tail sample points `y = 2 + M s/(1 − s)`, `s ∈ [0, 1)`.
fn tail_samples(w: &WeightSpec, count: usize) -> impl Iterator<Item = f64> + '_ {
    (0..count).map(move |k| {
        let s = k as f64 / count as f64;
        w.delta + w.m * s / (1.0 - s)
    })
}

/// Checks the nine structural constraints on the weight.
pub fn validate_constraints(w: &WeightSpec, samples_per_piece: usize) -> Result<ConstraintReport> {
    if samples_per_piece < MIN_VALIDATION_SAMPLES {
        return Err(Error::Domain(format!(
            "need at least {MIN_VALIDATION_SAMPLES} samples per piece, got {samples_per_piece}"
        )));
    }
    let s = samples_per_piece;
    // Rounding allowance for sign conditions that hold with equality somewhere.
    let slack = 1e-12 * (1.0 + w.a_coef.abs());
    let pieces = [
        (0.0, w.alpha),
        (w.alpha, w.beta),
        (w.beta, w.gamma),
        (w.gamma, w.delta),
    ];
    let mut finite: Vec<f64> = Vec::new();
    for (lo, hi) in pieces {
        finite.extend(samples(lo, hi, s));
    }
    let tail: Vec<f64> = tail_samples(w, s).collect();

    // (1) nonnegative, integrable, C¹ at the breakpoints.
    let mut c1 = Tracker::new();
    for &y in finite.iter().chain(&tail) {
        c1.see(w.eval(y).0, y);
    }
    let mut continuity = Vec::new();
    let mut continuous = true;
    for at in [w.alpha, w.beta, w.delta] {
        let (vl, dl, _) = w.eval_left(at);
        let (vr, dr, _) = w.eval(at);
        let scale_v = vl.abs().max(vr.abs()).max(f64::MIN_POSITIVE);
        let scale_d = dl.abs().max(dr.abs()).max(1.0);
        let rec = ContinuityRecord {
            at,
            value_gap: (vl - vr).abs() / scale_v,
            slope_gap: (dl - dr).abs() / scale_d,
        };
        continuous &= rec.value_gap <= CONTINUITY_TOL && rec.slope_gap <= CONTINUITY_TOL;
        continuity.push(rec);
    }
    let mut r1 = c1.record(1, "Y >= 0, Y in W^{2,inf} and L^1", slack);
    r1.satisfied &= continuous && w.n > 1.0 && w.c_y.is_finite() && w.c_y > 0.0;

    // (2) Y(0) = Y(inf) = 0, Y'(beta) = Y'(inf) = 0. The limits at infinity
    // hold for any n > 0; the tail is analytic.
    let mut c2 = Tracker::new();
    c2.see(-w.eval(0.0).0.abs(), 0.0);
    c2.see(-w.eval_left(w.beta).1.abs(), w.beta);
    c2.see(-w.eval(w.beta).1.abs(), w.beta);
    let mut r2 = c2.record(2, "Y(0) = Y(inf) = 0, Y'(beta) = Y'(inf) = 0", slack);
    r2.satisfied &= w.n > 0.0;

    // (3) Y'' <= 0 on (alpha, gamma).
    let mut c3 = Tracker::new();
    for y in finite.iter().copied().filter(|&y| y > w.alpha && y < w.gamma) {
        c3.see(-w.eval(y).2, y);
    }
    let r3 = c3.record(3, "Y'' <= 0 on (alpha, gamma)", slack);

    // (4) Y'' >= 0 on [0, alpha] and [gamma, inf).
    let mut c4 = Tracker::new();
    for &y in finite.iter().filter(|&&y| y <= w.alpha || y >= w.gamma).chain(&tail) {
        c4.see(w.eval(y).2, y);
    }
    let r4 = c4.record(4, "Y'' >= 0 on [0, alpha] and [gamma, inf)", slack);

    let slope_0 = w.eval(0.0).1;
    let slope_delta = w.eval(w.delta).1;
    let slope_gamma = w.eval(w.gamma).1;

    // (5) Y'(0)/2 + Y'(delta) + 2 Y'(gamma) >= 0.
    let mut c5 = Tracker::new();
    c5.see(0.5 * slope_0 + slope_delta + 2.0 * slope_gamma, w.gamma);
    let r5 = c5.record(5, "Y'(0)/2 + Y'(delta) + 2Y'(gamma) >= 0", 0.0);

    // (6) inf_{[alpha, delta]} Y / (delta - alpha) + Y'(delta) + 2 Y'(gamma) >= 0.
    let (mut inf, mut inf_at) = (f64::INFINITY, f64::NAN);
    for y in finite.iter().copied().filter(|&y| y >= w.alpha).chain([w.delta]) {
        let v = w.eval(y).0;
        if v < inf {
            inf = v;
            inf_at = y;
        }
    }
    let mut c6 = Tracker::new();
    c6.see(inf / (w.delta - w.alpha) + slope_delta + 2.0 * slope_gamma, inf_at);
    let r6 = c6.record(6, "inf Y/(delta - alpha) + Y'(delta) + 2Y'(gamma) >= 0", 0.0);

    // (7) y Y' <= mu Y on (0, beta).
    let mut c7 = Tracker::new();
    for y in finite.iter().copied().filter(|&y| y > 0.0 && y < w.beta) {
        let (v, d1, _) = w.eval(y);
        c7.see(w.mu * v - y * d1, y);
    }
    let r7 = c7.record(7, "y Y' <= mu Y on (0, beta)", slack);

    // (8) Y'' >= -lambda Y on (alpha, gamma).
    let mut c8 = Tracker::new();
    for y in finite.iter().copied().filter(|&y| y > w.alpha && y < w.gamma) {
        let (v, _, d2) = w.eval(y);
        c8.see(d2 + w.lambda * v, y);
    }
    let r8 = c8.record(8, "Y'' >= -lambda Y on (alpha, gamma)", slack);

    // (9) Y'^2 / (Y Y'') <= sigma < 1 on [delta, inf). Equality holds on the
    // tail, so the ratio is compared with a relative rounding allowance.
    let mut c9 = Tracker::new();
    let mut degenerate = false;
    for &y in &tail {
        let (v, d1, d2) = w.eval(y);
        let denom = v * d2;
        if !(denom > 1e-300) {
            degenerate = true;
            c9.see(f64::NEG_INFINITY, y);
            continue;
        }
        c9.see(w.sigma - d1 * d1 / denom, y);
    }
    let mut r9 = c9.record(9, "Y'^2/(Y Y'') <= sigma < 1 on [delta, inf)", 1e-12 * w.sigma);
    r9.satisfied &= !degenerate && w.sigma < 1.0;

    let records = vec![r1, r2, r3, r4, r5, r6, r7, r8, r9];
    let overall = records.iter().all(|r| r.satisfied);

    let mut up = Tracker::new();
    for y in finite.iter().copied().filter(|&y| y <= w.beta) {
        up.see(w.eval(y).1, y);
    }
    let mut down = Tracker::new();
    for &y in finite.iter().filter(|&&y| y >= w.beta).chain(&tail) {
        down.see(-w.eval(y).1, y);
    }
    let slope_signs = vec![
        up.record(0, "Y' >= 0 on [0, beta]", slack),
        down.record(0, "Y' <= 0 on [beta, inf)", slack),
    ];

    Ok(ConstraintReport {
        records,
        continuity,
        slope_signs,
        overall,
    })
}

/// Result of a successful parameter search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchHit {
    pub weight: WeightSpec,
    pub report: ConstraintReport,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SearchError {
    #[error("invalid search setup: {0}")]
    Invalid(String),
    #[error("no admissible weight found")]
    NotFound {
        /// Last report produced for each candidate exponent.
        last_reports: Vec<(f64, Option<ConstraintReport>)>,
    },
}

/// Geometric sweep of `M` for each candidate `n` (ascending) until the
/// constraints pass. Returns the first hit in `(n, M)` order.
pub fn search_parameters(
    n_candidates: &[f64],
    m_start: f64,
    m_factor: f64,
    m_max: f64,
    samples_per_piece: usize,
) -> std::result::Result<SearchHit, SearchError> {
    if let Some(n) = n_candidates.iter().find(|n| !(n.is_finite() && **n > 1.0)) {
        return Err(SearchError::Invalid(format!("every n must exceed 1, got {n}")));
    }
    if !(m_factor.is_finite() && m_factor > 1.0) {
        return Err(SearchError::Invalid(format!("m_factor must exceed 1, got {m_factor}")));
    }
    if !(m_start.is_finite() && m_start > 0.0) {
        return Err(SearchError::Invalid(format!("m_start must be positive, got {m_start}")));
    }
    if samples_per_piece < MIN_VALIDATION_SAMPLES {
        return Err(SearchError::Invalid(format!(
            "need at least {MIN_VALIDATION_SAMPLES} samples per piece"
        )));
    }
    let mut ordered = n_candidates.to_vec();
    ordered.sort_by(f64::total_cmp);
    let mut last_reports = Vec::new();
    for n in ordered {
        let mut last = None;
        let mut m = m_start;
        while m <= m_max {
            if let Ok(weight) = build_weight(n, m) {
                let report = validate_constraints(&weight, samples_per_piece)
                    .expect("sample count checked above");
                if report.overall {
                    return Ok(SearchHit { weight, report });
                }
                last = Some(report);
            }
            m *= m_factor;
        }
        last_reports.push((n, last));
    }
    Err(SearchError::NotFound { last_reports })
}
