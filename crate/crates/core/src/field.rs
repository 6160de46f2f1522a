//! Magnetic field profiles `B(x)`, the potential `b(x) = ∫₀ˣ B`, its inverse,
//! and the saturation threshold `x⁺`.
//!
//! Internally everything is expressed through the *deficit* `B₊ − B(x)` and
//! its primitive `D(x) = ∫₀ˣ (B₊ − B)`, so that `b(x) = B₊·x − D(x)`. Beyond
//! `x⁺` the deficit vanishes identically, which keeps differences such as
//! `(B₊(x − c))² − (b(x) − b(c))²` exact zeros where they should be.

use crate::error::{Error, Result};
use crate::quad::{self, GaussLegendre};

/// Half-width, in units of the transition width, of the smooth-step support.
pub const SMOOTH_STEP_HALF_SPAN: f64 = 10.0;

/// Relative tolerance used when deciding `B(x) == B₊` on sampled fields.
pub const SATURATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
    /// Piecewise constant: `B(x) = Bᵢ` on `[xᵢ, xᵢ₊₁)`.
    Step,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    xs: Vec<f64>,
    values: Vec<f64>,
    interpolation: Interpolation,
}

impl SampleTable {
    pub fn new(xs: Vec<f64>, values: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        if xs.len() != values.len() {
            return Err(Error::validation("samples", "x and B columns differ in length"));
        }
        if xs.len() < 2 {
            return Err(Error::validation("samples", "need at least two samples"));
        }
        if xs.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::validation("samples", "non-finite sample"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation("samples", "x values must be strictly increasing"));
        }
        Ok(Self {
            xs,
            values,
            interpolation,
        })
    }

    /// Two-column `x,B` text; `#` starts a comment and a non-numeric first row
    /// is taken as a header.
    pub fn parse(text: &str, interpolation: Interpolation) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let (mut xs, mut values) = (Vec::new(), Vec::new());
        for (row, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                msg: e.to_string(),
            })?;
            let line = rec.position().map_or(row + 1, |p| p.line() as usize);
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            if rec.len() != 2 {
                return Err(Error::Parse { line, msg: format!("expected 2 columns, found {}", rec.len()) });
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(x), Ok(b)) => {
                    xs.push(x);
                    values.push(b);
                }
                _ if xs.is_empty() && row == 0 => {}
                _ => return Err(Error::Parse { line, msg: format!("non-numeric row `{}`", rec.iter().collect::<Vec<_>>().join(",")) }),
            }
        }
        Self::new(xs, values, interpolation)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Interpolated value, with constant extension beyond the table.
    fn value(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.values[0];
        }
        if x >= self.xs[n - 1] {
            return self.values[n - 1];
        }
        let i = self.xs.partition_point(|&xi| xi <= x) - 1;
        match self.interpolation {
            Interpolation::Step => self.values[i],
            Interpolation::Linear => {
                let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
                self.values[i] + t * (self.values[i + 1] - self.values[i])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldKind {
    /// `B ≡ B₊`.
    Constant,
    /// `B₋ + (B₊ − B₋)·σ((x − center)/width)` with a C^∞ sigmoid that saturates
    /// exactly outside `|x − center| ≤ 10·width`.
    SmoothStep { center: f64, width: f64 },
    /// Logistic profile; never reaches `B₊`, so `x⁺ = +∞`.
    Logistic { center: f64, width: f64 },
    /// `B₊ − (B₊ − B₋)·exp(−x²/width²)`.
    GaussianDip { width: f64 },
    Sampled(SampleTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    kind: FieldKind,
    b_minus: f64,
    b_plus: f64,
}

/// Smooth transition `ψ(s)` on [0,1] built from `e^{-1/t}`; returns `(ψ, 1 − ψ)`
/// with both halves computed without cancellation.
fn smooth_transition(s: f64) -> (f64, f64) {
    fn bump(t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            (-1.0 / t).exp()
        }
    }
    if s <= 0.0 {
        return (0.0, 1.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0);
    }
    let a = bump(s);
    let b = bump(1.0 - s);
    (a / (a + b), b / (a + b))
}

impl FieldSpec {
    pub fn new(kind: FieldKind, b_minus: f64, b_plus: f64) -> Result<Self> {
        if !(b_minus.is_finite() && b_plus.is_finite()) || b_minus <= 0.0 {
            return Err(Error::validation("b_minus", "field bounds must be positive and finite"));
        }
        if b_plus < b_minus {
            return Err(Error::validation("b_plus", "b_plus must not be below b_minus"));
        }
        match &kind {
            FieldKind::Constant => {}
            FieldKind::SmoothStep { center, width } | FieldKind::Logistic { center, width } => {
                if !center.is_finite() {
                    return Err(Error::validation("center", "must be finite"));
                }
                if !(width.is_finite() && *width > 0.0) {
                    return Err(Error::validation("width", "must be positive"));
                }
            }
            FieldKind::GaussianDip { width } => {
                if !(width.is_finite() && *width > 0.0) {
                    return Err(Error::validation("width", "must be positive"));
                }
            }
            FieldKind::Sampled(table) => {
                let tol = SATURATION_TOL * b_plus;
                if table
                    .values
                    .iter()
                    .any(|&v| v < b_minus - tol || v > b_plus + tol)
                {
                    return Err(Error::validation(
                        "samples",
                        "sampled field leaves [b_minus, b_plus]",
                    ));
                }
            }
        }
        Ok(Self {
            kind,
            b_minus,
            b_plus,
        })
    }

    pub fn constant(b: f64) -> Result<Self> {
        Self::new(FieldKind::Constant, b, b)
    }

    pub fn smooth_step(b_minus: f64, b_plus: f64, center: f64, width: f64) -> Result<Self> {
        Self::new(FieldKind::SmoothStep { center, width }, b_minus, b_plus)
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn b_minus(&self) -> f64 {
        self.b_minus
    }

    pub fn b_plus(&self) -> f64 {
        self.b_plus
    }

    /// `B₊ − B(x)`, with constant extension for sampled tables.
    pub fn deficit(&self, x: f64) -> f64 {
        let gap = self.b_plus - self.b_minus;
        match &self.kind {
            FieldKind::Constant => 0.0,
            FieldKind::SmoothStep { center, width } => {
                let s = ((x - center) / width + SMOOTH_STEP_HALF_SPAN) / (2.0 * SMOOTH_STEP_HALF_SPAN);
                gap * smooth_transition(s).1
            }
            FieldKind::Logistic { center, width } => {
                let u = (x - center) / width;
                gap / (1.0 + u.exp())
            }
            FieldKind::GaussianDip { width } => gap * (-(x / width).powi(2)).exp(),
            FieldKind::Sampled(t) => (self.b_plus - t.value(x)).max(0.0),
        }
    }

    fn value_unchecked(&self, x: f64) -> f64 {
        match &self.kind {
            FieldKind::Sampled(t) => t.value(x),
            _ => self.b_plus - self.deficit(x),
        }
    }

    /// `B(x)`. Sampled fields refuse to extrapolate.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if let FieldKind::Sampled(t) = &self.kind {
            let (lo, hi) = t.range();
            if !(lo..=hi).contains(&x) {
                return Err(Error::Range(format!(
                    "x = {x} outside sampled field range [{lo}, {hi}]"
                )));
            }
        }
        Ok(self.value_unchecked(x))
    }

    /// Infimum of the `x` beyond which `B ≡ B₊`; `−∞` for a constant field,
    /// `+∞` when the field never saturates.
    pub fn x_plus(&self) -> f64 {
        match &self.kind {
            FieldKind::Constant => f64::NEG_INFINITY,
            FieldKind::SmoothStep { center, width } => center + SMOOTH_STEP_HALF_SPAN * width,
            FieldKind::Logistic { .. } | FieldKind::GaussianDip { .. } => {
                if self.b_plus == self.b_minus {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            }
            FieldKind::Sampled(t) => {
                let tol = SATURATION_TOL * self.b_plus;
                match t.values.iter().rposition(|&v| v < self.b_plus - tol) {
                    None => f64::NEG_INFINITY,
                    Some(i) if i + 1 < t.xs.len() => t.xs[i + 1],
                    // the last sample is unsaturated and the table extends it
                    Some(_) => f64::INFINITY,
                }
            }
        }
    }

    /// Checks `lim_{x→∞} B = B₊` and `limsup_{x→−∞} B < B₊` by sampling far out.
    pub fn check_hypotheses(&self) -> Result<()> {
        let (far_left, far_right) = self.far_points();
        let tol = SATURATION_TOL * self.b_plus;
        if self.deficit(far_right) > 1e-9 * self.b_plus {
            return Err(Error::validation("field", "B does not approach b_plus as x → +∞"));
        }
        let left = self.deficit(far_left);
        if left <= tol {
            return Err(Error::validation(
                "field",
                "limsup of B at −∞ must stay below b_plus (no spectral gap otherwise)",
            ));
        }
        Ok(())
    }

    fn far_points(&self) -> (f64, f64) {
        match &self.kind {
            FieldKind::Constant => (-1e6, 1e6),
            FieldKind::SmoothStep { center, width } | FieldKind::Logistic { center, width } => {
                (center - 60.0 * width, center + 60.0 * width)
            }
            FieldKind::GaussianDip { width } => (-60.0 * width, 60.0 * width),
            FieldKind::Sampled(t) => t.range(),
        }
    }

    /// Interval outside of which the deficit equals its limit values (to
    /// below 1e-18 relative), plus the natural panel width inside it.
    fn active_interval(&self) -> Option<(f64, f64, f64)> {
        match &self.kind {
            FieldKind::Constant => None,
            FieldKind::SmoothStep { center, width } => Some((
                center - SMOOTH_STEP_HALF_SPAN * width,
                center + SMOOTH_STEP_HALF_SPAN * width,
                width / 8.0,
            )),
            FieldKind::Logistic { center, width } => {
                Some((center - 42.0 * width, center + 42.0 * width, width / 8.0))
            }
            FieldKind::GaussianDip { width } => Some((-6.5 * width, 6.5 * width, width / 16.0)),
            FieldKind::Sampled(t) => {
                let (lo, hi) = t.range();
                Some((lo, hi, f64::INFINITY))
            }
        }
    }
}

/// The potential `b(x) = ∫₀ˣ B(t) dt` with a cached primitive of the deficit.
#[derive(Debug, Clone)]
pub struct PotentialB {
    field: FieldSpec,
    /// Panel boundaries covering the active interval of the field.
    breaks: Vec<f64>,
    /// `D` at each boundary, anchored so that `D(0) = 0`.
    cum: Vec<f64>,
    left_slope: f64,
    right_slope: f64,
    tol: f64,
}

thread_local! {
    static PANEL_RULE: GaussLegendre = GaussLegendre::new(20);
}

impl PotentialB {
    pub const DEFAULT_TOL: f64 = 1e-12;

    pub fn new(field: FieldSpec) -> Self {
        Self::with_tolerance(field, Self::DEFAULT_TOL)
    }

    pub fn with_tolerance(field: FieldSpec, tol: f64) -> Self {
        let (breaks, raw) = match field.active_interval() {
            None => (Vec::new(), Vec::new()),
            Some((lo, hi, panel)) => {
                let mut breaks = Vec::new();
                match &field.kind {
                    FieldKind::Sampled(t) => breaks.extend_from_slice(&t.xs),
                    _ => {
                        let n = ((hi - lo) / panel).ceil().max(1.0) as usize;
                        breaks.extend((0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64));
                    }
                }
                let mut raw = vec![0.0; breaks.len()];
                for i in 1..breaks.len() {
                    raw[i] = raw[i - 1] + panel_integral(&field, breaks[i - 1], breaks[i]);
                }
                (breaks, raw)
            }
        };
        // deficit limits outside the active interval
        let (left_slope, right_slope) = match &field.kind {
            FieldKind::Sampled(t) => (
                field.b_plus - t.values[0],
                field.b_plus - t.values[t.values.len() - 1],
            ),
            FieldKind::Constant => (0.0, 0.0),
            _ => (field.deficit(-1e300), 0.0),
        };
        let mut pot = Self {
            left_slope,
            right_slope,
            field,
            breaks,
            cum: raw,
            tol,
        };
        let anchor = pot.raw_deficit_integral(0.0);
        for c in &mut pot.cum {
            *c -= anchor;
        }
        pot
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn b_plus(&self) -> f64 {
        self.field.b_plus
    }

    pub fn b_minus(&self) -> f64 {
        self.field.b_minus
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    fn raw_deficit_integral(&self, x: f64) -> f64 {
        if self.breaks.is_empty() {
            return 0.0;
        }
        let n = self.breaks.len();
        if x <= self.breaks[0] {
            return self.cum[0] + self.left_slope * (x - self.breaks[0]);
        }
        if x >= self.breaks[n - 1] {
            return self.cum[n - 1] + self.right_slope * (x - self.breaks[n - 1]);
        }
        let i = self.breaks.partition_point(|&b| b <= x) - 1;
        self.cum[i] + panel_integral(&self.field, self.breaks[i], x)
    }

    /// `D(x) = ∫₀ˣ (B₊ − B)`.
    pub fn deficit_integral(&self, x: f64) -> f64 {
        self.raw_deficit_integral(x)
    }

    /// `b(x)`, extending sampled tables by their end values.
    pub fn b(&self, x: f64) -> f64 {
        self.field.b_plus * x - self.deficit_integral(x)
    }

    /// `b(x)`; sampled fields report a range error outside their table.
    pub fn eval_b(&self, x: f64) -> Result<f64> {
        self.check_range(x)?;
        Ok(self.b(x))
    }

    fn check_range(&self, x: f64) -> Result<()> {
        if let FieldKind::Sampled(t) = &self.field.kind {
            let (lo, hi) = t.range();
            if !(lo..=hi).contains(&x) {
                return Err(Error::Range(format!(
                    "x = {x} outside sampled field range [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    /// `b⁻¹(k)` by bisection inside the bracket given by `B₋|x| ≤ |b(x)| ≤ B₊|x|`.
    pub fn invert_b(&self, k: f64) -> Result<f64> {
        if !k.is_finite() {
            return Err(Error::Argument(format!("cannot invert b at k = {k}")));
        }
        let (bm, bp) = (self.field.b_minus, self.field.b_plus);
        let (mut lo, mut hi) = if k >= 0.0 { (k / bp, k / bm) } else { (k / bm, k / bp) };
        if self.b(lo) > k || self.b(hi) < k {
            // widen slightly against rounding in b
            let pad = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
            lo -= pad;
            hi += pad;
        }
        let mut iterations = 0;
        while hi - lo > self.tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.b(mid) < k {
                lo = mid;
            } else {
                hi = mid;
            }
            iterations += 1;
            if iterations > 400 {
                return Err(Error::Numerical(format!(
                    "b inversion at k = {k} did not converge (bracket [{lo}, {hi}])"
                )));
            }
        }
        let x = 0.5 * (lo + hi);
        self.check_range(x)?;
        Ok(x)
    }
}

fn panel_integral(field: &FieldSpec, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    match &field.kind {
        FieldKind::Sampled(t) => sampled_integral(field.b_plus, t, a, b),
        _ => {
            // 20 points on a panel of width ≤ w/8 resolves the profiles to rounding;
            // the adaptive pass only triggers for oversized spans.
            let est = PANEL_RULE.with(|gl| gl.integrate(a, b, |x| field.deficit(x)));
            if (b - a) > 1.0 {
                quad::adaptive(&|x| field.deficit(x), a, b, 1e-15 * (b - a))
            } else {
                est
            }
        }
    }
}

/// Exact integral of the sampled deficit over [a, b], where [a, b] lies in a
/// single table segment starting at `a`.
fn sampled_integral(b_plus: f64, t: &SampleTable, a: f64, b: f64) -> f64 {
    let d0 = b_plus - t.value(a);
    match t.interpolation {
        Interpolation::Step => d0 * (b - a),
        Interpolation::Linear => 0.5 * (d0 + b_plus - t.value(b)) * (b - a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_field() -> FieldSpec {
        let t = SampleTable::new(
            vec![-1000.0, 0.0, 1000.0],
            vec![0.5, 1.0, 1.0],
            Interpolation::Step,
        )
        .unwrap();
        FieldSpec::new(FieldKind::Sampled(t), 0.5, 1.0).unwrap()
    }

    #[test]
    fn constant_field_value() {
        let f = FieldSpec::constant(1.0).unwrap();
        assert_eq!(f.eval(7.0).unwrap(), 1.0);
    }

    #[test]
    fn smooth_step_saturates() {
        let w = 0.3;
        let f = FieldSpec::smooth_step(0.5, 1.0, 0.0, w).unwrap();
        assert!((f.eval(-10.0 * w).unwrap() - 0.5).abs() < 1e-9);
        assert!((f.eval(10.0 * w).unwrap() - 1.0).abs() < 1e-9);
        let mid = f.eval(0.0).unwrap();
        assert!((mid - 0.75).abs() < 1e-12);
    }

    #[test]
    fn unit_field_gives_identity_potential() {
        let p = PotentialB::new(FieldSpec::constant(1.0).unwrap());
        for x in [-5.0, -0.1, 0.0, 2.5, 40.0] {
            assert_eq!(p.eval_b(x).unwrap(), x);
        }
        assert!((p.invert_b(3.5).unwrap() - 3.5).abs() < 1e-12);
    }

    #[test]
    fn piecewise_potential_and_inverse() {
        let p = PotentialB::new(step_field());
        assert!((p.eval_b(-2.0).unwrap() + 1.0).abs() < 1e-12);
        assert!((p.eval_b(3.0).unwrap() - 3.0).abs() < 1e-12);
        assert!((p.invert_b(-1.0).unwrap() + 2.0).abs() < 1e-11);
        assert_eq!(step_field().x_plus(), 0.0);
    }

    #[test]
    fn sampled_range_errors() {
        let f = step_field();
        assert!(matches!(f.eval(2000.0), Err(Error::Range(_))));
        let p = PotentialB::new(f);
        assert!(matches!(p.eval_b(-1001.0), Err(Error::Range(_))));
        assert!(matches!(p.invert_b(5000.0), Err(Error::Range(_))));
    }

    #[test]
    fn x_plus_markers() {
        let dip = FieldSpec::new(FieldKind::GaussianDip { width: 1.0 }, 0.5, 1.0).unwrap();
        assert_eq!(dip.x_plus(), f64::INFINITY);
        assert_eq!(FieldSpec::constant(2.0).unwrap().x_plus(), f64::NEG_INFINITY);
        let s = FieldSpec::smooth_step(0.5, 1.0, -1.0, 0.1).unwrap();
        assert!((s.x_plus() - 0.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_step_potential_matches_quadrature() {
        let f = FieldSpec::smooth_step(0.5, 1.0, 0.4, 0.2).unwrap();
        let p = PotentialB::new(f.clone());
        for x in [-7.0, -2.1, -0.3, 0.0, 0.55, 1.9, 2.4, 9.0] {
            let reference = if x >= 0.0 {
                quad::adaptive(&|t| f.eval(t).unwrap(), 0.0, x, 1e-14)
            } else {
                -quad::adaptive(&|t| f.eval(t).unwrap(), x, 0.0, 1e-14)
            };
            assert!((p.b(x) - reference).abs() < 1e-11, "x={x}");
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(FieldSpec::new(FieldKind::Constant, 0.0, 1.0).is_err());
        assert!(FieldSpec::new(FieldKind::Constant, 2.0, 1.0).is_err());
        assert!(FieldSpec::smooth_step(0.5, 1.0, 0.0, -1.0).is_err());
        assert!(SampleTable::new(vec![0.0, 0.0], vec![1.0, 1.0], Interpolation::Linear).is_err());
    }

    #[test]
    fn hypotheses() {
        assert!(FieldSpec::smooth_step(0.5, 1.0, 0.0, 0.1)
            .unwrap()
            .check_hypotheses()
            .is_ok());
        let dip = FieldSpec::new(FieldKind::GaussianDip { width: 1.0 }, 0.5, 1.0).unwrap();
        assert!(dip.check_hypotheses().is_err());
        assert!(FieldSpec::constant(1.0).unwrap().check_hypotheses().is_err());
    }

    #[test]
    fn sample_table_text() {
        let t = SampleTable::parse("x,B\n# left\n-1, 0.5\n0,0.75\n\n1 ,1\n", Interpolation::Linear).unwrap();
        assert_eq!(t.xs(), &[-1.0, 0.0, 1.0]);
        assert_eq!(t.values(), &[0.5, 0.75, 1.0]);
        assert!(matches!(SampleTable::parse("0,1\n1,x\n", Interpolation::Step), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(SampleTable::parse("0,1,2\n", Interpolation::Step), Err(Error::Parse { .. })));
        assert!(matches!(SampleTable::parse("1,1\n0,1\n", Interpolation::Step), Err(Error::Validation { .. })));
    }
}
