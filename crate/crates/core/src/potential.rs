//! Electric potentials `V(x, ξ) ≥ 0`, used both as anti-Wick symbols and as
//! multiplication operators `V(x, y)` in the plane.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad;
use crate::region::RegionSpec;

/// Relative level that defines the effective support of a decaying potential.
pub const SUPPORT_LEVEL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Zero,
    /// `A·⟨x − x₀, ξ − ξ₀⟩^{−m}` with `⟨x, ξ⟩ = (1 + x² + ξ²)^{1/2}`.
    PowerLaw { amplitude: f64, m: f64, x0: f64, xi0: f64 },
    /// `A·exp(−((x − x₀)² + (ξ − ξ₀)²)/w²)`.
    Gaussian { amplitude: f64, width: f64, x0: f64, xi0: f64 },
    /// `A·𝟙_Ω`.
    Indicator { amplitude: f64, region: RegionSpec },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialV {
    kind: PotentialKind,
}

impl PotentialV {
    pub fn new(kind: PotentialKind) -> Result<Self> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::validation(key, format!("must be positive and finite, got {v}")))
            }
        };
        let finite = |key: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(key, "must be finite"))
            }
        };
        match &kind {
            PotentialKind::Zero => {}
            PotentialKind::PowerLaw { amplitude, m, x0, xi0 } => {
                positive("amplitude", *amplitude)?;
                if !(m.is_finite() && *m > 1.0) {
                    return Err(Error::validation("m", format!("power-law exponent must exceed 1, got {m}")));
                }
                finite("x0", *x0)?;
                finite("xi0", *xi0)?;
            }
            PotentialKind::Gaussian { amplitude, width, x0, xi0 } => {
                positive("amplitude", *amplitude)?;
                positive("width", *width)?;
                finite("x0", *x0)?;
                finite("xi0", *xi0)?;
            }
            PotentialKind::Indicator { amplitude, region } => {
                positive("amplitude", *amplitude)?;
                region.validate()?;
            }
        }
        Ok(Self { kind })
    }

    pub fn zero() -> Self {
        Self { kind: PotentialKind::Zero }
    }

    pub fn power_law(m: f64) -> Result<Self> {
        Self::new(PotentialKind::PowerLaw { amplitude: 1.0, m, x0: 0.0, xi0: 0.0 })
    }

    pub fn gaussian(amplitude: f64, width: f64, x0: f64, xi0: f64) -> Result<Self> {
        Self::new(PotentialKind::Gaussian { amplitude, width, x0, xi0 })
    }

    pub fn indicator(amplitude: f64, region: RegionSpec) -> Result<Self> {
        Self::new(PotentialKind::Indicator { amplitude, region })
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, PotentialKind::Zero)
    }

    pub fn eval(&self, x: f64, xi: f64) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::PowerLaw { amplitude, m, x0, xi0 } => {
                let r2 = 1.0 + (x - x0).powi(2) + (xi - xi0).powi(2);
                amplitude * r2.powf(-0.5 * m)
            }
            PotentialKind::Gaussian { amplitude, width, x0, xi0 } => {
                amplitude * (-((x - x0).powi(2) + (xi - xi0).powi(2)) / (width * width)).exp()
            }
            PotentialKind::Indicator { amplitude, region } => {
                if region.contains(x, xi) {
                    *amplitude
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sup(&self) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::PowerLaw { amplitude, .. }
            | PotentialKind::Gaussian { amplitude, .. }
            | PotentialKind::Indicator { amplitude, .. } => *amplitude,
        }
    }

    /// `ξ` about which every vertical slice of `V` is symmetric (when it is).
    pub fn xi_center(&self) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::PowerLaw { xi0, .. } | PotentialKind::Gaussian { xi0, .. } => *xi0,
            PotentialKind::Indicator { region, .. } => region.y_center(),
        }
    }

    /// Whether `ξ ↦ V(x, ξ)` is even about [`xi_center`](Self::xi_center) for every `x`.
    /// When it is, the anti-Wick kernel is real after a diagonal phase change.
    pub fn is_xi_symmetric(&self) -> bool {
        match &self.kind {
            PotentialKind::Indicator { region, .. } => region.is_y_symmetric(),
            _ => true,
        }
    }

    /// Radius of the disc `{V > level}` for the radial kinds (zero when empty).
    pub(crate) fn level_radius(&self, level: f64) -> Option<f64> {
        match &self.kind {
            PotentialKind::PowerLaw { amplitude, m, .. } => {
                let r2 = (amplitude / level).powf(2.0 / m) - 1.0;
                Some(if r2 > 0.0 { r2.sqrt() } else { 0.0 })
            }
            PotentialKind::Gaussian { amplitude, width, .. } => {
                let r2 = width * width * (amplitude / level).ln();
                Some(if r2 > 0.0 { r2.sqrt() } else { 0.0 })
            }
            _ => None,
        }
    }

    /// Bounding box `(x_lo, x_hi, ξ_lo, ξ_hi)` of `{V > level}`, or `None` when
    /// that set is empty.
    pub fn level_box(&self, level: f64) -> Option<(f64, f64, f64, f64)> {
        match &self.kind {
            PotentialKind::Zero => None,
            PotentialKind::PowerLaw { x0, xi0, .. } | PotentialKind::Gaussian { x0, xi0, .. } => {
                let r = self.level_radius(level)?;
                (r > 0.0).then(|| (x0 - r, x0 + r, xi0 - r, xi0 + r))
            }
            PotentialKind::Indicator { amplitude, region } => {
                if level >= *amplitude {
                    return None;
                }
                let (a, b) = region.x_range();
                let (c, d) = region.y_range();
                Some((a, b, c, d))
            }
        }
    }

    /// Bounding box of the effective support `{V > SUPPORT_LEVEL·sup V}`.
    pub fn support_box(&self) -> Option<(f64, f64, f64, f64)> {
        self.level_box(SUPPORT_LEVEL * self.sup())
    }

    /// `max_ξ V(x, ξ)`.
    pub fn column_max(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::PowerLaw { xi0, .. } | PotentialKind::Gaussian { xi0, .. } => self.eval(x, *xi0),
            PotentialKind::Indicator { amplitude, region } => {
                if region.cross_section(x).is_empty() {
                    0.0
                } else {
                    *amplitude
                }
            }
        }
    }

    /// Abscissae where `x ↦ V(x, ·)` is not smooth; quadrature panels break there.
    pub fn x_breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            PotentialKind::Indicator { region, .. } => region.x_breakpoints(),
            _ => Vec::new(),
        }
    }

    /// Fourier data of one vertical slice: `(1/2π)∫ V(x, ξ) e^{−iq(ξ − ξ_c)} dξ`
    /// returned as `(cosine part, sine part)` so that the transform equals
    /// `cos − i·sin`. The sine part vanishes for ξ-symmetric potentials.
    pub fn slice_transform(&self, x: f64, q: f64) -> (f64, f64) {
        let inv = 1.0 / (2.0 * PI);
        match &self.kind {
            PotentialKind::Zero => (0.0, 0.0),
            PotentialKind::Gaussian { amplitude, width, x0, .. } => {
                let w = *width;
                let c = amplitude * (-(x - x0).powi(2) / (w * w)).exp() * w * PI.sqrt() * (-0.25 * q * q * w * w).exp();
                (c * inv, 0.0)
            }
            PotentialKind::PowerLaw { amplitude, m, x0, .. } => {
                let a = (1.0 + (x - x0).powi(2)).sqrt();
                (amplitude * inv * power_law_slice(*m, a, q.abs()), 0.0)
            }
            PotentialKind::Indicator { amplitude, region } => {
                let c0 = region.y_center();
                let mut cs = 0.0;
                let mut sn = 0.0;
                for (lo, hi) in region.cross_section(x) {
                    let (u, v) = (lo - c0, hi - c0);
                    if q.abs() * (v - u).max(u.abs().max(v.abs())) < 1e-8 {
                        cs += v - u;
                        sn += 0.5 * q * (v * v - u * u);
                    } else {
                        cs += ((q * v).sin() - (q * u).sin()) / q;
                        sn += ((q * u).cos() - (q * v).cos()) / q;
                    }
                }
                (amplitude * inv * cs, amplitude * inv * sn)
            }
        }
    }
}

/// `∫ (a² + u²)^{−m/2} cos(q u) du` over the real line, `q ≥ 0`.
pub fn power_law_slice(m: f64, a: f64, q: f64) -> f64 {
    if (m - 2.0).abs() < 1e-15 {
        return PI * (-a * q).exp() / a;
    }
    let nu = 0.5 * (m - 1.0);
    if q == 0.0 {
        return PI.sqrt() * libm::tgamma(nu) / libm::tgamma(nu + 0.5) * a.powf(-2.0 * nu);
    }
    let z = a * q;
    // 2√π/Γ(ν+½)·(q/2a)^ν·K_ν(z), with K_ν(z) = e^{−z}∫₀^∞ e^{−z(cosh t − 1)} cosh(νt) dt
    let t_max = (1.0 + 60.0 / z).acosh() + 1.0;
    let integrand = |t: f64| (-z * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
    let k_scaled = quad::adaptive(&integrand, 0.0, t_max, 1e-13);
    let log_pref = (2.0 * PI.sqrt()).ln() - libm::lgamma(nu + 0.5) + nu * (q / (2.0 * a)).ln() - z;
    log_pref.exp() * k_scaled
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slice_by_quadrature(v: &PotentialV, x: f64, q: f64, half: f64) -> (f64, f64) {
        let c0 = v.xi_center();
        let f = |xi: f64| v.eval(x, xi) * (q * (xi - c0)).cos();
        let g = |xi: f64| v.eval(x, xi) * (q * (xi - c0)).sin();
        let gl = quad::GaussLegendre::new(20);
        let n = 4000;
        let (mut a, mut b) = (0.0, 0.0);
        for i in 0..n {
            let lo = c0 - half + 2.0 * half * i as f64 / n as f64;
            let hi = c0 - half + 2.0 * half * (i + 1) as f64 / n as f64;
            a += gl.integrate(lo, hi, f);
            b += gl.integrate(lo, hi, g);
        }
        (a / (2.0 * PI), b / (2.0 * PI))
    }

    #[test]
    fn gaussian_transform() {
        let v = PotentialV::gaussian(0.3, 1.2, 1.0, -0.5).unwrap();
        for (x, q) in [(0.0, 0.0), (1.5, 0.7), (-1.0, 2.5)] {
            let (c, s) = v.slice_transform(x, q);
            let (qc, _) = slice_by_quadrature(&v, x, q, 12.0);
            assert!((c - qc).abs() < 1e-12, "x={x} q={q}");
            assert_eq!(s, 0.0);
        }
    }

    #[test]
    fn power_law_transform_general_exponent() {
        // closed form for m = 2 against the Bessel representation near m = 2
        let a: f64 = 1.7;
        for q in [0.0, 0.3, 2.0] {
            let exact = PI * (-a * q).exp() / a;
            let near = power_law_slice(2.0 + 1e-9, a, q);
            assert!((near - exact).abs() < 1e-7 * exact, "q={q}");
        }
        // m = 4: ∫ (a²+u²)^{-2} cos(qu) du = π(1 + aq)e^{-aq}/(2a³)
        for q in [0.0, 0.5, 3.0] {
            let exact = PI * (1.0 + a * q) * (-a * q).exp() / (2.0 * a.powi(3));
            assert!((power_law_slice(4.0, a, q) - exact).abs() < 1e-10 * exact.max(1e-300), "q={q}");
        }
    }

    #[test]
    fn indicator_transform_matches_quadrature() {
        let tri = RegionSpec::polygon(vec![(0.0, 0.0), (2.0, 1.0), (0.5, 3.0)]).unwrap();
        let v = PotentialV::indicator(0.7, tri).unwrap();
        for (x, q) in [(0.3, 0.0), (0.8, 1.3), (1.5, -2.2)] {
            let (c, s) = v.slice_transform(x, q);
            let (qc, qs) = slice_by_quadrature(&v, x, q, 2.0);
            assert!((c - qc).abs() < 1e-5 && (s - qs).abs() < 1e-5, "x={x} q={q}");
        }
        assert!(!v.is_xi_symmetric());
    }

    #[test]
    fn level_boxes() {
        let v = PotentialV::power_law(2.0).unwrap();
        let (a, b, _, _) = v.level_box(0.01).unwrap();
        assert!((b - 99f64.sqrt()).abs() < 1e-12 && (a + b).abs() < 1e-12);
        assert!(v.level_box(1.0).is_none());
        assert!(PotentialV::zero().support_box().is_none());
        assert_eq!(v.sup(), 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PotentialV::power_law(1.0).is_err());
        assert!(PotentialV::gaussian(-1.0, 1.0, 0.0, 0.0).is_err());
        assert!(PotentialV::gaussian(1.0, 0.0, 0.0, 0.0).is_err());
    }
}
