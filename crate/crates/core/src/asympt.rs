//! Asymptotic predictors: the phase-space volume `N(λ, V, s)`, the geometric
//! functionals `κ`, `c₋`, `c₊` with the corridor constants `𝒞±`, and fits of
//! counting curves against `|ln λ|^{1/2}` and `B₊·N`.

use std::f64::consts::{E, TAU};
use std::io::Write;

use rayon::prelude::*;

use crate::effective::CountingCurve;
use crate::error::{Error, Result};
use crate::potential::{PotentialKind, PotentialV};
use crate::region::{golden_min, RegionSpec};

/// Area of `{x > s}` inside the disc of radius `r` centred at abscissa `cx`.
fn disc_segment_area(cx: f64, r: f64, s: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let d = ((s - cx) / r).clamp(-1.0, 1.0);
    r * r * (d.acos() - d * (1.0 - d * d).sqrt())
}

/// `(1/2π)·|{(x, ξ): V(x, ξ) > λ, x > s}|`, in closed form.
pub fn volume_n(v: &PotentialV, lambda: f64, s: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Argument(format!("volume level must be positive, got {lambda}")));
    }
    let area = match v.kind() {
        PotentialKind::Zero => 0.0,
        PotentialKind::PowerLaw { x0, .. } | PotentialKind::Gaussian { x0, .. } => {
            disc_segment_area(*x0, v.level_radius(lambda).unwrap_or(0.0), s)
        }
        PotentialKind::Indicator { amplitude, region } => {
            if lambda >= *amplitude {
                0.0
            } else if let RegionSpec::Disc { cx, r, .. } = region {
                disc_segment_area(*cx, *r, s)
            } else {
                region.clip_right(s).map_or(0.0, |r| r.area())
            }
        }
    };
    Ok(area / TAU)
}

/// Cell-counting estimate of [`volume_n`] at two resolutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridVolume {
    pub fine: f64,
    pub coarse: f64,
}

impl GridVolume {
    pub fn error_estimate(&self) -> f64 {
        (self.fine - self.coarse).abs()
    }
}

/// Count cell centres of an `n × n` grid over the bounding box of the level
/// set (clipped to `x > s`), and again at `n/2`.
pub fn volume_n_grid(v: &PotentialV, lambda: f64, s: f64, n: usize) -> Result<GridVolume> {
    if !(lambda > 0.0) || n < 2 {
        return Err(Error::Argument(format!("grid volume needs lambda > 0 and n >= 2, got {lambda}, {n}")));
    }
    let Some((x0, x1, y0, y1)) = v.level_box(lambda) else {
        return Ok(GridVolume { fine: 0.0, coarse: 0.0 });
    };
    let x0 = x0.max(s);
    if x0 >= x1 {
        return Ok(GridVolume { fine: 0.0, coarse: 0.0 });
    }
    let count = |n: usize| -> f64 {
        let (hx, hy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
        let hits: usize = (0..n)
            .into_par_iter()
            .map(|i| {
                let x = x0 + (i as f64 + 0.5) * hx;
                (0..n).filter(|&m| v.eval(x, y0 + (m as f64 + 0.5) * hy) > lambda).count()
            })
            .sum();
        hits as f64 * hx * hy / TAU
    };
    Ok(GridVolume { fine: count(n), coarse: count(n / 2) })
}

/// `λ^{2/m}·(N(λ(1−ε)) − N(λ(1+ε)))` per λ.
pub fn homogeneity_defect(v: &PotentialV, s: f64, m: f64, lambdas: &[f64], eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::validation("eps", format!("must lie in (0, 1), got {eps}")));
    }
    lambdas
        .iter()
        .map(|&l| Ok(l.powf(2.0 / m) * (volume_n(v, l * (1.0 - eps), s)? - volume_n(v, l * (1.0 + eps), s)?)))
        .collect()
}

/// `|{t > 0: t ln t < s}|`: 1 at `s = 0`, otherwise the root `t* ≥ 1` of `t ln t = s`.
pub fn kappa(s: f64) -> f64 {
    assert!(s >= 0.0, "kappa is defined for s >= 0");
    if s == 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (1.0, s.max(E));
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if mid * mid.ln() < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..3 {
        t -= (t * t.ln() - s) / (t.ln() + 1.0);
    }
    t
}

pub fn c_minus(region: &RegionSpec) -> f64 {
    region.c_minus()
}

/// `inf R·κ(ξ₊/(eR))` over discs `B_R((ξ + a, η)) ⊃ Ω`.
pub fn c_plus(region: &RegionSpec, a: f64) -> Result<f64> {
    let f = |x: f64| {
        let (r, _) = region.enclosing_radius_on_line(x);
        r * kappa((x - a).max(0.0) / (E * r))
    };
    let (x0, x1) = region.x_range();
    let d = region.diameter();
    let (lo, hi) = (x0 - d, x1 + d);
    const SEEDS: usize = 200;
    let h = (hi - lo) / (SEEDS - 1) as f64;
    let (best, fbest) = (0..SEEDS)
        .map(|i| {
            let x = lo + h * i as f64;
            (x, f(x))
        })
        .fold((lo, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc });
    let x = golden_min(&f, best - h, best + h, 1e-12 * (1.0 + best.abs()));
    let val = f(x).min(fbest);
    if !val.is_finite() {
        return Err(Error::Numerical(format!("c_plus search failed; best value {fbest}")));
    }
    Ok(val)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorridorConstants {
    pub c_minus: f64,
    pub c_plus: f64,
    pub warnings: Vec<String>,
}

impl CorridorConstants {
    pub fn ordered(&self) -> bool {
        self.c_minus < self.c_plus
    }
}

/// `𝒞₋ = √b·c₋(Ω̃₋)/(2π)` and `𝒞₊ = e·√b·c₊(Ω̃₊, x⁺)` with `Ω̃ = Ω ∩ {x > x⁺}`.
/// `b` is normally `B₊`.
pub fn corridor_constants(minus: &RegionSpec, plus: &RegionSpec, x_plus: f64, b: f64) -> Result<CorridorConstants> {
    let mut warnings = Vec::new();
    let c_minus = match minus.clip_right(x_plus) {
        Some(r) => b.sqrt() * r.c_minus() / TAU,
        None => {
            warnings.push(format!("inner region has no part right of x+ = {x_plus}; C_minus set to 0"));
            0.0
        }
    };
    let c_plus = match plus.clip_right(x_plus) {
        Some(r) => E * b.sqrt() * c_plus(&r, x_plus)?,
        None => {
            warnings.push(format!("outer region has no part right of x+ = {x_plus}; C_plus set to 0"));
            0.0
        }
    };
    Ok(CorridorConstants { c_minus, c_plus, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    SqrtLog,
    VolumeRatio,
}

impl FitModel {
    pub fn name(self) -> &'static str {
        match self {
            FitModel::SqrtLog => "sqrt-log",
            FitModel::VolumeRatio => "volume-ratio",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticFit {
    pub model: FitModel,
    /// Fitted coefficient, or the terminal ratio.
    pub estimate: f64,
    pub residuals: Vec<f64>,
    pub points_used: usize,
    /// Per-λ values: `count/|ln λ|^{1/2}` or `count/(B₊N)` (NaN where undefined).
    pub lambdas: Vec<f64>,
    pub values: Vec<f64>,
    /// Slope of the value against `log10(1/λ)` over the points used.
    pub trend_slope: f64,
    /// Set for all-zero counts or an undefined ratio.
    pub flagged: bool,
}

impl AsymptoticFit {
    pub fn residual_norm(&self) -> f64 {
        self.residuals.iter().map(|r| r * r).sum::<f64>().sqrt()
    }

    pub fn value_at(&self, lambda: f64) -> Option<f64> {
        self.lambdas
            .iter()
            .position(|&l| (l - lambda).abs() <= 1e-9 * lambda)
            .map(|i| self.values[i])
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "model,coefficient,residual_norm,points_used,lambda,value")?;
        for (l, v) in self.lambdas.iter().zip(&self.values) {
            writeln!(
                out,
                "{},{:.16e},{:.16e},{},{:.16e},{:.16e}",
                self.model.name(),
                self.estimate,
                self.residual_norm(),
                self.points_used,
                l,
                v
            )?;
        }
        Ok(())
    }
}

/// Mean of the two corridor edges per λ.
fn mid_counts(curve: &CountingCurve) -> Vec<f64> {
    curve.lower.iter().zip(&curve.upper).map(|(a, b)| 0.5 * (*a + *b) as f64).collect()
}

/// Indices of the smallest-λ third of the points with `λ < 0.1` (at least five).
fn tail_indices(lambdas: &[f64]) -> Result<Vec<usize>> {
    let mut idx: Vec<usize> = (0..lambdas.len()).filter(|&i| lambdas[i] < 0.1).collect();
    if idx.len() < 5 {
        return Err(Error::Argument(format!("fit needs at least 5 points with lambda < 0.1, got {}", idx.len())));
    }
    idx.sort_by(|&a, &b| lambdas[a].total_cmp(&lambdas[b]));
    idx.truncate((idx.len() / 3).max(5));
    Ok(idx)
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}

/// Least squares for `count ≈ a·|ln λ|^{1/2}` through the origin.
pub fn fit_sqrt_log(curve: &CountingCurve) -> Result<AsymptoticFit> {
    let idx = tail_indices(&curve.lambdas)?;
    let y = mid_counts(curve);
    let t = |i: usize| curve.lambdas[i].ln().abs().sqrt();
    let a = idx.iter().map(|&i| y[i] * t(i)).sum::<f64>() / idx.iter().map(|&i| t(i) * t(i)).sum::<f64>();
    let values: Vec<f64> = (0..y.len()).map(|i| y[i] / t(i)).collect();
    let xs: Vec<f64> = idx.iter().map(|&i| -curve.lambdas[i].log10()).collect();
    let vs: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
    Ok(AsymptoticFit {
        model: FitModel::SqrtLog,
        estimate: a,
        residuals: idx.iter().map(|&i| y[i] - a * t(i)).collect(),
        points_used: idx.len(),
        lambdas: curve.lambdas.clone(),
        values,
        trend_slope: slope(&xs, &vs),
        flagged: y.iter().all(|&c| c == 0.0),
    })
}

/// `count/(B₊·N(λ, V, s))` per λ; the estimate is the value at the smallest λ.
pub fn fit_volume_ratio(curve: &CountingCurve, v: &PotentialV, s: f64, b_plus: f64) -> Result<AsymptoticFit> {
    let idx = tail_indices(&curve.lambdas)?;
    let y = mid_counts(curve);
    let values = curve
        .lambdas
        .iter()
        .zip(&y)
        .map(|(&l, &c)| {
            let n = b_plus * volume_n(v, l, s)?;
            Ok(if n > 0.0 { c / n } else { f64::NAN })
        })
        .collect::<Result<Vec<f64>>>()?;
    let terminal = idx[0];
    let xs: Vec<f64> = idx.iter().map(|&i| -curve.lambdas[i].log10()).collect();
    let vs: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
    Ok(AsymptoticFit {
        model: FitModel::VolumeRatio,
        estimate: values[terminal],
        residuals: vs.iter().map(|r| r - 1.0).collect(),
        points_used: idx.len(),
        lambdas: curve.lambdas.clone(),
        trend_slope: slope(&xs, &vs),
        flagged: vs.iter().any(|r| !r.is_finite()),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::geometric_lambdas;

    #[test]
    fn kappa_fixtures() {
        assert!((kappa(0.0) - 1.0).abs() < 1e-15);
        assert!((kappa(E) - E).abs() < 1e-10);
        let mut last = 1.0;
        for i in 1..200 {
            let s = 0.05 * i as f64 * i as f64;
            let k = kappa(s);
            assert!(k > last);
            assert!((k * k.ln() - s).abs() < 1e-10 * s.max(1.0));
            last = k;
        }
    }

    #[test]
    fn power_law_volume() {
        let v = PotentialV::power_law(2.0).unwrap();
        assert_eq!(volume_n(&v, 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(volume_n(&v, 3.0, -5.0).unwrap(), 0.0);
        for l in [0.5, 0.1, 0.01] {
            let whole = volume_n(&v, l, -1e6).unwrap();
            let half = volume_n(&v, l, 0.0).unwrap();
            assert!((whole - (1.0 / l - 1.0) / 2.0).abs() < 1e-12 * whole);
            assert!((half - (1.0 / l - 1.0) / 4.0).abs() < 1e-12 * whole);
            let g = volume_n_grid(&v, l, 0.0, 2048).unwrap();
            assert!((g.fine - half).abs() < 0.01 * half);
            assert!(g.error_estimate() < 0.01 * half);
        }
    }

    #[test]
    fn volume_monotone() {
        let v = PotentialV::power_law(3.0).unwrap();
        let mut last = 0.0;
        for l in geometric_lambdas(1e-3, 0.9, 12).into_iter().rev() {
            let n = volume_n(&v, l, 0.3).unwrap();
            assert!(n <= volume_n(&v, l, -0.3).unwrap());
            if last > 0.0 {
                assert!(n <= last);
            }
            last = n;
        }
    }

    #[test]
    fn homogeneity_defects() {
        let v = PotentialV::power_law(2.0).unwrap();
        let ls = geometric_lambdas(1e-4, 1e-2, 5);
        let d1 = homogeneity_defect(&v, 0.0, 2.0, &ls, 0.1).unwrap();
        let d2 = homogeneity_defect(&v, 0.0, 2.0, &ls, 0.05).unwrap();
        for (a, b) in d1.iter().zip(&d2) {
            assert!(*a > 0.0 && (a / b - 2.0).abs() < 0.05);
        }
        let ind = PotentialV::indicator(0.4, RegionSpec::rectangle(1.0, 2.0, 0.0, 1.0).unwrap()).unwrap();
        assert!(homogeneity_defect(&ind, 0.0, 2.0, &ls, 0.1).unwrap().iter().all(|&d| d == 0.0));
        assert!(homogeneity_defect(&v, 0.0, 2.0, &ls, 1.2).is_err());
    }

    #[test]
    fn c_plus_disc_and_translation() {
        let disc = RegionSpec::disc(1.0, 2.0, 1.5).unwrap();
        assert!((c_plus(&disc, 1.0).unwrap() - 1.5).abs() < 1e-9);
        assert!((c_plus(&disc, 3.0).unwrap() - 1.5).abs() < 1e-9);
        let right = c_plus(&disc, -2.0).unwrap();
        assert!(right >= 1.5);
        // brute-force oracle over center abscissae
        let brute = (0..20001)
            .map(|i| {
                let x = -5.0 + 10.0 * i as f64 / 20000.0;
                let r = (x - 1.0).abs() + 1.5;
                r * kappa((x + 2.0).max(0.0) / (E * r))
            })
            .fold(f64::INFINITY, f64::min);
        assert!(right <= brute + 1e-9 && right > brute - 1e-6);
        let tri = RegionSpec::polygon(vec![(0.0, 0.0), (2.0, 0.5), (0.5, 2.0)]).unwrap();
        for a in [-1.0, 0.3, 1.0] {
            let c0 = c_plus(&tri, a).unwrap();
            let c1 = c_plus(&tri.translated(2.5, 0.0), a + 2.5).unwrap();
            assert!((c0 - c1).abs() < 1e-8, "{c0} {c1}");
        }
    }

    #[test]
    fn corridor_constant_fixtures() {
        let r = RegionSpec::rectangle(1.0, 2.0, 0.0, 1.0).unwrap();
        let c = corridor_constants(&r, &r, 0.0, 1.0).unwrap();
        assert!((c.c_minus - 1.0 / TAU).abs() < 1e-14);
        assert!(c.ordered() && c.warnings.is_empty());
        let c2 = corridor_constants(&r, &r, 0.0, 2.0).unwrap();
        assert!((c2.c_minus / c.c_minus - 2f64.sqrt()).abs() < 1e-12);
        assert!((c2.c_plus / c.c_plus - 2f64.sqrt()).abs() < 1e-12);
        let left = corridor_constants(&r, &r, 5.0, 1.0).unwrap();
        assert_eq!(left.c_minus, 0.0);
        assert!(!left.warnings.is_empty());
        let l_shape = RegionSpec::polygon(vec![(0.0, 0.0), (3.0, 0.0), (3.0, 1.0), (1.0, 1.0), (1.0, 3.0), (0.0, 3.0)]).unwrap();
        let c = corridor_constants(&l_shape, &l_shape, 0.5, 1.0).unwrap();
        assert!(c.ordered());
        assert!((c.c_minus - 3.0 / TAU).abs() < 1e-9);
    }

    fn synthetic(f: impl Fn(f64) -> usize) -> CountingCurve {
        let lambdas = geometric_lambdas(1e-8, 1e-1, 30);
        let counts: Vec<usize> = lambdas.iter().map(|&l| f(l)).collect();
        CountingCurve { lambdas, lower: counts.clone(), upper: counts }
    }

    #[test]
    fn sqrt_log_fits() {
        let fit = fit_sqrt_log(&synthetic(|l| (3.0 * l.ln().abs().sqrt()).round() as usize)).unwrap();
        assert!((fit.estimate - 3.0).abs() < 0.15 && !fit.flagged && fit.points_used >= 5);
        let zero = fit_sqrt_log(&synthetic(|_| 0)).unwrap();
        assert!(zero.estimate == 0.0 && zero.flagged);
        let short = CountingCurve { lambdas: vec![0.01, 0.001], lower: vec![0, 0], upper: vec![0, 0] };
        assert!(fit_sqrt_log(&short).is_err());
    }

    #[test]
    fn volume_ratio_self_consistent() {
        let v = PotentialV::power_law(2.0).unwrap();
        let curve = synthetic(|l| (2.0 * volume_n(&v, l, 0.0).unwrap()).round() as usize);
        let fit = fit_volume_ratio(&curve, &v, 0.0, 2.0).unwrap();
        assert!((fit.estimate - 1.0).abs() < 1e-6, "{}", fit.estimate);
        let far = PotentialV::indicator(0.2, RegionSpec::rectangle(-3.0, -2.0, 0.0, 1.0).unwrap()).unwrap();
        assert!(fit_volume_ratio(&curve, &far, 0.0, 1.0).unwrap().flagged);
    }
}
