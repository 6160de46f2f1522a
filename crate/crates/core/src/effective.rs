//! Effective Hamiltonians `E_j + c·𝒱_j` on a momentum grid and the two-sided
//! eigenvalue-counting corridor.
//!
//! Entries of the anti-Wick kernel are
//! `M_il = Δk ∫ Φ_j(x, k_i) Φ_j(x, k_l) T(x, k_i − k_l) dx` with
//! `T(x, q) = (1/2π)∫ V(x, ξ) e^{−iq(ξ − ξ_c)} dξ` and
//! `Φ_j(x, k) = B₊^{1/4} φ_j(√B₊(x − b⁻¹(k)))`. The ξ-integral is done in closed
//! form per potential kind; the x-integral by composite Gauss–Legendre,
//! doubled until two resolutions agree.

use std::io::Write;

use faer::{c64, Mat, Side};
use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};
use crate::fiber::{landau_level, BandOptions, BandTable, Scheme};
use crate::field::PotentialB;
use crate::hermite;
use crate::potential::{PotentialKind, PotentialV};
use crate::quad::GaussLegendre;
use crate::region::RegionSpec;

/// Eigenvalues within this distance of the threshold count as below it.
pub const TIE_SLACK: f64 = 1e-12;

/// Uniform momentum grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KGrid {
    pub k_min: f64,
    pub k_max: f64,
    pub n_k: usize,
}

impl KGrid {
    pub fn new(k_min: f64, k_max: f64, n_k: usize) -> Result<Self> {
        if n_k < 2 {
            return Err(Error::Config(format!("k-grid needs at least 2 points, got {n_k}")));
        }
        if !(k_min.is_finite() && k_max.is_finite() && k_min < k_max) {
            return Err(Error::Config(format!("invalid k range [{k_min}, {k_max}]")));
        }
        Ok(Self { k_min, k_max, n_k })
    }

    pub fn spacing(&self) -> f64 {
        (self.k_max - self.k_min) / (self.n_k as f64 - 1.0)
    }

    pub fn points(&self) -> Vec<f64> {
        let dk = self.spacing();
        (0..self.n_k).map(|i| self.k_min + dk * i as f64).collect()
    }
}

/// How far in ξ the momentum spacing must resolve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiExtent {
    /// Half-height of the effective support of `V`.
    Support,
    /// Half-height of `{V > λ_min}`.
    LevelSet,
    Fixed(f64),
}

/// Automatic k-grid: `Δk = π/(α·ξ_max)` over `[K_min, K_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KGridRule {
    pub alpha: f64,
    pub xi_extent: XiExtent,
    pub max_points: usize,
}

impl Default for KGridRule {
    fn default() -> Self {
        Self { alpha: 4.0, xi_extent: XiExtent::Support, max_points: 6000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Initial panel width in magnetic lengths `1/√B₊`.
    pub panel_width: f64,
    pub points_per_panel: usize,
    /// Entry agreement required between successive resolutions, relative to `sup V`.
    pub tolerance: f64,
    pub max_doublings: usize,
    pub window: SymbolWindow,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { panel_width: 0.5, points_per_panel: 8, tolerance: 1e-8, max_doublings: 5, window: SymbolWindow::Auto }
    }
}

/// Smooth ξ-taper applied to `V` before sampling its slice transform on the
/// k-grid. A uniform grid of spacing `Δk` sees `V` periodized in ξ with period
/// `2π/Δk`; tapering to zero inside half a period removes the overlap of the
/// copies. Since `0 ≤ w ≤ 1` and the quantization is positivity preserving,
/// the tapered kernel can only lower counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymbolWindow {
    Off,
    /// Taper heavy-tailed (power-law) symbols only.
    Auto,
    /// Taper every symbol.
    On,
}

/// The taper is 1 up to this fraction of the half period and 0 at its end.
pub const TAPER_START: f64 = 0.8;

fn taper(u: f64) -> f64 {
    // smooth step on [TAPER_START, 1] built from e^{-1/t}
    let t = ((1.0 - u.abs()) / (1.0 - TAPER_START)).clamp(0.0, 1.0);
    let psi = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let (a, b) = (psi(t), psi(1.0 - t));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// `(T_c, T_s)` of the tapered slice at `q = dΔk`, `d = 0..=max_d`, by one FFT
/// of the samples over a full period.
fn windowed_transforms(v: &PotentialV, xs: &[f64], dk: f64, max_d: usize) -> Vec<Vec<(f64, f64)>> {
    let half = std::f64::consts::PI / dk;
    let n = (2 * (max_d + 1)).max((2.0 * half / 0.125).ceil() as usize).next_power_of_two();
    let h = 2.0 * half / n as f64;
    let xc = v.xi_center();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let scale = h / std::f64::consts::TAU;
    xs.par_iter()
        .map(|&x| {
            let mut buf: Vec<Complex<f64>> = (0..n)
                .map(|m| {
                    let u = -half + h * m as f64;
                    Complex::new(v.eval(x, xc + u) * taper(u / half), 0.0)
                })
                .collect();
            fft.process(&mut buf);
            (0..=max_d)
                .map(|d| {
                    let sign = if d % 2 == 0 { scale } else { -scale };
                    (sign * buf[d].re, -sign * buf[d].im)
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveOptions {
    /// Grid points for the fiber solves that produce the band gaps.
    pub fiber_points: usize,
    pub scheme: Scheme,
    pub quadrature: QuadratureOptions,
    /// Largest k-grid diagonalized densely.
    pub dense_cap: usize,
}

impl Default for EffectiveOptions {
    fn default() -> Self {
        Self {
            fiber_points: 800,
            scheme: Scheme::GapCorrected,
            quadrature: QuadratureOptions::default(),
            dense_cap: 6000,
        }
    }
}

/// Dense Hermitian kernel, stored as real and (optional) imaginary parts.
#[derive(Debug, Clone)]
pub struct Kernel {
    pub re: Mat<f64>,
    pub im: Option<Mat<f64>>,
    /// Row-sum bound on the change between the last two quadrature resolutions;
    /// an upper bound for the induced eigenvalue shift.
    pub eps_quad: f64,
    /// Largest entry change between the last two resolutions.
    pub entry_change: f64,
}

impl Kernel {
    pub fn dim(&self) -> usize {
        self.re.nrows()
    }

    /// `max |M_il − conj(M_li)|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for l in 0..n {
                worst = worst.max((self.re[(i, l)] - self.re[(l, i)]).abs());
                if let Some(im) = &self.im {
                    worst = worst.max((im[(i, l)] + im[(l, i)]).abs());
                }
            }
        }
        worst
    }

    /// Eigenvalues of `diag(d) + c·M`, ascending.
    pub fn shifted_spectrum(&self, d: &[f64], c: f64) -> Result<Vec<f64>> {
        let n = self.dim();
        let fail = |e| Error::Numerical(format!("dense eigensolve failed: {e:?}"));
        match &self.im {
            None => {
                let a = Mat::<f64>::from_fn(n, n, |i, l| c * self.re[(i, l)] + if i == l { d[i] } else { 0.0 });
                a.self_adjoint_eigenvalues(Side::Lower).map_err(fail)
            }
            Some(im) => {
                let a = Mat::<c64>::from_fn(n, n, |i, l| {
                    c64::new(c * self.re[(i, l)] + if i == l { d[i] } else { 0.0 }, c * im[(i, l)])
                });
                a.self_adjoint_eigenvalues(Side::Lower).map_err(fail)
            }
        }
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.shifted_spectrum(&vec![0.0; self.dim()], 1.0)
    }
}

/// Quadrature nodes in x for one resolution.
fn x_nodes(v: &PotentialV, lo: f64, hi: f64, width: f64, gl: &GaussLegendre) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    let (lo, hi) = match v.support_box() {
        Some((a, b, _, _)) => (lo.max(a), hi.min(b)),
        None => return (xs, ws),
    };
    if lo >= hi {
        return (xs, ws);
    }
    if let PotentialKind::Indicator { region: RegionSpec::Disc { cx, r, .. }, .. } = v.kind() {
        // x = cx + r·sin θ removes the square-root behaviour at the rim
        let t0 = ((lo - cx) / r).clamp(-1.0, 1.0).asin();
        let t1 = ((hi - cx) / r).clamp(-1.0, 1.0).asin();
        let panels = ((t1 - t0) * r / width).ceil().max(1.0) as usize;
        let mut ts = Vec::new();
        let mut wt = Vec::new();
        for p in 0..panels {
            let a = t0 + (t1 - t0) * p as f64 / panels as f64;
            let b = t0 + (t1 - t0) * (p + 1) as f64 / panels as f64;
            gl.push_mapped(a, b, &mut ts, &mut wt);
        }
        for (t, w) in ts.into_iter().zip(wt) {
            xs.push(cx + r * t.sin());
            ws.push(w * r * t.cos());
        }
        return (xs, ws);
    }
    let mut breaks = vec![lo, hi];
    breaks.extend(v.x_breakpoints().into_iter().filter(|&b| b > lo && b < hi));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    for seg in breaks.windows(2) {
        let panels = ((seg[1] - seg[0]) / width).ceil().max(1.0) as usize;
        for p in 0..panels {
            let a = seg[0] + (seg[1] - seg[0]) * p as f64 / panels as f64;
            let b = seg[0] + (seg[1] - seg[0]) * (p + 1) as f64 / panels as f64;
            gl.push_mapped(a, b, &mut xs, &mut ws);
        }
    }
    (xs, ws)
}

/// Half-width, in x, beyond which `Φ_j` is treated as zero.
fn state_radius(j: usize, b_plus: f64) -> f64 {
    ((2.0 * j as f64 - 1.0).sqrt() + 8.0) / b_plus.sqrt()
}

struct KernelInput<'a> {
    v: &'a PotentialV,
    j: usize,
    b_plus: f64,
    centers: &'a [f64],
    dk: f64,
    windowed: bool,
}

fn assemble_once(inp: &KernelInput, width: f64, gl: &GaussLegendre) -> (Mat<f64>, Option<Mat<f64>>) {
    let n = inp.centers.len();
    let complex = !inp.v.is_xi_symmetric();
    let mut re = Mat::<f64>::zeros(n, n);
    let mut im = complex.then(|| Mat::<f64>::zeros(n, n));
    if inp.v.is_zero() || n == 0 {
        return (re, im);
    }
    let radius = state_radius(inp.j, inp.b_plus);
    let lo = inp.centers[0] - radius;
    let hi = inp.centers[n - 1] + radius;
    let (xs, ws) = x_nodes(inp.v, lo, hi, width, gl);
    if xs.is_empty() {
        return (re, im);
    }
    let s = inp.b_plus.sqrt();
    let norm = inp.b_plus.powf(0.25);
    // node window and state values for each k_i
    let windows: Vec<(usize, usize)> = inp
        .centers
        .iter()
        .map(|&c| (xs.partition_point(|&x| x < c - radius), xs.partition_point(|&x| x <= c + radius)))
        .collect();
    let phis: Vec<Vec<f64>> = inp
        .centers
        .iter()
        .zip(&windows)
        .map(|(&c, &(a, b))| (a..b).map(|m| norm * hermite::phi(inp.j, s * (xs[m] - c))).collect())
        .collect();
    // largest index offset with overlapping windows
    let mut max_d = 0;
    for i in 0..n {
        let mut l = i;
        while l + 1 < n && inp.centers[l + 1] - inp.centers[i] < 2.0 * radius {
            l += 1;
        }
        max_d = max_d.max(l - i);
    }
    let tapered = inp.windowed.then(|| windowed_transforms(inp.v, &xs, inp.dk, max_d));
    let diagonals: Vec<Vec<(f64, f64)>> = (0..=max_d)
        .into_par_iter()
        .map(|d| {
            let q = d as f64 * inp.dk;
            let table: Vec<(f64, f64)> = match &tapered {
                Some(t) => t.iter().map(|row| row[d]).collect(),
                None => xs.iter().map(|&x| inp.v.slice_transform(x, q)).collect(),
            };
            (0..n - d)
                .map(|i| {
                    let l = i + d;
                    let (a0, b0) = windows[i];
                    let (a1, b1) = windows[l];
                    let (from, to) = (a0.max(a1), b0.min(b1));
                    let (mut sr, mut si) = (0.0, 0.0);
                    for m in from..to.max(from) {
                        let w = ws[m] * phis[i][m - a0] * phis[l][m - a1];
                        sr += w * table[m].0;
                        si += w * table[m].1;
                    }
                    // q_il = k_i − k_l = −dΔk, and the sine part is odd in q
                    (inp.dk * sr, inp.dk * si)
                })
                .collect()
        })
        .collect();
    for (d, diag) in diagonals.iter().enumerate() {
        for (i, &(r, s_)) in diag.iter().enumerate() {
            let l = i + d;
            re[(i, l)] = r;
            re[(l, i)] = r;
            if let Some(im) = im.as_mut() {
                im[(i, l)] = s_;
                im[(l, i)] = -s_;
            }
        }
    }
    (re, im)
}

fn max_abs_and_row_sum(a: &Mat<f64>, b: &Mat<f64>, ai: Option<&Mat<f64>>, bi: Option<&Mat<f64>>) -> (f64, f64) {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    let mut row_max: f64 = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for l in 0..n {
            let mut d = (a[(i, l)] - b[(i, l)]).powi(2);
            if let (Some(x), Some(y)) = (ai, bi) {
                d += (x[(i, l)] - y[(i, l)]).powi(2);
            }
            let d = d.sqrt();
            worst = worst.max(d);
            row += d;
        }
        row_max = row_max.max(row);
    }
    (worst, row_max)
}

/// The anti-Wick kernel of `V` for band `j` on the k-grid.
pub fn antiwick_kernel(v: &PotentialV, pot: &PotentialB, j: usize, kg: &KGrid, opts: &QuadratureOptions) -> Result<Kernel> {
    if j == 0 {
        return Err(Error::Argument("band index starts at 1".into()));
    }
    let centers = kg.points().iter().map(|&k| pot.invert_b(k)).collect::<Result<Vec<_>>>()?;
    let windowed = match opts.window {
        SymbolWindow::Off => false,
        SymbolWindow::Auto => matches!(v.kind(), PotentialKind::PowerLaw { .. }),
        SymbolWindow::On => true,
    };
    let inp = KernelInput { v, j, b_plus: pot.b_plus(), centers: &centers, dk: kg.spacing(), windowed };
    let gl = GaussLegendre::new(opts.points_per_panel);
    let mut width = opts.panel_width / pot.b_plus().sqrt();
    let (mut re, mut im) = assemble_once(&inp, width, &gl);
    let tol = opts.tolerance * v.sup().max(f64::MIN_POSITIVE);
    for _ in 0..opts.max_doublings {
        width *= 0.5;
        let (re2, im2) = assemble_once(&inp, width, &gl);
        let (worst, rows) = max_abs_and_row_sum(&re, &re2, im.as_ref(), im2.as_ref());
        re = re2;
        im = im2;
        if worst <= tol {
            return Ok(Kernel { re, im, eps_quad: rows, entry_change: worst });
        }
    }
    Err(Error::Numerical(format!(
        "anti-Wick quadrature did not stabilize to {tol:.1e} after {} doublings",
        opts.max_doublings
    )))
}

/// `E_j + c·𝒱_j` on a k-grid, stored as band gaps `ℰ_j⁺ − E_j(k_i)` and the kernel.
#[derive(Debug, Clone)]
pub struct EffectiveOperator {
    pub kgrid: KGrid,
    pub j: usize,
    pub b_plus: f64,
    pub b_minus: f64,
    pub gaps: Vec<f64>,
    pub kernel: Kernel,
}

impl EffectiveOperator {
    pub fn build(v: &PotentialV, pot: &PotentialB, j: usize, kg: &KGrid, opts: &EffectiveOptions) -> Result<Self> {
        if kg.n_k > opts.dense_cap {
            return Err(Error::Config(format!(
                "k-grid of {} points exceeds the dense cap {}",
                kg.n_k, opts.dense_cap
            )));
        }
        let gaps = band_gaps(pot, j, &kg.points(), opts)?;
        let kernel = antiwick_kernel(v, pot, j, kg, &opts.quadrature)?;
        Ok(Self { kgrid: *kg, j, b_plus: pot.b_plus(), b_minus: pot.b_minus(), gaps, kernel })
    }

    /// `E_j(k_i)` on the grid.
    pub fn band_diag(&self) -> Vec<f64> {
        let top = landau_level(self.b_plus, self.j);
        self.gaps.iter().map(|g| top - g).collect()
    }

    /// Width `ℰ_{j+1}⁻ − ℰ_j⁺` of the spectral gap above band `j`.
    pub fn gap_width(&self) -> f64 {
        landau_level(self.b_minus, self.j + 1) - landau_level(self.b_plus, self.j)
    }

    fn check_lambda(&self, lambda: f64) -> Result<()> {
        let w = self.gap_width();
        if !(lambda > 0.0 && lambda < w) {
            return Err(Error::Argument(format!("lambda = {lambda} must lie in (0, {w}) above band {}", self.j)));
        }
        Ok(())
    }

    /// Eigenvalues of `E_j + c·𝒱_j − ℰ_j⁺`, ascending.
    pub fn spectrum(&self, c: f64) -> Result<Vec<f64>> {
        let d: Vec<f64> = self.gaps.iter().map(|g| -g).collect();
        self.kernel.shifted_spectrum(&d, c)
    }

    /// Number of eigenvalues of `E_j + c·𝒱_j` above `ℰ_j⁺ + λ`.
    pub fn effective_count(&self, c: f64, lambda: f64) -> Result<usize> {
        self.check_lambda(lambda)?;
        Ok(count_above(&self.spectrum(c)?, lambda))
    }

    pub fn counting_curve(&self, lambdas: &[f64], delta: f64) -> Result<CountingCurve> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::validation("delta", format!("must lie in (0, 1), got {delta}")));
        }
        for &l in lambdas {
            self.check_lambda(l)?;
        }
        let lower = self.spectrum(1.0 - delta)?;
        let upper = self.spectrum(1.0 + delta)?;
        Ok(CountingCurve {
            lambdas: lambdas.to_vec(),
            lower: lambdas.iter().map(|&l| count_above(&lower, l)).collect(),
            upper: lambdas.iter().map(|&l| count_above(&upper, l)).collect(),
        })
    }
}

/// Count of entries strictly above `lambda + TIE_SLACK`.
pub fn count_above(spectrum: &[f64], lambda: f64) -> usize {
    spectrum.iter().filter(|&&e| e > lambda + TIE_SLACK).count()
}

/// `ℰ_j⁺ − E_j(k)` at each momentum.
pub fn band_gaps(pot: &PotentialB, j: usize, ks: &[f64], opts: &EffectiveOptions) -> Result<Vec<f64>> {
    let table = BandTable::compute(
        pot,
        ks,
        BandOptions { j_max: j, n: opts.fiber_points, scheme: opts.scheme, keep_vectors: false },
    )?;
    Ok((0..ks.len()).map(|i| table.gap(j, i)).collect())
}

/// Choose `[K_min, K_max]` and `Δk` for counting down to `lambda_min` with
/// corridor parameter `delta`.
///
/// `K_max` covers the right edge of `{(1+δ)V > λ_min}` plus the reach of the
/// coherent states at that level, and is pushed right until the band gap falls
/// below `λ_min/10`. `K_min` sits `6/√B₋` left of the first point (scanning left
/// from `min(x⁺, right edge of V)`) where the band gap exceeds `(1+δ)` times
/// every column maximum of `V` further left; states beyond it cannot reach the
/// threshold.
pub fn auto_kgrid(
    v: &PotentialV,
    pot: &PotentialB,
    j: usize,
    lambda_min: f64,
    delta: f64,
    rule: &KGridRule,
    opts: &EffectiveOptions,
) -> Result<KGrid> {
    let bp = pot.b_plus();
    let ell = 1.0 / bp.sqrt();
    let cmax = 1.0 + delta;
    let x_plus = pot.field().x_plus();
    let gap_at = |x: f64| -> Result<f64> { Ok(band_gaps(pot, j, &[pot.b(x)], opts)?[0]) };

    let Some((vx_lo, vx_hi, xi_lo, xi_hi)) = v.level_box(0.1 * lambda_min / cmax) else {
        // nothing can rise above the threshold: a token grid about the origin
        return KGrid::new(-1.0, 1.0, 16);
    };

    // right edge of {(1+δ)V > λ_min}; dropping states beyond it can only lower counts
    let reach_hi = v.level_box(lambda_min / cmax).map_or(vx_hi, |b| b.1);
    let mut x_hi = reach_hi + ((10.0 * v.sup() / lambda_min).ln().max(1.0) / bp).sqrt();
    for _ in 0..400 {
        if gap_at(x_hi)? < 0.1 * lambda_min {
            break;
        }
        x_hi += 0.5 * ell;
    }

    let start = if x_plus.is_finite() { x_plus.min(vx_hi) } else { vx_hi };
    let step = 0.25 * ell;
    let col_sup_left = |x: f64| -> f64 {
        let n = (((x - vx_lo) / (0.1 * ell)).ceil().max(0.0) as usize).min(100_000);
        (0..=n).map(|i| v.column_max(vx_lo + (x - vx_lo) * i as f64 / n.max(1) as f64)).fold(0.0, f64::max)
    };
    let mut x_s = start;
    while x_s > vx_lo {
        if gap_at(x_s)? > cmax * col_sup_left(x_s) {
            break;
        }
        x_s -= step;
    }
    let x_lo = x_s.max(vx_lo).min(x_hi - ell) - 6.0 / pot.b_minus().sqrt();

    let xi_half = match rule.xi_extent {
        XiExtent::Fixed(h) => h,
        XiExtent::LevelSet => {
            let (_, _, a, b) = v.level_box(lambda_min).unwrap_or((0.0, 0.0, xi_lo, xi_hi));
            0.5 * (b - a)
        }
        XiExtent::Support => {
            let (_, _, a, b) = v.support_box().unwrap_or((0.0, 0.0, xi_lo, xi_hi));
            0.5 * (b - a)
        }
    }
    .max(ell);
    let dk = std::f64::consts::PI / (rule.alpha * xi_half);
    let (k_min, k_max) = (pot.b(x_lo), pot.b(x_hi));
    let n_k = ((k_max - k_min) / dk).ceil() as usize + 1;
    if n_k > rule.max_points {
        return Err(Error::Config(format!(
            "k-grid needs {n_k} points (Δk = {dk:.4e} over [{k_min:.3}, {k_max:.3}]), above the cap {}",
            rule.max_points
        )));
    }
    KGrid::new(k_min, k_max, n_k.max(2))
}

/// Counts at the two corridor edges `c = 1 ∓ δ` per λ.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingCurve {
    pub lambdas: Vec<f64>,
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
}

impl CountingCurve {
    /// Whether the upper-edge count is constant over the two smallest decades of λ.
    pub fn is_eventually_constant(&self) -> bool {
        let lmin = self.lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
        let counts: Vec<usize> = self
            .lambdas
            .iter()
            .zip(&self.upper)
            .filter(|(l, _)| **l <= 100.0 * lmin * (1.0 + 1e-12))
            .map(|(_, c)| *c)
            .collect();
        counts.windows(2).all(|w| w[0] == w[1])
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "lambda,count_lower,count_upper,log_abs_log_lambda_sqrt")?;
        for i in 0..self.lambdas.len() {
            let l = self.lambdas[i];
            writeln!(out, "{:.16e},{},{},{:.16e}", l, self.lower[i], self.upper[i], l.ln().abs().sqrt())?;
        }
        Ok(())
    }
}

/// Finiteness test: build the effective operator on an
/// automatic grid and check that the upper count settles.
pub fn finiteness_probe(
    v: &PotentialV,
    pot: &PotentialB,
    j: usize,
    kg: &KGrid,
    lambdas: &[f64],
    delta: f64,
    opts: &EffectiveOptions,
) -> Result<bool> {
    let op = EffectiveOperator::build(v, pot, j, kg, opts)?;
    Ok(op.counting_curve(lambdas, delta)?.is_eventually_constant())
}

/// `n` points spaced geometrically from `hi` down to `lo`.
pub fn geometric_lambdas(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    (0..n).map(|i| hi * (lo / hi).powf(i as f64 / (n - 1) as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;

    fn step() -> PotentialB {
        PotentialB::new(FieldSpec::smooth_step(0.5, 1.0, -1.0, 0.1).unwrap())
    }

    #[test]
    fn zero_potential_gives_zero_kernel_and_counts() {
        let pot = step();
        let kg = KGrid::new(-2.0, 4.0, 40).unwrap();
        let op = EffectiveOperator::build(&PotentialV::zero(), &pot, 1, &kg, &EffectiveOptions::default()).unwrap();
        assert!(op.kernel.re.norm_max() == 0.0);
        let curve = op.counting_curve(&geometric_lambdas(1e-6, 1e-1, 6), 0.1).unwrap();
        assert!(curve.lower.iter().chain(&curve.upper).all(|&c| c == 0));
        assert!(curve.is_eventually_constant());
        assert!(op.gaps.iter().all(|&g| g >= 0.0));
    }

    #[test]
    fn flat_symbol_acts_as_identity_inside() {
        // unit field, V = 0.4 on a box much larger than a magnetic length
        let pot = PotentialB::new(FieldSpec::constant(1.0).unwrap());
        let region = RegionSpec::rectangle(-12.0, 12.0, -6.0, 6.0).unwrap();
        let v = PotentialV::indicator(0.4, region).unwrap();
        let kg = KGrid::new(-16.0, 16.0, 161).unwrap();
        let k = antiwick_kernel(&v, &pot, 1, &kg, &QuadratureOptions::default()).unwrap();
        let mut eig = k.eigenvalues().unwrap();
        eig.reverse();
        // the interior modes sit at the symbol value
        for e in &eig[..20] {
            assert!((e - 0.4).abs() < 0.02 * 0.4, "{e}");
        }
        assert!(eig.iter().all(|&e| e > -k.eps_quad - 1e-12 && e < 0.4 + k.eps_quad + 1e-12));
        assert!(k.asymmetry() < 1e-12);
    }

    #[test]
    fn tapered_transform_matches_closed_form() {
        // a Gaussian is negligible at the taper, so both paths must agree
        let pot = step();
        let v = PotentialV::gaussian(0.3, 1.0, 2.0, 0.5).unwrap();
        let kg = KGrid::new(-1.0, 6.0, 50).unwrap();
        let plain = antiwick_kernel(&v, &pot, 2, &kg, &QuadratureOptions { window: SymbolWindow::Off, ..Default::default() }).unwrap();
        let tapered = antiwick_kernel(&v, &pot, 2, &kg, &QuadratureOptions { window: SymbolWindow::On, ..Default::default() }).unwrap();
        let d = &plain.re - &tapered.re;
        assert!(d.norm_max() < 1e-12, "{}", d.norm_max());
    }

    #[test]
    fn taper_never_raises_counts() {
        let pot = step();
        let v = PotentialV::power_law(2.0).unwrap();
        let kg = KGrid::new(-3.0, 12.0, 120).unwrap();
        let mk = |window| {
            let q = QuadratureOptions { window, ..Default::default() };
            antiwick_kernel(&v, &pot, 1, &kg, &q).unwrap().eigenvalues().unwrap()
        };
        let (plain, tapered) = (mk(SymbolWindow::Off), mk(SymbolWindow::On));
        assert!(tapered.iter().all(|&e| e > -1e-9));
        for lambda in [1e-1, 3e-2, 1e-2] {
            assert!(count_above(&tapered, lambda) <= count_above(&plain, lambda));
        }
        for (a, b) in plain.iter().zip(&tapered) {
            assert!(b <= &(a + 1e-9));
        }
    }

    #[test]
    fn polygon_kernel_is_hermitian() {
        let pot = step();
        let tri = RegionSpec::polygon(vec![(1.0, 0.0), (3.0, 1.0), (1.5, 3.0)]).unwrap();
        let v = PotentialV::indicator(0.3, tri).unwrap();
        let kg = KGrid::new(-1.0, 6.0, 60).unwrap();
        let k = antiwick_kernel(&v, &pot, 1, &kg, &QuadratureOptions::default()).unwrap();
        assert!(k.im.is_some());
        assert!(k.asymmetry() < 1e-12);
        let eig = k.eigenvalues().unwrap();
        assert!(eig[0] > -1e-8 && *eig.last().unwrap() < 0.3 + 1e-8);
    }

    #[test]
    fn corridor_is_ordered_and_monotone() {
        let pot = step();
        let v = PotentialV::gaussian(0.3, 1.0, 3.0, 0.0).unwrap();
        let lambdas = geometric_lambdas(1e-4, 0.2, 8);
        let opts = EffectiveOptions::default();
        let kg = auto_kgrid(&v, &pot, 1, 1e-4, 0.1, &KGridRule::default(), &opts).unwrap();
        let op = EffectiveOperator::build(&v, &pot, 1, &kg, &opts).unwrap();
        let curve = op.counting_curve(&lambdas, 0.1).unwrap();
        for i in 0..lambdas.len() {
            assert!(curve.lower[i] <= curve.upper[i]);
            if i > 0 {
                assert!(curve.upper[i] >= curve.upper[i - 1]);
                assert!(curve.lower[i] >= curve.lower[i - 1]);
            }
        }
        assert!(*curve.upper.last().unwrap() >= 1);
        assert!(matches!(op.effective_count(1.0, 0.6), Err(Error::Argument(_))));
        assert!(matches!(op.counting_curve(&lambdas, 1.5), Err(Error::Validation { .. })));
    }
}
