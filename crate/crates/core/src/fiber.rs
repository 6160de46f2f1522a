//! Fiber operators `h(k) = −d²/dx² + (b(x) − k)²`, their oscillator limit
//! `h_∞(k)`, band functions and the projection diagnostics.
//!
//! Every fiber is discretized on a grid centered at its guiding center
//! `c = b⁻¹(k)`, where `b(x) − k = B₊(x − c) − (D(x) − D(c))`. Writing the
//! potential this way keeps the difference `h_∞(k) − h(k)` exact on the grid,
//! which is what lets the band gap `ℰ⁺ − E_j(k)` be resolved far below the
//! rounding level of `E_j` itself.

use std::io::Write;

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, Side};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::PotentialB;
use crate::hermite;
use crate::tridiag::{norm2, SymTridiag};

/// Absolute bisection tolerance for band energies.
pub const EIGEN_TOL: f64 = 1e-12;

/// Band index used by the truncation rule when none is given.
pub const DEFAULT_J_MAX: usize = 4;

/// Gaps below this are reported as saturated instead of producing a ratio.
pub const GAP_FLOOR: f64 = 1e-14;

/// Uniform interior grid on `[center − L, center + L]` with Dirichlet ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub center: f64,
    pub half_width: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(center: f64, half_width: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!("grid needs at least 3 points, got {n}")));
        }
        if !(half_width > 0.0 && half_width.is_finite() && center.is_finite()) {
            return Err(Error::Config(format!("invalid grid half-width {half_width}")));
        }
        Ok(Self { center, half_width, n })
    }

    /// Grid about `center` whose half-width follows the truncation rule.
    pub fn for_center(pot: &PotentialB, center: f64, j_max: usize, n: usize) -> Result<Self> {
        Self::new(center, truncation_margin(pot.b_minus(), pot.b_plus(), j_max), n)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n as f64 + 1.0)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.center - self.half_width + (i as f64 + 1.0) * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Same interval, `2n + 1` points: the spacing is exactly halved and every
    /// old point is kept.
    pub fn refined(&self) -> Self {
        Self { n: 2 * self.n + 1, ..*self }
    }
}

/// Distance from the guiding center that the truncated interval must cover:
/// `max(12/√B₋, 12·√(2j_max+1)/√B₊)`.
pub fn truncation_margin(b_minus: f64, b_plus: f64, j_max: usize) -> f64 {
    let j = j_max.max(1) as f64;
    (12.0 / b_minus.sqrt()).max(12.0 * (2.0 * j + 1.0).sqrt() / b_plus.sqrt())
}

/// Discretized `h(k)` together with the data needed to compare it with `h_∞(k)`.
#[derive(Debug, Clone)]
pub struct FiberOperator {
    pub grid: Grid1D,
    pub k: f64,
    /// Guiding center `b⁻¹(k)`.
    pub center: f64,
    pub matrix: SymTridiag,
    /// `D(x_i) − D(c)` on the grid.
    shift: Vec<f64>,
    b_plus: f64,
}

impl FiberOperator {
    /// `(b(x_i) − k)²` for each grid point.
    pub fn potential(&self) -> Vec<f64> {
        let kinetic = 2.0 / self.grid.spacing().powi(2);
        self.matrix.diag.iter().map(|d| d - kinetic).collect()
    }

    /// The oscillator `h_∞(k)` on the same grid.
    pub fn oscillator(&self) -> SymTridiag {
        oscillator_matrix(self.b_plus, &self.grid, self.center)
    }

    /// `h_∞(k) − h(k)` as a diagonal: `δ(2B₊(x − c) − δ)` with `δ = D(x) − D(c)`.
    /// Nonnegative, and exactly zero wherever `B ≡ B₊` between `x` and `c`.
    pub fn perturbation(&self) -> Vec<f64> {
        self.grid
            .points()
            .iter()
            .zip(&self.shift)
            .map(|(x, d)| d * (2.0 * self.b_plus * (x - self.center) - d))
            .collect()
    }

    /// True when the perturbation vanishes identically on the grid.
    pub fn is_oscillator(&self) -> bool {
        self.shift.iter().all(|&d| d == 0.0)
    }
}

fn oscillator_matrix(b_plus: f64, grid: &Grid1D, center: f64) -> SymTridiag {
    let h = grid.spacing();
    let kinetic = 2.0 / (h * h);
    let diag = (0..grid.n)
        .map(|i| {
            let u = b_plus * (grid.point(i) - center);
            kinetic + u * u
        })
        .collect();
    SymTridiag::new(diag, vec![-1.0 / (h * h); grid.n - 1])
}

/// Assemble the 3-point finite-difference `h(k)`.
///
/// The grid must reach at least one magnetic length `1/√B₊` past the guiding
/// center on both sides.
pub fn assemble_fiber(pot: &PotentialB, grid: &Grid1D, k: f64) -> Result<FiberOperator> {
    let center = pot.invert_b(k)?;
    let reach = grid.half_width - (center - grid.center).abs();
    let margin = 1.0 / pot.b_plus().sqrt();
    if reach < margin {
        return Err(Error::Config(format!(
            "grid [{:.6}, {:.6}] too small for guiding center {center:.6} (needs {margin:.3} beyond it)",
            grid.center - grid.half_width,
            grid.center + grid.half_width
        )));
    }
    let h = grid.spacing();
    let kinetic = 2.0 / (h * h);
    let d_center = pot.deficit_integral(center);
    let bp = pot.b_plus();
    let mut diag = Vec::with_capacity(grid.n);
    let mut shift = Vec::with_capacity(grid.n);
    for i in 0..grid.n {
        let x = grid.point(i);
        let d = pot.deficit_integral(x) - d_center;
        let u = bp * (x - center) - d;
        diag.push(kinetic + u * u);
        shift.push(d);
    }
    Ok(FiberOperator {
        grid: *grid,
        k,
        center,
        matrix: SymTridiag::new(diag, vec![-1.0 / (h * h); grid.n - 1]),
        shift,
        b_plus: bp,
    })
}

/// `j`-th eigenpair (1-based) of a discretized fiber.
pub fn eigen_band(op: &FiberOperator, j: usize) -> Result<(f64, Vec<f64>)> {
    eigenpair(&op.matrix, j)
}

fn eigenpair(t: &SymTridiag, j: usize) -> Result<(f64, Vec<f64>)> {
    let e = t.eigenvalue(j, EIGEN_TOL)?;
    let v = t.eigenvector(e)?;
    Ok((e, v))
}

/// Grid samples of `B₊^{1/4} φ_j(√B₊(x − b⁻¹(k)))`, normalized on the grid.
pub fn oscillator_state(j: usize, k: f64, pot: &PotentialB, grid: &Grid1D) -> Result<Vec<f64>> {
    if j == 0 {
        return Err(Error::Argument("band index starts at 1".into()));
    }
    let center = pot.invert_b(k)?;
    if (center - grid.center).abs() >= grid.half_width {
        return Err(Error::Config(format!("guiding center {center} lies outside the grid")));
    }
    let s = pot.b_plus().sqrt();
    let mut v: Vec<f64> = (0..grid.n)
        .map(|i| hermite::phi(j, s * (grid.point(i) - center)))
        .collect();
    let norm = norm2(&v);
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(v)
}

/// `‖π_u − π_v‖` for the rank-one projections onto unit vectors `u`, `v`.
/// Evaluated as `½‖u − v‖·‖u + v‖`, which equals `√(1 − ⟨u,v⟩²)` without the
/// cancellation near `u = ±v`.
pub fn projection_distance(u: &[f64], v: &[f64]) -> f64 {
    let diff: f64 = u.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let sum: f64 = u.iter().zip(v).map(|(a, b)| (a + b).powi(2)).sum::<f64>().sqrt();
    (0.5 * diff * sum).min(1.0)
}

/// Outcome of the projection-convergence quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioOutcome {
    Ratio(f64),
    /// The gap is below [`GAP_FLOOR`]; no meaningful quotient exists.
    Saturated,
}

impl RatioOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            RatioOutcome::Ratio(r) => Some(*r),
            RatioOutcome::Saturated => None,
        }
    }
}

/// One band of one fiber, compared against the oscillator on the same grid.
#[derive(Debug, Clone)]
pub struct FiberBand {
    pub energy: f64,
    /// Discrete oscillator level minus the discrete band energy, computed as
    /// `⟨ψ_∞, (h_∞ − h)ψ⟩ / ⟨ψ_∞, ψ⟩`.
    pub gap: f64,
    pub distance: f64,
    pub vector: Vec<f64>,
    pub oscillator_vector: Vec<f64>,
}

impl FiberBand {
    pub fn ratio(&self) -> RatioOutcome {
        if self.gap < GAP_FLOOR {
            RatioOutcome::Saturated
        } else {
            RatioOutcome::Ratio(self.distance / self.gap.sqrt())
        }
    }
}

/// Solve band `j` of `op` and compare with the oscillator eigenpair `(e_inf, v_inf)`
/// of the same grid.
fn compare_band(op: &FiberOperator, j: usize, osc: &(f64, Vec<f64>)) -> Result<FiberBand> {
    let (e_inf, v_inf) = osc;
    if op.is_oscillator() {
        return Ok(FiberBand {
            energy: *e_inf,
            gap: 0.0,
            distance: 0.0,
            vector: v_inf.clone(),
            oscillator_vector: v_inf.clone(),
        });
    }
    let (energy, mut v) = eigen_band(op, j)?;
    // align signs before comparing (higher bands may flip the dominant lobe)
    let overlap: f64 = v.iter().zip(v_inf).map(|(a, b)| a * b).sum();
    if overlap < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let w = op.perturbation();
    let num: f64 = (0..v.len()).map(|i| v_inf[i] * w[i] * v[i]).sum();
    let den = overlap.abs();
    if den < 1e-3 {
        return Err(Error::Numerical(format!(
            "band {j} at k = {} has overlap {den:.3e} with its oscillator state",
            op.k
        )));
    }
    let gap = (num / den).max(0.0);
    let distance = projection_distance(&v, v_inf);
    Ok(FiberBand {
        energy,
        gap,
        distance,
        vector: v,
        oscillator_vector: v_inf.clone(),
    })
}

/// Finite-difference scheme for band energies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Plain 3-point differences, `O(h²)`; biased below the continuum value.
    SecondOrder,
    /// Richardson extrapolation over spacings `h` and `h/2`, `O(h⁴)`.
    Richardson,
    /// `ℰ_j⁺` minus the gap, extrapolated over `h`, `h/2`, `h/4` (`O(h⁶)`).
    /// Discretization errors of `h(k)` and `h_∞(k)` largely cancel, so the
    /// value stays strictly below the Landau level whenever the gap is
    /// representable.
    GapCorrected,
}

impl Scheme {
    /// Number of grids in the halving sequence.
    fn levels(self) -> usize {
        match self {
            Scheme::SecondOrder => 1,
            Scheme::Richardson => 2,
            Scheme::GapCorrected => 3,
        }
    }
}

/// Romberg extrapolation of values computed on spacings `h, h/2, h/4, …` for an
/// error expansion in even powers of `h`.
pub fn extrapolate(values: &[f64]) -> f64 {
    let mut row = values.to_vec();
    let mut factor = 4.0;
    while row.len() > 1 {
        row = row.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
        factor *= 4.0;
    }
    row[0]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandOptions {
    pub j_max: usize,
    /// Interior grid points per fiber.
    pub n: usize,
    pub scheme: Scheme,
    /// Keep eigenvectors in the table.
    pub keep_vectors: bool,
}

impl Default for BandOptions {
    fn default() -> Self {
        Self {
            j_max: DEFAULT_J_MAX,
            n: 2000,
            scheme: Scheme::SecondOrder,
            keep_vectors: false,
        }
    }
}

/// Band data for one momentum.
#[derive(Debug, Clone)]
pub struct BandSample {
    pub k: f64,
    pub center: f64,
    pub grid: Grid1D,
    pub bands: Vec<FiberBand>,
}

/// Band functions `E_j(k)` for `j = 1..=j_max` over a momentum grid.
#[derive(Debug, Clone)]
pub struct BandTable {
    pub j_max: usize,
    pub b_plus: f64,
    pub b_minus: f64,
    pub scheme: Scheme,
    pub samples: Vec<BandSample>,
}

/// Landau level `B₊(2j − 1)`.
pub fn landau_level(b: f64, j: usize) -> f64 {
    b * (2.0 * j as f64 - 1.0)
}

impl BandTable {
    pub fn compute(pot: &PotentialB, ks: &[f64], opts: BandOptions) -> Result<Self> {
        if opts.j_max == 0 {
            return Err(Error::Argument("j_max must be at least 1".into()));
        }
        if opts.j_max >= opts.n {
            return Err(Error::Config(format!("{} points cannot resolve {} bands", opts.n, opts.j_max)));
        }
        let margin = truncation_margin(pot.b_minus(), pot.b_plus(), opts.j_max);
        // The oscillator on a grid centered at its own guiding center is the same
        // matrix for every k, so its eigenpairs are shared.
        let base = Grid1D::new(0.0, margin, opts.n)?;
        let osc = oscillator_matrix(pot.b_plus(), &base, 0.0);
        let osc_pairs = (1..=opts.j_max).map(|j| eigenpair(&osc, j)).collect::<Result<Vec<_>>>()?;
        let mut grids = vec![base];
        for _ in 1..opts.scheme.levels() {
            let last = *grids.last().unwrap();
            grids.push(last.refined());
        }
        let fine_osc = grids[1..]
            .iter()
            .map(|g| {
                let t = oscillator_matrix(pot.b_plus(), g, 0.0);
                (1..=opts.j_max).map(|j| eigenpair(&t, j)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let samples = ks
            .par_iter()
            .map(|&k| {
                let center = pot.invert_b(k)?;
                let grid = Grid1D::new(center, margin, opts.n)?;
                if pot.field().x_plus() <= grid.center - grid.half_width {
                    // B ≡ B₊ on the whole grid: h(k) is the oscillator itself
                    let bands = (1..=opts.j_max)
                        .map(|j| {
                            let (e, v) = &osc_pairs[j - 1];
                            let mut levels = vec![*e];
                            levels.extend(fine_osc.iter().map(|o| o[j - 1].0));
                            let energy = match opts.scheme {
                                Scheme::GapCorrected => landau_level(pot.b_plus(), j),
                                _ => extrapolate(&levels),
                            };
                            let vector = if opts.keep_vectors { v.clone() } else { Vec::new() };
                            FiberBand { energy, gap: 0.0, distance: 0.0, oscillator_vector: vector.clone(), vector }
                        })
                        .collect();
                    return Ok(BandSample { k, center, grid, bands });
                }
                let op = assemble_fiber(pot, &grid, k)?;
                let mut fine_ops = Vec::with_capacity(fine_osc.len());
                let mut g = grid;
                for _ in 0..fine_osc.len() {
                    g = g.refined();
                    fine_ops.push(assemble_fiber(pot, &g, k)?);
                }
                let mut bands = Vec::with_capacity(opts.j_max);
                for j in 1..=opts.j_max {
                    let mut band = compare_band(&op, j, &osc_pairs[j - 1])?;
                    if !fine_ops.is_empty() {
                        let mut gaps = vec![band.gap];
                        let mut energies = vec![band.energy];
                        for (f, o) in fine_ops.iter().zip(&fine_osc) {
                            let fb = compare_band(f, j, &o[j - 1])?;
                            gaps.push(fb.gap);
                            energies.push(fb.energy);
                        }
                        band.gap = extrapolate(&gaps).max(0.0);
                        band.energy = match opts.scheme {
                            Scheme::GapCorrected => landau_level(pot.b_plus(), j) - band.gap,
                            _ => extrapolate(&energies),
                        };
                    }
                    if !opts.keep_vectors {
                        band.vector = Vec::new();
                        band.oscillator_vector = Vec::new();
                    }
                    bands.push(band);
                }
                Ok(BandSample { k, center, grid, bands })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            j_max: opts.j_max,
            b_plus: pot.b_plus(),
            b_minus: pot.b_minus(),
            scheme: opts.scheme,
            samples,
        })
    }

    pub fn energy(&self, j: usize, idx: usize) -> f64 {
        self.samples[idx].bands[j - 1].energy
    }

    pub fn gap(&self, j: usize, idx: usize) -> f64 {
        self.samples[idx].bands[j - 1].gap
    }

    /// `‖π_j(k) − π_{j,∞}(k)‖ / (ℰ_j⁺ − E_j(k))^{1/2}` at sample `idx`.
    pub fn convergence_ratio(&self, j: usize, idx: usize) -> RatioOutcome {
        self.samples[idx].bands[j - 1].ratio()
    }

    /// Check band confinement, strict ordering and the strict sub-supremum
    /// property on every sample. Returns a description of the first violation.
    pub fn check_invariants(&self, slack: f64) -> std::result::Result<(), String> {
        for s in &self.samples {
            for j in 1..=self.j_max {
                let e = s.bands[j - 1].energy;
                let lo = landau_level(self.b_minus, j) - slack;
                let hi = landau_level(self.b_plus, j);
                if e < lo || e > hi + slack {
                    return Err(format!("E_{j}({}) = {e} outside [{lo}, {hi}]", s.k));
                }
                // strictness may live only in the gap once E_j rounds to ℰ_j⁺;
                // a constant field has E_j ≡ ℰ_j⁺
                if e >= hi && s.bands[j - 1].gap <= 0.0 && self.b_minus < self.b_plus {
                    return Err(format!("E_{j}({}) = {e} not below {hi}", s.k));
                }
                if j > 1 && e <= s.bands[j - 2].energy {
                    return Err(format!("E_{j}({}) not above E_{}", s.k, j - 1));
                }
            }
        }
        Ok(())
    }

    /// CSV with columns `k, j, E_j, gap, ratio` (empty ratio when saturated).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,j,E_j,gap,ratio")?;
        for s in &self.samples {
            for (i, band) in s.bands.iter().enumerate() {
                let ratio = match band.ratio() {
                    RatioOutcome::Ratio(r) => format!("{r:.16e}"),
                    RatioOutcome::Saturated => String::new(),
                };
                writeln!(
                    out,
                    "{:.16e},{},{:.16e},{:.16e},{}",
                    s.k,
                    i + 1,
                    band.energy,
                    band.gap,
                    ratio
                )?;
            }
        }
        Ok(())
    }
}

/// Min-max comparison for `B₁ ≤ B₂`: `E_j(k, b₁) ≤ E_j(b₂(b₁⁻¹(k)), b₂) + slack`.
/// Both fibers share the guiding center and therefore the grid.
pub fn comparison_check(pot1: &PotentialB, pot2: &PotentialB, k: f64, j: usize, n: usize) -> Result<bool> {
    let center = pot1.invert_b(k)?;
    let bm = pot1.b_minus().min(pot2.b_minus());
    let bp = pot1.b_plus().max(pot2.b_plus());
    let grid = Grid1D::new(center, truncation_margin(bm, bp, j.max(DEFAULT_J_MAX)), n)?;
    for x in grid.points() {
        let (b1, b2) = (pot1.field().eval(x)?, pot2.field().eval(x)?);
        if b1 > b2 {
            return Err(Error::Argument(format!("B1({x}) = {b1} exceeds B2({x}) = {b2}")));
        }
    }
    let k2 = pot2.b(center);
    let e1 = eigen_band(&assemble_fiber(pot1, &grid, k)?, j)?.0;
    let e2 = eigen_band(&assemble_fiber(pot2, &grid, k2)?, j)?.0;
    Ok(e1 <= e2 + 1e-10 * (1.0 + e2.abs()))
}

/// Smallest eigenvalue of `h(k)⁻¹ − h_∞(k)⁻¹` on a shared grid of `n ≤ 400`
/// points about the guiding center.
pub fn lambda_k_min_eigenvalue(pot: &PotentialB, k: f64, n: usize) -> Result<f64> {
    if n > 400 {
        return Err(Error::Config(format!("dense positivity check limited to 400 points, got {n}")));
    }
    let center = pot.invert_b(k)?;
    let grid = Grid1D::for_center(pot, center, 1, n)?;
    let op = assemble_fiber(pot, &grid, k)?;
    let dense = |t: &SymTridiag| {
        Mat::<f64>::from_fn(n, n, |i, l| {
            if i == l {
                t.diag[i]
            } else if i == l + 1 {
                t.off[l]
            } else if l == i + 1 {
                t.off[i]
            } else {
                0.0
            }
        })
    };
    let invert = |m: Mat<f64>| -> Result<Mat<f64>> {
        let llt = m
            .llt(Side::Lower)
            .map_err(|e| Error::Numerical(format!("fiber matrix not positive definite: {e:?}")))?;
        Ok(llt.inverse())
    };
    let a = invert(dense(&op.matrix))?;
    let b = invert(dense(&op.oscillator()))?;
    let diff = Mat::<f64>::from_fn(n, n, |i, l| 0.5 * ((a[(i, l)] - b[(i, l)]) + (a[(l, i)] - b[(l, i)])));
    let eig = diff
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigenvalue solve failed: {e:?}")))?;
    Ok(eig[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;

    fn unit() -> PotentialB {
        PotentialB::new(FieldSpec::constant(1.0).unwrap())
    }

    fn step() -> PotentialB {
        PotentialB::new(FieldSpec::smooth_step(0.5, 1.0, -1.0, 0.1).unwrap())
    }

    #[test]
    fn stencil_for_unit_field() {
        let grid = Grid1D::new(0.0, 2.0, 4).unwrap();
        let op = assemble_fiber(&unit(), &grid, 0.0).unwrap();
        let h = grid.spacing();
        assert!((h - 0.8).abs() < 1e-15);
        for i in 0..4 {
            let x = grid.point(i);
            assert!((op.matrix.diag[i] - (2.0 / (h * h) + x * x)).abs() < 1e-12);
        }
        assert!(op.matrix.off.iter().all(|&o| o == -1.0 / (h * h)));
        assert!(op.is_oscillator());
    }

    #[test]
    fn rejects_undersized_grid() {
        let grid = Grid1D::new(0.0, 2.0, 10).unwrap();
        assert!(matches!(assemble_fiber(&unit(), &grid, 1.5), Err(Error::Config(_))));
        assert!(Grid1D::new(0.0, 1.0, 2).is_err());
    }

    #[test]
    fn potential_is_square_of_offset() {
        let pot = step();
        let grid = Grid1D::for_center(&pot, -0.5, 4, 300).unwrap();
        let k = pot.b(-0.5);
        let op = assemble_fiber(&pot, &grid, k).unwrap();
        for (x, p) in grid.points().iter().zip(op.potential()) {
            let direct = (pot.b(*x) - k).powi(2);
            assert!(p >= 0.0);
            assert!((p - direct).abs() < 1e-8 * (1.0 + direct), "x={x}");
        }
    }

    #[test]
    fn unit_field_gives_landau_levels() {
        let pot = unit();
        let table = BandTable::compute(
            &pot,
            &[-2.0, 0.0, 3.0],
            BandOptions { j_max: 3, n: 1500, scheme: Scheme::Richardson, keep_vectors: false },
        )
        .unwrap();
        for idx in 0..3 {
            for j in 1..=3 {
                let exact = 2.0 * j as f64 - 1.0;
                assert!((table.energy(j, idx) - exact).abs() < 1e-6 * exact);
                assert_eq!(table.convergence_ratio(j, idx), RatioOutcome::Saturated);
            }
        }
    }

    #[test]
    fn oscillator_states_match_hermite() {
        let pot = unit();
        let grid = Grid1D::new(0.0, 12.0, 801).unwrap();
        let s1 = oscillator_state(1, 0.0, &pot, &grid).unwrap();
        let s2 = oscillator_state(2, 0.0, &pot, &grid).unwrap();
        let dot: f64 = s1.iter().zip(&s2).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-8);
        let h = grid.spacing();
        for (i, x) in grid.points().iter().enumerate() {
            assert!((s1[i] - hermite::phi(1, *x) * h.sqrt()).abs() < 1e-10);
        }
        // h_∞ maps the sampled state to (2j − 1) times itself up to O(h²)
        let t = oscillator_matrix(1.0, &grid, 0.0);
        let ts = t.apply(&s2);
        let res = ts.iter().zip(&s2).map(|(a, b)| (a - 3.0 * b).powi(2)).sum::<f64>().sqrt();
        assert!(res < 20.0 * h * h);
    }

    #[test]
    fn projection_distance_limits() {
        let u = [1.0, 0.0, 0.0];
        let v = [0.0, 1.0, 0.0];
        assert_eq!(projection_distance(&u, &u), 0.0);
        assert!((projection_distance(&u, &v) - 1.0).abs() < 1e-15);
        let w = [0.6, 0.8, 0.0];
        assert!((projection_distance(&u, &w) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn gap_matches_energy_difference() {
        // Where the gap is large enough to be read off the energies directly, the
        // overlap formula must agree with the plain difference.
        let pot = step();
        let opts = BandOptions { j_max: 2, n: 800, scheme: Scheme::SecondOrder, keep_vectors: true };
        let table = BandTable::compute(&pot, &[-1.0, 0.5], opts).unwrap();
        let base = Grid1D::new(0.0, truncation_margin(0.5, 1.0, 2), 800).unwrap();
        let osc = oscillator_matrix(1.0, &base, 0.0);
        for idx in 0..2 {
            for j in 1..=2 {
                let e_inf = osc.eigenvalue(j, 1e-13).unwrap();
                let direct = e_inf - table.energy(j, idx);
                let gap = table.gap(j, idx);
                assert!((gap - direct).abs() < 1e-9 + 1e-8 * direct, "j={j} idx={idx}: {gap} vs {direct}");
                assert!(gap > 0.0);
            }
        }
    }

    #[test]
    fn band_invariants_on_step() {
        let pot = step();
        let ks: Vec<f64> = (0..25).map(|i| -4.0 + i as f64 / 3.0).collect();
        let opts = BandOptions { j_max: 3, n: 1000, scheme: Scheme::GapCorrected, keep_vectors: false };
        let table = BandTable::compute(&pot, &ks, opts).unwrap();
        table.check_invariants(1e-9).unwrap();
    }

    #[test]
    fn comparison_principle() {
        let half = PotentialB::new(FieldSpec::constant(0.5).unwrap());
        let one = unit();
        assert!(comparison_check(&half, &one, 0.0, 1, 800).unwrap());
        let e1 = eigen_band(
            &assemble_fiber(&half, &Grid1D::for_center(&half, 0.0, 4, 800).unwrap(), 0.0).unwrap(),
            1,
        )
        .unwrap()
        .0;
        assert!((e1 - 0.5).abs() < 1e-3);
        let step = step();
        assert!(comparison_check(&step, &step, 0.7, 2, 600).unwrap());
        for k in [-4.0, -1.3, 0.2, 2.5] {
            assert!(comparison_check(&step, &one, k, 1, 600).unwrap());
        }
        assert!(matches!(comparison_check(&one, &half, 0.0, 1, 200), Err(Error::Argument(_))));
    }

    #[test]
    fn lambda_k_is_nonnegative() {
        let pot = step();
        for k in [-2.0, -0.5, 0.5] {
            let m = lambda_k_min_eigenvalue(&pot, k, 300).unwrap();
            assert!(m > -1e-10, "k={k}: {m}");
        }
    }
}
