//! Brute-force reference: `H = H₀ + V` on a Dirichlet rectangle, diagonalized
//! densely, with gap eigenvalues counted against the same box for `H₀`.

use std::io::Write;

use faer::{c64, Mat, Side};

use crate::error::{Error, Result};
use crate::field::PotentialB;
use crate::potential::PotentialV;

pub const DEFAULT_CAP: usize = 4900;

/// Discretization of `(−i∂_y − b(x))²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stencil {
    /// Peierls phases on the y-links; exactly gauge covariant.
    #[default]
    Peierls,
    /// `−∂_y² + 2i b ∂_y + b²` with central first differences.
    CentralExpanded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box2D {
    pub center_x: f64,
    pub center_y: f64,
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Box2D {
    pub fn new(center_x: f64, center_y: f64, lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(lx > 0.0 && ly > 0.0) || nx == 0 || ny == 0 {
            return Err(Error::Config(format!("degenerate box lx={lx} ly={ly} nx={nx} ny={ny}")));
        }
        Ok(Self { center_x, center_y, lx, ly, nx, ny })
    }

    pub fn unknowns(&self) -> usize {
        self.nx * self.ny
    }

    pub fn hx(&self) -> f64 {
        2.0 * self.lx / (self.nx as f64 + 1.0)
    }

    pub fn hy(&self) -> f64 {
        2.0 * self.ly / (self.ny as f64 + 1.0)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.center_x - self.lx + self.hx() * (i as f64 + 1.0)
    }

    pub fn y(&self, m: usize) -> f64 {
        self.center_y - self.ly + self.hy() * (m as f64 + 1.0)
    }

    /// Same box with both point counts scaled (rounded).
    pub fn refined(&self, factor: f64) -> Self {
        let s = |n: usize| (((n as f64 + 1.0) * factor).round() as usize).saturating_sub(1).max(1);
        Self { nx: s(self.nx), ny: s(self.ny), ..*self }
    }

    /// Advisory y-window: `4·(y-extent of V) + 2π/√B₋`. Returns a message when
    /// the box is narrower.
    pub fn ly_advice(&self, v: &PotentialV, b_minus: f64) -> Option<String> {
        let (_, _, a, b) = v.support_box()?;
        let want = 0.5 * (4.0 * (b - a) + 2.0 * std::f64::consts::PI / b_minus.sqrt());
        (self.ly < want).then(|| format!("y half-width {:.3} below the advised {:.3}", self.ly, want))
    }
}

/// Assembled complex Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Discrete2DOperator {
    pub grid: Box2D,
    pub matrix: Mat<c64>,
}

impl Discrete2DOperator {
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for l in 0..=i {
                let d = self.matrix[(i, l)] - self.matrix[(l, i)].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.matrix
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("dense Hermitian eigensolve failed: {e:?}")))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AssemblyOptions {
    pub stencil: Stencil,
    pub cap: usize,
    /// Constant added to `b`; a pure gauge change.
    pub gauge_offset: f64,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { stencil: Stencil::Peierls, cap: DEFAULT_CAP, gauge_offset: 0.0 }
    }
}

pub fn assemble_h(pot: &PotentialB, v: &PotentialV, grid: &Box2D, opts: &AssemblyOptions) -> Result<Discrete2DOperator> {
    let n = grid.unknowns();
    if n > opts.cap {
        return Err(Error::Config(format!(
            "oracle box has {n} unknowns ({}x{}), above the dense cap {}",
            grid.nx, grid.ny, opts.cap
        )));
    }
    let (hx, hy) = (grid.hx(), grid.hy());
    let (ix2, iy2) = (1.0 / (hx * hx), 1.0 / (hy * hy));
    let ny = grid.ny;
    let idx = |i: usize, m: usize| i * ny + m;
    let mut a = Mat::<c64>::zeros(n, n);
    for i in 0..grid.nx {
        let x = grid.x(i);
        let b = pot.b(x) + opts.gauge_offset;
        let (diag_y, link) = match opts.stencil {
            Stencil::Peierls => (2.0 * iy2, c64::new(-(b * hy).cos() * iy2, -(b * hy).sin() * iy2)),
            Stencil::CentralExpanded => (2.0 * iy2 + b * b, c64::new(-iy2, b / hy)),
        };
        for m in 0..ny {
            let p = idx(i, m);
            a[(p, p)] = c64::new(2.0 * ix2 + diag_y + v.eval(x, grid.y(m)), 0.0);
            if m + 1 < ny {
                a[(p, p + 1)] = link;
                a[(p + 1, p)] = link.conj();
            }
            if i + 1 < grid.nx {
                let q = idx(i + 1, m);
                a[(p, q)] = c64::new(-ix2, 0.0);
                a[(q, p)] = c64::new(-ix2, 0.0);
            }
        }
    }
    Ok(Discrete2DOperator { grid: *grid, matrix: a })
}

/// Eigenvalues strictly inside `(a, b)`.
pub fn count_in(spectrum: &[f64], a: f64, b: f64) -> usize {
    spectrum.iter().filter(|&&e| e > a && e < b).count()
}

/// `(count of H in (a, b), count of H₀ in (a, b))`.
pub fn oracle_count(spec_h: &[f64], spec_h0: &[f64], interval: (f64, f64)) -> (usize, usize) {
    (count_in(spec_h, interval.0, interval.1), count_in(spec_h0, interval.0, interval.1))
}

/// Spectra of `H` and `H₀` on one box.
#[derive(Debug, Clone)]
pub struct OracleSpectra {
    pub grid: Box2D,
    pub h: Vec<f64>,
    pub h0: Vec<f64>,
}

impl OracleSpectra {
    pub fn compute(pot: &PotentialB, v: &PotentialV, grid: &Box2D, opts: &AssemblyOptions) -> Result<Self> {
        let h0 = assemble_h(pot, &PotentialV::zero(), grid, opts)?.eigenvalues()?;
        let h = if v.is_zero() { h0.clone() } else { assemble_h(pot, v, grid, opts)?.eigenvalues()? };
        Ok(Self { grid: *grid, h, h0 })
    }

    /// Clamped difference `max(count_H − count_H₀, 0)`.
    pub fn difference(&self, a: f64, b: f64) -> usize {
        let (h, h0) = oracle_count(&self.h, &self.h0, (a, b));
        h.saturating_sub(h0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub box_id: usize,
    pub a: f64,
    pub b: f64,
    pub count_h: usize,
    pub count_h0: usize,
    pub diff: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementReport {
    pub rows: Vec<OracleRow>,
    /// Intervals whose differences spread by more than one across boxes.
    pub flagged: Vec<(f64, f64)>,
}

impl RefinementReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "box_id,a,b,count_H,count_H0,diff")?;
        for r in &self.rows {
            writeln!(out, "{},{:.16e},{:.16e},{},{},{}", r.box_id, r.a, r.b, r.count_h, r.count_h0, r.diff)?;
        }
        Ok(())
    }
}

/// Counts on every box and interval. Boxes are solved one after another so
/// only one dense matrix is alive at a time.
pub fn refinement_study(
    pot: &PotentialB,
    v: &PotentialV,
    boxes: &[Box2D],
    intervals: &[(f64, f64)],
    opts: &AssemblyOptions,
) -> Result<RefinementReport> {
    if boxes.len() < 2 {
        return Err(Error::Argument("refinement study needs at least two boxes".into()));
    }
    let mut rows = Vec::new();
    for (id, grid) in boxes.iter().enumerate() {
        let s = OracleSpectra::compute(pot, v, grid, opts)?;
        rows.extend(intervals.iter().map(|&(a, b)| {
            let (h, h0) = oracle_count(&s.h, &s.h0, (a, b));
            OracleRow { box_id: id, a, b, count_h: h, count_h0: h0, diff: h.saturating_sub(h0) }
        }));
    }
    Ok(RefinementReport { flagged: flag_spread(&rows, intervals), rows })
}

fn flag_spread(rows: &[OracleRow], intervals: &[(f64, f64)]) -> Vec<(f64, f64)> {
    intervals
        .iter()
        .filter(|&&(a, b)| {
            let d: Vec<usize> = rows.iter().filter(|r| r.a == a && r.b == b).map(|r| r.diff).collect();
            let lo = d.iter().min().copied().unwrap_or(0);
            let hi = d.iter().max().copied().unwrap_or(0);
            hi - lo > 1
        })
        .copied()
        .collect()
}

/// Largest eigenvalue difference after shifting `b` by a constant.
pub fn gauge_defect(pot: &PotentialB, v: &PotentialV, grid: &Box2D, shift: f64, opts: &AssemblyOptions) -> Result<f64> {
    let e0 = assemble_h(pot, v, grid, opts)?.eigenvalues()?;
    let shifted = AssemblyOptions { gauge_offset: opts.gauge_offset + shift, ..*opts };
    let e1 = assemble_h(pot, v, grid, &shifted)?.eigenvalues()?;
    Ok(e0.iter().zip(&e1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;

    fn constant(b: f64) -> PotentialB {
        PotentialB::new(FieldSpec::constant(b).unwrap())
    }

    #[test]
    fn zero_field_is_dirichlet_laplacian() {
        let g = Box2D::new(0.0, 0.0, 1.0, 2.0, 7, 9).unwrap();
        // b(x) = 1e-300·x is zero to rounding
        let op = assemble_h(&constant(1e-300), &PotentialV::zero(), &g, &AssemblyOptions::default()).unwrap();
        assert!(op.hermiticity_defect() < 1e-12);
        let e = op.eigenvalues().unwrap();
        let (hx, hy) = (g.hx(), g.hy());
        let mut want: Vec<f64> = (1..=7)
            .flat_map(|p| {
                (1..=9).map(move |q| {
                    let sx = (p as f64 * std::f64::consts::PI / 16.0).sin();
                    let sy = (q as f64 * std::f64::consts::PI / 20.0).sin();
                    4.0 * sx * sx / (hx * hx) + 4.0 * sy * sy / (hy * hy)
                })
            })
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip(&want) {
            assert!((a - b).abs() < 1e-9 * b.max(1.0));
        }
    }

    #[test]
    fn both_stencils_are_hermitian() {
        let pot = PotentialB::new(FieldSpec::smooth_step(0.5, 1.0, -1.0, 0.1).unwrap());
        let v = PotentialV::gaussian(0.3, 1.0, 1.0, 0.5).unwrap();
        let g = Box2D::new(0.0, 0.0, 3.0, 3.0, 12, 14).unwrap();
        for stencil in [Stencil::Peierls, Stencil::CentralExpanded] {
            let op = assemble_h(&pot, &v, &g, &AssemblyOptions { stencil, ..Default::default() }).unwrap();
            assert!(op.hermiticity_defect() < 1e-12);
        }
    }

    #[test]
    fn gauge_shift_leaves_spectrum() {
        let pot = PotentialB::new(FieldSpec::smooth_step(0.5, 1.0, -1.0, 0.1).unwrap());
        let v = PotentialV::gaussian(0.3, 1.0, 1.0, 0.0).unwrap();
        let g = Box2D::new(0.0, 0.0, 3.0, 4.0, 14, 18).unwrap();
        assert!(gauge_defect(&pot, &v, &g, 0.7, &AssemblyOptions::default()).unwrap() < 1e-8);
    }

    #[test]
    fn lowest_level_approaches_landau_level() {
        let pot = constant(1.0);
        let mut last = f64::INFINITY;
        for (l, n) in [(3.0, 20), (4.0, 27), (5.0, 34)] {
            let g = Box2D::new(0.0, 0.0, l, l, n, n).unwrap();
            let e = assemble_h(&pot, &PotentialV::zero(), &g, &AssemblyOptions::default()).unwrap().eigenvalues().unwrap();
            assert!(e[0] < last + 1e-9);
            last = e[0];
        }
        assert!((last - 1.0).abs() < 0.05, "{last}");
    }

    #[test]
    fn zero_and_positive_potentials() {
        let pot = PotentialB::new(FieldSpec::smooth_step(0.5, 1.0, -1.0, 0.1).unwrap());
        let g = Box2D::new(0.0, 0.0, 3.0, 3.0, 16, 16).unwrap();
        let s = OracleSpectra::compute(&pot, &PotentialV::zero(), &g, &AssemblyOptions::default()).unwrap();
        assert_eq!(s.difference(1.01, 1.49), 0);
        // V ≥ 0 pushes every eigenvalue up
        let v = PotentialV::gaussian(0.05, 1.0, 1.0, 0.0).unwrap();
        let s = OracleSpectra::compute(&pot, &v, &g, &AssemblyOptions::default()).unwrap();
        assert!(s.h.iter().zip(&s.h0).all(|(a, b)| a >= &(b - 1e-10)));
        let boxes = [g, g.refined(1.2)];
        let r = refinement_study(&pot, &PotentialV::zero(), &boxes, &[(1.01, 1.49)], &AssemblyOptions::default()).unwrap();
        assert!(r.rows.iter().all(|row| row.diff == 0) && r.flagged.is_empty());
    }

    #[test]
    fn cap_is_enforced() {
        let g = Box2D::new(0.0, 0.0, 1.0, 1.0, 80, 80).unwrap();
        let r = assemble_h(&constant(1.0), &PotentialV::zero(), &g, &AssemblyOptions::default());
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
