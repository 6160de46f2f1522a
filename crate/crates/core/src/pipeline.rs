//! Stage orchestration behind the command-line front end: band tables, the
//! effective-Hamiltonian corridor, the 2D oracle, asymptotic fits and the
//! plain-text report.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::asympt::{self, AsymptoticFit, CorridorConstants};
use crate::config::{num, EffectiveGrid, RunConfig};
use crate::effective::{self, CountingCurve, EffectiveOperator, EffectiveOptions, KGrid, QuadratureOptions};
use crate::error::{Error, Result};
use crate::fiber::{landau_level, BandOptions, BandTable, Scheme};
use crate::field::PotentialB;
use crate::oracle2d::{self, AssemblyOptions, RefinementReport};
use crate::potential::PotentialKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Bands,
    Effective,
    Oracle,
    Asympt,
    Report,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Slack, in eigenvalue counts, between the oracle and the corridor.
pub const ORACLE_SLACK: usize = 3;

#[derive(Debug)]
struct EffectiveResult {
    kgrid: KGrid,
    eps_quad: f64,
    curve: CountingCurve,
    finite: bool,
}

#[derive(Debug)]
struct AsymptResult {
    constants: Option<CorridorConstants>,
    sqrt_log: Option<AsymptoticFit>,
    volume: Option<AsymptoticFit>,
    notes: Vec<String>,
}

/// One run over one output directory. Artifacts are recorded as they are
/// written so a failed run can leave a manifest of what exists.
pub struct Pipeline<'a> {
    cfg: &'a RunConfig,
    pot: PotentialB,
    out: PathBuf,
    written: Vec<String>,
    warnings: Vec<String>,
    verdicts: Vec<Verdict>,
    bands: Option<BandTable>,
    effective: Option<EffectiveResult>,
    asympt: Option<AsymptResult>,
    oracle: Option<RefinementReport>,
}

impl<'a> Pipeline<'a> {
    pub fn new(cfg: &'a RunConfig, out: &Path) -> Self {
        Self {
            cfg,
            pot: PotentialB::new(cfg.field.clone()),
            out: out.to_path_buf(),
            written: Vec::new(),
            warnings: Vec::new(),
            verdicts: Vec::new(),
            bands: None,
            effective: None,
            asympt: None,
            oracle: None,
        }
    }

    pub fn artifacts(&self) -> &[String] {
        &self.written
    }

    pub fn verdicts(&self) -> &[Verdict] {
        &self.verdicts
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::create_dir_all(&self.out).map_err(|source| Error::Io { path: self.out.clone(), source })?;
        let path = self.out.join(name);
        fs::write(&path, bytes).map_err(|source| Error::Io { path: path.clone(), source })?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn verdict(&mut self, name: &str, passed: bool, detail: String) {
        self.verdicts.push(Verdict { name: name.to_string(), passed, detail });
    }

    pub fn run(&mut self, command: Command) -> Result<()> {
        match command {
            Command::Bands => self.bands(),
            Command::Effective => self.effective(),
            Command::Oracle => self.oracle(),
            Command::Asympt => self.asympt(),
            Command::Report => {
                self.bands()?;
                self.effective()?;
                self.asympt()?;
                if self.cfg.oracle.is_some() {
                    self.oracle()?;
                }
                let text = self.report();
                self.write("report.txt", text.as_bytes())
            }
        }
    }

    /// List of written artifacts and the error that stopped the run.
    pub fn write_manifest(&mut self, err: &Error) -> Result<()> {
        let mut text = String::from("status: failed\n");
        let _ = writeln!(text, "error: {err}");
        text.push_str("artifacts:\n");
        for a in &self.written {
            let _ = writeln!(text, "  {a}");
        }
        self.write("manifest.txt", text.as_bytes())
    }

    fn bands(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let table = BandTable::compute(
            &self.pot,
            &cfg.band_k.points(),
            BandOptions { j_max: cfg.j_max, n: cfg.fiber_points, scheme: cfg.scheme, keep_vectors: false },
        )?;
        let mut buf = Vec::new();
        table.write_csv(&mut buf).map_err(|source| Error::Io { path: self.out.join("bands.csv"), source })?;
        self.write("bands.csv", &buf)?;
        let check = table.check_invariants(cfg.band_slack);
        let detail = match &check {
            Ok(()) => format!("{} samples, j <= {}", table.samples.len(), cfg.j_max),
            Err(e) => e.to_string(),
        };
        self.verdict("band confinement", check.is_ok(), detail);
        self.bands = Some(table);
        Ok(())
    }

    fn effective_options(&self) -> EffectiveOptions {
        EffectiveOptions {
            fiber_points: self.cfg.effective_fiber_points,
            scheme: Scheme::GapCorrected,
            quadrature: QuadratureOptions { window: self.cfg.window, ..Default::default() },
            dense_cap: self.cfg.dense_cap,
        }
    }

    fn effective(&mut self) -> Result<()> {
        if self.effective.is_some() {
            return Ok(());
        }
        let cfg = self.cfg;
        let opts = self.effective_options();
        let kgrid = match &cfg.effective_grid {
            EffectiveGrid::Explicit(k) => *k,
            EffectiveGrid::Auto(rule) => effective::auto_kgrid(&cfg.potential, &self.pot, cfg.j, cfg.lambda_min, cfg.delta, rule, &opts)?,
        };
        let op = EffectiveOperator::build(&cfg.potential, &self.pot, cfg.j, &kgrid, &opts)?;
        let curve = op.counting_curve(&cfg.lambdas(), cfg.delta)?;
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).map_err(|source| Error::Io { path: self.out.join("counting.csv"), source })?;
        self.write("counting.csv", &buf)?;
        let sup = cfg.potential.sup();
        let eps_ok = op.kernel.eps_quad <= 0.02 * sup || sup == 0.0;
        self.verdict("quadrature accuracy", eps_ok, format!("eps_quad {} vs 0.02 sup V", num(op.kernel.eps_quad)));
        let ordered = curve.lower.iter().zip(&curve.upper).all(|(a, b)| a <= b);
        self.verdict("corridor ordering", ordered, "count_lower <= count_upper at every lambda".into());
        let finite = curve.is_eventually_constant();
        self.effective = Some(EffectiveResult { kgrid, eps_quad: op.kernel.eps_quad, curve, finite });
        Ok(())
    }

    fn asympt(&mut self) -> Result<()> {
        self.effective()?;
        let cfg = self.cfg;
        let curve = &self.effective.as_ref().expect("effective stage ran").curve;
        let x_plus = cfg.field.x_plus();
        let mut notes = Vec::new();
        let mut verdicts = Vec::new();

        let sqrt_log = match asympt::fit_sqrt_log(curve) {
            Ok(f) => Some(f),
            Err(e) => {
                notes.push(format!("sqrt-log fit skipped: {e}"));
                None
            }
        };
        let constants = match (&cfg.region_inner, &cfg.region_outer) {
            (Some(inner), Some(outer)) if x_plus.is_finite() => {
                let c = asympt::corridor_constants(inner, outer, x_plus, cfg.corridor_b)?;
                notes.extend(c.warnings.iter().cloned());
                Some(c)
            }
            _ => None,
        };
        let volume = match cfg.potential.kind() {
            PotentialKind::PowerLaw { .. } => Some(asympt::fit_volume_ratio(curve, &cfg.potential, cfg.volume_cutoff, cfg.field.b_plus())?),
            _ => None,
        };

        let finite = self.effective.as_ref().expect("effective stage ran").finite;
        match (cfg.potential.kind(), &constants) {
            (PotentialKind::Zero, _) => {
                let zero = curve.upper.iter().all(|&c| c == 0);
                verdicts.push(("zero potential", zero && finite, "all counts zero and finiteness probe true".to_string()));
            }
            (PotentialKind::Indicator { region, .. }, Some(c)) => {
                if region.clip_right(x_plus).is_none() {
                    verdicts.push(("finiteness", finite, "upper counts constant over the two smallest decades".to_string()));
                } else {
                    verdicts.push(("C_minus < C_plus", c.ordered(), format!("C_minus {} C_plus {}", num(c.c_minus), num(c.c_plus))));
                    if let Some(f) = &sqrt_log {
                        let ok = f.estimate >= 0.5 * c.c_minus && f.estimate <= 2.0 * c.c_plus;
                        verdicts.push(("sqrt-log sandwich", ok, format!("a {} in [0.5 C_minus, 2 C_plus]", num(f.estimate))));
                    }
                }
            }
            _ => {}
        }
        if let Some(v) = &volume {
            let ok = v.estimate.is_finite() && (0.7..=1.3).contains(&v.estimate);
            verdicts.push(("volume ratio", ok, format!("terminal ratio {} in [0.7, 1.3]", num(v.estimate))));
        }
        for (name, ok, detail) in verdicts {
            self.verdict(name, ok, detail);
        }

        let mut buf = Vec::new();
        for (i, fit) in [&sqrt_log, &volume].into_iter().flatten().enumerate() {
            let mut one = Vec::new();
            fit.write_csv(&mut one).map_err(|source| Error::Io { path: self.out.join("fits.csv"), source })?;
            // a single header for the concatenated table
            let skip = if i == 0 { 0 } else { one.iter().position(|&b| b == b'\n').map_or(0, |p| p + 1) };
            buf.extend_from_slice(&one[skip..]);
        }
        if buf.is_empty() {
            buf.extend_from_slice(b"model,coefficient,residual_norm,points_used,lambda,value\n");
        }
        self.write("fits.csv", &buf)?;
        self.asympt = Some(AsymptResult { constants, sqrt_log, volume, notes });
        Ok(())
    }

    fn oracle(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let oc = cfg.oracle.as_ref().ok_or_else(|| Error::Config("the [oracle] section is not enabled".into()))?;
        let boxes = oc.boxes();
        let opts = AssemblyOptions { stencil: oc.stencil, cap: oc.cap, gauge_offset: 0.0 };
        // reject oversize boxes before any solve
        for b in &boxes {
            if b.unknowns() > oc.cap {
                return Err(Error::Config(format!("oracle box {}x{} exceeds the dense cap {}", b.nx, b.ny, oc.cap)));
            }
        }
        if let Some(w) = oc.primary.ly_advice(&cfg.potential, cfg.field.b_minus()) {
            self.warnings.push(format!("oracle: {w}"));
        }
        let top = landau_level(cfg.field.b_plus(), cfg.j);
        let next = landau_level(cfg.field.b_minus(), cfg.j + 1);
        let intervals: Vec<(f64, f64)> = cfg.lambdas().iter().map(|l| (top + l, next)).collect();
        let report = if boxes.len() >= 2 {
            oracle2d::refinement_study(&self.pot, &cfg.potential, &boxes, &intervals, &opts)?
        } else {
            let s = oracle2d::OracleSpectra::compute(&self.pot, &cfg.potential, &boxes[0], &opts)?;
            let rows = intervals
                .iter()
                .map(|&(a, b)| {
                    let (h, h0) = oracle2d::oracle_count(&s.h, &s.h0, (a, b));
                    oracle2d::OracleRow { box_id: 0, a, b, count_h: h, count_h0: h0, diff: h.saturating_sub(h0) }
                })
                .collect();
            RefinementReport { rows, flagged: Vec::new() }
        };
        let mut buf = Vec::new();
        report.write_csv(&mut buf).map_err(|source| Error::Io { path: self.out.join("oracle.csv"), source })?;
        self.write("oracle.csv", &buf)?;
        if !report.flagged.is_empty() {
            self.warnings.push(format!("oracle: {} interval(s) disagree across boxes by more than one", report.flagged.len()));
        }
        if let Some(e) = &self.effective {
            let ok = report.rows.iter().filter(|r| r.box_id == 0).enumerate().all(|(i, r)| {
                r.diff + ORACLE_SLACK >= e.curve.lower[i] && r.diff <= e.curve.upper[i] + ORACLE_SLACK
            });
            self.verdict("oracle within corridor", ok, format!("box 0 differences within the corridor +-{ORACLE_SLACK}"));
        }
        self.oracle = Some(report);
        Ok(())
    }

    /// Deterministic plain-text summary of every stage that ran.
    pub fn report(&self) -> String {
        let cfg = self.cfg;
        let mut s = String::from("gapcount report\n\n== configuration\n");
        s.push_str(&cfg.echo());
        let _ = writeln!(
            s,
            "\n== gap\nband {}: E+ = {}, next band bottom = {}, x+ = {}",
            cfg.j,
            num(landau_level(cfg.field.b_plus(), cfg.j)),
            num(landau_level(cfg.field.b_minus(), cfg.j + 1)),
            num(cfg.field.x_plus())
        );
        if let Some(t) = &self.bands {
            let _ = writeln!(s, "\n== bands\nsamples {}  j_max {}", t.samples.len(), t.j_max);
            s.push_str("j  min E_j  max E_j\n");
            for j in 1..=t.j_max {
                let e: Vec<f64> = (0..t.samples.len()).map(|i| t.energy(j, i)).collect();
                let lo = e.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let _ = writeln!(s, "{j}  {}  {}", num(lo), num(hi));
            }
        }
        if let Some(e) = &self.effective {
            let _ = writeln!(
                s,
                "\n== effective hamiltonian\nk-grid [{}, {}] with {} points\neps_quad {}\nfiniteness probe {}",
                num(e.kgrid.k_min),
                num(e.kgrid.k_max),
                e.kgrid.n_k,
                num(e.eps_quad),
                e.finite
            );
            s.push_str("lambda  count_lower  count_upper\n");
            for i in 0..e.curve.lambdas.len() {
                let _ = writeln!(s, "{}  {}  {}", num(e.curve.lambdas[i]), e.curve.lower[i], e.curve.upper[i]);
            }
        }
        if let Some(a) = &self.asympt {
            s.push_str("\n== asymptotics\n");
            if let Some(c) = &a.constants {
                let _ = writeln!(s, "C_minus {}\nC_plus {}\nC_minus < C_plus: {}", num(c.c_minus), num(c.c_plus), c.ordered());
            }
            for f in [&a.sqrt_log, &a.volume].into_iter().flatten() {
                let _ = writeln!(
                    s,
                    "fit {}: estimate {} residual_norm {} points {} trend_slope {}{}",
                    f.model.name(),
                    num(f.estimate),
                    num(f.residual_norm()),
                    f.points_used,
                    num(f.trend_slope),
                    if f.flagged { " (flagged)" } else { "" }
                );
            }
            for n in &a.notes {
                let _ = writeln!(s, "note: {n}");
            }
        }
        if let Some(o) = &self.oracle {
            s.push_str("\n== oracle\nbox  a  b  count_H  count_H0  diff\n");
            for r in &o.rows {
                let _ = writeln!(s, "{}  {}  {}  {}  {}  {}", r.box_id, num(r.a), num(r.b), r.count_h, r.count_h0, r.diff);
            }
            for (a, b) in &o.flagged {
                let _ = writeln!(s, "unstable interval ({}, {})", num(*a), num(*b));
            }
        }
        if !self.warnings.is_empty() {
            s.push_str("\n== warnings\n");
            for w in &self.warnings {
                let _ = writeln!(s, "{w}");
            }
        }
        s.push_str("\n== verdicts\n");
        for v in &self.verdicts {
            let _ = writeln!(s, "{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
        }
        s
    }
}

/// Process exit status for a finished or failed run.
pub fn exit_code(result: &Result<()>, command: Command, all_passed: bool) -> i32 {
    match result {
        Ok(()) if command == Command::Report && !all_passed => 4,
        Ok(()) => 0,
        Err(Error::Numerical(_)) => 3,
        Err(_) => 2,
    }
}
