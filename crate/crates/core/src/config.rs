//! Run configuration: a sectioned INI document with `[field]`, `[potential]`,
//! `[grid]`, `[lambda]`, `[oracle]` and `[output]`. Every key has a default
//! except the field kind; [`RunConfig::echo`] writes the filled-in document back.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ini::Ini;

use crate::effective::{KGrid, KGridRule, SymbolWindow, XiExtent};
use crate::error::{Error, Result};
use crate::fiber::{landau_level, Scheme};
use crate::field::{FieldKind, FieldSpec, Interpolation, SampleTable};
use crate::oracle2d::{Box2D, Stencil};
use crate::potential::{PotentialKind, PotentialV};
use crate::region::RegionSpec;

/// Numbers in echoes and tables: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum EffectiveGrid {
    Auto(KGridRule),
    Explicit(KGrid),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub primary: Box2D,
    /// Point-count factors for the extra boxes of the refinement study.
    pub refine: Vec<f64>,
    pub stencil: Stencil,
    pub cap: usize,
}

impl OracleConfig {
    pub fn boxes(&self) -> Vec<Box2D> {
        std::iter::once(self.primary).chain(self.refine.iter().map(|&f| self.primary.refined(f))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub field: FieldSpec,
    /// Source text of a sampled field, kept for the echo.
    pub samples_file: Option<PathBuf>,
    pub potential: PotentialV,
    pub region_inner: Option<RegionSpec>,
    pub region_outer: Option<RegionSpec>,
    pub j: usize,
    pub j_max: usize,
    pub band_k: KGrid,
    pub fiber_points: usize,
    pub scheme: Scheme,
    pub band_slack: f64,
    pub effective_fiber_points: usize,
    pub effective_grid: EffectiveGrid,
    pub dense_cap: usize,
    pub window: SymbolWindow,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_count: usize,
    pub delta: f64,
    pub corridor_b: f64,
    pub volume_cutoff: f64,
    pub oracle: Option<OracleConfig>,
    pub out_dir: PathBuf,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("field", &["kind", "b_minus", "b_plus", "center", "width", "samples_file", "interpolation"]),
    ("potential", &["kind", "amplitude", "m", "x0", "xi0", "width", "region", "region_inner", "region_outer"]),
    (
        "grid",
        &[
            "j",
            "j_max",
            "k_min",
            "k_max",
            "n_k",
            "fiber_points",
            "scheme",
            "band_slack",
            "effective_fiber_points",
            "effective_k",
            "alpha",
            "xi_extent",
            "max_points",
            "dense_cap",
            "window",
        ],
    ),
    ("lambda", &["min", "max", "count", "delta", "corridor_b", "volume_cutoff"]),
    ("oracle", &["enabled", "center_x", "center_y", "lx", "ly", "nx", "ny", "refine", "stencil", "cap"]),
    ("output", &["dir"]),
];

/// Typed lookups over one section's keys.
struct Section {
    name: &'static str,
    values: BTreeMap<String, String>,
}

impl Section {
    fn key(&self, k: &str) -> String {
        format!("{}.{}", self.name, k)
    }

    fn raw(&self, k: &str) -> Option<&str> {
        self.values.get(k).map(String::as_str)
    }

    fn f64_or(&self, k: &str, default: f64) -> Result<f64> {
        match self.raw(k) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|x| !x.is_nan())
                .ok_or_else(|| Error::validation(&self.key(k), format!("`{v}` is not a number"))),
        }
    }

    fn finite_or(&self, k: &str, default: f64) -> Result<f64> {
        let x = self.f64_or(k, default)?;
        if !x.is_finite() {
            return Err(Error::validation(&self.key(k), "must be finite"));
        }
        Ok(x)
    }

    fn req_f64(&self, k: &str) -> Result<f64> {
        if self.raw(k).is_none() {
            return Err(Error::validation(&self.key(k), "missing required key"));
        }
        self.finite_or(k, 0.0)
    }

    fn usize_or(&self, k: &str, default: usize) -> Result<usize> {
        match self.raw(k) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::validation(&self.key(k), format!("`{v}` is not a non-negative integer"))),
        }
    }

    fn bool_or(&self, k: &str, default: bool) -> Result<bool> {
        match self.raw(k).map(|v| v.to_ascii_lowercase()) {
            None => Ok(default),
            Some(v) if ["true", "yes", "on", "1"].contains(&v.as_str()) => Ok(true),
            Some(v) if ["false", "no", "off", "0"].contains(&v.as_str()) => Ok(false),
            Some(v) => Err(Error::validation(&self.key(k), format!("`{v}` is not a boolean"))),
        }
    }

    fn region(&self, k: &str) -> Result<Option<RegionSpec>> {
        self.raw(k)
            .map(|v| {
                v.parse::<RegionSpec>().map_err(|e| match e {
                    Error::Validation { msg, .. } => Error::validation(&self.key(k), msg),
                    other => other,
                })
            })
            .transpose()
    }

    fn choice<'c>(&self, k: &str, default: &'c str, options: &[&'c str]) -> Result<&'c str> {
        let v = self.raw(k).map(|v| v.to_ascii_lowercase());
        match v {
            None => Ok(default),
            Some(v) => options
                .iter()
                .find(|o| **o == v)
                .copied()
                .ok_or_else(|| Error::validation(&self.key(k), format!("`{v}` is not one of {}", options.join(", ")))),
        }
    }
}

fn sections(ini: &Ini) -> Result<BTreeMap<&'static str, Section>> {
    let mut out = BTreeMap::new();
    for &(name, _) in SECTIONS {
        out.insert(name, Section { name, values: BTreeMap::new() });
    }
    for (sec, props) in ini.iter() {
        let Some(sec) = sec else {
            if let Some((k, _)) = props.iter().next() {
                return Err(Error::validation(k, "key outside any section"));
            }
            continue;
        };
        let lower = sec.to_ascii_lowercase();
        let Some(&(name, keys)) = SECTIONS.iter().find(|(n, _)| *n == lower) else {
            return Err(Error::validation(sec, "unknown section"));
        };
        let section = out.get_mut(name).expect("all sections inserted");
        for (k, v) in props.iter() {
            let k = k.to_ascii_lowercase();
            if !keys.contains(&k.as_str()) {
                return Err(Error::validation(&format!("{name}.{k}"), "unknown key"));
            }
            if section.values.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::validation(&format!("{name}.{k}"), "duplicate key"));
            }
        }
    }
    Ok(out)
}

/// Parse and validate a configuration. `base` resolves relative file paths.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig> {
    let ini = Ini::load_from_str_noescape(text).map_err(|e| Error::Parse { line: e.line, msg: e.msg.to_string() })?;
    let s = sections(&ini)?;

    // [field]
    let f = &s["field"];
    if f.raw("kind").is_none() {
        return Err(Error::validation("field.kind", "missing required key"));
    }
    let kind = f.choice("kind", "constant", &["constant", "smooth_step", "logistic", "gaussian_dip", "sampled"])?;
    let b_plus = f.req_f64("b_plus")?;
    let (field, samples_file) = match kind {
        "constant" => (FieldSpec::constant(b_plus)?, None),
        "sampled" => {
            let rel = f.raw("samples_file").ok_or_else(|| Error::validation("field.samples_file", "missing required key"))?;
            let path = base.join(rel);
            let text = std::fs::read_to_string(&path).map_err(|source| Error::Io { path: path.clone(), source })?;
            let interp = match f.choice("interpolation", "linear", &["linear", "step"])? {
                "step" => Interpolation::Step,
                _ => Interpolation::Linear,
            };
            let table = SampleTable::parse(&text, interp)?;
            (FieldSpec::new(FieldKind::Sampled(table), f.req_f64("b_minus")?, b_plus)?, Some(PathBuf::from(rel)))
        }
        other => {
            let b_minus = f.req_f64("b_minus")?;
            let width = f.finite_or("width", 1.0)?;
            let center = f.finite_or("center", 0.0)?;
            let k = match other {
                "smooth_step" => FieldKind::SmoothStep { center, width },
                "logistic" => FieldKind::Logistic { center, width },
                _ => FieldKind::GaussianDip { width },
            };
            (FieldSpec::new(k, b_minus, b_plus)?, None)
        }
    };
    // the constant field is the Landau limit, with gaps but no left plateau
    if !matches!(field.kind(), FieldKind::Constant) {
        field.check_hypotheses()?;
    }

    // [potential]
    let p = &s["potential"];
    let amplitude = p.finite_or("amplitude", 1.0)?;
    let x0 = p.finite_or("x0", 0.0)?;
    let xi0 = p.finite_or("xi0", 0.0)?;
    let region = p.region("region")?;
    let potential = match p.choice("kind", "zero", &["zero", "power_law", "gaussian", "indicator"])? {
        "zero" => PotentialV::zero(),
        "power_law" => PotentialV::new(PotentialKind::PowerLaw { amplitude, m: p.finite_or("m", 2.0)?, x0, xi0 })?,
        "gaussian" => PotentialV::gaussian(amplitude, p.finite_or("width", 1.0)?, x0, xi0)?,
        _ => {
            let r = region.clone().ok_or_else(|| Error::validation("potential.region", "indicator needs a region"))?;
            PotentialV::indicator(amplitude, r)?
        }
    };
    let region_inner = p.region("region_inner")?.or_else(|| region.clone());
    let region_outer = p.region("region_outer")?.or(region);

    // [grid]
    let g = &s["grid"];
    let j = g.usize_or("j", 1)?;
    if j == 0 {
        return Err(Error::validation("grid.j", "band index starts at 1"));
    }
    let j_max = g.usize_or("j_max", j.max(3))?;
    if j_max == 0 {
        return Err(Error::validation("grid.j_max", "must be at least 1"));
    }
    let band_k = KGrid::new(g.finite_or("k_min", -4.0)?, g.finite_or("k_max", 4.0)?, g.usize_or("n_k", 21)?)
        .map_err(|e| Error::validation("grid.n_k", e.to_string()))?;
    let fiber_points = g.usize_or("fiber_points", 2000)?;
    let effective_fiber_points = g.usize_or("effective_fiber_points", 800)?;
    for (k, n) in [("grid.fiber_points", fiber_points), ("grid.effective_fiber_points", effective_fiber_points)] {
        if n < 50 {
            return Err(Error::validation(k, "needs at least 50 points"));
        }
    }
    let scheme = match g.choice("scheme", "gap_corrected", &["second_order", "richardson", "gap_corrected"])? {
        "second_order" => Scheme::SecondOrder,
        "richardson" => Scheme::Richardson,
        _ => Scheme::GapCorrected,
    };
    let band_slack = g.finite_or("band_slack", 0.0)?;
    let dense_cap = g.usize_or("dense_cap", 6000)?;
    let window = match g.choice("window", "auto", &["auto", "on", "off"])? {
        "on" => SymbolWindow::On,
        "off" => SymbolWindow::Off,
        _ => SymbolWindow::Auto,
    };
    let effective_grid = match g.raw("effective_k").map(str::trim) {
        None | Some("auto") => {
            let xi_extent = match g.raw("xi_extent").map(str::to_ascii_lowercase).as_deref() {
                None | Some("support") => XiExtent::Support,
                Some("level_set") => XiExtent::LevelSet,
                Some(v) => match v.parse::<f64>() {
                    Ok(h) if h > 0.0 && h.is_finite() => XiExtent::Fixed(h),
                    _ => return Err(Error::validation("grid.xi_extent", format!("`{v}` is not support, level_set or a positive number"))),
                },
            };
            let alpha = g.finite_or("alpha", 4.0)?;
            if alpha < 1.0 {
                return Err(Error::validation("grid.alpha", "must be at least 1"));
            }
            EffectiveGrid::Auto(KGridRule { alpha, xi_extent, max_points: g.usize_or("max_points", dense_cap)? })
        }
        Some(v) => {
            let parts: Vec<&str> = v.split_whitespace().collect();
            let bad = || Error::validation("grid.effective_k", format!("`{v}` is not `auto` or `k_min k_max n_k`"));
            if parts.len() != 3 {
                return Err(bad());
            }
            let (a, b, n) = (parts[0].parse().map_err(|_| bad())?, parts[1].parse().map_err(|_| bad())?, parts[2].parse().map_err(|_| bad())?);
            EffectiveGrid::Explicit(KGrid::new(a, b, n).map_err(|e| Error::validation("grid.effective_k", e.to_string()))?)
        }
    };

    // [lambda]
    let l = &s["lambda"];
    let delta = l.finite_or("delta", 0.1)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::validation("delta", format!("must lie in (0, 1), got {delta}")));
    }
    let lambda_min = l.finite_or("min", 1e-4)?;
    let lambda_max = l.finite_or("max", 1e-1)?;
    let lambda_count = l.usize_or("count", 13)?;
    let gap = landau_level(field.b_minus(), j + 1) - landau_level(field.b_plus(), j);
    if !(lambda_min > 0.0 && lambda_min < lambda_max && lambda_max < gap) || lambda_count < 2 {
        return Err(Error::validation(
            "lambda_grid",
            format!("need 0 < min < max < {gap} (gap width above band {j}) and count >= 2; got [{lambda_min}, {lambda_max}] x {lambda_count}"),
        ));
    }
    let corridor_b = l.finite_or("corridor_b", field.b_plus())?;
    let volume_cutoff = l.f64_or("volume_cutoff", field.x_plus())?;

    // [oracle]
    let o = &s["oracle"];
    let oracle = if o.bool_or("enabled", false)? {
        let primary = Box2D::new(
            o.finite_or("center_x", 0.0)?,
            o.finite_or("center_y", potential.xi_center())?,
            o.finite_or("lx", 6.0)?,
            o.finite_or("ly", 8.0)?,
            o.usize_or("nx", 49)?,
            o.usize_or("ny", 100)?,
        )
        .map_err(|e| Error::validation("oracle.nx", e.to_string()))?;
        let refine = match o.raw("refine") {
            None | Some("") => Vec::new(),
            Some(v) => v
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<f64>().ok().filter(|f| *f > 0.0 && f.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| Error::validation("oracle.refine", format!("`{v}` is not a list of positive factors")))?,
        };
        let stencil = match o.choice("stencil", "peierls", &["peierls", "central"])? {
            "central" => Stencil::CentralExpanded,
            _ => Stencil::Peierls,
        };
        Some(OracleConfig { primary, refine, stencil, cap: o.usize_or("cap", crate::oracle2d::DEFAULT_CAP)? })
    } else {
        None
    };

    let out_dir = PathBuf::from(s["output"].raw("dir").unwrap_or("out"));
    Ok(RunConfig {
        field,
        samples_file,
        potential,
        region_inner,
        region_outer,
        j,
        j_max,
        band_k,
        fiber_points,
        scheme,
        band_slack,
        effective_fiber_points,
        effective_grid,
        dense_cap,
        window,
        lambda_min,
        lambda_max,
        lambda_count,
        delta,
        corridor_b,
        volume_cutoff,
        oracle,
        out_dir,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}

impl RunConfig {
    pub fn lambdas(&self) -> Vec<f64> {
        crate::effective::geometric_lambdas(self.lambda_min, self.lambda_max, self.lambda_count)
    }

    /// The full configuration, defaults included, as a parseable document.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let f = &self.field;
        s.push_str("[field]\n");
        let kind = match f.kind() {
            FieldKind::Constant => "constant",
            FieldKind::SmoothStep { .. } => "smooth_step",
            FieldKind::Logistic { .. } => "logistic",
            FieldKind::GaussianDip { .. } => "gaussian_dip",
            FieldKind::Sampled(_) => "sampled",
        };
        let _ = writeln!(s, "kind = {kind}");
        let _ = writeln!(s, "b_minus = {}", num(f.b_minus()));
        let _ = writeln!(s, "b_plus = {}", num(f.b_plus()));
        match f.kind() {
            FieldKind::SmoothStep { center, width } | FieldKind::Logistic { center, width } => {
                let _ = writeln!(s, "center = {}\nwidth = {}", num(*center), num(*width));
            }
            FieldKind::GaussianDip { width } => {
                let _ = writeln!(s, "width = {}", num(*width));
            }
            FieldKind::Sampled(t) => {
                if let Some(p) = &self.samples_file {
                    let _ = writeln!(s, "samples_file = {}", p.display());
                }
                let i = if t.interpolation() == Interpolation::Step { "step" } else { "linear" };
                let _ = writeln!(s, "interpolation = {i}");
            }
            FieldKind::Constant => {}
        }
        s.push_str("\n[potential]\n");
        match self.potential.kind() {
            PotentialKind::Zero => s.push_str("kind = zero\n"),
            PotentialKind::PowerLaw { amplitude, m, x0, xi0 } => {
                let _ = writeln!(s, "kind = power_law\namplitude = {}\nm = {}\nx0 = {}\nxi0 = {}", num(*amplitude), num(*m), num(*x0), num(*xi0));
            }
            PotentialKind::Gaussian { amplitude, width, x0, xi0 } => {
                let _ = writeln!(s, "kind = gaussian\namplitude = {}\nwidth = {}\nx0 = {}\nxi0 = {}", num(*amplitude), num(*width), num(*x0), num(*xi0));
            }
            PotentialKind::Indicator { amplitude, region } => {
                let _ = writeln!(s, "kind = indicator\namplitude = {}\nregion = {region}", num(*amplitude));
            }
        }
        if let Some(r) = &self.region_inner {
            let _ = writeln!(s, "region_inner = {r}");
        }
        if let Some(r) = &self.region_outer {
            let _ = writeln!(s, "region_outer = {r}");
        }
        s.push_str("\n[grid]\n");
        let scheme = match self.scheme {
            Scheme::SecondOrder => "second_order",
            Scheme::Richardson => "richardson",
            Scheme::GapCorrected => "gap_corrected",
        };
        let _ = writeln!(s, "j = {}\nj_max = {}", self.j, self.j_max);
        let _ = writeln!(s, "k_min = {}\nk_max = {}\nn_k = {}", num(self.band_k.k_min), num(self.band_k.k_max), self.band_k.n_k);
        let _ = writeln!(s, "fiber_points = {}\nscheme = {scheme}\nband_slack = {}", self.fiber_points, num(self.band_slack));
        let _ = writeln!(s, "effective_fiber_points = {}", self.effective_fiber_points);
        match &self.effective_grid {
            EffectiveGrid::Auto(rule) => {
                let xi = match rule.xi_extent {
                    XiExtent::Support => "support".to_string(),
                    XiExtent::LevelSet => "level_set".to_string(),
                    XiExtent::Fixed(h) => num(h),
                };
                let _ = writeln!(s, "effective_k = auto\nalpha = {}\nxi_extent = {xi}\nmax_points = {}", num(rule.alpha), rule.max_points);
            }
            EffectiveGrid::Explicit(k) => {
                let _ = writeln!(s, "effective_k = {} {} {}", num(k.k_min), num(k.k_max), k.n_k);
            }
        }
        let window = match self.window {
            SymbolWindow::Auto => "auto",
            SymbolWindow::On => "on",
            SymbolWindow::Off => "off",
        };
        let _ = writeln!(s, "dense_cap = {}\nwindow = {window}", self.dense_cap);
        s.push_str("\n[lambda]\n");
        let _ = writeln!(
            s,
            "min = {}\nmax = {}\ncount = {}\ndelta = {}\ncorridor_b = {}\nvolume_cutoff = {}",
            num(self.lambda_min),
            num(self.lambda_max),
            self.lambda_count,
            num(self.delta),
            num(self.corridor_b),
            num(self.volume_cutoff)
        );
        s.push_str("\n[oracle]\n");
        match &self.oracle {
            None => s.push_str("enabled = false\n"),
            Some(o) => {
                let b = &o.primary;
                let _ = writeln!(
                    s,
                    "enabled = true\ncenter_x = {}\ncenter_y = {}\nlx = {}\nly = {}\nnx = {}\nny = {}",
                    num(b.center_x),
                    num(b.center_y),
                    num(b.lx),
                    num(b.ly),
                    b.nx,
                    b.ny
                );
                let refine: Vec<String> = o.refine.iter().map(|f| num(*f)).collect();
                let stencil = if o.stencil == Stencil::Peierls { "peierls" } else { "central" };
                let _ = writeln!(s, "refine = {}\nstencil = {stencil}\ncap = {}", refine.join(", "), o.cap);
            }
        }
        let _ = write!(s, "\n[output]\ndir = {}\n", self.out_dir.display());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        parse_config(text, Path::new("."))
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse("[field]\nkind = constant\nb_plus = 1\n").unwrap();
        assert!(c.potential.is_zero());
        assert_eq!((c.j, c.lambda_count, c.delta), (1, 13, 0.1));
        assert!(c.oracle.is_none());
        let again = parse(&c.echo()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.echo(), c.echo());
    }

    #[test]
    fn validation_names_the_key() {
        let key = |text: &str| match parse(text) {
            Err(Error::Validation { key, .. }) => key,
            other => panic!("{other:?}"),
        };
        let base = "[field]\nkind = smooth_step\nb_minus = 0.5\nb_plus = 1\n";
        assert_eq!(key(&format!("{base}[lambda]\ndelta = 1.5\n")), "delta");
        assert_eq!(key(&format!("{base}[lambda]\nmax = 0.5\n")), "lambda_grid");
        assert_eq!(key(&format!("{base}[lambda]\nmin = 0.2\nmax = 0.1\n")), "lambda_grid");
        assert_eq!(key("[field]\nb_plus = 1\n"), "field.kind");
        assert_eq!(key("[field]\nkind = smooth_step\nb_plus = 1\n"), "field.b_minus");
        assert_eq!(key(&format!("{base}[grid]\nj = 0\n")), "grid.j");
        assert_eq!(key(&format!("{base}[grid]\nbogus = 1\n")), "grid.bogus");
        assert_eq!(key(&format!("{base}[potential]\nkind = indicator\nregion = disc 0 0\n")), "potential.region");
        assert_eq!(key(&format!("{base}[weird]\nx = 1\n")), "weird");
    }

    #[test]
    fn full_config_round_trips() {
        let text = "[field]\nkind = smooth_step\nb_minus = 0.5\nb_plus = 1\ncenter = -1\nwidth = 0.1\n\
                    [potential]\nkind = indicator\namplitude = 0.4\nregion = polygon 1 -6; 3 -6; 3 6; 1 6\n\
                    [grid]\neffective_k = auto\nxi_extent = 6.5\nscheme = gap_corrected\n\
                    [lambda]\nmin = 1e-6\nmax = 1e-2\ncount = 9\n\
                    [oracle]\nenabled = true\nnx = 20\nny = 30\nrefine = 1.1, 1.2\n\
                    [output]\ndir = runs/a\n";
        let c = parse(text).unwrap();
        assert!(matches!(c.potential.kind(), PotentialKind::Indicator { region: RegionSpec::Polygon(v), .. } if v.len() == 4));
        assert_eq!(c.oracle.as_ref().unwrap().boxes().len(), 3);
        assert_eq!(parse(&c.echo()).unwrap(), c);
    }

    #[test]
    fn sampled_field_reads_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("b.csv"), "x,B\n-2,0.5\n0,0.5\n1,1\n").unwrap();
        let text = "[field]\nkind = sampled\nb_minus = 0.5\nb_plus = 1\nsamples_file = b.csv\n";
        let c = parse_config(text, dir.path()).unwrap();
        assert_eq!(c.field.x_plus(), 1.0);
        assert!(matches!(parse(text), Err(Error::Io { .. })));
    }

    #[test]
    fn malformed_document() {
        assert!(matches!(parse("[field\nkind = constant\n"), Err(Error::Parse { .. })));
    }
}
