//! Bounded planar regions: rectangles, discs and simple polygons, with the
//! vertical cross-sections and enclosing-disc geometry the asymptotic
//! constants need.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum RegionSpec {
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disc { cx: f64, cy: f64, r: f64 },
    /// Vertices in order (either orientation), not repeated at the end.
    Polygon(Vec<(f64, f64)>),
}

/// Vertices used when a disc has to be represented as a polygon.
pub const DISC_POLYGON_VERTICES: usize = 4096;

impl RegionSpec {
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let r = RegionSpec::Rectangle { x0, x1, y0, y1 };
        r.validate()?;
        Ok(r)
    }

    pub fn disc(cx: f64, cy: f64, r: f64) -> Result<Self> {
        let d = RegionSpec::Disc { cx, cy, r };
        d.validate()?;
        Ok(d)
    }

    pub fn polygon(vertices: Vec<(f64, f64)>) -> Result<Self> {
        let p = RegionSpec::Polygon(vertices);
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::validation("region", msg));
        match self {
            RegionSpec::Rectangle { x0, x1, y0, y1 } => {
                if ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) || x0 >= x1 || y0 >= y1 {
                    return bad(format!("rectangle [{x0}, {x1}] x [{y0}, {y1}] is empty or not finite"));
                }
            }
            RegionSpec::Disc { cx, cy, r } => {
                if !(cx.is_finite() && cy.is_finite() && r.is_finite() && *r > 0.0) {
                    return bad(format!("disc radius {r} must be positive"));
                }
            }
            RegionSpec::Polygon(v) => {
                if v.len() < 3 {
                    return bad(format!("polygon needs at least 3 vertices, got {}", v.len()));
                }
                if v.iter().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
                    return bad("polygon vertex is not finite".into());
                }
                if shoelace(v).abs() <= 1e-14 * bounding_scale(v).powi(2) {
                    return bad("polygon has zero area".into());
                }
                if !is_simple(v) {
                    return bad("polygon edges intersect".into());
                }
            }
        }
        Ok(())
    }

    pub fn x_range(&self) -> (f64, f64) {
        match self {
            RegionSpec::Rectangle { x0, x1, .. } => (*x0, *x1),
            RegionSpec::Disc { cx, r, .. } => (cx - r, cx + r),
            RegionSpec::Polygon(v) => min_max(v.iter().map(|p| p.0)),
        }
    }

    pub fn y_range(&self) -> (f64, f64) {
        match self {
            RegionSpec::Rectangle { y0, y1, .. } => (*y0, *y1),
            RegionSpec::Disc { cy, r, .. } => (cy - r, cy + r),
            RegionSpec::Polygon(v) => min_max(v.iter().map(|p| p.1)),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            RegionSpec::Rectangle { x0, x1, y0, y1 } => (x1 - x0) * (y1 - y0),
            RegionSpec::Disc { r, .. } => std::f64::consts::PI * r * r,
            RegionSpec::Polygon(v) => shoelace(v).abs(),
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.cross_section(x).iter().any(|&(a, b)| a < y && y < b)
    }

    /// Open intervals of `{y : (x, y) ∈ Ω}`, sorted. Empty outside the x-range.
    pub fn cross_section(&self, x: f64) -> Vec<(f64, f64)> {
        match self {
            RegionSpec::Rectangle { x0, x1, y0, y1 } => {
                if *x0 < x && x < *x1 {
                    vec![(*y0, *y1)]
                } else {
                    Vec::new()
                }
            }
            RegionSpec::Disc { cx, cy, r } => {
                let d = x - cx;
                if d.abs() < *r {
                    let l = ((r - d) * (r + d)).sqrt();
                    vec![(cy - l, cy + l)]
                } else {
                    Vec::new()
                }
            }
            RegionSpec::Polygon(v) => {
                let mut ys: Vec<f64> = edges(v)
                    .filter_map(|((px, py), (qx, qy))| {
                        let (lo, hi) = if px < qx { (px, qx) } else { (qx, px) };
                        if lo <= x && x < hi {
                            Some(py + (qy - py) * (x - px) / (qx - px))
                        } else {
                            None
                        }
                    })
                    .collect();
                ys.sort_by(f64::total_cmp);
                ys.chunks_exact(2).map(|c| (c[0], c[1])).filter(|c| c.1 > c.0).collect()
            }
        }
    }

    /// x-coordinates where the cross-section changes form.
    pub fn x_breakpoints(&self) -> Vec<f64> {
        match self {
            RegionSpec::Polygon(v) => {
                let mut xs: Vec<f64> = v.iter().map(|p| p.0).collect();
                xs.sort_by(f64::total_cmp);
                xs.dedup();
                xs
            }
            _ => {
                let (a, b) = self.x_range();
                vec![a, b]
            }
        }
    }

    /// Midpoint of the y-range.
    pub fn y_center(&self) -> f64 {
        let (a, b) = self.y_range();
        0.5 * (a + b)
    }

    /// Whether every vertical cross-section is symmetric about [`y_center`](Self::y_center).
    pub fn is_y_symmetric(&self) -> bool {
        match self {
            RegionSpec::Rectangle { .. } | RegionSpec::Disc { .. } => true,
            RegionSpec::Polygon(_) => {
                let c = self.y_center();
                let xs = self.x_breakpoints();
                let scale = bounding_scale_region(self);
                xs.windows(2).all(|w| {
                    [0.25, 0.5, 0.75].iter().all(|t| {
                        let x = w[0] + t * (w[1] - w[0]);
                        let s = self.cross_section(x);
                        let n = s.len();
                        (0..n).all(|i| {
                            let (a, b) = s[i];
                            let (ma, mb) = s[n - 1 - i];
                            ((a - c) + (mb - c)).abs() < 1e-12 * scale
                                && ((b - c) + (ma - c)).abs() < 1e-12 * scale
                        })
                    })
                })
            }
        }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        match self {
            RegionSpec::Rectangle { x0, x1, y0, y1 } => RegionSpec::Rectangle {
                x0: x0 + dx,
                x1: x1 + dx,
                y0: y0 + dy,
                y1: y1 + dy,
            },
            RegionSpec::Disc { cx, cy, r } => RegionSpec::Disc { cx: cx + dx, cy: cy + dy, r: *r },
            RegionSpec::Polygon(v) => RegionSpec::Polygon(v.iter().map(|(x, y)| (x + dx, y + dy)).collect()),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        match self {
            RegionSpec::Rectangle { x0, x1, y0, y1 } => RegionSpec::Rectangle {
                x0: x0 * s,
                x1: x1 * s,
                y0: y0 * s,
                y1: y1 * s,
            },
            RegionSpec::Disc { cx, cy, r } => RegionSpec::Disc { cx: cx * s, cy: cy * s, r: r * s },
            RegionSpec::Polygon(v) => RegionSpec::Polygon(v.iter().map(|(x, y)| (x * s, y * s)).collect()),
        }
    }

    /// `Ω ∩ {x > cut}`, or `None` when that is empty. A disc cut through its
    /// interior becomes a fine polygon.
    pub fn clip_right(&self, cut: f64) -> Option<Self> {
        let (lo, hi) = self.x_range();
        if cut >= hi {
            return None;
        }
        if cut <= lo {
            return Some(self.clone());
        }
        match self {
            RegionSpec::Rectangle { x1, y0, y1, .. } => Some(RegionSpec::Rectangle {
                x0: cut,
                x1: *x1,
                y0: *y0,
                y1: *y1,
            }),
            RegionSpec::Disc { .. } => self.to_polygon().clip_right(cut),
            RegionSpec::Polygon(v) => {
                let clipped = clip_half_plane(v, cut);
                if clipped.len() < 3 || shoelace(&clipped).abs() <= 0.0 {
                    None
                } else {
                    Some(RegionSpec::Polygon(clipped))
                }
            }
        }
    }

    pub fn to_polygon(&self) -> Self {
        match self {
            RegionSpec::Rectangle { x0, x1, y0, y1 } => {
                RegionSpec::Polygon(vec![(*x0, *y0), (*x1, *y0), (*x1, *y1), (*x0, *y1)])
            }
            RegionSpec::Disc { cx, cy, r } => RegionSpec::Polygon(
                (0..DISC_POLYGON_VERTICES)
                    .map(|i| {
                        let t = std::f64::consts::TAU * i as f64 / DISC_POLYGON_VERTICES as f64;
                        (cx + r * t.cos(), cy + r * t.sin())
                    })
                    .collect(),
            ),
            RegionSpec::Polygon(_) => self.clone(),
        }
    }

    /// Length of the longest vertical segment contained in the closed region.
    pub fn c_minus(&self) -> f64 {
        match self {
            RegionSpec::Rectangle { y0, y1, .. } => y1 - y0,
            RegionSpec::Disc { r, .. } => 2.0 * r,
            RegionSpec::Polygon(v) => polygon_c_minus(v),
        }
    }

    /// Distance from `p` to the farthest point of the region.
    pub fn max_distance(&self, px: f64, py: f64) -> f64 {
        match self {
            RegionSpec::Disc { cx, cy, r } => (px - cx).hypot(py - cy) + r,
            _ => {
                let RegionSpec::Polygon(v) = self.to_polygon() else { unreachable!() };
                v.iter().map(|(x, y)| (px - x).hypot(py - y)).fold(0.0, f64::max)
            }
        }
    }

    /// Smallest radius of a disc containing the region with center on the
    /// vertical line `x = cx`, and the optimal center height.
    pub fn enclosing_radius_on_line(&self, cx: f64) -> (f64, f64) {
        match self {
            RegionSpec::Disc { cx: dx, cy, r } => ((cx - dx).abs() + r, *cy),
            _ => {
                let RegionSpec::Polygon(v) = self.to_polygon() else { unreachable!() };
                let f = |eta: f64| v.iter().map(|(x, y)| (cx - x).hypot(eta - y)).fold(0.0, f64::max);
                let (lo, hi) = self.y_range();
                let eta = golden_min(&f, lo, hi, 1e-13 * (1.0 + hi.abs().max(lo.abs())));
                (f(eta), eta)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            RegionSpec::Disc { r, .. } => 2.0 * r,
            _ => {
                let RegionSpec::Polygon(v) = self.to_polygon() else { unreachable!() };
                let mut d: f64 = 0.0;
                for a in &v {
                    for b in &v {
                        d = d.max((a.0 - b.0).hypot(a.1 - b.1));
                    }
                }
                d
            }
        }
    }
}

/// Minimize a unimodal function on `[a, b]` by golden-section search.
pub fn golden_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..300 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn min_max(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

fn edges(v: &[(f64, f64)]) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
    (0..v.len()).map(move |i| (v[i], v[(i + 1) % v.len()]))
}

fn shoelace(v: &[(f64, f64)]) -> f64 {
    0.5 * edges(v).map(|(p, q)| p.0 * q.1 - q.0 * p.1).sum::<f64>()
}

fn bounding_scale(v: &[(f64, f64)]) -> f64 {
    let (a, b) = min_max(v.iter().map(|p| p.0));
    let (c, d) = min_max(v.iter().map(|p| p.1));
    (b - a).max(d - c).max(f64::MIN_POSITIVE)
}

fn bounding_scale_region(r: &RegionSpec) -> f64 {
    let (a, b) = r.x_range();
    let (c, d) = r.y_range();
    (b - a).max(d - c).max(a.abs()).max(c.abs()).max(1.0)
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn on_segment(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> bool {
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

fn segments_intersect(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// No two non-adjacent edges meet and no edge has zero length.
fn is_simple(v: &[(f64, f64)]) -> bool {
    let n = v.len();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if a == b {
            return false;
        }
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(a, b, v[j], v[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Sutherland–Hodgman against the half-plane `x ≥ cut`.
fn clip_half_plane(v: &[(f64, f64)], cut: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(v.len() + 2);
    for (p, q) in edges(v) {
        let p_in = p.0 >= cut;
        let q_in = q.0 >= cut;
        if p_in {
            out.push(p);
        }
        if p_in != q_in {
            let t = (cut - p.0) / (q.0 - p.0);
            out.push((cut, p.1 + t * (q.1 - p.1)));
        }
    }
    out.dedup();
    if out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

/// Sweep over the slabs between consecutive vertex abscissae. Cross-section
/// lengths are linear inside a slab, so only slab ends matter; at a vertex the
/// closed cross-section is the union of the two one-sided limits.
fn polygon_c_minus(v: &[(f64, f64)]) -> f64 {
    let mut xs: Vec<f64> = v.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let slab_limits = |a: f64, b: f64| -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
        let mid = 0.5 * (a + b);
        let mut active: Vec<(f64, f64, f64)> = edges(v)
            .filter_map(|((px, py), (qx, qy))| {
                let (lo, hi) = if px < qx { (px, qx) } else { (qx, px) };
                if lo <= a && hi >= b && px != qx {
                    let at = |x: f64| py + (qy - py) * (x - px) / (qx - px);
                    Some((at(mid), at(a), at(b)))
                } else {
                    None
                }
            })
            .collect();
        active.sort_by(|s, t| s.0.total_cmp(&t.0));
        let left = active.chunks_exact(2).map(|c| (c[0].1, c[1].1)).collect();
        let right = active.chunks_exact(2).map(|c| (c[0].2, c[1].2)).collect();
        (left, right)
    };
    let mut at_vertex: Vec<Vec<(f64, f64)>> = vec![Vec::new(); xs.len()];
    for i in 0..xs.len().saturating_sub(1) {
        let (at_a, at_b) = slab_limits(xs[i], xs[i + 1]);
        at_vertex[i].extend(at_a);
        at_vertex[i + 1].extend(at_b);
    }
    at_vertex
        .into_iter()
        .map(|mut ivs| {
            ivs.sort_by(|s, t| s.0.total_cmp(&t.0));
            let mut best: f64 = 0.0;
            let mut cur: Option<(f64, f64)> = None;
            for (a, b) in ivs {
                cur = match cur {
                    Some((ca, cb)) if a <= cb => Some((ca, cb.max(b))),
                    Some((ca, cb)) => {
                        best = best.max(cb - ca);
                        Some((a, b))
                    }
                    None => Some((a, b)),
                };
            }
            if let Some((ca, cb)) = cur {
                best = best.max(cb - ca);
            }
            best
        })
        .fold(0.0, f64::max)
}

/// `rectangle x0 x1 y0 y1`, `disc cx cy r` or `polygon x y; x y; ...`.
impl std::str::FromStr for RegionSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (kind, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
        let numbers = |s: &str| -> Result<Vec<f64>> {
            s.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::validation("region", format!("bad number `{t}`")))
                })
                .collect()
        };
        let exactly = |s: &str, n: usize| -> Result<Vec<f64>> {
            let v = numbers(s)?;
            if v.len() != n {
                return Err(Error::validation("region", format!("`{kind}` takes {n} numbers, got {}", v.len())));
            }
            Ok(v)
        };
        match kind.to_ascii_lowercase().as_str() {
            "rectangle" | "rect" => {
                let v = exactly(rest, 4)?;
                RegionSpec::rectangle(v[0], v[1], v[2], v[3])
            }
            "disc" | "disk" => {
                let v = exactly(rest, 3)?;
                RegionSpec::disc(v[0], v[1], v[2])
            }
            "polygon" | "poly" => {
                let vertices = rest
                    .split(';')
                    .filter(|p| !p.trim().is_empty())
                    .map(|p| {
                        let v = numbers(p)?;
                        match v[..] {
                            [x, y] => Ok((x, y)),
                            _ => Err(Error::validation("region", format!("vertex `{}` needs two numbers", p.trim()))),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                RegionSpec::polygon(vertices)
            }
            other => Err(Error::validation("region", format!("unknown region kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for RegionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegionSpec::Rectangle { x0, x1, y0, y1 } => write!(f, "rectangle {x0:?} {x1:?} {y0:?} {y1:?}"),
            RegionSpec::Disc { cx, cy, r } => write!(f, "disc {cx:?} {cy:?} {r:?}"),
            RegionSpec::Polygon(v) => {
                let parts: Vec<String> = v.iter().map(|(x, y)| format!("{x:?} {y:?}")).collect();
                write!(f, "polygon {}", parts.join("; "))
            }
        }
    }
}
