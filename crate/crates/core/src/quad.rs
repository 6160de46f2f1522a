//! Gauss–Legendre rules and a small adaptive integrator.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate `f` over [a, b] with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * t);
        }
        acc * half
    }

    /// Nodes and weights mapped to [a, b], appended to the given buffers.
    pub fn push_mapped(&self, a: f64, b: f64, xs: &mut Vec<f64>, ws: &mut Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            xs.push(mid + half * t);
            ws.push(w * half);
        }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive Gauss–Legendre integration: a panel is accepted when its 10- and
/// 20-point estimates agree to `tol` (absolute, scaled by panel share).
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    thread_local! {
        static RULES: (GaussLegendre, GaussLegendre) = (GaussLegendre::new(10), GaussLegendre::new(20));
    }
    RULES.with(|(lo, hi)| adaptive_rec(f, a, b, tol, lo, hi, 0))
}

fn adaptive_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    lo: &GaussLegendre,
    hi: &GaussLegendre,
    depth: usize,
) -> f64 {
    let coarse = lo.integrate(a, b, f);
    let fine = hi.integrate(a, b, f);
    if (fine - coarse).abs() <= tol || depth >= 40 {
        return fine;
    }
    let m = 0.5 * (a + b);
    adaptive_rec(f, a, m, 0.5 * tol, lo, hi, depth + 1)
        + adaptive_rec(f, m, b, 0.5 * tol, lo, hi, depth + 1)
}
