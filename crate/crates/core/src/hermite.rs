//! Normalized Hermite functions `φ_j(t) = H_{j−1}(t)e^{−t²/2}/(√π 2^{j−1}(j−1)!)^{1/2}`,
//! evaluated by the three-term recurrence on the functions themselves.

use std::f64::consts::PI;

/// `φ_j(t)` for `j ≥ 1`.
pub fn phi(j: usize, t: f64) -> f64 {
    assert!(j >= 1, "Hermite functions are indexed from 1");
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * t * t).exp();
    for m in 1..j {
        // ψ_m = sqrt(2/m) t ψ_{m-1} - sqrt((m-1)/m) ψ_{m-2}
        let mf = m as f64;
        let next = (2.0 / mf).sqrt() * t * cur - ((mf - 1.0) / mf).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `φ_1(t), …, φ_jmax(t)` in one pass.
pub fn phi_all(j_max: usize, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(j_max);
    if j_max == 0 {
        return out;
    }
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * t * t).exp();
    out.push(cur);
    for m in 1..j_max {
        let mf = m as f64;
        let next = (2.0 / mf).sqrt() * t * cur - ((mf - 1.0) / mf).sqrt() * prev;
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::GaussLegendre;

    fn inner(i: usize, j: usize) -> f64 {
        let gl = GaussLegendre::new(40);
        (0..40)
            .map(|p| {
                let a = -20.0 + p as f64;
                gl.integrate(a, a + 1.0, |t| phi(i, t) * phi(j, t))
            })
            .sum()
    }

    #[test]
    fn values_at_origin() {
        assert!((phi(1, 0.0) - PI.powf(-0.25)).abs() < 1e-15);
        assert_eq!(phi(2, 0.0), 0.0);
    }

    #[test]
    fn orthonormal() {
        for i in 1..=8 {
            assert!((inner(i, i) - 1.0).abs() < 1e-10, "norm of φ_{i}");
            for j in 1..i {
                assert!(inner(i, j).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn matches_explicit_polynomials() {
        // φ_3 = (4t² − 2) e^{−t²/2} / sqrt(8√π)
        for t in [-2.0f64, -0.5, 0.3, 1.7] {
            let explicit = (4.0 * t * t - 2.0) * (-0.5 * t * t).exp() / (8.0 * PI.sqrt()).sqrt();
            assert!((phi(3, t) - explicit).abs() < 1e-14);
        }
    }

    #[test]
    fn oscillator_equation() {
        // −φ'' + t²φ = (2j − 1)φ by central differences
        let h = 1e-3;
        for j in 1..=5 {
            for t in [-1.3, 0.2, 2.1] {
                let d2 = (phi(j, t + h) - 2.0 * phi(j, t) + phi(j, t - h)) / (h * h);
                let lhs = -d2 + t * t * phi(j, t);
                assert!((lhs - (2 * j - 1) as f64 * phi(j, t)).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn phi_all_agrees() {
        let all = phi_all(6, 0.77);
        for (i, v) in all.iter().enumerate() {
            assert_eq!(*v, phi(i + 1, 0.77));
        }
    }
}
