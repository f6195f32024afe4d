//! Composite Gauss–Legendre quadrature.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the Legendre recurrence.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Appends the mapped nodes and weights of the panel `[a, b]`.
    pub fn push_panel(&self, a: f64, b: f64, nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }

    /// Integral of `f` over the panels delimited by `breaks`.
    pub fn integrate(&self, breaks: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut total = 0.0;
        for p in breaks.windows(2) {
            let half = 0.5 * (p[1] - p[0]);
            let mid = 0.5 * (p[0] + p[1]);
            let mut s = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                s += w * f(mid + half * x);
            }
            total += half * s;
        }
        total
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Breakpoints on `[0, b]` graded geometrically toward 0 with ratio `q`,
/// down to `b * floor`.
pub fn graded_breaks(b: f64, q: f64, floor: f64) -> Vec<f64> {
    let mut pts = vec![b];
    let mut x = b;
    while x > b * floor {
        x *= q;
        pts.push(x);
    }
    pts.push(0.0);
    pts.reverse();
    pts
}

/// Breakpoints from `a` to `x_max`: geometric growth with ratio `grow` while
/// the step is below `width`, then uniform steps of `width`.
pub fn outward_breaks(a: f64, x_max: f64, grow: f64, width: f64) -> Vec<f64> {
    let mut pts = vec![a];
    let mut x = a;
    while x < x_max {
        let step = (x * (grow - 1.0)).clamp(1e-12, width);
        x = (x + step).min(x_max);
        if x_max - x < 1e-3 * step {
            x = x_max;
        }
        pts.push(x);
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(8);
        let v = gl.integrate(&[0.0, 1.0, 3.0], |x| x.powi(15));
        assert!((v - 3f64.powi(16) / 16.0).abs() / v < 1e-13);
        let s: f64 = gl.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn graded_panels_handle_log_singularity() {
        let gl = GaussLegendre::new(12);
        let v = gl.integrate(&graded_breaks(1.0, 0.3, 1e-16), |x| x.ln());
        assert!((v + 1.0).abs() < 1e-11, "{v}");
    }

    #[test]
    fn outward_breaks_reach_end() {
        let b = outward_breaks(0.05, 10.0, 1.6, 0.25);
        assert_eq!(*b.last().unwrap(), 10.0);
        assert!(b.windows(2).all(|p| p[1] > p[0] && p[1] - p[0] <= 0.25 + 1e-12));
    }
}
