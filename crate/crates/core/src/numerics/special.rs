//! Cosine and sine integrals.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Returns `(Ci(x), Si(x))` for `x > 0`: power series for `x ≤ 2`, a
/// continued fraction for `E₁(ix)` otherwise.
pub fn cisi(x: f64) -> (f64, f64) {
    let t = x.abs();
    if t == 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    let (ci, si) = if t > 2.0 {
        let fpmin = 1e-300;
        let one = Complex64::new(1.0, 0.0);
        let mut b = Complex64::new(1.0, t);
        let mut c = Complex64::new(1.0 / fpmin, 0.0);
        let mut d = one / b;
        let mut h = d;
        for i in 2..200 {
            let a = -(((i - 1) * (i - 1)) as f64);
            b += 2.0;
            d = one / (d * a + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
                break;
            }
        }
        h *= Complex64::new(t.cos(), -t.sin());
        (-h.re, FRAC_PI_2 + h.im)
    } else {
        let (mut sum, mut sums, mut sumc) = (0.0f64, 0.0f64, 0.0f64);
        let mut sign = 1.0;
        let mut fact = 1.0;
        let mut odd = true;
        for k in 1..200 {
            let kf = k as f64;
            fact *= t / kf;
            let term = fact / kf;
            sum += sign * term;
            let err = term / sum.abs();
            if odd {
                sign = -sign;
                sums = sum;
                sum = sumc;
            } else {
                sumc = sum;
                sum = sums;
            }
            if err < 1e-17 {
                break;
            }
            odd = !odd;
        }
        (sumc + t.ln() + EULER_GAMMA, sums)
    };
    (ci, if x < 0.0 { -si } else { si })
}

/// Auxiliary function `g(z) = -Ci(z) cos z - (Si(z) - π/2) sin z`, equal to
/// `∫₀^∞ cos(zr)/(1+r) dr` and to `∫₀^∞ t e^{-zt}/(1+t²) dt` for `z > 0`.
pub fn aux_g(z: f64) -> f64 {
    let (ci, si) = cisi(z);
    -ci * z.cos() - (si - FRAC_PI_2) * z.sin()
}

/// Auxiliary function `f(z) = Ci(z) sin z - (Si(z) - π/2) cos z`, equal to
/// `∫₀^∞ e^{-zt}/(1+t²) dt`; `f(0) = π/2`.
pub fn aux_f(z: f64) -> f64 {
    if z == 0.0 {
        return FRAC_PI_2;
    }
    let (ci, si) = cisi(z);
    ci * z.sin() - (si - FRAC_PI_2) * z.cos()
}
