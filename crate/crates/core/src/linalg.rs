//! Interleaved real/complex coordinate helpers.
//!
//! Ambient coordinates on C^N are stored interleaved as (x1, y1, ..., xN, yN).
//! Tangent vectors of the cylindrical end are stored in the "ambient
//! representation": the end tangent (dr, w) at (r, v) is identified with the
//! ambient vector dr * v + w, under which the translation-invariant reference
//! metric dr^2 + g_round becomes the Euclidean metric.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub fn complex_to_real(z: &[Complex64]) -> DVector<f64> {
    let mut out = DVector::zeros(2 * z.len());
    for (k, c) in z.iter().enumerate() {
        out[2 * k] = c.re;
        out[2 * k + 1] = c.im;
    }
    out
}

pub fn real_to_complex(v: &DVector<f64>) -> Vec<Complex64> {
    assert!(v.len() % 2 == 0);
    (0..v.len() / 2)
        .map(|k| Complex64::new(v[2 * k], v[2 * k + 1]))
        .collect()
}

/// Multiplication by i in interleaved coordinates: (x, y) -> (-y, x).
pub fn mul_i(v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(v.len());
    for k in 0..v.len() / 2 {
        out[2 * k] = -v[2 * k + 1];
        out[2 * k + 1] = v[2 * k];
    }
    out
}

/// Matrix of multiplication by i on R^{2n}.
pub fn std_j_matrix(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        m[(2 * k, 2 * k + 1)] = -1.0;
        m[(2 * k + 1, 2 * k)] = 1.0;
    }
    m
}

/// Standard symplectic pairing sum dx_k ^ dy_k = (i a) . b.
pub fn omega_st(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() / 2 {
        s += a[2 * k] * b[2 * k + 1] - a[2 * k + 1] * b[2 * k];
    }
    s
}

pub fn norm_c(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Compensated (Kahan) summation in fixed order, for bit-stable reductions.
#[derive(Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Least-squares line fit y = slope * x + intercept.
pub fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
