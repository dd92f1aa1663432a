//! Exponential decay of J toward its translation-invariant limit: C^l norms
//! along depth slices and a log-linear fit of the decay rate.

use super::{AcsField, ChartPoint, EndSign};
use crate::error::{Error, Result};
use crate::linalg::line_fit;
use nalgebra::DVector;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Norms below this are treated as zero (J is exactly cylindrical there).
const CYL_TOL: f64 = 1e-13;
/// Step for first-order centered differences.
const FD1_STEP: f64 = 1e-4;
/// Step for second differences (noise / h^2 stays near 1e-10).
const FD2_STEP: f64 = 1e-3;
/// Fit window: slices deeper than this depth only.
const FIT_DEPTH: f64 = -2.0;

/// Result of fitting sup_r-slice |J - J_inf|_{C^l} ~ c * e^{delta r}.
#[derive(Debug, Clone)]
pub struct DecayFit {
    /// Multiplicative constant of the fit.
    pub c: f64,
    /// Decay exponent; positive means decaying toward the limit.
    pub delta: f64,
    /// All sampled slice norms were below 1e-13.
    pub exactly_cylindrical: bool,
    /// Fitted exponent is positive.
    pub decaying: bool,
    /// (depth, slice norm) pairs that entered the estimate.
    pub samples: Vec<(f64, f64)>,
}

fn slice_norm(
    j: &AcsField,
    r: f64,
    order: usize,
    points: &[DVector<f64>],
    tangents: &[(DVector<f64>, DVector<f64>)],
) -> Result<f64> {
    let diff_at = |r: f64, v: &DVector<f64>| -> Result<nalgebra::DMatrix<f64>> {
        let p = ChartPoint::new(r, v.clone(), EndSign::Negative)?;
        Ok(j.eval(&p)? - j.limit_eval(v))
    };
    let move_on_sphere = |v: &DVector<f64>, u: &DVector<f64>, h: f64| {
        let w = v + u * h;
        let n = w.norm();
        w / n
    };
    let mut sup: f64 = 0.0;
    for (v, (u1, u2)) in points.iter().zip(tangents) {
        sup = sup.max(diff_at(r, v)?.norm());
        if order >= 1 {
            let h = FD1_STEP;
            let dr = (diff_at(r + h, v)? - diff_at(r - h, v)?) / (2.0 * h);
            sup = sup.max(dr.norm());
            for u in [u1, u2] {
                let dv = (diff_at(r, &move_on_sphere(v, u, h))?
                    - diff_at(r, &move_on_sphere(v, u, -h))?)
                    / (2.0 * h);
                sup = sup.max(dv.norm());
            }
        }
        if order >= 2 {
            let h = FD2_STEP;
            let mid = diff_at(r, v)?;
            let drr = (diff_at(r + h, v)? + diff_at(r - h, v)? - &mid * 2.0) / (h * h);
            sup = sup.max(drr.norm());
            for u in [u1, u2] {
                let dvv = (diff_at(r, &move_on_sphere(v, u, h))?
                    + diff_at(r, &move_on_sphere(v, u, -h))?
                    - &mid * 2.0)
                    / (h * h);
                sup = sup.max(dvv.norm());
            }
        }
    }
    Ok(sup)
}

/// Estimate the exponential decay of J toward J_{-inf} in C^l, l <= 2, by
/// sampling slice norms at the given depths and fitting log-norm against r.
pub fn acc1_decay_estimate(
    j: &AcsField,
    r_samples: &[f64],
    order: usize,
    n_sphere: usize,
    seed: u64,
) -> Result<DecayFit> {
    if order > 2 {
        return Err(Error::Validation(format!(
            "derivative order {order} > 2 not supported"
        )));
    }
    if r_samples.len() < 2 {
        return Err(Error::Validation("need at least two depth slices".into()));
    }
    let dim = j.model.ambient_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n_sphere);
    let mut tangents = Vec::with_capacity(n_sphere);
    while points.len() < n_sphere {
        let v = DVector::from_fn(dim, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let n = v.norm();
        if n < 1e-3 {
            continue;
        }
        let v = v / n;
        let mut pair = Vec::new();
        while pair.len() < 2 {
            let mut u = DVector::from_fn(dim, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
            u -= &v * v.dot(&u);
            let un = u.norm();
            if un > 1e-3 {
                pair.push(u / un);
            }
        }
        tangents.push((pair.remove(0), pair.remove(0)));
        points.push(v);
    }

    let mut samples = Vec::with_capacity(r_samples.len());
    for &r in r_samples {
        samples.push((r, slice_norm(j, r, order, &points, &tangents)?));
    }

    if samples.iter().all(|&(_, n)| n < CYL_TOL) {
        // exactly cylindrical: any positive rate fits; report benign defaults
        return Ok(DecayFit {
            c: 1e-6,
            delta: 1.0,
            exactly_cylindrical: true,
            decaying: true,
            samples,
        });
    }

    let fit: Vec<(f64, f64)> = samples
        .iter()
        .filter(|&&(r, n)| r <= FIT_DEPTH && n > 1e-300)
        .cloned()
        .collect();
    if fit.len() < 2 {
        return Err(Error::Validation(
            "too few usable slices deeper than r = -2 for the decay fit".into(),
        ));
    }
    let xs: Vec<f64> = fit.iter().map(|&(r, _)| r).collect();
    let ys: Vec<f64> = fit.iter().map(|&(_, n)| n.ln()).collect();
    let (slope, intercept) = line_fit(&xs, &ys);
    Ok(DecayFit {
        c: intercept.exp(),
        delta: slope,
        exactly_cylindrical: false,
        decaying: slope > 0.0,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{pushforward_acs, standard_cylindrical_acs, Diffeo, EndModel};

    fn model() -> EndModel {
        EndModel::negative(2, 1.0).unwrap()
    }

    const DEPTHS: [f64; 5] = [-2.0, -3.0, -4.0, -5.0, -6.0];

    #[test]
    fn standard_is_exactly_cylindrical() {
        let j = standard_cylindrical_acs(&model());
        let fit = acc1_decay_estimate(&j, &DEPTHS, 2, 16, 7).unwrap();
        assert!(fit.exactly_cylindrical);
        assert!(fit.decaying);
    }

    #[test]
    fn quadratic_pushforward_rate_near_one() {
        let j = pushforward_acs(Diffeo::quadratic(0.4), &model()).unwrap();
        let fit = acc1_decay_estimate(&j, &DEPTHS, 0, 24, 11).unwrap();
        assert!(!fit.exactly_cylindrical);
        assert!(fit.decaying);
        assert!((fit.delta - 1.0).abs() < 0.1, "delta = {}", fit.delta);
    }

    #[test]
    fn cubic_pushforward_rate_near_two() {
        let j = pushforward_acs(Diffeo::cubic(0.3), &model()).unwrap();
        let fit = acc1_decay_estimate(&j, &DEPTHS, 0, 24, 13).unwrap();
        assert!((fit.delta - 2.0).abs() < 0.1, "delta = {}", fit.delta);
    }

    #[test]
    fn decay_persists_through_second_derivatives() {
        let j = pushforward_acs(Diffeo::quadratic(0.5), &model()).unwrap();
        let fit = acc1_decay_estimate(&j, &DEPTHS, 2, 12, 17).unwrap();
        assert!(fit.decaying);
        assert!(fit.delta > 0.5);
    }
}
