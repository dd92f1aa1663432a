//! The cylinder chart psi(z) = (log|z| - log eps, z/|z|) and its inverse.

use super::{ChartPoint, EndModel};
use crate::error::{Error, Result};
use crate::linalg::{complex_to_real, norm_c, real_to_complex};
use num_complex::Complex64;

/// Map a nonzero point of the epsilon-ball to cylinder coordinates.
pub fn chart_to_cylinder(model: &EndModel, z: &[Complex64]) -> Result<ChartPoint> {
    if z.len() != model.n {
        return Err(Error::Validation(format!(
            "expected {} complex coordinates, got {}",
            model.n,
            z.len()
        )));
    }
    let norm = norm_c(z);
    if norm == 0.0 {
        return Err(Error::Domain("the puncture z = 0 is not in the chart".into()));
    }
    if norm > model.epsilon {
        return Err(Error::Domain(format!(
            "|z| = {norm} exceeds the chart radius {}",
            model.epsilon
        )));
    }
    let v = complex_to_real(z) / norm;
    ChartPoint::new(norm.ln() - model.epsilon.ln(), v, model.sign)
}

/// Inverse chart: (r, v) -> eps * e^r * v.
pub fn cylinder_to_chart(model: &EndModel, p: &ChartPoint) -> Vec<Complex64> {
    let scale = model.epsilon * p.r.exp();
    real_to_complex(&(&p.v * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::EndSign;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn model() -> EndModel {
        EndModel::negative(2, 1.0).unwrap()
    }

    #[test]
    fn log_radius_example() {
        // z = (1/e, 0) -> (r = -1, v = (1,0,0,0))
        let p = chart_to_cylinder(
            &model(),
            &[Complex64::new((-1.0f64).exp(), 0.0), Complex64::new(0.0, 0.0)],
        )
        .unwrap();
        assert_abs_diff_eq!(p.r, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.v[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.v[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn direction_example() {
        // z = (0, i/2) -> (r = -log 2, v = (0,0,0,1))
        let p = chart_to_cylinder(
            &model(),
            &[Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.5)],
        )
        .unwrap();
        assert_abs_diff_eq!(p.r, -(2.0f64.ln()), epsilon = 1e-14);
        assert_abs_diff_eq!(p.v[3], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_puncture_and_exterior() {
        let zero = [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        assert!(chart_to_cylinder(&model(), &zero).is_err());
        let far = [Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)];
        assert!(chart_to_cylinder(&model(), &far).is_err());
    }

    #[test]
    fn inverse_example() {
        let p = ChartPoint::new(
            -1.0,
            DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]),
            EndSign::Negative,
        )
        .unwrap();
        let z = cylinder_to_chart(&model(), &p);
        assert_abs_diff_eq!(z[0].re, (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(z[1].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn depth_shrinks_radius() {
        let v = DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]);
        let mut last = f64::INFINITY;
        for k in 1..12 {
            let p = ChartPoint::new(-(k as f64), v.clone(), EndSign::Negative).unwrap();
            let n = norm_c(&cylinder_to_chart(&model(), &p));
            assert!(n < last);
            last = n;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]
        #[test]
        fn round_trip(xs in proptest::collection::vec(-0.4f64..0.4, 4)) {
            let z = [Complex64::new(xs[0], xs[1]), Complex64::new(xs[2], xs[3])];
            prop_assume!(norm_c(&z) > 1e-6);
            let m = model();
            let p = chart_to_cylinder(&m, &z).unwrap();
            let back = cylinder_to_chart(&m, &p);
            for k in 0..2 {
                prop_assert!((back[k] - z[k]).norm() < 1e-12);
            }
        }
    }
}
