//! Limit Reeb field, its flow on the sphere, and orbit actions.

use super::splitting::frame_covectors;
use super::{AcsField, ChartPoint, EndSign, TangentVector};
use crate::error::{Error, Result};
use crate::linalg::KahanSum;
use nalgebra::DVector;
use std::sync::Arc;

/// Absolute tolerance for the adaptive flow integrator.
const FLOW_TOL: f64 = 1e-10;

/// R_{-inf}(v) = J_{-inf}(d/dr); radial component must vanish (ACC3).
pub fn reeb_limit_field(j: &AcsField, v: &DVector<f64>) -> Result<TangentVector> {
    let jm = j.limit_eval(v);
    let r = jm * v;
    let dr = r.dot(v);
    if dr.abs() > 1e-10 {
        return Err(Error::Acc3Violation(format!(
            "limit Reeb field has dr component {dr:.3e}"
        )));
    }
    let base = ChartPoint::new(0.0, v.clone(), EndSign::Negative)?;
    Ok(TangentVector::from_ambient(base, &r))
}

fn field(j: &AcsField, w: &DVector<f64>) -> DVector<f64> {
    let v = w / w.norm();
    let r = j.limit_eval(&v) * &v;
    // drop any residual radial part so the flow stays on the sphere
    let radial = r.dot(&v);
    r - v * radial
}

// Dormand-Prince 5(4) coefficients.
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn rk45<F, P>(f: F, y0: &DVector<f64>, t_end: f64, mut project: P) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
    P: FnMut(&mut DVector<f64>),
{
    let mut y = y0.clone();
    let mut time = 0.0;
    let mut h = (t_end / 16.0).min(0.1).max(1e-6);
    while time < t_end {
        if h < 1e-14 {
            return Err(Error::IntegrationFailure(format!(
                "step size underflow at t = {time}"
            )));
        }
        let h_cur = h.min(t_end - time);
        let mut k: Vec<DVector<f64>> = Vec::with_capacity(7);
        k.push(f(&y));
        for stage in 0..6 {
            let mut ys = y.clone();
            for (i, ki) in k.iter().enumerate() {
                ys += ki * (h_cur * DP_A[stage][i]);
            }
            k.push(f(&ys));
        }
        let mut y5 = y.clone();
        let mut y4 = y.clone();
        for (i, ki) in k.iter().enumerate() {
            y5 += ki * (h_cur * DP_B5[i]);
            y4 += ki * (h_cur * DP_B4[i]);
        }
        let err = (&y5 - &y4).norm();
        if err <= FLOW_TOL {
            project(&mut y5);
            y = y5;
            time += h_cur;
        }
        let scale = if err > 0.0 {
            0.9 * (FLOW_TOL / err).powf(0.2)
        } else {
            2.0
        };
        h = h_cur * scale.clamp(0.2, 5.0);
    }
    Ok(y)
}

/// Integrate the limit Reeb flow for time t with adaptive RK45 and per-step
/// renormalization onto the sphere.
pub fn reeb_flow(j: &AcsField, v: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
    if t == 0.0 {
        return Ok(v.clone());
    }
    let dir = t.signum();
    rk45(
        |w| field(j, w) * dir,
        v,
        t.abs(),
        |y| {
            let n = y.norm();
            *y /= n;
        },
    )
}

/// Flow together with the pushforward of a tangent vector under the
/// linearized flow (variational equation, field Jacobian by centered
/// differences).
pub fn reeb_flow_pushforward(
    j: &AcsField,
    v: &DVector<f64>,
    w: &DVector<f64>,
    t: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let dim = v.len();
    let mut state = DVector::zeros(2 * dim);
    state.rows_mut(0, dim).copy_from(v);
    state.rows_mut(dim, dim).copy_from(w);
    let dir = t.signum();
    let f = |s: &DVector<f64>| {
        let y = s.rows(0, dim).into_owned();
        let u = s.rows(dim, dim).into_owned();
        let fy = field(j, &y);
        let unorm = u.norm().max(1e-30);
        let h = 1e-6;
        let du = (field(j, &(&y + &u * (h / unorm))) - field(j, &(&y - &u * (h / unorm))))
            * (unorm / (2.0 * h));
        let mut out = DVector::zeros(2 * dim);
        out.rows_mut(0, dim).copy_from(&(fy * dir));
        out.rows_mut(dim, dim).copy_from(&(du * dir));
        out
    };
    let end = rk45(f, &state, t.abs(), |s| {
        let n = s.rows(0, dim).norm();
        for i in 0..dim {
            s[i] /= n;
        }
    })?;
    Ok((
        end.rows(0, dim).into_owned(),
        end.rows(dim, dim).into_owned(),
    ))
}

/// First return time of the limit Reeb flow to the start point.
pub fn detect_simple_period(j: &AcsField, v: &DVector<f64>) -> Result<f64> {
    let dist = |t: f64| -> Result<f64> { Ok((reeb_flow(j, v, t)? - v).norm()) };
    // bracket the first close return with an incremental march
    let dt = 0.05;
    let mut y = v.clone();
    let mut prev2 = f64::INFINITY;
    let mut prev = f64::INFINITY;
    let mut bracket = None;
    for i in 1..2001 {
        y = reeb_flow(j, &y, dt)?;
        let d = (&y - v).norm();
        let t = i as f64 * dt;
        if t > 2.0 * dt && prev < prev2 && prev < d && prev < 0.2 {
            bracket = Some(t - dt);
            break;
        }
        prev2 = prev;
        prev = d;
    }
    let t0 = bracket
        .ok_or_else(|| Error::NotConverged("no close return of the Reeb flow found".into()))?;
    // golden-section refinement of the distance minimum
    let (mut a, mut b) = (t0 - dt, t0 + dt);
    let gold = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - gold * (b - a);
    let mut d = a + gold * (b - a);
    let mut fc = dist(c)?;
    let mut fd = dist(d)?;
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gold * (b - a);
            fc = dist(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gold * (b - a);
            fd = dist(d)?;
        }
        if b - a < 1e-12 {
            break;
        }
    }
    let period = 0.5 * (a + b);
    let residual = dist(period)?;
    if residual > 1e-9 {
        return Err(Error::NotConverged(format!(
            "flow does not close at the detected period (residual {residual:.3e})"
        )));
    }
    Ok(period)
}

/// A closed trajectory of the limit Reeb field.
#[derive(Clone)]
pub struct ReebOrbit {
    /// Period T > 0 of the (possibly multiply covered) loop.
    pub period: f64,
    /// Covering degree over the simple orbit.
    pub multiplicity: u32,
    /// Parametrization on R / period.
    pub loop_fn: Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>,
    /// Integral of lambda_{-inf} along the loop.
    pub action: f64,
}

impl ReebOrbit {
    /// Closure and integral-curve checks from the type's invariants.
    pub fn validate(&self, j: &AcsField) -> Result<()> {
        let start = (self.loop_fn)(0.0);
        let end = (self.loop_fn)(self.period);
        if (&start - &end).norm() > 1e-9 {
            return Err(Error::NotClosed(format!(
                "loop(0) vs loop(T) differ by {:.3e}",
                (&start - &end).norm()
            )));
        }
        let h = self.period * 1e-7;
        for i in 0..16 {
            let t = self.period * (i as f64 + 0.3) / 16.0;
            let fd = ((self.loop_fn)(t + h) - (self.loop_fn)(t - h)) / (2.0 * h);
            let v = (self.loop_fn)(t);
            let r = reeb_limit_field(j, &(&v / v.norm()))?.ambient();
            if (fd - r).norm() > 1e-6 {
                return Err(Error::Validation(
                    "loop is not an integral curve of the limit Reeb field".into(),
                ));
            }
        }
        Ok(())
    }
}

fn loop_action_with(
    orbit: &ReebOrbit,
    covector_at: impl Fn(&DVector<f64>) -> DVector<f64>,
) -> Result<f64> {
    let t_total = orbit.period;
    let start = (orbit.loop_fn)(0.0);
    let end = (orbit.loop_fn)(t_total);
    if (&start - &end).norm() > 1e-9 {
        return Err(Error::NotClosed(format!(
            "open loop (gap {:.3e})",
            (&start - &end).norm()
        )));
    }
    if t_total == 0.0 {
        return Ok(0.0);
    }
    let n = 2048;
    let h = t_total * 1e-6;
    let mut sum = KahanSum::default();
    for i in 0..n {
        let t = t_total * (i as f64 + 0.5) / n as f64;
        let gamma = (orbit.loop_fn)(t);
        let vel = ((orbit.loop_fn)(t + h) - (orbit.loop_fn)(t - h)) / (2.0 * h);
        let v = &gamma / gamma.norm();
        sum.add(covector_at(&v).dot(&vel));
    }
    Ok(sum.value() * t_total / n as f64)
}

/// Orbit action under the operative normalization lambda(R) = 1; equals the
/// period for a genuine Reeb trajectory.
pub fn orbit_action(orbit: &ReebOrbit, j: &AcsField) -> Result<f64> {
    loop_action_with(orbit, |v| {
        let (lambda, _, _, _) = frame_covectors(&j.limit_eval(v), v);
        lambda
    })
}

/// Diagnostic action under lambda_st = (1/2) sum (x dy - y dx): half the
/// operative value on the round sphere.
pub fn orbit_action_lambda_st(orbit: &ReebOrbit) -> Result<f64> {
    loop_action_with(orbit, |v| crate::linalg::mul_i(v) * 0.5)
}

/// Degenerate single-point loop, used for edge-case tests.
pub fn constant_orbit(v: DVector<f64>) -> ReebOrbit {
    ReebOrbit {
        period: 0.0,
        multiplicity: 1,
        loop_fn: Arc::new(move |_| v.clone()),
        action: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{pushforward_acs, standard_cylindrical_acs, Diffeo, EndModel};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn sphere(rng: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
        let v = DVector::from_fn(dim, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let n = v.norm();
        if n < 1e-3 {
            return sphere(rng, dim);
        }
        v / n
    }

    fn model() -> EndModel {
        EndModel::negative(2, 1.0).unwrap()
    }

    fn hopf_orbit(k: u32) -> ReebOrbit {
        let period = 2.0 * PI * k as f64;
        ReebOrbit {
            period,
            multiplicity: k,
            loop_fn: Arc::new(|t| DVector::from_vec(vec![t.cos(), t.sin(), 0.0, 0.0])),
            action: period,
        }
    }

    #[test]
    fn limit_field_rotation_direction() {
        let j = standard_cylindrical_acs(&model());
        let v = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let r = reeb_limit_field(&j, &v).unwrap();
        assert!(r.dr_component.abs() < 1e-14);
        assert!(
            (r.sphere_component.clone() - DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0])).norm()
                < 1e-14
        );
    }

    #[test]
    fn limit_field_no_radial_part() {
        let j = standard_cylindrical_acs(&model());
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let v = sphere(&mut rng, 4);
            let r = reeb_limit_field(&j, &v).unwrap();
            assert!(r.dr_component.abs() < 1e-12);
        }
    }

    #[test]
    fn pushforward_limit_matches_standard() {
        let m = model();
        let jq = pushforward_acs(Diffeo::quadratic(0.5), &m).unwrap();
        let js = standard_cylindrical_acs(&m);
        let v = DVector::from_vec(vec![0.0, 0.6, 0.8, 0.0]);
        let a = reeb_limit_field(&jq, &v).unwrap().ambient();
        let b = reeb_limit_field(&js, &v).unwrap().ambient();
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn flow_identity_at_zero() {
        let j = standard_cylindrical_acs(&model());
        let v = DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(reeb_flow(&j, &v, 0.0).unwrap(), v);
    }

    #[test]
    fn flow_matches_complex_rotation() {
        let j = standard_cylindrical_acs(&model());
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let v = sphere(&mut rng, 4);
            let t = rng.gen::<f64>() * 4.0;
            let got = reeb_flow(&j, &v, t).unwrap();
            // closed form e^{it} v in each complex coordinate
            let z = crate::linalg::real_to_complex(&v);
            let rot = num_complex::Complex64::from_polar(1.0, t);
            let expect =
                crate::linalg::complex_to_real(&z.iter().map(|c| c * rot).collect::<Vec<_>>());
            assert!((got - expect).norm() < 1e-9);
        }
    }

    #[test]
    fn simple_period_is_two_pi() {
        let j = standard_cylindrical_acs(&model());
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            let v = sphere(&mut rng, 4);
            let t = detect_simple_period(&j, &v).unwrap();
            assert!((t - 2.0 * PI).abs() < 1e-8, "period {t}");
        }
    }

    #[test]
    fn morse_bott_period_constancy() {
        let j = standard_cylindrical_acs(&model());
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut periods = Vec::new();
        for _ in 0..100 {
            let v = sphere(&mut rng, 4);
            periods.push(detect_simple_period(&j, &v).unwrap());
        }
        let minmax = periods
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
                (lo.min(p), hi.max(p))
            });
        assert!(minmax.1 - minmax.0 < 1e-8);
    }

    #[test]
    fn flow_preserves_lambda_inf() {
        let j = standard_cylindrical_acs(&model());
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..20 {
            let v = sphere(&mut rng, 4);
            let mut w = DVector::from_fn(4, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
            w -= &v * v.dot(&w);
            let t = 0.3 + rng.gen::<f64>() * 3.0;
            let lam = |p: &DVector<f64>, x: &DVector<f64>| crate::linalg::mul_i(p).dot(x);
            let before = lam(&v, &w);
            let (end, pushed) = reeb_flow_pushforward(&j, &v, &w, t).unwrap();
            let after = lam(&end, &pushed);
            assert!((after - before).abs() < 1e-8, "drift {}", after - before);
        }
    }

    #[test]
    fn hopf_action_equals_period() {
        let j = standard_cylindrical_acs(&model());
        let orbit = hopf_orbit(1);
        orbit.validate(&j).unwrap();
        let a = orbit_action(&orbit, &j).unwrap();
        assert!((a - 2.0 * PI).abs() < 1e-8);
        // lambda_st convention differs by the factor 2
        let a_st = orbit_action_lambda_st(&orbit).unwrap();
        assert!((a / a_st - 2.0).abs() < 1e-8);
    }

    #[test]
    fn multiple_cover_action_scales() {
        let j = standard_cylindrical_acs(&model());
        for k in [2u32, 3, 5] {
            let a = orbit_action(&hopf_orbit(k), &j).unwrap();
            assert!((a - 2.0 * PI * k as f64).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_loop_has_zero_action() {
        let j = standard_cylindrical_acs(&model());
        let orbit = constant_orbit(DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]));
        assert_eq!(orbit_action(&orbit, &j).unwrap(), 0.0);
    }
}
