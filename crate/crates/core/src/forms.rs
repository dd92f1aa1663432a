//! Differential forms on the end: the limit contact form and its exterior
//! derivative, the compatible two-form built from the limit, pullback
//! densities along curves, and sampled positivity constants.

use crate::curves::CylinderCurve;
use crate::error::{Error, Result};
use crate::geometry::{acc1_decay_estimate, AcsField, ChartPoint, EndModel, EndSign};
use crate::linalg::{mul_i, omega_st};
use nalgebra::DVector;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Base step of the finite-difference exterior derivative, relative to |z|.
const FD_EXT_STEP: f64 = 1e-5;

type One = Arc<dyn Fn(&ChartPoint, &DVector<f64>) -> f64 + Send + Sync>;
type Two = Arc<dyn Fn(&ChartPoint, &DVector<f64>, &DVector<f64>) -> f64 + Send + Sync>;

/// A 1-form on the end, evaluated on ambient-representation tangent vectors.
#[derive(Clone)]
pub struct OneForm {
    pub name: &'static str,
    eval: One,
}

impl OneForm {
    pub fn new(name: &'static str, eval: One) -> Self {
        OneForm { name, eval }
    }

    pub fn eval_ambient(&self, p: &ChartPoint, zeta: &DVector<f64>) -> f64 {
        (self.eval)(p, zeta)
    }

    pub fn eval(&self, v: &crate::geometry::TangentVector) -> f64 {
        (self.eval)(&v.base, &v.ambient())
    }
}

/// A 2-form on the end, same representation convention.
#[derive(Clone)]
pub struct TwoForm {
    pub name: &'static str,
    eval: Two,
}

impl TwoForm {
    pub fn new(name: &'static str, eval: Two) -> Self {
        TwoForm { name, eval }
    }

    pub fn eval_ambient(&self, p: &ChartPoint, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (self.eval)(p, x, y)
    }
}

/// lambda_{-inf}: the covector of the limit splitting, lambda(zeta) =
/// (i v) . zeta on the standard limit.
pub fn lambda_inf_form(_model: &EndModel) -> OneForm {
    OneForm::new("lambda_inf", Arc::new(|p, zeta| mul_i(&p.v).dot(zeta)))
}

/// dr as a 1-form: the radial covector sigma_{-inf}(zeta) = v . zeta.
pub fn dr_form(_model: &EndModel) -> OneForm {
    OneForm::new("dr", Arc::new(|p, zeta| p.v.dot(zeta)))
}

fn d_lambda_inf_value(p: &ChartPoint, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let sx = p.v.dot(x);
    let sy = p.v.dot(y);
    let iv = mul_i(&p.v);
    let lx = iv.dot(x);
    let ly = iv.dot(y);
    2.0 * (omega_st(x, y) - (sx * ly - sy * lx))
}

/// d lambda_{-inf} in closed form: pulling the chart back to the punctured
/// ball gives lambda = (x dy - y dx)/|z|^2, whose differential reads
/// 2(omega_st - dr ^ lambda) on ambient representatives.
pub fn d_lambda_inf_form(_model: &EndModel) -> TwoForm {
    TwoForm::new("d_lambda_inf", Arc::new(d_lambda_inf_value))
}

/// The limit symplectic structure of the end; the end is of contact type, so
/// omega_{-inf} = d lambda_{-inf}.
pub fn omega_inf_form(model: &EndModel) -> TwoForm {
    let d = d_lambda_inf_form(model);
    TwoForm::new("omega_inf", Arc::new(move |p, x, y| d.eval_ambient(p, x, y)))
}

/// dr ^ lambda_{-inf}.
pub fn dr_wedge_lambda_inf_form(_model: &EndModel) -> TwoForm {
    TwoForm::new(
        "dr_wedge_lambda_inf",
        Arc::new(|p, x, y| {
            let iv = mul_i(&p.v);
            p.v.dot(x) * iv.dot(y) - p.v.dot(y) * iv.dot(x)
        }),
    )
}

/// The ambient symplectic form omega_st seen through the chart: scales by
/// epsilon^2 e^{2r} on ambient representatives.
pub fn omega_prime_form(model: &EndModel) -> TwoForm {
    let eps2 = model.epsilon * model.epsilon;
    TwoForm::new(
        "omega_prime",
        Arc::new(move |p, x, y| eps2 * (2.0 * p.r).exp() * omega_st(x, y)),
    )
}

/// sigma ^ lambda of the pointwise frame of J (eq-style covectors of the
/// actual structure, not its limit). Panics if J cannot be evaluated.
pub fn sigma_lambda_form(j: &AcsField) -> TwoForm {
    let j = j.clone();
    TwoForm::new(
        "sigma_wedge_lambda",
        Arc::new(move |p, x, y| {
            let jm = j.eval(p).expect("J evaluation inside sigma^lambda");
            let (lambda, sigma, _, _) = crate::geometry::splitting::frame_covectors(&jm, &p.v);
            sigma.dot(x) * lambda.dot(y) - sigma.dot(y) * lambda.dot(x)
        }),
    )
}

/// The compatible form omega(x,y) = [omega_inf(pi x, pi y) +
/// omega_inf(J pi x, J pi y)] / 2, built from the frame of J at p.
pub fn omega_from_limit(
    j: &AcsField,
    omega_inf: &TwoForm,
    p: &ChartPoint,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<f64> {
    let jm = j.eval(p)?;
    let (lambda, sigma, reeb, _) = crate::geometry::splitting::frame_covectors(&jm, &p.v);
    let project = |zeta: &DVector<f64>| -> DVector<f64> {
        zeta - &p.v * sigma.dot(zeta) - &reeb * lambda.dot(zeta)
    };
    let px = project(x);
    let py = project(y);
    let jpx = &jm * &px;
    let jpy = &jm * &py;
    Ok(0.5 * (omega_inf.eval_ambient(p, &px, &py) + omega_inf.eval_ambient(p, &jpx, &jpy)))
}

/// omega_from_limit packaged as a TwoForm. Panics on evaluation failure.
pub fn omega_form(j: &AcsField, omega_inf: &TwoForm) -> TwoForm {
    let j = j.clone();
    let oi = omega_inf.clone();
    TwoForm::new(
        "omega",
        Arc::new(move |p, x, y| {
            omega_from_limit(&j, &oi, p, x, y).expect("J evaluation inside omega")
        }),
    )
}

/// Exterior derivative of a 1-form by centered differences through the chart
/// (step 1e-5 relative, one Richardson refinement).
pub fn fd_exterior_derivative(form: &OneForm, model: &EndModel) -> TwoForm {
    let form = form.clone();
    let eps = model.epsilon;
    TwoForm::new(
        "fd_exterior_derivative",
        Arc::new(move |p, zeta1, zeta2| {
            let scale = eps * p.r.exp();
            let z0 = &p.v * scale;
            let h1 = zeta1 * scale;
            let h2 = zeta2 * scale;
            // pulled-back 1-form on the punctured ball
            let alpha = |z: &DVector<f64>, h: &DVector<f64>| -> f64 {
                let n = z.norm();
                let q = ChartPoint::new(n.ln() - eps.ln(), z / n, EndSign::Negative)
                    .expect("chart point inside FD stencil");
                form.eval_ambient(&q, &(h / n))
            };
            let directional = |along: &DVector<f64>, arg: &DVector<f64>, step: f64| -> f64 {
                let norm = along.norm().max(1e-300);
                let d = along * (step / norm);
                (alpha(&(&z0 + &d), arg) - alpha(&(&z0 - &d), arg)) / (2.0 * step) * norm
            };
            let curl = |step: f64| -> f64 {
                directional(&h1, &h2, step) - directional(&h2, &h1, step)
            };
            let base = FD_EXT_STEP * scale;
            (4.0 * curl(base / 2.0) - curl(base)) / 3.0
        }),
    )
}

/// Delta(zeta_s, zeta_t) along the cylinder curve at (s, t).
pub fn pullback_density(curve: &CylinderCurve, delta: &TwoForm, s: f64, t: f64) -> Result<f64> {
    let p = curve.chart_point(s, t)?;
    let (zs, zt) = curve.tangents(s, t);
    Ok(delta.eval_ambient(&p, &zs, &zt))
}

/// Seeded Monte-Carlo infimum of Delta(x, Jx) over unit x at points with
/// r <= -depth, with local descent from the worst samples.
pub fn j_positivity_infimum(
    delta: &TwoForm,
    j: &AcsField,
    depth: f64,
    n: usize,
    seed: u64,
) -> f64 {
    let dim = j.model.ambient_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = |rng: &mut ChaCha8Rng| -> DVector<f64> {
        loop {
            let v = DVector::from_fn(dim, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
            let norm = v.norm();
            if norm > 1e-3 {
                return v / norm;
            }
        }
    };
    let value = |r: f64, v: &DVector<f64>, x: &DVector<f64>| -> Option<f64> {
        let p = ChartPoint::new(r, v.clone(), EndSign::Negative).ok()?;
        let jm = j.eval(&p).ok()?;
        Some(delta.eval_ambient(&p, x, &(jm * x)))
    };
    let mut worst: Vec<(f64, f64, DVector<f64>, DVector<f64>)> = Vec::new();
    let mut inf = f64::INFINITY;
    for _ in 0..n {
        let r = -depth - 4.0 * rng.gen::<f64>();
        let v = unit(&mut rng);
        let x = unit(&mut rng);
        if let Some(val) = value(r, &v, &x) {
            inf = inf.min(val);
            worst.push((val, r, v, x));
            worst.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            worst.truncate(10);
        }
    }
    // local descent from the worst samples
    for (mut val, mut r, mut v, mut x) in worst {
        let mut scale = 0.1;
        for _ in 0..200 {
            let r2 = (r + scale * (rng.gen::<f64>() * 2.0 - 1.0)).min(-depth);
            let mut v2 = &v + unit(&mut rng) * scale;
            v2 /= v2.norm();
            let mut x2 = &x + unit(&mut rng) * scale;
            x2 /= x2.norm();
            if let Some(val2) = value(r2, &v2, &x2) {
                if val2 < val {
                    val = val2;
                    r = r2;
                    v = v2;
                    x = x2;
                }
            }
            scale *= 0.97;
        }
        inf = inf.min(val);
    }
    inf
}

/// Sampled constants realizing the comparison inequalities between the end
/// forms on J-complex planes, with provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositivityConstants {
    pub c1: f64,
    pub kappa1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub depth: f64,
    pub seed: u64,
}

/// Estimate (C1, kappa1) from the decay fit and (C2, C3, C4) by sampled
/// ratio maximization with a 1.1 safety factor.
///
/// C2 makes four inequalities hold on J-complex planes at r <= -R, with
/// f(r) = C1 e^{k1 r} / (1 + C1 e^{k1 r}):
///   omega        <= C2 (d lambda_inf + f dr^lambda_inf)
///   sigma^lambda <= C2 (dr^lambda_inf + f d lambda_inf)
///   |dr^lambda_inf| <= C2 (e^{k1 r} omega + sigma^lambda)
///   |d lambda_inf|  <= C2 (omega + e^{k1 r} sigma^lambda)
/// C3 dominates |d(tau lambda_inf)|, omega and sigma^lambda by omega' on the
/// band [-2R, -R] with tau(r) = (R + r)/(-R); C4 = 8 C3 (C2 + 1) closes the
/// chain from the boundary and interior estimates.
pub fn estimate_constants(j: &AcsField, depth: f64, seed: u64) -> Result<PositivityConstants> {
    let model = &j.model;
    let dim = model.ambient_dim();
    let depths: Vec<f64> = (0..5).map(|i| -depth - i as f64).collect();
    let fit = acc1_decay_estimate(j, &depths, 1, 16, seed)?;
    let (c1, kappa1) = if fit.exactly_cylindrical {
        (1e-6, 1.0)
    } else if fit.decaying {
        (1.1 * fit.c, fit.delta)
    } else {
        return Err(Error::NoTailBound(
            "J does not decay toward its limit; no usable C1, kappa1".into(),
        ));
    };

    let d_lambda = d_lambda_inf_form(model);
    let dr_lambda = dr_wedge_lambda_inf_form(model);
    let sl = sigma_lambda_form(j);
    let omega = omega_form(j, &omega_inf_form(model));
    let omega_prime = omega_prime_form(model);

    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let unit = |rng: &mut ChaCha8Rng| -> DVector<f64> {
        loop {
            let v = DVector::from_fn(dim, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
            let norm = v.norm();
            if norm > 1e-3 {
                return v / norm;
            }
        }
    };
    let ratio = |lhs: f64, rhs: f64, tag: &str| -> Result<f64> {
        if rhs > 0.0 {
            Ok(lhs / rhs)
        } else if lhs <= 1e-12 {
            Ok(0.0)
        } else {
            Err(Error::RegionTooShallow(format!(
                "comparison {tag} has nonpositive right side at the chosen depth"
            )))
        }
    };

    let mut c2: f64 = 1.0;
    for _ in 0..20_000 {
        let r = -depth - 4.0 * rng.gen::<f64>();
        let v = unit(&mut rng);
        let x = unit(&mut rng);
        let p = ChartPoint::new(r, v, EndSign::Negative)?;
        let jx = j.eval(&p)? * &x;
        let om = omega.eval_ambient(&p, &x, &jx);
        let slv = sl.eval_ambient(&p, &x, &jx);
        let dl = d_lambda.eval_ambient(&p, &x, &jx);
        let drl = dr_lambda.eval_ambient(&p, &x, &jx);
        let f = c1 * (kappa1 * r).exp() / (1.0 + c1 * (kappa1 * r).exp());
        let e = (kappa1 * r).exp();
        c2 = c2
            .max(ratio(om, dl + f * drl, "omega")?)
            .max(ratio(slv, drl + f * dl, "sigma^lambda")?)
            .max(ratio(drl.abs(), e * om + slv, "dr^lambda_inf")?)
            .max(ratio(dl.abs(), om + e * slv, "d lambda_inf")?);
    }
    let c2 = (1.1 * c2).max(1.0);

    let mut c3: f64 = 0.0;
    for _ in 0..4_000 {
        let r = -depth - depth * rng.gen::<f64>();
        let v = unit(&mut rng);
        let x = unit(&mut rng);
        let p = ChartPoint::new(r, v, EndSign::Negative)?;
        let jx = j.eval(&p)? * &x;
        let wp = omega_prime.eval_ambient(&p, &x, &jx);
        if wp <= 0.0 {
            return Err(Error::RegionTooShallow(
                "omega' nonpositive on a sampled J-complex plane".into(),
            ));
        }
        let tau = (depth + r) / -depth;
        let d_tau_lambda = (1.0 / depth) * dr_lambda.eval_ambient(&p, &x, &jx).abs()
            + tau.abs() * d_lambda.eval_ambient(&p, &x, &jx).abs();
        let lhs = d_tau_lambda
            .max(omega.eval_ambient(&p, &x, &jx))
            .max(sl.eval_ambient(&p, &x, &jx));
        c3 = c3.max(lhs / wp);
    }
    let c3 = 1.1 * c3;
    let c4 = 1.1 * 8.0 * c3 * (c2 + 1.0);

    Ok(PositivityConstants {
        c1,
        kappa1,
        c2,
        c3,
        c4,
        depth,
        seed,
    })
}
