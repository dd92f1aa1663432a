//! Almost complex structures on the end, as evaluatable fields of linear maps
//! in the ambient representation of end tangent vectors.

use super::{ChartPoint, EndModel};
use crate::error::{Error, Result};
use crate::linalg::{complex_to_real, real_to_complex, std_j_matrix};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::sync::Arc;

/// Built-in diffeomorphisms of C^N fixing the origin with dPhi(0) = Id.
///
/// The perturbations act on the conjugate of the first coordinate: a
/// holomorphic perturbation would commute with i and leave the pushforward
/// structure standard, so the nontrivial test generators are anti-holomorphic.
#[derive(Debug, Clone)]
pub enum Diffeo {
    Identity,
    /// w -> w + beta * (conj(w_1)^degree, 0, ..., 0), degree >= 2.
    ConjPower { degree: u32, beta: f64 },
    /// Left-to-right composition of perturbations.
    Chain(Vec<Diffeo>),
}

impl Diffeo {
    pub fn quadratic(beta: f64) -> Self {
        Diffeo::ConjPower { degree: 2, beta }
    }

    pub fn cubic(beta: f64) -> Self {
        Diffeo::ConjPower { degree: 3, beta }
    }

    pub fn apply(&self, w: &[Complex64]) -> Vec<Complex64> {
        match self {
            Diffeo::Identity => w.to_vec(),
            Diffeo::ConjPower { degree, beta } => {
                let mut out = w.to_vec();
                out[0] += beta * w[0].conj().powu(*degree);
                out
            }
            Diffeo::Chain(parts) => {
                let mut cur = w.to_vec();
                for p in parts {
                    cur = p.apply(&cur);
                }
                cur
            }
        }
    }

    /// Real 2N x 2N differential at w, in interleaved coordinates.
    pub fn real_differential(&self, w: &[Complex64]) -> DMatrix<f64> {
        let dim = 2 * w.len();
        match self {
            Diffeo::Identity => DMatrix::identity(dim, dim),
            Diffeo::ConjPower { degree, beta } => {
                // dPhi_1 [h] = h_1 + c * conj(h_1), c = beta * degree * conj(w_1)^(degree-1)
                let c = beta * (*degree as f64) * w[0].conj().powu(*degree - 1);
                let mut m = DMatrix::identity(dim, dim);
                m[(0, 0)] += c.re;
                m[(0, 1)] += c.im;
                m[(1, 0)] += c.im;
                m[(1, 1)] -= c.re;
                m
            }
            Diffeo::Chain(parts) => {
                let mut cur = w.to_vec();
                let mut m = DMatrix::identity(dim, dim);
                for p in parts {
                    m = p.real_differential(&cur) * m;
                    cur = p.apply(&cur);
                }
                m
            }
        }
    }

    /// Newton inversion of Phi; the perturbations are contractions on the
    /// sampled region, so a handful of iterations reach 1e-14.
    pub fn inverse(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut w = z.to_vec();
        for _ in 0..50 {
            let fw = self.apply(&w);
            let res: Vec<Complex64> = fw.iter().zip(z).map(|(a, b)| a - b).collect();
            let rnorm = crate::linalg::norm_c(&res);
            if rnorm < 1e-14 {
                return Ok(w);
            }
            let d = self.real_differential(&w);
            let lu = d.lu();
            let step = lu
                .solve(&complex_to_real(&res))
                .ok_or_else(|| Error::InvalidDiffeomorphism("singular differential".into()))?;
            let step_c = real_to_complex(&step);
            for (wk, sk) in w.iter_mut().zip(&step_c) {
                *wk -= sk;
            }
        }
        Err(Error::InvalidDiffeomorphism(
            "Newton inversion did not converge".into(),
        ))
    }
}

#[derive(Clone)]
pub enum AcsKind {
    /// Pushforward of i under the cylinder chart alone; translation invariant.
    Standard,
    /// (psi . Phi)_* i for a built-in diffeomorphism Phi.
    Pushforward(Diffeo),
    /// Arbitrary evaluators (field and translation-invariant limit).
    Custom {
        eval: Arc<dyn Fn(&ChartPoint) -> DMatrix<f64> + Send + Sync>,
        limit: Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>,
    },
}

/// An almost complex structure J on the end, with its translation-invariant
/// limit and (optionally) fitted decay constants per derivative order.
#[derive(Clone)]
pub struct AcsField {
    pub model: EndModel,
    pub kind: AcsKind,
    /// Fitted (order, C_l, delta_l) triples, empty before estimation.
    pub decay_constants: Vec<(usize, f64, f64)>,
}

impl AcsField {
    /// J at p as a matrix on ambient-representation tangent vectors.
    pub fn eval(&self, p: &ChartPoint) -> Result<DMatrix<f64>> {
        match &self.kind {
            AcsKind::Standard => Ok(std_j_matrix(self.model.n)),
            AcsKind::Pushforward(phi) => {
                // J(z) = dPhi(w) i dPhi(w)^{-1} at w = Phi^{-1}(z); the chart
                // conjugation cancels in the ambient representation.
                let scale = self.model.epsilon * p.r.exp();
                let z = real_to_complex(&(&p.v * scale));
                let w = phi.inverse(&z)?;
                let d = phi.real_differential(&w);
                let lu = d.clone().lu();
                let inv = lu
                    .try_inverse()
                    .ok_or_else(|| Error::InvalidDiffeomorphism("singular differential".into()))?;
                Ok(d * std_j_matrix(self.model.n) * inv)
            }
            AcsKind::Custom { eval, .. } => Ok(eval(p)),
        }
    }

    /// The translation-invariant limit J_{-inf} at the sphere point v.
    pub fn limit_eval(&self, v: &DVector<f64>) -> DMatrix<f64> {
        match &self.kind {
            AcsKind::Standard | AcsKind::Pushforward(_) => std_j_matrix(self.model.n),
            AcsKind::Custom { limit, .. } => limit(v),
        }
    }

    pub fn is_pushforward(&self) -> bool {
        matches!(self.kind, AcsKind::Pushforward(_))
    }

    pub fn with_decay(mut self, constants: Vec<(usize, f64, f64)>) -> Self {
        self.decay_constants = constants;
        self
    }
}

/// The pushforward of the standard complex structure under the chart alone.
pub fn standard_cylindrical_acs(model: &EndModel) -> AcsField {
    AcsField {
        model: model.clone(),
        kind: AcsKind::Standard,
        decay_constants: Vec::new(),
    }
}

/// The pushforward (psi . Phi)_* i; validates Phi at the origin and samples
/// the differential for nonsingularity.
pub fn pushforward_acs(phi: Diffeo, model: &EndModel) -> Result<AcsField> {
    let origin = vec![Complex64::new(0.0, 0.0); model.n];
    let at0 = phi.apply(&origin);
    if crate::linalg::norm_c(&at0) > 1e-12 {
        return Err(Error::InvalidDiffeomorphism("Phi(0) != 0".into()));
    }
    let d0 = phi.real_differential(&origin);
    if (&d0 - DMatrix::<f64>::identity(2 * model.n, 2 * model.n)).norm() > 1e-12 {
        return Err(Error::InvalidDiffeomorphism("dPhi(0) != Id".into()));
    }
    // Sample differentials on a coarse grid of the ball.
    for k in 0..model.n {
        for sign in [-1.0, 1.0] {
            for frac in [0.25, 0.5, 0.9] {
                let mut w = origin.clone();
                w[k] = Complex64::new(sign * frac * model.epsilon, 0.0);
                let d = phi.real_differential(&w);
                if d.determinant() < 1e-10 {
                    return Err(Error::InvalidDiffeomorphism(format!(
                        "dPhi singular or orientation-reversing near sampled point (coordinate {k})"
                    )));
                }
            }
        }
    }
    Ok(AcsField {
        model: model.clone(),
        kind: AcsKind::Pushforward(phi),
        decay_constants: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::EndSign;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_sphere_point(rng: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
        loop {
            let v = DVector::from_fn(dim, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
            let n = v.norm();
            if n > 1e-3 {
                return v / n;
            }
        }
    }

    fn model() -> EndModel {
        EndModel::negative(2, 1.0).unwrap()
    }

    #[test]
    fn standard_squares_to_minus_id() {
        let m = model();
        let j = standard_cylindrical_acs(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let id = DMatrix::<f64>::identity(4, 4);
        for _ in 0..1000 {
            let v = random_sphere_point(&mut rng, 4);
            let p = ChartPoint::new(-rng.gen::<f64>() * 6.0, v, EndSign::Negative).unwrap();
            let jm = j.eval(&p).unwrap();
            assert!((&jm * &jm + &id).norm() < 1e-12);
        }
    }

    #[test]
    fn standard_is_translation_invariant() {
        let m = model();
        let j = standard_cylindrical_acs(&m);
        let v = DVector::from_vec(vec![0.6, 0.0, 0.8, 0.0]);
        for s in [-5.0, -1.0, -0.1] {
            let a = j
                .eval(&ChartPoint::new(-0.5, v.clone(), EndSign::Negative).unwrap())
                .unwrap();
            let b = j
                .eval(&ChartPoint::new(-0.5 + s, v.clone(), EndSign::Negative).unwrap())
                .unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn standard_radial_image_is_rotation_field() {
        let m = model();
        let j = standard_cylindrical_acs(&m);
        let v = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let p = ChartPoint::new(-1.0, v.clone(), EndSign::Negative).unwrap();
        let r = j.eval(&p).unwrap() * &v;
        let expected = crate::linalg::mul_i(&v);
        assert!((r - expected).norm() < 1e-14);
    }

    #[test]
    fn identity_pushforward_matches_standard() {
        let m = model();
        let j = pushforward_acs(Diffeo::Identity, &m).unwrap();
        let js = standard_cylindrical_acs(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let v = random_sphere_point(&mut rng, 4);
            let p = ChartPoint::new(-rng.gen::<f64>() * 5.0 - 0.1, v, EndSign::Negative).unwrap();
            let a = j.eval(&p).unwrap();
            let b = js.eval(&p).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn pushforward_squares_to_minus_id() {
        let m = model();
        let j = pushforward_acs(Diffeo::quadratic(0.4), &m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let id = DMatrix::<f64>::identity(4, 4);
        for _ in 0..200 {
            let v = random_sphere_point(&mut rng, 4);
            let p = ChartPoint::new(-rng.gen::<f64>() * 7.0 - 1.0, v, EndSign::Negative).unwrap();
            let jm = j.eval(&p).unwrap();
            assert!((&jm * &jm + &id).norm() < 1e-9);
        }
    }

    #[test]
    fn diffeo_inverse_round_trip() {
        let phi = Diffeo::quadratic(0.3);
        let w = vec![Complex64::new(0.2, -0.1), Complex64::new(0.05, 0.3)];
        let z = phi.apply(&w);
        let back = phi.inverse(&z).unwrap();
        for (a, b) in back.iter().zip(&w) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
