//! Per-point frame (d/dr, R, xi) with the covectors lambda, sigma and the
//! projector onto xi.

use super::{AcsField, ChartPoint, TangentVector};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Relative singular-value cutoff for the rank-revealing extraction of xi.
const XI_SVD_CUTOFF: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct FrameSplitting {
    pub base: ChartPoint,
    /// R = J(d/dr).
    pub reeb: TangentVector,
    /// Basis of xi in the ambient representation (2N - 2 vectors).
    pub xi_basis: Vec<DVector<f64>>,
    /// Covector with lambda(xi) = 0, lambda(d/dr) = 0, lambda(R) = 1.
    pub lambda: DVector<f64>,
    /// Covector with sigma(xi) = 0, sigma(d/dr) = 1, sigma(R) = 0.
    pub sigma: DVector<f64>,
    /// Projection onto xi along R(d/dr) + R(R).
    pub pi_xi: DMatrix<f64>,
}

impl FrameSplitting {
    pub fn lambda_of(&self, zeta: &DVector<f64>) -> f64 {
        self.lambda.dot(zeta)
    }

    pub fn sigma_of(&self, zeta: &DVector<f64>) -> f64 {
        self.sigma.dot(zeta)
    }

    pub fn project_xi(&self, zeta: &DVector<f64>) -> DVector<f64> {
        &self.pi_xi * zeta
    }
}

/// The covectors lambda, sigma and the Reeb vector from a single J evaluation.
///
/// The annihilator of xi is spanned by dr and dr . J, so with g = dr(R) the
/// defining relations reduce to a 2 x 2 solve:
///   lambda = (g dr - dr . J) / (1 + g^2),  sigma = (dr + g dr . J) / (1 + g^2).
pub(crate) fn frame_covectors(
    jmat: &DMatrix<f64>,
    v: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>, DVector<f64>, f64) {
    let reeb = jmat * v;
    let g = reeb.dot(v);
    let jt_v = jmat.transpose() * v;
    let denom = 1.0 + g * g;
    let lambda = (v * g - &jt_v) / denom;
    let sigma = (v + &jt_v * g) / denom;
    (lambda, sigma, reeb, g)
}

/// Compute the splitting T W = R(d/dr) + R(R) + xi at p.
pub fn splitting_at(j: &AcsField, p: &ChartPoint) -> Result<FrameSplitting> {
    let dim = j.model.ambient_dim();
    let jmat = j.eval(p)?;
    let id = DMatrix::<f64>::identity(dim, dim);
    if (&jmat * &jmat + &id).norm() > 1e-8 * (dim as f64) {
        return Err(Error::Validation(format!(
            "J^2 != -Id at (r = {}, residual {:.3e})",
            p.r,
            (&jmat * &jmat + &id).norm()
        )));
    }
    let (lambda, sigma, reeb, g) = frame_covectors(&jmat, &p.v);
    if g.abs() > 0.5 {
        return Err(Error::NotAlmostCylindrical(format!(
            "|dr(R)| = {} > 0.5 at r = {}",
            g.abs(),
            p.r
        )));
    }
    let reeb = TangentVector::from_ambient(p.clone(), &reeb);
    let pi_xi = &id - p.v.clone() * sigma.transpose() - reeb.ambient() * lambda.transpose();

    // Rank-revealing factorization: xi is the range of the projector.
    let svd = pi_xi.clone().svd(true, false);
    let u = svd.u.as_ref().expect("svd with u");
    let smax = svd.singular_values.max();
    let mut xi_basis = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > XI_SVD_CUTOFF * smax {
            xi_basis.push(u.column(i).into_owned());
        }
    }
    if xi_basis.len() != dim - 2 {
        return Err(Error::DegenerateSplitting(format!(
            "dim xi = {} != {}",
            xi_basis.len(),
            dim - 2
        )));
    }
    Ok(FrameSplitting {
        base: p.clone(),
        reeb,
        xi_basis,
        lambda,
        sigma,
        pi_xi,
    })
}
