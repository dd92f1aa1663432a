//! The punctured-ball end in cylindrical coordinates: charts, almost complex
//! structures, the tangent-space splitting, and Reeb dynamics.

mod acs;
mod chart;
mod decay;
mod reeb;
pub(crate) mod splitting;

pub use acs::{pushforward_acs, standard_cylindrical_acs, AcsField, AcsKind, Diffeo};
pub use chart::{chart_to_cylinder, cylinder_to_chart};
pub use decay::{acc1_decay_estimate, DecayFit};
pub use reeb::{
    constant_orbit, detect_simple_period, orbit_action, orbit_action_lambda_st, reeb_flow,
    reeb_flow_pushforward, reeb_limit_field, ReebOrbit,
};
pub use splitting::{splitting_at, FrameSplitting};

use crate::error::{Error, Result};
use nalgebra::DVector;

pub const UNIT_TOL: f64 = 1e-12;
pub const ORTHO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndSign {
    Negative,
    Positive,
}

/// The cylindrical end R^- x S^{2N-1} of the punctured epsilon-ball, with the
/// translation-invariant reference metric dr^2 + g_round (Euclidean in the
/// ambient representation of tangent vectors).
#[derive(Debug, Clone)]
pub struct EndModel {
    /// Complex dimension N of the ambient ball.
    pub n: usize,
    /// Chart radius epsilon.
    pub epsilon: f64,
    pub sign: EndSign,
}

impl EndModel {
    pub fn negative(n: usize, epsilon: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Validation(format!("complex dimension {n} < 1")));
        }
        if !(epsilon > 0.0) {
            return Err(Error::Validation(format!("chart radius {epsilon} <= 0")));
        }
        Ok(EndModel {
            n,
            epsilon,
            sign: EndSign::Negative,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        2 * self.n
    }
}

/// A point (r, v) of the end, v a unit vector of R^{2N}.
#[derive(Debug, Clone)]
pub struct ChartPoint {
    pub r: f64,
    pub v: DVector<f64>,
}

impl ChartPoint {
    pub fn new(r: f64, v: DVector<f64>, sign: EndSign) -> Result<Self> {
        if (v.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::Validation(format!(
                "sphere point has |v| = {} (tolerance 1e-12)",
                v.norm()
            )));
        }
        match sign {
            EndSign::Negative if r > 0.0 => {
                return Err(Error::Validation(format!("r = {r} > 0 on a negative end")))
            }
            EndSign::Positive if r < 0.0 => {
                return Err(Error::Validation(format!("r = {r} < 0 on a positive end")))
            }
            _ => {}
        }
        Ok(ChartPoint { r, v })
    }

    /// Construct after renormalizing v; rejects vectors far from unit length.
    pub fn normalized(r: f64, v: DVector<f64>, sign: EndSign) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 1e-6) {
            return Err(Error::Validation("cannot normalize near-zero vector".into()));
        }
        ChartPoint::new(r, v / norm, sign)
    }
}

/// Tangent vector of the end at `base`, split into radial and spherical parts.
#[derive(Debug, Clone)]
pub struct TangentVector {
    pub base: ChartPoint,
    pub dr_component: f64,
    pub sphere_component: DVector<f64>,
}

impl TangentVector {
    pub fn new(base: ChartPoint, dr_component: f64, sphere_component: DVector<f64>) -> Result<Self> {
        let ortho = base.v.dot(&sphere_component).abs();
        if ortho > ORTHO_TOL * sphere_component.norm().max(1.0) {
            return Err(Error::Validation(format!(
                "sphere component not orthogonal to base point (residual {ortho:.3e})"
            )));
        }
        Ok(TangentVector {
            base,
            dr_component,
            sphere_component,
        })
    }

    /// Split an ambient-representation vector into (dr, sphere) parts.
    pub fn from_ambient(base: ChartPoint, zeta: &DVector<f64>) -> Self {
        let dr = base.v.dot(zeta);
        let sphere = zeta - &base.v * dr;
        TangentVector {
            base,
            dr_component: dr,
            sphere_component: sphere,
        }
    }

    /// Ambient representation dr * v + w.
    pub fn ambient(&self) -> DVector<f64> {
        &self.base.v * self.dr_component + &self.sphere_component
    }
}
