//! The shipped curve catalog: monomial covers, graph perturbations, mixed
//! polynomial curves, and pushforwards under near-identity diffeomorphisms,
//! each paired with the structure that makes it holomorphic.

use crate::curves::{c64, monomial_coeffs, PuncturedCurve};
use crate::error::Result;
use crate::geometry::{pushforward_acs, standard_cylindrical_acs, AcsField, Diffeo, EndModel};
use num_complex::Complex64;

/// One catalog curve with its identifier and compatible structure.
#[derive(Clone)]
pub struct CatalogEntry {
    pub id: String,
    pub curve: PuncturedCurve,
    pub j: AcsField,
}

fn graph_coeffs(k: usize, c: f64) -> Vec<Vec<Complex64>> {
    let mut first = vec![c64(0.0, 0.0); k + 1];
    first[k] = c64(1.0, 0.0);
    let mut second = vec![c64(0.0, 0.0); k + 2];
    second[k + 1] = c64(c, 0.0);
    vec![first, second]
}

fn mixed_coeffs(p1: usize, c1: f64, p2: usize, c2: f64) -> Vec<Vec<Complex64>> {
    let mut first = vec![c64(0.0, 0.0); p1 + 1];
    first[p1] = c64(c1, 0.0);
    let mut second = vec![c64(0.0, 0.0); p2 + 1];
    second[p2] = c64(c2, 0.0);
    vec![first, second]
}

/// The default 20-curve catalog on the dimension-2, unit-radius model.
pub fn standard_catalog(model: &EndModel) -> Result<Vec<CatalogEntry>> {
    let std_j = standard_cylindrical_acs(model);
    let mut entries = Vec::new();

    for k in 1..=5usize {
        entries.push(CatalogEntry {
            id: format!("monomial-{k}"),
            curve: PuncturedCurve::polynomial(monomial_coeffs(model.n, k), model)?,
            j: std_j.clone(),
        });
    }
    for k in 1..=5usize {
        entries.push(CatalogEntry {
            id: format!("graph-{k}"),
            curve: PuncturedCurve::polynomial(graph_coeffs(k, 0.3), model)?,
            j: std_j.clone(),
        });
    }
    for (id, p1, c1, p2, c2) in [
        ("mixed-12", 1, 1.0, 2, 1.0),
        ("mixed-23", 2, 1.0, 3, 1.0),
        ("mixed-13", 1, 1.0, 3, 0.5),
        ("mixed-34", 3, 1.0, 4, 1.0),
    ] {
        entries.push(CatalogEntry {
            id: id.to_string(),
            curve: PuncturedCurve::polynomial(mixed_coeffs(p1, c1, p2, c2), model)?,
            j: std_j.clone(),
        });
    }

    // anti-holomorphic perturbations shed ball area at order beta^2; keep
    // beta small enough that the area quantum stays within 1e-3 of pi r^2
    let beta = 0.015;
    for (name, phi) in [
        ("quadratic", Diffeo::quadratic(beta)),
        ("cubic", Diffeo::cubic(beta)),
    ] {
        let j = pushforward_acs(phi.clone(), model)?;
        for k in [1usize, 2] {
            entries.push(CatalogEntry {
                id: format!("{name}-pf-{k}"),
                curve: PuncturedCurve::pushforward(
                    phi.clone(),
                    monomial_coeffs(model.n, k),
                    model,
                )?,
                j: j.clone(),
            });
        }
        entries.push(CatalogEntry {
            id: format!("{name}-pf-mixed"),
            curve: PuncturedCurve::pushforward(phi.clone(), mixed_coeffs(1, 1.0, 2, 1.0), model)?,
            j: j.clone(),
        });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{cr_residual, to_cylinder, total_multiplicity};

    #[test]
    fn catalog_has_at_least_twenty_distinct_curves() {
        let model = EndModel::negative(2, 1.0).unwrap();
        let entries = standard_catalog(&model).unwrap();
        assert!(entries.len() >= 20, "only {} entries", entries.len());
        let mut ids: Vec<&str> = entries.iter().map(|e| e.id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), entries.len());
    }

    #[test]
    fn every_entry_is_holomorphic_for_its_structure() {
        let model = EndModel::negative(2, 1.0).unwrap();
        for entry in standard_catalog(&model).unwrap() {
            let cyl = to_cylinder(&entry.curve);
            let res = cr_residual(&cyl, &entry.j, 12, 12, -4.0).unwrap();
            assert!(res < 1e-6, "{}: residual {res}", entry.id);
            assert!(total_multiplicity(&entry.curve).unwrap() >= 1, "{}", entry.id);
        }
    }
}
