use super::StatePair;
use crate::dynamics::{apply_map, DynamicalMapFamily};
use crate::error::{Error, Result};
use crate::linalg::{trace_norm, ComplexMatrix};
use crate::scalar::Real;

/// `(Φ ⊗ I)(x)` for `x` on `S ⊗ A`, system factor first.
pub fn apply_map_with_ancilla<T: Real>(map: &ComplexMatrix<T>, x: &ComplexMatrix<T>, dim_s: usize, dim_a: usize) -> ComplexMatrix<T> {
    let mut out = ComplexMatrix::zeros(dim_s * dim_a, dim_s * dim_a);
    for a in 0..dim_a {
        for b in 0..dim_a {
            let block = ComplexMatrix::from_fn(dim_s, dim_s, |s, r| x[(s * dim_a + a, r * dim_a + b)]);
            let mapped = apply_map(map, &block);
            for s in 0..dim_s {
                for r in 0..dim_s {
                    out[(s * dim_a + a, r * dim_a + b)] = mapped[(s, r)];
                }
            }
        }
    }
    out
}

fn check_joint<T: Real>(family: &DynamicalMapFamily<T>, pair: &StatePair<T>, dim_a: usize) -> Result<()> {
    let ds = family.dim();
    if dim_a != ds && dim_a != ds + 1 {
        return Err(Error::InvalidArgument(format!(
            "ancilla dimension must be {ds} or {}, got {dim_a}",
            ds + 1
        )));
    }
    if pair.dim() != ds * dim_a {
        return Err(Error::DimensionMismatch {
            expected: ds * dim_a,
            found: pair.dim(),
        });
    }
    Ok(())
}

fn ancilla_series<T: Real>(family: &DynamicalMapFamily<T>, x: &ComplexMatrix<T>, dim_a: usize) -> Result<Vec<(T, T)>> {
    let ds = family.dim();
    let grid = family.grid();
    family
        .maps()
        .iter()
        .enumerate()
        .map(|(k, m)| Ok((grid.time(k), trace_norm(&apply_map_with_ancilla(m, x, ds, dim_a))?)))
        .collect()
}

/// Trace distance of `(Φ_{t,0} ⊗ I)ρ¹_SA` and `(Φ_{t,0} ⊗ I)ρ²_SA`; the
/// ancilla dimension must be `d_S` or `d_S + 1`.
pub fn ancilla_distance_series<T: Real>(family: &DynamicalMapFamily<T>, pair: &StatePair<T>, dim_a: usize) -> Result<Vec<(T, T)>> {
    check_joint(family, pair, dim_a)?;
    let half = T::lit(0.5);
    let diff = &pair.rho1.matrix().scale_real(half) - &pair.rho2.matrix().scale_real(half);
    ancilla_series(family, &diff, dim_a)
}

/// `‖(Φ_{t,0} ⊗ I)(p₁ρ¹_SA − p₂ρ²_SA)‖₁`.
pub fn ancilla_helstrom_series<T: Real>(family: &DynamicalMapFamily<T>, pair: &StatePair<T>, dim_a: usize) -> Result<Vec<(T, T)>> {
    check_joint(family, pair, dim_a)?;
    ancilla_series(family, &pair.helstrom_matrix(), dim_a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_map_family, ModelSpec, RateProfile, TimeGrid};
    use crate::linalg::DensityOperator;
    use crate::measures::{backflow, distance_series};
    use std::f64::consts::{PI, TAU};

    #[test]
    fn product_ancilla_matches_reduced_series() {
        let grid = TimeGrid::new(TAU, 400).unwrap();
        let fam = build_map_family(&ModelSpec::amplitude_damping(RateProfile::sinusoid(1.0, 1.0, 0.0)), &grid).unwrap();
        let e = DensityOperator::<f64>::basis(2, 1).unwrap();
        let g = DensityOperator::<f64>::basis(2, 0).unwrap();
        let anc = DensityOperator::<f64>::basis(3, 0).unwrap();
        let joint = StatePair::equal(e.tensor(&anc), g.tensor(&anc)).unwrap();
        let reduced = distance_series(&fam, &StatePair::equal(e, g).unwrap()).unwrap();
        let extended = ancilla_distance_series(&fam, &joint, 3).unwrap();
        for (a, b) in reduced.iter().zip(&extended) {
            assert!((a.1 - b.1).abs() < 1e-12);
        }
        let flow = backflow(&extended);
        assert_eq!(flow.increase_intervals.len(), 1);
        let (a, b) = flow.increase_intervals[0];
        assert!((a - PI).abs() <= 2.0 * grid.dt() && (b - TAU).abs() <= 2.0 * grid.dt());
    }

    #[test]
    fn identity_map_with_ancilla_is_identity() {
        let id = ComplexMatrix::<f64>::identity(4);
        let x = ComplexMatrix::from_fn(6, 6, |i, j| num_complex::Complex::new(i as f64, j as f64));
        assert_eq!(apply_map_with_ancilla(&id, &x, 2, 3), x);
    }

    #[test]
    fn rejects_unsupported_ancilla() {
        let fam = DynamicalMapFamily::<f64>::identity(TimeGrid::new(1.0, 10).unwrap(), 2);
        let a = DensityOperator::<f64>::maximally_mixed(8).unwrap();
        let pair = StatePair::equal(a.clone(), a).unwrap();
        assert!(ancilla_distance_series(&fam, &pair, 4).is_err());
    }
}
