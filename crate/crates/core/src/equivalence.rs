//! Non-linear equivalence maps `A = K(N) B`, `A⁺ = B⁺ K(N)` between two
//! deformations at the same `ħ` and level cap.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::deformation::LadderTable;
use crate::eigenstate::{generator, pi_matrix, Generator, OperatorMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct EquivalenceMap {
    source: Arc<LadderTable>,
    target: Arc<LadderTable>,
    k: Vec<f64>,
    first_defect: Option<usize>,
}

/// JSON summary `{"invertible": .., "first_defect": .., "K": [..]}`;
/// non-finite factors serialise as `null`.
#[derive(Debug, Clone, Serialize)]
pub struct MapSummary {
    pub invertible: bool,
    pub first_defect: Option<usize>,
    #[serde(rename = "K")]
    pub k: Vec<f64>,
}

fn usable(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

/// `K(n) = √(F_A(n+1) / F_B(n+1))` for `0 <= n < D`.
pub fn build_map(src: &Arc<LadderTable>, tgt: &Arc<LadderTable>) -> Result<EquivalenceMap> {
    if src.dim() != tgt.dim() {
        return Err(Error::Incompatible(format!("level caps {} and {}", src.dim(), tgt.dim())));
    }
    if src.hbar() != tgt.hbar() {
        return Err(Error::Incompatible(format!("hbar {} and {}", src.hbar(), tgt.hbar())));
    }
    let (fa, fb) = (src.ladder(), tgt.ladder());
    let k = (0..src.dim()).map(|n| (fa[n + 1] / fb[n + 1]).sqrt()).collect();
    let first_defect = (1..=src.dim()).find(|&j| !(usable(fa[j]) && usable(fb[j])));
    Ok(EquivalenceMap { source: src.clone(), target: tgt.clone(), k, first_defect })
}

impl EquivalenceMap {
    pub fn source(&self) -> &Arc<LadderTable> {
        &self.source
    }

    pub fn target(&self) -> &Arc<LadderTable> {
        &self.target
    }

    pub fn k_values(&self) -> &[f64] {
        &self.k
    }

    pub fn invertible(&self) -> bool {
        self.first_defect.is_none()
    }

    /// Level `j = n + 1` of the first vanishing, negative or non-finite `F(j)`.
    pub fn first_defect(&self) -> Option<usize> {
        self.first_defect
    }

    pub fn summary(&self) -> MapSummary {
        MapSummary { invertible: self.invertible(), first_defect: self.first_defect, k: self.k.clone() }
    }

    /// `K^A_B · K^B_C`, a map from `A` to `C`.
    pub fn compose(&self, next: &EquivalenceMap) -> Result<EquivalenceMap> {
        if self.target.ladder() != next.source.ladder() {
            return Err(Error::Incompatible("maps do not chain".into()));
        }
        let mut out = build_map(&self.source, &next.target)?;
        out.k = self.k.iter().zip(&next.k).map(|(a, b)| a * b).collect();
        Ok(out)
    }

    fn degenerate(&self) -> Error {
        let level = self.first_defect.expect("called on a defective map");
        let value = if usable(self.source.ladder()[level]) {
            self.target.ladder()[level]
        } else {
            self.source.ladder()[level]
        };
        Error::Degenerate { level, value }
    }

    /// `K(N)` as a diagonal matrix.
    pub fn k_matrix(&self) -> Result<OperatorMatrix> {
        if !self.invertible() {
            return Err(self.degenerate());
        }
        let diag = self.k.iter().map(|&v| Complex64::new(v, 0.0));
        Ok(OperatorMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.k.len(),
            diag,
        ))))
    }

    /// `(K(N) B, B⁺ K(N))` with `B, B⁺` the target generators.
    pub fn transform_generators(&self) -> Result<(OperatorMatrix, OperatorMatrix)> {
        let k = self.k_matrix()?.into_entries();
        let b = pi_matrix(&generator(Generator::A, &self.target)).into_entries();
        let bd = pi_matrix(&generator(Generator::APlus, &self.target)).into_entries();
        Ok((OperatorMatrix::new(&k * b), OperatorMatrix::new(bd * &k)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::{build_ladder_table, DeformationSpec};
    use crate::numerics::max_abs_diff;

    fn table(spec: DeformationSpec) -> Arc<LadderTable> {
        Arc::new(build_ladder_table(&spec))
    }

    #[test]
    fn identity_map() {
        let t = table(DeformationSpec::q_symmetric(1.0, 1.3, 8).unwrap());
        let map = build_map(&t, &t).unwrap();
        assert!(map.k_values().iter().all(|&k| k == 1.0));
        let (a, ad) = map.transform_generators().unwrap();
        assert_eq!(a, pi_matrix(&generator(Generator::A, &t)));
        assert_eq!(ad, pi_matrix(&generator(Generator::APlus, &t)));
    }

    #[test]
    fn standard_to_qp() {
        let st = table(DeformationSpec::standard(1.0, 8).unwrap());
        let qp = table(DeformationSpec::qp(1.0, 2.0, 1.0, 8).unwrap());
        let map = build_map(&st, &qp).unwrap();
        assert_eq!(map.k_values()[2], (3.0f64 / 7.0).sqrt());
    }

    #[test]
    fn degenerate_fixture() {
        let bad = table(DeformationSpec::table(1.0, vec![1.0, 0.0, -1.0]).unwrap());
        let st = table(DeformationSpec::standard(1.0, 3).unwrap());
        let map = build_map(&bad, &st).unwrap();
        assert!(!map.invertible());
        assert_eq!(map.first_defect(), Some(3));
        assert!(matches!(map.transform_generators(), Err(Error::Degenerate { level: 3, .. })));
        let json = serde_json::to_string(&map.summary()).unwrap();
        assert!(json.starts_with(r#"{"invertible":false,"first_defect":3,"K":[1.0,"#), "{json}");
    }

    #[test]
    fn mismatches_are_rejected() {
        let a = table(DeformationSpec::standard(1.0, 8).unwrap());
        let b = table(DeformationSpec::standard(0.5, 8).unwrap());
        let c = table(DeformationSpec::standard(1.0, 9).unwrap());
        assert!(build_map(&a, &b).is_err());
        assert!(build_map(&a, &c).is_err());
    }

    #[test]
    fn bosonisation_reproduces_source() {
        let q = table(DeformationSpec::q_symmetric(1.0, 1.3, 16).unwrap());
        let st = table(DeformationSpec::standard(1.0, 16).unwrap());
        let map = build_map(&q, &st).unwrap();
        for n in 0..16 {
            let want = (q.ladder()[n + 1] / (n + 1) as f64).sqrt();
            assert_eq!(map.k_values()[n], want);
        }
        let (a, ad) = map.transform_generators().unwrap();
        let h = (a.entries() * ad.entries() + ad.entries() * a.entries()) * Complex64::new(0.5, 0.0);
        for n in 0..15 {
            let e = q.spectrum()[n];
            assert!((h[(n, n)].re - e).abs() <= 1e-12 * e);
        }
        let want_a = pi_matrix(&generator(Generator::A, &q));
        assert!(max_abs_diff(a.entries(), want_a.entries()) <= 1e-12);
    }
}
