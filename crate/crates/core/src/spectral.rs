//! The word-length Dirac operator on a finite ball of ℓ²(Z^n) and the
//! point unitaries of classical isometries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grpalg::{word_ball, word_length, GenSet, GroupElement, GroupError};
use crate::models::{metric_aut_group, IntMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectralError {
    #[error("radius must be at least 1")]
    ZeroRadius,
    #[error("matrix {0} does not map the generating set onto itself")]
    NotIsometry(String),
    #[error("matrix {0} has the wrong size for rank {1}")]
    SizeMismatch(String, usize),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Basis δ_g for l(g) ≤ R, ordered by length then by element, and the
/// diagonal of D(δ_g) = l(g) δ_g.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedTriple {
    pub gens: GenSet,
    pub radius: usize,
    pub basis: Vec<GroupElement>,
    pub dirac: Vec<usize>,
}

impl TruncatedTriple {
    pub fn length_of(&self, g: &GroupElement) -> Option<usize> {
        self.basis.iter().position(|h| h == g).map(|i| self.dirac[i])
    }

    /// Basis elements grouped by word length.
    pub fn spheres(&self) -> BTreeMap<usize, Vec<GroupElement>> {
        let mut out: BTreeMap<usize, Vec<GroupElement>> = BTreeMap::new();
        for (g, &l) in self.basis.iter().zip(&self.dirac) {
            out.entry(l).or_default().push(g.clone());
        }
        out
    }
}

pub fn build_dirac(s: &GenSet, radius: usize) -> Result<TruncatedTriple, SpectralError> {
    if radius == 0 {
        return Err(SpectralError::ZeroRadius);
    }
    let mut pairs: Vec<(usize, GroupElement)> = word_ball(s, radius).into_iter().map(|(g, l)| (l, g)).collect();
    pairs.sort();
    let (dirac, basis) = pairs.into_iter().unzip();
    Ok(TruncatedTriple { gens: s.clone(), radius, basis, dirac })
}

/// The classical point (z, M): δ_g ↦ z^g δ_{Mg}, z kept formal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointIsometry {
    pub matrix: IntMatrix,
}

impl PointIsometry {
    pub fn new(matrix: IntMatrix) -> Self {
        PointIsometry { matrix }
    }

    pub fn swap() -> Self {
        PointIsometry::new(IntMatrix(vec![vec![0, 1], vec![1, 0]]))
    }
}

/// One column of a point unitary: δ_source ↦ z^phase δ_target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointColumn {
    pub source: GroupElement,
    pub phase: GroupElement,
    pub target: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointUnitary {
    pub columns: Vec<PointColumn>,
}

impl PointUnitary {
    pub fn is_identity_at_trivial_character(&self) -> bool {
        self.columns.iter().all(|c| c.source == c.target)
    }

    pub fn is_permutation_of(&self, basis: &[GroupElement]) -> bool {
        let mut targets: Vec<&GroupElement> = self.columns.iter().map(|c| &c.target).collect();
        let mut sources: Vec<&GroupElement> = basis.iter().collect();
        targets.sort();
        sources.sort();
        targets == sources
    }
}

fn check_size(sigma: &PointIsometry, rank: usize) -> Result<(), SpectralError> {
    let m = &sigma.matrix;
    if m.size() != rank || m.0.iter().any(|r| r.len() != rank) {
        return Err(SpectralError::SizeMismatch(m.to_string(), rank));
    }
    Ok(())
}

pub fn point_unitary(sigma: &PointIsometry, t: &TruncatedTriple) -> Result<PointUnitary, SpectralError> {
    check_size(sigma, t.gens.rank())?;
    if !metric_aut_group(&t.gens).contains(&sigma.matrix) {
        return Err(SpectralError::NotIsometry(sigma.matrix.to_string()));
    }
    let columns = t
        .basis
        .iter()
        .map(|g| PointColumn { source: g.clone(), phase: g.clone(), target: sigma.matrix.apply(g) })
        .collect();
    Ok(PointUnitary { columns })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthMismatch {
    pub point: GroupElement,
    pub length: usize,
    pub image: GroupElement,
    pub image_length: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutationVerdict {
    pub matrix: IntMatrix,
    pub radius: usize,
    pub checked: usize,
    pub mismatches: Vec<LengthMismatch>,
    /// δ_0 is fixed with trivial phase, so τ(a) = c_e is preserved.
    pub trace_preserved: bool,
}

impl CommutationVerdict {
    pub fn commutes(&self) -> bool {
        self.mismatches.is_empty() && self.trace_preserved
    }

    /// The first mismatch at a positive point, else the first one.
    pub fn witness(&self) -> Option<&LengthMismatch> {
        self.mismatches.iter().find(|m| m.point.is_positive()).or_else(|| self.mismatches.first())
    }
}

/// Compares l(Mg) with l(g) on the whole ball; equality everywhere is
/// commutation of the point unitary with the truncated Dirac operator.
pub fn commutation_check(sigma: &PointIsometry, t: &TruncatedTriple) -> Result<CommutationVerdict, SpectralError> {
    check_size(sigma, t.gens.rank())?;
    let mut mismatches = Vec::new();
    for (g, &l) in t.basis.iter().zip(&t.dirac) {
        let image = sigma.matrix.apply(g);
        let image_length = match t.length_of(&image) {
            Some(k) => k,
            None => word_length(&image, &t.gens)?,
        };
        if image_length != l {
            mismatches.push(LengthMismatch { point: g.clone(), length: l, image, image_length });
        }
    }
    let origin = GroupElement::zero(t.gens.rank());
    let trace_preserved = sigma.matrix.apply(&origin) == origin;
    Ok(CommutationVerdict {
        matrix: sigma.matrix.clone(),
        radius: t.radius,
        checked: t.basis.len(),
        mismatches,
        trace_preserved,
    })
}

/// Checks every metric automorphism of S, plus the coordinate swap for n = 2.
pub fn check_all(s: &GenSet, radius: usize) -> Result<Vec<CommutationVerdict>, SpectralError> {
    let t = build_dirac(s, radius)?;
    let mut out = Vec::new();
    let group = metric_aut_group(s);
    for m in &group.elements {
        out.push(commutation_check(&PointIsometry::new(m.clone()), &t)?);
    }
    let swap = PointIsometry::swap();
    if s.rank() == 2 && !group.contains(&swap.matrix) {
        out.push(commutation_check(&swap, &t)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(coords: &[(i64, i64)]) -> GenSet {
        let mut gens = Vec::new();
        for &(a, b) in coords {
            gens.push(GroupElement::new(&[a, b]));
            gens.push(GroupElement::new(&[-a, -b]));
        }
        GenSet::new(2, gens).unwrap()
    }

    #[test]
    fn dirac_on_unit_generators() {
        let t = build_dirac(&GenSet::integers(&[1]).unwrap(), 2).unwrap();
        let basis: Vec<i64> = t.basis.iter().map(|g| g.coords()[0]).collect();
        assert_eq!(basis, vec![0, -1, 1, -2, 2]);
        assert_eq!(t.dirac, vec![0, 1, 1, 2, 2]);
        assert!(build_dirac(&GenSet::integers(&[1]).unwrap(), 0).is_err());
    }

    #[test]
    fn dirac_two_three_reaches_one() {
        let t = build_dirac(&GenSet::integers(&[2, 3]).unwrap(), 2).unwrap();
        assert_eq!(t.length_of(&GroupElement::scalar(1)), Some(2));
        assert!(t.basis.iter().all(|g| t.basis.contains(&g.neg())));
    }

    #[test]
    fn dirac_plane() {
        let t = build_dirac(&plane(&[(1, 0), (0, 1)]), 1).unwrap();
        assert_eq!(t.basis.len(), 5);
        assert_eq!(t.dirac, vec![0, 1, 1, 1, 1]);
    }

    #[test]
    fn flip_on_integers() {
        let s = GenSet::integers(&[1]).unwrap();
        let t = build_dirac(&s, 10).unwrap();
        let flip = PointIsometry::new(IntMatrix(vec![vec![-1]]));
        let u = point_unitary(&flip, &t).unwrap();
        let col = u.columns.iter().find(|c| c.source == GroupElement::scalar(3)).unwrap();
        assert_eq!(col.phase, GroupElement::scalar(3));
        assert_eq!(col.target, GroupElement::scalar(-3));
        assert!(u.is_permutation_of(&t.basis));
        assert!(commutation_check(&flip, &t).unwrap().commutes());
        let id = point_unitary(&PointIsometry::new(IntMatrix::identity(1)), &t).unwrap();
        assert!(id.is_identity_at_trivial_character());
    }

    #[test]
    fn swap_on_square_generators() {
        let s = plane(&[(1, 0), (0, 1)]);
        let t = build_dirac(&s, 6).unwrap();
        let u = point_unitary(&PointIsometry::swap(), &t).unwrap();
        let col = u.columns.iter().find(|c| c.source == GroupElement::new(&[1, 0])).unwrap();
        assert_eq!(col.target, GroupElement::new(&[0, 1]));
        assert_eq!(col.phase, GroupElement::new(&[1, 0]));
        assert!(commutation_check(&PointIsometry::swap(), &t).unwrap().commutes());
    }

    #[test]
    fn swap_fails_with_extra_generator() {
        let s = plane(&[(1, 0), (0, 1), (2, 0)]);
        let t = build_dirac(&s, 2).unwrap();
        assert!(point_unitary(&PointIsometry::swap(), &t).is_err());
        let v = commutation_check(&PointIsometry::swap(), &t).unwrap();
        assert!(!v.commutes());
        assert!(v.mismatches.iter().any(|m| m.point == GroupElement::new(&[2, 0])
            && m.length == 1
            && m.image == GroupElement::new(&[0, 2])
            && m.image_length == 2));
    }

    #[test]
    fn all_automorphisms_commute() {
        for s in [GenSet::integers(&[2, 3]).unwrap(), plane(&[(1, 0), (0, 1), (2, 0)])] {
            let verdicts = check_all(&s, 6).unwrap();
            let group = metric_aut_group(&s);
            for v in &verdicts {
                assert_eq!(v.commutes(), group.contains(&v.matrix));
            }
        }
    }
}
