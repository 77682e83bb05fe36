use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digital::{CellIndex, DigitalSet};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{covers_box, volume, Aabb, Cube};
use crate::scalar::Scalar;

/// A finite cover certificate: `pieces[k-1]` must satisfy
/// `vol <= eps^k` (positions are 1-based), and be a cube when `strong`.
///
/// The budget is not enforced on construction so that violating
/// certificates can be loaded and reported by [`verify_cover`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverSeq {
    n: usize,
    eps: Scalar,
    strong: bool,
    pieces: Vec<Aabb>,
}

#[derive(Deserialize)]
struct RawCoverSeq {
    n: usize,
    eps: Scalar,
    strong: bool,
    pieces: Vec<Aabb>,
}

impl<'de> Deserialize<'de> for CoverSeq {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawCoverSeq::deserialize(deserializer)?;
        CoverSeq::new(raw.n, raw.eps, raw.strong, raw.pieces).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn check_eps(eps: &Scalar) -> Result<()> {
    if eps.is_positive() && *eps < 1 {
        Ok(())
    } else {
        Err(Error::invalid(format!("eps {eps} not in (0,1)")))
    }
}

impl CoverSeq {
    pub fn new(n: usize, eps: Scalar, strong: bool, pieces: Vec<Aabb>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        check_eps(&eps)?;
        for p in &pieces {
            check_dim(n, p.dim())?;
        }
        Ok(CoverSeq { n, eps, strong, pieces })
    }

    pub fn strong(n: usize, eps: Scalar, cubes: Vec<Cube>) -> Result<Self> {
        CoverSeq::new(n, eps, true, cubes.into_iter().map(Cube::into_box).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> &Scalar {
        &self.eps
    }

    pub fn is_strong(&self) -> bool {
        self.strong
    }

    pub fn pieces(&self) -> &[Aabb] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// `eps^position` for a 1-based position.
    pub fn budget(&self, position: usize) -> Scalar {
        self.eps.powu(position as u64)
    }

    /// First position whose piece breaks the budget or the cube requirement.
    pub fn first_budget_violation(&self) -> Option<Violation> {
        let mut budget = Scalar::one();
        for (i, p) in self.pieces.iter().enumerate() {
            budget *= &self.eps;
            let position = i + 1;
            if self.strong && p.cube_side().is_none() {
                return Some(Violation {
                    position,
                    reason: ViolationReason::NotACube,
                });
            }
            let vol = volume(p);
            if vol > budget {
                return Some(Violation {
                    position,
                    reason: ViolationReason::OverBudget { volume: vol, budget },
                });
            }
        }
        None
    }

    /// `sum_k vol(I_k)`.
    pub fn volume_sum(&self) -> Scalar {
        self.pieces.iter().map(volume).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("covers serialize")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationReason {
    OverBudget { volume: Scalar, budget: Scalar },
    NotACube,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub position: usize,
    pub reason: ViolationReason,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverReport {
    pub budget_ok: bool,
    pub coverage_ok: bool,
    pub first_violation: Option<Violation>,
    pub uncovered_witness: Option<CellIndex>,
}

impl CoverReport {
    pub fn is_ok(&self) -> bool {
        self.budget_ok && self.coverage_ok
    }
}

/// Checks the positional budgets and exact coverage of every cell of `e`.
pub fn verify_cover(e: &DigitalSet, cover: &CoverSeq) -> Result<CoverReport> {
    check_dim(e.dim(), cover.dim())?;
    let first_violation = cover.first_budget_violation();
    let cells: Vec<&CellIndex> = e.cells().iter().collect();
    let uncovered = cells
        .par_iter()
        .map(|c| covers_box(&e.cell_box(c), cover.pieces()).map(|ok| (!ok).then(|| (*c).clone())))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .next();
    Ok(CoverReport {
        budget_ok: first_violation.is_none(),
        coverage_ok: uncovered.is_none(),
        first_violation,
        uncovered_witness: uncovered,
    })
}

/// Interleaves `m` covers, each built for budget `(eps^m)^k`, into one cover
/// for budget `eps^k`: piece `k` of cover `i` (1-based) goes to position
/// `(k-1)*m + i`. Positions left empty by shorter inputs get a tiny cube
/// at the origin that meets its own budget.
pub fn merge_covers(covers: &[CoverSeq], eps: &Scalar) -> Result<CoverSeq> {
    check_eps(eps)?;
    let first = covers
        .first()
        .ok_or_else(|| Error::invalid("nothing to merge"))?;
    let (n, strong) = (first.dim(), first.is_strong());
    let m = covers.len();
    let strengthened = eps.powu(m as u64);
    for (i, c) in covers.iter().enumerate() {
        check_dim(n, c.dim())?;
        if c.is_strong() != strong {
            return Err(Error::invalid(format!("cover {} has a different strong flag", i + 1)));
        }
        let probe = CoverSeq::new(n, strengthened.clone(), strong, c.pieces().to_vec())?;
        if let Some(v) = probe.first_budget_violation() {
            return Err(Error::invalid(format!(
                "cover {} violates the strengthened budget (eps^{m})^k at position {}",
                i + 1,
                v.position
            )));
        }
    }
    let longest = covers.iter().map(CoverSeq::len).max().unwrap_or(0);
    let mut pieces = Vec::with_capacity(longest * m);
    for k in 0..longest {
        for (i, c) in covers.iter().enumerate() {
            let position = k * m + i + 1;
            match c.pieces().get(k) {
                Some(p) => pieces.push(p.clone()),
                None => pieces.push(filler(n, eps, position)),
            }
        }
    }
    while !pieces.is_empty() && trailing_filler(&pieces, covers, m) {
        pieces.pop();
    }
    let out = CoverSeq::new(n, eps.clone(), strong, pieces)?;
    if let Some(v) = out.first_budget_violation() {
        return Err(Error::invariant(format!("merged cover breaks its budget at {}", v.position)));
    }
    Ok(out)
}

/// Cube of side `eps^position` at the origin; its volume `eps^(n*position)`
/// never exceeds `eps^position`.
fn filler(n: usize, eps: &Scalar, position: usize) -> Aabb {
    let side = eps.powu(position as u64);
    Aabb::cube_at(&vec![Scalar::zero(); n], &side)
}

fn trailing_filler(pieces: &[Aabb], covers: &[CoverSeq], m: usize) -> bool {
    let idx = pieces.len() - 1;
    let (k, i) = (idx / m, idx % m);
    covers[i].pieces().get(k).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn iv(lo: Scalar, hi: Scalar) -> Aabb {
        Aabb::new(vec![(lo, hi)]).unwrap()
    }

    #[test]
    fn eps_range_enforced() {
        assert!(CoverSeq::new(1, Scalar::one(), false, vec![]).is_err());
        assert!(CoverSeq::new(1, Scalar::zero(), false, vec![]).is_err());
    }

    #[test]
    fn unit_cell_over_budget_at_first_position() {
        let e = DigitalSet::new(1, 3, 0, vec![vec![0]]).unwrap();
        let c = CoverSeq::new(1, r(1, 2), false, vec![Aabb::unit(1)]).unwrap();
        let rep = verify_cover(&e, &c).unwrap();
        assert!(!rep.budget_ok);
        assert!(rep.coverage_ok);
        assert_eq!(rep.first_violation.unwrap().position, 1);
    }

    #[test]
    fn second_piece_over_budget() {
        let e = DigitalSet::new(1, 3, 1, vec![vec![0], vec![2]]).unwrap();
        let c = CoverSeq::new(1, r(1, 2), false, vec![iv(r(0, 1), r(1, 3)), iv(r(2, 3), r(1, 1))]).unwrap();
        let rep = verify_cover(&e, &c).unwrap();
        assert!(!rep.budget_ok);
        let v = rep.first_violation.unwrap();
        assert_eq!(v.position, 2);
        assert_eq!(
            v.reason,
            ViolationReason::OverBudget {
                volume: r(1, 3),
                budget: r(1, 4)
            }
        );
    }

    #[test]
    fn short_second_piece_leaves_gap() {
        let e = DigitalSet::new(1, 3, 1, vec![vec![0], vec![2]]).unwrap();
        let c = CoverSeq::new(1, r(1, 2), false, vec![iv(r(0, 1), r(1, 2)), iv(r(2, 3), r(11, 12))]).unwrap();
        let rep = verify_cover(&e, &c).unwrap();
        assert!(rep.budget_ok);
        assert!(!rep.coverage_ok, "[2/3, 11/12] misses (11/12, 1]");
        assert_eq!(rep.uncovered_witness, Some(vec![2]));
    }

    #[test]
    fn both_flags_true() {
        let e = DigitalSet::new(1, 3, 1, vec![vec![0], vec![2]]).unwrap();
        let pieces = vec![iv(r(2, 3), r(1, 1)), iv(r(0, 1), r(1, 4)), iv(r(1, 4), r(1, 3))];
        let c = CoverSeq::new(1, r(1, 2), false, pieces).unwrap();
        let rep = verify_cover(&e, &c).unwrap();
        assert!(rep.is_ok(), "{rep:?}");
        assert_eq!(rep.first_violation, None);
        assert_eq!(rep.uncovered_witness, None);
    }

    #[test]
    fn strong_cover_needs_cubes() {
        let e = DigitalSet::new(2, 3, 1, vec![vec![0, 0]]).unwrap();
        let flat = Aabb::new(vec![(r(0, 1), r(1, 3)), (r(0, 1), r(1, 2))]).unwrap();
        let c = CoverSeq::new(2, r(1, 2), true, vec![flat]).unwrap();
        let rep = verify_cover(&e, &c).unwrap();
        assert_eq!(rep.first_violation.unwrap().reason, ViolationReason::NotACube);
    }

    #[test]
    fn merge_identity_and_pair() {
        let a = CoverSeq::new(1, r(1, 4), false, vec![iv(r(0, 1), r(1, 4))]).unwrap();
        let m = merge_covers(std::slice::from_ref(&a), &r(1, 4)).unwrap();
        assert_eq!(m.pieces(), a.pieces());

        let eps = r(1, 2);
        let a = CoverSeq::new(1, r(1, 4), false, vec![iv(r(0, 1), r(1, 4))]).unwrap();
        let b = CoverSeq::new(1, r(1, 4), false, vec![iv(r(3, 4), r(1, 1))]).unwrap();
        let m = merge_covers(&[a, b], &eps).unwrap();
        assert_eq!(m.len(), 2);
        assert!(m.first_budget_violation().is_none());
    }

    #[test]
    fn merge_rejects_weak_input() {
        let eps = r(1, 2);
        let a = CoverSeq::new(1, r(1, 2), false, vec![iv(r(0, 1), r(1, 2))]).unwrap();
        let b = a.clone();
        assert!(merge_covers(&[a, b], &eps).is_err());
    }

    #[test]
    fn merge_three_singletons() {
        let eps = r(1, 2);
        let cells = [0u64, 4, 8];
        let covers: Vec<CoverSeq> = cells
            .iter()
            .map(|&j| {
                let e = DigitalSet::new(1, 3, 2, vec![vec![j]]).unwrap();
                CoverSeq::new(1, eps.powu(3), false, vec![e.cell_box(&[j])]).unwrap()
            })
            .collect();
        let merged = merge_covers(&covers, &eps).unwrap();
        let union = DigitalSet::new(1, 3, 2, cells.iter().map(|&j| vec![j])).unwrap();
        assert!(verify_cover(&union, &merged).unwrap().is_ok());
    }

    #[test]
    fn merge_fills_gaps_in_uneven_inputs() {
        let eps = r(1, 2);
        let a = CoverSeq::new(1, r(1, 4), false, vec![iv(r(0, 1), r(1, 8)), iv(r(1, 2), r(1, 2))]).unwrap();
        let b = CoverSeq::new(1, r(1, 4), false, vec![iv(r(3, 4), r(3, 4))]).unwrap();
        let m = merge_covers(&[a, b], &eps).unwrap();
        assert_eq!(m.len(), 3);
        assert!(m.first_budget_violation().is_none());
    }
}
