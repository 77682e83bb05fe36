//! Budget-respecting covers that try hard to hit the dust. They feed the
//! refuter; none of them can succeed when `eps` is below the threshold.

use num_bigint::BigInt;
use rand_core::RngCore;
use rand_pcg::Pcg64;

use super::{bucket_of, DustTree, GapTable};
use crate::covers::CoverSeq;
use crate::enclose::{root, Precision};
use crate::error::Result;
use crate::geometry::{box_dist_sq, Aabb, Cube};
use crate::scalar::Scalar;

/// Positive lower bound for `x^(1/k)` with about 40 significant bits,
/// however small `x` is.
fn root_lower(x: &Scalar, k: u32) -> Scalar {
    let shrink = x.denom().bits().saturating_sub(x.numer().bits());
    let bits = shrink / k as u64 + 48;
    let prec = Precision::new(BigInt::from(1) << bits).expect("positive denominator");
    root(x, k, &prec).lo
}

/// Largest volume a piece at position `h` may take: the budget `eps^h`,
/// kept strictly under `D_k^n` for its bucket `k`.
fn piece_volume(tree: &DustTree, gaps: &GapTable, eps: &Scalar, h: u64) -> Scalar {
    let k = bucket_of(h).min(tree.depth());
    let n = tree.spec().dim() as u64;
    let cap = gaps.row(k).expect("level in table").d_min.powu(n) / Scalar::int(2);
    Scalar::min_of(eps.powu(h), cap)
}

/// First cube of the piece's level that no earlier piece meets, or the
/// first cube when all are hit.
fn target(tree: &DustTree, pieces: &[Aabb], h: u64) -> Cube {
    let k = bucket_of(h).min(tree.depth());
    let level = tree.level(k).expect("level in range");
    level
        .iter()
        .find(|q| pieces.iter().all(|p| box_dist_sq(q.as_box(), p).is_positive()))
        .unwrap_or(&level[0])
        .clone()
}

/// Cubes placed flush on the leftmost untouched cube of each piece's level,
/// as large as the budget allows and never larger than that cube.
pub fn swallow_cover(tree: &DustTree, eps: &Scalar, count: usize) -> Result<CoverSeq> {
    let n = tree.spec().dim();
    let gaps = GapTable::from_formulas(tree.spec())?;
    let mut pieces: Vec<Aabb> = Vec::with_capacity(count);
    for h in 1..=count as u64 {
        let t = target(tree, &pieces, h);
        let side = Scalar::min_of(root_lower(&piece_volume(tree, &gaps, eps, h), n as u32), t.side().clone());
        pieces.push(Aabb::cube_at(&t.lo(), &side));
    }
    CoverSeq::new(n, eps.clone(), true, pieces)
}

/// Slabs spanning the first axis, as thick as the budget allows in the
/// remaining axes, through the leftmost untouched cube of each level. In
/// one dimension these are plain intervals.
pub fn strip_cover(tree: &DustTree, eps: &Scalar, count: usize) -> Result<CoverSeq> {
    let n = tree.spec().dim();
    let gaps = GapTable::from_formulas(tree.spec())?;
    let mut pieces: Vec<Aabb> = Vec::with_capacity(count);
    for h in 1..=count as u64 {
        let t = target(tree, &pieces, h);
        let vol = piece_volume(tree, &gaps, eps, h);
        let lo = t.lo();
        let piece = if n == 1 {
            Aabb::new(vec![(lo[0].clone(), &lo[0] + &vol)])?
        } else {
            let w = root_lower(&vol, n as u32 - 1);
            let mut bounds = vec![(Scalar::zero(), Scalar::one())];
            bounds.extend(lo[1..].iter().map(|x| (x.clone(), x + &w)));
            Aabb::new(bounds)?
        };
        pieces.push(piece.clamp_unit());
    }
    CoverSeq::new(n, eps.clone(), false, pieces)
}

/// Uniform rational in `[0,1)` with 32-bit resolution.
fn unit(rng: &mut Pcg64) -> Scalar {
    Scalar::new(rng.next_u32(), 1u64 << 32).expect("nonzero denominator")
}

/// Boxes of random aspect ratio and random position, each anchored inside a
/// random cube of its level. Deterministic in `seed`.
pub fn random_cover(tree: &DustTree, eps: &Scalar, count: usize, seed: u64) -> Result<CoverSeq> {
    let n = tree.spec().dim();
    let gaps = GapTable::from_formulas(tree.spec())?;
    let mut rng = Pcg64::new(seed as u128, 0xa02b_dbf7_bb3c_0a7a_c28f_a16a_64ab_f96d);
    let mut pieces: Vec<Aabb> = Vec::with_capacity(count);
    for h in 1..=count as u64 {
        let k = bucket_of(h).min(tree.depth());
        let level = tree.level(k)?;
        let t = &level[(rng.next_u64() % level.len() as u64) as usize];
        // volume in (vol/2, vol]
        let vol = piece_volume(tree, &gaps, eps, h) * (Scalar::one() + unit(&mut rng)) / Scalar::int(2);
        let r = root_lower(&vol, n as u32);
        let mut sides: Vec<Scalar> = (0..n.saturating_sub(1))
            .map(|_| {
                let e = (rng.next_u32() % 9) as i32 - 4;
                &r * Scalar::int(2).pow(e)
            })
            .collect();
        let rest: Scalar = sides.iter().product();
        sides.push(&vol / rest);
        let bounds = t
            .lo()
            .iter()
            .zip(&sides)
            .map(|(x, s)| {
                let start = x + unit(&mut rng) * t.side();
                (start.clone(), start + s)
            })
            .collect();
        pieces.push(Aabb::new(bounds)?.clamp_unit());
    }
    CoverSeq::new(n, eps.clone(), false, pieces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dust::{generate, DustSpec};

    #[test]
    fn adversaries_respect_budget() {
        let p = Precision::default();
        let tree = generate(&DustSpec::new(2, 3, 3).unwrap()).unwrap();
        let eps = crate::dust::epsilon_star_lower(tree.spec(), &p).unwrap();
        for cover in [
            swallow_cover(&tree, &eps, 4).unwrap(),
            strip_cover(&tree, &eps, 4).unwrap(),
            random_cover(&tree, &eps, 4, 7).unwrap(),
        ] {
            assert!(cover.first_budget_violation().is_none());
            assert!(cover.pieces().iter().all(|b| !crate::geometry::volume(b).is_zero()));
        }
    }

    #[test]
    fn random_cover_is_deterministic() {
        let tree = generate(&DustSpec::new(1, 3, 2).unwrap()).unwrap();
        let e = Scalar::ratio(1, 81);
        assert_eq!(random_cover(&tree, &e, 3, 1).unwrap(), random_cover(&tree, &e, 3, 1).unwrap());
    }
}
