use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bucket_of, epsilon_star_lower, DustSpec, DustTree, GapTable, Word};
use crate::covers::CoverSeq;
use crate::enclose::Precision;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{box_dist_sq, volume, Aabb};
use crate::scalar::Scalar;

/// Evidence that a finite cover prefix misses a point of the dust: the
/// cube named by `survivor_word` is at positive distance from each of the
/// first `checked_prefix` pieces, and so are all its ancestors from the
/// pieces relevant to their level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurvivorCertificate {
    pub spec: DustSpec,
    pub eps: Scalar,
    pub checked_prefix: usize,
    pub survivor_word: Word,
    pub survivor_corner: Vec<Scalar>,
    pub survivor_side: Scalar,
    /// Surviving cubes per level, `level_counts[k - 1]` for level `k`.
    pub level_counts: Vec<u64>,
}

/// Every cube of some level was hit. Under a valid budget this contradicts
/// the construction, so it signals a bug rather than a real cover.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefuterFailure {
    pub level: u32,
    pub examined: usize,
}

/// Last position `h` with `h < (k+1)^2 / 4`.
fn last_position(k: u32) -> usize {
    let k1 = k as usize + 1;
    (k1 * k1 - 1) / 4
}

/// Number of pieces a depth-`depth` refutation looks at.
pub fn examined_prefix(depth: u32, cover_len: usize) -> usize {
    cover_len.min(last_position(depth))
}

/// Surviving flags per level for the chain: a cube survives level `k` if
/// its parent survived and it keeps positive distance from every piece at
/// a position below `(k+1)^2 / 4`.
fn chain(tree: &DustTree, pieces: &[Aabb]) -> Vec<Vec<bool>> {
    let m = tree.spec().corners() as usize;
    let mut out: Vec<Vec<bool>> = Vec::with_capacity(tree.depth() as usize);
    for k in 1..=tree.depth() {
        let level = tree.level(k).expect("k within depth");
        let relevant = &pieces[..pieces.len().min(last_position(k))];
        let parent = out.last();
        let alive: Vec<bool> = level
            .par_iter()
            .enumerate()
            .map(|(i, q)| {
                parent.is_none_or(|p| p[i / m])
                    && relevant.iter().all(|piece| box_dist_sq(q.as_box(), piece).is_positive())
            })
            .collect();
        out.push(alive);
    }
    out
}

fn check_premises(tree: &DustTree, cover: &CoverSeq, prec: &Precision) -> Result<usize> {
    let spec = tree.spec();
    check_dim(spec.dim(), cover.dim())?;
    if let Some(v) = cover.first_budget_violation() {
        return Err(Error::invalid(format!("cover breaks its budget: {v:?}")));
    }
    let eps_star = epsilon_star_lower(spec, prec)?;
    if cover.eps() > &eps_star {
        return Err(Error::invalid(format!(
            "cover eps {} exceeds the admissible threshold {eps_star}",
            cover.eps()
        )));
    }
    let examined = examined_prefix(spec.depth(), cover.len());
    let gaps = GapTable::from_formulas(spec)?;
    for (i, piece) in cover.pieces()[..examined].iter().enumerate() {
        let h = i as u64 + 1;
        let k = bucket_of(h);
        let d = &gaps.row(k).expect("bucket within depth").d_min;
        let cap = d.powu(spec.dim() as u64);
        if volume(piece) >= cap {
            return Err(Error::invalid(format!(
                "piece {h} has volume {} not below D_{k}^n = {cap}",
                volume(piece)
            )));
        }
    }
    Ok(examined)
}

/// Runs the survivor chain of the dust against the first pieces of `cover`.
///
/// Premises (budget, `eps` below the threshold, each examined piece smaller
/// than `D_k^n` for its bucket `k`) are errors when they fail. A level with
/// no survivors comes back as `Ok(Err(_))`.
pub fn survivor_refute(
    tree: &DustTree,
    cover: &CoverSeq,
    prec: &Precision,
) -> Result<Result<SurvivorCertificate, RefuterFailure>> {
    let examined = check_premises(tree, cover, prec)?;
    let flags = chain(tree, &cover.pieces()[..examined]);
    let mut level_counts = Vec::with_capacity(flags.len());
    for (k, alive) in flags.iter().enumerate() {
        let count = alive.iter().filter(|&&a| a).count() as u64;
        if count == 0 {
            return Ok(Err(RefuterFailure {
                level: k as u32 + 1,
                examined,
            }));
        }
        level_counts.push(count);
    }
    let depth = tree.depth();
    let idx = flags
        .last()
        .and_then(|a| a.iter().position(|&x| x))
        .expect("nonempty last level");
    let cube = &tree.level(depth)?[idx];
    Ok(Ok(SurvivorCertificate {
        spec: tree.spec().clone(),
        eps: cover.eps().clone(),
        checked_prefix: examined,
        survivor_word: tree.word(depth, idx),
        survivor_corner: cube.lo(),
        survivor_side: cube.side().clone(),
        level_counts,
    }))
}

/// Re-checks a certificate from scratch against its tree and cover.
/// Returns the list of problems found; empty means valid.
pub fn validate_certificate(tree: &DustTree, cover: &CoverSeq, cert: &SurvivorCertificate) -> Result<Vec<String>> {
    let mut problems = Vec::new();
    if &cert.spec != tree.spec() {
        problems.push("certificate spec differs from tree spec".to_string());
        return Ok(problems);
    }
    if &cert.eps != cover.eps() {
        problems.push("certificate eps differs from cover eps".to_string());
    }
    let depth = tree.depth();
    let expected = examined_prefix(depth, cover.len());
    if cert.checked_prefix != expected {
        problems.push(format!("checked_prefix {} but {} pieces apply", cert.checked_prefix, expected));
    }
    let prefix = &cover.pieces()[..cert.checked_prefix.min(cover.len())];
    if cert.survivor_word.len() != depth as usize {
        problems.push(format!("survivor word has length {}, expected {depth}", cert.survivor_word.len()));
        return Ok(problems);
    }
    let cube = match tree.cube(&cert.survivor_word) {
        Ok(c) => c,
        Err(e) => {
            problems.push(format!("survivor word invalid: {e}"));
            return Ok(problems);
        }
    };
    if cube.lo() != cert.survivor_corner || cube.side() != &cert.survivor_side {
        problems.push("survivor cube does not match its word".to_string());
    }
    for j in 1..=depth {
        let anc = tree.cube(&cert.survivor_word[..j as usize])?;
        let upto = prefix.len().min(last_position(j));
        for (i, piece) in prefix[..upto].iter().enumerate() {
            if !box_dist_sq(anc.as_box(), piece).is_positive() {
                problems.push(format!("level {j} ancestor meets piece {}", i + 1));
            }
        }
    }
    let counts: Vec<u64> = chain(tree, prefix)
        .iter()
        .map(|a| a.iter().filter(|&&x| x).count() as u64)
        .collect();
    if counts != cert.level_counts {
        problems.push(format!("level counts {:?}, recomputed {:?}", cert.level_counts, counts));
    }
    Ok(problems)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dust::{generate, swallow_cover};

    fn p() -> Precision {
        Precision::default()
    }

    #[test]
    fn empty_cover_keeps_everything() {
        let tree = generate(&DustSpec::new(2, 3, 2).unwrap()).unwrap();
        let cover = CoverSeq::new(2, Scalar::ratio(1, 1_000_000_000_000), false, vec![]).unwrap();
        let cert = survivor_refute(&tree, &cover, &p()).unwrap().unwrap();
        assert_eq!(cert.level_counts, vec![4, 16]);
        assert_eq!(cert.checked_prefix, 0);
        assert!(validate_certificate(&tree, &cover, &cert).unwrap().is_empty());
    }

    #[test]
    fn greedy_line_adversary() {
        let tree = generate(&DustSpec::new(1, 3, 4).unwrap()).unwrap();
        let cover = swallow_cover(&tree, &Scalar::ratio(1, 81), 6).unwrap();
        let cert = survivor_refute(&tree, &cover, &p()).unwrap().unwrap();
        assert_eq!(cert.checked_prefix, 6);
        assert_eq!(cert.survivor_word[0], 2);
        assert!(validate_certificate(&tree, &cover, &cert).unwrap().is_empty());
        for piece in &cover.pieces()[..6] {
            let q = tree.cube(&cert.survivor_word).unwrap();
            assert!(box_dist_sq(q.as_box(), piece).is_positive());
        }
    }

    #[test]
    fn tampered_certificate_is_rejected() {
        let tree = generate(&DustSpec::new(1, 3, 3).unwrap()).unwrap();
        let cover = swallow_cover(&tree, &Scalar::ratio(1, 81), 3).unwrap();
        let mut cert = survivor_refute(&tree, &cover, &p()).unwrap().unwrap();
        cert.survivor_word = vec![1, 1, 1];
        cert.survivor_corner = vec![Scalar::zero()];
        assert!(!validate_certificate(&tree, &cover, &cert).unwrap().is_empty());
    }

    #[test]
    fn premises_are_enforced() {
        let tree = generate(&DustSpec::new(1, 3, 2).unwrap()).unwrap();
        let loose = CoverSeq::new(1, Scalar::ratio(1, 2), false, vec![]).unwrap();
        assert!(survivor_refute(&tree, &loose, &p()).is_err());
        let over = CoverSeq::new(
            1,
            Scalar::ratio(1, 81),
            false,
            vec![Aabb::new(vec![(Scalar::zero(), Scalar::ratio(1, 2))]).unwrap()],
        )
        .unwrap();
        assert!(survivor_refute(&tree, &over, &p()).is_err());
    }

    #[test]
    fn failure_is_data() {
        // a cover ignoring the budget premise is refused; feeding the chain
        // a covering piece directly shows the failure path
        let tree = generate(&DustSpec::new(1, 3, 2).unwrap()).unwrap();
        let flags = chain(&tree, &[Aabb::unit(1)]);
        assert!(flags[1].iter().all(|a| !a));
    }
}
