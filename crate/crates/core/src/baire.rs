//! Sampling experiments around typical compact sets.
//!
//! Random sets are drawn cell by cell: each cell of the depth-`m` grid is
//! kept independently with probability `density`. The generator is PCG
//! XSL-RR 128/64 (`rand_pcg::Pcg64`) seeded with `state = seed` and
//! `stream = trial`; cells are visited in lexicographic index order and a
//! cell is kept when `u * q < p * 2^64` for the next output `u` and
//! `density = p/q`. The stream is bit-exact across platforms.
//!
//! "Typical" in the category sense has no probability measure behind it,
//! so the frequencies reported here illustrate finite-depth behaviour and
//! neither prove nor refute any category statement.

use num_bigint::BigInt;
use rand_core::RngCore;
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covers::{ks_membership, verify_cover, KsOutcome};
use crate::digital::{grid_size, DigitalSet};
use crate::enclose::{isqrt, Precision};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::hausdorff::{hausdorff_bracket_points, HBracket};
use crate::scalar::Scalar;

const MAX_GRID: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub seed: u64,
    pub n: usize,
    pub b: u64,
    pub depth: u32,
    pub density: Scalar,
    pub trials: u32,
}

impl SampleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.b < 2 {
            return Err(Error::invalid("need n >= 1 and b >= 2"));
        }
        if !self.density.is_positive() || self.density > 1 {
            return Err(Error::invalid("density must lie in (0,1]"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        let total = grid_size(self.b, self.depth)
            .and_then(|g| g.checked_pow(self.n as u32))
            .filter(|&t| t <= MAX_GRID);
        if total.is_none() {
            return Err(Error::invalid("grid too large to sample"));
        }
        Ok(())
    }
}

/// The set drawn for one trial.
pub fn sample_trial(spec: &SampleSpec, trial: u32) -> Result<DigitalSet> {
    spec.validate()?;
    let mut rng = Pcg64::new(spec.seed as u128, trial as u128);
    let side = grid_size(spec.b, spec.depth).expect("validated");
    let p = spec.density.numer() << 64;
    let q = spec.density.denom();
    let mut cells = Vec::new();
    let mut idx = vec![0u64; spec.n];
    loop {
        if BigInt::from(rng.next_u64()) * q < p {
            cells.push(idx.clone());
        }
        // odometer, last axis fastest
        let mut axis = spec.n;
        loop {
            if axis == 0 {
                if cells.is_empty() {
                    cells.push(vec![0; spec.n]);
                }
                return DigitalSet::new(spec.n, spec.b, spec.depth, cells);
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < side {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// The set drawn for trial 0.
pub fn sample_compact(spec: &SampleSpec) -> Result<DigitalSet> {
    sample_trial(spec, 0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skeleton {
    pub depth: u32,
    pub points: Vec<Point>,
}

/// Centers of `e` refined until half a cell diagonal is at most `delta`.
/// Every point of `e` lies within `delta` of some center, and each center
/// lies in `e`, so the Hausdorff distance is at most `delta`.
pub fn finite_skeleton(e: &DigitalSet, delta: &Scalar) -> Result<Skeleton> {
    if !delta.is_positive() {
        return Err(Error::invalid("delta must be positive"));
    }
    let n = Scalar::int(e.dim() as u64);
    let target = delta * delta * Scalar::int(4);
    let mut depth = e.depth();
    loop {
        let w = Scalar::int(e.base()).pow(-(depth as i32));
        if &n * &w * &w <= target {
            break;
        }
        depth += 1;
    }
    let fine = e.refine(depth)?;
    let points = fine.cells().iter().map(|c| fine.cell_center(c)).collect();
    Ok(Skeleton { depth, points })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    /// A verified strong cover prefix.
    Witness,
    /// The side-sum bound rules out every strong cover.
    Refuted,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub s: u64,
    pub outcome: OutcomeKind,
    pub pieces: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u32,
    pub cells: usize,
    pub outcomes: Vec<TrialOutcome>,
    pub skeleton_points: usize,
    pub skeleton_bracket: HBracket,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frequencies {
    pub s: u64,
    pub witness: Scalar,
    pub refuted: Scalar,
    pub unknown: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypicalityReport {
    pub spec: SampleSpec,
    pub max_pieces: usize,
    pub skeleton_delta: Scalar,
    pub records: Vec<TrialRecord>,
    pub frequencies: Vec<Frequencies>,
    pub note: String,
}

const NOTE: &str = "Illustration only. Cells are kept independently at random, while typicality \
in the hyperspace of compact sets is a Baire-category notion with no underlying probability \
measure. Finite-depth frequencies neither prove nor refute a category statement.";

fn run_trial(
    spec: &SampleSpec,
    trial: u32,
    s_list: &[u64],
    max_pieces: usize,
    delta: &Scalar,
    prec: &Precision,
) -> Result<TrialRecord> {
    let e = sample_trial(spec, trial)?;
    let mut outcomes = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let out = match ks_membership(&e, s, max_pieces, prec)? {
            KsOutcome::Witness { cover } => {
                if !verify_cover(&e, &cover)?.is_ok() {
                    return Err(Error::invariant(format!("trial {trial}: witness for s={s} fails to verify")));
                }
                TrialOutcome {
                    s,
                    outcome: OutcomeKind::Witness,
                    pieces: Some(cover.len()),
                }
            }
            KsOutcome::Unknown { reason } => TrialOutcome {
                s,
                outcome: if reason.is_refutation() {
                    OutcomeKind::Refuted
                } else {
                    OutcomeKind::Unknown
                },
                pieces: None,
            },
        };
        outcomes.push(out);
    }
    let skel = finite_skeleton(&e, delta)?;
    let bracket = hausdorff_bracket_points(&e, &skel.points, skel.depth, prec)?;
    if bracket.hi > delta + &bracket.width_bound {
        return Err(Error::invariant(format!("trial {trial}: skeleton farther than delta")));
    }
    Ok(TrialRecord {
        trial,
        cells: e.len(),
        outcomes,
        skeleton_points: skel.points.len(),
        skeleton_bracket: bracket,
    })
}

/// Runs every trial, tests strong coverability for each `s`, and checks a
/// finite skeleton at `delta = ceil(sqrt(n)) * b^(-depth) / 2`.
pub fn typicality_report(
    spec: &SampleSpec,
    s_list: &[u64],
    max_pieces: usize,
    prec: &Precision,
) -> Result<TypicalityReport> {
    spec.validate()?;
    if s_list.iter().any(|&s| s < 2) {
        return Err(Error::invalid("every s must be at least 2"));
    }
    let n = spec.n as u64;
    let root_n = isqrt(n) + u64::from(isqrt(n).pow(2) < n);
    let delta = Scalar::int(root_n) * Scalar::int(spec.b).pow(-(spec.depth as i32)) / Scalar::int(2);
    let records = (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, t, s_list, max_pieces, &delta, prec))
        .collect::<Result<Vec<_>>>()?;
    let total = Scalar::int(spec.trials);
    let frequencies = s_list
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let count = |kind: OutcomeKind| {
                Scalar::int(records.iter().filter(|r| r.outcomes[i].outcome == kind).count() as u64) / &total
            };
            Frequencies {
                s,
                witness: count(OutcomeKind::Witness),
                refuted: count(OutcomeKind::Refuted),
                unknown: count(OutcomeKind::Unknown),
            }
        })
        .collect();
    Ok(TypicalityReport {
        spec: spec.clone(),
        max_pieces,
        skeleton_delta: delta,
        records,
        frequencies,
        note: NOTE.to_string(),
    })
}

impl TypicalityReport {
    /// One row per trial.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,cells,skeleton_points,skeleton_lo,skeleton_hi");
        for f in &self.frequencies {
            out.push_str(&format!(",s{}", f.s));
        }
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}",
                r.trial, r.cells, r.skeleton_points, r.skeleton_bracket.lo, r.skeleton_bracket.hi
            ));
            for o in &r.outcomes {
                let label = match o.outcome {
                    OutcomeKind::Witness => "witness",
                    OutcomeKind::Refuted => "refuted",
                    OutcomeKind::Unknown => "unknown",
                };
                out.push(',');
                out.push_str(label);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(density: Scalar, trials: u32) -> SampleSpec {
        SampleSpec {
            seed: 42,
            n: 2,
            b: 3,
            depth: 3,
            density,
            trials,
        }
    }

    #[test]
    fn full_density_is_full_grid() {
        let e = sample_compact(&spec(Scalar::one(), 1)).unwrap();
        assert_eq!(e.len(), 729);
    }

    #[test]
    fn deterministic() {
        let s = spec(Scalar::ratio(1, 10), 1);
        assert_eq!(sample_compact(&s).unwrap(), sample_compact(&s).unwrap());
        assert_ne!(sample_trial(&s, 0).unwrap(), sample_trial(&s, 1).unwrap());
    }

    #[test]
    fn empty_draw_forces_first_cell() {
        let mut s = spec(Scalar::new(1, BigInt::from(1u64) << 60).unwrap(), 1);
        s.depth = 1;
        let e = sample_compact(&s).unwrap();
        assert_eq!(e.cells().iter().collect::<Vec<_>>(), vec![&vec![0, 0]]);
    }

    #[test]
    fn skeleton_examples() {
        let e = DigitalSet::new(1, 3, 1, vec![vec![0], vec![2]]).unwrap();
        let sk = finite_skeleton(&e, &Scalar::ratio(1, 6)).unwrap();
        let xs: Vec<_> = sk.points.iter().map(|p| p.coords()[0].clone()).collect();
        assert_eq!(xs, vec![Scalar::ratio(1, 6), Scalar::ratio(5, 6)]);
        let b = hausdorff_bracket_points(&e, &sk.points, 2, &Precision::default()).unwrap();
        assert!(b.hi <= Scalar::ratio(1, 6) + &b.width_bound);

        let one = DigitalSet::new(2, 3, 1, vec![vec![1, 1]]).unwrap();
        let sk = finite_skeleton(&one, &Scalar::ratio(1, 4)).unwrap();
        assert_eq!(sk.points.len(), 1);
        let half = finite_skeleton(&one, &Scalar::ratio(1, 8)).unwrap();
        assert!(half.points.len() <= 9);
        assert!(finite_skeleton(&one, &Scalar::zero()).is_err());
    }

    #[test]
    fn report_accounting() {
        let s = spec(Scalar::ratio(1, 100), 4);
        let r = typicality_report(&s, &[2, 5], 64, &Precision::default()).unwrap();
        assert_eq!(r.records.len(), 4);
        for f in &r.frequencies {
            assert_eq!(&f.witness + &f.refuted + &f.unknown, Scalar::one());
        }
        assert_eq!(r.frequencies[0].witness, Scalar::one());
        assert_eq!(r.to_csv().lines().count(), 5);
        assert_eq!(r, typicality_report(&s, &[2, 5], 64, &Precision::default()).unwrap());
    }

    #[test]
    fn full_grid_is_not_witnessed() {
        let mut s = spec(Scalar::one(), 1);
        s.depth = 1;
        let r = typicality_report(&s, &[2], 16, &Precision::default()).unwrap();
        assert_ne!(r.records[0].outcomes[0].outcome, OutcomeKind::Witness);
    }
}
