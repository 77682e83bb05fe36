//! Microscopic cover certificates.
//!
//! A [`CoverSeq`] is a finite prefix of a cover sequence. A verified finite
//! cover is a genuine cover; a failed finite search is only "unknown",
//! except where a separate bound ([`strong_budget_sidesum`]) rules out every
//! strong cover.

mod ball;
mod cover;
mod search;

pub use ball::{
    ball_membership, ball_membership_boxes, default_witnesses, lemma_epsilon, open_union_covers, BallSpec,
};
pub use cover::{merge_covers, verify_cover, CoverReport, CoverSeq, Violation, ViolationReason};
pub use search::{
    greedy_strong_cover, hmeasure_upper_from_cover, ks_membership, strong_budget_sidesum, KsOutcome,
    SearchFailure,
};
