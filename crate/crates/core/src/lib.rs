//! Exact-arithmetic machinery for microscopic sets in the unit cube.
//!
//! A set `E` in `R^n` is *microscopic* when for every `eps` in `(0,1)` it can
//! be covered by boxes `I_1, I_2, ...` with `vol(I_k) <= eps^k`, and
//! *strongly microscopic* when the boxes can be taken to be cubes. This crate
//! works with finite, exactly checkable versions of those objects:
//!
//! * [`geometry`] and [`digital`]: rational boxes, cubes and digital sets,
//!   with exact volumes, squared distances and coverage decisions.
//! * [`hausdorff`]: certified Hausdorff-distance brackets.
//! * [`covers`]: cover certificates, their verifier, greedy searches and the
//!   basic-open-set machinery of the Vietoris topology.
//! * [`dust`]: a Cantor dust of Hausdorff dimension zero that is not
//!   microscopic, with a refuter that produces survivor certificates
//!   against concrete covers.
//! * [`baire`]: seeded sampling experiments over random digital sets.
//!
//! Every verdict is computed in exact rationals. Irrational quantities
//! (roots) appear only as directed-rounding enclosures, see [`enclose`].

pub mod baire;
pub mod covers;
pub mod digital;
pub mod dust;
pub mod enclose;
pub mod error;
pub mod geometry;
pub mod hausdorff;
pub mod io;
pub mod scalar;

pub use covers::{
    ball_membership, greedy_strong_cover, hmeasure_upper_from_cover, ks_membership, lemma_epsilon,
    merge_covers, strong_budget_sidesum, verify_cover, BallSpec, CoverReport, CoverSeq, SearchFailure,
};
pub use digital::DigitalSet;
pub use dust::{DustSpec, DustTree, GapTable, SurvivorCertificate};
pub use baire::{SampleSpec, TypicalityReport};
pub use enclose::{Enclosure, Precision};
pub use error::{Error, Result};
pub use geometry::{covers_box, diam_sq, dist_sq, min_side, volume, Aabb, Cube, Point};
pub use hausdorff::{hausdorff_bracket, hausdorff_bracket_points, HBracket};
pub use scalar::Scalar;
