use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::DustSpec;
use crate::digital::DigitalSet;
use crate::error::{Error, Result};
use crate::geometry::{box_dist_sq, volume, Cube};
use crate::scalar::Scalar;

/// Letters `1..=2^n`, outermost first.
pub type Word = Vec<u32>;

const MAX_CUBES: u64 = 1 << 22;

/// All levels of the construction up to the spec depth. Level `k` is stored
/// at index `k - 1` in lexicographic word order, so the children of the
/// cube at index `p` occupy `p * 2^n .. (p + 1) * 2^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DustTree {
    spec: DustSpec,
    levels: Vec<Vec<Cube>>,
}

/// Bit `axis` of the corner named by `letter`; axis 0 is the most
/// significant bit of `letter - 1`.
fn corner_bit(n: usize, letter: u32, axis: usize) -> bool {
    ((letter - 1) >> (n - 1 - axis)) & 1 == 1
}

fn child(parent_lo: &[Scalar], parent_side: &Scalar, side: &Scalar, letter: u32) -> Cube {
    let n = parent_lo.len();
    let offset = parent_side - side;
    let lo: Vec<Scalar> = (0..n)
        .map(|j| {
            if corner_bit(n, letter, j) {
                &parent_lo[j] + &offset
            } else {
                parent_lo[j].clone()
            }
        })
        .collect();
    Cube::new(&lo, side.clone()).expect("positive side")
}

/// Builds every level of the dust and re-verifies the structural invariants.
pub fn generate(spec: &DustSpec) -> Result<DustTree> {
    if let Err(v) = spec.validate() {
        return Err(Error::invalid(format!("inadmissible spec: {v:?}")));
    }
    let n = spec.dim();
    let total = (spec.depth() as u64)
        .checked_mul(n as u64)
        .filter(|&bits| bits < 63)
        .map(|bits| 1u64 << bits);
    if total.is_none_or(|t| t > MAX_CUBES) {
        return Err(Error::invalid("dust tree too large to materialize"));
    }

    let root_lo = vec![Scalar::zero(); n];
    let mut levels: Vec<Vec<Cube>> = Vec::with_capacity(spec.depth() as usize);
    for k in 1..=spec.depth() {
        let side = spec.side(k);
        let next: Vec<Cube> = match levels.last() {
            None => (1..=spec.corners())
                .map(|i| child(&root_lo, &Scalar::one(), &side, i))
                .collect(),
            Some(prev) => prev
                .iter()
                .flat_map(|p| {
                    let lo = p.lo();
                    let ps = p.side().clone();
                    let side = side.clone();
                    (1..=spec.corners()).map(move |i| child(&lo, &ps, &side, i))
                })
                .collect(),
        };
        levels.push(next);
    }
    let tree = DustTree {
        spec: spec.clone(),
        levels,
    };
    tree.verify()?;
    Ok(tree)
}

impl DustTree {
    pub fn spec(&self) -> &DustSpec {
        &self.spec
    }

    pub fn depth(&self) -> u32 {
        self.spec.depth()
    }

    pub fn level(&self, k: u32) -> Result<&[Cube]> {
        if k == 0 || k > self.depth() {
            return Err(Error::invalid(format!("level {k} outside 1..={}", self.depth())));
        }
        Ok(&self.levels[k as usize - 1])
    }

    /// Word of the cube stored at `index` on level `k`.
    pub fn word(&self, k: u32, index: usize) -> Word {
        let m = self.spec.corners() as usize;
        let mut out = vec![0; k as usize];
        let mut i = index;
        for slot in out.iter_mut().rev() {
            *slot = (i % m) as u32 + 1;
            i /= m;
        }
        out
    }

    /// Index on level `word.len()` of the cube named by `word`.
    pub fn index_of(&self, word: &[u32]) -> Result<usize> {
        let m = self.spec.corners();
        if word.is_empty() || word.len() > self.depth() as usize {
            return Err(Error::invalid("word length outside tree depth"));
        }
        let mut idx = 0usize;
        for &letter in word {
            if letter == 0 || letter > m {
                return Err(Error::invalid(format!("letter {letter} outside 1..={m}")));
            }
            idx = idx * m as usize + (letter - 1) as usize;
        }
        Ok(idx)
    }

    pub fn cube(&self, word: &[u32]) -> Result<&Cube> {
        let idx = self.index_of(word)?;
        Ok(&self.levels[word.len() - 1][idx])
    }

    /// Re-checks counts, sides, volumes, containment, the single shared
    /// vertex with the parent and sibling separation. Separation of
    /// non-siblings follows from containment in separated parents.
    pub fn verify(&self) -> Result<()> {
        let spec = &self.spec;
        let m = spec.corners() as usize;
        let unit = Cube::new(&vec![Scalar::zero(); spec.dim()], Scalar::one())?;
        for k in 1..=self.depth() {
            let level = &self.levels[k as usize - 1];
            let expected = 1usize << (spec.dim() * k as usize);
            if level.len() != expected {
                return Err(Error::invariant(format!(
                    "level {k}: {} cubes, expected {expected}",
                    level.len()
                )));
            }
            let side = spec.side(k);
            let vol = spec.volume(k);
            for (i, cube) in level.iter().enumerate() {
                if cube.side() != &side || volume(cube.as_box()) != vol {
                    return Err(Error::invariant(format!("level {k} cube {i}: wrong size")));
                }
                let parent = if k == 1 {
                    &unit
                } else {
                    &self.levels[k as usize - 2][i / m]
                };
                if !parent.as_box().contains_box(cube.as_box()) {
                    return Err(Error::invariant(format!("level {k} cube {i}: escapes parent")));
                }
                let pv = parent.as_box().vertices();
                let shared = cube.as_box().vertices().iter().filter(|v| pv.contains(v)).count();
                if shared != 1 {
                    return Err(Error::invariant(format!(
                        "level {k} cube {i}: shares {shared} vertices with parent"
                    )));
                }
            }
            for family in level.chunks(m) {
                for (a, qa) in family.iter().enumerate() {
                    for qb in &family[a + 1..] {
                        if !box_dist_sq(qa.as_box(), qb.as_box()).is_positive() {
                            return Err(Error::invariant(format!("level {k}: siblings touch")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Minimum squared distance between distinct siblings on level `k`.
    pub fn min_sibling_dist_sq(&self, k: u32) -> Result<Scalar> {
        let m = self.spec.corners() as usize;
        let level = self.level(k)?;
        let mut best: Option<Scalar> = None;
        for family in level.chunks(m) {
            for (a, qa) in family.iter().enumerate() {
                for qb in &family[a + 1..] {
                    let d = box_dist_sq(qa.as_box(), qb.as_box());
                    best = Some(match best {
                        Some(b) => Scalar::min_of(b, d),
                        None => d,
                    });
                }
            }
        }
        best.ok_or_else(|| Error::invalid("level has a single cube"))
    }

    /// Minimum squared distance over all pairs on level `k`. Quadratic.
    pub fn min_pair_dist_sq(&self, k: u32) -> Result<Scalar> {
        use rayon::prelude::*;
        let level = self.level(k)?;
        level
            .par_iter()
            .enumerate()
            .filter_map(|(a, qa)| {
                level[a + 1..]
                    .iter()
                    .map(|qb| box_dist_sq(qa.as_box(), qb.as_box()))
                    .reduce(Scalar::min_of)
            })
            .reduce_with(Scalar::min_of)
            .ok_or_else(|| Error::invalid("level has a single cube"))
    }

    /// Level `k` as a digital set at depth `k^2`: every level-`k` cube is
    /// exactly one grid cell.
    pub fn level_digital(&self, k: u32) -> Result<DigitalSet> {
        let m = k * k;
        let scale = Scalar::int(BigInt::from(self.spec.base()).pow(m));
        let cells = self
            .level(k)?
            .iter()
            .map(|q| {
                q.lo()
                    .iter()
                    .map(|x| {
                        let v = x * &scale;
                        v.floor()
                            .to_u64()
                            .ok_or_else(|| Error::invalid("grid too fine for 64-bit cells"))
                    })
                    .collect::<Result<Vec<u64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        DigitalSet::new(self.spec.dim(), self.spec.base(), m, cells)
    }
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    word: Word,
    corner: Vec<Scalar>,
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    spec: DustSpec,
    levels: Vec<Vec<NodeJson>>,
}

impl Serialize for DustTree {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let levels = self
            .levels
            .iter()
            .enumerate()
            .map(|(k, level)| {
                level
                    .iter()
                    .enumerate()
                    .map(|(i, q)| NodeJson {
                        word: self.word(k as u32 + 1, i),
                        corner: q.lo(),
                    })
                    .collect()
            })
            .collect();
        TreeJson {
            spec: self.spec.clone(),
            levels,
        }
        .serialize(serializer)
    }
}

/// Parsing regenerates the tree from its spec and rejects any document whose
/// words or corners disagree with the construction.
impl<'de> Deserialize<'de> for DustTree {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = TreeJson::deserialize(deserializer)?;
        let tree = generate(&raw.spec).map_err(D::Error::custom)?;
        if raw.levels.len() != tree.levels.len() {
            return Err(D::Error::custom("level count does not match spec depth"));
        }
        for (k, (got, want)) in raw.levels.iter().zip(&tree.levels).enumerate() {
            if got.len() != want.len() {
                return Err(D::Error::custom(format!("level {}: wrong cube count", k + 1)));
            }
            for (i, (node, cube)) in got.iter().zip(want).enumerate() {
                if node.word != tree.word(k as u32 + 1, i) || node.corner != cube.lo() {
                    return Err(D::Error::custom(format!(
                        "level {} entry {i} disagrees with the construction",
                        k + 1
                    )));
                }
            }
        }
        Ok(tree)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Aabb;

    fn s(p: i64, q: i64) -> Scalar {
        Scalar::ratio(p, q)
    }

    #[test]
    fn cantor_first_stage() {
        let t = generate(&DustSpec::new(1, 3, 1).unwrap()).unwrap();
        let l = t.level(1).unwrap();
        assert_eq!(l[0].as_box(), &Aabb::new(vec![(s(0, 1), s(1, 3))]).unwrap());
        assert_eq!(l[1].as_box(), &Aabb::new(vec![(s(2, 3), s(1, 1))]).unwrap());
    }

    #[test]
    fn planar_level_one_distances() {
        let t = generate(&DustSpec::new(2, 3, 1).unwrap()).unwrap();
        let l = t.level(1).unwrap();
        for (a, qa) in l.iter().enumerate() {
            for qb in &l[a + 1..] {
                let d = box_dist_sq(qa.as_box(), qb.as_box());
                assert!(d == s(1, 9) || d == s(2, 9), "{d}");
            }
        }
    }

    #[test]
    fn planar_level_two() {
        let t = generate(&DustSpec::new(2, 3, 2).unwrap()).unwrap();
        let l = t.level(2).unwrap();
        assert_eq!(l.len(), 16);
        assert!(l.iter().all(|q| q.side() == &s(1, 81)));
        // word (4,1): origin corner of the top-right parent
        let q = t.cube(&[4, 1]).unwrap();
        assert_eq!(q.lo(), vec![s(2, 3), s(2, 3)]);
        let q = t.cube(&[2, 2]).unwrap();
        assert_eq!(q.lo(), vec![s(0, 1), s(1, 1) - s(1, 81)]);
    }

    #[test]
    fn words_and_indices_agree() {
        let t = generate(&DustSpec::new(2, 3, 3).unwrap()).unwrap();
        for i in 0..64 {
            let w = t.word(3, i);
            assert_eq!(t.index_of(&w).unwrap(), i);
        }
        assert!(t.index_of(&[5]).is_err());
    }

    #[test]
    fn level_digital_is_exact() {
        let t = generate(&DustSpec::new(2, 3, 2).unwrap()).unwrap();
        let d = t.level_digital(2).unwrap();
        assert_eq!(d.len(), 16);
        assert_eq!(d.depth(), 4);
        assert!(d.cells().contains(&vec![80, 80]));
    }

    #[test]
    fn json_round_trip_and_tamper() {
        let t = generate(&DustSpec::new(1, 3, 2).unwrap()).unwrap();
        let j = serde_json::to_string(&t).unwrap();
        assert!(j.contains(r#"{"word":[2,1],"corner":["2/3"]}"#));
        let back: DustTree = serde_json::from_str(&j).unwrap();
        assert_eq!(back, t);
        let bad = j.replace(r#""corner":["2/3"]}"#, r#""corner":["1/2"]}"#);
        assert!(serde_json::from_str::<DustTree>(&bad).is_err());
    }
}
