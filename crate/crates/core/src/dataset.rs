//! Datasets of `(set, choice)` records, seeded sampling and the CSV text format.

use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::collection::Collection;
use crate::error::{Error, Result};
use crate::system::ChoiceSystem;

/// Header line of the dataset text format.
pub const DATASET_HEADER: &str = "set_index,choice";

/// A record is `(set index, chosen item)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    records: Vec<(usize, usize)>,
    seed: Option<u64>,
}

impl Dataset {
    /// Builds a dataset, rejecting records whose choice is outside its set
    /// or whose set is outside the collection.
    pub fn new(coll: &Collection, records: Vec<(usize, usize)>, seed: Option<u64>) -> Result<Self> {
        for (j, &(c, x)) in records.iter().enumerate() {
            if c >= coll.n_sets() {
                return Err(Error::InvalidParameter(format!("record {j}: set {c} is not in the collection")));
            }
            if coll.index_of(x, c).is_none() {
                return Err(Error::InvalidParameter(format!("record {j}: item {x} is not a member of set {c}")));
            }
        }
        Ok(Self { records, seed })
    }

    pub fn records(&self) -> &[(usize, usize)] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Counts per canonical index.
    pub fn counts(&self, coll: &Collection) -> Vec<u64> {
        let mut out = vec![0; coll.d()];
        for &(c, x) in &self.records {
            out[coll.index_of(x, c).expect("validated record")] += 1;
        }
        out
    }

    pub fn to_text(&self, coll: &Collection) -> String {
        let mut out = String::with_capacity(16 * self.records.len() + 32);
        out.push_str(DATASET_HEADER);
        out.push('\n');
        for &(c, x) in &self.records {
            let _ = writeln!(out, "{c},{}", coll.item_name(x));
        }
        out
    }

    /// Parses the dataset format. Records naming sets outside the collection are rejected.
    pub fn parse(text: &str, coll: &Collection) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, header)) if header.trim() == DATASET_HEADER => {}
            Some((i, _)) => {
                return Err(Error::Parse { line: i + 1, message: format!("expected header {DATASET_HEADER:?}") })
            }
            None => return Err(Error::Parse { line: 0, message: "empty dataset".into() }),
        }
        let mut records = Vec::new();
        for (i, raw) in lines {
            let line = i + 1;
            let (set, choice) = raw
                .trim()
                .split_once(',')
                .ok_or_else(|| Error::Parse { line, message: "expected set_index,choice".into() })?;
            let c: usize = set
                .trim()
                .parse()
                .map_err(|e| Error::Parse { line, message: format!("bad set index: {e}") })?;
            if c >= coll.n_sets() {
                return Err(Error::Parse { line, message: format!("set index {c} is outside the collection") });
            }
            let name = choice.trim();
            let x = coll
                .item_index(name)
                .filter(|&x| coll.index_of(x, c).is_some())
                .ok_or_else(|| Error::Parse { line, message: format!("{name:?} is not a member of set {c}") })?;
            records.push((c, x));
        }
        Ok(Self { records, seed: None })
    }
}

/// Mixes a base seed with a stream identifier (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic RNG for a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Categorical sampler over canonical indices.
#[derive(Debug, Clone)]
pub struct Sampler {
    dist: WeightedIndex<f64>,
    d: usize,
}

impl Sampler {
    pub fn new(probs: &[f64]) -> Result<Self> {
        let dist = WeightedIndex::new(probs)
            .map_err(|e| Error::InvalidDistribution(format!("cannot sample: {e}")))?;
        Ok(Self { dist, d: probs.len() })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.dist.sample(rng)
    }

    /// Count vector of `n` i.i.d. draws.
    pub fn counts<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> Vec<u32> {
        let mut out = vec![0u32; self.d];
        for _ in 0..n {
            out[self.dist.sample(rng)] += 1;
        }
        out
    }
}

/// Draws `n` i.i.d. records from `q`; identical seeds give identical datasets.
pub fn sample_dataset(q: &ChoiceSystem, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidParameter("dataset size N must be at least 1".into()));
    }
    let coll = q.collection();
    let sampler = Sampler::new(q.probs())?;
    let mut rng = rng_from_seed(seed);
    let records = (0..n)
        .map(|_| {
            let (x, c) = coll.pair(sampler.draw(&mut rng));
            (c, x)
        })
        .collect();
    Ok(Dataset { records, seed: Some(seed) })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::collection::presets;
    use crate::system::uniform_system;

    #[test]
    fn point_mass_gives_identical_records() {
        let coll = Arc::new(presets::triangle());
        let mut probs = vec![0.0; 6];
        probs[0] = 0.5;
        probs[2] = 0.25;
        probs[5] = 0.25;
        let q = ChoiceSystem::new(coll.clone(), probs).unwrap();
        let data = sample_dataset(&q, 200, 3).unwrap();
        let counts = data.counts(&coll);
        assert_eq!(counts[1] + counts[3] + counts[4], 0);

        let coll2 = Arc::new(Collection::parse("a,b").unwrap());
        let point = ChoiceSystem::new(coll2, vec![0.0, 1.0]).unwrap();
        let data = sample_dataset(&point, 50, 9).unwrap();
        assert!(data.records().iter().all(|&r| r == (0, 1)));
    }

    #[test]
    fn same_seed_same_dataset() {
        let coll = Arc::new(presets::twin_pairs());
        let p0 = uniform_system(&coll);
        assert_eq!(sample_dataset(&p0, 100, 42).unwrap(), sample_dataset(&p0, 100, 42).unwrap());
        assert_ne!(sample_dataset(&p0, 100, 42).unwrap(), sample_dataset(&p0, 100, 43).unwrap());
        assert!(sample_dataset(&p0, 0, 1).is_err());
    }

    #[test]
    fn text_round_trip() {
        let coll = Arc::new(presets::twin_pairs());
        let data = sample_dataset(&uniform_system(&coll), 30, 5).unwrap();
        let text = data.to_text(&coll);
        assert!(text.starts_with("set_index,choice\n"));
        let back = Dataset::parse(&text, &coll).unwrap();
        assert_eq!(back.records(), data.records());
    }

    #[test]
    fn parse_rejects_records_outside_collection() {
        let coll = presets::twin_pairs();
        assert!(matches!(Dataset::parse("set_index,choice\n3,a\n", &coll), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Dataset::parse("set_index,choice\n0,c\n", &coll), Err(Error::Parse { line: 2, .. })));
        assert!(Dataset::parse("idx,item\n0,a\n", &coll).is_err());
        assert!(Dataset::new(&coll, vec![(1, 0)], None).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }
}
