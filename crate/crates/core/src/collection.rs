//! Collections of choice sets and their text format.
//!
//! A collection fixes the canonical `(item, set)` indexing shared by every
//! other module: sets in declaration order, items within a set in universe
//! order. Edge `i` of the incidence graph, entry `i` of a choice system and
//! entry `i` of a perturbation vector all refer to the same pair.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

/// The observed space of `m` distinct choice sets over `n` items.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Collection {
    items: Vec<String>,
    sets: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    pairs: Vec<(usize, usize)>,
}

impl Collection {
    /// Builds a collection from item names and sets of item indices.
    ///
    /// Items inside each set are sorted into universe order.
    pub fn new(items: Vec<String>, sets: Vec<Vec<usize>>) -> Result<Self> {
        if items.len() < 2 {
            return Err(Error::InvalidCollection(format!(
                "need at least 2 items, found {}",
                items.len()
            )));
        }
        if sets.is_empty() {
            return Err(Error::InvalidCollection("no choice sets".into()));
        }
        let mut names = HashSet::new();
        for name in &items {
            if !names.insert(name.as_str()) {
                return Err(Error::InvalidCollection(format!("duplicate item name {name:?}")));
            }
        }

        let n = items.len();
        let mut canonical: Vec<Vec<usize>> = Vec::with_capacity(sets.len());
        let mut seen_sets = HashSet::new();
        let mut used = vec![false; n];
        for (c, set) in sets.into_iter().enumerate() {
            let mut set = set;
            set.sort_unstable();
            if set.len() < 2 {
                return Err(Error::InvalidCollection(format!("set {c} has fewer than 2 items")));
            }
            if set.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidCollection(format!("set {c} repeats an item")));
            }
            if let Some(&x) = set.iter().find(|&&x| x >= n) {
                return Err(Error::InvalidCollection(format!("set {c} references unknown item {x}")));
            }
            if !seen_sets.insert(set.clone()) {
                return Err(Error::InvalidCollection(format!("set {c} is a duplicate")));
            }
            for &x in &set {
                used[x] = true;
            }
            canonical.push(set);
        }
        if let Some(x) = used.iter().position(|&u| !u) {
            return Err(Error::InvalidCollection(format!(
                "item {:?} appears in no set",
                items[x]
            )));
        }

        let mut offsets = Vec::with_capacity(canonical.len() + 1);
        let mut pairs = Vec::new();
        offsets.push(0);
        for (c, set) in canonical.iter().enumerate() {
            pairs.extend(set.iter().map(|&x| (x, c)));
            offsets.push(pairs.len());
        }

        Ok(Self { items, sets: canonical, offsets, pairs })
    }

    /// Builds a collection from sets of item names; the universe is ordered
    /// by first appearance.
    pub fn from_named_sets<S: AsRef<str>>(sets: &[Vec<S>]) -> Result<Self> {
        let mut items: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut out = Vec::with_capacity(sets.len());
        for set in sets {
            let mut members = Vec::with_capacity(set.len());
            for name in set {
                let name = name.as_ref().to_string();
                let next = items.len();
                let id = *index.entry(name.clone()).or_insert_with(|| {
                    items.push(name);
                    next
                });
                members.push(id);
            }
            out.push(members);
        }
        Self::new(items, out)
    }

    /// Parses the collection text format: one set per line, comma-separated
    /// item names, `#` comments, blank lines ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut items: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut sets = Vec::new();
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut members = Vec::new();
            for name in content.split(',') {
                let name = name.trim();
                if name.is_empty() {
                    return Err(Error::Parse { line, message: "empty item name".into() });
                }
                let next = items.len();
                let id = *index.entry(name.to_string()).or_insert_with(|| {
                    items.push(name.to_string());
                    next
                });
                if members.contains(&id) {
                    return Err(Error::Parse { line, message: format!("item {name:?} repeated in set") });
                }
                members.push(id);
            }
            if members.len() < 2 {
                return Err(Error::Parse { line, message: "a choice set needs at least 2 items".into() });
            }
            let mut key = members.clone();
            key.sort_unstable();
            if let Some(first) = seen.insert(key, line) {
                return Err(Error::Parse { line, message: format!("duplicate of the set on line {first}") });
            }
            sets.push(members);
        }
        if sets.is_empty() {
            return Err(Error::Parse { line: 0, message: "no choice sets found".into() });
        }
        Self::new(items, sets).map_err(|e| Error::Parse { line: 0, message: e.to_string() })
    }

    /// Renders the collection in the text format accepted by [`Collection::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for set in &self.sets {
            let names: Vec<&str> = set.iter().map(|&x| self.items[x].as_str()).collect();
            let _ = writeln!(out, "{}", names.join(","));
        }
        out
    }

    /// Number of items `n`.
    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    /// Number of sets `m`.
    pub fn n_sets(&self) -> usize {
        self.sets.len()
    }

    /// Support size `d`, the sum of set sizes.
    pub fn d(&self) -> usize {
        self.pairs.len()
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn item_name(&self, item: usize) -> &str {
        &self.items[item]
    }

    pub fn item_index(&self, name: &str) -> Option<usize> {
        self.items.iter().position(|x| x == name)
    }

    /// Members of set `c` in universe order.
    pub fn set(&self, c: usize) -> &[usize] {
        &self.sets[c]
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// Canonical index range of set `c`.
    pub fn set_range(&self, c: usize) -> std::ops::Range<usize> {
        self.offsets[c]..self.offsets[c + 1]
    }

    /// The `(item, set)` pair at canonical index `i`.
    pub fn pair(&self, i: usize) -> (usize, usize) {
        self.pairs[i]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Canonical index of `(item, set)`, if the item belongs to the set.
    pub fn index_of(&self, item: usize, set: usize) -> Option<usize> {
        let members = self.sets.get(set)?;
        members.binary_search(&item).ok().map(|pos| self.offsets[set] + pos)
    }

    /// Number of sets containing each item.
    pub fn item_appearances(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_items()];
        for &(x, _) in &self.pairs {
            counts[x] += 1;
        }
        counts
    }

    /// Whether the standing condition `m >= n` holds. It is reported, not enforced.
    pub fn satisfies_m_ge_n(&self) -> bool {
        self.n_sets() >= self.n_items()
    }

    /// Non-fatal observations about the collection.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.satisfies_m_ge_n() {
            out.push(format!(
                "m = {} < n = {}: cycles are only guaranteed when d >= m + n (d = {})",
                self.n_sets(),
                self.n_items(),
                self.d()
            ));
        }
        out
    }

    /// Set index of the set with exactly these members, if present.
    pub fn find_set(&self, members: &[usize]) -> Option<usize> {
        let mut key = members.to_vec();
        key.sort_unstable();
        self.sets.iter().position(|s| *s == key)
    }

    /// True when the collection is exactly the set of all pairs over its items.
    pub fn is_all_pairs(&self) -> bool {
        let n = self.n_items();
        self.n_sets() == n * (n - 1) / 2 && self.sets.iter().all(|s| s.len() == 2)
    }
}

fn numbered_items(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

/// Programmatic collections used throughout the tests and the CLI.
pub mod presets {
    use super::*;

    /// `{{a,b},{c,d},{a,b,c,d}}`: two disjoint pairs joined by the full quadruple.
    pub fn twin_pairs() -> Collection {
        Collection::from_named_sets(&[vec!["a", "b"], vec!["c", "d"], vec!["a", "b", "c", "d"]])
            .expect("valid preset")
    }

    /// The triangle of pairs `{{a,b},{b,c},{a,c}}`.
    pub fn triangle() -> Collection {
        Collection::from_named_sets(&[vec!["a", "b"], vec!["b", "c"], vec!["a", "c"]])
            .expect("valid preset")
    }

    /// All pairs over `n` items, in lexicographic order.
    pub fn all_pairs(n: usize) -> Result<Collection> {
        if n < 2 {
            return Err(Error::InvalidParameter("all-pairs needs n >= 2".into()));
        }
        let mut sets = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                sets.push(vec![i, j]);
            }
        }
        Collection::new(numbered_items(n), sets)
    }

    /// All subsets of even size over `n` items, in increasing bitmask order.
    pub fn all_even_subsets(n: usize) -> Result<Collection> {
        if !(2..=20).contains(&n) {
            return Err(Error::InvalidParameter("all-even-subsets needs 2 <= n <= 20".into()));
        }
        let sets: Vec<Vec<usize>> = (1u32..(1u32 << n))
            .filter(|mask| mask.count_ones() % 2 == 0)
            .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect())
            .collect();
        Collection::new(numbered_items(n), sets)
    }

    /// Pairs `{x_i, x_{i+1 mod n}}` forming one cycle through all items.
    pub fn big_cycle(n: usize) -> Result<Collection> {
        if n < 3 {
            return Err(Error::InvalidParameter("big-cycle needs n >= 3".into()));
        }
        let sets = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
        Collection::new(numbered_items(n), sets)
    }

    /// A random connected collection whose incidence graph has every degree
    /// even: even-size sets, with item parities repaired by toggling pairs.
    pub fn random_eulerian(n: usize, seed: u64) -> Result<Collection> {
        use rand::seq::index::sample;
        use rand::{Rng, SeedableRng};

        if n < 3 {
            return Err(Error::InvalidParameter("random Eulerian collections need n >= 3".into()));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        loop {
            let target = rng.random_range(n..=3 * n);
            let mut sets: Vec<Vec<usize>> = Vec::with_capacity(target + n);
            let mut seen = HashSet::new();
            for _ in 0..target {
                let size = 2 * rng.random_range(1..=n / 2);
                let mut set = sample(&mut rng, n, size).into_vec();
                set.sort_unstable();
                if seen.insert(set.clone()) {
                    sets.push(set);
                }
            }
            let mut degree = vec![0usize; n];
            for &x in sets.iter().flatten() {
                degree[x] += 1;
            }
            let odd: Vec<usize> = (0..n).filter(|&x| degree[x] % 2 == 1).collect();
            for pair in odd.chunks(2) {
                let key = vec![pair[0], pair[1]];
                if seen.remove(&key) {
                    sets.retain(|s| *s != key);
                } else {
                    seen.insert(key.clone());
                    sets.push(key);
                }
            }
            if sets.is_empty() || !connected(n, &sets) {
                continue;
            }
            return Collection::new(numbered_items(n), sets);
        }
    }

    fn connected(n: usize, sets: &[Vec<usize>]) -> bool {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for s in sets {
            for w in s.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                parent[a] = b;
            }
        }
        let used: HashSet<usize> = sets.iter().flatten().copied().collect();
        let root = find(&mut parent, 0);
        used.len() == n && (0..n).all(|x| find(&mut parent, x) == root)
    }

    /// Parses preset specifications such as `twin-pairs`, `triangle`,
    /// `all-pairs:7`, `all-even-subsets:6` or `big-cycle:5`.
    pub fn by_name(spec: &str) -> Result<Collection> {
        let (name, arg) = match spec.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (spec, None),
        };
        let size = || -> Result<usize> {
            arg.ok_or_else(|| Error::InvalidParameter(format!("preset {name} needs a size, e.g. {name}:7")))?
                .parse::<usize>()
                .map_err(|e| Error::InvalidParameter(format!("bad preset size: {e}")))
        };
        match name.replace('_', "-").as_str() {
            "twin-pairs" => Ok(twin_pairs()),
            "triangle" => Ok(triangle()),
            "all-pairs" => all_pairs(size()?),
            "all-even-subsets" | "all-subsets-even" => all_even_subsets(size()?),
            "big-cycle" => big_cycle(size()?),
            other => Err(Error::InvalidParameter(format!("unknown preset {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_follows_universe() {
        let coll = Collection::parse("b,a\nc,a\n").unwrap();
        // universe order is b, a, c
        assert_eq!(coll.items(), &["b", "a", "c"]);
        assert_eq!(coll.pair(0), (0, 0));
        assert_eq!(coll.pair(1), (1, 0));
        assert_eq!(coll.pair(2), (1, 1));
        assert_eq!(coll.pair(3), (2, 1));
        assert_eq!(coll.index_of(2, 1), Some(3));
        assert_eq!(coll.index_of(0, 1), None);
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(matches!(Collection::parse(""), Err(Error::Parse { .. })));
        assert!(matches!(Collection::parse("# nothing\n\n"), Err(Error::Parse { .. })));
        match Collection::parse("a,b\n\na\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match Collection::parse("a,b\nb,a\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Collection::parse("a,a,b").is_err());
        assert!(Collection::parse("a,,b").is_err());
    }

    #[test]
    fn parse_handles_comments_and_whitespace() {
        let coll = Collection::parse("# header\n a , b  # pair\n\nc,d\na,b,c,d\n").unwrap();
        assert_eq!(coll, presets::twin_pairs());
        assert_eq!(Collection::parse(&coll.to_text()).unwrap(), coll);
    }

    #[test]
    fn preset_sizes() {
        let tp = presets::twin_pairs();
        assert_eq!((tp.n_items(), tp.n_sets(), tp.d()), (4, 3, 8));
        let ap = presets::all_pairs(7).unwrap();
        assert_eq!(ap.d(), 42);
        assert!(ap.is_all_pairs());
        let es = presets::all_even_subsets(8).unwrap();
        assert_eq!(es.d(), 512);
        assert!(es.item_appearances().iter().all(|&k| k == 64));
        let bc = presets::big_cycle(5).unwrap();
        assert_eq!(bc.d(), 10);
        assert!(presets::by_name("all-pairs:9").unwrap().is_all_pairs());
        assert!(presets::by_name("all-pairs").is_err());
        assert!(presets::by_name("nope").is_err());
    }

    #[test]
    fn random_eulerian_is_even_and_reproducible() {
        for seed in 0..20 {
            let coll = presets::random_eulerian(7, seed).unwrap();
            assert!(coll.item_appearances().iter().all(|k| k % 2 == 0));
            assert!(coll.sets().iter().all(|s| s.len() % 2 == 0));
            assert_eq!(coll, presets::random_eulerian(7, seed).unwrap());
        }
        assert!(presets::random_eulerian(2, 0).is_err());
    }

    #[test]
    fn new_validates_invariants() {
        let items = || vec!["a".to_string(), "b".to_string(), "c".to_string()];
        assert!(Collection::new(items(), vec![vec![0, 1]]).is_err()); // c unused
        assert!(Collection::new(items(), vec![vec![0, 1], vec![1, 0], vec![2, 0]]).is_err());
        assert!(Collection::new(items(), vec![vec![0]]).is_err());
        assert!(Collection::new(vec!["a".into()], vec![vec![0]]).is_err());
        let coll = Collection::new(items(), vec![vec![0, 1, 2]]).unwrap();
        assert!(!coll.satisfies_m_ge_n());
        assert_eq!(coll.warnings().len(), 1);
    }
}
