//! Six-cycle decompositions of all-pairs collections from triangle systems.
//!
//! A triangle `{x, y, z}` of the item clique becomes the six-cycle
//! `x – {x,y} – y – {y,z} – z – {x,z} – x` of the incidence graph.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::decompose::{canonical_cycle, decompose_combined, CycleDecomposition, Strategy};
use super::IncidenceGraph;
use crate::collection::Collection;
use crate::dataset::derive_seed;
use crate::error::{Error, Result};

const CLIMB_ITERATIONS: usize = 2_000_000;
const CLIMB_RESTARTS: u64 = 8;

/// Steiner triple system on `0..n` for `n ≡ 1, 3 (mod 6)`.
pub fn steiner_triple_system(n: usize) -> Result<Vec<[usize; 3]>> {
    match n % 6 {
        3 => Ok(bose(n)),
        1 if n >= 7 => Ok(skolem(n)),
        _ => Err(Error::InvalidParameter(format!("no Steiner triple system of order {n}"))),
    }
}

fn bose(n: usize) -> Vec<[usize; 3]> {
    let v = n / 3;
    let half = (v + 1) / 2;
    let p = |x: usize, i: usize| (i % 3) * v + x;
    let mut out = Vec::with_capacity(n * (n - 1) / 6);
    for x in 0..v {
        out.push([p(x, 0), p(x, 1), p(x, 2)]);
    }
    for i in 0..3 {
        for x in 0..v {
            for y in x + 1..v {
                let z = (x + y) * half % v;
                out.push([p(x, i), p(y, i), p(z, i + 1)]);
            }
        }
    }
    out
}

fn skolem(n: usize) -> Vec<[usize; 3]> {
    let k = (n - 1) / 6;
    let q = 2 * k;
    let inf = n - 1;
    let p = |x: usize, i: usize| (i % 3) * q + x;
    let op = |x: usize, y: usize| {
        let s = (x + y) % q;
        if s % 2 == 0 {
            s / 2
        } else {
            s / 2 + k
        }
    };
    let mut out = Vec::with_capacity(n * (n - 1) / 6);
    for x in 0..k {
        out.push([p(x, 0), p(x, 1), p(x, 2)]);
    }
    for i in 0..3 {
        for x in 0..k {
            out.push([inf, p(x + k, i), p(x, i + 1)]);
        }
        for x in 0..q {
            for y in x + 1..q {
                out.push([p(x, i), p(y, i), p(op(x, y), i + 1)]);
            }
        }
    }
    out
}

fn is_leave(x: usize, y: usize) -> bool {
    let (a, b) = (x.min(y), x.max(y));
    matches!((a, b), (0, 1) | (1, 2) | (2, 3) | (0, 3))
}

/// Triangles covering every pair on `0..n` (`n ≡ 5 mod 6`) except the
/// four-cycle `0-1-2-3-0`, found by seeded hill-climbing. `None` when every
/// restart exhausts its iteration budget.
pub fn triangle_packing(n: usize, seed: u64) -> Result<Option<Vec<[usize; 3]>>> {
    if n % 6 != 5 {
        return Err(Error::InvalidParameter(format!("triangle packing with a four-cycle leave needs n ≡ 5 (mod 6), got {n}")));
    }
    for attempt in 0..CLIMB_RESTARTS {
        if let Some(t) = climb(n, derive_seed(seed, attempt)) {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

fn climb(n: usize, seed: u64) -> Option<Vec<[usize; 3]>> {
    const NONE: usize = usize::MAX;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let in_graph = |x: usize, y: usize| x != y && !is_leave(x, y);
    let target = (n * (n - 1) / 2 - 4) / 3;
    let mut other = vec![NONE; n * n];
    let mut live_deg: Vec<usize> = (0..n).map(|x| (0..n).filter(|&y| in_graph(x, y)).count()).collect();
    let mut blocks = 0usize;

    let set_block = |other: &mut Vec<usize>, live_deg: &mut Vec<usize>, t: [usize; 3], add: bool| {
        for (a, b, c) in [(t[0], t[1], t[2]), (t[1], t[2], t[0]), (t[0], t[2], t[1])] {
            let v = if add { c } else { NONE };
            other[a * n + b] = v;
            other[b * n + a] = v;
            if add {
                live_deg[a] -= 1;
                live_deg[b] -= 1;
            } else {
                live_deg[a] += 1;
                live_deg[b] += 1;
            }
        }
    };

    let mut live = Vec::with_capacity(n);
    let mut open = Vec::with_capacity(n);
    for _ in 0..CLIMB_ITERATIONS {
        if blocks == target {
            break;
        }
        live.clear();
        live.extend((0..n).filter(|&x| live_deg[x] > 0));
        let x = live[rng.random_range(0..live.len())];
        open.clear();
        open.extend((0..n).filter(|&y| in_graph(x, y) && other[x * n + y] == NONE));
        let i = rng.random_range(0..open.len());
        let mut j = rng.random_range(0..open.len() - 1);
        if j >= i {
            j += 1;
        }
        let (y, z) = (open[i], open[j]);
        if !in_graph(y, z) {
            continue;
        }
        let w = other[y * n + z];
        if w == NONE {
            blocks += 1;
        } else {
            set_block(&mut other, &mut live_deg, [y, z, w], false);
        }
        set_block(&mut other, &mut live_deg, [x, y, z], true);
    }
    if blocks != target {
        return None;
    }
    let mut out = Vec::with_capacity(target);
    for a in 0..n {
        for b in a + 1..n {
            let c = other[a * n + b];
            if c != NONE && c > b {
                out.push([a, b, c]);
            }
        }
    }
    Some(out)
}

fn pair_sets(coll: &Collection) -> Vec<usize> {
    let n = coll.n_items();
    let mut table = vec![usize::MAX; n * n];
    for (c, s) in coll.sets().iter().enumerate() {
        table[s[0] * n + s[1]] = c;
        table[s[1] * n + s[0]] = c;
    }
    table
}

/// Incidence-graph cycle through the listed items in order, where consecutive
/// items (cyclically) form pair sets.
fn clique_cycle(coll: &Collection, table: &[usize], items: &[usize]) -> Vec<usize> {
    let n = coll.n_items();
    let k = items.len();
    let mut out = Vec::with_capacity(2 * k);
    for i in 0..k {
        let (x, y) = (items[i], items[(i + 1) % k]);
        let c = table[x * n + y];
        out.push(coll.index_of(x, c).expect("pair set contains x"));
        out.push(coll.index_of(y, c).expect("pair set contains y"));
    }
    canonical_cycle(out)
}

/// Six-cycle decomposition of an all-pairs collection with odd `n`.
///
/// For `n ≡ 5 (mod 6)` the four leftover clique edges form one eight-cycle.
/// If the packing search fails, the combined strategy is used instead and a
/// warning is attached.
pub fn decompose_kirkman(coll: &Collection, seed: u64) -> Result<CycleDecomposition> {
    let n = coll.n_items();
    if !coll.is_all_pairs() {
        return Err(Error::StrategyPrecondition("kirkman requires the collection of all pairs".into()));
    }
    if n % 2 == 0 {
        return Err(Error::StrategyPrecondition(format!("kirkman requires an odd number of items, got n = {n}")));
    }
    let table = pair_sets(coll);
    let (triangles, extra) = if n % 6 == 5 {
        match triangle_packing(n, seed)? {
            Some(t) => (t, Some([0, 1, 2, 3])),
            None => {
                let mut dec = decompose_combined(&IncidenceGraph::build(coll))?;
                dec.warnings.push(format!(
                    "triangle packing search for n = {n} exhausted its budget; used the combined strategy"
                ));
                return Ok(dec);
            }
        }
    } else {
        (steiner_triple_system(n)?, None)
    };
    let mut cycles: Vec<Vec<usize>> = triangles.iter().map(|t| clique_cycle(coll, &table, t)).collect();
    if let Some(c4) = extra {
        cycles.push(clique_cycle(coll, &table, &c4));
    }
    cycles.sort();
    Ok(CycleDecomposition { strategy: Strategy::Kirkman, cycles, remainder: Vec::new(), edges: coll.d(), warnings: Vec::new() })
}
