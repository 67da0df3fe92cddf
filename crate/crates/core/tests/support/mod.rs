//! Shared test helpers: fixture orders, seeded random orders, brute-force
//! oracles and random structured maps.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use filie::algebra::Algebra;
use filie::maps::{MapSpec, TransitiveMap};
use filie::preorder::Preorder;
use filie::ring::{AdditiveDerivation, IntPoly, RingDescriptor, RingValue};
use num_integer::Integer;
use num_rational::Rational64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixtures() -> Vec<(&'static str, Preorder)> {
    let g = |n, pairs: &[(usize, usize)]| Preorder::from_generators(n, pairs.iter().copied()).unwrap();
    vec![
        ("chain3", g(3, &[(0, 1), (1, 2)])),
        ("vee", g(3, &[(0, 1), (0, 2)])),
        ("twochain", g(4, &[(0, 1), (2, 3)])),
        ("loop2", g(2, &[(0, 1), (1, 0)])),
        ("isolated", g(3, &[])),
    ]
}

/// Mostly posets (generators respect index order); one in five draws
/// arbitrary directed generators, which produces `≃` pairs.
pub fn random_preorder(rng: &mut ChaCha8Rng, max_size: usize) -> Preorder {
    let n = rng.gen_range(1..=max_size);
    let cyclic = rng.gen_ratio(1, 5);
    let density = rng.gen_range(15..=60);
    let mut pairs = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if x == y || (!cyclic && x > y) {
                continue;
            }
            let p = if cyclic { density / 3 } else { density };
            if rng.gen_ratio(p, 100) {
                pairs.push((x, y));
            }
        }
    }
    Preorder::from_generators(n, pairs).unwrap()
}

/// Comparability graph as undirected edges `{a, b}` with `a < b`.
fn undirected(p: &Preorder) -> BTreeSet<(usize, usize)> {
    p.strict_pairs().map(|(x, y)| (x.min(y), x.max(y))).collect()
}

fn find(parent: &mut [usize], a: usize) -> usize {
    let mut r = a;
    while parent[r] != r {
        r = parent[r];
    }
    parent[a] = r;
    r
}

/// Partition of the strict pairs by "lie on a common simple cycle of the
/// comparability graph", found by enumerating every simple cycle.
pub fn cycle_oracle(p: &Preorder) -> BTreeSet<BTreeSet<(usize, usize)>> {
    let edges: Vec<(usize, usize)> = undirected(p).into_iter().collect();
    let index: BTreeMap<(usize, usize), usize> = edges.iter().enumerate().map(|(k, &e)| (e, k)).collect();
    let n = p.size();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|x| (0..n).filter(|&y| y != x && p.comparable(x, y)).collect())
        .collect();
    let mut parent: Vec<usize> = (0..edges.len()).collect();
    let key = |a: usize, b: usize| index[&(a.min(b), a.max(b))];

    // every simple cycle, rooted at its least vertex
    fn extend(
        path: &mut Vec<usize>,
        adj: &[Vec<usize>],
        cycles: &mut Vec<Vec<usize>>,
    ) {
        let start = path[0];
        let last = *path.last().unwrap();
        for &v in &adj[last] {
            if v == start && path.len() >= 3 {
                cycles.push(path.clone());
            } else if v > start && !path.contains(&v) {
                path.push(v);
                extend(path, adj, cycles);
                path.pop();
            }
        }
    }
    let mut cycles = Vec::new();
    for s in 0..n {
        extend(&mut vec![s], &adj, &mut cycles);
    }
    for cycle in &cycles {
        let first = key(cycle[0], cycle[1]);
        for k in 0..cycle.len() {
            let e = key(cycle[k], cycle[(k + 1) % cycle.len()]);
            let (a, b) = (find(&mut parent, first), find(&mut parent, e));
            parent[a] = b;
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<(usize, usize)>> = BTreeMap::new();
    for (x, y) in p.strict_pairs() {
        let root = find(&mut parent, key(x, y));
        groups.entry(root).or_default().insert((x, y));
    }
    groups.into_values().collect()
}

/// The partition computed by the library, in the oracle's shape.
pub fn library_classes(p: &Preorder) -> BTreeSet<BTreeSet<(usize, usize)>> {
    p.edge_classes()
        .classes()
        .iter()
        .map(|c| c.edges.iter().copied().collect())
        .collect()
}

/// Integer basis of the transitive maps, i.e. the solutions of
/// `f(x,z) = f(x,y) + f(y,z)` over the strict pairs (with `f(x,x) = 0`).
pub fn transitive_basis(p: &Preorder) -> Vec<BTreeMap<(usize, usize), i64>> {
    let vars: Vec<(usize, usize)> = p.strict_pairs().collect();
    let col: BTreeMap<(usize, usize), usize> = vars.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let mut rows: Vec<Vec<Rational64>> = Vec::new();
    let n = p.size();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if x == y || y == z || !p.leq(x, y) || !p.leq(y, z) {
                    continue;
                }
                let mut row = vec![Rational64::from_integer(0); vars.len()];
                row[col[&(x, y)]] += 1;
                row[col[&(y, z)]] += 1;
                if x != z {
                    row[col[&(x, z)]] -= 1;
                }
                rows.push(row);
            }
        }
    }
    // reduced row echelon form
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..vars.len() {
        let Some(k) = (r..rows.len()).find(|&k| rows[k][c] != 0.into()) else {
            continue;
        };
        rows.swap(r, k);
        let lead = rows[r][c];
        for v in rows[r].iter_mut() {
            *v /= lead;
        }
        let pivot = rows[r].clone();
        for (k, row) in rows.iter_mut().enumerate() {
            if k != r && row[c] != 0.into() {
                let factor = row[c];
                for (v, p) in row.iter_mut().zip(&pivot) {
                    *v -= p * factor;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut basis = Vec::new();
    for free in (0..vars.len()).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational64::from_integer(0); vars.len()];
        v[free] = 1.into();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -rows[row][free];
        }
        let scale = v.iter().fold(1i64, |acc, q| acc.lcm(q.denom()));
        basis.push(
            vars.iter()
                .zip(&v)
                .map(|(&pair, q)| (pair, (q * scale).to_integer()))
                .collect(),
        );
    }
    basis
}

pub fn poly(coeffs: &[i64]) -> RingValue {
    RingValue::poly(IntPoly::from_i64s(coeffs))
}

fn random_coeffs(rng: &mut ChaCha8Rng, max_degree: usize, range: i64) -> Vec<i64> {
    let degree = rng.gen_range(0..=max_degree);
    (0..=degree).map(|_| rng.gen_range(-range..=range)).collect()
}

/// Inputs of a random `Inner(α) + Transitive(f) + AdditiveInduced(F) +
/// CentralTrace(h)` over `Z[t]`.
pub struct Structured {
    pub alpha: Vec<(usize, usize, RingValue)>,
    pub f: BTreeMap<(usize, usize), i64>,
    /// `F_i = p_i(t) d/dt`, by class.
    pub big_f: BTreeMap<usize, IntPoly>,
    pub h: BTreeMap<usize, IntPoly>,
}

impl Structured {
    pub fn random(alg: &Arc<Algebra>, rng: &mut ChaCha8Rng) -> Self {
        let p = alg.preorder();
        let mut alpha = Vec::new();
        for (x, y) in p.pairs() {
            if rng.gen_ratio(2, 3) {
                alpha.push((x, y, poly(&random_coeffs(rng, 2, 3))));
            }
        }
        let mut f: BTreeMap<(usize, usize), i64> = p.strict_pairs().map(|e| (e, 0)).collect();
        for b in transitive_basis(p) {
            let c = rng.gen_range(-2..=2);
            for (e, v) in b {
                *f.get_mut(&e).unwrap() += c * v;
            }
        }
        let big_f = (0..alg.classes().num_classes())
            .map(|i| {
                let coeffs = if rng.gen_ratio(1, 4) { vec![0] } else { random_coeffs(rng, 2, 3) };
                (i, IntPoly::from_i64s(&coeffs))
            })
            .collect();
        let mut h = BTreeMap::new();
        for j in 0..alg.components().count() {
            if rng.gen_ratio(1, 2) {
                let mut coeffs = random_coeffs(rng, 2, 3);
                coeffs.insert(0, 0);
                h.insert(j, IntPoly::from_i64s(&coeffs));
            }
        }
        Structured { alpha, f, big_f, h }
    }

    pub fn assign(&self) -> BTreeMap<usize, AdditiveDerivation> {
        self.big_f
            .iter()
            .map(|(&i, p)| (i, AdditiveDerivation::poly_times_ddt(p.clone())))
            .collect()
    }

    pub fn spec(&self, alg: &Arc<Algebra>) -> MapSpec {
        let ring = RingDescriptor::IntPoly;
        let alpha = alg.from_entries(self.alpha.iter().cloned()).unwrap();
        let f = TransitiveMap::new(
            alg,
            self.f.iter().map(|(&(x, y), &v)| (x, y, RingValue::from_i64(ring, v))),
        )
        .unwrap();
        MapSpec::inner(alpha)
            .plus(MapSpec::transitive(f))
            .unwrap()
            .plus(MapSpec::additive_induced(alg, self.assign()).unwrap())
            .unwrap()
            .plus(MapSpec::central_trace(alg, self.h.clone()).unwrap())
            .unwrap()
    }
}
