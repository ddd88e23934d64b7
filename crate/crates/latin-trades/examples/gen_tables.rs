//! Offline generator for the embedded orthogonal-pair tables.
//!
//! Orders l = 2 (mod 4) admit no finite-field or product construction from
//! smaller pieces with coprime factors, so pairs for the base orders are
//! found by search and shipped as data. The search looks for a diagonally
//! cyclic self-orthogonal square on Z_h with one infinity point, h = l - 1
//! odd: such a square L is determined by a single function phi on Z_h, and
//! (L, L transposed) is an orthogonal pair. Composite orders that factor as
//! base * odd are assembled by the Kronecker-style product instead.
//!
//! Run: cargo run --release -p latin-trades --example gen_tables
//!
//! Writes data/ols_pairs/order_{l}.json and prints one line per order.
//! Deterministic: fixed seeds, so reruns reproduce the shipped tables.

use std::fs;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use latin_trades::mols::{verify_orthogonal, LatinSquare, MolsSet};

const INF: usize = usize::MAX;

/// State for the phi search. Values live in Z_h plus INF; phi must be
/// injective, d -> phi(d) - d must be injective, and the difference map
/// d -> phi(-d) - phi(d) + d must spray distinct nonzero values so that
/// translate classes of (L(i,j), L(j,i)) pairs never collide.
struct Search {
    h: usize,
    /// Assignment order 0, 1, h-1, 2, h-2, ...: partners adjacent, so the
    /// difference-map constraint binds as early as possible.
    order: Vec<usize>,
    phi: Vec<usize>,
    used_phi: Vec<bool>,
    used_psi: Vec<bool>,
    used_delta: Vec<bool>,
    inf_at: Option<usize>,
    nodes: u64,
    node_cap: u64,
    rng: ChaCha8Rng,
}

impl Search {
    fn new(h: usize, seed: u64, node_cap: u64) -> Search {
        let mut order = vec![0];
        for d in 1..=h / 2 {
            order.push(d);
            order.push(h - d);
        }
        Search {
            h,
            order,
            phi: vec![INF; h],
            used_phi: vec![false; h],
            used_psi: vec![false; h],
            used_delta: vec![false; h],
            inf_at: None,
            nodes: 0,
            node_cap,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Delta bookkeeping for the class pair {d, h-d}, both phi values known
    /// and finite. Returns the two marked slots, or None on conflict.
    fn mark_delta(&mut self, d: usize) -> Option<(usize, usize)> {
        let h = self.h;
        let e = h - d;
        let delta = (self.phi[e] + h + d - self.phi[d]) % h;
        if delta == 0 {
            return None;
        }
        let neg = h - delta;
        if self.used_delta[delta] || self.used_delta[neg] {
            return None;
        }
        self.used_delta[delta] = true;
        self.used_delta[neg] = true;
        Some((delta, neg))
    }

    fn assign(&mut self, t: usize) -> bool {
        let h = self.h;
        if t == self.order.len() {
            return self.complete_ok();
        }
        let d = self.order[t];
        self.nodes += 1;
        if self.nodes > self.node_cap {
            return false;
        }
        let mut candidates: Vec<usize> = (0..h)
            .filter(|&v| !self.used_phi[v] && !self.used_psi[(v + h - d) % h])
            .collect();
        candidates.shuffle(&mut self.rng);
        if d != 0 && self.inf_at.is_none() {
            // Try infinity somewhere in the middle of the value order.
            let pos = self.rng.random_range(0..=candidates.len());
            candidates.insert(pos, INF);
        }
        let partner = h - d;
        for v in candidates {
            if v == INF {
                self.inf_at = Some(d);
                // The class pair {d, h-d} carries no delta constraint.
                if self.assign(t + 1) {
                    return true;
                }
                self.inf_at = None;
                continue;
            }
            self.phi[d] = v;
            self.used_phi[v] = true;
            let psi = (v + h - d) % h;
            self.used_psi[psi] = true;
            let mut marked = None;
            // Enforce the delta conditions once both ends of the class pair
            // hold finite values.
            let ok = if d != 0 && partner != d && self.phi[partner] != INF {
                marked = self.mark_delta(d);
                marked.is_some()
            } else {
                true
            };
            if ok && self.assign(t + 1) {
                return true;
            }
            if let Some((x, y)) = marked {
                self.used_delta[x] = false;
                self.used_delta[y] = false;
            }
            self.phi[d] = INF;
            self.used_phi[v] = false;
            self.used_psi[psi] = false;
        }
        false
    }

    /// Completion: the two values missed by phi and by psi become the
    /// infinity row and column offsets a and b; the two difference values
    /// never used must be exactly +-(b - a).
    fn complete_ok(&self) -> bool {
        let (a, b) = match self.missing_offsets() {
            Some(pair) => pair,
            None => return false,
        };
        if a == b {
            return false;
        }
        let h = self.h;
        let gap = (b + h - a) % h;
        let unused: Vec<usize> = (1..h).filter(|&x| !self.used_delta[x]).collect();
        unused == {
            let mut want = vec![gap, h - gap];
            want.sort_unstable();
            want
        }
    }

    fn missing_offsets(&self) -> Option<(usize, usize)> {
        let a = (0..self.h).find(|&v| !self.used_phi[v])?;
        let b = (0..self.h).find(|&v| !self.used_psi[v])?;
        Some((a, b))
    }

    /// Lay out the full square: finite block L(i,j) = phi(j-i) + i, border
    /// row b + j, border column a + i, corner infinity. Symbol h plays
    /// infinity so symbols are 0..h inclusive.
    fn build(&self) -> LatinSquare {
        let h = self.h;
        let n = h + 1;
        let (a, b) = self.missing_offsets().expect("search completed");
        let mut grid = vec![0usize; n * n];
        for i in 0..h {
            for j in 0..h {
                let p = self.phi[(j + h - i) % h];
                grid[i * n + j] = if p == INF { h } else { (p + i) % h };
            }
            grid[i * n + h] = (a + i) % h;
            grid[h * n + i] = (b + i) % h;
        }
        grid[h * n + h] = h;
        LatinSquare::new(n, grid).expect("searched square is Latin")
    }
}

fn search_pair(l: usize) -> (LatinSquare, LatinSquare) {
    assert!(l % 4 == 2 && l > 6);
    let h = l - 1;
    for restart in 0..10_000u64 {
        let mut s = Search::new(h, l as u64 * 1_000_003 + restart, 5_000_000);
        if s.assign(0) {
            let a = s.build();
            let b = a.transpose();
            assert!(verify_orthogonal(&a, &b).unwrap(), "order {}", l);
            return (a, b);
        }
    }
    panic!("no pair found for order {}", l);
}

fn kronecker(l: usize, base: &(LatinSquare, LatinSquare), odd: usize) -> (LatinSquare, LatinSquare) {
    use latin_trades::mols::orthogonal_pair;
    let (oa, ob) = orthogonal_pair(odd).expect("odd factor pair");
    let left = MolsSet::new(vec![base.0.clone(), base.1.clone()]).unwrap();
    let right = MolsSet::new(vec![oa, ob]).unwrap();
    let prod = latin_trades::mols::macneish_product(&left, &right).unwrap();
    assert_eq!(prod.n(), l);
    let squares = prod.squares();
    (squares[0].clone(), squares[1].clone())
}

fn to_table_json(pair: &(LatinSquare, LatinSquare)) -> String {
    let row_json = |sq: &LatinSquare| {
        let rows: Vec<Vec<usize>> = (0..sq.n())
            .map(|i| sq.row(i).iter().map(|&v| v + 1).collect())
            .collect();
        serde_json::json!({ "n": sq.n(), "rows": rows })
    };
    let doc = serde_json::Value::Array(vec![row_json(&pair.0), row_json(&pair.1)]);
    let mut s = serde_json::to_string(&doc).unwrap();
    s.push('\n');
    s
}

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/ols_pairs");
    fs::create_dir_all(&dir).unwrap();

    let base_orders = [10usize, 14, 18, 22, 26, 34, 38, 46, 58, 62];
    let mut found: Vec<(usize, (LatinSquare, LatinSquare))> = Vec::new();
    for &l in &base_orders {
        let t = std::time::Instant::now();
        let pair = search_pair(l);
        println!("order {:2}: searched in {:?}", l, t.elapsed());
        found.push((l, pair));
    }
    // base * odd factorizations for the remaining l = 2 (mod 4) orders
    let composites = [(30, 10, 3), (42, 14, 3), (50, 10, 5), (54, 18, 3), (66, 22, 3), (70, 10, 7)];
    for &(l, base, odd) in &composites {
        let b = &found.iter().find(|(n, _)| *n == base).unwrap().1;
        let pair = kronecker(l, b, odd);
        println!("order {:2}: product {} x {}", l, base, odd);
        found.push((l, pair));
    }

    for (l, pair) in &found {
        assert!(verify_orthogonal(&pair.0, &pair.1).unwrap());
        let path = dir.join(format!("order_{}.json", l));
        fs::write(&path, to_table_json(pair)).unwrap();
    }
    println!("wrote {} tables to {}", found.len(), dir.display());
}
