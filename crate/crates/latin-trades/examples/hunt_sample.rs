//! Second offline hunter for circulant witnesses: seed-layer sampling.
//! Samples layer 1 outright, which pins the row symbol set and the
//! difference set exactly, then fills layers 2 and 3 as coupled matchings
//! under those sets. Complements the depth-first hunter on points where
//! its union prunes bind too late. Same directory layout as hunt_certs.

use latin_trades::circulant::{expand_base_row, BaseRow, Item};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const POINTS: &[(usize, usize)] = &[
    (17, 18),
    (19, 22),
    (21, 22),
    (21, 23),
    (23, 26),
    (25, 26),
    (22, 29),
    (23, 29),
    (24, 29),
    (25, 29),
    (26, 29),
    (27, 29),
    (20, 31),
    (21, 31),
    (22, 31),
    (23, 31),
    (24, 31),
    (25, 31),
    (26, 31),
    (27, 31),
    (28, 31),
    (21, 34),
    (23, 34),
    (25, 34),
    (27, 34),
    (29, 34),
    (31, 34),
    (33, 34),
    (19, 37),
    (20, 37),
    (21, 37),
    (22, 37),
    (23, 37),
    (25, 37),
    (26, 37),
    (27, 37),
    (28, 37),
    (29, 37),
    (30, 37),
    (31, 37),
    (32, 37),
    (33, 37),
    (34, 37),
    (21, 38),
    (23, 38),
    (27, 38),
    (29, 38),
    (31, 38),
    (33, 38),
    (35, 38),
    (37, 38),
];

const INNER_CAP: u64 = 20_000;

fn rot(x: u64, c: usize, m: usize) -> u64 {
    let full = (1u64 << m) - 1;
    if c == 0 {
        x & full
    } else {
        ((x << c) | (x >> (m - c))) & full
    }
}

fn pick_bit(mask: u64, rng: &mut ChaCha8Rng) -> usize {
    let n = mask.count_ones();
    let mut skip = rng.random_range(0..n);
    let mut x = mask;
    loop {
        let b = x.trailing_zeros() as usize;
        if skip == 0 {
            return b;
        }
        skip -= 1;
        x &= x - 1;
    }
}

fn bits_shuffled(mask: u64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut v = Vec::with_capacity(mask.count_ones() as usize);
    let mut x = mask;
    while x != 0 {
        v.push(x.trailing_zeros() as usize);
        x &= x - 1;
    }
    v.shuffle(rng);
    v
}

struct Inner {
    m: usize,
    cols: Vec<usize>,
    a1: Vec<usize>,
    s_set: u64,
    d_set: u64,
    a2: Vec<usize>,
    a3: Vec<usize>,
    nodes: u64,
    aborted: bool,
}

impl Inner {
    fn dfs(
        &mut self,
        unassigned: u64,
        us2: u64,
        ud2: u64,
        us3: u64,
        ud3: u64,
        rng: &mut ChaCha8Rng,
    ) -> bool {
        if unassigned == 0 {
            return true;
        }
        // most-constrained column first, by joint candidate count
        let mut best: Option<(usize, u64, u64, u64)> = None;
        let mut rest = unassigned;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let c = self.cols[i];
            let block = 1u64 << self.a1[i];
            let c2 = self.s_set & !us2 & rot(self.d_set & !ud2, c, self.m) & !block;
            let c3 = self.s_set & !us3 & rot(self.d_set & !ud3, c, self.m) & !block;
            let (n2, n3) = (c2.count_ones() as u64, c3.count_ones() as u64);
            if n2 == 0 || n3 == 0 {
                return false;
            }
            let score = n2 * n3;
            if best.as_ref().is_none_or(|b| score < b.3) {
                best = Some((i, c2, c3, score));
            }
        }
        let (i, c2, c3, _) = best.unwrap();
        let c = self.cols[i];
        for s2 in bits_shuffled(c2, rng) {
            let d2 = (s2 + self.m - c) % self.m;
            for s3 in bits_shuffled(c3 & !(1 << s2), rng) {
                self.nodes += 1;
                if self.nodes > INNER_CAP {
                    self.aborted = true;
                    return false;
                }
                let d3 = (s3 + self.m - c) % self.m;
                self.a2[i] = s2;
                self.a3[i] = s3;
                if self.dfs(
                    unassigned & !(1 << i),
                    us2 | 1 << s2,
                    ud2 | 1 << d2,
                    us3 | 1 << s3,
                    ud3 | 1 << d3,
                    rng,
                ) {
                    return true;
                }
                if self.aborted {
                    return false;
                }
            }
        }
        false
    }
}

fn sample(k: usize, m: usize, rng: &mut ChaCha8Rng) -> Option<BaseRow> {
    let full = (1u64 << m) - 1;
    let mut cols: Vec<usize> = (0..m).collect();
    cols.shuffle(rng);
    cols.truncate(k);
    cols.sort_unstable();

    // layer 1 greedily in random column order; a dead end just means resample
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(rng);
    let mut a1 = vec![0usize; k];
    let (mut us, mut ud) = (0u64, 0u64);
    for &i in &order {
        let cand = !us & rot(!ud & full, cols[i], m) & full;
        if cand == 0 {
            return None;
        }
        let s = pick_bit(cand, rng);
        a1[i] = s;
        us |= 1 << s;
        ud |= 1 << ((s + m - cols[i]) % m);
    }

    let mut inner = Inner {
        m,
        cols: cols.clone(),
        a1: a1.clone(),
        s_set: us,
        d_set: ud,
        a2: vec![0; k],
        a3: vec![0; k],
        nodes: 0,
        aborted: false,
    };
    if !inner.dfs((1u64 << k) - 1, 0, 0, 0, 0, rng) {
        return None;
    }

    let items: Vec<Item> = (0..k)
        .map(|i| Item::new(vec![a1[i], inner.a2[i], inner.a3[i]], cols[i]))
        .collect();
    let row = BaseRow::new(3, m, items).expect("sampled row in range");
    assert!(row.verify().ok, "sampler produced an invalid row");
    let t = expand_base_row(&row).expect("expansion");
    assert!(t.verify().ok, "expansion of sampled row fails verification");
    assert_eq!((t.mu(), t.k(), t.m()), (3, k, m));
    Some(row)
}

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "/root/hunt".to_string());
    let secs: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(120);
    let seed0: u64 = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(1);
    std::fs::create_dir_all(&dir).unwrap();
    for &(k, m) in POINTS {
        let path = format!("{}/mu3_k{}_m{}.json", dir, k, m);
        if std::path::Path::new(&path).exists() {
            println!("(3,{},{}) already found", k, m);
            continue;
        }
        let t0 = std::time::Instant::now();
        let deadline = t0 + std::time::Duration::from_secs(secs);
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed0 ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ m as u64);
        let mut samples = 0u64;
        let mut found = false;
        while std::time::Instant::now() < deadline {
            samples += 1;
            if let Some(row) = sample(k, m, &mut rng) {
                std::fs::write(&path, row.to_json_string()).unwrap();
                println!(
                    "(3,{},{}) SAMPLE-FOUND after {} samples {:?}",
                    k,
                    m,
                    samples,
                    t0.elapsed()
                );
                found = true;
                break;
            }
        }
        if !found {
            println!("(3,{},{}) no sample hit in {} samples {:?}", k, m, samples, t0.elapsed());
        }
    }
    println!("sample hunt done");
}
