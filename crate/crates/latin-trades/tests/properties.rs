//! Randomized and whole-store invariants. The unit tests pin single worked
//! figures; everything here sweeps a corpus (the catalog, the certificate
//! store, seeded random compositions) and checks that the advertised
//! closure laws hold on every sample.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use latin_trades::catalog::catalog;
use latin_trades::circulant::{expand_base_row, BaseRow};
use latin_trades::compose::{cyclic_trade, delete_diagonal, direct_sum, product, sum_over_ols};
use latin_trades::mols::{field_mols, idempotent_mols, macneish_product, orthogonal_pair};
use latin_trades::planner::{decompose, Planner, Recipe};
use latin_trades::search::{search_base_row_seeded, search_trade, SearchBudget, SearchOptions, SearchOutcome};
use latin_trades::Trade;
use proptest::prelude::*;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(t: &Trade) -> (usize, usize, usize) {
    (t.mu(), t.k(), t.m())
}

fn cells_key(t: &Trade) -> Vec<(usize, usize, Vec<usize>)> {
    let mut v: Vec<_> =
        t.cells().iter().map(|c| (c.row, c.col, c.entries.clone())).collect();
    v.sort();
    v
}

fn perm(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Trades of assorted shapes: cyclic squares, catalog expansions, a
/// diagonal deletion. Everything verifies; the properties transform these.
fn pool() -> &'static [Trade] {
    static POOL: OnceLock<Vec<Trade>> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut v = vec![
            cyclic_trade(2, 2).unwrap(),
            cyclic_trade(2, 4).unwrap(),
            cyclic_trade(3, 3).unwrap(),
            cyclic_trade(3, 5).unwrap(),
            cyclic_trade(4, 6).unwrap(),
            cyclic_trade(5, 8).unwrap(),
        ];
        for e in catalog().fixed().iter().step_by(3) {
            v.push(expand_base_row(e.row()).unwrap());
        }
        v.push(delete_diagonal(&idempotent_mols(7, 3).unwrap(), 3).unwrap());
        v.push(expand_base_row(&latin_trades::compose::mod6_family(13).unwrap()).unwrap());
        v
    })
}

/// Every base row the library ships: the fixed catalog, three orders from
/// each family, and the whole built-in certificate store.
fn store_rows() -> &'static [BaseRow] {
    static ROWS: OnceLock<Vec<BaseRow>> = OnceLock::new();
    ROWS.get_or_init(|| {
        let mut v: Vec<BaseRow> = catalog().fixed().iter().map(|e| e.row().clone()).collect();
        for fam in catalog().families() {
            for m in fam.valid_orders().take(3) {
                v.push(fam.instantiate(m).unwrap());
            }
        }
        v.extend(builtin_rows().iter().cloned());
        v
    })
}

fn builtin_rows() -> &'static [BaseRow] {
    static ROWS: OnceLock<Vec<BaseRow>> = OnceLock::new();
    ROWS.get_or_init(|| {
        let doc: serde_json::Value =
            serde_json::from_str(include_str!("../data/builtin_certs.json")).unwrap();
        doc["rows"]
            .as_array()
            .expect("store holds a rows array")
            .iter()
            .map(|r| serde_json::from_value::<BaseRow>(r.clone()).unwrap())
            .collect()
    })
}

/// mu = 3 parts of a given order, for block sums.
fn parts_of_order(p: usize) -> Vec<Trade> {
    let mut v = vec![cyclic_trade(3, p).unwrap()];
    if p % 3 == 0 {
        let block = cyclic_trade(3, 3).unwrap();
        let mut t = block.clone();
        for _ in 1..p / 3 {
            t = direct_sum(&t, &block).unwrap();
        }
        v.push(t);
    }
    for row in store_rows().iter().filter(|r| r.m() == p) {
        v.push(expand_base_row(row).unwrap());
    }
    v
}

#[test]
fn builtin_certificate_rows_are_sound() {
    let rows = builtin_rows();
    assert!(!rows.is_empty());
    let mut seen = BTreeSet::new();
    for row in rows {
        assert_eq!(row.mu(), 3);
        assert!(seen.insert((row.k(), row.m())), "duplicate ({}, {})", row.k(), row.m());
        let rep = row.verify();
        assert!(rep.ok, "({}, {}): {}", row.k(), row.m(), rep.summary());
        let t = expand_base_row(row).unwrap();
        assert!(t.verify().ok);
        assert_eq!(params(&t), (3, row.k(), row.m()));
    }
}

#[test]
fn shifted_rows_stay_valid_and_rotate_their_expansions() {
    for row in store_rows() {
        let m = row.m();
        let base = cells_key(&expand_base_row(row).unwrap());
        for d in [1, m / 2, m - 1] {
            if d == 0 {
                continue;
            }
            let shifted = row.shift(d);
            let rep = shifted.verify();
            assert!(rep.ok, "shift {} of ({}, {}): {}", d, row.k(), m, rep.summary());
            // Row i of the shifted expansion is row i + d of the original.
            let mut expected: Vec<_> = base
                .iter()
                .map(|(r, c, e)| ((r + m - d) % m, *c, e.clone()))
                .collect();
            expected.sort();
            assert_eq!(cells_key(&expand_base_row(&shifted).unwrap()), expected);
        }
    }
}

#[test]
fn small_orders_without_a_third_divisor_have_no_3_homogeneous_trade() {
    let budget = SearchBudget::default();
    let opts = SearchOptions::default();
    for m in [4, 5, 7] {
        let run = search_trade(3, 3, m, &budget, true, &opts).unwrap();
        assert!(matches!(run.outcome, SearchOutcome::None), "m = {}", m);
    }
    // The divisible orders all carry block sums of intercalates.
    let block = cyclic_trade(3, 3).unwrap();
    let mut t = block.clone();
    for m in [6, 9, 12, 15] {
        t = direct_sum(&t, &block).unwrap();
        assert!(t.verify().ok);
        assert_eq!(params(&t), (3, 3, m));
    }
}

#[test]
fn planner_covers_every_order_from_k_squared_to_k_squared_plus_k() {
    let mut planner = Planner::new().unwrap();
    for k in [4, 6, 7, 8] {
        for m in k * k..=k * k + k {
            let e = planner.plan(k, m).unwrap();
            let recipe = e.recipe().unwrap_or_else(|| panic!("({}, {}) should exist", k, m));
            let t = planner.execute(recipe).unwrap();
            let rep = t.verify();
            assert!(rep.ok, "({}, {}): {}", k, m, rep.summary());
            assert_eq!(params(&t), (3, k, m));
        }
    }
}

#[test]
fn recipes_survive_serialization_anywhere_in_the_window() {
    let mut planner = Planner::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let mut checked = 0;
    while checked < 25 {
        let k = rng.random_range(3..=40);
        let m = rng.random_range(k..=40);
        let e = planner.plan(k, m).unwrap();
        let Some(recipe) = e.recipe() else { continue };
        let wire = serde_json::to_string(recipe).unwrap();
        let back: Recipe = serde_json::from_str(&wire).unwrap();
        let t = planner.execute(&back).unwrap();
        assert!(t.verify().ok, "({}, {})", k, m);
        assert_eq!(params(&t), (3, k, m));
        checked += 1;
    }
}

#[test]
fn macneish_products_keep_certification_and_idempotence() {
    for (q1, q2) in [(5, 7), (7, 9), (5, 9), (8, 9)] {
        let a = idempotent_mols(q1, 3).unwrap();
        let b = idempotent_mols(q2, 3).unwrap();
        let prod = macneish_product(&a, &b).unwrap();
        assert_eq!(prod.n(), q1 * q2);
        assert_eq!(prod.len(), a.len().min(b.len()));
        assert!(prod.is_idempotent());
    }
    // Certification alone survives even without idempotence.
    let prod = macneish_product(&field_mols(4).unwrap(), &field_mols(5).unwrap()).unwrap();
    assert_eq!((prod.n(), prod.len()), (20, 3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn relabelings_preserve_validity_and_shape(seed in any::<u64>(), idx in 0usize..64) {
        let pool = pool();
        let start = &pool[idx % pool.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = start.clone();
        for _ in 0..rng.random_range(1..=4usize) {
            t = match rng.random_range(0..5u8) {
                0 => t.permute_rows(&perm(t.m(), &mut rng)).unwrap(),
                1 => t.permute_cols(&perm(t.m(), &mut rng)).unwrap(),
                2 => t.permute_symbols(&perm(t.m(), &mut rng)).unwrap(),
                3 => t.transpose().unwrap(),
                _ => t.permute_layers(&perm(t.mu(), &mut rng)).unwrap(),
            };
        }
        prop_assert!(t.verify().ok);
        prop_assert_eq!(params(&t), params(start));
    }

    #[test]
    fn trade_json_is_lossless_and_k_is_informational(seed in any::<u64>(), junk in any::<u32>()) {
        let pool = pool();
        let t = &pool[seed as usize % pool.len()];
        let wire = t.to_json_string();
        let back = Trade::from_json_str(&wire).unwrap();
        prop_assert_eq!(params(&back), params(t));
        prop_assert_eq!(cells_key(&back), cells_key(t));
        // The emitted k is advisory: any value (or none) reads back the same.
        let mut doc: serde_json::Value = serde_json::from_str(&wire).unwrap();
        doc["k"] = serde_json::json!(junk);
        let tampered = Trade::from_json_str(&doc.to_string()).unwrap();
        prop_assert_eq!(cells_key(&tampered), cells_key(t));
        doc.as_object_mut().unwrap().remove("k");
        let stripped = Trade::from_json_str(&doc.to_string()).unwrap();
        prop_assert_eq!(cells_key(&stripped), cells_key(t));
    }

    #[test]
    fn base_row_json_is_lossless(idx in any::<u64>()) {
        let rows = store_rows();
        let row = &rows[idx as usize % rows.len()];
        let back = BaseRow::from_json_str(&row.to_json_string()).unwrap();
        prop_assert_eq!(&back, row);
    }

    #[test]
    fn direct_sums_of_matching_shapes_verify(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Equal (mu, k) on both sides; chains keep m under 60.
        let k = rng.random_range(2..=5usize);
        let mu = rng.random_range(2..=k.min(3));
        let block = cyclic_trade(mu, k).unwrap();
        let grow = |n: usize, rng: &mut ChaCha8Rng| {
            let mut t = block.clone();
            for _ in 1..n {
                t = direct_sum(&t, &block).unwrap();
            }
            // A relabeling on one side must not matter.
            t.permute_symbols(&perm(t.m(), rng)).unwrap()
        };
        let n1 = rng.random_range(1..=3usize);
        let n2 = rng.random_range(1..=(60 / k).saturating_sub(n1).max(1));
        let (a, b) = (grow(n1, &mut rng), grow(n2, &mut rng));
        let s = direct_sum(&a, &b).unwrap();
        prop_assert!(s.verify().ok);
        prop_assert_eq!(params(&s), (mu, k, (n1 + n2) * k));
    }

    #[test]
    fn products_verify_and_multiply_parameters(ia in 0usize..5, ib in 0usize..5, ic in 0usize..5) {
        static SMALL: OnceLock<Vec<Trade>> = OnceLock::new();
        let small = SMALL.get_or_init(|| {
            [(2, 2), (2, 3), (3, 3), (3, 4), (3, 5)]
                .iter()
                .map(|&(mu, k)| cyclic_trade(mu, k).unwrap())
                .collect()
        });
        let (a, b, c) = (&small[ia], &small[ib], &small[ic]);
        let left = product(&product(a, b).unwrap(), c).unwrap();
        let right = product(a, &product(b, c).unwrap()).unwrap();
        let want = (
            a.mu() * b.mu() * c.mu(),
            a.k() * b.k() * c.k(),
            a.m() * b.m() * c.m(),
        );
        prop_assert!(left.verify().ok);
        prop_assert!(right.verify().ok);
        prop_assert_eq!(params(&left), want);
        prop_assert_eq!(params(&right), want);
    }

    #[test]
    fn block_sums_over_orthogonal_squares_verify(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = *[3usize, 4, 5, 7, 8, 9].choose(&mut rng).unwrap();
        let p = rng.random_range(3..=6usize);
        let mu = rng.random_range(2..=3usize);
        let choices = parts_of_order(p);
        let mut parts: Vec<Option<Trade>> = (0..l)
            .map(|_| {
                if rng.random_bool(0.7) {
                    let t = choices.choose(&mut rng).unwrap();
                    let keep = perm(3, &mut rng);
                    Some(t.restrict_layers(&keep[..mu]).unwrap())
                } else {
                    None
                }
            })
            .collect();
        if parts.iter().all(Option::is_none) {
            let keep = perm(3, &mut rng);
            parts[0] = Some(choices[0].restrict_layers(&keep[..mu]).unwrap());
        }
        let refs: Vec<Option<&Trade>> = parts.iter().map(Option::as_ref).collect();
        let pair = orthogonal_pair(l).unwrap();
        let sum = sum_over_ols(&refs, p, (&pair.0, &pair.1)).unwrap();
        let k: usize = parts.iter().flatten().map(Trade::k).sum();
        prop_assert!(sum.verify().ok);
        prop_assert_eq!(params(&sum), (mu, k, l * p));
    }

    #[test]
    fn diagonal_deletions_verify_at_random_orders(
        qi in 0usize..6, mu in 2usize..=3
    ) {
        let q = [5, 7, 8, 9, 11, 13][qi];
        let t = delete_diagonal(&idempotent_mols(q, 3).unwrap(), mu).unwrap();
        prop_assert!(t.verify().ok);
        prop_assert_eq!(params(&t), (mu, q - 1, q));
    }

    #[test]
    fn decompose_agrees_with_reachability(
        parts in prop::collection::btree_set(2usize..=15, 1..=4), m in 0usize..=120
    ) {
        let parts: Vec<usize> = parts.into_iter().collect();
        let mut best = vec![usize::MAX; m + 1];
        best[0] = 0;
        for v in 1..=m {
            best[v] = parts
                .iter()
                .filter(|&&p| p <= v && best[v - p] != usize::MAX)
                .map(|&p| best[v - p] + 1)
                .min()
                .unwrap_or(usize::MAX);
        }
        match decompose(m, &parts) {
            Some(sizes) => {
                prop_assert_eq!(sizes.len(), best[m], "not a minimal split of {}", m);
                prop_assert_eq!(sizes.iter().sum::<usize>(), m);
                prop_assert!(sizes.iter().all(|s| parts.contains(s)));
            }
            None => prop_assert_eq!(best[m], usize::MAX),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // Rows the engine discovers on its own obey the same expansion law as
    // the shipped ones, whatever the seed shuffles into the search order.
    #[test]
    fn searched_rows_expand_to_verified_trades(seed in any::<u64>(), which in 0usize..3) {
        let (k, m) = [(5, 7), (4, 8), (3, 7)][which];
        let budget = SearchBudget::default().nodes(200_000);
        let run = search_base_row_seeded(3, k, m, &budget, Some(seed)).unwrap();
        if let SearchOutcome::Found(row) = run.outcome {
            prop_assert!(row.verify().ok);
            let t = expand_base_row(&row).unwrap();
            prop_assert!(t.verify().ok);
            prop_assert_eq!(params(&t), (3, k, m));
        }
    }
}
