//! The exit gate: one test per shipping criterion, each printing a single
//! PASS line with its measurements (run with --nocapture to see them; a
//! failed assertion is the FAIL line).

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use latin_trades::catalog::catalog;
use latin_trades::circulant::expand_base_row;
use latin_trades::compose::{
    cyclic_trade, delete_diagonal, direct_sum, mod6_family, partition_intercalates, product,
    sum_over_ols,
};
use latin_trades::label347::label_search_347;
use latin_trades::mols::{field_mols, idempotent_mols, orthogonal_pair, LatinSquare};
use latin_trades::planner::{decompose, Existence, Planner};
use latin_trades::search::{search_trade, SearchBudget, SearchOptions, SearchOutcome};
use latin_trades::Trade;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[test]
fn criterion_1_catalog_fidelity() {
    let t0 = Instant::now();
    let c = catalog();
    assert_eq!(c.fixed().len(), 20);
    assert_eq!(c.families().len(), 5);

    let mut rows = 0;
    for e in c.fixed() {
        let report = e.row().verify();
        assert!(report.ok, "fixed row {} fails: {}", e.name(), report.summary());
        let t = expand_base_row(e.row()).unwrap();
        assert!(t.verify().ok, "expansion of {} fails", e.name());
        assert_eq!((t.mu(), t.k(), t.m()), (3, e.k(), e.m()), "{}", e.name());
        rows += 1;
    }
    for f in c.families() {
        for m in f.valid_orders().take(10) {
            let b = f.instantiate(m).unwrap();
            assert!(b.verify().ok, "family {} at m = {} fails", f.name(), m);
            let t = expand_base_row(&b).unwrap();
            assert!(t.verify().ok, "expansion of {} at m = {} fails", f.name(), m);
            assert_eq!((t.mu(), t.k(), t.m()), (3, f.k(), m), "{} at m = {}", f.name(), m);
            rows += 1;
        }
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 5.0, "catalog fidelity took {:?}", dt);
    println!(
        "ACCEPTANCE 1 catalog fidelity: PASS ({} rows verified and expanded in {:?})",
        rows, dt
    );
}

#[test]
fn criterion_2_reference_reproduction() {
    // expansion of the (3, 5, 7) row reproduces all 35 cells exactly
    let t = common::expanded_reference_357();
    let want: Vec<(usize, usize, Vec<usize>)> = common::reference_grid_357()
        .into_iter()
        .map(|(r, c, e)| (r, c, e.to_vec()))
        .collect();
    assert_eq!(common::trade_cells(&t), want);

    // the cyclic (3, 3, 3) trade is the canonical intercalate, cell for cell
    let t = cyclic_trade(3, 3).unwrap();
    let grid = common::reference_intercalate();
    let cells = common::trade_cells(&t);
    assert_eq!(cells.len(), 9);
    for (r, c, entries) in cells {
        assert_eq!(entries, grid[r - 1][c - 1].to_vec(), "cell ({}, {})", r, c);
    }
    println!("ACCEPTANCE 2 reference reproduction: PASS (35 + 9 cells, exact)");
}

#[test]
fn criterion_3_planner_sweep() {
    let t0 = Instant::now();
    let mut planner = Planner::new().unwrap();
    let mut nonexistent = BTreeSet::new();
    let mut unknown = BTreeSet::new();
    let mut exists = 0;
    for m in 3..=40usize {
        for k in 3..=m {
            match planner.plan(k, m).unwrap() {
                Existence::Exists { recipe } => {
                    let t = planner.execute(&recipe).unwrap();
                    assert!(t.verify().ok, "({}, {}) recipe fails verification", k, m);
                    assert_eq!((t.mu(), t.k(), t.m()), (3, k, m));
                    exists += 1;
                }
                Existence::Nonexistent { .. } => {
                    nonexistent.insert((k, m));
                }
                Existence::Unknown { .. } => {
                    unknown.insert((k, m));
                }
            }
        }
    }
    let dt = t0.elapsed();

    let mut expected_nonexistent: BTreeSet<(usize, usize)> =
        [(4, 6), (4, 7)].into_iter().collect();
    for m in 4..=40 {
        if m % 3 != 0 {
            expected_nonexistent.insert((3, m));
        }
    }
    assert_eq!(nonexistent, expected_nonexistent);
    let expected_unknown: BTreeSet<(usize, usize)> = [(4, 11), (5, 6)].into_iter().collect();
    assert_eq!(unknown, expected_unknown);
    assert!(dt.as_secs_f64() < 60.0, "sweep took {:?}", dt);
    println!(
        "ACCEPTANCE 3 planner sweep: PASS ({} exists re-executed, {} nonexistent, {} unknown in {:?})",
        exists,
        nonexistent.len(),
        unknown.len(),
        dt
    );
}

#[test]
fn criterion_4_nonexistence_replication() {
    let t0 = Instant::now();
    let budget = SearchBudget::default().seconds(600.0);
    let report = label_search_347(true, &budget).unwrap();
    assert_eq!(report.distributions, 36);
    assert_eq!(report.configs, 3);
    assert!(report.exhausted, "label count hit its budget before exhaustion");
    assert_eq!(report.total_solutions, 0);
    assert_eq!(report.cases.len(), 108);
    let label_dt = t0.elapsed();

    let t1 = Instant::now();
    let budget = SearchBudget::default().seconds(3600.0);
    let run = search_trade(3, 4, 6, &budget, true, &SearchOptions::default()).unwrap();
    assert!(
        matches!(run.outcome, SearchOutcome::None),
        "(3, 4, 6) search ended with {} instead of proven exhaustion",
        run.stats.verdict
    );
    let trade_dt = t1.elapsed();
    println!(
        "ACCEPTANCE 4 nonexistence replication: PASS (labels 0/108 in {:?}; (3,4,6) exhausted, {} nodes in {:?})",
        label_dt, run.stats.nodes, trade_dt
    );
}

#[test]
fn criterion_5_mols_certification() {
    let t0 = Instant::now();

    fn pairs_exhaustively_orthogonal(a: &LatinSquare, b: &LatinSquare) -> bool {
        let n = a.n();
        let mut seen = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                let p = a.get(i, j) * n + b.get(i, j);
                if seen[p] {
                    return false;
                }
                seen[p] = true;
            }
        }
        true
    }

    for q in [3usize, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27] {
        let s = field_mols(q).unwrap();
        assert_eq!(s.len(), q - 1, "field_mols({})", q);
        for (i, a) in s.squares().iter().enumerate() {
            for b in s.squares().iter().skip(i + 1) {
                assert!(pairs_exhaustively_orthogonal(a, b), "field_mols({})", q);
            }
        }
    }
    for q in [5usize, 7, 8, 9, 11, 13] {
        let s = idempotent_mols(q, 3).unwrap();
        assert_eq!(s.len(), 3);
        for sq in s.squares() {
            for i in 0..q {
                assert_eq!(sq.get(i, i), i, "idempotent_mols({}) diagonal", q);
            }
        }
        for (i, a) in s.squares().iter().enumerate() {
            for b in s.squares().iter().skip(i + 1) {
                assert!(pairs_exhaustively_orthogonal(a, b), "idempotent_mols({})", q);
            }
        }
    }
    let mut certified = 0;
    for l in 3..=30usize {
        if l == 6 {
            assert!(orthogonal_pair(l).is_err());
            continue;
        }
        let (a, b) = orthogonal_pair(l).unwrap();
        assert!(pairs_exhaustively_orthogonal(&a, &b), "orthogonal_pair({})", l);
        certified += 1;
    }
    assert!(orthogonal_pair(2).is_err());
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 10.0, "MOLS certification took {:?}", dt);
    println!(
        "ACCEPTANCE 5 MOLS certification: PASS (11 field sets, 6 idempotent sets, {} pairs in {:?})",
        certified, dt
    );
}

// trades usable as composition inputs, keyed by what each composition needs
fn pool3() -> Vec<Trade> {
    let mut pool = Vec::new();
    for k in 3..=12 {
        pool.push(cyclic_trade(3, k).unwrap());
    }
    for k in 4..=15 {
        for m in k..=20 {
            if let Some((row, _)) = catalog().lookup(k, m) {
                pool.push(expand_base_row(&row).unwrap());
            }
        }
    }
    pool
}

fn pool2() -> Vec<Trade> {
    let mut pool = Vec::new();
    for k in 2..=10 {
        pool.push(cyclic_trade(2, k).unwrap());
    }
    for q in [5usize, 7, 9, 11, 13] {
        pool.push(delete_diagonal(&idempotent_mols(q, 2).unwrap(), 2).unwrap());
    }
    pool
}

#[test]
fn criterion_6_composition_closure() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a71);
    let p3 = pool3();
    let p2 = pool2();

    // direct sums of equal-k pairs
    let mut done = 0;
    while done < 200 {
        let a = p3.choose(&mut rng).unwrap();
        let same_k: Vec<&Trade> = p3.iter().filter(|t| t.k() == a.k()).collect();
        let b = *same_k.choose(&mut rng).unwrap();
        if a.m() + b.m() > 40 {
            continue;
        }
        let t = direct_sum(a, b).unwrap();
        assert!(t.verify().ok);
        assert_eq!((t.mu(), t.k(), t.m()), (3, a.k(), a.m() + b.m()));
        done += 1;
    }

    // products multiply every parameter
    let mut done = 0;
    while done < 200 {
        let a = p2.choose(&mut rng).unwrap();
        let b = if rng.random_bool(0.5) { p2.choose(&mut rng) } else { p3.choose(&mut rng) }
            .unwrap();
        if a.m() * b.m() > 40 {
            continue;
        }
        let t = product(a, b).unwrap();
        assert!(t.verify().ok);
        assert_eq!((t.mu(), t.k(), t.m()), (a.mu() * b.mu(), a.k() * b.k(), a.m() * b.m()));
        done += 1;
    }

    // sums over orthogonal squares, with empty bands allowed
    let mut done = 0;
    while done < 200 {
        let l = *[3usize, 4, 5, 7, 8].choose(&mut rng).unwrap();
        let p_max = 40 / l;
        if p_max < 3 {
            continue;
        }
        let p = rng.random_range(3..=p_max.min(12));
        let of_order: Vec<&Trade> = p3.iter().filter(|t| t.m() == p).collect();
        if of_order.is_empty() {
            continue;
        }
        let parts: Vec<Option<&Trade>> = (0..l)
            .map(|_| {
                if rng.random_bool(0.3) {
                    None
                } else {
                    Some(*of_order.choose(&mut rng).unwrap())
                }
            })
            .collect();
        if parts.iter().all(Option::is_none) {
            continue;
        }
        let k_sum: usize = parts.iter().flatten().map(|t| t.k()).sum();
        let pair = orthogonal_pair(l).unwrap();
        let t = sum_over_ols(&parts, p, (&pair.0, &pair.1)).unwrap();
        assert!(t.verify().ok);
        assert_eq!((t.mu(), t.k(), t.m()), (3, k_sum, l * p));
        done += 1;
    }

    // diagonal deletion from idempotent squares
    let mut done = 0;
    while done < 200 {
        let q = *[5usize, 7, 8, 9, 11, 13, 16, 25, 27].choose(&mut rng).unwrap();
        let mu = rng.random_range(2..=3);
        let t = delete_diagonal(&idempotent_mols(q, mu).unwrap(), mu).unwrap();
        assert!(t.verify().ok);
        assert_eq!((t.mu(), t.k(), t.m()), (mu, q - 1, q));
        done += 1;
    }

    // the order-residue family, pinned at 13 to the known row
    for m in [7usize, 13, 19, 25, 31, 37] {
        let b = mod6_family(m).unwrap();
        assert!(b.verify().ok);
        let t = expand_base_row(&b).unwrap();
        assert!(t.verify().ok);
        assert_eq!((t.mu(), t.k(), t.m()), (3, m - 2, m));
    }
    let b = mod6_family(13).unwrap();
    assert_eq!(common::row_items(&b), common::reference_row_13());

    println!("ACCEPTANCE 6 composition closure: PASS (4 x 200 randomized + 6 family orders)");
}

#[test]
fn criterion_7_partition_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a27);
    for round in 0..100 {
        let blocks = rng.random_range(1..=10);
        let m = 3 * blocks;
        let mut t = cyclic_trade(3, 3).unwrap();
        for _ in 1..blocks {
            t = direct_sum(&t, &cyclic_trade(3, 3).unwrap()).unwrap();
        }
        let mut rows: Vec<usize> = (0..m).collect();
        let mut cols: Vec<usize> = (0..m).collect();
        let mut syms: Vec<usize> = (0..m).collect();
        rows.shuffle(&mut rng);
        cols.shuffle(&mut rng);
        syms.shuffle(&mut rng);
        let t = t
            .permute_rows(&rows)
            .and_then(|t| t.permute_cols(&cols))
            .and_then(|t| t.permute_symbols(&syms))
            .unwrap();
        assert!(t.verify().ok);

        let p = partition_intercalates(&t).unwrap();
        assert_eq!(p.blocks.len(), blocks, "round {}", round);
        let mut seen_rows = BTreeSet::new();
        let mut seen_cols = BTreeSet::new();
        let mut seen_syms = BTreeSet::new();
        for b in &p.blocks {
            for &r in &b.rows {
                assert!(seen_rows.insert(r), "row {} reused", r);
            }
            for &c in &b.cols {
                assert!(seen_cols.insert(c), "col {} reused", c);
            }
            for &s in &b.symbols {
                assert!(seen_syms.insert(s), "symbol {} reused", s);
            }
            assert!(b.trade.verify().ok);
            assert_eq!((b.trade.mu(), b.trade.k(), b.trade.m()), (3, 3, 3));
        }
        assert_eq!(seen_rows.len(), m);
        assert_eq!(seen_cols.len(), m);
        assert_eq!(seen_syms.len(), m);
    }
    println!("ACCEPTANCE 7 partition oracle: PASS (100 permuted block sums, m <= 30)");
}

#[test]
fn criterion_8_decompose_oracle() {
    let mut part_sets: Vec<Vec<usize>> = vec![vec![4, 5], vec![7, 9, 11, 13]];
    for k in 2..=12 {
        part_sets.push(vec![k, k + 1]);
    }
    let mut checked = 0;
    for parts in &part_sets {
        let mut reachable = vec![false; 201];
        reachable[0] = true;
        for n in 1..=200usize {
            reachable[n] = parts.iter().any(|&p| p <= n && reachable[n - p]);
        }
        for m in 0..=200usize {
            match decompose(m, parts) {
                Some(summands) => {
                    assert!(reachable[m], "decompose({}, {:?}) invented a sum", m, parts);
                    assert_eq!(summands.iter().sum::<usize>(), m);
                    assert!(summands.iter().all(|p| parts.contains(p)));
                }
                None => assert!(!reachable[m], "decompose({}, {:?}) missed a sum", m, parts),
            }
            checked += 1;
        }
    }
    println!(
        "ACCEPTANCE 8 decompose oracle: PASS ({} values against the reachability table)",
        checked
    );
}
