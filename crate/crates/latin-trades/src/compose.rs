//! Composition constructions: cyclic full squares, diagonal deletion of
//! idempotent MOLS, direct sums, products, sums over orthogonal squares,
//! the m = 1 (mod 6) base-row family, and intercalate partitioning.

use crate::circulant::{BaseRow, Item};
use crate::mols::{verify_orthogonal, LatinSquare, MolsSet};
use crate::{Cell, Error, Result, Trade, MAX_ORDER};

/// The (mu, k, k) trade whose layer r is the back-circulant square rotated r
/// rows: T_r(i, j) = j - i - r (mod k). Rotating a square against itself
/// keeps rows and columns Latin while changing every cell's entry, so any
/// mu <= k consecutive rotations form a trade.
pub fn cyclic_trade(mu: usize, k: usize) -> Result<Trade> {
    if mu < 2 {
        return Err(Error::MuTooSmall(mu));
    }
    if k < mu {
        return Err(Error::invalid(format!("cyclic trade needs k >= mu, got k = {}, mu = {}", k, mu)));
    }
    if k > MAX_ORDER {
        return Err(Error::OrderTooLarge(k));
    }
    let mut cells = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let entries = (0..mu).map(|r| (j + 2 * k - i - r) % k).collect();
            cells.push(Cell::new(i, j, entries));
        }
    }
    Trade::new(mu, k, cells)
}

/// Deletes the main diagonal of mu superposed idempotent MOLS of order n,
/// leaving a (mu, n-1, n) trade. Entries stay distinct off the diagonal:
/// if two idempotent orthogonal squares agreed at (i, j), i != j, on a value
/// v, the superposed pair (v, v) would repeat at the diagonal cell (v, v).
pub fn delete_diagonal(s: &MolsSet, mu: usize) -> Result<Trade> {
    if mu < 2 {
        return Err(Error::MuTooSmall(mu));
    }
    if s.len() < mu {
        return Err(Error::invalid(format!(
            "need at least mu = {} squares, got {}",
            mu,
            s.len()
        )));
    }
    if !s.is_idempotent() {
        return Err(Error::invalid("squares must be idempotent"));
    }
    let n = s.n();
    let mut cells = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            cells.push(Cell::new(i, j, (0..mu).map(|r| s.square(r).get(i, j)).collect()));
        }
    }
    Trade::new(mu, n, cells)
}

/// Block-diagonal sum: u's rows, columns and symbols are shifted past t's.
/// Requires equal mu and equal k; the result is (mu, k, t.m + u.m).
pub fn direct_sum(t: &Trade, u: &Trade) -> Result<Trade> {
    if t.mu() != u.mu() {
        return Err(Error::invalid(format!("mu mismatch: {} vs {}", t.mu(), u.mu())));
    }
    if t.k() != u.k() {
        return Err(Error::invalid(format!("k mismatch: {} vs {}", t.k(), u.k())));
    }
    let m = t.m() + u.m();
    if m > MAX_ORDER {
        return Err(Error::OrderTooLarge(m));
    }
    let shift = t.m();
    let mut cells = Vec::with_capacity(t.volume() + u.volume());
    cells.extend(t.cells().iter().cloned());
    cells.extend(u.cells().iter().map(|c| {
        Cell::new(c.row + shift, c.col + shift, c.entries.iter().map(|&s| s + shift).collect())
    }));
    Trade::new(t.mu(), m, cells)
}

/// Replaces every filled cell of t by a copy of u on a private symbol band,
/// and every empty cell by an empty block. Output layers are indexed by
/// pairs (r1, r2) in lexicographic order; a cell of t holding x in layer r1
/// and a cell of u holding y in layer r2 produce the entry x * u.m + y.
/// The result is a (t.mu * u.mu, t.k * u.k, t.m * u.m) trade.
pub fn product(t: &Trade, u: &Trade) -> Result<Trade> {
    let m = t.m() * u.m();
    if m > MAX_ORDER {
        return Err(Error::OrderTooLarge(m));
    }
    let (m2, mu2) = (u.m(), u.mu());
    let mut cells = Vec::with_capacity(t.volume() * u.volume());
    for a in t.cells() {
        for b in u.cells() {
            let mut entries = Vec::with_capacity(t.mu() * mu2);
            for &x in &a.entries {
                for &y in &b.entries {
                    entries.push(x * m2 + y);
                }
            }
            cells.push(Cell::new(a.row * m2 + b.row, a.col * m2 + b.col, entries));
        }
    }
    Trade::new(t.mu() * u.mu(), m, cells)
}

/// Superposes an orthogonal pair of order l and replaces each superposition
/// cell (e, f) by part f relabeled into symbol band e (band e holds the
/// symbols e*p .. e*p + p - 1). Empty parts (k_j = 0) leave their blocks
/// empty. Each band then meets each part exactly once per block row and
/// block column, giving a (mu, sum of k_j, l*p) trade.
pub fn sum_over_ols(
    parts: &[Option<&Trade>],
    p: usize,
    pair: (&LatinSquare, &LatinSquare),
) -> Result<Trade> {
    let l = parts.len();
    if l == 2 || l == 6 {
        return Err(Error::invalid(format!("no orthogonal pair of order {} exists", l)));
    }
    if pair.0.n() != l || pair.1.n() != l {
        return Err(Error::invalid(format!(
            "pair order {} does not match {} parts",
            pair.0.n(),
            l
        )));
    }
    if !verify_orthogonal(pair.0, pair.1)? {
        return Err(Error::invalid("superposition squares are not orthogonal"));
    }
    if p == 0 {
        return Err(Error::invalid("part order p must be positive"));
    }
    let m = l * p;
    if m > MAX_ORDER {
        return Err(Error::OrderTooLarge(m));
    }
    let mut mu = None;
    for part in parts.iter().flatten() {
        if part.m() != p {
            return Err(Error::invalid(format!(
                "part of order {} in a sum over blocks of order {}",
                part.m(),
                p
            )));
        }
        match mu {
            None => mu = Some(part.mu()),
            Some(v) if v != part.mu() => {
                return Err(Error::invalid(format!("mu mismatch: {} vs {}", v, part.mu())))
            }
            _ => {}
        }
    }
    let mu = mu.ok_or_else(|| Error::invalid("all parts are empty"))?;

    let mut cells = Vec::new();
    for bi in 0..l {
        for bj in 0..l {
            let band = pair.0.get(bi, bj);
            let part = match parts[pair.1.get(bi, bj)] {
                Some(t) => t,
                None => continue,
            };
            for c in part.cells() {
                cells.push(Cell::new(
                    bi * p + c.row,
                    bj * p + c.col,
                    c.entries.iter().map(|&s| band * p + s).collect(),
                ));
            }
        }
    }
    Trade::new(mu, m, cells)
}

/// The 2-way base row behind the m = 1 (mod 6) family, with k = m - 2.
/// Its columns are exactly 1..m-2; columns m-1 and m stay empty, symbols
/// m-3 and m-1 stay unused (1-based).
pub fn mod6_bitrade_row(m: usize) -> Result<BaseRow> {
    if m % 6 != 1 || m < 7 {
        return Err(Error::invalid(format!(
            "the family needs m = 1 (mod 6) and m >= 7, got {}",
            m
        )));
    }
    if m > MAX_ORDER {
        return Err(Error::OrderTooLarge(m));
    }
    // All values 1-based as displayed; converted at the end. Taking every
    // value mod m into 1..m.
    let norm = |v: usize| -> usize {
        let r = v % m;
        if r == 0 {
            m
        } else {
            r
        }
    };
    let mut items_1based: Vec<(usize, usize, usize)> = Vec::new(); // (sym1, sym2, col)
    if m >= 13 {
        for i in 0..=(m - 13) / 6 {
            items_1based.push((6 * i + 2, 6 * i + 3, 3 * i + 1));
            items_1based.push((6 * i + 4, 6 * i + 2, 3 * i + 2));
            items_1based.push((6 * i + 3, 6 * i + 4, 3 * i + 3));
            items_1based.push((6 * i + 5, 6 * i + 6, (m + 3) / 2 + 3 * i + 1));
            items_1based.push((6 * i + 7, 6 * i + 5, (m + 3) / 2 + 3 * i + 2));
            items_1based.push((6 * i + 6, 6 * i + 7, (m + 3) / 2 + 3 * i + 3));
        }
    }
    let h = (m - 7) / 2;
    items_1based.push((norm(m - 5), norm(m - 4), h + 1));
    items_1based.push((norm(m - 2), norm(m - 5), h + 2));
    items_1based.push((norm(m - 4), norm(m), h + 3));
    items_1based.push((1, norm(m - 2), h + 4));
    items_1based.push((norm(m), 1, h + 5));

    let items = items_1based
        .into_iter()
        .map(|(a, b, c)| Item::new(vec![a - 1, b - 1], c - 1))
        .collect();
    BaseRow::new(2, m, items)
}

/// The 3-way base row of a (3, m-2, m) trade for m = 1 (mod 6), m >= 7:
/// the 2-way row above with the symbol 2i - 1 (mod m) prepended to the item
/// in column i.
pub fn mod6_family(m: usize) -> Result<BaseRow> {
    let two_way = mod6_bitrade_row(m)?;
    // Items are column-sorted and the columns are exactly 1..m-2, so the
    // item at index idx sits in column idx + 1.
    let items = two_way
        .items()
        .iter()
        .enumerate()
        .map(|(idx, it)| {
            debug_assert_eq!(it.col, idx);
            let mut symbols = Vec::with_capacity(3);
            symbols.push((2 * idx) % m);
            symbols.extend_from_slice(&it.symbols);
            Item::new(symbols, it.col)
        })
        .collect();
    BaseRow::new(3, m, items)
}

/// One mu-intercalate carved out of a (mu, mu, m) trade: mu rows, mu
/// columns, and the (mu, mu, mu) sub-trade they carry after compacting
/// indices. Row, column and symbol order inside the block is ascending.
#[derive(Debug, Clone)]
pub struct IntercalateBlock {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub symbols: Vec<usize>,
    pub trade: Trade,
}

#[derive(Debug, Clone)]
pub struct IntercalatePartition {
    pub blocks: Vec<IntercalateBlock>,
}

impl IntercalatePartition {
    pub fn to_json_string(&self) -> String {
        let blocks: Vec<serde_json::Value> = self
            .blocks
            .iter()
            .map(|b| {
                serde_json::json!({
                    "rows": b.rows.iter().map(|&r| r + 1).collect::<Vec<_>>(),
                    "cols": b.cols.iter().map(|&c| c + 1).collect::<Vec<_>>(),
                    "symbols": b.symbols.iter().map(|&s| s + 1).collect::<Vec<_>>(),
                    "trade": serde_json::from_str::<serde_json::Value>(&b.trade.to_json_string())
                        .expect("trade json"),
                })
            })
            .collect();
        serde_json::to_string_pretty(&serde_json::json!({ "blocks": blocks }))
            .expect("partition serialization cannot fail")
    }
}

/// Partitions a verified (mu, mu, m) trade into its m/mu disjoint
/// mu-intercalates. In such a trade every filled cell's entry set equals
/// its row's and its column's symbol set, and exactly mu rows share any one
/// occurring symbol set; the extraction below therefore never has a choice
/// to make: take the least unprocessed row, its columns, and the rows of
/// any one of those columns.
pub fn partition_intercalates(t: &Trade) -> Result<IntercalatePartition> {
    if t.k() != t.mu() {
        return Err(Error::invalid(format!(
            "partitioning needs k = mu, got k = {}, mu = {}",
            t.k(),
            t.mu()
        )));
    }
    t.verify().into_result()?;
    let mu = t.mu();
    let m = t.m();

    let mut grid: Vec<Option<usize>> = vec![None; m * m]; // cell index by position
    for (idx, c) in t.cells().iter().enumerate() {
        grid[c.row * m + c.col] = Some(idx);
    }
    let mut done = vec![false; t.volume()];
    let structural = || Error::invalid("structural contradiction: input is not a valid trade");

    let mut blocks = Vec::with_capacity(m / mu);
    for i in 0..m {
        let row_cells: Vec<usize> = (0..m)
            .filter_map(|j| grid[i * m + j])
            .filter(|&idx| !done[idx])
            .collect();
        if row_cells.is_empty() {
            continue;
        }
        if row_cells.len() != mu {
            return Err(structural());
        }
        let cols: Vec<usize> = row_cells.iter().map(|&idx| t.cells()[idx].col).collect();
        let mut symbols = t.cells()[row_cells[0]].entries.clone();
        symbols.sort_unstable();

        // The rows of the block are the rows of the first column's
        // unprocessed cells.
        let c0 = cols[0];
        let mut rows: Vec<usize> = (0..m)
            .filter(|&r| grid[r * m + c0].map(|idx| !done[idx]).unwrap_or(false))
            .collect();
        rows.sort_unstable();
        if rows.len() != mu || !rows.contains(&i) {
            return Err(structural());
        }

        let mut sorted_cols = cols.clone();
        sorted_cols.sort_unstable();
        let sym_pos = |s: usize| symbols.iter().position(|&v| v == s);

        let mut sub_cells = Vec::with_capacity(mu * mu);
        for (ri, &r) in rows.iter().enumerate() {
            for (ci, &c) in sorted_cols.iter().enumerate() {
                let idx = grid[r * m + c].filter(|&idx| !done[idx]).ok_or_else(structural)?;
                let cell = &t.cells()[idx];
                let mut entries = Vec::with_capacity(mu);
                for &s in &cell.entries {
                    entries.push(sym_pos(s).ok_or_else(structural)?);
                }
                sub_cells.push(Cell::new(ri, ci, entries));
                done[idx] = true;
            }
        }
        let sub = Trade::new(mu, mu, sub_cells)?;
        sub.verify().into_result()?;
        blocks.push(IntercalateBlock { rows, cols: sorted_cols, symbols, trade: sub });
    }
    if done.iter().any(|&d| !d) {
        return Err(structural());
    }
    Ok(IntercalatePartition { blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circulant::expand_base_row;
    use crate::mols::idempotent_mols;

    #[test]
    fn cyclic_trade_shape_and_figures() {
        let t = cyclic_trade(3, 3).unwrap();
        assert!(t.verify().ok);
        assert_eq!((t.mu(), t.k(), t.m(), t.volume()), (3, 3, 3, 9));
        // Reference grid of per-cell entry tuples.
        let expect = [
            [[1, 3, 2], [2, 1, 3], [3, 2, 1]],
            [[3, 2, 1], [1, 3, 2], [2, 1, 3]],
            [[2, 1, 3], [3, 2, 1], [1, 3, 2]],
        ];
        for (i, row) in expect.iter().enumerate() {
            for (j, tuple) in row.iter().enumerate() {
                let got: Vec<usize> =
                    t.cell_at(i, j).unwrap().entries.iter().map(|&s| s + 1).collect();
                assert_eq!(got, tuple.to_vec());
            }
        }

        let t = cyclic_trade(3, 5).unwrap();
        assert!(t.verify().ok);
        assert_eq!(t.volume(), 25);

        assert!(cyclic_trade(4, 3).is_err());
        assert!(cyclic_trade(1, 3).is_err());
    }

    #[test]
    fn delete_diagonal_cases() {
        let t = delete_diagonal(&idempotent_mols(5, 3).unwrap(), 3).unwrap();
        assert!(t.verify().ok);
        assert_eq!((t.mu(), t.k(), t.m()), (3, 4, 5));
        for i in 0..5 {
            assert!(t.cell_at(i, i).is_none());
        }

        let t = delete_diagonal(&idempotent_mols(4, 2).unwrap(), 2).unwrap();
        assert!(t.verify().ok);
        assert_eq!((t.mu(), t.k(), t.m()), (2, 3, 4));

        let not_idem = crate::mols::field_mols(5).unwrap();
        assert!(delete_diagonal(&not_idem, 2).is_err());
        assert!(delete_diagonal(&idempotent_mols(5, 2).unwrap(), 3).is_err());
    }

    #[test]
    fn direct_sum_cases() {
        let a = cyclic_trade(3, 4).unwrap();
        let s = direct_sum(&a, &a).unwrap();
        assert!(s.verify().ok);
        assert_eq!((s.mu(), s.k(), s.m(), s.volume()), (3, 4, 8, 32));

        let b = cyclic_trade(3, 5).unwrap();
        assert!(direct_sum(&a, &b).is_err());
        let c = cyclic_trade(4, 4).unwrap();
        assert!(direct_sum(&a, &c).is_err());
    }

    #[test]
    fn product_cases() {
        let i2 = cyclic_trade(2, 2).unwrap();
        let p = product(&i2, &i2).unwrap();
        assert!(p.verify().ok);
        assert_eq!((p.mu(), p.k(), p.m()), (4, 4, 4));

        let c3 = cyclic_trade(2, 3).unwrap();
        let p = product(&c3, &c3).unwrap();
        assert!(p.verify().ok);
        assert_eq!((p.mu(), p.k(), p.m(), p.volume()), (4, 9, 9, 81));
    }

    #[test]
    fn sum_over_ols_cases() {
        let full = cyclic_trade(3, 5).unwrap();
        let deleted = delete_diagonal(&idempotent_mols(5, 3).unwrap(), 3).unwrap();
        let pair = crate::mols::orthogonal_pair(3).unwrap();
        let t = sum_over_ols(&[Some(&full), Some(&deleted), None], 5, (&pair.0, &pair.1)).unwrap();
        assert!(t.verify().ok);
        assert_eq!((t.mu(), t.k(), t.m()), (3, 9, 15));

        let five = vec![Some(&full); 5];
        let pair = crate::mols::orthogonal_pair(5).unwrap();
        let t = sum_over_ols(&five, 5, (&pair.0, &pair.1)).unwrap();
        assert!(t.verify().ok);
        assert_eq!((t.mu(), t.k(), t.m()), (3, 25, 25));

        let pair6 = (
            LatinSquare::from_fn(6, |i, j| (i + j) % 6).unwrap(),
            LatinSquare::from_fn(6, |i, j| (i + j) % 6).unwrap(),
        );
        assert!(sum_over_ols(&[None; 6], 5, (&pair6.0, &pair6.1)).is_err());

        let pair = crate::mols::orthogonal_pair(3).unwrap();
        assert!(sum_over_ols(&[None, None, None], 5, (&pair.0, &pair.1)).is_err());
        let wrong_p = cyclic_trade(3, 4).unwrap();
        assert!(sum_over_ols(&[Some(&full), Some(&wrong_p), None], 5, (&pair.0, &pair.1)).is_err());
    }

    #[test]
    fn mod6_rows() {
        // m = 13 instantiates to the known 11-item row.
        let b = mod6_family(13).unwrap();
        let expect: &[(&[usize], usize)] = &[
            (&[1, 2, 3], 1),
            (&[3, 4, 2], 2),
            (&[5, 3, 4], 3),
            (&[7, 8, 9], 4),
            (&[9, 11, 8], 5),
            (&[11, 9, 13], 6),
            (&[13, 1, 11], 7),
            (&[2, 13, 1], 8),
            (&[4, 5, 6], 9),
            (&[6, 7, 5], 10),
            (&[8, 6, 7], 11),
        ];
        let got: Vec<(Vec<usize>, usize)> = b
            .items()
            .iter()
            .map(|it| (it.symbols.iter().map(|&s| s + 1).collect(), it.col + 1))
            .collect();
        let want: Vec<(Vec<usize>, usize)> =
            expect.iter().map(|(s, c)| (s.to_vec(), *c)).collect();
        assert_eq!(got, want);
        assert!(b.verify().ok);
        let t = expand_base_row(&b).unwrap();
        assert!(t.verify().ok);
        assert_eq!((t.mu(), t.k(), t.m()), (3, 11, 13));

        // Degenerate small case: only the 5-item tail remains.
        let b = mod6_family(7).unwrap();
        assert_eq!(b.k(), 5);
        let t = expand_base_row(&b).unwrap();
        assert!(t.verify().ok);
        assert_eq!((t.mu(), t.k(), t.m()), (3, 5, 7));

        // The 2-way ingredient stands on its own.
        let b = mod6_bitrade_row(19).unwrap();
        assert!(b.verify().ok);
        let t = expand_base_row(&b).unwrap();
        assert!(t.verify().ok);
        assert_eq!((t.mu(), t.k(), t.m()), (2, 17, 19));

        assert!(mod6_family(12).is_err());
        assert!(mod6_family(6).is_err());
    }

    #[test]
    fn partition_single_block() {
        let t = cyclic_trade(3, 3).unwrap();
        let p = partition_intercalates(&t).unwrap();
        assert_eq!(p.blocks.len(), 1);
        assert_eq!(p.blocks[0].rows, vec![0, 1, 2]);
        assert!(p.blocks[0].trade.verify().ok);
    }

    #[test]
    fn partition_after_permutation() {
        let block = cyclic_trade(3, 3).unwrap();
        let mut t = direct_sum(&block, &block).unwrap();
        t = direct_sum(&t, &block).unwrap();
        // Interleave rows, columns and symbols across the blocks.
        let perm: Vec<usize> = (0..9).map(|i| (i * 4 + 2) % 9).collect();
        t = t.permute_rows(&perm).unwrap();
        t = t.permute_cols(&perm).unwrap();
        t = t.permute_symbols(&perm).unwrap();
        assert!(t.verify().ok);

        let p = partition_intercalates(&t).unwrap();
        assert_eq!(p.blocks.len(), 3);
        let mut covered = 0;
        for b in &p.blocks {
            assert!(b.trade.verify().ok);
            assert_eq!(b.trade.volume(), 9);
            covered += 9;
        }
        assert_eq!(covered, t.volume());

        assert!(partition_intercalates(&cyclic_trade(3, 5).unwrap()).is_err());
    }
}
