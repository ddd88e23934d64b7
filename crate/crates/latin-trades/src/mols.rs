//! Mutually orthogonal Latin squares: finite-field constructions,
//! idempotent variants, products and certified orthogonal pairs for every
//! composite order the compositions need.
//!
//! Nothing here is trusted: every constructed set is certified pairwise
//! orthogonal at construction time, and embedded data tables are certified
//! at load.

use serde::{Deserialize, Serialize};

use crate::field::FiniteField;
use crate::{Error, Result, MAX_ORDER};

/// Orders l = 2 (mod 4), where no product construction applies; pairs were
/// found once by the offline searcher in `examples/gen_tables.rs` and are
/// shipped as data.
const OLS_PAIR_TABLES: &[(usize, &str)] = &[
    (10, include_str!("../data/ols_pairs/order_10.json")),
    (14, include_str!("../data/ols_pairs/order_14.json")),
    (18, include_str!("../data/ols_pairs/order_18.json")),
    (22, include_str!("../data/ols_pairs/order_22.json")),
    (26, include_str!("../data/ols_pairs/order_26.json")),
    (30, include_str!("../data/ols_pairs/order_30.json")),
    (34, include_str!("../data/ols_pairs/order_34.json")),
    (38, include_str!("../data/ols_pairs/order_38.json")),
    (42, include_str!("../data/ols_pairs/order_42.json")),
    (46, include_str!("../data/ols_pairs/order_46.json")),
    (50, include_str!("../data/ols_pairs/order_50.json")),
    (54, include_str!("../data/ols_pairs/order_54.json")),
    (58, include_str!("../data/ols_pairs/order_58.json")),
    (62, include_str!("../data/ols_pairs/order_62.json")),
    (66, include_str!("../data/ols_pairs/order_66.json")),
    (70, include_str!("../data/ols_pairs/order_70.json")),
];

pub const MAX_PAIR_ORDER: usize = 70;

/// An order-n Latin square, row-major, 0-based symbols. Constructors
/// enforce the Latin property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatinSquare {
    n: usize,
    grid: Vec<usize>,
}

impl LatinSquare {
    pub fn new(n: usize, grid: Vec<usize>) -> Result<LatinSquare> {
        if n > MAX_ORDER {
            return Err(Error::OrderTooLarge(n));
        }
        if grid.len() != n * n {
            return Err(Error::invalid(format!(
                "grid has {} cells, expected {}",
                grid.len(),
                n * n
            )));
        }
        let sq = LatinSquare { n, grid };
        sq.check_latin()?;
        Ok(sq)
    }

    pub fn from_rows(rows: Vec<Vec<usize>>) -> Result<LatinSquare> {
        let n = rows.len();
        for r in &rows {
            if r.len() != n {
                return Err(Error::invalid(format!(
                    "row of length {} in a square of order {}",
                    r.len(),
                    n
                )));
            }
        }
        LatinSquare::new(n, rows.into_iter().flatten().collect())
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> usize) -> Result<LatinSquare> {
        let mut grid = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                grid.push(f(i, j));
            }
        }
        LatinSquare::new(n, grid)
    }

    fn check_latin(&self) -> Result<()> {
        let n = self.n;
        for &v in &self.grid {
            if v >= n {
                return Err(Error::SymbolOutOfRange { sym: v, m: n });
            }
        }
        let mut seen = vec![false; n];
        for i in 0..n {
            seen.fill(false);
            for j in 0..n {
                let v = self.get(i, j);
                if seen[v] {
                    return Err(Error::invalid(format!(
                        "symbol {} repeated in row {}",
                        v + 1,
                        i + 1
                    )));
                }
                seen[v] = true;
            }
        }
        for j in 0..n {
            seen.fill(false);
            for i in 0..n {
                let v = self.get(i, j);
                if seen[v] {
                    return Err(Error::invalid(format!(
                        "symbol {} repeated in column {}",
                        v + 1,
                        j + 1
                    )));
                }
                seen[v] = true;
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.grid[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.grid[i * self.n..(i + 1) * self.n]
    }

    pub fn is_idempotent(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i) == i)
    }

    pub fn transpose(&self) -> LatinSquare {
        let n = self.n;
        let mut grid = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                grid[j * n + i] = self.get(i, j);
            }
        }
        LatinSquare { n, grid }
    }

    /// Relabels symbol s to perm[s].
    pub fn relabel_symbols(&self, perm: &[usize]) -> Result<LatinSquare> {
        crate::trade::check_permutation(perm, self.n)?;
        LatinSquare::new(self.n, self.grid.iter().map(|&v| perm[v]).collect())
    }

    pub fn from_json_str(s: &str) -> Result<LatinSquare> {
        let j: LatinSquareJson = serde_json::from_str(s)?;
        latin_square_from_json(j)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("square serialization cannot fail")
    }

    fn to_json(&self) -> LatinSquareJson {
        LatinSquareJson {
            n: self.n,
            rows: (0..self.n)
                .map(|i| self.row(i).iter().map(|&v| v + 1).collect())
                .collect(),
        }
    }
}

/// Interchange format, 1-based symbols.
#[derive(Serialize, Deserialize)]
struct LatinSquareJson {
    n: usize,
    rows: Vec<Vec<usize>>,
}

fn latin_square_from_json(j: LatinSquareJson) -> Result<LatinSquare> {
    if j.n > MAX_ORDER {
        return Err(Error::OrderTooLarge(j.n));
    }
    if j.rows.len() != j.n {
        return Err(Error::invalid(format!(
            "{} rows in a square of order {}",
            j.rows.len(),
            j.n
        )));
    }
    let mut rows = Vec::with_capacity(j.n);
    for r in j.rows {
        let mut row = Vec::with_capacity(r.len());
        for s in r {
            if s < 1 || s > j.n {
                return Err(Error::SymbolOutOfRange { sym: s, m: j.n });
            }
            row.push(s - 1);
        }
        rows.push(row);
    }
    LatinSquare::from_rows(rows)
}

/// True iff superposing a and b yields n^2 distinct ordered pairs.
pub fn verify_orthogonal(a: &LatinSquare, b: &LatinSquare) -> Result<bool> {
    if a.n != b.n {
        return Err(Error::invalid(format!("order mismatch: {} vs {}", a.n, b.n)));
    }
    let n = a.n;
    let mut seen = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            let p = a.get(i, j) * n + b.get(i, j);
            if seen[p] {
                return Ok(false);
            }
            seen[p] = true;
        }
    }
    Ok(true)
}

/// A pairwise-orthogonal family of equal-order Latin squares. Construction
/// certifies every pair.
#[derive(Debug, Clone)]
pub struct MolsSet {
    n: usize,
    squares: Vec<LatinSquare>,
}

impl MolsSet {
    pub fn new(squares: Vec<LatinSquare>) -> Result<MolsSet> {
        let n = match squares.first() {
            None => return Err(Error::invalid("empty set of squares")),
            Some(s) => s.n,
        };
        for (i, a) in squares.iter().enumerate() {
            for b in squares.iter().skip(i + 1) {
                if !verify_orthogonal(a, b)? {
                    return Err(Error::invalid(format!(
                        "squares {} and {} are not orthogonal",
                        i + 1,
                        i + 2
                    )));
                }
            }
        }
        Ok(MolsSet { n, squares })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn squares(&self) -> &[LatinSquare] {
        &self.squares
    }

    pub fn square(&self, i: usize) -> &LatinSquare {
        &self.squares[i]
    }

    pub fn is_idempotent(&self) -> bool {
        self.squares.iter().all(|s| s.is_idempotent())
    }
}

/// The q-1 squares L_a(i, j) = a*i + j over GF(q), a != 0. Pairwise
/// orthogonal, certified.
pub fn field_mols(q: usize) -> Result<MolsSet> {
    if q < 3 {
        return Err(Error::invalid(format!("field_mols needs q >= 3, got {}", q)));
    }
    let f = FiniteField::new(q)?;
    let squares = (1..q)
        .map(|a| LatinSquare::from_fn(q, |i, j| f.add(f.mul(a, i), j)))
        .collect::<Result<Vec<_>>>()?;
    MolsSet::new(squares)
}

/// `count` idempotent pairwise-orthogonal squares of order q. L_a has
/// diagonal (a+1)*i, a transversal iff a != -1; relabeling by (a+1)^{-1}
/// maps it to the identity. Valid multipliers are a not in {0, -1}, so at
/// most q-2 squares.
pub fn idempotent_mols(q: usize, count: usize) -> Result<MolsSet> {
    if q < 4 {
        return Err(Error::invalid(format!("idempotent_mols needs q >= 4, got {}", q)));
    }
    let f = FiniteField::new(q)?;
    if count > q - 2 {
        return Err(Error::invalid(format!(
            "at most q - 2 = {} idempotent squares available from this construction, asked for {}",
            q - 2,
            count
        )));
    }
    let minus_one = f.neg(1);
    let squares = (1..q)
        .filter(|&a| a != minus_one)
        .take(count)
        .map(|a| {
            let scale = f.inv(f.add(a, 1));
            LatinSquare::from_fn(q, |i, j| f.mul(scale, f.add(f.mul(a, i), j)))
        })
        .collect::<Result<Vec<_>>>()?;
    MolsSet::new(squares)
}

/// Componentwise direct product: min(|a|, |b|) squares of order a.n * b.n.
/// Preserves idempotence.
pub fn macneish_product(a: &MolsSet, b: &MolsSet) -> Result<MolsSet> {
    let n = a.n * b.n;
    if n > MAX_ORDER {
        return Err(Error::OrderTooLarge(n));
    }
    let count = a.len().min(b.len());
    let nb = b.n;
    let squares = (0..count)
        .map(|r| {
            let (sa, sb) = (a.square(r), b.square(r));
            LatinSquare::from_fn(n, |i, j| {
                let (i1, i2) = (i / nb, i % nb);
                let (j1, j2) = (j / nb, j % nb);
                sa.get(i1, j1) * nb + sb.get(i2, j2)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    MolsSet::new(squares)
}

fn pair_from_table(l: usize) -> Result<(LatinSquare, LatinSquare)> {
    let raw = OLS_PAIR_TABLES
        .iter()
        .find(|(n, _)| *n == l)
        .map(|(_, s)| *s)
        .filter(|s| !s.trim().is_empty())
        .ok_or_else(|| Error::invalid(format!("no embedded orthogonal pair for order {}", l)))?;
    let squares: Vec<LatinSquareJson> = serde_json::from_str(raw)?;
    if squares.len() != 2 {
        return Err(Error::invalid(format!(
            "embedded table for order {} holds {} squares, expected 2",
            l,
            squares.len()
        )));
    }
    let mut it = squares.into_iter();
    let a = latin_square_from_json(it.next().unwrap())?;
    let b = latin_square_from_json(it.next().unwrap())?;
    if a.n != l || b.n != l {
        return Err(Error::invalid(format!("embedded table order mismatch for {}", l)));
    }
    if !verify_orthogonal(&a, &b)? {
        return Err(Error::invalid(format!(
            "embedded table for order {} failed certification",
            l
        )));
    }
    Ok((a, b))
}

/// A certified orthogonal pair of order l, for any 1 <= l <= 70 except the
/// impossible l = 2 and l = 6. Odd orders use (i+j, i-j); orders divisible
/// by 4 use products of prime-power field constructions; orders 2 (mod 4)
/// come from the embedded tables.
pub fn orthogonal_pair(l: usize) -> Result<(LatinSquare, LatinSquare)> {
    if l == 0 {
        return Err(Error::invalid("order 0"));
    }
    if l == 2 || l == 6 {
        return Err(Error::invalid(format!("no orthogonal pair of order {} exists", l)));
    }
    if l > MAX_PAIR_ORDER {
        return Err(Error::invalid(format!(
            "order {} beyond the supported bound {}",
            l, MAX_PAIR_ORDER
        )));
    }
    if l == 1 {
        let s = LatinSquare::new(1, vec![0])?;
        return Ok((s.clone(), s));
    }
    if l % 2 == 1 {
        let a = LatinSquare::from_fn(l, |i, j| (i + j) % l)?;
        let b = LatinSquare::from_fn(l, |i, j| (i + l - j) % l)?;
        debug_assert!(verify_orthogonal(&a, &b)?);
        return Ok((a, b));
    }
    if l % 4 == 2 {
        return pair_from_table(l);
    }
    // 4 | l: MacNeish over the prime-power factorization. Every factor is a
    // prime power >= 3 with at least two field squares.
    let mut set: Option<MolsSet> = None;
    let mut rest = l;
    let mut p = 2;
    while rest > 1 {
        if rest % p == 0 {
            let mut q = 1;
            while rest % p == 0 {
                q *= p;
                rest /= p;
            }
            let factor = field_mols(q)?;
            set = Some(match set {
                None => factor,
                Some(acc) => macneish_product(&acc, &factor)?,
            });
        }
        p += 1;
    }
    let set = set.expect("l >= 4 has a factor");
    Ok((set.square(0).clone(), set.square(1).clone()))
}

/// Orders with a non-empty embedded pair table.
pub fn embedded_pair_orders() -> Vec<usize> {
    OLS_PAIR_TABLES
        .iter()
        .filter(|(_, s)| !s.trim().is_empty())
        .map(|(n, _)| *n)
        .collect()
}
