//! Circulant trades: base rows, their verification, their expansion.
//!
//! A base row describes row 1 of a trade that is closed under the diagonal
//! shift (i, j; s) -> (i+1, j+1; s+1) mod m. Such a row expands to a full
//! trade by shifting it along the diagonals m times.

use serde::{Deserialize, Serialize};

use crate::trade::{ReportBuilder, Rule, VerificationReport};
use crate::{Cell, Error, Result, Trade, MAX_ORDER};

/// One item of a base row: the mu symbols placed at column `col` of row 1,
/// one per layer. 0-based; JSON I/O is 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub symbols: Vec<usize>,
    pub col: usize,
}

impl Item {
    pub fn new(symbols: Vec<usize>, col: usize) -> Self {
        Item { symbols, col }
    }
}

/// A set of k column-indexed mu-tuples generating a circulant trade.
/// Items are stored column-sorted for canonical equality. Construction
/// checks ranges only; the generating conditions live in
/// [`verify_base_row`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseRow {
    mu: usize,
    m: usize,
    items: Vec<Item>,
}

impl BaseRow {
    pub fn new(mu: usize, m: usize, mut items: Vec<Item>) -> Result<BaseRow> {
        if mu < 2 {
            return Err(Error::MuTooSmall(mu));
        }
        if m > MAX_ORDER {
            return Err(Error::OrderTooLarge(m));
        }
        for item in &items {
            if item.col >= m {
                return Err(Error::ColumnOutOfRange { col: item.col, m });
            }
            if item.symbols.len() != mu {
                return Err(Error::WrongEntryCount {
                    row: 0,
                    col: item.col,
                    got: item.symbols.len(),
                    mu,
                });
            }
            for &s in &item.symbols {
                if s >= m {
                    return Err(Error::SymbolOutOfRange { sym: s, m });
                }
            }
        }
        items.sort_by(|a, b| (a.col, &a.symbols).cmp(&(b.col, &b.symbols)));
        Ok(BaseRow { mu, m, items })
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.items.len()
    }

    /// Items sorted by column.
    pub fn items(&self) -> &[Item] {
        &self.items
    }

    /// Adds d to every symbol and every column, mod m. Maps valid base rows
    /// to valid base rows; the expansion is a row rotation of the original's.
    pub fn shift(&self, d: usize) -> BaseRow {
        let m = self.m;
        let items = self
            .items
            .iter()
            .map(|it| {
                Item::new(it.symbols.iter().map(|&s| (s + d) % m).collect(), (it.col + d) % m)
            })
            .collect();
        BaseRow::new(self.mu, m, items).expect("shift preserves ranges")
    }

    pub fn verify(&self) -> VerificationReport {
        verify_base_row(self)
    }

    pub fn from_json_str(s: &str) -> Result<BaseRow> {
        let j: BaseRowJson = serde_json::from_str(s)?;
        base_row_from_json(j)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("base row serialization cannot fail")
    }

    fn to_json(&self) -> BaseRowJson {
        BaseRowJson {
            mu: self.mu,
            m: self.m,
            entries: self
                .items
                .iter()
                .map(|it| ItemJson {
                    symbols: it.symbols.iter().map(|&s| s + 1).collect(),
                    col: it.col + 1,
                })
                .collect(),
        }
    }
}

impl Serialize for BaseRow {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(ser)
    }
}

impl<'de> Deserialize<'de> for BaseRow {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<BaseRow, D::Error> {
        let j = BaseRowJson::deserialize(de)?;
        base_row_from_json(j).map_err(serde::de::Error::custom)
    }
}

/// Interchange format, 1-based.
#[derive(Serialize, Deserialize)]
struct BaseRowJson {
    mu: usize,
    m: usize,
    entries: Vec<ItemJson>,
}

#[derive(Serialize, Deserialize)]
struct ItemJson {
    symbols: Vec<usize>,
    col: usize,
}

fn base_row_from_json(j: BaseRowJson) -> Result<BaseRow> {
    if j.m > MAX_ORDER {
        return Err(Error::OrderTooLarge(j.m));
    }
    let mut items = Vec::with_capacity(j.entries.len());
    for e in j.entries {
        if e.col < 1 || e.col > j.m {
            return Err(Error::ColumnOutOfRange { col: e.col, m: j.m });
        }
        let mut symbols = Vec::with_capacity(e.symbols.len());
        for s in e.symbols {
            if s < 1 || s > j.m {
                return Err(Error::SymbolOutOfRange { sym: s, m: j.m });
            }
            symbols.push(s - 1);
        }
        items.push(Item::new(symbols, e.col - 1));
    }
    BaseRow::new(j.mu, j.m, items)
}

/// Checks the generating conditions: (i) within each item the mu symbols are
/// distinct; (ii) the k columns are distinct; per layer, the k symbols are
/// distinct and the k differences symbol - column (mod m) are distinct; (iii)
/// all layers carry the same symbol set; (iv) all layers carry the same
/// difference set. Under these the expansion is a (mu, k, m) trade.
pub fn verify_base_row(b: &BaseRow) -> VerificationReport {
    let mut rep = ReportBuilder::default();
    let (mu, m) = (b.mu, b.m);

    for item in &b.items {
        'item: for x in 0..mu {
            for y in x + 1..mu {
                if item.symbols[x] == item.symbols[y] {
                    rep.push(
                        Rule::ItemSymbolsDistinct,
                        format!("item at column {}", item.col + 1),
                        format!(
                            "layers {} and {} both hold symbol {}",
                            x + 1,
                            y + 1,
                            item.symbols[x] + 1
                        ),
                    );
                    break 'item;
                }
            }
        }
    }

    for w in b.items.windows(2) {
        if w[0].col == w[1].col {
            rep.push(
                Rule::ColumnsDistinct,
                "columns".to_string(),
                format!("column {} used by more than one item", w[0].col + 1),
            );
        }
    }

    let layer_values = |r: usize, diffs: bool| -> Vec<usize> {
        let mut v: Vec<usize> = b
            .items
            .iter()
            .map(|it| {
                if diffs {
                    (it.symbols[r] + m - it.col) % m
                } else {
                    it.symbols[r]
                }
            })
            .collect();
        v.sort_unstable();
        v
    };

    for (diffs, distinct_rule, equal_rule, what) in [
        (false, Rule::LayerSymbolsDistinct, Rule::RowSetsEqual, "symbol"),
        (true, Rule::LayerDiffsDistinct, Rule::ColSetsEqual, "difference"),
    ] {
        let mut base: Option<Vec<usize>> = None;
        for r in 0..mu {
            let vals = layer_values(r, diffs);
            for w in vals.windows(2) {
                if w[0] == w[1] {
                    rep.push(
                        distinct_rule,
                        format!("layer {}", r + 1),
                        format!("{} {} repeated", what, w[0] + 1),
                    );
                }
            }
            let mut set = vals;
            set.dedup();
            match &base {
                None => base = Some(set),
                Some(first) => {
                    if *first != set {
                        rep.push(
                            equal_rule,
                            format!("layer {}", r + 1),
                            format!(
                                "{} set {:?} differs from layer 1's {:?}",
                                what,
                                set.iter().map(|v| v + 1).collect::<Vec<_>>(),
                                first.iter().map(|v| v + 1).collect::<Vec<_>>()
                            ),
                        );
                    }
                }
            }
        }
    }

    rep.finish()
}

/// Expands a verified base row into its (mu, k, m) trade: row 1 holds the
/// items, row 1+i holds the items with columns and symbols shifted by i.
pub fn expand_base_row(b: &BaseRow) -> Result<Trade> {
    verify_base_row(b).into_result()?;
    let m = b.m;
    let mut cells = Vec::with_capacity(b.items.len() * m);
    for i in 0..m {
        for item in &b.items {
            cells.push(Cell::new(
                i,
                (item.col + i) % m,
                item.symbols.iter().map(|&s| (s + i) % m).collect(),
            ));
        }
    }
    Trade::new(b.mu, m, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 1-based helper mirroring the printed form of catalog rows.
    pub(crate) fn row_1based(mu: usize, m: usize, items: &[(&[usize], usize)]) -> BaseRow {
        let items = items
            .iter()
            .map(|(syms, col)| Item::new(syms.iter().map(|&s| s - 1).collect(), col - 1))
            .collect();
        BaseRow::new(mu, m, items).unwrap()
    }

    fn b75() -> BaseRow {
        row_1based(
            3,
            7,
            &[
                (&[1, 3, 2], 1),
                (&[3, 2, 5], 2),
                (&[5, 7, 3], 3),
                (&[7, 5, 1], 4),
                (&[2, 1, 7], 5),
            ],
        )
    }

    #[test]
    fn known_row_verifies_and_expands() {
        let b = b75();
        assert_eq!((b.mu(), b.k(), b.m()), (3, 5, 7));
        assert!(b.verify().ok);
        let t = expand_base_row(&b).unwrap();
        assert_eq!((t.mu(), t.k(), t.m(), t.volume()), (3, 5, 7, 35));
        assert!(t.verify().ok);
    }

    #[test]
    fn duplicate_column_flagged() {
        let b = row_1based(
            3,
            7,
            &[
                (&[1, 3, 2], 1),
                (&[3, 2, 5], 1),
                (&[5, 7, 3], 3),
                (&[7, 5, 1], 4),
                (&[2, 1, 7], 5),
            ],
        );
        let rep = b.verify();
        assert!(!rep.ok);
        assert!(rep.contains(Rule::ColumnsDistinct));
        assert!(expand_base_row(&b).is_err());
    }

    #[test]
    fn repeated_item_symbol_flagged() {
        let b = row_1based(2, 4, &[(&[1, 1], 1), (&[2, 3], 2)]);
        assert!(b.verify().contains(Rule::ItemSymbolsDistinct));
    }

    #[test]
    fn unequal_difference_sets_flagged() {
        // Row 1 of a cyclic intercalate is not itself a generating base row:
        // per layer all differences coincide.
        let b = row_1based(3, 3, &[(&[1, 3, 2], 1), (&[2, 1, 3], 2), (&[3, 2, 1], 3)]);
        let rep = b.verify();
        assert!(!rep.ok);
        assert!(rep.contains(Rule::LayerDiffsDistinct));
    }

    #[test]
    fn shift_closure() {
        let b = b75();
        let shifted = b.shift(1);
        assert!(shifted.verify().ok);
        let m = b.m();
        let t = expand_base_row(&b).unwrap();
        let ts = expand_base_row(&shifted).unwrap();
        // Row 1+i of the shifted expansion holds row 2+i of the original.
        let perm: Vec<usize> = (0..m).map(|i| (i + m - 1) % m).collect();
        assert_eq!(ts, t.permute_rows(&perm).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let b = b75();
        let s = b.to_json_string();
        assert!(s.contains("\"entries\""));
        assert_eq!(BaseRow::from_json_str(&s).unwrap(), b);
        assert!(BaseRow::from_json_str(r#"{"mu":2,"m":3,"entries":[{"symbols":[0,1],"col":1}]}"#).is_err());
        assert!(BaseRow::from_json_str(r#"{"mu":2,"m":3,"entries":[{"symbols":[1,2],"col":4}]}"#).is_err());
    }

    #[test]
    fn spot_cells_of_expansion() {
        let t = expand_base_row(&b75()).unwrap();
        // (1,1) holds the first item; diagonal shifts fill the rest.
        assert_eq!(t.cell_at(0, 0).unwrap().entries, vec![0, 2, 1]);
        assert_eq!(t.cell_at(1, 1).unwrap().entries, vec![1, 3, 2]);
        assert_eq!(t.cell_at(6, 6).unwrap().entries, vec![6, 1, 0]);
    }
}
