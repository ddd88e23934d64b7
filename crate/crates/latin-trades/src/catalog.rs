//! Embedded catalog of hand-checked circulant base rows.
//!
//! Twenty fixed rows cover individual (k, m) pairs; five parametric families
//! cover k in {7, 9, 11, 13, 15} for every m from a threshold up. The k = 9
//! family carries one exceptional row, 3-B_10^9, below its threshold.
//! Row names follow the mu-B_m^k convention, so 3-B_9^6 is the mu = 3,
//! k = 6, m = 9 row.

use std::sync::OnceLock;

use serde::Deserialize;

use crate::circulant::{BaseRow, Item};
use crate::{Error, Result};

const CATALOG_JSON: &str = include_str!("../data/catalog.json");

#[derive(Deserialize)]
struct ItemJson {
    symbols: Vec<usize>,
    col: usize,
}

#[derive(Deserialize)]
struct FixedJson {
    name: String,
    k: usize,
    m: usize,
    entries: Vec<ItemJson>,
}

#[derive(Deserialize)]
struct ExceptionJson {
    name: String,
    m: usize,
    entries: Vec<ItemJson>,
}

#[derive(Deserialize)]
struct FamilyJson {
    name: String,
    k: usize,
    min_m: usize,
    entries: Vec<ItemJson>,
    exceptions: Vec<ExceptionJson>,
}

#[derive(Deserialize)]
struct CatalogJson {
    fixed: Vec<FixedJson>,
    families: Vec<FamilyJson>,
}

fn items_from_json(entries: &[ItemJson]) -> Vec<Item> {
    entries
        .iter()
        .map(|e| {
            assert!(e.col >= 1 && e.symbols.iter().all(|&s| s >= 1));
            Item {
                symbols: e.symbols.iter().map(|&s| s - 1).collect(),
                col: e.col - 1,
            }
        })
        .collect()
}

/// A single catalog row for one exact (k, m).
#[derive(Debug, Clone)]
pub struct FixedEntry {
    name: String,
    k: usize,
    m: usize,
    row: BaseRow,
}

impl FixedEntry {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row(&self) -> &BaseRow {
        &self.row
    }
}

#[derive(Debug, Clone)]
struct FamilyException {
    name: String,
    m: usize,
    items: Vec<Item>,
}

/// A base-row template valid for every m >= min_m, plus exceptional rows
/// for listed orders below the threshold.
#[derive(Debug, Clone)]
pub struct Family {
    name: String,
    k: usize,
    min_m: usize,
    items: Vec<Item>,
    exceptions: Vec<FamilyException>,
}

impl Family {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn min_m(&self) -> usize {
        self.min_m
    }

    pub fn covers(&self, m: usize) -> bool {
        m >= self.min_m || self.exceptions.iter().any(|e| e.m == m)
    }

    /// Valid orders in ascending order, exceptional ones included.
    pub fn valid_orders(&self) -> impl Iterator<Item = usize> + '_ {
        let mut below: Vec<usize> = self
            .exceptions
            .iter()
            .map(|e| e.m)
            .filter(|&m| m < self.min_m)
            .collect();
        below.sort_unstable();
        below.into_iter().chain(self.min_m..)
    }

    pub fn instantiate(&self, m: usize) -> Result<BaseRow> {
        if let Some(exc) = self.exceptions.iter().find(|e| e.m == m) {
            return BaseRow::new(3, m, exc.items.clone());
        }
        if m < self.min_m {
            return Err(Error::invalid(format!(
                "family {} requires m >= {}, got m = {}",
                self.name, self.min_m, m
            )));
        }
        BaseRow::new(3, m, self.items.clone())
    }
}

#[derive(Debug)]
pub struct Catalog {
    fixed: Vec<FixedEntry>,
    families: Vec<Family>,
}

impl Catalog {
    pub fn fixed(&self) -> &[FixedEntry] {
        &self.fixed
    }

    pub fn families(&self) -> &[Family] {
        &self.families
    }

    /// Catalog row for (k, m) if one exists, with a provenance string.
    /// Exact fixed rows win over family instantiations.
    pub fn lookup(&self, k: usize, m: usize) -> Option<(BaseRow, String)> {
        if let Some(e) = self.fixed.iter().find(|e| e.k == k && e.m == m) {
            return Some((e.row.clone(), format!("fixed base row {}", e.name)));
        }
        let fam = self.families.iter().find(|f| f.k == k && f.covers(m))?;
        let row = fam.instantiate(m).ok()?;
        let provenance = match fam.exceptions.iter().find(|e| e.m == m) {
            Some(exc) => format!("fixed base row {} (family exception)", exc.name),
            None => format!(
                "parametric family {} (m >= {}) at m = {}",
                fam.name, fam.min_m, m
            ),
        };
        Some((row, provenance))
    }
}

fn load() -> Catalog {
    let raw: CatalogJson =
        serde_json::from_str(CATALOG_JSON).expect("embedded catalog parses");
    let fixed = raw
        .fixed
        .iter()
        .map(|f| FixedEntry {
            name: f.name.clone(),
            k: f.k,
            m: f.m,
            row: BaseRow::new(3, f.m, items_from_json(&f.entries))
                .expect("embedded fixed row constructs"),
        })
        .collect();
    let families = raw
        .families
        .iter()
        .map(|f| Family {
            name: f.name.clone(),
            k: f.k,
            min_m: f.min_m,
            items: items_from_json(&f.entries),
            exceptions: f
                .exceptions
                .iter()
                .map(|e| FamilyException {
                    name: e.name.clone(),
                    m: e.m,
                    items: items_from_json(&e.entries),
                })
                .collect(),
        })
        .collect();
    Catalog { fixed, families }
}

pub fn catalog() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(load)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circulant::expand_base_row;

    #[test]
    fn twenty_fixed_rows_five_families() {
        let cat = catalog();
        assert_eq!(cat.fixed().len(), 20);
        assert_eq!(cat.families().len(), 5);
        let ks: Vec<usize> = cat.families().iter().map(|f| f.k()).collect();
        assert_eq!(ks, [7, 9, 11, 13, 15]);
    }

    #[test]
    fn every_fixed_row_expands_to_a_verified_trade() {
        for e in catalog().fixed() {
            assert_eq!(e.name(), format!("3-B_{}^{}", e.m(), e.k()));
            let report = e.row().verify();
            assert!(report.ok, "{}: {}", e.name(), report.summary());
            let t = expand_base_row(e.row()).unwrap();
            assert!(t.verify().ok, "{} expansion", e.name());
            assert_eq!((t.mu(), t.k(), t.m()), (3, e.k(), e.m()), "{}", e.name());
        }
    }

    #[test]
    fn family_instances_expand_to_verified_trades() {
        for fam in catalog().families() {
            for m in fam.valid_orders().take(3) {
                let row = fam.instantiate(m).unwrap();
                assert!(row.verify().ok, "{} at m = {}", fam.name(), m);
                let t = expand_base_row(&row).unwrap();
                assert!(t.verify().ok, "{} at m = {}", fam.name(), m);
                assert_eq!((t.mu(), t.k(), t.m()), (3, fam.k(), m));
            }
        }
    }

    #[test]
    fn k9_family_has_the_m10_exception() {
        let fam = catalog()
            .families()
            .iter()
            .find(|f| f.k() == 9)
            .unwrap();
        assert_eq!(fam.min_m(), 11);
        assert!(fam.covers(10));
        assert!(!fam.covers(9));
        assert_eq!(fam.valid_orders().take(4).collect::<Vec<_>>(), [10, 11, 12, 13]);
        let row = fam.instantiate(10).unwrap();
        assert!(row.verify().ok);
        // The exceptional row differs from the template shape: its first item
        // sits at column 1 with symbols (1, 7, 9).
        assert_eq!(row.items()[0].symbols, [0, 6, 8]);
        assert!(fam.instantiate(9).is_err());
    }

    #[test]
    fn lookup_prefers_fixed_rows_and_names_sources() {
        let cat = catalog();
        let (_, p) = cat.lookup(5, 7).unwrap();
        assert_eq!(p, "fixed base row 3-B_7^5");
        let (_, p) = cat.lookup(7, 100).unwrap();
        assert_eq!(p, "parametric family 3-B_m^7 (m >= 8) at m = 100");
        let (_, p) = cat.lookup(9, 10).unwrap();
        assert_eq!(p, "fixed base row 3-B_10^9 (family exception)");
        let (_, p) = cat.lookup(15, 17).unwrap();
        assert_eq!(p, "fixed base row 3-B_17^15");
        assert!(cat.lookup(15, 20).is_none());
        assert!(cat.lookup(4, 9).is_none());
        assert!(cat.lookup(6, 8).is_none());
    }
}
