//! The central data model: a mu-layer partial Latin square collection on an
//! m x m grid, with complete verification of the homogeneous-trade axioms.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, MAX_ORDER};

/// One filled cell. `entries[r]` is the symbol layer r places here.
/// Rows, columns and symbols are 0-based; JSON I/O shifts to 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
    pub entries: Vec<usize>,
}

impl Cell {
    pub fn new(row: usize, col: usize, entries: Vec<usize>) -> Self {
        Cell { row, col, entries }
    }
}

/// A mu-way trade candidate. Construction checks structure only (index
/// ranges, entry counts, cell uniqueness); the trade axioms are checked by
/// [`verify_trade`]. k is derived as the filled-cell count of the first row,
/// never user-asserted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trade {
    mu: usize,
    m: usize,
    k: usize,
    cells: Vec<Cell>,
}

/// Names for every verifiable condition, shared by trade and base-row
/// verification reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    DistinctEntries,
    LatinRow,
    LatinCol,
    RowBalance,
    ColBalance,
    Homogeneity,
    EmptyLine,
    Volume,
    ItemSymbolsDistinct,
    ColumnsDistinct,
    RowSetsEqual,
    ColSetsEqual,
    LayerSymbolsDistinct,
    LayerDiffsDistinct,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Rule::DistinctEntries => "distinct entries per cell",
            Rule::LatinRow => "latin row",
            Rule::LatinCol => "latin column",
            Rule::RowBalance => "row balance",
            Rule::ColBalance => "column balance",
            Rule::Homogeneity => "homogeneity",
            Rule::EmptyLine => "empty line",
            Rule::Volume => "volume",
            Rule::ItemSymbolsDistinct => "item symbols distinct",
            Rule::ColumnsDistinct => "columns distinct",
            Rule::RowSetsEqual => "row symbol sets equal",
            Rule::ColSetsEqual => "column difference sets equal",
            Rule::LayerSymbolsDistinct => "layer symbols distinct",
            Rule::LayerDiffsDistinct => "layer differences distinct",
        };
        f.write_str(name)
    }
}

impl Serialize for Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub rule: Rule,
    pub location: String,
    pub detail: String,
}

/// All violations found, not just the first. Capped at [`MAX_VIOLATIONS`];
/// `truncated` marks a hit cap. `ok` holds exactly when nothing was found.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    pub truncated: bool,
}

pub const MAX_VIOLATIONS: usize = 1000;

impl VerificationReport {
    pub fn contains(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    pub fn summary(&self) -> String {
        match self.violations.first() {
            None => "ok".to_string(),
            Some(v) => format!(
                "{} violation(s){}; first: {} at {}: {}",
                self.violations.len(),
                if self.truncated { " (truncated)" } else { "" },
                v.rule,
                v.location,
                v.detail
            ),
        }
    }

    /// Turns a failed report into an error, for operations whose
    /// preconditions require a verified input.
    pub fn into_result(self) -> Result<()> {
        if self.ok {
            Ok(())
        } else {
            Err(Error::VerificationFailed { summary: self.summary() })
        }
    }
}

#[derive(Default)]
pub(crate) struct ReportBuilder {
    violations: Vec<Violation>,
    truncated: bool,
}

impl ReportBuilder {
    pub(crate) fn push(&mut self, rule: Rule, location: String, detail: String) {
        if self.violations.len() >= MAX_VIOLATIONS {
            self.truncated = true;
            return;
        }
        self.violations.push(Violation { rule, location, detail });
    }

    pub(crate) fn finish(self) -> VerificationReport {
        VerificationReport {
            ok: self.violations.is_empty(),
            violations: self.violations,
            truncated: self.truncated,
        }
    }
}

pub(crate) fn check_permutation(perm: &[usize], len: usize) -> Result<()> {
    if perm.len() != len {
        return Err(Error::NotAPermutation { len });
    }
    let mut seen = vec![false; len];
    for &p in perm {
        if p >= len || seen[p] {
            return Err(Error::NotAPermutation { len });
        }
        seen[p] = true;
    }
    Ok(())
}

impl Trade {
    /// Structural construction. Cells may arrive in any order and are stored
    /// sorted by (row, col). Duplicate entries within a cell are accepted
    /// here and reported by [`verify_trade`].
    pub fn new(mu: usize, m: usize, mut cells: Vec<Cell>) -> Result<Trade> {
        if mu < 2 {
            return Err(Error::MuTooSmall(mu));
        }
        if m > MAX_ORDER {
            return Err(Error::OrderTooLarge(m));
        }
        for cell in &cells {
            if cell.row >= m || cell.col >= m {
                return Err(Error::CellOutOfRange { row: cell.row, col: cell.col, m });
            }
            if cell.entries.len() != mu {
                return Err(Error::WrongEntryCount {
                    row: cell.row,
                    col: cell.col,
                    got: cell.entries.len(),
                    mu,
                });
            }
            for &s in &cell.entries {
                if s >= m {
                    return Err(Error::SymbolOutOfRange { sym: s, m });
                }
            }
        }
        cells.sort_by_key(|c| (c.row, c.col));
        for w in cells.windows(2) {
            if w[0].row == w[1].row && w[0].col == w[1].col {
                return Err(Error::DuplicateCell { row: w[0].row, col: w[0].col });
            }
        }
        let k = cells.iter().take_while(|c| c.row == 0).count();
        Ok(Trade { mu, m, k, cells })
    }

    /// The empty trade on a 0 x 0 grid.
    pub fn empty(mu: usize) -> Result<Trade> {
        Trade::new(mu, 0, Vec::new())
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn volume(&self) -> usize {
        self.cells.len()
    }

    /// Cells sorted by (row, col).
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell_at(&self, row: usize, col: usize) -> Option<&Cell> {
        self.cells
            .binary_search_by_key(&(row, col), |c| (c.row, c.col))
            .ok()
            .map(|i| &self.cells[i])
    }

    /// Layer r (0-based) as a partial Latin square.
    pub fn layer(&self, r: usize) -> Result<BTreeMap<(usize, usize), usize>> {
        if r >= self.mu {
            return Err(Error::LayerOutOfRange { got: r, mu: self.mu });
        }
        Ok(self.cells.iter().map(|c| ((c.row, c.col), c.entries[r])).collect())
    }

    pub fn verify(&self) -> VerificationReport {
        verify_trade(self)
    }

    fn rebuild(&self, cells: Vec<Cell>) -> Result<Trade> {
        Trade::new(self.mu, self.m, cells)
    }

    /// Moves row i to perm[i].
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Trade> {
        check_permutation(perm, self.m)?;
        self.rebuild(
            self.cells
                .iter()
                .map(|c| Cell::new(perm[c.row], c.col, c.entries.clone()))
                .collect(),
        )
    }

    /// Moves column j to perm[j].
    pub fn permute_cols(&self, perm: &[usize]) -> Result<Trade> {
        check_permutation(perm, self.m)?;
        self.rebuild(
            self.cells
                .iter()
                .map(|c| Cell::new(c.row, perm[c.col], c.entries.clone()))
                .collect(),
        )
    }

    /// Relabels symbol s to perm[s] in every layer.
    pub fn permute_symbols(&self, perm: &[usize]) -> Result<Trade> {
        check_permutation(perm, self.m)?;
        self.rebuild(
            self.cells
                .iter()
                .map(|c| {
                    Cell::new(c.row, c.col, c.entries.iter().map(|&s| perm[s]).collect())
                })
                .collect(),
        )
    }

    pub fn transpose(&self) -> Result<Trade> {
        self.rebuild(
            self.cells
                .iter()
                .map(|c| Cell::new(c.col, c.row, c.entries.clone()))
                .collect(),
        )
    }

    /// New layer r is old layer perm[r].
    pub fn permute_layers(&self, perm: &[usize]) -> Result<Trade> {
        check_permutation(perm, self.mu)?;
        self.rebuild(
            self.cells
                .iter()
                .map(|c| {
                    Cell::new(c.row, c.col, perm.iter().map(|&r| c.entries[r]).collect())
                })
                .collect(),
        )
    }

    /// (T_1, ..., T_mu) -> (T_2, ..., T_mu, T_1).
    pub fn rotate_layers(&self) -> Result<Trade> {
        let perm: Vec<usize> = (0..self.mu).map(|r| (r + 1) % self.mu).collect();
        self.permute_layers(&perm)
    }

    /// Keeps the given layers (0-based, distinct, at least two) in the given
    /// order. Dropping layers preserves every trade axiom.
    pub fn restrict_layers(&self, keep: &[usize]) -> Result<Trade> {
        if keep.len() < 2 {
            return Err(Error::TooFewLayers);
        }
        let mut seen = vec![false; self.mu];
        for &r in keep {
            if r >= self.mu {
                return Err(Error::LayerOutOfRange { got: r, mu: self.mu });
            }
            if seen[r] {
                return Err(Error::TooFewLayers);
            }
            seen[r] = true;
        }
        let cells = self
            .cells
            .iter()
            .map(|c| Cell::new(c.row, c.col, keep.iter().map(|&r| c.entries[r]).collect()))
            .collect();
        Trade::new(keep.len(), self.m, cells)
    }

    pub fn from_json_str(s: &str) -> Result<Trade> {
        let j: TradeJson = serde_json::from_str(s)?;
        trade_from_json(j)
    }

    pub fn to_json_string(&self) -> String {
        let j = TradeJson {
            mu: self.mu,
            m: self.m,
            k: Some(self.k),
            cells: self
                .cells
                .iter()
                .map(|c| CellJson {
                    row: c.row + 1,
                    col: c.col + 1,
                    entries: c.entries.iter().map(|&s| s + 1).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&j).expect("trade serialization cannot fail")
    }
}

/// Interchange format. All values 1-based; cells sorted by (row, col) on
/// output. The `k` field is informational on output and ignored on input
/// (k is always re-derived from the cells).
#[derive(Serialize, Deserialize)]
struct TradeJson {
    mu: usize,
    m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    cells: Vec<CellJson>,
}

#[derive(Serialize, Deserialize)]
struct CellJson {
    row: usize,
    col: usize,
    entries: Vec<usize>,
}

fn trade_from_json(j: TradeJson) -> Result<Trade> {
    if j.m > MAX_ORDER {
        return Err(Error::OrderTooLarge(j.m));
    }
    let mut cells = Vec::with_capacity(j.cells.len());
    for c in j.cells {
        if c.row < 1 || c.row > j.m || c.col < 1 || c.col > j.m {
            return Err(Error::CellOutOfRange { row: c.row, col: c.col, m: j.m });
        }
        let mut entries = Vec::with_capacity(c.entries.len());
        for s in c.entries {
            if s < 1 || s > j.m {
                return Err(Error::SymbolOutOfRange { sym: s, m: j.m });
            }
            entries.push(s - 1);
        }
        cells.push(Cell::new(c.row - 1, c.col - 1, entries));
    }
    Trade::new(j.mu, j.m, cells)
}

/// Checks every trade axiom and reports all violations (up to the cap):
/// distinct entries per cell, the Latin condition per layer, row and column
/// symbol-set balance across layers, k-homogeneity of rows, columns and
/// symbol counts, absence of empty lines, and volume k*m.
pub fn verify_trade(t: &Trade) -> VerificationReport {
    let mut rep = ReportBuilder::default();
    let (mu, m, k) = (t.mu, t.m, t.k);

    for cell in &t.cells {
        'cell: for a in 0..mu {
            for b in a + 1..mu {
                if cell.entries[a] == cell.entries[b] {
                    rep.push(
                        Rule::DistinctEntries,
                        format!("cell ({}, {})", cell.row + 1, cell.col + 1),
                        format!(
                            "layers {} and {} both hold symbol {}",
                            a + 1,
                            b + 1,
                            cell.entries[a] + 1
                        ),
                    );
                    break 'cell;
                }
            }
        }
    }

    // Cells are sorted by (row, col): rows are contiguous runs.
    let mut row_cells: Vec<&[Cell]> = Vec::with_capacity(m);
    {
        let mut start = 0;
        for row in 0..m {
            let end = start + t.cells[start..].iter().take_while(|c| c.row == row).count();
            row_cells.push(&t.cells[start..end]);
            start = end;
        }
    }
    let mut col_cells: Vec<Vec<&Cell>> = vec![Vec::new(); m];
    for cell in &t.cells {
        col_cells[cell.col].push(cell);
    }

    let line_sets = |cells: &[&Cell], r: usize| -> Vec<usize> {
        let mut syms: Vec<usize> = cells.iter().map(|c| c.entries[r]).collect();
        syms.sort_unstable();
        syms
    };

    for (kind, latin_rule, balance_rule) in
        [("row", Rule::LatinRow, Rule::RowBalance), ("column", Rule::LatinCol, Rule::ColBalance)]
    {
        for i in 0..m {
            let cells: Vec<&Cell> = if kind == "row" {
                row_cells[i].iter().collect()
            } else {
                col_cells[i].clone()
            };
            let mut base: Option<Vec<usize>> = None;
            for r in 0..mu {
                let syms = line_sets(&cells, r);
                for w in syms.windows(2) {
                    if w[0] == w[1] {
                        rep.push(
                            latin_rule,
                            format!("layer {}, {} {}", r + 1, kind, i + 1),
                            format!("symbol {} repeated", w[0] + 1),
                        );
                    }
                }
                let mut set = syms;
                set.dedup();
                match &base {
                    None => base = Some(set),
                    Some(b) => {
                        if *b != set {
                            rep.push(
                                balance_rule,
                                format!("{} {}, layer {}", kind, i + 1, r + 1),
                                format!(
                                    "symbol set {:?} differs from layer 1's {:?}",
                                    set.iter().map(|s| s + 1).collect::<Vec<_>>(),
                                    b.iter().map(|s| s + 1).collect::<Vec<_>>()
                                ),
                            );
                        }
                    }
                }
            }
        }
    }

    for i in 0..m {
        let c = row_cells[i].len();
        if c != k {
            rep.push(
                Rule::Homogeneity,
                format!("row {}", i + 1),
                format!("{} filled cells, expected k = {}", c, k),
            );
        }
        if row_cells[i].is_empty() {
            rep.push(Rule::EmptyLine, format!("row {}", i + 1), "no filled cells".to_string());
        }
        let c = col_cells[i].len();
        if c != k {
            rep.push(
                Rule::Homogeneity,
                format!("column {}", i + 1),
                format!("{} filled cells, expected k = {}", c, k),
            );
        }
        if col_cells[i].is_empty() {
            rep.push(Rule::EmptyLine, format!("column {}", i + 1), "no filled cells".to_string());
        }
    }

    let mut counts = vec![0usize; mu * m];
    for cell in &t.cells {
        for (r, &s) in cell.entries.iter().enumerate() {
            counts[r * m + s] += 1;
        }
    }
    for r in 0..mu {
        for s in 0..m {
            let c = counts[r * m + s];
            if c != k {
                rep.push(
                    Rule::Homogeneity,
                    format!("layer {}, symbol {}", r + 1, s + 1),
                    format!("appears {} times, expected k = {}", c, k),
                );
            }
        }
    }

    if t.cells.len() != k * m {
        rep.push(
            Rule::Volume,
            "trade".to_string(),
            format!("volume {}, expected k * m = {}", t.cells.len(), k * m),
        );
    }

    rep.finish()
}

/// Pretty-prints the grid: one line per row, each cell as its entries joined
/// with "/" (1-based), empty cells as a bullet, constant column width.
pub fn render_grid(t: &Trade) -> String {
    let m = t.m;
    if m == 0 {
        return String::new();
    }
    let mut grid: Vec<Option<&Cell>> = vec![None; m * m];
    for cell in t.cells() {
        grid[cell.row * m + cell.col] = Some(cell);
    }
    let text = |c: Option<&Cell>| -> String {
        match c {
            None => "\u{2022}".to_string(),
            Some(cell) => cell
                .entries
                .iter()
                .map(|&s| (s + 1).to_string())
                .collect::<Vec<_>>()
                .join("/"),
        }
    };
    let width = grid.iter().map(|&c| text(c).chars().count()).max().unwrap_or(1);
    let mut out = String::new();
    for i in 0..m {
        let mut line = String::new();
        for j in 0..m {
            if j > 0 {
                line.push(' ');
            }
            let s = text(grid[i * m + j]);
            let pad = width - s.chars().count();
            line.push_str(&s);
            for _ in 0..pad {
                line.push(' ');
            }
        }
        out.push_str(line.trim_end());
        if i + 1 < m {
            out.push('\n');
        }
    }
    out
}
