//! Frozen reference objects shared by the integration suites. Everything
//! here is 1-based, matching the JSON and text interfaces.

#![allow(dead_code)]

use latin_trades::circulant::{expand_base_row, BaseRow, Item};
use latin_trades::Trade;

/// The known (3, 5, 7) circulant base row: (symbols)_column.
pub fn reference_row_357() -> Vec<(usize, [usize; 3])> {
    vec![
        (1, [1, 2, 3]),
        (2, [3, 5, 2]),
        (3, [5, 3, 7]),
        (4, [7, 1, 5]),
        (5, [2, 7, 1]),
    ]
}

/// The full 35-cell expansion of `reference_row_357`, written out
/// independently: (row, col, [layer 1, layer 2, layer 3]).
pub fn reference_grid_357() -> Vec<(usize, usize, [usize; 3])> {
    vec![
        (1, 1, [1, 2, 3]),
        (1, 2, [3, 5, 2]),
        (1, 3, [5, 3, 7]),
        (1, 4, [7, 1, 5]),
        (1, 5, [2, 7, 1]),
        (2, 2, [2, 3, 4]),
        (2, 3, [4, 6, 3]),
        (2, 4, [6, 4, 1]),
        (2, 5, [1, 2, 6]),
        (2, 6, [3, 1, 2]),
        (3, 3, [3, 4, 5]),
        (3, 4, [5, 7, 4]),
        (3, 5, [7, 5, 2]),
        (3, 6, [2, 3, 7]),
        (3, 7, [4, 2, 3]),
        (4, 1, [5, 3, 4]),
        (4, 4, [4, 5, 6]),
        (4, 5, [6, 1, 5]),
        (4, 6, [1, 6, 3]),
        (4, 7, [3, 4, 1]),
        (5, 1, [4, 5, 2]),
        (5, 2, [6, 4, 5]),
        (5, 5, [5, 6, 7]),
        (5, 6, [7, 2, 6]),
        (5, 7, [2, 7, 4]),
        (6, 1, [3, 1, 5]),
        (6, 2, [5, 6, 3]),
        (6, 3, [7, 5, 6]),
        (6, 6, [6, 7, 1]),
        (6, 7, [1, 3, 7]),
        (7, 1, [2, 4, 1]),
        (7, 2, [4, 2, 6]),
        (7, 3, [6, 7, 4]),
        (7, 4, [1, 6, 7]),
        (7, 7, [7, 1, 2]),
    ]
}

/// The canonical 3-intercalate: entries[row][col] = [layer 1, 2, 3].
pub fn reference_intercalate() -> [[[usize; 3]; 3]; 3] {
    [
        [[1, 3, 2], [2, 1, 3], [3, 2, 1]],
        [[3, 2, 1], [1, 3, 2], [2, 1, 3]],
        [[2, 1, 3], [3, 2, 1], [1, 3, 2]],
    ]
}

/// The known 11-item base row of order 13: (symbols)_column.
pub fn reference_row_13() -> Vec<(usize, [usize; 3])> {
    vec![
        (1, [1, 2, 3]),
        (2, [3, 4, 2]),
        (3, [5, 3, 4]),
        (4, [7, 8, 9]),
        (5, [9, 11, 8]),
        (6, [11, 9, 13]),
        (7, [13, 1, 11]),
        (8, [2, 13, 1]),
        (9, [4, 5, 6]),
        (10, [6, 7, 5]),
        (11, [8, 6, 7]),
    ]
}

/// One-based (column, symbols) view of a base row.
pub fn row_items(b: &BaseRow) -> Vec<(usize, [usize; 3])> {
    b.items()
        .iter()
        .map(|it| {
            let s = &it.symbols;
            (it.col + 1, [s[0] + 1, s[1] + 1, s[2] + 1])
        })
        .collect()
}

/// One-based (row, col, entries) view of a trade, sorted row-major.
pub fn trade_cells(t: &Trade) -> Vec<(usize, usize, Vec<usize>)> {
    let mut cells: Vec<(usize, usize, Vec<usize>)> = t
        .cells()
        .iter()
        .map(|c| (c.row + 1, c.col + 1, c.entries.iter().map(|&e| e + 1).collect()))
        .collect();
    cells.sort();
    cells
}

/// Rebuilds a base row from 1-based (column, symbols) items.
pub fn row_from_items(m: usize, items: &[(usize, [usize; 3])]) -> BaseRow {
    let items: Vec<Item> = items
        .iter()
        .map(|&(c, s)| Item::new(vec![s[0] - 1, s[1] - 1, s[2] - 1], c - 1))
        .collect();
    BaseRow::new(3, m, items).unwrap()
}

/// Builds the trade claimed by `reference_grid_357` from its base row.
pub fn expanded_reference_357() -> Trade {
    expand_base_row(&row_from_items(7, &reference_row_357())).unwrap()
}
