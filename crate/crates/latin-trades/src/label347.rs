//! Label relaxation ruling out a (3, 4, 7) trade.
//!
//! In any such trade the cells holding a fixed symbol form a 4x4 block
//! minus a transversal, and row/column symbol sets ("labels", 4-subsets
//! of the 7 symbols) obey strong counting constraints. This module
//! enumerates every admissible distribution of the 28 filled cells, then
//! exhaustively counts label assignments; zero solutions across all
//! cases shows no trade survives even this relaxation, which forgets how
//! cell symbols split across the three layers.
//!
//! Normal form of a distribution, with the block pinned to rows/cols
//! 0..3 and the transversal on its antidiagonal: each of rows 0..3 has
//! one extra filled cell among columns 4..6, two rows sharing column 4
//! and the two remaining rows taking columns 5 and 6 in ascending order
//! (column relabeling); columns 0..3 mirror this into rows 4..6 (row
//! relabeling). That leaves 6 x 6 = 36 distributions. Cell (4, 4) is
//! empty and the rest of the lower-right 3x3 square is filled, which is
//! forced by the line counts.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::search::{count_all, SearchBudget, Space};
use crate::{Error, Result};

const N: usize = 7;
const SLOTS: [Slot; 13] = [
    Slot::Col(0),
    Slot::Col(1),
    Slot::Col(2),
    Slot::Col(3),
    Slot::Row(1),
    Slot::Row(2),
    Slot::Row(3),
    Slot::Col(4),
    Slot::Col(5),
    Slot::Col(6),
    Slot::Row(4),
    Slot::Row(5),
    Slot::Row(6),
];

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    Row(usize),
    Col(usize),
}

/// One admissible arrangement of the 28 filled cells.
#[derive(Debug, Clone)]
pub struct Distribution {
    /// Extra filled column of each of rows 0..3.
    pub row_extra: [usize; 4],
    /// Extra filled row of each of columns 0..3.
    pub col_extra: [usize; 4],
    filled: [[bool; N]; N],
}

impl Distribution {
    pub fn filled(&self, i: usize, j: usize) -> bool {
        self.filled[i][j]
    }
}

/// The 36 distributions in normal form, enumerated pair-major.
pub fn distributions() -> Vec<Distribution> {
    let mut maps = Vec::new();
    for a in 0..4 {
        for b in a + 1..4 {
            let singles: Vec<usize> = (0..4).filter(|&r| r != a && r != b).collect();
            let mut map = [0usize; 4];
            map[a] = 4;
            map[b] = 4;
            map[singles[0]] = 5;
            map[singles[1]] = 6;
            maps.push(map);
        }
    }
    assert_eq!(maps.len(), 6);
    let mut out = Vec::new();
    for row_extra in &maps {
        for col_extra in &maps {
            let mut filled = [[false; N]; N];
            for i in 0..4 {
                for j in 0..4 {
                    // block minus the antidiagonal transversal
                    filled[i][j] = j != 3 - i;
                }
            }
            for r in 0..4 {
                filled[r][row_extra[r]] = true;
            }
            for c in 0..4 {
                filled[col_extra[c]][c] = true;
            }
            for i in 4..N {
                for j in 4..N {
                    filled[i][j] = (i, j) != (4, 4);
                }
            }
            let total: usize =
                filled.iter().map(|row| row.iter().filter(|&&f| f).count()).sum();
            assert_eq!(total, 28);
            for t in 0..N {
                assert_eq!(filled[t].iter().filter(|&&f| f).count(), 4);
                assert_eq!((0..N).filter(|&i| filled[i][t]).count(), 4);
            }
            out.push(Distribution {
                row_extra: *row_extra,
                col_extra: *col_extra,
                filled,
            });
        }
    }
    assert_eq!(out.len(), 36);
    out
}

/// First-row content configurations: the sets held by the filled cells
/// of row 0 at columns 0, 1, 2. The extra cell always holds {1, 2, 3}
/// because symbol 0 is confined to the block.
fn configs() -> [[u8; 3]; 3] {
    let s012 = 0b0111u8;
    let s013 = 0b1011u8;
    let s023 = 0b1101u8;
    [[s012, s013, s023], [s013, s023, s012], [s023, s013, s012]]
}

// ---------------------------------------------------------------------------
// The label space: thirteen 4-subset variables (row 0 is pinned to
// {0,1,2,3}), assigned in a fixed order that lets the intersection
// constraint bind early.

struct LabelSpace {
    filled: [[bool; N]; N],
    /// Required subset per column label (from the configuration).
    col_required: [u8; N],
    union_bound: bool,
    subsets: Vec<u8>,
    rows_left_after: [u8; 13],
    cols_left_after: [u8; 13],
}

struct LabelState {
    idx: usize,
    row_label: [u8; N],
    col_label: [u8; N],
    row_set: [bool; N],
    col_set: [bool; N],
    sym_rows: [u8; N],
    sym_cols: [u8; N],
}

impl LabelSpace {
    fn new(dist: &Distribution, config: &[u8; 3], union_bound: bool) -> LabelSpace {
        let mut col_required = [0u8; N];
        col_required[..3].copy_from_slice(config);
        // row 0's extra cell holds {1,2,3}
        col_required[dist.row_extra[0]] |= 0b1110;
        let subsets: Vec<u8> = (0u8..128).filter(|s| s.count_ones() == 4).collect();
        assert_eq!(subsets.len(), 35);
        let mut rows_left_after = [0u8; 13];
        let mut cols_left_after = [0u8; 13];
        for idx in 0..13 {
            for t in idx + 1..13 {
                match SLOTS[t] {
                    Slot::Row(_) => rows_left_after[idx] += 1,
                    Slot::Col(_) => cols_left_after[idx] += 1,
                }
            }
        }
        LabelSpace {
            filled: dist.filled,
            col_required,
            union_bound,
            subsets,
            rows_left_after,
            cols_left_after,
        }
    }

    fn admissible(&self, st: &LabelState, slot: Slot, label: u8, left: (u8, u8)) -> bool {
        let (rows_left, cols_left) = left;
        match slot {
            Slot::Row(i) => {
                // symbol 0 lives in rows 0..3 only
                if (label & 1 == 1) != (i < 4) {
                    return false;
                }
                for s in 0..N {
                    let add = u8::from(label >> s & 1 == 1);
                    let cnt = st.sym_rows[s] + add;
                    if cnt > 4 || cnt + rows_left < 4 {
                        return false;
                    }
                }
                if self.union_bound {
                    for j in 0..N {
                        if self.filled[i][j]
                            && st.col_set[j]
                            && (label & st.col_label[j]).count_ones() < 3
                        {
                            return false;
                        }
                    }
                }
                true
            }
            Slot::Col(j) => {
                if (label & 1 == 1) != (j < 4) {
                    return false;
                }
                if label & self.col_required[j] != self.col_required[j] {
                    return false;
                }
                for s in 0..N {
                    let add = u8::from(label >> s & 1 == 1);
                    let cnt = st.sym_cols[s] + add;
                    if cnt > 4 || cnt + cols_left < 4 {
                        return false;
                    }
                }
                if self.union_bound {
                    for i in 0..N {
                        if self.filled[i][j]
                            && st.row_set[i]
                            && (label & st.row_label[i]).count_ones() < 3
                        {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }
}

impl Space for LabelSpace {
    type Cand = u8;
    type State = LabelState;
    type Witness = ();

    fn new_state(&self) -> LabelState {
        let mut st = LabelState {
            idx: 0,
            row_label: [0; N],
            col_label: [0; N],
            row_set: [false; N],
            col_set: [false; N],
            sym_rows: [0; N],
            sym_cols: [0; N],
        };
        st.row_label[0] = 0b1111;
        st.row_set[0] = true;
        for s in 0..4 {
            st.sym_rows[s] = 1;
        }
        st
    }

    fn complete(&self, st: &LabelState) -> bool {
        st.idx == SLOTS.len()
    }

    fn candidates(&self, st: &LabelState) -> Vec<u8> {
        let slot = SLOTS[st.idx];
        let left = (self.rows_left_after[st.idx], self.cols_left_after[st.idx]);
        self.subsets
            .iter()
            .copied()
            .filter(|&label| self.admissible(st, slot, label, left))
            .collect()
    }

    fn push(&self, st: &mut LabelState, c: &u8) -> bool {
        if st.idx >= SLOTS.len() {
            return false;
        }
        let slot = SLOTS[st.idx];
        let left = (self.rows_left_after[st.idx], self.cols_left_after[st.idx]);
        if c.count_ones() != 4 || !self.admissible(st, slot, *c, left) {
            return false;
        }
        match slot {
            Slot::Row(i) => {
                st.row_label[i] = *c;
                st.row_set[i] = true;
                for s in 0..N {
                    st.sym_rows[s] += u8::from(c >> s & 1 == 1);
                }
            }
            Slot::Col(j) => {
                st.col_label[j] = *c;
                st.col_set[j] = true;
                for s in 0..N {
                    st.sym_cols[s] += u8::from(c >> s & 1 == 1);
                }
            }
        }
        st.idx += 1;
        true
    }

    fn pop(&self, st: &mut LabelState) {
        st.idx -= 1;
        match SLOTS[st.idx] {
            Slot::Row(i) => {
                let c = st.row_label[i];
                st.row_set[i] = false;
                st.row_label[i] = 0;
                for s in 0..N {
                    st.sym_rows[s] -= u8::from(c >> s & 1 == 1);
                }
            }
            Slot::Col(j) => {
                let c = st.col_label[j];
                st.col_set[j] = false;
                st.col_label[j] = 0;
                for s in 0..N {
                    st.sym_cols[s] -= u8::from(c >> s & 1 == 1);
                }
            }
        }
    }

    fn witness(&self, _st: &LabelState) {}
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct CaseCount {
    pub distribution: usize,
    pub config: usize,
    pub solutions: u64,
    pub nodes: u64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct LabelReport {
    pub distributions: usize,
    pub configs: usize,
    pub union_bound: bool,
    pub total_solutions: u64,
    pub nodes: u64,
    /// True only if every case was counted to exhaustion.
    pub exhausted: bool,
    pub cases: Vec<CaseCount>,
}

/// Counts label assignments over all 36 x 3 cases. `union_bound` gates
/// the filled-cell constraint |row label ∪ column label| <= 5; with it
/// the expected total is zero, and without it solutions exist, which
/// guards against the search being vacuously empty. `budget.parallel`
/// spreads cases across threads; `budget.max_seconds` bounds the whole
/// run, `budget.max_nodes` each case.
pub fn label_search_347(union_bound: bool, budget: &SearchBudget) -> Result<LabelReport> {
    let dists = distributions();
    let cfgs = configs();
    let deadline = budget.max_seconds.map(|s| Instant::now() + Duration::from_secs_f64(s));
    let mut cases = Vec::new();
    for d in 0..dists.len() {
        for c in 0..cfgs.len() {
            cases.push((d, c));
        }
    }

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, CaseCount, bool)>> = Mutex::new(Vec::new());
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let width = budget.parallel.max(1).min(cases.len());
    std::thread::scope(|scope| {
        for _ in 0..width {
            scope.spawn(|| loop {
                let at = next.fetch_add(1, Ordering::Relaxed);
                if at >= cases.len() {
                    break;
                }
                let (d, c) = cases[at];
                let space = LabelSpace::new(&dists[d], &cfgs[c], union_bound);
                let case_budget = SearchBudget {
                    max_nodes: budget.max_nodes,
                    max_seconds: deadline.map(|t| {
                        t.saturating_duration_since(Instant::now()).as_secs_f64()
                    }),
                    parallel: 1,
                };
                match count_all(&space, &case_budget) {
                    Ok(run) => {
                        results.lock().unwrap().push((
                            at,
                            CaseCount {
                                distribution: d,
                                config: c,
                                solutions: run.solutions,
                                nodes: run.nodes,
                            },
                            run.exhausted,
                        ));
                    }
                    Err(e) => {
                        *failure.lock().unwrap() = Some(e);
                        break;
                    }
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }

    let mut results = results.into_inner().unwrap();
    results.sort_by_key(|(at, _, _)| *at);
    let exhausted =
        results.len() == cases.len() && results.iter().all(|(_, _, done)| *done);
    let cases: Vec<CaseCount> = results.into_iter().map(|(_, cc, _)| cc).collect();
    Ok(LabelReport {
        distributions: dists.len(),
        configs: cfgs.len(),
        union_bound,
        total_solutions: cases.iter().map(|c| c.solutions).sum(),
        nodes: cases.iter().map(|c| c.nodes).sum(),
        exhausted,
        cases,
    })
}
