//! Backtracking searches: base-row discovery and whole-trade
//! existence/nonexistence, with node/wall budgets, resumable checkpoints,
//! and deterministic parallel work splitting.
//!
//! A NONE verdict is an exhaustion proof over the (possibly
//! symmetry-reduced) space; it is never reported once any budget was hit.
//! Every FOUND witness is re-verified by the independent checkers before
//! being returned. `nodes` counts admitted candidate attempts, the
//! currency of `max_nodes`; the depth histogram counts accepted
//! assignments per depth.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::circulant::{expand_base_row, BaseRow, Item};
use crate::trade::{Cell, Trade};
use crate::{Error, Result};

/// Search state uses 64-bit symbol masks, so searched orders are capped
/// well below the general construction maximum.
pub const MAX_SEARCH_ORDER: usize = 64;

#[derive(Debug, Clone)]
pub struct SearchBudget {
    pub max_nodes: Option<u64>,
    pub max_seconds: Option<f64>,
    pub parallel: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_nodes: None, max_seconds: None, parallel: 1 }
    }
}

impl SearchBudget {
    pub fn nodes(mut self, n: u64) -> Self {
        self.max_nodes = Some(n);
        self
    }

    pub fn seconds(mut self, s: f64) -> Self {
        self.max_seconds = Some(s);
        self
    }

    pub fn parallel(mut self, w: usize) -> Self {
        self.parallel = w.max(1);
        self
    }
}

/// Structural prunes for mu = 3, k = 4 instances. Disabling them never
/// changes a verdict, only the node count.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Within a row, two symbols can never end up sharing an identical
    /// 3-cell support: the row's fourth filled cell would be left with
    /// fewer than 3 usable symbols.
    pub prune_row_frequency: bool,
    /// For m = 6 only: once a symbol's 12 cells settle into the forced
    /// 4x4-block-minus-transversal shape, the transversal cells must stay
    /// empty (a filled one would force a fifth entry into some column).
    pub prune_transversal: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { prune_row_frequency: true, prune_transversal: true }
    }
}

#[derive(Debug)]
pub enum SearchOutcome<W> {
    Found(W),
    None,
    Timeout(Checkpoint),
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchStats {
    pub verdict: String,
    pub nodes: u64,
    pub depth_histogram: Vec<u64>,
    pub wall_ms: u128,
}

#[derive(Debug)]
pub struct SearchRun<W> {
    pub outcome: SearchOutcome<W>,
    pub stats: SearchStats,
}

// ---------------------------------------------------------------------------
// Checkpoints: an ordered list of partial-assignment prefixes. Each prefix
// means "explore every completion of `path` whose choice at the frontier
// comes strictly after `after` in the deterministic candidate order"
// (from the first candidate when `after` is null). The list is kept in
// the order the uninterrupted search would visit the subspaces, so a
// resumed run reproduces the original exploration order. All coordinates
// and symbols are 1-based in JSON.

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ItemRep {
    pub symbols: Vec<usize>,
    pub col: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellRep {
    pub row: usize,
    pub col: usize,
    /// Null records a cell left empty.
    pub entries: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaseRowPrefix {
    pub items: Vec<ItemRep>,
    pub after: Option<ItemRep>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TradePrefix {
    pub cells: Vec<CellRep>,
    pub after: Option<CellRep>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Checkpoint {
    BaseRow {
        mu: usize,
        k: usize,
        m: usize,
        seed: Option<u64>,
        prefixes: Vec<BaseRowPrefix>,
    },
    Trade {
        mu: usize,
        k: usize,
        m: usize,
        symmetry: bool,
        options: SearchOptions,
        prefixes: Vec<TradePrefix>,
    },
}

impl Checkpoint {
    pub fn from_json_str(s: &str) -> Result<Checkpoint> {
        let cp: Checkpoint = serde_json::from_str(s)?;
        cp.validate()?;
        Ok(cp)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Range sanity only; full legality of every prefix is re-checked
    /// against the incremental constraints when the search resumes.
    fn validate(&self) -> Result<()> {
        fn syms_ok(vals: &[usize], mu: usize, m: usize) -> Result<()> {
            if vals.len() != mu {
                return Err(Error::invalid("checkpoint entry tuple has wrong arity"));
            }
            for &v in vals {
                if v < 1 || v > m {
                    return Err(Error::invalid("checkpoint symbol out of range"));
                }
            }
            Ok(())
        }
        match self {
            Checkpoint::BaseRow { mu, k, m, prefixes, .. } => {
                check_params(*mu, *k, *m)?;
                let item_ok = |it: &ItemRep| -> Result<()> {
                    syms_ok(&it.symbols, *mu, *m)?;
                    if it.col < 1 || it.col > *m {
                        return Err(Error::invalid("checkpoint column out of range"));
                    }
                    Ok(())
                };
                for p in prefixes {
                    if p.items.len() > *k {
                        return Err(Error::invalid("checkpoint prefix longer than k"));
                    }
                    for it in &p.items {
                        item_ok(it)?;
                    }
                    if let Some(a) = &p.after {
                        item_ok(a)?;
                    }
                }
            }
            Checkpoint::Trade { mu, k, m, prefixes, .. } => {
                check_params(*mu, *k, *m)?;
                let cell_ok = |c: &CellRep| -> Result<()> {
                    if c.row < 1 || c.row > *m || c.col < 1 || c.col > *m {
                        return Err(Error::invalid("checkpoint cell out of range"));
                    }
                    if let Some(e) = &c.entries {
                        syms_ok(e, *mu, *m)?;
                    }
                    Ok(())
                };
                for p in prefixes {
                    if p.cells.len() > m * m {
                        return Err(Error::invalid("checkpoint prefix longer than the grid"));
                    }
                    for c in &p.cells {
                        cell_ok(c)?;
                    }
                    if let Some(a) = &p.after {
                        cell_ok(a)?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_params(mu: usize, k: usize, m: usize) -> Result<()> {
    if mu < 2 {
        return Err(Error::MuTooSmall(mu));
    }
    if !(mu <= k && k <= m) {
        return Err(Error::invalid(format!(
            "need mu <= k <= m, got ({}, {}, {})",
            mu, k, m
        )));
    }
    if m > MAX_SEARCH_ORDER {
        return Err(Error::invalid(format!(
            "search supports m <= {}, got {}",
            MAX_SEARCH_ORDER, m
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Generic DFS engine over an abstract assignment space.

pub(crate) trait Space: Sync {
    type Cand: Clone + Send + Sync + PartialEq;
    type State: Send;
    type Witness: Send;

    fn new_state(&self) -> Self::State;
    fn complete(&self, st: &Self::State) -> bool;
    /// Deterministic ordered candidate list at the current frontier.
    fn candidates(&self, st: &Self::State) -> Vec<Self::Cand>;
    /// Validate against the incremental constraints and apply. Returns
    /// false with the state untouched when the candidate is illegal here,
    /// which also guards resumed checkpoints from hostile prefixes.
    fn push(&self, st: &mut Self::State, c: &Self::Cand) -> bool;
    fn pop(&self, st: &mut Self::State);
    fn witness(&self, st: &Self::State) -> Self::Witness;
}

pub(crate) struct Prefix<C> {
    pub(crate) path: Vec<C>,
    pub(crate) after: Option<C>,
}

impl<C> Prefix<C> {
    pub(crate) fn root() -> Prefix<C> {
        Prefix { path: Vec::new(), after: None }
    }
}

#[derive(Clone, Copy)]
pub(crate) enum Mode {
    FirstWitness,
    CountAll,
}

struct Limits {
    max_nodes: u64,
    deadline: Option<Instant>,
    width: usize,
}

struct Ctl {
    nodes: AtomicU64,
    max_nodes: u64,
    deadline: Option<Instant>,
    stopped: AtomicBool,
    found_min: AtomicUsize,
}

impl Ctl {
    fn new(limits: &Limits) -> Ctl {
        Ctl {
            nodes: AtomicU64::new(0),
            max_nodes: limits.max_nodes,
            deadline: limits.deadline,
            stopped: AtomicBool::new(false),
            found_min: AtomicUsize::new(usize::MAX),
        }
    }

    /// Counts one candidate attempt; flips the shared stop flag when a
    /// budget is exceeded.
    fn admit(&self) -> bool {
        if self.stopped.load(Ordering::Relaxed) {
            return false;
        }
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if n > self.max_nodes {
            self.stopped.store(true, Ordering::Relaxed);
            return false;
        }
        if n % 1024 == 0 {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.stopped.store(true, Ordering::Relaxed);
                    return false;
                }
            }
        }
        true
    }
}

enum Step<W> {
    Found(W),
    Done,
    Abort,
}

struct Worker<'a, S: Space> {
    space: &'a S,
    ctl: &'a Ctl,
    prefix_idx: usize,
    mode: Mode,
    depth_cap: Option<usize>,
    hist: Vec<u64>,
    path: Vec<S::Cand>,
    pending: Vec<Prefix<S::Cand>>,
    frontier: Vec<Prefix<S::Cand>>,
    solutions: u64,
}

impl<'a, S: Space> Worker<'a, S> {
    fn bump(&mut self, depth: usize) {
        if self.hist.len() <= depth {
            self.hist.resize(depth + 1, 0);
        }
        self.hist[depth] += 1;
    }

    /// DFS below the current state. `resume_after` constrains only this
    /// level. Abort unwinding records pending prefixes deepest-first,
    /// which is exactly the order the uninterrupted search would finish
    /// them in.
    fn descend(&mut self, st: &mut S::State, resume_after: Option<&S::Cand>) -> Step<S::Witness> {
        if self.space.complete(st) {
            match self.mode {
                Mode::FirstWitness => return Step::Found(self.space.witness(st)),
                Mode::CountAll => {
                    self.solutions += 1;
                    return Step::Done;
                }
            }
        }
        if let Some(cap) = self.depth_cap {
            if self.path.len() >= cap {
                self.frontier.push(Prefix { path: self.path.clone(), after: None });
                return Step::Done;
            }
        }
        if matches!(self.mode, Mode::FirstWitness)
            && self.ctl.found_min.load(Ordering::Relaxed) < self.prefix_idx
        {
            // A witness in an earlier prefix already decides the merge.
            return Step::Done;
        }
        let cands = self.space.candidates(st);
        let mut started = resume_after.is_none();
        let mut last_tried = resume_after.cloned();
        for c in &cands {
            if !started {
                if resume_after == Some(c) {
                    started = true;
                }
                continue;
            }
            if !self.ctl.admit() {
                self.pending.push(Prefix { path: self.path.clone(), after: last_tried });
                return Step::Abort;
            }
            if self.space.push(st, c) {
                self.bump(self.path.len());
                self.path.push(c.clone());
                let step = self.descend(st, None);
                self.path.pop();
                self.space.pop(st);
                match step {
                    Step::Found(w) => return Step::Found(w),
                    Step::Abort => {
                        self.pending.push(Prefix {
                            path: self.path.clone(),
                            after: Some(c.clone()),
                        });
                        return Step::Abort;
                    }
                    Step::Done => {}
                }
            }
            last_tried = Some(c.clone());
        }
        Step::Done
    }

    fn run_prefix(&mut self, prefix: &Prefix<S::Cand>) -> Result<Step<S::Witness>> {
        self.path.clear();
        let mut st = self.space.new_state();
        for c in &prefix.path {
            if !self.ctl.admit() {
                self.pending
                    .push(Prefix { path: prefix.path.clone(), after: prefix.after.clone() });
                return Ok(Step::Abort);
            }
            if !self.space.push(&mut st, c) {
                return Err(Error::invalid(
                    "checkpoint prefix is not a valid partial assignment",
                ));
            }
            self.path.push(c.clone());
        }
        if let Some(a) = &prefix.after {
            if !self.space.candidates(&st).contains(a) {
                return Err(Error::invalid(
                    "checkpoint resume point is not a candidate at its prefix",
                ));
            }
        }
        let step = self.descend(&mut st, prefix.after.as_ref());
        self.path.clear();
        Ok(step)
    }
}

struct EngineOut<S: Space> {
    witness: Option<S::Witness>,
    solutions: u64,
    nodes: u64,
    aborted: bool,
    invalid: Option<Error>,
    pending: Vec<Prefix<S::Cand>>,
    frontier: Vec<Prefix<S::Cand>>,
    hist: Vec<u64>,
}

/// Runs `prefixes` to completion or budget exhaustion across
/// `limits.width` threads. Workers claim prefixes in order; a found
/// witness publishes its prefix index and only later-indexed work is
/// abandoned, so the surviving witness of a completing run does not
/// depend on the width.
fn run_engine<S: Space>(
    space: &S,
    prefixes: Vec<Prefix<S::Cand>>,
    limits: &Limits,
    mode: Mode,
    depth_cap: Option<usize>,
) -> EngineOut<S> {
    let ctl = Ctl::new(limits);
    let width = limits.width.max(1).min(prefixes.len().max(1));
    let next = AtomicUsize::new(0);
    let found: Mutex<Vec<(usize, S::Witness)>> = Mutex::new(Vec::new());
    let pendings: Mutex<Vec<(usize, Vec<Prefix<S::Cand>>)>> = Mutex::new(Vec::new());
    let frontiers: Mutex<Vec<(usize, Vec<Prefix<S::Cand>>)>> = Mutex::new(Vec::new());
    let hist_all: Mutex<Vec<u64>> = Mutex::new(Vec::new());
    let solutions = AtomicU64::new(0);
    let invalid: Mutex<Option<Error>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..width {
            scope.spawn(|| {
                let mut w = Worker {
                    space,
                    ctl: &ctl,
                    prefix_idx: 0,
                    mode,
                    depth_cap,
                    hist: Vec::new(),
                    path: Vec::new(),
                    pending: Vec::new(),
                    frontier: Vec::new(),
                    solutions: 0,
                };
                loop {
                    let idx = next.fetch_add(1, Ordering::Relaxed);
                    if idx >= prefixes.len() {
                        break;
                    }
                    if matches!(mode, Mode::FirstWitness)
                        && ctl.found_min.load(Ordering::Relaxed) < idx
                    {
                        continue;
                    }
                    if ctl.stopped.load(Ordering::Relaxed) {
                        // Preserve unstarted work verbatim.
                        w.pending.push(Prefix {
                            path: prefixes[idx].path.clone(),
                            after: prefixes[idx].after.clone(),
                        });
                        pendings.lock().unwrap().push((idx, std::mem::take(&mut w.pending)));
                        continue;
                    }
                    w.prefix_idx = idx;
                    match w.run_prefix(&prefixes[idx]) {
                        Ok(Step::Found(witness)) => {
                            ctl.found_min.fetch_min(idx, Ordering::Relaxed);
                            found.lock().unwrap().push((idx, witness));
                        }
                        Ok(Step::Abort) => {
                            pendings.lock().unwrap().push((idx, std::mem::take(&mut w.pending)));
                        }
                        Ok(Step::Done) => {}
                        Err(e) => {
                            *invalid.lock().unwrap() = Some(e);
                            ctl.stopped.store(true, Ordering::Relaxed);
                        }
                    }
                    if !w.frontier.is_empty() {
                        frontiers.lock().unwrap().push((idx, std::mem::take(&mut w.frontier)));
                    }
                }
                solutions.fetch_add(w.solutions, Ordering::Relaxed);
                let mut h = hist_all.lock().unwrap();
                if h.len() < w.hist.len() {
                    h.resize(w.hist.len(), 0);
                }
                for (i, v) in w.hist.iter().enumerate() {
                    h[i] += v;
                }
            });
        }
    });

    let mut found = found.into_inner().unwrap();
    found.sort_by_key(|(i, _)| *i);
    let mut pendings = pendings.into_inner().unwrap();
    pendings.sort_by_key(|(i, _)| *i);
    let mut frontiers = frontiers.into_inner().unwrap();
    frontiers.sort_by_key(|(i, _)| *i);
    EngineOut {
        witness: found.into_iter().next().map(|(_, w)| w),
        solutions: solutions.into_inner(),
        nodes: ctl.nodes.into_inner(),
        aborted: ctl.stopped.into_inner(),
        invalid: invalid.into_inner().unwrap(),
        pending: pendings.into_iter().flat_map(|(_, p)| p).collect(),
        frontier: frontiers.into_iter().flat_map(|(_, f)| f).collect(),
        hist: hist_all.into_inner().unwrap(),
    }
}

/// Exhaustive solution count; used by the label-relaxation search.
pub(crate) struct CountRun {
    pub(crate) solutions: u64,
    pub(crate) nodes: u64,
    pub(crate) exhausted: bool,
}

pub(crate) fn count_all<S: Space>(space: &S, budget: &SearchBudget) -> Result<CountRun> {
    let limits = Limits {
        max_nodes: budget.max_nodes.unwrap_or(u64::MAX),
        deadline: budget.max_seconds.map(|s| Instant::now() + Duration::from_secs_f64(s)),
        width: budget.parallel,
    };
    let out = run_engine(space, vec![Prefix::root()], &limits, Mode::CountAll, None);
    if let Some(e) = out.invalid {
        return Err(e);
    }
    Ok(CountRun { solutions: out.solutions, nodes: out.nodes, exhausted: !out.aborted })
}

// ---------------------------------------------------------------------------
// Base-row search space. Canonical form: the first item sits at column 0
// with symbols (0, s1 < s2 < ...) since column shifts, symbol shifts, and
// layer order are all free relabelings; later items ascend by column.

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RowCand {
    symbols: Vec<usize>,
    col: usize,
}

struct BaseRowSpace {
    mu: usize,
    k: usize,
    m: usize,
    seed: Option<u64>,
}

struct BaseRowState {
    items: Vec<Item>,
    used_sym: Vec<u64>,
    used_diff: Vec<u64>,
    unions: Vec<(u64, u64)>,
}

impl BaseRowSpace {
    fn shuffle_key(&self, st: &BaseRowState) -> u64 {
        let mut h: u64 = 0xCBF2_9CE4_8422_2325;
        for it in &st.items {
            h = h.wrapping_mul(0x100_0000_01B3) ^ (it.col as u64 + 1);
            for &s in &it.symbols {
                h = h.wrapping_mul(0x100_0000_01B3) ^ (s as u64 + 1);
            }
        }
        h
    }

    fn enum_tuples(&self, st: &BaseRowState, col: usize, out: &mut Vec<RowCand>) {
        let first = st.items.is_empty();
        let (su0, du0) = *st.unions.last().unwrap();
        let mut tuple = vec![0usize; self.mu];
        fn rec(
            sp: &BaseRowSpace,
            st: &BaseRowState,
            col: usize,
            first: bool,
            layer: usize,
            su: u64,
            du: u64,
            tuple: &mut Vec<usize>,
            out: &mut Vec<RowCand>,
        ) {
            let (mu, k, m) = (sp.mu, sp.k, sp.m);
            if layer == mu {
                out.push(RowCand { symbols: tuple.clone(), col });
                return;
            }
            let (lo, hi) = if first && layer == 0 {
                (0, 1)
            } else if first {
                (tuple[layer - 1] + 1, m)
            } else {
                (0, m)
            };
            for s in lo..hi {
                if st.used_sym[layer] >> s & 1 == 1 || tuple[..layer].contains(&s) {
                    continue;
                }
                let d = (s + m - col) % m;
                if st.used_diff[layer] >> d & 1 == 1 {
                    continue;
                }
                let nsu = su | 1 << s;
                let ndu = du | 1 << d;
                if nsu.count_ones() as usize > k || ndu.count_ones() as usize > k {
                    continue;
                }
                tuple[layer] = s;
                rec(sp, st, col, first, layer + 1, nsu, ndu, tuple, out);
            }
        }
        rec(self, st, col, first, 0, su0, du0, &mut tuple, out);
    }
}

impl Space for BaseRowSpace {
    type Cand = RowCand;
    type State = BaseRowState;
    type Witness = BaseRow;

    fn new_state(&self) -> BaseRowState {
        BaseRowState {
            items: Vec::new(),
            used_sym: vec![0; self.mu],
            used_diff: vec![0; self.mu],
            unions: vec![(0, 0)],
        }
    }

    fn complete(&self, st: &BaseRowState) -> bool {
        st.items.len() == self.k
    }

    fn candidates(&self, st: &BaseRowState) -> Vec<RowCand> {
        let t = st.items.len();
        let (k, m) = (self.k, self.m);
        let mut out = Vec::new();
        if t == 0 {
            self.enum_tuples(st, 0, &mut out);
        } else {
            let lo = st.items[t - 1].col + 1;
            let hi = m - k + t + 1;
            for col in lo..hi {
                self.enum_tuples(st, col, &mut out);
            }
        }
        if let Some(seed) = self.seed {
            shuffle_deterministic(&mut out, seed ^ self.shuffle_key(st));
        }
        out
    }

    fn push(&self, st: &mut BaseRowState, c: &RowCand) -> bool {
        let (mu, k, m) = (self.mu, self.k, self.m);
        let t = st.items.len();
        if t >= k || c.symbols.len() != mu || c.col >= m {
            return false;
        }
        if t == 0 {
            if c.col != 0 || c.symbols[0] != 0 {
                return false;
            }
            if !c.symbols.windows(2).all(|w| w[0] < w[1]) {
                return false;
            }
        } else if c.col <= st.items[t - 1].col || c.col > m - k + t {
            return false;
        }
        let (mut su, mut du) = *st.unions.last().unwrap();
        for (r, &s) in c.symbols.iter().enumerate() {
            if s >= m || st.used_sym[r] >> s & 1 == 1 || c.symbols[..r].contains(&s) {
                return false;
            }
            let d = (s + m - c.col) % m;
            if st.used_diff[r] >> d & 1 == 1 {
                return false;
            }
            su |= 1 << s;
            du |= 1 << d;
        }
        if su.count_ones() as usize > k || du.count_ones() as usize > k {
            return false;
        }
        for (r, &s) in c.symbols.iter().enumerate() {
            st.used_sym[r] |= 1 << s;
            st.used_diff[r] |= 1 << ((s + m - c.col) % m);
        }
        st.unions.push((su, du));
        st.items.push(Item { symbols: c.symbols.clone(), col: c.col });
        true
    }

    fn pop(&self, st: &mut BaseRowState) {
        let it = st.items.pop().expect("pop matches push");
        for (r, &s) in it.symbols.iter().enumerate() {
            st.used_sym[r] &= !(1 << s);
            st.used_diff[r] &= !(1 << ((s + self.m - it.col) % self.m));
        }
        st.unions.pop();
    }

    fn witness(&self, st: &BaseRowState) -> BaseRow {
        BaseRow::new(self.mu, self.m, st.items.clone()).expect("searched items construct")
    }
}

/// Fisher-Yates driven by a splitmix-style generator: deterministic for a
/// given key, so shuffled searches checkpoint and resume coherently.
fn shuffle_deterministic<T>(v: &mut [T], mut key: u64) {
    let mut next = move || {
        key = key.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = key;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    for i in (1..v.len()).rev() {
        let j = (next() % (i as u64 + 1)) as usize;
        v.swap(i, j);
    }
}

// ---------------------------------------------------------------------------
// Whole-trade search space: row-major scan over the grid, each cell either
// skipped or filled with a layer-ordered entry tuple. With `symmetry` on,
// row 0 is pinned (layer 0 reads 0..k-1 across columns 0..k-1, the other
// layers ascend at cell (0,0)), symbols >= k are introduced in ascending
// order, and rows 2..m-1 must be lexicographically nondecreasing under a
// relabeling-invariant cell encoding. Each reduction quotients a free
// relabeling, so exhausting the reduced space still proves nonexistence.

type TradeCand = Option<Vec<usize>>;

struct TradeSpace {
    mu: usize,
    k: usize,
    m: usize,
    symmetry: bool,
    opts: SearchOptions,
}

struct TradeUndo {
    filled: bool,
    tight: bool,
    row_union: u64,
    col_union: u64,
    next_new: usize,
    empties_added: u8,
}

struct TradeState {
    scan: usize,
    filled: Vec<Cell>,
    row_fill: Vec<u8>,
    col_fill: Vec<u8>,
    row_mask: Vec<u64>,
    col_mask: Vec<u64>,
    row_union: Vec<u64>,
    col_union: Vec<u64>,
    layer_count: Vec<u8>,
    tokens: Vec<u32>,
    tight: bool,
    next_new: usize,
    row_support: Vec<u64>,
    sym_cells: Vec<u64>,
    sym_incidence: Vec<u8>,
    filled_mask: u64,
    must_empty: u64,
    empty_stack: Vec<u32>,
    undo: Vec<TradeUndo>,
}

const EMPTY_TOKEN: u32 = u32::MAX;

impl TradeSpace {
    fn prune_freq(&self) -> bool {
        self.opts.prune_row_frequency && self.mu == 3 && self.k == 4
    }

    fn prune_trans(&self) -> bool {
        self.opts.prune_transversal && self.mu == 3 && self.k == 4 && self.m == 6
    }

    /// Cell encoding for the row order: symbols >= k collapse to one
    /// wildcard class so the order is invariant under relabeling them.
    fn token(&self, entries: &[usize]) -> u32 {
        let base = (self.k + 2) as u32;
        let mut t = 1;
        for &s in entries {
            t = t * base + s.min(self.k) as u32;
        }
        t
    }

    /// Candidate entry tuples at (i, j), lexicographically ascending.
    fn tuples(&self, st: &TradeState, i: usize, j: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut tuple = vec![0usize; self.mu];
        fn rec(
            sp: &TradeSpace,
            st: &TradeState,
            i: usize,
            j: usize,
            layer: usize,
            next_new: usize,
            ru: u64,
            cu: u64,
            tuple: &mut Vec<usize>,
            out: &mut Vec<Vec<usize>>,
        ) {
            let (mu, k, m) = (sp.mu, sp.k, sp.m);
            if layer == mu {
                out.push(tuple.clone());
                return;
            }
            let pinned_row0 = sp.symmetry && i == 0;
            let (lo, hi) = if pinned_row0 && layer == 0 {
                (j, j + 1)
            } else if pinned_row0 && j == 0 {
                (tuple[layer - 1] + 1, k)
            } else if pinned_row0 {
                (0, k)
            } else {
                (0, m)
            };
            for s in lo..hi {
                if tuple[..layer].contains(&s) {
                    continue;
                }
                if st.row_mask[i * mu + layer] >> s & 1 == 1
                    || st.col_mask[j * mu + layer] >> s & 1 == 1
                    || st.layer_count[layer * m + s] as usize >= k
                {
                    continue;
                }
                let mut nn = next_new;
                if sp.symmetry && s >= k {
                    if s > nn {
                        continue;
                    }
                    if s == nn {
                        nn += 1;
                    }
                }
                let nru = ru | 1 << s;
                let ncu = cu | 1 << s;
                if nru.count_ones() as usize > k || ncu.count_ones() as usize > k {
                    continue;
                }
                tuple[layer] = s;
                rec(sp, st, i, j, layer + 1, nn, nru, ncu, tuple, out);
            }
        }
        rec(
            self,
            st,
            i,
            j,
            0,
            st.next_new,
            st.row_union[i],
            st.col_union[j],
            &mut tuple,
            &mut out,
        );
        out
    }
}

impl Space for TradeSpace {
    type Cand = TradeCand;
    type State = TradeState;
    type Witness = Trade;

    fn new_state(&self) -> TradeState {
        let (mu, m) = (self.mu, self.m);
        TradeState {
            scan: 0,
            filled: Vec::new(),
            row_fill: vec![0; m],
            col_fill: vec![0; m],
            row_mask: vec![0; m * mu],
            col_mask: vec![0; m * mu],
            row_union: vec![0; m],
            col_union: vec![0; m],
            layer_count: vec![0; mu * m],
            tokens: vec![0; m * m],
            tight: false,
            next_new: self.k,
            row_support: vec![0; m * m],
            sym_cells: vec![0; m],
            sym_incidence: vec![0; m],
            filled_mask: 0,
            must_empty: 0,
            empty_stack: Vec::new(),
            undo: Vec::new(),
        }
    }

    fn complete(&self, st: &TradeState) -> bool {
        st.scan == self.m * self.m
    }

    fn candidates(&self, st: &TradeState) -> Vec<TradeCand> {
        let (k, m) = (self.k, self.m);
        let (i, j) = (st.scan / m, st.scan % m);
        let mut out: Vec<TradeCand> = Vec::new();
        let forced_fill = self.symmetry && i == 0 && j < k;
        let forced_skip = self.symmetry && i == 0 && j >= k;
        if !forced_skip
            && (st.row_fill[i] as usize) < k
            && (st.col_fill[j] as usize) < k
            && !(self.prune_trans() && st.must_empty >> (i * m + j) & 1 == 1)
        {
            let prev_token = if i >= 2 { st.tokens[(i - 1) * m + j] } else { 0 };
            for t in self.tuples(st, i, j) {
                if self.symmetry && i >= 2 && st.tight && self.token(&t) < prev_token {
                    continue;
                }
                out.push(Some(t));
            }
        }
        if !forced_fill {
            // A skip spends one of the row's and the column's remaining
            // chances; both fill deficits must stay reachable. Its token
            // is the largest, so the row order never rejects it.
            let row_ok = k - st.row_fill[i] as usize <= m - j - 1;
            let col_ok = k - st.col_fill[j] as usize <= m - i - 1;
            if row_ok && col_ok {
                out.push(None);
            }
        }
        out
    }

    fn push(&self, st: &mut TradeState, c: &TradeCand) -> bool {
        let (mu, k, m) = (self.mu, self.k, self.m);
        if st.scan >= m * m {
            return false;
        }
        let (i, j) = (st.scan / m, st.scan % m);
        let rows_left = m - i - 1;

        // Validation first; no state is touched until every check passes.
        let token;
        let mut new_empties: Vec<u32> = Vec::new();
        match c {
            None => {
                if self.symmetry && i == 0 && j < k {
                    return false;
                }
                if k - (st.row_fill[i] as usize) > m - j - 1
                    || k - (st.col_fill[j] as usize) > m - i - 1
                {
                    return false;
                }
                if j == m - 1 {
                    for r in 0..mu {
                        for s in 0..m {
                            if (st.layer_count[r * m + s] as usize) + rows_left < k {
                                return false;
                            }
                        }
                    }
                }
                token = EMPTY_TOKEN;
            }
            Some(entries) => {
                if entries.len() != mu {
                    return false;
                }
                if st.row_fill[i] as usize >= k || st.col_fill[j] as usize >= k {
                    return false;
                }
                if self.symmetry && i == 0 && j >= k {
                    return false;
                }
                if self.prune_trans() && st.must_empty >> (i * m + j) & 1 == 1 {
                    return false;
                }
                let mut ru = st.row_union[i];
                let mut cu = st.col_union[j];
                let mut nn = st.next_new;
                for (r, &s) in entries.iter().enumerate() {
                    if s >= m || entries[..r].contains(&s) {
                        return false;
                    }
                    if st.row_mask[i * mu + r] >> s & 1 == 1
                        || st.col_mask[j * mu + r] >> s & 1 == 1
                        || st.layer_count[r * m + s] as usize >= k
                    {
                        return false;
                    }
                    if self.symmetry {
                        if i == 0 {
                            if (r == 0 && s != j) || s >= k {
                                return false;
                            }
                            if j == 0 && r >= 1 && s <= entries[r - 1] {
                                return false;
                            }
                        }
                        if s >= k {
                            if s > nn {
                                return false;
                            }
                            if s == nn {
                                nn += 1;
                            }
                        }
                    }
                    ru |= 1 << s;
                    cu |= 1 << s;
                }
                if ru.count_ones() as usize > k || cu.count_ones() as usize > k {
                    return false;
                }
                token = self.token(entries);
                if self.symmetry && i >= 2 && st.tight && token < st.tokens[(i - 1) * m + j] {
                    return false;
                }
                if j == m - 1 {
                    for r in 0..mu {
                        for s in 0..m {
                            let eff = st.layer_count[r * m + s] as usize
                                + usize::from(entries[r] == s);
                            if eff + rows_left < k {
                                return false;
                            }
                        }
                    }
                }
                if self.prune_freq() {
                    for &s in entries {
                        let sup = st.row_support[i * m + s] | 1 << j;
                        if sup.count_ones() == 3 {
                            for s2 in 0..m {
                                if s2 == s {
                                    continue;
                                }
                                let mut sup2 = st.row_support[i * m + s2];
                                if entries.contains(&s2) {
                                    sup2 |= 1 << j;
                                }
                                if sup2 == sup {
                                    return false;
                                }
                            }
                        }
                    }
                }
                if self.prune_trans() {
                    for &s in entries {
                        if st.sym_incidence[s] as usize + 1 != mu * k {
                            continue;
                        }
                        let cells = st.sym_cells[s] | 1 << (i * m + j);
                        match transversal_of(cells, m) {
                            // 12 incidences outside the forced block shape
                            // cannot extend to a trade.
                            None => return false,
                            Some(tau) => {
                                if tau & (st.filled_mask | 1 << (i * m + j)) != 0 {
                                    return false;
                                }
                                for b in 0..(m * m) as u32 {
                                    if tau >> b & 1 == 1 && st.must_empty >> b & 1 == 0 {
                                        new_empties.push(b);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }

        // Apply.
        let undo = TradeUndo {
            filled: c.is_some(),
            tight: st.tight,
            row_union: st.row_union[i],
            col_union: st.col_union[j],
            next_new: st.next_new,
            empties_added: new_empties.len() as u8,
        };
        if let Some(entries) = c {
            for (r, &s) in entries.iter().enumerate() {
                st.row_mask[i * mu + r] |= 1 << s;
                st.col_mask[j * mu + r] |= 1 << s;
                st.layer_count[r * m + s] += 1;
                st.row_union[i] |= 1 << s;
                st.col_union[j] |= 1 << s;
                if self.symmetry && s >= k && s == st.next_new {
                    st.next_new = s + 1;
                }
                if self.prune_freq() {
                    st.row_support[i * m + s] |= 1 << j;
                }
                if self.prune_trans() {
                    st.sym_cells[s] |= 1 << (i * m + j);
                    st.sym_incidence[s] += 1;
                }
            }
            if self.prune_trans() {
                st.filled_mask |= 1 << (i * m + j);
                for &b in &new_empties {
                    st.must_empty |= 1 << b;
                    st.empty_stack.push(b);
                }
            }
            st.row_fill[i] += 1;
            st.col_fill[j] += 1;
            st.filled.push(Cell { row: i, col: j, entries: entries.clone() });
        }
        st.tokens[i * m + j] = token;
        if self.symmetry && i >= 2 {
            let prev_token = st.tokens[(i - 1) * m + j];
            st.tight = if j == 0 { token == prev_token } else { st.tight && token == prev_token };
        }
        st.scan += 1;
        st.undo.push(undo);
        true
    }

    fn pop(&self, st: &mut TradeState) {
        let (mu, m) = (self.mu, self.m);
        let undo = st.undo.pop().expect("pop matches push");
        st.scan -= 1;
        let (i, j) = (st.scan / m, st.scan % m);
        st.tight = undo.tight;
        if undo.filled {
            let cell = st.filled.pop().expect("filled cell recorded");
            st.row_fill[i] -= 1;
            st.col_fill[j] -= 1;
            st.row_union[i] = undo.row_union;
            st.col_union[j] = undo.col_union;
            st.next_new = undo.next_new;
            for (r, &s) in cell.entries.iter().enumerate() {
                st.row_mask[i * mu + r] &= !(1 << s);
                st.col_mask[j * mu + r] &= !(1 << s);
                st.layer_count[r * m + s] -= 1;
                if self.prune_freq() {
                    st.row_support[i * m + s] &= !(1 << j);
                }
                if self.prune_trans() {
                    st.sym_cells[s] &= !(1 << (i * m + j));
                    st.sym_incidence[s] -= 1;
                }
            }
            if self.prune_trans() {
                st.filled_mask &= !(1 << (i * m + j));
                for _ in 0..undo.empties_added {
                    let b = st.empty_stack.pop().expect("empties recorded");
                    st.must_empty &= !(1 << b);
                }
            }
        }
    }

    fn witness(&self, st: &TradeState) -> Trade {
        Trade::new(self.mu, self.m, st.filled.clone()).expect("searched cells construct")
    }
}

/// For a symbol whose cells should form a 4x4 block minus a transversal:
/// returns the transversal bits, or None when the incidence pattern is
/// not 4 rows by 4 columns with 3 cells in every line.
fn transversal_of(cells: u64, m: usize) -> Option<u64> {
    let row_mask = (1u64 << m) - 1;
    let mut rows = Vec::new();
    let mut cols_union = 0u64;
    for i in 0..m {
        let bits = cells >> (i * m) & row_mask;
        if bits != 0 {
            rows.push((i, bits));
            cols_union |= bits;
        }
    }
    if rows.len() != 4 || cols_union.count_ones() != 4 {
        return None;
    }
    let mut tau = 0u64;
    for &(i, bits) in &rows {
        if bits.count_ones() != 3 || bits & !cols_union != 0 {
            return None;
        }
        tau |= (cols_union & !bits) << (i * m);
    }
    for c in 0..m {
        if cols_union >> c & 1 == 0 {
            continue;
        }
        let count = rows.iter().filter(|(_, bits)| bits >> c & 1 == 1).count();
        if count != 3 {
            return None;
        }
    }
    Some(tau)
}

// ---------------------------------------------------------------------------
// Public entry points.

fn finish<S, FR, FV>(
    space: &S,
    budget: &SearchBudget,
    split_depth: usize,
    start: Vec<Prefix<S::Cand>>,
    make_checkpoint: FR,
    verify: FV,
) -> Result<SearchRun<S::Witness>>
where
    S: Space,
    FR: Fn(Vec<Prefix<S::Cand>>) -> Checkpoint,
    FV: Fn(&S::Witness) -> Result<()>,
{
    let t0 = Instant::now();
    let deadline = budget.max_seconds.map(|s| t0 + Duration::from_secs_f64(s));
    let budget_nodes = budget.max_nodes.unwrap_or(u64::MAX);
    let mut nodes = 0u64;
    let mut hist: Vec<u64> = Vec::new();

    let wrap = |outcome: SearchOutcome<S::Witness>, nodes: u64, hist: Vec<u64>| {
        let verdict = match &outcome {
            SearchOutcome::Found(_) => "FOUND",
            SearchOutcome::None => "NONE",
            SearchOutcome::Timeout(_) => "TIMEOUT",
        };
        Ok(SearchRun {
            outcome,
            stats: SearchStats {
                verdict: verdict.to_string(),
                nodes,
                depth_histogram: hist,
                wall_ms: t0.elapsed().as_millis(),
            },
        })
    };

    // Under parallel widths, first widen the start prefixes into a
    // frontier of fixed-depth stems for the workers to share.
    let prefixes = if budget.parallel > 1 {
        let limits = Limits { max_nodes: budget_nodes, deadline, width: budget.parallel };
        let out = run_engine(space, start, &limits, Mode::FirstWitness, Some(split_depth));
        if let Some(e) = out.invalid {
            return Err(e);
        }
        nodes += out.nodes;
        merge_hist(&mut hist, &out.hist);
        if let Some(w) = out.witness {
            verify(&w)?;
            return wrap(SearchOutcome::Found(w), nodes, hist);
        }
        if out.aborted {
            let mut pend = out.frontier;
            pend.extend(out.pending);
            return wrap(SearchOutcome::Timeout(make_checkpoint(pend)), nodes, hist);
        }
        out.frontier
    } else {
        start
    };
    if prefixes.is_empty() {
        return wrap(SearchOutcome::None, nodes, hist);
    }

    let limits = Limits {
        max_nodes: budget_nodes.saturating_sub(nodes),
        deadline,
        width: budget.parallel,
    };
    let out = run_engine(space, prefixes, &limits, Mode::FirstWitness, None);
    if let Some(e) = out.invalid {
        return Err(e);
    }
    nodes += out.nodes;
    merge_hist(&mut hist, &out.hist);
    if let Some(w) = out.witness {
        verify(&w)?;
        return wrap(SearchOutcome::Found(w), nodes, hist);
    }
    if out.aborted {
        return wrap(SearchOutcome::Timeout(make_checkpoint(out.pending)), nodes, hist);
    }
    wrap(SearchOutcome::None, nodes, hist)
}

fn merge_hist(total: &mut Vec<u64>, part: &[u64]) {
    if total.len() < part.len() {
        total.resize(part.len(), 0);
    }
    for (i, v) in part.iter().enumerate() {
        total[i] += v;
    }
}

pub fn search_base_row(
    mu: usize,
    k: usize,
    m: usize,
    budget: &SearchBudget,
) -> Result<SearchRun<BaseRow>> {
    search_base_row_seeded(mu, k, m, budget, None)
}

/// Seeded variant: the candidate order at every node is shuffled
/// deterministically from the seed, which diversifies long hunts without
/// giving up resumability or exhaustion soundness.
pub fn search_base_row_seeded(
    mu: usize,
    k: usize,
    m: usize,
    budget: &SearchBudget,
    seed: Option<u64>,
) -> Result<SearchRun<BaseRow>> {
    check_params(mu, k, m)?;
    let space = BaseRowSpace { mu, k, m, seed };
    run_base_row(&space, budget, vec![Prefix::root()])
}

fn run_base_row(
    space: &BaseRowSpace,
    budget: &SearchBudget,
    start: Vec<Prefix<RowCand>>,
) -> Result<SearchRun<BaseRow>> {
    let (mu, k, m, seed) = (space.mu, space.k, space.m, space.seed);
    finish(
        space,
        budget,
        2.min(k),
        start,
        |pend| Checkpoint::BaseRow {
            mu,
            k,
            m,
            seed,
            prefixes: pend
                .into_iter()
                .map(|p| BaseRowPrefix {
                    items: p.path.iter().map(item_rep).collect(),
                    after: p.after.as_ref().map(item_rep),
                })
                .collect(),
        },
        |row: &BaseRow| {
            row.verify().into_result()?;
            expand_base_row(row)?.verify().into_result()
        },
    )
}

fn item_rep(c: &RowCand) -> ItemRep {
    ItemRep { symbols: c.symbols.iter().map(|s| s + 1).collect(), col: c.col + 1 }
}

fn item_from_rep(rep: &ItemRep) -> RowCand {
    RowCand { symbols: rep.symbols.iter().map(|s| s - 1).collect(), col: rep.col - 1 }
}

pub fn resume_base_row(cp: &Checkpoint, budget: &SearchBudget) -> Result<SearchRun<BaseRow>> {
    cp.validate()?;
    match cp {
        Checkpoint::BaseRow { mu, k, m, seed, prefixes } => {
            let space = BaseRowSpace { mu: *mu, k: *k, m: *m, seed: *seed };
            let start = prefixes
                .iter()
                .map(|p| Prefix {
                    path: p.items.iter().map(item_from_rep).collect(),
                    after: p.after.as_ref().map(item_from_rep),
                })
                .collect();
            run_base_row(&space, budget, start)
        }
        _ => Err(Error::invalid("checkpoint is not a base-row checkpoint")),
    }
}

pub fn search_trade(
    mu: usize,
    k: usize,
    m: usize,
    budget: &SearchBudget,
    symmetry: bool,
    opts: &SearchOptions,
) -> Result<SearchRun<Trade>> {
    check_params(mu, k, m)?;
    let space = TradeSpace { mu, k, m, symmetry, opts: *opts };
    run_trade(&space, budget, vec![Prefix::root()])
}

fn run_trade(
    space: &TradeSpace,
    budget: &SearchBudget,
    start: Vec<Prefix<TradeCand>>,
) -> Result<SearchRun<Trade>> {
    let (mu, k, m) = (space.mu, space.k, space.m);
    let (symmetry, options) = (space.symmetry, space.opts);
    finish(
        space,
        budget,
        2 * m,
        start,
        move |pend| {
            let prefixes = pend
                .into_iter()
                .map(|p| TradePrefix {
                    cells: p.path.iter().enumerate().map(|(t, c)| cell_rep(t, c, m)).collect(),
                    after: p.after.as_ref().map(|c| cell_rep(p.path.len(), c, m)),
                })
                .collect();
            Checkpoint::Trade { mu, k, m, symmetry, options, prefixes }
        },
        |t: &Trade| t.verify().into_result(),
    )
}

fn cell_rep(scan: usize, c: &TradeCand, m: usize) -> CellRep {
    CellRep {
        row: scan / m + 1,
        col: scan % m + 1,
        entries: c.as_ref().map(|e| e.iter().map(|s| s + 1).collect()),
    }
}

fn cell_from_rep(scan: usize, rep: &CellRep, m: usize) -> Result<TradeCand> {
    if rep.row != scan / m + 1 || rep.col != scan % m + 1 {
        return Err(Error::invalid("checkpoint cells out of scan order"));
    }
    Ok(rep.entries.as_ref().map(|e| e.iter().map(|s| s - 1).collect()))
}

pub fn resume_trade(cp: &Checkpoint, budget: &SearchBudget) -> Result<SearchRun<Trade>> {
    cp.validate()?;
    match cp {
        Checkpoint::Trade { mu, k, m, symmetry, options, prefixes } => {
            let space =
                TradeSpace { mu: *mu, k: *k, m: *m, symmetry: *symmetry, opts: *options };
            let start = prefixes
                .iter()
                .map(|p| -> Result<Prefix<TradeCand>> {
                    let path = p
                        .cells
                        .iter()
                        .enumerate()
                        .map(|(t, c)| cell_from_rep(t, c, *m))
                        .collect::<Result<Vec<_>>>()?;
                    let after = match &p.after {
                        Some(a) => Some(cell_from_rep(p.cells.len(), a, *m)?),
                        None => None,
                    };
                    Ok(Prefix { path, after })
                })
                .collect::<Result<Vec<_>>>()?;
            run_trade(&space, budget, start)
        }
        _ => Err(Error::invalid("checkpoint is not a trade checkpoint")),
    }
}
