//! Existence planning for 3-way k-homogeneous trades.
//!
//! `plan(k, m)` walks a fixed decision list over the implemented
//! constructions and returns an auditable recipe, a nonexistence verdict,
//! or an honest unknown. Every EXISTS is executed and verified before it
//! is returned. A certificate store of stored base rows (embedded, plus
//! an optional directory named by `LATINTRADES_CERT_DIR`) covers points
//! the compositional routes cannot reach.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::catalog::catalog;
use crate::circulant::{expand_base_row, BaseRow};
use crate::compose::{
    cyclic_trade, delete_diagonal, direct_sum, mod6_bitrade_row, mod6_family, product,
    sum_over_ols,
};
use crate::field::is_prime_power;
use crate::mols::{idempotent_mols, orthogonal_pair};
use crate::search::{search_base_row_seeded, SearchBudget, SearchOutcome, MAX_SEARCH_ORDER};
use crate::{Error, Result, Trade, MAX_ORDER};

/// Certificate directory override, a directory of `mu3_k{K}_m{M}.json`
/// files each holding a base row or a full trade.
pub const CERT_DIR_ENV: &str = "LATINTRADES_CERT_DIR";

const BUILTIN_CERTS: &str = include_str!("../data/builtin_certs.json");

/// An executable construction plan. Executing a node bottom-up yields a
/// verified trade with the node's implied parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Recipe {
    /// A catalog base row or family instance, expanded.
    Catalog { k: usize, m: usize, source: String },
    /// The rotated back-circulant full square.
    Cyclic { mu: usize, k: usize },
    /// Diagonal deletion of mu superposed idempotent MOLS of order q.
    DeleteDiagonal { mu: usize, q: usize },
    DirectSum { left: Box<Recipe>, right: Box<Recipe> },
    /// Layer counts multiply: a 3-way times a 2-way has 6 layers.
    Product { left: Box<Recipe>, right: Box<Recipe> },
    /// Parts of order p arranged over an orthogonal pair of order l;
    /// `parts` has length l, None marking an empty part.
    SumOverOls { l: usize, p: usize, parts: Vec<Option<Recipe>> },
    /// The 3-way base-row family at m = 1 (mod 6), k = m - 2.
    Mod6 { m: usize },
    /// The 2-way base row behind that family.
    Mod6Pair { m: usize },
    /// Keep the first mu layers.
    RestrictLayers { mu: usize, inner: Box<Recipe> },
    /// A base row found by search, embedded verbatim.
    SearchFound { row: BaseRow },
    /// A stored witness, resolved by name in the certificate store.
    Certificate { name: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Existence {
    Exists { recipe: Recipe },
    Nonexistent { reason: String },
    Unknown { reason: String },
}

impl Existence {
    pub fn exists(&self) -> bool {
        matches!(self, Existence::Exists { .. })
    }

    pub fn recipe(&self) -> Option<&Recipe> {
        match self {
            Existence::Exists { recipe } => Some(recipe),
            _ => None,
        }
    }
}

/// Writes m as a sum of the given part sizes with as few parts as
/// possible (ties broken toward larger parts), or None if no nonnegative
/// combination exists. Exact dynamic program; result ascending.
pub fn decompose(m: usize, parts: &[usize]) -> Option<Vec<usize>> {
    if m == 0 {
        return Some(Vec::new());
    }
    let mut sizes: Vec<usize> = parts.iter().copied().filter(|&p| p >= 1 && p <= m).collect();
    sizes.sort_unstable();
    sizes.dedup();
    const UNREACHED: u32 = u32::MAX;
    let mut best = vec![UNREACHED; m + 1];
    let mut take = vec![0usize; m + 1];
    best[0] = 0;
    for v in 1..=m {
        for &p in &sizes {
            if p > v {
                break;
            }
            if best[v - p] == UNREACHED {
                continue;
            }
            let cand = best[v - p] + 1;
            if cand < best[v] || (cand == best[v] && p > take[v]) {
                best[v] = cand;
                take[v] = p;
            }
        }
    }
    if best[m] == UNREACHED {
        return None;
    }
    let mut out = Vec::with_capacity(best[m] as usize);
    let mut v = m;
    while v > 0 {
        out.push(take[v]);
        v -= take[v];
    }
    out.sort_unstable();
    Some(out)
}

// ---------------------------------------------------------------------------
// Certificate store

enum Witness {
    Row(BaseRow),
    Full(Trade),
}

struct CertStore {
    by_key: HashMap<(usize, usize), String>,
    by_name: HashMap<String, Witness>,
}

#[derive(Deserialize)]
struct BuiltinCerts {
    rows: Vec<BaseRow>,
}

impl CertStore {
    fn load() -> Result<CertStore> {
        let mut store = CertStore { by_key: HashMap::new(), by_name: HashMap::new() };
        let built: BuiltinCerts = serde_json::from_str(BUILTIN_CERTS)?;
        for row in built.rows {
            if row.mu() != 3 {
                return Err(Error::invalid("built-in certificates must be 3-way"));
            }
            store.insert(row.k(), row.m(), Witness::Row(row));
        }
        if let Ok(dir) = std::env::var(CERT_DIR_ENV) {
            store.load_dir(&dir)?;
        }
        Ok(store)
    }

    fn insert(&mut self, k: usize, m: usize, wit: Witness) {
        let name = format!("mu3_k{}_m{}", k, m);
        self.by_key.insert((k, m), name.clone());
        self.by_name.insert(name, wit);
    }

    fn load_dir(&mut self, dir: &str) -> Result<()> {
        let entries = std::fs::read_dir(dir).map_err(|e| {
            Error::invalid(format!("cannot read certificate directory {}: {}", dir, e))
        })?;
        for entry in entries {
            let path = entry?.path();
            let stem = match path.file_name().and_then(|n| n.to_str()) {
                Some(n) => match n.strip_suffix(".json") {
                    Some(s) => s.to_string(),
                    None => continue,
                },
                None => continue,
            };
            let Some((k, m)) = parse_cert_name(&stem) else { continue };
            let text = std::fs::read_to_string(&path)?;
            let wit = match BaseRow::from_json_str(&text) {
                Ok(row) => Witness::Row(row),
                Err(_) => Witness::Full(Trade::from_json_str(&text).map_err(|e| {
                    Error::invalid(format!(
                        "{} holds neither a base row nor a trade: {}",
                        path.display(),
                        e
                    ))
                })?),
            };
            let (wmu, wk, wm) = match &wit {
                Witness::Row(r) => (r.mu(), r.k(), r.m()),
                Witness::Full(t) => (t.mu(), t.k(), t.m()),
            };
            if (wmu, wk, wm) != (3, k, m) {
                return Err(Error::invalid(format!(
                    "{} declares (3, {}, {}) but holds a ({}, {}, {}) witness",
                    path.display(),
                    k,
                    m,
                    wmu,
                    wk,
                    wm
                )));
            }
            self.insert(k, m, wit);
        }
        Ok(())
    }

    fn name_for(&self, k: usize, m: usize) -> Option<String> {
        self.by_key.get(&(k, m)).cloned()
    }

    fn witness(&self, name: &str) -> Option<&Witness> {
        self.by_name.get(name)
    }
}

fn parse_cert_name(stem: &str) -> Option<(usize, usize)> {
    let rest = stem.strip_prefix("mu3_k")?;
    let (k, m) = rest.split_once("_m")?;
    Some((k.parse().ok()?, m.parse().ok()?))
}

// ---------------------------------------------------------------------------

/// Memoizing planner. One instance shares route and search results across
/// calls, which the full-window sweep depends on for speed.
pub struct Planner {
    certs: CertStore,
    cheap: HashMap<(usize, usize), Existence>,
    two: HashMap<(usize, usize), Option<Recipe>>,
    full: HashMap<(usize, usize), Existence>,
    /// Budget for the last-resort base-row search inside `plan`.
    pub search_budget: SearchBudget,
}

/// One-shot convenience for [`Planner::plan`].
pub fn plan(k: usize, m: usize) -> Result<Existence> {
    Planner::new()?.plan(k, m)
}

/// One-shot convenience for [`Planner::execute`].
pub fn execute(recipe: &Recipe) -> Result<Trade> {
    Planner::new()?.execute(recipe)
}

impl Planner {
    pub fn new() -> Result<Planner> {
        Ok(Planner {
            certs: CertStore::load()?,
            cheap: HashMap::new(),
            two: HashMap::new(),
            full: HashMap::new(),
            // node-capped and unseeded, so verdicts are reproducible
            search_budget: SearchBudget::default().nodes(2_000_000),
        })
    }

    /// Decides (3, k, m). EXISTS carries a recipe that has already been
    /// executed and verified.
    pub fn plan(&mut self, k: usize, m: usize) -> Result<Existence> {
        if k < 3 {
            return Err(Error::invalid(format!("the planner needs k >= 3, got {}", k)));
        }
        if m < k {
            return Err(Error::invalid(format!("the planner needs m >= k, got m = {}", m)));
        }
        if m > MAX_ORDER {
            return Err(Error::OrderTooLarge(m));
        }
        if let Some(hit) = self.full.get(&(k, m)) {
            return Ok(hit.clone());
        }
        let mut status = self.plan_cheap(k, m);
        if matches!(status, Existence::Unknown { .. }) && !is_open_pair(k, m) {
            status = self.search_fallback(k, m);
        }
        if let Existence::Exists { recipe } = &status {
            let t = self.execute(recipe)?;
            if (t.mu(), t.k(), t.m()) != (3, k, m) {
                return Err(Error::invalid(format!(
                    "recipe for (3, {}, {}) built a ({}, {}, {}) trade",
                    k,
                    m,
                    t.mu(),
                    t.k(),
                    t.m()
                )));
            }
        }
        self.full.insert((k, m), status.clone());
        Ok(status)
    }

    /// The decision list without the last-resort search. Infallible:
    /// failures to find a route are UNKNOWN, not errors.
    fn plan_cheap(&mut self, k: usize, m: usize) -> Existence {
        if let Some(hit) = self.cheap.get(&(k, m)) {
            return hit.clone();
        }
        let status = self.plan_cheap_inner(k, m);
        self.cheap.insert((k, m), status.clone());
        status
    }

    fn plan_cheap_inner(&mut self, k: usize, m: usize) -> Existence {
        let exists = |recipe| Existence::Exists { recipe };
        // k = mu forces intercalate blocks, so k must divide m
        if k == 3 {
            return if m % 3 == 0 {
                exists(sum_copies(Recipe::Cyclic { mu: 3, k: 3 }, m / 3))
            } else {
                Existence::Nonexistent {
                    reason: "a (mu, k, m) trade with k = mu exists only when k divides m"
                        .to_string(),
                }
            };
        }
        // proved impossible
        if (k, m) == (4, 6) || (k, m) == (4, 7) {
            return Existence::Nonexistent {
                reason: format!("no (3, {}, {}) Latin trade exists", k, m),
            };
        }
        // open pairs, unless a certificate settles them
        if is_open_pair(k, m) {
            if let Some(name) = self.certs.name_for(k, m) {
                return exists(Recipe::Certificate { name });
            }
            return Existence::Unknown {
                reason: format!("existence of a (3, {}, {}) trade is unresolved", k, m),
            };
        }
        if k == m {
            return exists(Recipe::Cyclic { mu: 3, k });
        }
        if let Some((_, source)) = catalog().lookup(k, m) {
            return exists(Recipe::Catalog { k, m, source });
        }
        // mu = 3 needs q - 2 >= 3 idempotent squares, so q >= 5
        if m == k + 1 && m >= 5 && is_prime_power(m) {
            return exists(Recipe::DeleteDiagonal { mu: 3, q: m });
        }
        if m % 6 == 1 && m >= 7 && k == m - 2 {
            return exists(Recipe::Mod6 { m });
        }
        if let Some(r) = self.direct_sum_route(k, m) {
            return exists(r);
        }
        if let Some(r) = self.sum_over_ols_route(k, m) {
            return exists(r);
        }
        if let Some(r) = self.product_route(k, m) {
            return exists(r);
        }
        if let Some(name) = self.certs.name_for(k, m) {
            return exists(Recipe::Certificate { name });
        }
        Existence::Unknown {
            reason: format!("no implemented construction reaches (3, {}, {})", k, m),
        }
    }

    /// Splits m into a sum of smaller orders that all admit (3, k, .)
    /// trades, folded into a block-diagonal sum.
    fn direct_sum_route(&mut self, k: usize, m: usize) -> Option<Recipe> {
        if m < 2 * k {
            return None;
        }
        let parts: Vec<usize> = (k..=m - k)
            .filter(|&m2| self.plan_cheap(k, m2).exists())
            .collect();
        let sizes = decompose(m, &parts)?;
        let mut acc: Option<Recipe> = None;
        for &sz in &sizes {
            let child = self.plan_cheap(k, sz).recipe().cloned()?;
            acc = Some(join_sum(acc, child));
        }
        acc
    }

    /// Factors m = l * p and splits k into at most l part sizes that all
    /// admit (3, k_j, p) trades, arranged over an orthogonal pair of
    /// order l. Smallest usable l wins.
    fn sum_over_ols_route(&mut self, k: usize, m: usize) -> Option<Recipe> {
        for l in 3..=m / 3 {
            if m % l != 0 || l == 6 || orthogonal_pair(l).is_err() {
                continue;
            }
            let p = m / l;
            let avail: Vec<usize> =
                (3..=p).filter(|&kj| self.plan_cheap(kj, p).exists()).collect();
            let Some(sizes) = decompose(k, &avail) else { continue };
            if sizes.len() > l {
                continue;
            }
            let mut parts: Vec<Option<Recipe>> = Vec::with_capacity(l);
            for &kj in &sizes {
                parts.push(Some(self.plan_cheap(kj, p).recipe().cloned()?));
            }
            parts.resize(l, None);
            return Some(Recipe::SumOverOls { l, p, parts });
        }
        None
    }

    /// Multiplies two smaller trades and keeps three layers: two 2-way
    /// factors give four layers, a 3-way times a 2-way gives six.
    fn product_route(&mut self, k: usize, m: usize) -> Option<Recipe> {
        let splits: Vec<(usize, usize)> = (2..=m / 2)
            .filter(|&m1| m % m1 == 0 && m / m1 >= 2)
            .map(|m1| (m1, m / m1))
            .collect();
        for &(m1, m2) in &splits {
            for k1 in 2..=k / 2 {
                if k % k1 != 0 || k1 > m1 {
                    continue;
                }
                let k2 = k / k1;
                if k2 < 2 || k2 > m2 {
                    continue;
                }
                let Some(left) = self.plan_two(k1, m1) else { continue };
                let Some(right) = self.plan_two(k2, m2) else { continue };
                return Some(restrict3(Recipe::Product {
                    left: Box::new(left),
                    right: Box::new(right),
                }));
            }
        }
        for &(m1, m2) in &splits {
            for k1 in 3..k {
                if k % k1 != 0 || k1 > m1 {
                    continue;
                }
                let k2 = k / k1;
                if k2 < 2 || k2 > m2 {
                    continue;
                }
                let Some(left) = self.plan_cheap(k1, m1).recipe().cloned() else { continue };
                let Some(right) = self.plan_two(k2, m2) else { continue };
                return Some(restrict3(Recipe::Product {
                    left: Box::new(left),
                    right: Box::new(right),
                }));
            }
        }
        None
    }

    /// 2-way sub-planner feeding the product route. Small bounded
    /// searches are memoized, so repeated sweeps stay cheap.
    fn plan_two(&mut self, k: usize, m: usize) -> Option<Recipe> {
        if k < 2 || m < k {
            return None;
        }
        if let Some(hit) = self.two.get(&(k, m)) {
            return hit.clone();
        }
        let r = self.plan_two_inner(k, m);
        self.two.insert((k, m), r.clone());
        r
    }

    fn plan_two_inner(&mut self, k: usize, m: usize) -> Option<Recipe> {
        if m % k == 0 {
            return Some(sum_copies(Recipe::Cyclic { mu: 2, k }, m / k));
        }
        // mu = 2 needs q - 2 >= 2 idempotent squares, so q >= 4
        if m == k + 1 && m >= 4 && is_prime_power(m) {
            return Some(Recipe::DeleteDiagonal { mu: 2, q: m });
        }
        if m % 6 == 1 && m >= 7 && k == m - 2 {
            return Some(Recipe::Mod6Pair { m });
        }
        if m >= 2 * k {
            let parts: Vec<usize> =
                (k..=m - k).filter(|&m2| self.plan_two(k, m2).is_some()).collect();
            if let Some(sizes) = decompose(m, &parts) {
                let mut acc: Option<Recipe> = None;
                for &sz in &sizes {
                    acc = Some(join_sum(acc, self.plan_two(k, sz)?));
                }
                return acc;
            }
        }
        if m <= MAX_SEARCH_ORDER {
            let budget = SearchBudget::default().nodes(400_000);
            if let Ok(run) = search_base_row_seeded(2, k, m, &budget, None) {
                if let SearchOutcome::Found(row) = run.outcome {
                    return Some(Recipe::SearchFound { row });
                }
            }
        }
        None
    }

    /// Plans a general-mu trade. mu = 3 gets the full decision list;
    /// other mu get the basic ladder (cyclic blocks, diagonal deletion,
    /// the 2-way routes, a bounded search), which never proves
    /// nonexistence beyond the k = mu divisibility bound.
    pub fn plan_mu(&mut self, mu: usize, k: usize, m: usize) -> Result<Existence> {
        if mu == 3 {
            return self.plan(k, m);
        }
        if mu < 2 {
            return Err(Error::MuTooSmall(mu));
        }
        if k < mu || m < k {
            return Err(Error::invalid(format!(
                "need mu <= k <= m, got ({}, {}, {})",
                mu, k, m
            )));
        }
        if m > MAX_ORDER {
            return Err(Error::OrderTooLarge(m));
        }
        if k == mu && m % mu != 0 {
            return Ok(Existence::Nonexistent {
                reason: "a (mu, k, m) trade with k = mu exists only when k divides m".to_string(),
            });
        }
        let found = if mu == 2 {
            self.plan_two(k, m)
        } else if m % k == 0 {
            Some(sum_copies(Recipe::Cyclic { mu, k }, m / k))
        } else if m == k + 1 && m >= mu + 2 && is_prime_power(m) {
            Some(Recipe::DeleteDiagonal { mu, q: m })
        } else if m <= MAX_SEARCH_ORDER {
            match search_base_row_seeded(mu, k, m, &self.search_budget, None) {
                Ok(run) => match run.outcome {
                    SearchOutcome::Found(row) => Some(Recipe::SearchFound { row }),
                    _ => None,
                },
                Err(_) => None,
            }
        } else {
            None
        };
        match found {
            Some(recipe) => {
                let t = self.execute(&recipe)?;
                if (t.mu(), t.k(), t.m()) != (mu, k, m) {
                    return Err(Error::invalid(format!(
                        "recipe for ({}, {}, {}) built a ({}, {}, {}) trade",
                        mu,
                        k,
                        m,
                        t.mu(),
                        t.k(),
                        t.m()
                    )));
                }
                Ok(Existence::Exists { recipe })
            }
            None => Ok(Existence::Unknown {
                reason: format!(
                    "no implemented construction reaches ({}, {}, {})",
                    mu, k, m
                ),
            }),
        }
    }

    /// Last resort inside `plan`: a bounded, unseeded circulant search.
    /// Exhaustion without a witness says nothing about non-circulant
    /// trades, so the outcome is never NONEXISTENT.
    fn search_fallback(&mut self, k: usize, m: usize) -> Existence {
        if m <= MAX_SEARCH_ORDER {
            if let Ok(run) = search_base_row_seeded(3, k, m, &self.search_budget, None) {
                if let SearchOutcome::Found(row) = run.outcome {
                    return Existence::Exists { recipe: Recipe::SearchFound { row } };
                }
            }
        }
        Existence::Unknown {
            reason: format!(
                "no implemented construction reaches (3, {}, {}) and the bounded search \
                 found no circulant witness",
                k, m
            ),
        }
    }

    /// Builds the recipe bottom-up and verifies the result. Failures name
    /// the path of the node that failed.
    pub fn execute(&self, recipe: &Recipe) -> Result<Trade> {
        let mut path = Vec::new();
        let t = self.build(recipe, &mut path)?;
        t.verify().into_result()?;
        Ok(t)
    }

    fn build(&self, r: &Recipe, path: &mut Vec<&'static str>) -> Result<Trade> {
        path.push(kind_name(r));
        let joined = path.join(".");
        let out = self.build_inner(r, path);
        path.pop();
        out.map_err(|e| {
            let msg = e.to_string();
            if msg.starts_with("at ") {
                e
            } else {
                Error::invalid(format!("at {}: {}", joined, msg))
            }
        })
    }

    fn build_inner(&self, r: &Recipe, path: &mut Vec<&'static str>) -> Result<Trade> {
        match r {
            Recipe::Catalog { k, m, .. } => {
                let (row, _) = catalog()
                    .lookup(*k, *m)
                    .ok_or_else(|| Error::invalid(format!("no catalog entry for (3, {}, {})", k, m)))?;
                expand_base_row(&row)
            }
            Recipe::Cyclic { mu, k } => cyclic_trade(*mu, *k),
            Recipe::DeleteDiagonal { mu, q } => delete_diagonal(&idempotent_mols(*q, *mu)?, *mu),
            Recipe::DirectSum { left, right } => {
                path.push("left");
                let l = self.build(left, path)?;
                path.pop();
                path.push("right");
                let u = self.build(right, path)?;
                path.pop();
                direct_sum(&l, &u)
            }
            Recipe::Product { left, right } => {
                path.push("left");
                let l = self.build(left, path)?;
                path.pop();
                path.push("right");
                let u = self.build(right, path)?;
                path.pop();
                product(&l, &u)
            }
            Recipe::SumOverOls { l, p, parts } => {
                let pair = orthogonal_pair(*l)?;
                let mut built = Vec::with_capacity(parts.len());
                for part in parts {
                    built.push(match part {
                        Some(r) => Some(self.build(r, path)?),
                        None => None,
                    });
                }
                let refs: Vec<Option<&Trade>> = built.iter().map(|t| t.as_ref()).collect();
                sum_over_ols(&refs, *p, (&pair.0, &pair.1))
            }
            Recipe::Mod6 { m } => expand_base_row(&mod6_family(*m)?),
            Recipe::Mod6Pair { m } => expand_base_row(&mod6_bitrade_row(*m)?),
            Recipe::RestrictLayers { mu, inner } => {
                let t = self.build(inner, path)?;
                let keep: Vec<usize> = (0..*mu).collect();
                t.restrict_layers(&keep)
            }
            Recipe::SearchFound { row } => expand_base_row(row),
            Recipe::Certificate { name } => match self.certs.witness(name) {
                Some(Witness::Row(row)) => expand_base_row(row),
                Some(Witness::Full(t)) => Ok(t.clone()),
                None => Err(Error::invalid(format!("no stored certificate named {}", name))),
            },
        }
    }
}

fn is_open_pair(k: usize, m: usize) -> bool {
    (k, m) == (4, 11) || (k, m) == (5, 6)
}

fn kind_name(r: &Recipe) -> &'static str {
    match r {
        Recipe::Catalog { .. } => "catalog",
        Recipe::Cyclic { .. } => "cyclic",
        Recipe::DeleteDiagonal { .. } => "delete_diagonal",
        Recipe::DirectSum { .. } => "direct_sum",
        Recipe::Product { .. } => "product",
        Recipe::SumOverOls { .. } => "sum_over_ols",
        Recipe::Mod6 { .. } => "mod6",
        Recipe::Mod6Pair { .. } => "mod6_pair",
        Recipe::RestrictLayers { .. } => "restrict_layers",
        Recipe::SearchFound { .. } => "search_found",
        Recipe::Certificate { .. } => "certificate",
    }
}

fn join_sum(acc: Option<Recipe>, next: Recipe) -> Recipe {
    match acc {
        None => next,
        Some(left) => Recipe::DirectSum { left: Box::new(left), right: Box::new(next) },
    }
}

fn sum_copies(block: Recipe, copies: usize) -> Recipe {
    let mut acc = None;
    for _ in 0..copies {
        acc = Some(join_sum(acc, block.clone()));
    }
    acc.expect("at least one copy")
}

fn restrict3(inner: Recipe) -> Recipe {
    Recipe::RestrictLayers { mu: 3, inner: Box::new(inner) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decompose_examples() {
        assert_eq!(decompose(13, &[4, 5]), Some(vec![4, 4, 5]));
        assert_eq!(decompose(11, &[4, 5]), None);
        assert_eq!(decompose(12, &[4]), Some(vec![4, 4, 4]));
        assert_eq!(decompose(7, &[7]), Some(vec![7]));
        assert_eq!(decompose(10, &[4]), None);
        assert_eq!(decompose(0, &[3]), Some(vec![]));
    }

    #[test]
    fn decompose_matches_reachability_oracle() {
        fn reachable(m: usize, parts: &[usize]) -> bool {
            let mut ok = vec![false; m + 1];
            ok[0] = true;
            for v in 1..=m {
                ok[v] = parts.iter().any(|&p| p <= v && ok[v - p]);
            }
            ok[m]
        }
        for parts in [vec![4, 5], vec![7, 9, 11, 13], vec![5, 7, 8, 9]] {
            for m in 1..=200 {
                let got = decompose(m, &parts);
                assert_eq!(got.is_some(), reachable(m, &parts), "m = {}, parts {:?}", m, parts);
                if let Some(sizes) = got {
                    assert_eq!(sizes.iter().sum::<usize>(), m);
                    assert!(sizes.iter().all(|s| parts.contains(s)));
                }
            }
        }
    }

    #[test]
    fn plan_rejects_bad_arguments() {
        let mut p = Planner::new().unwrap();
        assert!(p.plan(2, 5).is_err());
        assert!(p.plan(5, 4).is_err());
    }

    #[test]
    fn plan_known_verdicts() {
        let mut p = Planner::new().unwrap();
        assert!(matches!(p.plan(4, 6).unwrap(), Existence::Nonexistent { .. }));
        assert!(matches!(p.plan(4, 7).unwrap(), Existence::Nonexistent { .. }));
        assert!(matches!(p.plan(4, 11).unwrap(), Existence::Unknown { .. }));
        assert!(matches!(p.plan(5, 6).unwrap(), Existence::Unknown { .. }));
        assert!(matches!(p.plan(3, 7).unwrap(), Existence::Nonexistent { .. }));
        assert!(p.plan(3, 9).unwrap().exists());
        assert!(p.plan(4, 4).unwrap().exists());
        assert!(p.plan(4, 5).unwrap().exists());
        assert!(p.plan(4, 13).unwrap().exists());
    }

    #[test]
    fn family_instance_reaches_m_100() {
        let mut p = Planner::new().unwrap();
        let status = p.plan(7, 100).unwrap();
        match status.recipe() {
            Some(Recipe::Catalog { k: 7, m: 100, .. }) => {}
            other => panic!("expected a catalog recipe, got {:?}", other),
        }
    }

    #[test]
    fn recipes_round_trip_and_re_execute() {
        let mut p = Planner::new().unwrap();
        for (k, m) in [(6, 8), (4, 13), (15, 16), (17, 19), (8, 12)] {
            let status = p.plan(k, m).unwrap();
            let recipe = status.recipe().unwrap_or_else(|| panic!("(3, {}, {}) should exist", k, m));
            let json = serde_json::to_string(recipe).unwrap();
            let back: Recipe = serde_json::from_str(&json).unwrap();
            assert_eq!(&back, recipe);
            let t = p.execute(&back).unwrap();
            assert_eq!((t.mu(), t.k(), t.m()), (3, k, m));
        }
    }

    #[test]
    fn general_mu_ladder() {
        let mut p = Planner::new().unwrap();
        assert!(p.plan_mu(2, 3, 4).unwrap().exists());
        assert!(p.plan_mu(2, 5, 7).unwrap().exists());
        assert!(p.plan_mu(4, 4, 8).unwrap().exists());
        assert!(p.plan_mu(4, 5, 10).unwrap().exists());
        assert!(matches!(p.plan_mu(4, 4, 6).unwrap(), Existence::Nonexistent { .. }));
        assert!(p.plan_mu(1, 3, 4).is_err());
        assert!(p.plan_mu(4, 3, 5).is_err());
    }

    #[test]
    fn execute_names_the_failing_node() {
        let p = Planner::new().unwrap();
        let r = Recipe::DirectSum {
            left: Box::new(Recipe::Cyclic { mu: 3, k: 4 }),
            right: Box::new(Recipe::Certificate { name: "missing".into() }),
        };
        let err = p.execute(&r).unwrap_err().to_string();
        assert!(err.contains("direct_sum.right.certificate"), "{}", err);
    }
}
