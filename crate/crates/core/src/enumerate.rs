//! Small-order model enumeration.
//!
//! Models are found by filling the table cell by cell in row-major order.
//! Rows and columns are kept all-different with bitmasks, and after each
//! assignment every instance of the class's identities that touches the new
//! cell and is fully defined is checked. Isomorphic copies are removed by
//! canonical forms.
//!
//! [`naive_oracle`] enumerates every function table of order ≤ 3 and checks
//! the class axioms directly; the search is tested against it.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::table::{CayleyTable, ElementId};

/// Order bound for canonical forms without `force` (8! relabelings).
pub const CANONICAL_ORDER_LIMIT: usize = 8;
/// Hard limit imposed by the 64-bit row/column masks.
pub const SEARCH_ORDER_CAP: usize = 64;
pub const ORACLE_ORDER_LIMIT: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelClass {
    Quasigroup,
    MedialQuasigroup,
    AgGroup,
    AbelianGroup,
}

impl ModelClass {
    pub const ALL: [ModelClass; 4] = [
        ModelClass::Quasigroup,
        ModelClass::MedialQuasigroup,
        ModelClass::AgGroup,
        ModelClass::AbelianGroup,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelClass::Quasigroup => "quasigroup",
            ModelClass::MedialQuasigroup => "medial-quasigroup",
            ModelClass::AgGroup => "ag-group",
            ModelClass::AbelianGroup => "abelian-group",
        }
    }

    /// Largest order searched without `force`.
    pub fn default_order_limit(self) -> usize {
        match self {
            ModelClass::AgGroup | ModelClass::AbelianGroup => 8,
            ModelClass::MedialQuasigroup | ModelClass::Quasigroup => 5,
        }
    }

    fn has_identity(self) -> bool {
        matches!(self, ModelClass::AgGroup | ModelClass::AbelianGroup)
    }
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown class '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchSpec {
    pub order: usize,
    pub class: ModelClass,
    pub up_to_iso: bool,
    pub count_only: bool,
    pub force: bool,
}

impl SearchSpec {
    pub fn new(order: usize, class: ModelClass) -> Self {
        SearchSpec {
            order,
            class,
            up_to_iso: false,
            count_only: false,
            force: false,
        }
    }

    pub fn up_to_iso(mut self, yes: bool) -> Self {
        self.up_to_iso = yes;
        self
    }

    pub fn count_only(mut self, yes: bool) -> Self {
        self.count_only = yes;
        self
    }

    pub fn force(mut self, yes: bool) -> Self {
        self.force = yes;
        self
    }
}

/// Result of an enumeration; `models` is empty when only counting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enumeration {
    pub count: usize,
    pub models: Vec<CayleyTable>,
}

// ---------------------------------------------------------------------------
// Search

const UNSET: u32 = u32::MAX;

/// One side of an equation whose outer product is `l·r`.
#[derive(Clone, Copy)]
enum Side {
    Known(usize),
    Open(usize, usize),
    Unknown,
}

/// Partial table plus the bookkeeping needed for propagation.
#[derive(Clone, Debug)]
pub struct Search {
    n: usize,
    class: ModelClass,
    cells: Vec<u32>,
    row_used: Vec<u64>,
    col_used: Vec<u64>,
    // pos[x * n + v] = y with x·y = v, or UNSET
    pos: Vec<u32>,
    // assigned cells, in order, so they can be undone
    trail: Vec<u32>,
    pending: Vec<u32>,
    forced: Vec<(usize, usize, usize)>,
}

impl Search {
    /// An empty search, with the left identity pinned to `identity` for
    /// classes that require one. `None` if the pinned cells already
    /// contradict the class.
    pub fn new(
        order: usize,
        class: ModelClass,
        identity: Option<ElementId>,
    ) -> Result<Option<Self>> {
        if order == 0 || order > SEARCH_ORDER_CAP {
            return Err(Error::Precondition(format!(
                "search order must be in 1..={SEARCH_ORDER_CAP}"
            )));
        }
        let n = order;
        let mut s = Search {
            n,
            class,
            cells: vec![UNSET; n * n],
            row_used: vec![0; n],
            col_used: vec![0; n],
            pos: vec![UNSET; n * n],
            trail: Vec::with_capacity(n * n),
            pending: Vec::new(),
            forced: Vec::new(),
        };
        if class.has_identity() {
            let e = identity.unwrap_or(0);
            if e >= n {
                return Err(Error::IndexOutOfRange { index: e, order: n });
            }
            let mut prefix: Vec<(usize, usize, usize)> = (0..n).map(|x| (e, x, x)).collect();
            if class == ModelClass::AbelianGroup {
                prefix.extend((0..n).filter(|&x| x != e).map(|x| (x, e, x)));
            }
            if !s.seed(&prefix) {
                return Ok(None);
            }
        }
        Ok(Some(s))
    }

    /// Pre-assigns cells `(row, column, value)` and propagates; false if
    /// they conflict, after which the search should be discarded.
    pub fn seed(&mut self, cells: &[(usize, usize, usize)]) -> bool {
        cells.iter().all(|&(a, b, v)| {
            a < self.n && b < self.n && v < self.n && self.assign(a, b, v) && self.propagate()
        })
    }

    #[inline]
    fn get(&self, a: usize, b: usize) -> Option<usize> {
        let v = self.cells[a * self.n + b];
        (v != UNSET).then_some(v as usize)
    }

    #[inline]
    fn can_place(&self, a: usize, b: usize, v: usize) -> bool {
        let bit = 1u64 << v;
        self.row_used[a] & bit == 0 && self.col_used[b] & bit == 0
    }

    fn place(&mut self, a: usize, b: usize, v: usize) {
        let n = self.n;
        self.cells[a * n + b] = v as u32;
        self.row_used[a] |= 1 << v;
        self.col_used[b] |= 1 << v;
        self.pos[a * n + v] = b as u32;
    }

    fn unplace(&mut self, a: usize, b: usize) {
        let n = self.n;
        let v = self.cells[a * n + b] as usize;
        self.cells[a * n + b] = UNSET;
        self.row_used[a] &= !(1 << v);
        self.col_used[b] &= !(1 << v);
        self.pos[a * n + v] = UNSET;
    }

    fn assign(&mut self, a: usize, b: usize, v: usize) -> bool {
        match self.get(a, b) {
            Some(cur) => cur == v,
            None if self.can_place(a, b, v) => {
                self.place(a, b, v);
                let cell = (a * self.n + b) as u32;
                self.trail.push(cell);
                self.pending.push(cell);
                true
            }
            None => false,
        }
    }

    fn undo(&mut self, mark: usize) {
        self.pending.clear();
        while self.trail.len() > mark {
            let cell = self.trail.pop().expect("trail above mark") as usize;
            self.unplace(cell / self.n, cell % self.n);
        }
    }

    /// Checks every identity instance touching a newly assigned cell and
    /// assigns the cells those instances force.
    fn propagate(&mut self) -> bool {
        let mut forced = std::mem::take(&mut self.forced);
        let mut ok = true;
        while ok {
            let Some(cell) = self.pending.pop() else {
                break;
            };
            let cell = cell as usize;
            forced.clear();
            ok = self.collect(cell / self.n, cell % self.n, &mut forced)
                && forced.iter().all(|&(a, b, v)| self.assign(a, b, v));
        }
        self.forced = forced;
        ok
    }

    #[inline]
    fn pos_of(&self, x: usize, v: usize) -> Option<usize> {
        let y = self.pos[x * self.n + v];
        (y != UNSET).then_some(y as usize)
    }

    #[inline]
    fn side(&self, l: Option<usize>, r: Option<usize>) -> Side {
        match (l, r) {
            (Some(l), Some(r)) => match self.get(l, r) {
                Some(v) => Side::Known(v),
                None => Side::Open(l, r),
            },
            _ => Side::Unknown,
        }
    }

    /// Enforces `lhs = rhs`, recording a forced cell when one side is known
    /// and the other is a single open cell.
    #[inline]
    fn equate(&self, lhs: Side, rhs: Side, forced: &mut Vec<(usize, usize, usize)>) -> bool {
        match (lhs, rhs) {
            (Side::Known(x), Side::Known(y)) => x == y,
            (Side::Known(v), Side::Open(a, b)) | (Side::Open(a, b), Side::Known(v)) => {
                forced.push((a, b, v));
                self.can_place(a, b, v)
            }
            _ => true,
        }
    }

    fn collect(&self, u: usize, w: usize, forced: &mut Vec<(usize, usize, usize)>) -> bool {
        match self.class {
            ModelClass::Quasigroup => true,
            ModelClass::MedialQuasigroup => self.medial(u, w, forced),
            ModelClass::AgGroup => self.left_invertive(u, w, forced),
            ModelClass::AbelianGroup => {
                self.equate(
                    self.side(Some(u), Some(w)),
                    self.side(Some(w), Some(u)),
                    forced,
                ) && self.associative(u, w, forced)
            }
        }
    }

    // (xy)z = (zy)x; the law is symmetric under x ↔ z, so it suffices to
    // look at the new cell as `x·y` or as `(x·y)·z`.
    fn left_invertive(&self, u: usize, w: usize, forced: &mut Vec<(usize, usize, usize)>) -> bool {
        let n = self.n;
        let mut inst = |x: usize, y: usize, z: usize| -> bool {
            let lhs = self.side(self.get(x, y), Some(z));
            let rhs = self.side(self.get(z, y), Some(x));
            self.equate(lhs, rhs, forced)
        };
        (0..n).all(|z| inst(u, w, z))
            && (0..n).all(|x| self.pos_of(x, u).is_none_or(|y| inst(x, y, w)))
    }

    // (ab)(cd) = (ac)(bd)
    fn medial(&self, u: usize, w: usize, forced: &mut Vec<(usize, usize, usize)>) -> bool {
        let n = self.n;
        let mut inst = |a: usize, b: usize, c: usize, d: usize| -> bool {
            let lhs = self.side(self.get(a, b), self.get(c, d));
            let rhs = self.side(self.get(a, c), self.get(b, d));
            self.equate(lhs, rhs, forced)
        };
        for p in 0..n {
            for q in 0..n {
                if !(inst(u, w, p, q) && inst(p, q, u, w) && inst(u, p, w, q) && inst(p, u, q, w)) {
                    return false;
                }
            }
        }
        for x in 0..n {
            let Some(xu) = self.pos_of(x, u) else {
                continue;
            };
            for y in 0..n {
                let Some(yw) = self.pos_of(y, w) else {
                    continue;
                };
                // new cell as (ab)·(cd), then as (ac)·(bd)
                if !(inst(x, xu, y, yw) && inst(x, y, xu, yw)) {
                    return false;
                }
            }
        }
        true
    }

    // (xy)z = x(yz)
    fn associative(&self, u: usize, w: usize, forced: &mut Vec<(usize, usize, usize)>) -> bool {
        let n = self.n;
        let mut inst = |x: usize, y: usize, z: usize| -> bool {
            let lhs = self.side(self.get(x, y), Some(z));
            let rhs = self.side(Some(x), self.get(y, z));
            self.equate(lhs, rhs, forced)
        };
        (0..n).all(|z| inst(u, w, z))
            && (0..n).all(|x| inst(x, u, w))
            && (0..n).all(|x| self.pos_of(x, u).is_none_or(|y| inst(x, y, w)))
            && (0..n).all(|y| self.pos_of(y, w).is_none_or(|z| inst(u, y, z)))
    }

    fn next_free(&self, from: usize) -> Option<usize> {
        (from..self.cells.len()).find(|&i| self.cells[i] == UNSET)
    }

    fn candidates(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        let (a, b) = (cell / self.n, cell % self.n);
        (0..self.n).filter(move |&v| self.can_place(a, b, v))
    }

    fn dfs<F>(&mut self, from: usize, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[u32]) -> ControlFlow<()>,
    {
        let Some(cell) = self.next_free(from) else {
            return visit(&self.cells);
        };
        let (a, b) = (cell / self.n, cell % self.n);
        for v in 0..self.n {
            if !self.can_place(a, b, v) {
                continue;
            }
            let mark = self.trail.len();
            if self.assign(a, b, v) && self.propagate() {
                self.dfs(cell + 1, visit)?;
            }
            self.undo(mark);
        }
        ControlFlow::Continue(())
    }

    /// Visits every completion in lexicographic order of the row-major
    /// entries; the visitor may stop the search early.
    pub fn run<F>(&mut self, mut visit: F) -> ControlFlow<()>
    where
        F: FnMut(&[u32]) -> ControlFlow<()>,
    {
        self.dfs(0, &mut visit)
    }

    /// Splits on the first free cell and searches the branches in parallel,
    /// folding each branch's completions with `fold`.
    fn par_fold<T, F>(&self, init: impl Fn() -> T + Sync, fold: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut T, &[u32]) + Sync,
    {
        let Some(cell) = self.next_free(0) else {
            let mut acc = init();
            fold(&mut acc, &self.cells);
            return vec![acc];
        };
        let (a, b) = (cell / self.n, cell % self.n);
        let branches: Vec<usize> = self.candidates(cell).collect();
        branches
            .into_par_iter()
            .map(|v| {
                let mut acc = init();
                let mut s = self.clone();
                if s.assign(a, b, v) && s.propagate() {
                    let _ = s.dfs(cell + 1, &mut |cells| {
                        fold(&mut acc, cells);
                        ControlFlow::Continue(())
                    });
                }
                acc
            })
            .collect()
    }
}

fn table_of(n: usize, cells: &[u32]) -> CayleyTable {
    CayleyTable::from_raw(n, cells.to_vec())
}

fn check_bounds(spec: &SearchSpec) -> Result<()> {
    let limit = spec.class.default_order_limit();
    if spec.order == 0 {
        return Err(Error::Precondition("order must be at least 1".into()));
    }
    if spec.order > limit && !spec.force {
        return Err(Error::BoundExceeded {
            what: format!("{} enumeration", spec.class),
            order: spec.order,
            limit,
        });
    }
    if spec.order > SEARCH_ORDER_CAP {
        return Err(Error::BoundExceeded {
            what: "search masks".into(),
            order: spec.order,
            limit: SEARCH_ORDER_CAP,
        });
    }
    Ok(())
}

/// Enumerates every model of `spec.class` of order `spec.order`.
///
/// Labeled enumeration returns tables in lexicographic order of their
/// entries; up to isomorphism it returns sorted canonical forms.
pub fn enumerate_models(spec: &SearchSpec) -> Result<Enumeration> {
    check_bounds(spec)?;
    let n = spec.order;

    if spec.up_to_iso {
        // every model is isomorphic to one whose identity is 0
        let Some(search) = Search::new(n, spec.class, Some(0))? else {
            return Ok(Enumeration {
                count: 0,
                models: vec![],
            });
        };
        let force = spec.force;
        let parts = search.par_fold(BTreeSet::new, |set: &mut BTreeSet<Vec<u32>>, cells| {
            let canon = canonical_form(&table_of(n, cells), force).expect("order checked above");
            set.insert(canon.table.entries().to_vec());
        });
        let all: BTreeSet<Vec<u32>> = parts.into_iter().flatten().collect();
        let count = all.len();
        let models = if spec.count_only {
            vec![]
        } else {
            all.into_iter().map(|e| table_of(n, &e)).collect()
        };
        return Ok(Enumeration { count, models });
    }

    let Some(search) = Search::new(n, spec.class, Some(0))? else {
        return Ok(Enumeration {
            count: 0,
            models: vec![],
        });
    };
    // models with left identity e are the images of those with identity 0
    // under the transposition (0 e)
    let copies = if spec.class.has_identity() { n } else { 1 };
    if spec.count_only {
        let count = search
            .par_fold(|| 0usize, |c, _| *c += 1)
            .into_iter()
            .sum::<usize>();
        return Ok(Enumeration {
            count: count * copies,
            models: vec![],
        });
    }
    let base: Vec<CayleyTable> = search
        .par_fold(Vec::new, |v: &mut Vec<Vec<u32>>, cells| {
            v.push(cells.to_vec())
        })
        .into_iter()
        .flatten()
        .map(|e| table_of(n, &e))
        .collect();
    let mut models = Vec::with_capacity(base.len() * copies);
    for e in 0..copies {
        let mut swap: Vec<ElementId> = (0..n).collect();
        swap.swap(0, e);
        for t in &base {
            models.push(if e == 0 { t.clone() } else { t.relabel(&swap)? });
        }
    }
    models.sort_unstable_by(|a, b| a.entries().cmp(b.entries()));
    Ok(Enumeration {
        count: models.len(),
        models,
    })
}

// ---------------------------------------------------------------------------
// Canonical forms

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub table: CayleyTable,
    /// `certificate[old] = new` maps the input onto the canonical table.
    pub certificate: Vec<ElementId>,
}

struct Canonizer<'t> {
    t: &'t CayleyTable,
    n: usize,
    pinned: bool,
    inv: Vec<usize>,
    perm: Vec<usize>,
    used: Vec<bool>,
    best: Option<(Vec<u32>, Vec<usize>)>,
}

enum Cell {
    Known(usize),
    AtLeast(usize),
    Unknown,
}

impl Canonizer<'_> {
    fn cell(&self, depth: usize, i: usize, j: usize) -> Cell {
        if self.pinned && i == 0 {
            // the identity row relabels to 0, 1, 2, ...
            return Cell::Known(j);
        }
        if i >= depth || j >= depth {
            return Cell::Unknown;
        }
        let v = self.t.op(self.inv[i], self.inv[j]);
        if self.used[v] {
            Cell::Known(self.perm[v])
        } else {
            Cell::AtLeast(depth)
        }
    }

    /// Ordering of the partial relabeling against the best so far:
    /// `Less` = may beat it, `Greater` = cannot.
    fn compare_prefix(&self, depth: usize) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        let Some((best, _)) = &self.best else {
            return Less;
        };
        for (idx, &b) in best.iter().enumerate() {
            let (i, j) = (idx / self.n, idx % self.n);
            match self.cell(depth, i, j) {
                Cell::Known(v) => match (v as u32).cmp(&b) {
                    Equal => continue,
                    other => return other,
                },
                Cell::AtLeast(lb) => {
                    return if lb as u32 > b { Greater } else { Less };
                }
                Cell::Unknown => return Less,
            }
        }
        Equal
    }

    fn go(&mut self, depth: usize) {
        if self.compare_prefix(depth) == std::cmp::Ordering::Greater {
            return;
        }
        if depth == self.n {
            if self.compare_prefix(depth) == std::cmp::Ordering::Less {
                let entries = (0..self.n * self.n)
                    .map(|idx| {
                        self.perm[self.t.op(self.inv[idx / self.n], self.inv[idx % self.n])] as u32
                    })
                    .collect();
                self.best = Some((entries, self.perm.clone()));
            }
            return;
        }
        for old in 0..self.n {
            if self.used[old] {
                continue;
            }
            self.used[old] = true;
            self.perm[old] = depth;
            self.inv[depth] = old;
            self.go(depth + 1);
            self.used[old] = false;
        }
    }
}

/// The lexicographically smallest row-major relabeling of `table`. When
/// the table has exactly one left identity it is sent to 0 and only
/// relabelings fixing that are considered.
pub fn canonical_form(table: &CayleyTable, force: bool) -> Result<CanonicalForm> {
    let n = table.order();
    if n > CANONICAL_ORDER_LIMIT && !force {
        return Err(Error::BoundExceeded {
            what: "canonical form".into(),
            order: n,
            limit: CANONICAL_ORDER_LIMIT,
        });
    }
    let ids = table.left_identities();
    let mut c = Canonizer {
        t: table,
        n,
        pinned: ids.len() == 1,
        inv: vec![0; n],
        perm: vec![0; n],
        used: vec![false; n],
        best: None,
    };
    if c.pinned {
        let e = ids[0];
        c.used[e] = true;
        c.perm[e] = 0;
        c.inv[0] = e;
        c.go(1);
    } else {
        c.go(0);
    }
    let (entries, certificate) = c.best.expect("at least one relabeling");
    Ok(CanonicalForm {
        table: CayleyTable::from_raw(n, entries),
        certificate,
    })
}

// ---------------------------------------------------------------------------
// Oracle

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    /// Number of labeled tables satisfying the class axioms.
    pub labeled_count: usize,
    /// Canonical forms of the isomorphism classes, sorted.
    pub models: Vec<CayleyTable>,
}

fn oracle_accepts(class: ModelClass, n: usize, t: &[u32]) -> bool {
    let m = |a: usize, b: usize| t[a * n + b] as usize;
    let all = 0..n;
    let latin = all.clone().all(|a| {
        let mut row = 0u64;
        let mut col = 0u64;
        for b in 0..n {
            row |= 1 << m(a, b);
            col |= 1 << m(b, a);
        }
        row.count_ones() as usize == n && col.count_ones() as usize == n
    });
    let triples = || (0..n * n * n).map(|i| (i / (n * n), i / n % n, i % n));
    let left_ids = || all.clone().filter(|&e| (0..n).all(|x| m(e, x) == x));
    let inverses = |e: usize| (0..n).all(|a| (0..n).any(|x| m(a, x) == e && m(x, a) == e));
    match class {
        ModelClass::Quasigroup => latin,
        ModelClass::MedialQuasigroup => {
            latin
                && (0..n.pow(4)).all(|i| {
                    let (a, b, c, d) = (i / n.pow(3), i / (n * n) % n, i / n % n, i % n);
                    m(m(a, b), m(c, d)) == m(m(a, c), m(b, d))
                })
        }
        ModelClass::AgGroup => {
            left_ids().any(inverses) && triples().all(|(x, y, z)| m(m(x, y), z) == m(m(z, y), x))
        }
        ModelClass::AbelianGroup => {
            left_ids().any(|e| (0..n).all(|x| m(x, e) == x) && inverses(e))
                && triples().all(|(x, y, z)| m(m(x, y), z) == m(x, m(y, z)))
                && (0..n * n).all(|i| m(i / n, i % n) == m(i % n, i / n))
        }
    }
}

/// Brute force over all `n^(n²)` tables, for `n ≤ 3`.
pub fn naive_oracle(order: usize, class: ModelClass) -> Result<OracleResult> {
    if order == 0 || order > ORACLE_ORDER_LIMIT {
        return Err(Error::BoundExceeded {
            what: "naive oracle".into(),
            order,
            limit: ORACLE_ORDER_LIMIT,
        });
    }
    let n = order;
    let cells = n * n;
    let total = n.pow(cells as u32);
    let mut t = vec![0u32; cells];
    let mut labeled_count = 0;
    let mut classes = BTreeSet::new();
    for mut code in 0..total {
        for slot in t.iter_mut().rev() {
            *slot = (code % n) as u32;
            code /= n;
        }
        if oracle_accepts(class, n, &t) {
            labeled_count += 1;
            let canon = canonical_form(&table_of(n, &t), false)?;
            classes.insert(canon.table.entries().to_vec());
        }
    }
    Ok(OracleResult {
        labeled_count,
        models: classes.into_iter().map(|e| table_of(n, &e)).collect(),
    })
}
