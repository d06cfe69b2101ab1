//! The parallelogram relation on a quasigroup.
//!
//! `Par(a,b,c,d)` holds when there are `p, q` with `p·a = q·b` and
//! `p·d = q·c`. In a quasigroup `q` is determined by `p` (it is the right
//! quotient `(p·a)/b`), so deciding the relation is a single scan over `p`.
//!
//! On AG-groups the fourth vertex has the closed form `d = (c·b⁻¹)·a`, and
//! several two-point constructions produce parallelograms directly.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify;
use crate::error::{Error, Result};
use crate::identity;
use crate::table::{CayleyTable, ElementId};

/// Default order bound for the six-fold axiom loops.
pub const SIX_TUPLE_ORDER_LIMIT: usize = 16;

/// An ordered quadruple together with whether `Par` holds for it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Parallelogram {
    pub vertices: [ElementId; 4],
    pub valid: bool,
}

impl Parallelogram {
    pub fn a(&self) -> ElementId {
        self.vertices[0]
    }
    pub fn b(&self) -> ElementId {
        self.vertices[1]
    }
    pub fn c(&self) -> ElementId {
        self.vertices[2]
    }
    pub fn d(&self) -> ElementId {
        self.vertices[3]
    }
}

impl fmt::Display for Parallelogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.vertices;
        write!(f, "Par({a},{b},{c},{d})")
    }
}

/// Points `p, q` with `p·a = q·b` and `p·d = q·c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessPair {
    pub p: ElementId,
    pub q: ElementId,
}

#[derive(Clone, Debug)]
struct AgData {
    identity: ElementId,
    inverse: Vec<ElementId>,
}

/// Parallelogram operations over a table already known to be a quasigroup.
#[derive(Clone, Debug)]
pub struct Par<'t> {
    table: &'t CayleyTable,
    // right_div[a * n + b] = y with y·a = b
    right_div: Vec<u32>,
    ag: Option<AgData>,
}

impl<'t> Par<'t> {
    pub fn new(table: &'t CayleyTable) -> Result<Self> {
        if !classify::is_quasigroup(table) {
            return Err(Error::NotQuasigroup(
                "some row or column is not a permutation".into(),
            ));
        }
        let n = table.order();
        let mut right_div = vec![0u32; n * n];
        for y in 0..n {
            for a in 0..n {
                right_div[a * n + table.op(y, a)] = y as u32;
            }
        }
        let ag = table.left_identity().and_then(|e| {
            let inverse = table
                .elements()
                .map(|a| table.inverse_with(e, a))
                .collect::<Result<Vec<_>>>()
                .ok()?;
            let two_sided = (0..n).all(|a| table.op(inverse[a], a) == e);
            let invertive = identity::preset("left-invertive")
                .and_then(|p| p.check(table))
                .map(|v| v.holds)
                .unwrap_or(false);
            (two_sided && invertive).then_some(AgData {
                identity: e,
                inverse,
            })
        });
        Ok(Par {
            table,
            right_div,
            ag,
        })
    }

    pub fn table(&self) -> &'t CayleyTable {
        self.table
    }

    pub fn is_ag_group(&self) -> bool {
        self.ag.is_some()
    }

    fn ag(&self) -> Result<&AgData> {
        self.ag.as_ref().ok_or_else(|| {
            Error::NotAgGroup("needs a left identity, inverses and the left invertive law".into())
        })
    }

    /// The left identity, when the table is an AG-group.
    pub fn identity(&self) -> Result<ElementId> {
        Ok(self.ag()?.identity)
    }

    pub fn inverse(&self, a: ElementId) -> Result<ElementId> {
        self.table.check(a)?;
        Ok(self.ag()?.inverse[a])
    }

    #[inline]
    fn rdiv(&self, b: ElementId, a: ElementId) -> ElementId {
        self.right_div[a * self.table.order() + b] as ElementId
    }

    fn check_all(&self, xs: &[ElementId]) -> Result<()> {
        xs.iter().try_for_each(|&x| self.table.check(x).map(|_| ()))
    }

    #[inline]
    pub(crate) fn holds_unchecked(
        &self,
        a: ElementId,
        b: ElementId,
        c: ElementId,
        d: ElementId,
    ) -> bool {
        let t = self.table;
        (0..t.order()).any(|p| {
            let q = self.rdiv(t.op(p, a), b);
            t.op(p, d) == t.op(q, c)
        })
    }

    /// Decides `Par(a,b,c,d)`.
    pub fn holds(&self, a: ElementId, b: ElementId, c: ElementId, d: ElementId) -> Result<bool> {
        self.check_all(&[a, b, c, d])?;
        Ok(self.holds_unchecked(a, b, c, d))
    }

    /// The relation `P(a,b,c,d) ⇔ Par(a,b,d,c)`.
    pub fn p_relation(
        &self,
        a: ElementId,
        b: ElementId,
        c: ElementId,
        d: ElementId,
    ) -> Result<bool> {
        self.holds(a, b, d, c)
    }

    pub fn parallelogram(&self, vertices: [ElementId; 4]) -> Result<Parallelogram> {
        let [a, b, c, d] = vertices;
        Ok(Parallelogram {
            vertices,
            valid: self.holds(a, b, c, d)?,
        })
    }

    /// The unique `d` with `Par(a,b,c,d)`, by scanning every candidate.
    pub fn fourth_vertex_scan(
        &self,
        a: ElementId,
        b: ElementId,
        c: ElementId,
    ) -> Result<ElementId> {
        self.check_all(&[a, b, c])?;
        let mut hits = self
            .table
            .elements()
            .filter(|&d| self.holds_unchecked(a, b, c, d));
        match (hits.next(), hits.next()) {
            (Some(d), None) => Ok(d),
            (first, _) => Err(Error::NotParallelogramSpace {
                a,
                b,
                c,
                count: if first.is_none() { 0 } else { 2 + hits.count() },
            }),
        }
    }

    /// The fourth vertex: `(c·b⁻¹)·a` on AG-groups, a scan otherwise.
    pub fn fourth_vertex(&self, a: ElementId, b: ElementId, c: ElementId) -> Result<ElementId> {
        self.check_all(&[a, b, c])?;
        match &self.ag {
            Some(ag) => {
                let t = self.table;
                Ok(t.op(t.op(c, ag.inverse[b]), a))
            }
            None => self.fourth_vertex_scan(a, b, c),
        }
    }

    /// `x = a/b`, `y = b\c`; returns them when `b·(x·y) = d`, i.e. exactly
    /// when `Par(a,b,c,d)` holds.
    pub fn t1_decompose(
        &self,
        a: ElementId,
        b: ElementId,
        c: ElementId,
        d: ElementId,
    ) -> Result<Option<(ElementId, ElementId)>> {
        self.ag()?;
        self.check_all(&[a, b, c, d])?;
        let t = self.table;
        let x = self.rdiv(a, b);
        let y = t.left_divide(b, c)?;
        Ok((t.op(b, t.op(x, y)) == d).then_some((x, y)))
    }

    /// `a·b⁻¹`, which equals `p⁻¹·q` for every witness pair.
    pub fn c1_ratio(&self, a: ElementId, b: ElementId) -> Result<ElementId> {
        self.check_all(&[a, b])?;
        let ag = self.ag()?;
        Ok(self.table.op(a, ag.inverse[b]))
    }

    /// All witness pairs, one per `q` in ascending order: `p⁻¹` solves
    /// `p⁻¹·q = a·b⁻¹` and `p` is its inverse.
    pub fn witnesses(
        &self,
        a: ElementId,
        b: ElementId,
        c: ElementId,
        d: ElementId,
    ) -> Result<Vec<WitnessPair>> {
        let ratio = self.c1_ratio(a, b)?;
        if !self.holds(a, b, c, d)? {
            return Err(Error::NotParallelogram(format!("({a},{b},{c},{d})")));
        }
        let ag = self.ag()?;
        let t = self.table;
        let mut out = Vec::with_capacity(t.order());
        for q in t.elements() {
            let p_inv = self.rdiv(ratio, q);
            let p = ag.inverse[p_inv];
            if t.op(p, a) != t.op(q, b) || t.op(p, d) != t.op(q, c) {
                return Err(Error::NotParallelogram(format!(
                    "({a},{b},{c},{d}): recovered pair p={p}, q={q} is not a witness"
                )));
            }
            out.push(WitnessPair { p, q });
        }
        Ok(out)
    }

    fn built(&self, vertices: [ElementId; 4]) -> Parallelogram {
        let [a, b, c, d] = vertices;
        Parallelogram {
            vertices,
            valid: self.holds_unchecked(a, b, c, d),
        }
    }

    /// `Par(a, b, p·b, p·a)`.
    pub fn construct_t3(&self, a: ElementId, b: ElementId, p: ElementId) -> Result<Parallelogram> {
        self.ag()?;
        self.check_all(&[a, b, p])?;
        let t = self.table;
        Ok(self.built([a, b, t.op(p, b), t.op(p, a)]))
    }

    /// `Par(a, b, a⁻¹, (a·b)⁻¹·a)`.
    pub fn construct_t4(&self, a: ElementId, b: ElementId) -> Result<Parallelogram> {
        self.check_all(&[a, b])?;
        let ag = self.ag()?;
        let t = self.table;
        let inv = &ag.inverse;
        Ok(self.built([a, b, inv[a], t.op(inv[t.op(a, b)], a)]))
    }

    /// `Par(a, a·b, (a·e)·a⁻¹, b)` for `a ≠ e`.
    ///
    /// This quadruple is not a parallelogram in every AG-group, so check
    /// `valid`. Swapping the last two vertices gives one that is.
    pub fn construct_t5(&self, a: ElementId, b: ElementId) -> Result<Parallelogram> {
        self.check_all(&[a, b])?;
        let ag = self.ag()?;
        if a == ag.identity {
            return Err(Error::Precondition(format!(
                "a must differ from the identity {a}"
            )));
        }
        let t = self.table;
        let ae = t.op(a, ag.identity);
        Ok(self.built([a, t.op(a, b), t.op(ae, ag.inverse[a]), b]))
    }

    /// `Par(a, a·e, (a·e)·a⁻¹, e)` for `a ≠ e`, plus whether `a·e ≠ a`.
    /// The special case `b = e` of [`Par::construct_t5`], with the same caveat.
    pub fn construct_c2(&self, a: ElementId) -> Result<(Parallelogram, bool)> {
        self.table.check(a)?;
        let ag = self.ag()?;
        let e = ag.identity;
        if a == e {
            return Err(Error::Precondition(format!(
                "a must differ from the identity {a}"
            )));
        }
        let t = self.table;
        let ae = t.op(a, e);
        Ok((self.built([a, ae, t.op(ae, ag.inverse[a]), e]), ae != a))
    }

    /// Componentwise product of two valid parallelograms.
    pub fn par_product(&self, x: &Parallelogram, y: &Parallelogram) -> Result<Parallelogram> {
        for p in [x, y] {
            let [a, b, c, d] = p.vertices;
            if !self.holds(a, b, c, d)? {
                return Err(Error::NotParallelogram(p.to_string()));
            }
        }
        let t = self.table;
        let v = std::array::from_fn(|i| t.op(x.vertices[i], y.vertices[i]));
        Ok(self.built(v))
    }
}

// ---------------------------------------------------------------------------
// Axioms

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomVerdict {
    pub holds: bool,
    /// The lexicographically first violating tuple, in the axiom's own
    /// variable order (see [`AxiomReport`]).
    pub counterexample: Option<Vec<ElementId>>,
}

impl AxiomVerdict {
    fn from_first(found: Option<Vec<ElementId>>) -> Self {
        AxiomVerdict {
            holds: found.is_none(),
            counterexample: found,
        }
    }
}

/// Verdicts for the parallelogram-space axioms.
///
/// P1–P4 are stated for `P(a,b,c,d) ⇔ Par(a,b,d,c)`:
/// - `p1`: `P(a,b,c,d) ⇒ P(a,c,b,d)`, tuple `[a,b,c,d]`
/// - `p2`: `P(a,b,c,d) ⇒ P(c,d,a,b)`, tuple `[a,b,c,d]`
/// - `p3`: `P(a,b,f,g) ∧ P(f,g,c,d) ⇒ P(a,b,c,d)`, tuple `[a,b,c,d,f,g]`
/// - `p4`: exactly one `d` with `P(a,b,c,d)`, tuple `[a,b,c]`
///
/// V1–V3 are stated for `Par` itself:
/// - `v1`: exactly one `d` with `Par(a,b,c,d)`, tuple `[a,b,c]`
/// - `v2`: `Par(a,b,c,d)` implies `Par` of every cyclic permutation of
///   `(a,b,c,d)` and of `(d,c,b,a)`; tuple is `[a,b,c,d]` followed by the
///   failing image
/// - `v3`: `Par(a,b,c,d) ∧ Par(c,d,e,f) ⇒ Par(a,b,f,e)`, tuple `[a,b,c,d,e,f]`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub p1: AxiomVerdict,
    pub p2: AxiomVerdict,
    pub p3: AxiomVerdict,
    pub p4: AxiomVerdict,
    pub v1: AxiomVerdict,
    pub v2: AxiomVerdict,
    pub v3: AxiomVerdict,
}

impl AxiomReport {
    pub fn axioms(&self) -> [(&'static str, &AxiomVerdict); 7] {
        [
            ("P1", &self.p1),
            ("P2", &self.p2),
            ("P3", &self.p3),
            ("P4", &self.p4),
            ("V1", &self.v1),
            ("V2", &self.v2),
            ("V3", &self.v3),
        ]
    }

    pub fn all_hold(&self) -> bool {
        self.axioms().iter().all(|(_, v)| v.holds)
    }
}

/// The full `Par` relation as a dense bitmap over `n⁴` quadruples.
struct Relation {
    n: usize,
    bits: Vec<bool>,
}

impl Relation {
    fn build(par: &Par) -> Self {
        let n = par.table.order();
        let bits = (0..n * n * n)
            .into_par_iter()
            .flat_map_iter(|abc| {
                let (a, b, c) = (abc / (n * n), abc / n % n, abc % n);
                (0..n).map(move |d| par.holds_unchecked(a, b, c, d))
            })
            .collect();
        Relation { n, bits }
    }

    #[inline]
    fn par(&self, a: usize, b: usize, c: usize, d: usize) -> bool {
        let n = self.n;
        self.bits[((a * n + b) * n + c) * n + d]
    }

    #[inline]
    fn p(&self, a: usize, b: usize, c: usize, d: usize) -> bool {
        self.par(a, b, d, c)
    }
}

fn first_quad(
    n: usize,
    mut violates: impl FnMut(usize, usize, usize, usize) -> Option<Vec<usize>>,
) -> Option<Vec<usize>> {
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    if let Some(v) = violates(a, b, c, d) {
                        return Some(v);
                    }
                }
            }
        }
    }
    None
}

fn first_unique_failure(
    n: usize,
    holds: impl Fn(usize, usize, usize, usize) -> bool,
) -> Option<Vec<usize>> {
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if (0..n).filter(|&d| holds(a, b, c, d)).count() != 1 {
                    return Some(vec![a, b, c]);
                }
            }
        }
    }
    None
}

/// First violation of a six-variable implication, partitioned over the
/// first variable. Tuple layout is `[x0..x5]` in loop order.
fn first_six(n: usize, violates: impl Fn([usize; 6]) -> bool + Sync) -> Option<Vec<usize>> {
    (0..n).into_par_iter().find_map_first(|x0| {
        for x1 in 0..n {
            for x2 in 0..n {
                for x3 in 0..n {
                    for x4 in 0..n {
                        for x5 in 0..n {
                            let t = [x0, x1, x2, x3, x4, x5];
                            if violates(t) {
                                return Some(t.to_vec());
                            }
                        }
                    }
                }
            }
        }
        None
    })
}

/// Checks P1–P4 and V1–V3 exhaustively. Tables above
/// [`SIX_TUPLE_ORDER_LIMIT`] are refused unless `force` is set.
pub fn verify_parallelogram_space(table: &CayleyTable, force: bool) -> Result<AxiomReport> {
    let n = table.order();
    if n > SIX_TUPLE_ORDER_LIMIT && !force {
        return Err(Error::BoundExceeded {
            what: "six-tuple axiom loops".into(),
            order: n,
            limit: SIX_TUPLE_ORDER_LIMIT,
        });
    }
    let par = Par::new(table)?;
    let rel = Relation::build(&par);
    let r = &rel;

    let p1 = first_quad(n, |a, b, c, d| {
        (r.p(a, b, c, d) && !r.p(a, c, b, d)).then(|| vec![a, b, c, d])
    });
    let p2 = first_quad(n, |a, b, c, d| {
        (r.p(a, b, c, d) && !r.p(c, d, a, b)).then(|| vec![a, b, c, d])
    });
    // loop order a,b,c,d,f,g
    let p3 = first_six(n, |[a, b, c, d, f, g]| {
        r.p(a, b, f, g) && r.p(f, g, c, d) && !r.p(a, b, c, d)
    });
    let p4 = first_unique_failure(n, |a, b, c, d| r.p(a, b, c, d));

    let v1 = first_unique_failure(n, |a, b, c, d| r.par(a, b, c, d));
    let v2 = first_quad(n, |a, b, c, d| {
        if !r.par(a, b, c, d) {
            return None;
        }
        let images = [
            [b, c, d, a],
            [c, d, a, b],
            [d, a, b, c],
            [d, c, b, a],
            [c, b, a, d],
            [b, a, d, c],
            [a, d, c, b],
        ];
        images
            .into_iter()
            .find(|&[e, f, g, h]| !r.par(e, f, g, h))
            .map(|img| [a, b, c, d].into_iter().chain(img).collect())
    });
    let v3 = first_six(n, |[a, b, c, d, e, f]| {
        r.par(a, b, c, d) && r.par(c, d, e, f) && !r.par(a, b, f, e)
    });

    Ok(AxiomReport {
        p1: AxiomVerdict::from_first(p1),
        p2: AxiomVerdict::from_first(p2),
        p3: AxiomVerdict::from_first(p3),
        p4: AxiomVerdict::from_first(p4),
        v1: AxiomVerdict::from_first(v1),
        v2: AxiomVerdict::from_first(v2),
        v3: AxiomVerdict::from_first(v3),
    })
}
