//! The algebra of parallelograms under componentwise product.
//!
//! Carrier elements are the valid quadruples `(a,b,c,d)`, listed in
//! lexicographic `(a,b,c)` order; on a parallelogram space `d` is a function
//! of `(a,b,c)`, so element `i` has `(a,b,c) = (i / n², i / n % n, i % n)`.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::parallelogram::Par;
use crate::table::{CayleyTable, ElementId};

/// Largest derived order whose Cayley table is built explicitly.
pub const MATERIALIZE_LIMIT: usize = 4096;

pub type Quad = [ElementId; 4];

#[derive(Clone, Debug)]
pub struct DerivedAlgebra {
    base: CayleyTable,
    carrier: Vec<[u32; 4]>,
    table: Option<CayleyTable>,
}

/// Builds `(G, Par, @)`. Refuses derived orders above `max_order`.
pub fn build_derived(base: &CayleyTable, max_order: usize) -> Result<DerivedAlgebra> {
    let n = base.order();
    let size = n.checked_pow(3).unwrap_or(usize::MAX);
    if size > max_order {
        return Err(Error::BoundExceeded {
            what: "derived algebra".into(),
            order: size,
            limit: max_order,
        });
    }
    let par = Par::new(base)?;
    let carrier = (0..size)
        .into_par_iter()
        .map(|i| {
            let (a, b, c) = (i / (n * n), i / n % n, i % n);
            let d = par.fourth_vertex_scan(a, b, c)?;
            Ok([a as u32, b as u32, c as u32, d as u32])
        })
        .collect::<Result<Vec<_>>>()?;

    let mut derived = DerivedAlgebra {
        base: base.clone(),
        carrier,
        table: None,
    };
    if size <= MATERIALIZE_LIMIT {
        let entries = (0..size)
            .into_par_iter()
            .flat_map_iter(|i| {
                let derived = &derived;
                (0..size).map(move |j| derived.multiply_direct(i, j).map(|k| k as u32))
            })
            .collect::<Result<Vec<_>>>()?;
        derived.table = Some(CayleyTable::from_raw(size, entries));
    }
    Ok(derived)
}

impl DerivedAlgebra {
    pub fn base(&self) -> &CayleyTable {
        &self.base
    }

    pub fn order(&self) -> usize {
        self.carrier.len()
    }

    /// The explicit table, when the order is at most [`MATERIALIZE_LIMIT`].
    pub fn table(&self) -> Option<&CayleyTable> {
        self.table.as_ref()
    }

    pub fn carrier(&self) -> impl Iterator<Item = Quad> + '_ {
        self.carrier.iter().map(|q| q.map(|x| x as ElementId))
    }

    pub fn quad_of(&self, index: ElementId) -> Result<Quad> {
        self.carrier
            .get(index)
            .map(|q| q.map(|x| x as ElementId))
            .ok_or(Error::IndexOutOfRange {
                index,
                order: self.order(),
            })
    }

    /// Index of a quadruple, or `None` if it is not a parallelogram.
    pub fn index_of(&self, quad: Quad) -> Option<ElementId> {
        let n = self.base.order();
        if quad.iter().any(|&x| x >= n) {
            return None;
        }
        let i = (quad[0] * n + quad[1]) * n + quad[2];
        (self.carrier[i][3] as usize == quad[3]).then_some(i)
    }

    fn multiply_direct(&self, i: ElementId, j: ElementId) -> Result<ElementId> {
        let (x, y) = (self.carrier[i], self.carrier[j]);
        let t = &self.base;
        let product: Quad = std::array::from_fn(|k| t.op(x[k] as usize, y[k] as usize));
        self.index_of(product).ok_or_else(|| {
            Error::ClosureViolation(format!(
                "{:?} @ {:?} = {:?} is not a parallelogram",
                x, y, product
            ))
        })
    }

    /// `i @ j`, from the table when materialized.
    pub fn multiply(&self, i: ElementId, j: ElementId) -> Result<ElementId> {
        for k in [i, j] {
            if k >= self.order() {
                return Err(Error::IndexOutOfRange {
                    index: k,
                    order: self.order(),
                });
            }
        }
        match &self.table {
            Some(t) => Ok(t.op(i, j)),
            None => self.multiply_direct(i, j),
        }
    }

    /// Serializes the explicit table with a comment block naming the
    /// quadruple behind every index.
    pub fn to_text(&self) -> Result<String> {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# derived algebra of an order-{} table",
            self.base.order()
        );
        for (i, [a, b, c, d]) in self.carrier().enumerate() {
            let _ = writeln!(out, "# {i} = Par({a},{b},{c},{d})");
        }
        match &self.table {
            Some(t) => out.push_str(&t.to_text()),
            None => {
                let size = self.order();
                let _ = writeln!(out, "{size}");
                for i in 0..size {
                    let row = (0..size)
                        .map(|j| self.multiply_direct(i, j).map(|k| k.to_string()))
                        .collect::<Result<Vec<_>>>()?;
                    let _ = writeln!(out, "{}", row.join(" "));
                }
            }
        }
        Ok(out)
    }
}

/// Index of `Par(e,e,e,e)`, checked to be a left identity of `@`.
pub fn derived_identity(derived: &DerivedAlgebra) -> Result<ElementId> {
    let e = derived.base.left_identity().ok_or(Error::NoLeftIdentity)?;
    let id = derived
        .index_of([e; 4])
        .ok_or_else(|| Error::Inconsistent(format!("Par({e},{e},{e},{e}) is missing")))?;
    for j in 0..derived.order() {
        if derived.multiply(id, j)? != j {
            return Err(Error::Inconsistent(format!(
                "Par({e},{e},{e},{e}) @ element {j} moves it"
            )));
        }
    }
    Ok(id)
}

/// Inverse of element `i`: the quadruple of componentwise inverses.
pub fn derived_inverse(derived: &DerivedAlgebra, i: ElementId) -> Result<ElementId> {
    let par = Par::new(&derived.base)?;
    let quad = derived.quad_of(i)?;
    let inv = quad
        .iter()
        .map(|&x| par.inverse(x))
        .collect::<Result<Vec<_>>>()?;
    let inv: Quad = [inv[0], inv[1], inv[2], inv[3]];
    if !par.holds(inv[0], inv[1], inv[2], inv[3])? {
        return Err(Error::Inconsistent(format!(
            "{inv:?} is not a parallelogram"
        )));
    }
    let j = derived
        .index_of(inv)
        .ok_or_else(|| Error::Inconsistent(format!("{inv:?} missing from the carrier")))?;
    let e = par.identity()?;
    let id = derived
        .index_of([e; 4])
        .ok_or_else(|| Error::Inconsistent("identity quadruple missing".into()))?;
    if derived.multiply(i, j)? != id || derived.multiply(j, i)? != id {
        return Err(Error::Inconsistent(format!(
            "{quad:?} and {inv:?} do not multiply to the identity"
        )));
    }
    Ok(j)
}

/// Samples `samples` triples `(x,y,z)` and returns the first with
/// `(x@y)@z ≠ (z@y)@x`.
pub fn sample_left_invertive<R: Rng>(
    derived: &DerivedAlgebra,
    samples: usize,
    rng: &mut R,
) -> Result<Option<[ElementId; 3]>> {
    let n = derived.order();
    for _ in 0..samples {
        let (x, y, z) = (
            rng.gen_range(0..n),
            rng.gen_range(0..n),
            rng.gen_range(0..n),
        );
        let lhs = derived.multiply(derived.multiply(x, y)?, z)?;
        let rhs = derived.multiply(derived.multiply(z, y)?, x)?;
        if lhs != rhs {
            return Ok(Some([x, y, z]));
        }
    }
    Ok(None)
}

/// Closure of `generators` under `@`, sorted. Stops with `None` once the
/// set grows past `limit`.
pub fn generated_subalgebra(
    derived: &DerivedAlgebra,
    generators: &[ElementId],
    limit: usize,
) -> Result<Option<Vec<ElementId>>> {
    let mut members: Vec<ElementId> = generators.to_vec();
    members.sort_unstable();
    members.dedup();
    let mut inside = vec![false; derived.order()];
    members.iter().for_each(|&m| inside[m] = true);
    let mut frontier = 0;
    while frontier < members.len() {
        let end = members.len();
        for i in 0..end {
            for j in 0..end {
                if i < frontier && j < frontier {
                    continue;
                }
                let k = derived.multiply(members[i], members[j])?;
                if !inside[k] {
                    inside[k] = true;
                    members.push(k);
                    if members.len() > limit {
                        return Ok(None);
                    }
                }
            }
        }
        frontier = end;
    }
    members.sort_unstable();
    Ok(Some(members))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify;
    use crate::table::s3_reference;

    #[test]
    fn singleton_base() {
        let one = CayleyTable::new(1, vec![0]).unwrap();
        let d = build_derived(&one, MATERIALIZE_LIMIT).unwrap();
        assert_eq!(d.order(), 1);
        assert_eq!(derived_identity(&d), Ok(0));
        assert_eq!(derived_inverse(&d, 0), Ok(0));
    }

    #[test]
    fn s3_derived_is_a_non_abelian_ag_group() {
        let d = build_derived(&s3_reference(), MATERIALIZE_LIMIT).unwrap();
        assert_eq!(d.order(), 27);
        let r = classify(d.table().unwrap());
        assert!(r.is_ag_group.holds);
        assert!(!r.is_abelian_group.holds);
        let id = derived_identity(&d).unwrap();
        assert_eq!(d.quad_of(id), Ok([0, 0, 0, 0]));
        assert_eq!(r.left_identity, Some(id));
        // every S3 element is its own inverse
        for i in 0..27 {
            assert_eq!(derived_inverse(&d, i), Ok(i));
        }
        let quad = d.quad_of(15).unwrap();
        assert_eq!(&quad[..3], &[1, 2, 0]);
        assert_eq!(derived_inverse(&d, 15), Ok(15));
    }

    #[test]
    fn z3_derived_is_abelian() {
        let d = build_derived(&CayleyTable::cyclic(3).unwrap(), MATERIALIZE_LIMIT).unwrap();
        assert_eq!(d.order(), 27);
        assert!(classify(d.table().unwrap()).is_abelian_group.holds);
    }

    #[test]
    fn index_maps_are_inverse() {
        let d = build_derived(&s3_reference(), MATERIALIZE_LIMIT).unwrap();
        for i in 0..d.order() {
            assert_eq!(d.index_of(d.quad_of(i).unwrap()), Some(i));
        }
        assert_eq!(d.index_of([0, 0, 0, 1]), None);
        assert_eq!(d.index_of([3, 0, 0, 0]), None);
        assert!(d.quad_of(27).is_err());
    }

    #[test]
    fn order_bound_and_lazy_products() {
        let z = CayleyTable::cyclic(17).unwrap();
        assert!(matches!(
            build_derived(&z, MATERIALIZE_LIMIT),
            Err(Error::BoundExceeded { order: 4913, .. })
        ));
        let d = build_derived(&z, 5000).unwrap();
        assert!(d.table().is_none());
        let x = d.index_of([1, 2, 3, 2]).unwrap();
        let y = d.index_of([16, 0, 5, 4]).unwrap();
        assert_eq!(d.quad_of(d.multiply(x, y).unwrap()), Ok([0, 2, 8, 6]));
    }

    #[test]
    fn non_space_base_is_rejected() {
        // every Latin square of order 4 is a parallelogram space; this one
        // of order 5 gives (0,1,0) four fourth vertices
        let t = CayleyTable::new(
            5,
            vec![
                0, 1, 2, 3, 4, 1, 0, 3, 4, 2, 2, 3, 4, 0, 1, 3, 4, 1, 2, 0, 4, 2, 0, 1, 3,
            ],
        )
        .unwrap();
        assert!(matches!(
            build_derived(&t, MATERIALIZE_LIMIT),
            Err(Error::NotParallelogramSpace {
                a: 0,
                b: 1,
                c: 0,
                count: 4
            })
        ));
    }

    #[test]
    fn text_output_lists_quadruples() {
        let d = build_derived(&CayleyTable::cyclic(2).unwrap(), MATERIALIZE_LIMIT).unwrap();
        let text = d.to_text().unwrap();
        assert!(text.contains("# 1 = Par(0,0,1,1)"));
        let parsed: CayleyTable = text.parse().unwrap();
        assert_eq!(&parsed, d.table().unwrap());
    }

    #[test]
    fn subalgebra_generation() {
        let d = build_derived(&CayleyTable::cyclic(3).unwrap(), MATERIALIZE_LIMIT).unwrap();
        let id = derived_identity(&d).unwrap();
        assert_eq!(generated_subalgebra(&d, &[id], 10), Ok(Some(vec![id])));
        let x = d.index_of([1, 1, 1, 1]).unwrap();
        let sub = generated_subalgebra(&d, &[x], 10).unwrap().unwrap();
        assert_eq!(sub.len(), 3);
        assert_eq!(
            generated_subalgebra(&d, &[x, d.index_of([0, 1, 0, 2]).unwrap()], 5),
            Ok(None)
        );
    }
}
