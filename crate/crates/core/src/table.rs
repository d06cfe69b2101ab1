//! Finite groupoids stored as Cayley tables.
//!
//! A [`CayleyTable`] of order `n` names its elements `0..n` and stores the
//! products row-major, so `entries[a * n + b] = a·b`. Tables are immutable
//! once built; every structural question (is it a quasigroup, is it an
//! AG-group, ...) is answered by a separate pass over the table.
//!
//! The text format is the one used by every tool in this workspace:
//!
//! ```text
//! # comments and blank lines are ignored
//! 3
//! 0 1 2
//! 2 0 1
//! 1 2 0
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, ParseErrorKind, Result};

/// Index of a carrier element, always in `0..order` of its table.
pub type ElementId = usize;

/// Above this order the left/right division tables are precomputed once.
pub const DIVISION_CACHE_ORDER: usize = 64;

const NONE: u32 = u32::MAX;
const MANY: u32 = u32::MAX - 1;

#[derive(Clone, Debug)]
struct Divisions {
    // left[a * n + b] = x with a·x = b
    left: Vec<u32>,
    // right[a * n + b] = y with y·a = b
    right: Vec<u32>,
}

/// A finite groupoid given by its multiplication table.
#[derive(Clone, Debug)]
pub struct CayleyTable {
    order: usize,
    entries: Vec<u32>,
    name: Option<String>,
    divisions: Option<Divisions>,
}

impl PartialEq for CayleyTable {
    // The name is a label only.
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.entries == other.entries
    }
}

impl Eq for CayleyTable {}

impl CayleyTable {
    /// Builds a table from row-major entries, validating order and range.
    pub fn new(order: usize, entries: Vec<usize>) -> Result<Self> {
        if order == 0 {
            return Err(Error::Precondition("order must be at least 1".into()));
        }
        if entries.len() != order * order {
            return Err(Error::Precondition(format!(
                "expected {} entries for order {order}, got {}",
                order * order,
                entries.len()
            )));
        }
        if let Some(&bad) = entries.iter().find(|&&v| v >= order) {
            return Err(Error::IndexOutOfRange { index: bad, order });
        }
        Ok(Self::from_raw(
            order,
            entries.into_iter().map(|v| v as u32).collect(),
        ))
    }

    pub(crate) fn from_raw(order: usize, entries: Vec<u32>) -> Self {
        debug_assert_eq!(entries.len(), order * order);
        let divisions = (order > DIVISION_CACHE_ORDER).then(|| Divisions::build(order, &entries));
        CayleyTable {
            order,
            entries,
            name: None,
            divisions,
        }
    }

    /// Builds the table of `f` over `0..order`.
    pub fn from_fn(
        order: usize,
        mut f: impl FnMut(ElementId, ElementId) -> ElementId,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(order * order);
        for a in 0..order {
            for b in 0..order {
                entries.push(f(a, b));
            }
        }
        Self::new(order, entries)
    }

    /// The cyclic group Z_n under addition.
    pub fn cyclic(order: usize) -> Result<Self> {
        Ok(Self::from_fn(order, |a, b| (a + b) % order.max(1))?.with_name(format!("Z{order}")))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn row(&self, a: ElementId) -> &[u32] {
        &self.entries[a * self.order..(a + 1) * self.order]
    }

    pub fn elements(&self) -> std::ops::Range<ElementId> {
        0..self.order
    }

    /// Unchecked product; panics if an index is out of range.
    #[inline]
    pub fn op(&self, a: ElementId, b: ElementId) -> ElementId {
        self.entries[a * self.order + b] as ElementId
    }

    pub fn check(&self, a: ElementId) -> Result<ElementId> {
        if a < self.order {
            Ok(a)
        } else {
            Err(Error::IndexOutOfRange {
                index: a,
                order: self.order,
            })
        }
    }

    /// `a·b`, with both indices validated.
    pub fn product(&self, a: ElementId, b: ElementId) -> Result<ElementId> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.op(a, b))
    }

    /// The unique `x` with `a·x = b`.
    pub fn left_divide(&self, a: ElementId, b: ElementId) -> Result<ElementId> {
        self.check(a)?;
        self.check(b)?;
        let found = match &self.divisions {
            Some(d) => d.left[a * self.order + b],
            None => unique_position((0..self.order).map(|x| self.op(a, x) == b)),
        };
        resolve(found, || format!("{a}·x = {b}"))
    }

    /// The unique `y` with `y·a = b`.
    pub fn right_divide(&self, b: ElementId, a: ElementId) -> Result<ElementId> {
        self.check(a)?;
        self.check(b)?;
        let found = match &self.divisions {
            Some(d) => d.right[a * self.order + b],
            None => unique_position((0..self.order).map(|y| self.op(y, a) == b)),
        };
        resolve(found, || format!("y·{a} = {b}"))
    }

    /// Every `e` whose row reproduces the header (`e·x = x` for all `x`).
    pub fn left_identities(&self) -> Vec<ElementId> {
        self.elements()
            .filter(|&e| {
                self.row(e)
                    .iter()
                    .enumerate()
                    .all(|(x, &v)| v as usize == x)
            })
            .collect()
    }

    /// The smallest left identity, if there is one.
    pub fn left_identity(&self) -> Option<ElementId> {
        self.elements().find(|&e| {
            self.row(e)
                .iter()
                .enumerate()
                .all(|(x, &v)| v as usize == x)
        })
    }

    /// The smallest right identity (`x·e = x` for all `x`), if there is one.
    pub fn right_identity(&self) -> Option<ElementId> {
        self.elements()
            .find(|&e| self.elements().all(|x| self.op(x, e) == x))
    }

    /// The smallest `x` with `a·x = e`, where `e` is the left identity.
    pub fn inverse(&self, a: ElementId) -> Result<ElementId> {
        self.check(a)?;
        let e = self.left_identity().ok_or(Error::NoLeftIdentity)?;
        self.inverse_with(e, a)
    }

    pub(crate) fn inverse_with(&self, e: ElementId, a: ElementId) -> Result<ElementId> {
        self.row(a)
            .iter()
            .position(|&v| v as usize == e)
            .ok_or(Error::NoInverse(a))
    }

    /// The isomorphic copy obtained by renaming `x` to `perm[x]`.
    pub fn relabel(&self, perm: &[ElementId]) -> Result<Self> {
        let n = self.order;
        let mut seen = vec![false; n];
        if perm.len() != n
            || perm
                .iter()
                .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::Precondition(format!(
                "relabeling must be a permutation of 0..{n}"
            )));
        }
        let mut entries = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                entries[perm[a] * n + perm[b]] = perm[self.op(a, b)] as u32;
            }
        }
        Ok(Self::from_raw(n, entries))
    }

    /// Serializes to the table text format.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self> {
        text.parse()
    }
}

impl Divisions {
    fn build(n: usize, entries: &[u32]) -> Self {
        let mut left = vec![NONE; n * n];
        let mut right = vec![NONE; n * n];
        let mark = |slot: &mut u32, v: usize| {
            *slot = if *slot == NONE { v as u32 } else { MANY };
        };
        for a in 0..n {
            for x in 0..n {
                let b = entries[a * n + x] as usize;
                mark(&mut left[a * n + b], x);
                // a·x = b means a is a right quotient of b by x
                mark(&mut right[x * n + b], a);
            }
        }
        Divisions { left, right }
    }
}

fn unique_position(hits: impl Iterator<Item = bool>) -> u32 {
    let mut found = NONE;
    for (i, hit) in hits.enumerate() {
        if hit {
            if found != NONE {
                return MANY;
            }
            found = i as u32;
        }
    }
    found
}

fn resolve(found: u32, equation: impl FnOnce() -> String) -> Result<ElementId> {
    match found {
        NONE => Err(Error::NoSolution {
            equation: equation(),
        }),
        MANY => Err(Error::MultipleSolutions {
            equation: equation(),
        }),
        x => Ok(x as ElementId),
    }
}

impl fmt::Display for CayleyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.order)?;
        for a in self.elements() {
            let mut first = true;
            for &v in self.row(a) {
                if !first {
                    f.write_str(" ")?;
                }
                write!(f, "{v}")?;
                first = false;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for CayleyTable {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let err = |line: usize, kind: ParseErrorKind| Error::Parse { line, kind };
        let mut lines = text
            .split('\n')
            .enumerate()
            .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l).trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let last_line = text.split('\n').count();

        let (header_line, header) = lines.next().ok_or_else(|| err(1, ParseErrorKind::Empty))?;
        let order = match header.parse::<usize>() {
            Ok(n) if n >= 1 => n,
            _ => {
                return Err(err(
                    header_line,
                    ParseErrorKind::MalformedHeader(header.to_string()),
                ))
            }
        };

        let mut entries = Vec::with_capacity(order * order);
        let mut rows = 0;
        for (line, content) in lines {
            if rows == order {
                return Err(err(
                    line,
                    ParseErrorKind::WrongRowCount {
                        expected: order,
                        found: rows + 1,
                    },
                ));
            }
            let mut found = 0;
            for token in content.split_whitespace() {
                let value: u64 = token
                    .parse()
                    .map_err(|_| err(line, ParseErrorKind::NotAnInteger(token.to_string())))?;
                if value >= order as u64 {
                    return Err(err(line, ParseErrorKind::EntryOutOfRange { value, order }));
                }
                entries.push(value as u32);
                found += 1;
            }
            if found != order {
                return Err(err(
                    line,
                    ParseErrorKind::WrongRowLength {
                        expected: order,
                        found,
                    },
                ));
            }
            rows += 1;
        }
        if rows != order {
            return Err(err(
                last_line,
                ParseErrorKind::WrongRowCount {
                    expected: order,
                    found: rows,
                },
            ));
        }
        Ok(Self::from_raw(order, entries))
    }
}

/// `a·b = (b − a) mod 3`: the smallest non-commutative AG-group.
pub fn s3_reference() -> CayleyTable {
    CayleyTable::from_fn(3, |a, b| (b + 3 - a) % 3)
        .expect("valid order-3 table")
        .with_name("S3")
}
