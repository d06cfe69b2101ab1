//! Groupoid identities and quasi-identities, decided by exhaustive
//! assignment over a finite table.
//!
//! Grammar (explicit `*`, postfix `'` for inverse, `e` is the left identity):
//!
//! ```text
//! identity := eq | eq "->" eq
//! eq       := term "=" term
//! term     := factor | term "*" factor
//! factor   := atom | atom "'"
//! atom     := letter | "e" | "(" term ")"
//! ```

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{CayleyTable, ElementId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(char),
    Identity,
    Mul(Box<Term>, Box<Term>),
    Inv(Box<Term>),
}

impl Term {
    /// A variable term; `e` is reserved for the identity constant.
    pub fn var(name: char) -> Result<Self> {
        if name == 'e' {
            Err(Error::ReservedVariable)
        } else {
            Ok(Term::Var(name))
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(lhs: Term, rhs: Term) -> Self {
        Term::Mul(Box::new(lhs), Box::new(rhs))
    }

    pub fn inv(arg: Term) -> Self {
        Term::Inv(Box::new(arg))
    }

    fn collect_vars(&self, out: &mut Vec<char>) {
        match self {
            Term::Var(v) => out.push(*v),
            Term::Identity => {}
            Term::Mul(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Term::Inv(t) => t.collect_vars(out),
        }
    }

    fn needs_identity(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Identity | Term::Inv(_) => true,
            Term::Mul(l, r) => l.needs_identity() || r.needs_identity(),
        }
    }

    fn len(&self) -> usize {
        match self {
            Term::Var(_) | Term::Identity => 1,
            Term::Mul(l, r) => 1 + l.len() + r.len(),
            Term::Inv(t) => 1 + t.len(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Identity => f.write_str("e"),
            Term::Mul(l, r) => {
                for (i, side) in [l, r].into_iter().enumerate() {
                    if i == 1 {
                        f.write_str("*")?;
                    }
                    if matches!(**side, Term::Mul(..)) {
                        write!(f, "({side})")?;
                    } else {
                        write!(f, "{side}")?;
                    }
                }
                Ok(())
            }
            Term::Inv(t) => {
                if matches!(**t, Term::Mul(..)) {
                    write!(f, "({t})'")
                } else {
                    write!(f, "{t}'")
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// An equation, optionally guarded by a single premise equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Identity {
    pub premise: Option<Equation>,
    pub conclusion: Equation,
    variables: Vec<char>,
}

impl Identity {
    pub fn new(premise: Option<Equation>, conclusion: Equation) -> Self {
        let mut variables = Vec::new();
        for eq in premise.iter().chain(std::iter::once(&conclusion)) {
            eq.lhs.collect_vars(&mut variables);
            eq.rhs.collect_vars(&mut variables);
        }
        variables.sort_unstable();
        variables.dedup();
        Identity {
            premise,
            conclusion,
            variables,
        }
    }

    pub fn parse(src: &str) -> Result<Self> {
        Parser::new(src).identity()
    }

    /// Variables in lexicographic order; assignments enumerate in this order.
    pub fn variables(&self) -> &[char] {
        &self.variables
    }

    pub fn is_quasi(&self) -> bool {
        self.premise.is_some()
    }

    fn equations(&self) -> impl Iterator<Item = &Equation> {
        self.premise.iter().chain(std::iter::once(&self.conclusion))
    }

    pub fn uses_identity(&self) -> bool {
        self.equations()
            .any(|eq| eq.lhs.needs_identity() || eq.rhs.needs_identity())
    }

    /// Evaluates the identity under one assignment; `Ok(true)` when it is
    /// satisfied (premise false counts as satisfied).
    pub fn satisfied_by(&self, table: &CayleyTable, assignment: &Assignment) -> Result<bool> {
        let values = self
            .variables
            .iter()
            .map(|v| {
                let x = *assignment.0.get(&v.to_string()).ok_or_else(|| {
                    Error::Precondition(format!("assignment is missing variable {v}"))
                })?;
                table.check(x)
            })
            .collect::<Result<Vec<_>>>()?;
        let ctx = EvalContext::new(table, self.uses_identity())?;
        let compiled = Compiled::new(self);
        compiled.satisfied(&ctx, &values, &mut Vec::new())
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = &self.premise {
            write!(f, "{p} -> ")?;
        }
        write!(f, "{}", self.conclusion)
    }
}

impl std::str::FromStr for Identity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Identity::parse(s)
    }
}

/// A variable assignment, ordered by variable name.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(pub BTreeMap<String, ElementId>);

impl Assignment {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, ElementId)>) -> Self {
        Assignment(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn get(&self, var: &str) -> Option<ElementId> {
        self.0.get(var).copied()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, v) in &self.0 {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{k}={v}")?;
            first = false;
        }
        Ok(())
    }
}

/// Outcome of checking an identity; a failure always carries the
/// lexicographically first violating assignment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    pub counterexample: Option<Assignment>,
}

impl Verdict {
    pub fn pass() -> Self {
        Verdict {
            holds: true,
            counterexample: None,
        }
    }

    pub fn fail(counterexample: Assignment) -> Self {
        Verdict {
            holds: false,
            counterexample: Some(counterexample),
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    _src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            chars: src.chars().collect(),
            pos: 0,
            _src: src,
        }
    }

    fn error<T>(&self, at: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::IdentitySyntax {
            column: at + 1,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn identity(mut self) -> Result<Identity> {
        let first = self.equation()?;
        let second = if self.peek() == Some('-') {
            let at = self.pos;
            self.pos += 1;
            if self.chars.get(self.pos) != Some(&'>') {
                return self.error(at, "expected '->'");
            }
            self.pos += 1;
            Some(self.equation()?)
        } else {
            None
        };
        if let Some(c) = self.peek() {
            return self.error(self.pos, format!("unexpected '{c}'"));
        }
        Ok(match second {
            Some(conclusion) => Identity::new(Some(first), conclusion),
            None => Identity::new(None, first),
        })
    }

    fn equation(&mut self) -> Result<Equation> {
        let lhs = self.term()?;
        if !self.eat('=') {
            return match self.peek() {
                Some(c) => self.error(self.pos, format!("expected '=', found '{c}'")),
                None => self.error(self.pos, "expected '=', found end of input"),
            };
        }
        let rhs = self.term()?;
        Ok(Equation { lhs, rhs })
    }

    fn term(&mut self) -> Result<Term> {
        let mut acc = self.factor()?;
        while self.eat('*') {
            let rhs = self.factor()?;
            acc = Term::mul(acc, rhs);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Term> {
        let mut t = self.atom()?;
        while self.eat('\'') {
            t = Term::inv(t);
        }
        if let Some(c) = self.peek() {
            if c.is_alphabetic() || c == '(' {
                return self.error(
                    self.pos,
                    "juxtaposition is not allowed; write '*' explicitly",
                );
            }
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Term> {
        match self.peek() {
            Some('(') => {
                let open = self.pos;
                self.pos += 1;
                let inner = self.term()?;
                if !self.eat(')') {
                    return self.error(
                        self.pos,
                        format!(
                            "unbalanced parenthesis: '(' at column {} is never closed",
                            open + 1
                        ),
                    );
                }
                Ok(inner)
            }
            Some(')') => self.error(self.pos, "unbalanced parenthesis: unexpected ')'"),
            Some('e') => {
                self.pos += 1;
                Ok(Term::Identity)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                self.pos += 1;
                Ok(Term::Var(c))
            }
            Some(c) => self.error(self.pos, format!("expected a term, found '{c}'")),
            None => self.error(self.pos, "expected a term, found end of input"),
        }
    }
}

pub fn parse_identity(src: &str) -> Result<Identity> {
    Identity::parse(src)
}

// ---------------------------------------------------------------------------
// Evaluation

#[derive(Clone, Copy, Debug)]
enum Instr {
    Var(u8),
    Identity,
    Mul,
    Inv,
}

struct Compiled {
    premise: Option<(Vec<Instr>, Vec<Instr>)>,
    conclusion: (Vec<Instr>, Vec<Instr>),
}

fn compile(term: &Term, vars: &[char], out: &mut Vec<Instr>) {
    match term {
        Term::Var(v) => {
            let i = vars
                .binary_search(v)
                .expect("variable collected at parse time");
            out.push(Instr::Var(i as u8));
        }
        Term::Identity => out.push(Instr::Identity),
        Term::Mul(l, r) => {
            compile(l, vars, out);
            compile(r, vars, out);
            out.push(Instr::Mul);
        }
        Term::Inv(t) => {
            compile(t, vars, out);
            out.push(Instr::Inv);
        }
    }
}

impl Compiled {
    fn new(id: &Identity) -> Self {
        let side = |eq: &Equation| {
            let mut l = Vec::with_capacity(eq.lhs.len());
            let mut r = Vec::with_capacity(eq.rhs.len());
            compile(&eq.lhs, &id.variables, &mut l);
            compile(&eq.rhs, &id.variables, &mut r);
            (l, r)
        };
        Compiled {
            premise: id.premise.as_ref().map(side),
            conclusion: side(&id.conclusion),
        }
    }

    fn satisfied(
        &self,
        ctx: &EvalContext,
        values: &[ElementId],
        stack: &mut Vec<ElementId>,
    ) -> Result<bool> {
        if let Some((l, r)) = &self.premise {
            if ctx.eval(l, values, stack)? != ctx.eval(r, values, stack)? {
                return Ok(true);
            }
        }
        let (l, r) = &self.conclusion;
        Ok(ctx.eval(l, values, stack)? == ctx.eval(r, values, stack)?)
    }
}

struct EvalContext<'t> {
    table: &'t CayleyTable,
    identity: ElementId,
    inverses: Vec<Option<ElementId>>,
}

impl<'t> EvalContext<'t> {
    fn new(table: &'t CayleyTable, needs_identity: bool) -> Result<Self> {
        if !needs_identity {
            return Ok(EvalContext {
                table,
                identity: 0,
                inverses: Vec::new(),
            });
        }
        let e = table.left_identity().ok_or(Error::NoLeftIdentity)?;
        let inverses = table
            .elements()
            .map(|a| table.inverse_with(e, a).ok())
            .collect();
        Ok(EvalContext {
            table,
            identity: e,
            inverses,
        })
    }

    #[inline]
    fn eval(
        &self,
        prog: &[Instr],
        values: &[ElementId],
        stack: &mut Vec<ElementId>,
    ) -> Result<ElementId> {
        stack.clear();
        for ins in prog {
            match *ins {
                Instr::Var(i) => stack.push(values[i as usize]),
                Instr::Identity => stack.push(self.identity),
                Instr::Mul => {
                    let r = stack.pop().unwrap();
                    let l = stack.pop().unwrap();
                    stack.push(self.table.op(l, r));
                }
                Instr::Inv => {
                    let a = stack.pop().unwrap();
                    stack.push(self.inverses[a].ok_or(Error::NoInverse(a))?);
                }
            }
        }
        Ok(stack[0])
    }
}

const BLOCK: usize = 1 << 12;

/// Decides `id` over `table` by enumerating every assignment in odometer
/// order (first variable most significant). Returns the lexicographically
/// first violation when there is one.
pub fn holds(table: &CayleyTable, id: &Identity) -> Result<Verdict> {
    let ctx = EvalContext::new(table, id.uses_identity())?;
    let compiled = Compiled::new(id);
    let n = table.order();
    let k = id.variables.len();
    let total = (n as u128).pow(k as u32);
    if total > usize::MAX as u128 {
        return Err(Error::Precondition(format!(
            "{n}^{k} assignments is too many"
        )));
    }
    let total = total as usize;

    let scan_block = |block: usize| -> Option<Result<Vec<ElementId>>> {
        let start = block * BLOCK;
        let end = (start + BLOCK).min(total);
        let mut values = decode(start, n, k);
        let mut stack = Vec::with_capacity(16);
        for _ in start..end {
            match compiled.satisfied(&ctx, &values, &mut stack) {
                Ok(true) => {}
                Ok(false) => return Some(Ok(values)),
                Err(e) => return Some(Err(e)),
            }
            advance(&mut values, n);
        }
        None
    };

    let blocks = total.div_ceil(BLOCK);
    let found = if blocks > 4 {
        (0..blocks).into_par_iter().find_map_first(scan_block)
    } else {
        (0..blocks).find_map(scan_block)
    };
    match found {
        None => Ok(Verdict::pass()),
        Some(Err(e)) => Err(e),
        Some(Ok(values)) => Ok(Verdict::fail(Assignment(
            id.variables
                .iter()
                .zip(values)
                .map(|(v, x)| (v.to_string(), x))
                .collect(),
        ))),
    }
}

/// Checks a conjunction; reports the first component (in order) that fails.
pub fn holds_all(table: &CayleyTable, ids: &[Identity]) -> Result<Verdict> {
    for id in ids {
        let v = holds(table, id)?;
        if !v.holds {
            return Ok(v);
        }
    }
    Ok(Verdict::pass())
}

fn decode(mut index: usize, n: usize, k: usize) -> Vec<ElementId> {
    let mut values = vec![0; k];
    for slot in values.iter_mut().rev() {
        *slot = index % n;
        index /= n;
    }
    values
}

#[inline]
fn advance(values: &mut [ElementId], n: usize) {
    for slot in values.iter_mut().rev() {
        *slot += 1;
        if *slot < n {
            return;
        }
        *slot = 0;
    }
}

// ---------------------------------------------------------------------------
// Presets

/// A named identity; chained equalities are stored as several identities
/// that must all hold.
#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub identities: Vec<Identity>,
}

impl Preset {
    pub fn check(&self, table: &CayleyTable) -> Result<Verdict> {
        holds_all(table, &self.identities)
    }

    pub fn source(&self) -> String {
        self.identities
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" ; ")
    }
}

const PRE_L1: &[(&str, &[&str])] = &[
    ("preL1.i", &["(a*b)*(c*d) = (a*c)*(b*d)"]),
    ("preL1.ii", &["a*b = c*d -> b*a = d*c"]),
    ("preL1.iii", &["a*(b*c) = b*(a*c)"]),
    ("preL1.iv", &["(a*b)*(c*d) = (d*b)*(c*a)"]),
    ("preL1.v", &["(a*b)*(c*d) = (d*c)*(b*a)"]),
    (
        "preL1.vi",
        &["a*b = c*d -> d'*b = c*a'", "d'*b = c*a' -> a*b = c*d"],
    ),
    ("preL1.vii", &["a*e = a -> e*a = a"]),
    ("preL1.viii", &["a*b = e -> b*a = e"]),
    ("preL1.ix", &["(a*b)' = a'*b'"]),
    (
        "preL1.x",
        &[
            "a*(b*(c*d)) = a*(c*(b*d))",
            "a*(b*(c*d)) = b*(a*(c*d))",
            "a*(b*(c*d)) = b*(c*(a*d))",
            "a*(b*(c*d)) = c*(a*(b*d))",
            "a*(b*(c*d)) = c*(b*(a*d))",
        ],
    ),
    ("preL1.xi", &["a*((b*c)*d) = c*((b*a)*d)"]),
    ("preL1.xii", &["(a*(b*c))*d = (a*(d*c))*b"]),
    ("preL1.xiii", &["((a*b)*c)*d = a*((b*c)*d)"]),
];

const STRUCTURAL: &[(&str, &[&str])] = &[
    ("medial", &["(a*b)*(c*d) = (a*c)*(b*d)"]),
    ("paramedial", &["(a*b)*(c*d) = (d*b)*(c*a)"]),
    ("left-invertive", &["(x*y)*z = (z*y)*x"]),
    ("idempotent", &["x*x = x"]),
    ("commutative", &["x*y = y*x"]),
    ("associative", &["(x*y)*z = x*(y*z)"]),
];

fn build(entries: &[(&'static str, &[&str])]) -> Vec<Preset> {
    entries
        .iter()
        .map(|(name, srcs)| Preset {
            name,
            identities: srcs
                .iter()
                .map(|s| Identity::parse(s).expect("preset parses"))
                .collect(),
        })
        .collect()
}

/// The thirteen standard AG-group identities, in order.
pub fn pre_l1_presets() -> Vec<Preset> {
    build(PRE_L1)
}

/// Every named preset: the standard AG-group identities followed by the structural laws.
pub fn preset_catalog() -> Vec<Preset> {
    let mut all = build(PRE_L1);
    all.extend(build(STRUCTURAL));
    all
}

pub fn preset(name: &str) -> Result<Preset> {
    PRE_L1
        .iter()
        .chain(STRUCTURAL)
        .find(|(n, _)| *n == name)
        .map(|entry| build(std::slice::from_ref(entry)).remove(0))
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}
