//! Finite candidate sets of predicates, bounded by depth and width.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use super::relation::in_language;
use super::PredicateError;
use crate::context::ExecutionContext;
use crate::syntax::{Entry, Member, Name, Predicate};

pub const DEFAULT_UNIVERSE_CAP: usize = 500_000;

/// Bounds on the predicates considered by the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Maximum structural depth.
    pub depth: usize,
    /// Maximum number of entries of a top-level object predicate. Nested
    /// object predicates always have at most one entry.
    pub width: usize,
    /// Largest number of predicates a single language level may hold.
    pub cap: usize,
}

impl Bounds {
    pub fn new(depth: usize) -> Bounds {
        Bounds { depth, width: 1, cap: DEFAULT_UNIVERSE_CAP }
    }

    pub fn with_width(self, width: usize) -> Bounds {
        Bounds { width: width.max(1), ..self }
    }

    /// Membership in the universe of `c`, decided structurally.
    pub fn admits(&self, ec: &ExecutionContext, c: &str, p: &Predicate) -> bool {
        p.depth() <= self.depth
            && p.width() <= self.width
            && p.nested_width() <= 1
            && in_language(ec, c, p).unwrap_or(false)
    }
}

type Level = Rc<Vec<Predicate>>;

/// Lazily built, per-class languages of predicates with depth at most `k`
/// and no nested object predicate wider than one entry.
pub struct Languages<'a> {
    ec: &'a ExecutionContext,
    cap: usize,
    cache: RefCell<HashMap<(Name, usize), Level>>,
}

impl<'a> Languages<'a> {
    pub fn new(ec: &'a ExecutionContext, cap: usize) -> Languages<'a> {
        Languages { ec, cap, cache: RefCell::new(HashMap::new()) }
    }

    /// Predicates in `L(c)` of depth at most `k` with nested width at most one,
    /// ordered by depth, then fields before methods in declaration order.
    pub fn nested(&self, k: usize, c: &str) -> Result<Rc<Vec<Predicate>>, PredicateError> {
        let key = (Name::from(c), k);
        if let Some(hit) = self.cache.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let built = Rc::new(self.build(k, c)?);
        self.cache.borrow_mut().insert(key, built.clone());
        Ok(built)
    }

    fn build(&self, k: usize, c: &str) -> Result<Vec<Predicate>, PredicateError> {
        if k == 0 {
            return Ok(vec![Predicate::Top, Predicate::Nil, Predicate::empty()]);
        }
        let mut out = (*self.nested(k - 1, c)?).clone();
        let too_large = || PredicateError::UniverseTooLarge { class: Name::from(c), depth: k, cap: self.cap };
        let ec = self.ec;
        for f in ec.fields_of(c)? {
            let d = ec.field_type(c, &f)?;
            for sigma in self.nested(k - 1, &d)?.iter() {
                if sigma.is_normal() && sigma.depth() == k - 1 {
                    out.push(Predicate::singleton(Entry { label: f.clone(), member: Member::Value(sigma.clone()) }));
                }
            }
            if out.len() > self.cap {
                return Err(too_large());
            }
        }
        for m in ec.method_names(c)? {
            let sig = ec.method_type(c, &m)?;
            let phis = self.nested(k - 1, c)?;
            let psis = sig.params.iter().map(|ci| self.nested(k - 1, ci)).collect::<Result<Vec<_>, _>>()?;
            let sigmas = self.nested(k - 1, &sig.ret)?;
            let mut combo = vec![0usize; psis.len()];
            let combos: usize = psis.iter().map(|v| v.len()).product();
            let estimate = phis.len().saturating_mul(combos).saturating_mul(sigmas.len());
            if out.len().saturating_add(estimate / 2) > self.cap {
                return Err(too_large());
            }
            for _ in 0..combos {
                let args: Vec<Predicate> = combo.iter().zip(&psis).map(|(&i, v)| v[i].clone()).collect();
                let args_depth = args.iter().map(Predicate::depth).max().unwrap_or(0);
                for phi in phis.iter() {
                    for sigma in sigmas.iter().filter(|s| s.is_normal()) {
                        if args_depth.max(phi.depth()).max(sigma.depth()) == k - 1 {
                            out.push(Predicate::method(&m, phi.clone(), args.clone(), sigma.clone()));
                        }
                    }
                }
                advance(&mut combo, &psis);
            }
            if out.len() > self.cap {
                return Err(too_large());
            }
        }
        Ok(out)
    }

    /// The universe of `c`: width-one predicates from [`Languages::nested`],
    /// plus joins of up to `width` distinct object singletons.
    pub fn universe(&self, c: &str, bounds: Bounds) -> Result<Vec<Predicate>, PredicateError> {
        let base = self.nested(bounds.depth, c)?;
        let mut out = (*base).clone();
        if bounds.width > 1 {
            let singles: Vec<&Predicate> = base.iter().filter(|p| p.width() == 1).collect();
            let mut stack: Vec<(usize, Vec<Entry>)> = vec![(0, Vec::new())];
            while let Some((start, entries)) = stack.pop() {
                for (i, s) in singles.iter().enumerate().skip(start) {
                    let mut next = entries.clone();
                    next.extend(s.entries().iter().cloned());
                    if next.len() >= 2 {
                        out.push(Predicate::Object(next.clone()));
                        if out.len() > bounds.cap {
                            return Err(PredicateError::UniverseTooLarge {
                                class: Name::from(c),
                                depth: bounds.depth,
                                cap: bounds.cap,
                            });
                        }
                    }
                    if next.len() < bounds.width {
                        stack.push((i + 1, next));
                    }
                }
            }
        }
        Ok(out)
    }
}

fn advance(combo: &mut [usize], lists: &[Rc<Vec<Predicate>>]) {
    for (slot, list) in combo.iter_mut().zip(lists).rev() {
        *slot += 1;
        if *slot < list.len() {
            return;
        }
        *slot = 0;
    }
}

/// Every predicate, over all valid classes, within the given bounds;
/// canonicalised and deduplicated.
pub fn candidate_universe(ec: &ExecutionContext, bounds: Bounds) -> Result<BTreeSet<Predicate>, PredicateError> {
    let langs = Languages::new(ec, bounds.cap);
    let mut out = BTreeSet::new();
    for c in ec.valid_classes() {
        for p in langs.universe(&c, bounds)? {
            out.insert(p.canonical());
        }
    }
    Ok(out)
}
