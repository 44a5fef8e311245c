//! Context-free normal form for graded differential polynomials with
//! elementary-function factors.
//!
//! A [`Monomial`] is a canonical product `even-jets * function-factors *
//! odd-jets`; the odd jets are kept strictly ascending and every
//! transposition needed to get there is absorbed into the coefficient.
//! [`Poly`] maps monomials to nonzero rational coefficients.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_traits::{One, Zero};

use super::context::{Owner, Parity};
use super::jet::{JetVar, MultiIndex};
use crate::error::AlgebraError;
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FuncKind {
    Exp,
    Sin,
    Cos,
}

impl FuncKind {
    pub fn name(self) -> &'static str {
        match self {
            FuncKind::Exp => "exp",
            FuncKind::Sin => "sin",
            FuncKind::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<FuncKind> {
        match name {
            "exp" => Some(FuncKind::Exp),
            "sin" => Some(FuncKind::Sin),
            "cos" => Some(FuncKind::Cos),
            _ => None,
        }
    }

    /// `f' = sign * g` with `g` another elementary function.
    fn derivative(self) -> (i32, FuncKind) {
        match self {
            FuncKind::Exp => (1, FuncKind::Exp),
            FuncKind::Sin => (1, FuncKind::Cos),
            FuncKind::Cos => (-1, FuncKind::Sin),
        }
    }

    /// Value at zero.
    fn at_zero(self) -> i32 {
        match self {
            FuncKind::Exp | FuncKind::Cos => 1,
            FuncKind::Sin => 0,
        }
    }
}

struct ArgInner {
    poly: Poly,
    hash: u64,
}

/// Hash-consed function argument.
///
/// Equal arguments produced on the same thread share one allocation, so the
/// common comparison is a pointer check; structural comparison is the
/// fallback across threads.
#[derive(Clone)]
pub struct Arg(Arc<ArgInner>);

thread_local! {
    static ARGS: RefCell<HashSet<Arg>> = RefCell::new(HashSet::new());
    static DERIV_CACHE: RefCell<HashMap<(usize, usize), (Arg, Poly)>> = RefCell::new(HashMap::new());
}

impl Arg {
    fn intern(poly: Poly) -> Arg {
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        poly.hash(&mut hasher);
        let candidate = Arg(Arc::new(ArgInner {
            hash: hasher.finish(),
            poly,
        }));
        ARGS.with(|set| {
            let mut set = set.borrow_mut();
            if let Some(existing) = set.get(&candidate) {
                return existing.clone();
            }
            set.insert(candidate.clone());
            candidate
        })
    }

    pub fn poly(&self) -> &Poly {
        &self.0.poly
    }

    fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// Total derivative of the argument, memoized per argument allocation.
    fn total_derivative(&self, direction: usize) -> Poly {
        let key = (self.key(), direction);
        if let Some(hit) = DERIV_CACHE.with(|c| c.borrow().get(&key).map(|(_, p)| p.clone())) {
            return hit;
        }
        let value = self.poly().total_derivative(direction);
        // The cache holds a clone of the argument so its address stays reserved.
        DERIV_CACHE.with(|c| c.borrow_mut().insert(key, (self.clone(), value.clone())));
        value
    }
}

impl PartialEq for Arg {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.hash == other.0.hash && self.0.poly == other.0.poly)
    }
}

impl Eq for Arg {}

impl Hash for Arg {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl Ord for Arg {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            std::cmp::Ordering::Equal
        } else {
            self.0.poly.cmp(&other.0.poly)
        }
    }
}

impl PartialOrd for Arg {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Debug for Arg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.poly.fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FuncFactor {
    pub kind: FuncKind,
    pub arg: Arg,
    pub power: u32,
}

/// Canonical graded monomial without its coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    even: Vec<(JetVar, u32)>,
    funcs: Vec<FuncFactor>,
    odd: Vec<JetVar>,
}

impl Monomial {
    pub fn one() -> Monomial {
        Monomial::default()
    }

    pub(crate) fn var(v: JetVar) -> Monomial {
        if v.is_odd() {
            Monomial {
                odd: vec![v],
                ..Monomial::default()
            }
        } else {
            Monomial {
                even: vec![(v, 1)],
                ..Monomial::default()
            }
        }
    }

    pub fn even_part(&self) -> &[(JetVar, u32)] {
        &self.even
    }

    pub fn func_part(&self) -> &[FuncFactor] {
        &self.funcs
    }

    pub fn odd_part(&self) -> &[JetVar] {
        &self.odd
    }

    pub fn is_one(&self) -> bool {
        self.even.is_empty() && self.funcs.is_empty() && self.odd.is_empty()
    }

    pub fn parity(&self) -> Parity {
        Parity::from_bit(self.odd.len() as u32)
    }

    /// Number of jet factors, counting powers; function factors excluded.
    pub fn degree(&self) -> u32 {
        self.even.iter().map(|(_, k)| *k).sum::<u32>() + self.odd.len() as u32
    }

    fn without_odd(&self) -> Monomial {
        Monomial {
            even: self.even.clone(),
            funcs: self.funcs.clone(),
            odd: Vec::new(),
        }
    }

    fn odd_only(&self) -> Monomial {
        Monomial {
            odd: self.odd.clone(),
            ..Monomial::default()
        }
    }

    /// Graded product; `None` when an odd variable repeats. The boolean is
    /// true when reordering the odd factors produced a minus sign.
    pub(crate) fn mul(&self, other: &Monomial) -> Option<(Monomial, bool)> {
        let (odd, negative) = merge_odd(&self.odd, &other.odd)?;
        Some((
            Monomial {
                even: merge_even(&self.even, &other.even),
                funcs: merge_funcs(&self.funcs, &other.funcs),
                odd,
            },
            negative,
        ))
    }

    fn for_each_var(&self, f: &mut impl FnMut(&JetVar)) {
        for (v, _) in &self.even {
            f(v);
        }
        for v in &self.odd {
            f(v);
        }
        for func in &self.funcs {
            for m in func.arg.poly().terms.keys() {
                m.for_each_var(f);
            }
        }
    }

    /// `c * self` with function factor `j` differentiated once:
    /// `k f^{k-1} f'(arg)`, with the odd part dropped. Returns the pieces
    /// needed to apply the chain rule.
    fn func_chain_base(&self, j: usize, coeff: &Rational) -> Poly {
        let factor = &self.funcs[j];
        let mut reduced = self.without_odd();
        if factor.power == 1 {
            reduced.funcs.remove(j);
        } else {
            reduced.funcs[j].power -= 1;
        }
        let (sign, kind) = factor.kind.derivative();
        let derived = Monomial {
            funcs: vec![FuncFactor {
                kind,
                arg: factor.arg.clone(),
                power: 1,
            }],
            ..Monomial::default()
        };
        let (m, _) = reduced.mul(&derived).expect("no odd factors");
        let c = coeff * Rational::from_integer((factor.power as i64 * sign as i64).into());
        Poly::from_term(m, c)
    }
}

fn merge_even(a: &[(JetVar, u32)], b: &[(JetVar, u32)]) -> Vec<(JetVar, u32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0.clone(), a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn merge_funcs(a: &[FuncFactor], b: &[FuncFactor]) -> Vec<FuncFactor> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let key_a = (a[i].kind, &a[i].arg);
        let key_b = (b[j].kind, &b[j].arg);
        match key_a.cmp(&key_b) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let mut merged = a[i].clone();
                merged.power += b[j].power;
                out.push(merged);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Merges two ascending odd lists. Each time an element of `b` overtakes the
/// remaining elements of `a`, that many transpositions occur.
fn merge_odd(a: &[JetVar], b: &[JetVar]) -> Option<(Vec<JetVar>, bool)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut swaps = 0usize;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                swaps += a.len() - i;
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => return None,
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, swaps % 2 == 1))
}

/// A finite sum of monomials with nonzero rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: Rational) -> Poly {
        Poly::from_term(Monomial::one(), c)
    }

    pub fn from_term(m: Monomial, c: Rational) -> Poly {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn var(v: JetVar) -> Poly {
        Poly::from_term(Monomial::var(v), Rational::one())
    }

    /// `f(arg)` for an elementary function `f`.
    pub fn func(kind: FuncKind, arg: Poly) -> Result<Poly, AlgebraError> {
        if arg.is_zero() {
            return Ok(Poly::constant(Rational::from_integer(
                kind.at_zero().into(),
            )));
        }
        if arg.terms.keys().any(|m| m.parity() == Parity::Odd) {
            return Err(AlgebraError::OddFunctionArgument(kind.name()));
        }
        if arg.terms.len() == 1 && arg.terms.keys().next().is_some_and(Monomial::is_one) {
            return Err(AlgebraError::ConstantFunctionArgument(kind.name()));
        }
        let m = Monomial {
            funcs: vec![FuncFactor {
                kind,
                arg: Arg::intern(arg),
                power: 1,
            }],
            ..Monomial::default()
        };
        Ok(Poly::from_term(m, Rational::one()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &Poly, scale: &Rational) {
        if scale.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c * scale);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_scaled(other, &-Rational::one());
        out
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((m, negative)) = ma.mul(mb) {
                    let c = ca * cb;
                    out.add_term(m, if negative { -c } else { c });
                }
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::constant(Rational::one());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Common parity of all monomials; zero is even. `None` if mixed.
    pub fn parity(&self) -> Option<Parity> {
        let mut parities = self.terms.keys().map(Monomial::parity);
        match parities.next() {
            None => Some(Parity::Even),
            Some(first) => parities.all(|p| p == first).then_some(first),
        }
    }

    pub fn split_by_parity(&self) -> (Poly, Poly) {
        let mut even = Poly::zero();
        let mut odd = Poly::zero();
        for (m, c) in &self.terms {
            let target = if m.parity() == Parity::Even {
                &mut even
            } else {
                &mut odd
            };
            target.terms.insert(m.clone(), c.clone());
        }
        (even, odd)
    }

    /// Coefficient of the empty monomial.
    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Monomial::one())
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Value with every jet coordinate set to zero.
    pub fn eval_zero_section(&self) -> Result<Rational, AlgebraError> {
        let mut total = Rational::zero();
        'terms: for (m, c) in &self.terms {
            if !m.even.is_empty() || !m.odd.is_empty() {
                continue;
            }
            for f in &m.funcs {
                if !f.arg.poly().eval_zero_section()?.is_zero() {
                    return Err(AlgebraError::IrrationalZeroSection);
                }
                if f.kind.at_zero() == 0 {
                    continue 'terms;
                }
            }
            total += c;
        }
        Ok(total)
    }

    /// Every jet variable occurring anywhere, including inside arguments.
    pub fn jet_vars(&self) -> BTreeSet<JetVar> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            m.for_each_var(&mut |v| {
                out.insert(v.clone());
            });
        }
        out
    }

    pub fn orders_of(&self, owner: Owner) -> BTreeSet<MultiIndex> {
        self.jet_vars()
            .into_iter()
            .filter(|v| v.owner() == owner)
            .map(|v| v.order().clone())
            .collect()
    }

    /// Highest total derivative order of any jet variable, `None` if there
    /// are none.
    pub fn max_order(&self) -> Option<u32> {
        self.jet_vars().iter().map(|v| v.order().total()).max()
    }

    /// Total derivative in `direction`; an even derivation.
    pub fn total_derivative(&self, direction: usize) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (idx, (v, k)) in m.even.iter().enumerate() {
                let mut rest = m.clone();
                if *k == 1 {
                    rest.even.remove(idx);
                } else {
                    rest.even[idx].1 -= 1;
                }
                let (next, _) = rest
                    .mul(&Monomial::var(v.raised(direction)))
                    .expect("even factor");
                out.add_term(next, c * Rational::from_integer((*k as i64).into()));
            }
            for (idx, v) in m.odd.iter().enumerate() {
                let mut rest = m.clone();
                rest.odd.remove(idx);
                // m = (-1)^idx v * rest; D swaps v for its raised copy in place.
                if let Some((next, negative)) = Monomial::var(v.raised(direction)).mul(&rest) {
                    let flip = negative ^ (idx % 2 == 1);
                    out.add_term(next, if flip { -c.clone() } else { c.clone() });
                }
            }
            for j in 0..m.funcs.len() {
                let base = m.func_chain_base(j, c);
                let darg = m.funcs[j].arg.total_derivative(direction);
                out.add_assign(
                    &base
                        .mul(&darg)
                        .mul(&Poly::from_term(m.odd_only(), Rational::one())),
                );
            }
        }
        out
    }

    /// Left partial derivative: `v` is transported to the leftmost position
    /// before it is struck out.
    pub fn partial_left(&self, v: &JetVar) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_assign(&m.partial_left(v, c));
        }
        out
    }

    /// Right partial derivative: `v` is transported to the rightmost position.
    pub fn partial_right(&self, v: &JetVar) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let left = m.partial_left(v, c);
            // For homogeneous f: d_R f = (-1)^{|v|(|f|+1)} d_L f.
            if v.is_odd() && m.parity() == Parity::Even {
                out.add_scaled(&left, &-Rational::one());
            } else {
                out.add_assign(&left);
            }
        }
        out
    }

    fn depends_on(&self, v: &JetVar) -> bool {
        self.terms.keys().any(|m| {
            let mut hit = false;
            m.for_each_var(&mut |w| hit |= w == v);
            hit
        })
    }
}

impl Monomial {
    fn partial_left(&self, v: &JetVar, c: &Rational) -> Poly {
        let mut out = Poly::zero();
        if v.is_odd() {
            if let Ok(idx) = self.odd.binary_search(v) {
                let mut rest = self.clone();
                rest.odd.remove(idx);
                out.add_term(rest, if idx % 2 == 1 { -c.clone() } else { c.clone() });
            }
        } else if let Ok(idx) = self.even.binary_search_by(|(w, _)| w.cmp(v)) {
            let k = self.even[idx].1;
            let mut rest = self.clone();
            if k == 1 {
                rest.even.remove(idx);
            } else {
                rest.even[idx].1 -= 1;
            }
            out.add_term(rest, c * Rational::from_integer((k as i64).into()));
        }
        for j in 0..self.funcs.len() {
            let arg = self.funcs[j].arg.poly();
            if !arg.depends_on(v) {
                continue;
            }
            let darg = arg.partial_left(v);
            if darg.is_zero() {
                continue;
            }
            let base = self.func_chain_base(j, c);
            out.add_assign(
                &base
                    .mul(&darg)
                    .mul(&Poly::from_term(self.odd_only(), Rational::one())),
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::context::Owner;

    fn q(k: u16) -> JetVar {
        JetVar::new(Owner::field(0), MultiIndex::from_slice(&[k]), Parity::Even)
    }

    fn p(k: u16) -> JetVar {
        JetVar::new(
            Owner::antifield(0),
            MultiIndex::from_slice(&[k]),
            Parity::Odd,
        )
    }

    fn r(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn odd_square_vanishes() {
        let a = Poly::var(p(0));
        assert!(a.mul(&a).is_zero());
    }

    #[test]
    fn odd_transposition_sign() {
        let ab = Poly::var(p(0)).mul(&Poly::var(p(1)));
        let ba = Poly::var(p(1)).mul(&Poly::var(p(0)));
        assert_eq!(ab, ba.neg());
        let (_, c) = ba.terms().next().unwrap();
        assert_eq!(*c, r(-1));
    }

    #[test]
    fn function_powers_merge() {
        let e = Poly::func(FuncKind::Exp, Poly::var(q(1))).unwrap();
        let sq = e.mul(&e);
        let (m, _) = sq.terms().next().unwrap();
        assert_eq!(m.func_part().len(), 1);
        assert_eq!(m.func_part()[0].power, 2);
    }

    #[test]
    fn function_of_zero_folds() {
        assert_eq!(
            Poly::func(FuncKind::Cos, Poly::zero()).unwrap(),
            Poly::constant(r(1))
        );
        assert!(Poly::func(FuncKind::Sin, Poly::zero()).unwrap().is_zero());
        assert!(Poly::func(FuncKind::Exp, Poly::constant(r(2))).is_err());
        assert!(Poly::func(FuncKind::Exp, Poly::var(p(0))).is_err());
    }

    #[test]
    fn interned_arguments_share_storage() {
        let a = Poly::func(FuncKind::Exp, Poly::var(q(1))).unwrap();
        let b = Poly::func(FuncKind::Sin, Poly::var(q(1))).unwrap();
        let fa = &a.terms().next().unwrap().0.func_part()[0].arg;
        let fb = &b.terms().next().unwrap().0.func_part()[0].arg;
        assert!(Arc::ptr_eq(&fa.0, &fb.0));
    }

    #[test]
    fn total_derivative_of_cos() {
        let c = Poly::func(FuncKind::Cos, Poly::var(q(0))).unwrap();
        let expected = Poly::func(FuncKind::Sin, Poly::var(q(0)))
            .unwrap()
            .mul(&Poly::var(q(1)))
            .neg();
        assert_eq!(c.total_derivative(0), expected);
    }

    #[test]
    fn zero_section() {
        let e = Poly::func(FuncKind::Exp, Poly::var(q(1))).unwrap();
        assert_eq!(e.eval_zero_section().unwrap(), r(1));
        let nested = Poly::func(
            FuncKind::Exp,
            Poly::func(FuncKind::Cos, Poly::var(q(0))).unwrap(),
        )
        .unwrap();
        assert_eq!(
            nested.eval_zero_section(),
            Err(AlgebraError::IrrationalZeroSection)
        );
        let s = Poly::func(FuncKind::Sin, Poly::var(q(0)))
            .unwrap()
            .add(&Poly::constant(r(3)));
        assert_eq!(s.eval_zero_section().unwrap(), r(3));
    }
}
