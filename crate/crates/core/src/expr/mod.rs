//! Canonical graded expressions over a field context.

pub mod context;
pub mod jet;
pub mod poly;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::One;

pub use context::{FieldContext, FieldDecl, Owner, Parity};
pub use jet::{JetVar, MultiIndex};
pub use poly::{FuncFactor, FuncKind, Monomial, Poly};

use crate::error::AlgebraError;
use crate::Rational;

/// Outcome of [`Expression::parity`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParityOf {
    Homogeneous(Parity),
    Mixed,
}

impl ParityOf {
    pub fn homogeneous(self) -> Option<Parity> {
        match self {
            ParityOf::Homogeneous(p) => Some(p),
            ParityOf::Mixed => None,
        }
    }
}

/// An element of the graded algebra of jet expressions, in canonical form.
///
/// Expressions are immutable values tied to a [`FieldContext`]. Binary
/// operations between expressions of different contexts fail with
/// [`AlgebraError::ContextMismatch`]; the operator overloads panic instead.
#[derive(Clone, Debug)]
pub struct Expression {
    ctx: Arc<FieldContext>,
    poly: Poly,
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.same_context(other) && self.poly == other.poly
    }
}

impl Eq for Expression {}

impl Expression {
    pub fn zero(ctx: &Arc<FieldContext>) -> Expression {
        Expression::from_poly(ctx, Poly::zero())
    }

    pub fn constant(ctx: &Arc<FieldContext>, c: Rational) -> Expression {
        Expression::from_poly(ctx, Poly::constant(c))
    }

    pub fn one(ctx: &Arc<FieldContext>) -> Expression {
        Expression::constant(ctx, Rational::one())
    }

    /// Wraps a polynomial whose jet variables belong to `ctx`.
    pub fn from_poly(ctx: &Arc<FieldContext>, poly: Poly) -> Expression {
        Expression {
            ctx: Arc::clone(ctx),
            poly,
        }
    }

    /// The jet variable of `owner` with derivative multi-index `order`.
    pub fn jet(
        ctx: &Arc<FieldContext>,
        owner: Owner,
        order: &[u16],
    ) -> Result<Expression, AlgebraError> {
        let v = jet_var(ctx, owner, order)?;
        Ok(Expression::from_poly(ctx, Poly::var(v)))
    }

    /// Looks a field or antifield up by name.
    pub fn named(
        ctx: &Arc<FieldContext>,
        name: &str,
        order: &[u16],
    ) -> Result<Expression, AlgebraError> {
        let owner = ctx
            .lookup(name)
            .ok_or_else(|| AlgebraError::InvalidJet(format!("unknown field `{name}`")))?;
        Expression::jet(ctx, owner, order)
    }

    /// `kind(arg)`; the argument must be parity-even and not a nonzero
    /// constant.
    pub fn func(kind: FuncKind, arg: &Expression) -> Result<Expression, AlgebraError> {
        Ok(Expression::from_poly(
            &arg.ctx,
            Poly::func(kind, arg.poly.clone())?,
        ))
    }

    pub fn context(&self) -> &Arc<FieldContext> {
        &self.ctx
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn same_context(&self, other: &Expression) -> bool {
        Arc::ptr_eq(&self.ctx, &other.ctx) || *self.ctx == *other.ctx
    }

    fn check(&self, other: &Expression) -> Result<(), AlgebraError> {
        if self.same_context(other) {
            Ok(())
        } else {
            Err(AlgebraError::ContextMismatch)
        }
    }

    pub fn checked_add(&self, other: &Expression) -> Result<Expression, AlgebraError> {
        self.check(other)?;
        Ok(self.with_poly(self.poly.add(&other.poly)))
    }

    pub fn checked_sub(&self, other: &Expression) -> Result<Expression, AlgebraError> {
        self.check(other)?;
        Ok(self.with_poly(self.poly.sub(&other.poly)))
    }

    /// Graded-commutative product.
    pub fn checked_mul(&self, other: &Expression) -> Result<Expression, AlgebraError> {
        self.check(other)?;
        Ok(self.with_poly(self.poly.mul(&other.poly)))
    }

    pub fn scale(&self, c: &Rational) -> Expression {
        self.with_poly(self.poly.scale(c))
    }

    pub fn pow(&self, n: u32) -> Expression {
        self.with_poly(self.poly.pow(n))
    }

    pub(crate) fn with_poly(&self, poly: Poly) -> Expression {
        Expression::from_poly(&self.ctx, poly)
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    /// Number of monomials.
    pub fn len(&self) -> usize {
        self.poly.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.poly.terms()
    }

    /// Common parity of all monomials; zero counts as even.
    pub fn parity(&self) -> ParityOf {
        match self.poly.parity() {
            Some(p) => ParityOf::Homogeneous(p),
            None => ParityOf::Mixed,
        }
    }

    /// `(even part, odd part)` by odd-factor count.
    pub fn split_by_parity(&self) -> (Expression, Expression) {
        let (even, odd) = self.poly.split_by_parity();
        (self.with_poly(even), self.with_poly(odd))
    }

    /// Value with every jet coordinate set to zero (`exp 0 = cos 0 = 1`,
    /// `sin 0 = 0`). Fails when a function is evaluated at a nonzero
    /// constant, whose value is not rational.
    pub fn eval_zero_section(&self) -> Result<Rational, AlgebraError> {
        self.poly.eval_zero_section()
    }

    /// Highest derivative order among the jet variables, `None` for
    /// constants.
    pub fn max_order(&self) -> Option<u32> {
        self.poly.max_order()
    }
}

impl FieldContext {
    /// Validated jet coordinate of `owner` with derivative multi-index `order`.
    pub fn jet_var(&self, owner: Owner, order: &[u16]) -> Result<JetVar, AlgebraError> {
        jet_var(self, owner, order)
    }
}

fn jet_var(ctx: &FieldContext, owner: Owner, order: &[u16]) -> Result<JetVar, AlgebraError> {
    if !ctx.contains(owner) {
        return Err(AlgebraError::InvalidJet(
            "owner is not declared in the context".into(),
        ));
    }
    if order.len() != ctx.dim() {
        return Err(AlgebraError::InvalidJet(format!(
            "multi-index has {} entries but the context has {} independent variables",
            order.len(),
            ctx.dim()
        )));
    }
    Ok(JetVar::new(
        owner,
        MultiIndex::from_slice(order),
        ctx.parity(owner),
    ))
}

macro_rules! binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Expression> for &Expression {
            type Output = Expression;

            fn $method(self, rhs: &Expression) -> Expression {
                self.$checked(rhs)
                    .expect("expressions from different contexts")
            }
        }

        impl $trait<Expression> for Expression {
            type Output = Expression;

            fn $method(self, rhs: Expression) -> Expression {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl Neg for &Expression {
    type Output = Expression;

    fn neg(self) -> Expression {
        self.with_poly(self.poly.neg())
    }
}

impl Neg for Expression {
    type Output = Expression;

    fn neg(self) -> Expression {
        -&self
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::textio::format_plain(self))
    }
}
