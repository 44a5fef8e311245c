//! Total derivatives, directed partial and Euler derivatives, and the
//! exactness test for densities.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::AlgebraError;
use crate::expr::{Expression, FieldContext, JetVar, MultiIndex, Owner, Poly};

/// Which side a graded derivative acts from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl std::str::FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(format!("side must be `left` or `right`, got `{other}`")),
        }
    }
}

/// An independent-variable direction for total derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Direction(usize);

impl Direction {
    pub fn new(ctx: &FieldContext, index: usize) -> Result<Direction, AlgebraError> {
        if index < ctx.dim() {
            Ok(Direction(index))
        } else {
            Err(AlgebraError::InvalidJet(format!(
                "direction {index} out of range for {} independent variables",
                ctx.dim()
            )))
        }
    }

    pub fn index(self) -> usize {
        self.0
    }

    /// All directions of a context.
    pub fn all(ctx: &FieldContext) -> impl Iterator<Item = Direction> {
        (0..ctx.dim()).map(Direction)
    }
}

/// Graded partial derivative with respect to a single jet coordinate.
pub fn partial(e: &Expression, v: &JetVar, side: Side) -> Expression {
    e.with_poly(partial_poly(e.poly(), v, side))
}

fn partial_poly(p: &Poly, v: &JetVar, side: Side) -> Poly {
    match side {
        Side::Left => p.partial_left(v),
        Side::Right => p.partial_right(v),
    }
}

/// Total derivative `D_d`.
pub fn total_derivative(e: &Expression, d: Direction) -> Expression {
    assert!(d.0 < e.context().dim(), "direction out of range");
    e.with_poly(e.poly().total_derivative(d.0))
}

/// `D^sigma e`.
pub fn total_derivative_pow(e: &Expression, sigma: &MultiIndex) -> Expression {
    let mut p = e.poly().clone();
    for (dir, &k) in sigma.as_slice().iter().enumerate() {
        for _ in 0..k {
            if p.is_zero() {
                return e.with_poly(p);
            }
            p = p.total_derivative(dir);
        }
    }
    e.with_poly(p)
}

/// Directed Euler operator `sum_sigma (-D)^sigma d/d(owner_sigma)`, the
/// partials taken from `side`.
pub fn euler(e: &Expression, owner: Owner, side: Side) -> Expression {
    e.with_poly(euler_poly(e.poly(), owner, side, e.context().dim()))
}

pub(crate) fn euler_poly(p: &Poly, owner: Owner, side: Side, dim: usize) -> Poly {
    let vars: Vec<JetVar> = p
        .jet_vars()
        .into_iter()
        .filter(|v| v.owner() == owner)
        .collect();
    let entries: Vec<(MultiIndex, Poly)> = vars
        .iter()
        .map(|v| (v.order().clone(), partial_poly(p, v, side)))
        .filter(|(_, d)| !d.is_zero())
        .collect();
    alternating_horner(entries, 0, dim)
}

/// `sum_sigma (-D)^sigma P_sigma`, nested Horner-style one direction at a
/// time so each total derivative is applied once per order.
pub(crate) fn alternating_horner(entries: Vec<(MultiIndex, Poly)>, dir: usize, dim: usize) -> Poly {
    if dir == dim {
        let mut out = Poly::zero();
        for (_, p) in &entries {
            out.add_assign(p);
        }
        return out;
    }
    let mut groups: BTreeMap<u16, Vec<(MultiIndex, Poly)>> = BTreeMap::new();
    for (sigma, p) in entries {
        groups.entry(sigma.get(dir)).or_default().push((sigma, p));
    }
    let Some(&top) = groups.keys().next_back() else {
        return Poly::zero();
    };
    let mut acc = Poly::zero();
    for k in (0..=top).rev() {
        let inner = groups
            .remove(&k)
            .map(|g| alternating_horner(g, dir + 1, dim))
            .unwrap_or_default();
        acc = if acc.is_zero() {
            inner
        } else {
            inner.sub(&acc.total_derivative(dir))
        };
    }
    acc
}

/// True iff `e` is a total divergence: every Euler derivative vanishes and
/// so does the value on the zero section.
///
/// Densities whose zero-section value is not rational (a function evaluated
/// at a nonzero constant) are reported as not exact.
pub fn is_exact(e: &Expression) -> bool {
    if e.is_zero() {
        return true;
    }
    match e.eval_zero_section() {
        Ok(c) if c.is_zero() => {}
        _ => return false,
    }
    let dim = e.context().dim();
    let owners: Vec<Owner> = e.context().owners().collect();
    owners
        .into_iter()
        .all(|w| euler_poly(e.poly(), w, Side::Left, dim).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::FuncKind;
    use crate::Rational;
    use std::sync::Arc;

    fn ctx() -> Arc<FieldContext> {
        Arc::new(FieldContext::single_even_field())
    }

    fn v(c: &Arc<FieldContext>, name: &str, k: u16) -> Expression {
        Expression::named(c, name, &[k]).unwrap()
    }

    fn jet(c: &Arc<FieldContext>, name: &str, k: u16) -> JetVar {
        c.jet_var(c.lookup(name).unwrap(), &[k]).unwrap()
    }

    fn r(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn partial_of_f_density_wrt_antifield() {
        let c = ctx();
        let f = &(&v(&c, "p", 0) * &v(&c, "q", 0)) * &v(&c, "q", 2);
        let d = partial(&f, &jet(&c, "p", 0), Side::Left);
        assert_eq!(d, &v(&c, "q", 0) * &v(&c, "q", 2));
    }

    #[test]
    fn chain_rule_through_exp() {
        let c = ctx();
        let e = Expression::func(FuncKind::Exp, &v(&c, "q", 1)).unwrap();
        let g = &v(&c, "p", 1) * &e;
        assert_eq!(partial(&g, &jet(&c, "q", 1), Side::Left), g);
    }

    #[test]
    fn odd_left_right_partials() {
        let c = ctx();
        let f = &v(&c, "p", 0) * &v(&c, "p", 1);
        let p0 = jet(&c, "p", 0);
        // f even, so d_L = -d_R for odd variables.
        assert_eq!(partial(&f, &p0, Side::Left), v(&c, "p", 1));
        assert_eq!(partial(&f, &p0, Side::Right), -v(&c, "p", 1));
    }

    #[test]
    fn total_derivative_examples() {
        let c = ctx();
        let d = Direction::new(&c, 0).unwrap();
        let cos_q = Expression::func(FuncKind::Cos, &v(&c, "q", 0)).unwrap();
        let sin_q = Expression::func(FuncKind::Sin, &v(&c, "q", 0)).unwrap();
        assert_eq!(total_derivative(&cos_q, d), -(&sin_q * &v(&c, "q", 1)));
        let e = Expression::func(FuncKind::Exp, &v(&c, "q", 1)).unwrap();
        assert_eq!(total_derivative(&e, d), &e * &v(&c, "q", 2));
        let pq = &v(&c, "p", 0) * &v(&c, "q", 0);
        assert_eq!(
            total_derivative(&pq, d),
            &(&v(&c, "p", 1) * &v(&c, "q", 0)) + &(&v(&c, "p", 0) * &v(&c, "q", 1))
        );
    }

    #[test]
    fn euler_of_f_wrt_field() {
        let c = ctx();
        let q = c.lookup("q").unwrap();
        let f = &(&v(&c, "p", 0) * &v(&c, "q", 0)) * &v(&c, "q", 2);
        // Two-term form: p*q_xx + D^2(p*q), computed independently.
        let d = Direction::new(&c, 0).unwrap();
        let pq = &v(&c, "p", 0) * &v(&c, "q", 0);
        let two_term =
            &(&v(&c, "p", 0) * &v(&c, "q", 2)) + &total_derivative(&total_derivative(&pq, d), d);
        let got = euler(&f, q, Side::Right);
        assert_eq!(got, two_term);
        let expanded = &(&(&v(&c, "p", 0) * &v(&c, "q", 2)).scale(&r(2))
            + &(&v(&c, "p", 1) * &v(&c, "q", 1)).scale(&r(2)))
            + &(&v(&c, "p", 2) * &v(&c, "q", 0));
        assert_eq!(got, expanded);
    }

    #[test]
    fn euler_of_g_wrt_field() {
        let c = ctx();
        let q = c.lookup("q").unwrap();
        let e = Expression::func(FuncKind::Exp, &v(&c, "q", 1)).unwrap();
        let g = &v(&c, "p", 1) * &e;
        let expected = -(&(&v(&c, "p", 2) * &e) + &(&(&v(&c, "p", 1) * &e) * &v(&c, "q", 2)));
        assert_eq!(euler(&g, q, Side::Right), expected);
    }

    #[test]
    fn exactness_examples() {
        let c = ctx();
        let d = Direction::new(&c, 0).unwrap();
        assert!(is_exact(&total_derivative(
            &(&v(&c, "p", 0) * &v(&c, "q", 1)),
            d
        )));
        assert!(!is_exact(
            &Expression::func(FuncKind::Exp, &v(&c, "q", 1)).unwrap()
        ));
        assert!(!is_exact(&Expression::one(&c)));
        assert!(is_exact(&Expression::zero(&c)));
    }

    #[test]
    fn multi_dimensional_euler_annihilates_divergence() {
        let c = Arc::new(
            FieldContext::new(
                vec!["x".into(), "y".into()],
                vec![crate::expr::FieldDecl {
                    name: "u".into(),
                    parity: crate::expr::Parity::Even,
                    antifield: "w".into(),
                }],
            )
            .unwrap(),
        );
        let u10 = Expression::named(&c, "u", &[1, 0]).unwrap();
        let u01 = Expression::named(&c, "u", &[0, 1]).unwrap();
        let w = Expression::named(&c, "w", &[0, 0]).unwrap();
        let f = &(&u10 * &u01) * &w + Expression::func(FuncKind::Sin, &u01).unwrap();
        let dx = Direction::new(&c, 0).unwrap();
        let dy = Direction::new(&c, 1).unwrap();
        let div = &total_derivative(&f, dx) + &total_derivative(&(&f * &u10), dy);
        assert!(is_exact(&div));
        assert!(!is_exact(&f));
    }
}
