//! Local functionals: densities up to total divergences.

use std::fmt;
use std::sync::Arc;

use crate::calculus::is_exact;
use crate::error::AlgebraError;
use crate::expr::{Expression, FieldContext, Parity, ParityOf};
use crate::Rational;

/// `∫ density dvol` over a field context. Equality is modulo total
/// divergences, see [`functional_eq`].
#[derive(Clone, Debug)]
pub struct Functional {
    density: Expression,
    label: Option<String>,
}

impl Functional {
    pub fn new(density: Expression) -> Functional {
        Functional {
            density,
            label: None,
        }
    }

    pub fn labeled(density: Expression, label: impl Into<String>) -> Functional {
        Functional {
            density,
            label: Some(label.into()),
        }
    }

    pub fn zero(ctx: &Arc<FieldContext>) -> Functional {
        Functional::new(Expression::zero(ctx))
    }

    pub fn density(&self) -> &Expression {
        &self.density
    }

    pub fn into_density(self) -> Expression {
        self.density
    }

    pub fn context(&self) -> &Arc<FieldContext> {
        self.density.context()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Functional {
        self.label = Some(label.into());
        self
    }

    /// Label if present, otherwise the density text.
    pub fn display_name(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| self.density.to_string())
    }

    /// True when the representative density is literally zero.
    pub fn is_trivially_zero(&self) -> bool {
        self.density.is_zero()
    }

    /// The even and odd components, for callers that need a grading.
    pub fn split_by_parity(&self) -> (Functional, Functional) {
        let (even, odd) = self.density.split_by_parity();
        (Functional::new(even), Functional::new(odd))
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "∫ {} dvol", self.density)
    }
}

/// Parity of a homogeneous functional; the zero functional is even.
pub fn functional_parity(f: &Functional) -> Result<Parity, AlgebraError> {
    match f.density.parity() {
        ParityOf::Homogeneous(p) => Ok(p),
        ParityOf::Mixed => Err(AlgebraError::NonHomogeneous(f.display_name())),
    }
}

/// Equality as functionals: the densities differ by a total divergence.
pub fn functional_eq(f: &Functional, g: &Functional) -> Result<bool, AlgebraError> {
    let diff = f.density.checked_sub(&g.density)?;
    Ok(is_exact(&diff))
}

/// `c1 F + c2 G`.
pub fn scale_add(
    c1: &Rational,
    f: &Functional,
    c2: &Rational,
    g: &Functional,
) -> Result<Functional, AlgebraError> {
    Ok(Functional::new(
        f.density.scale(c1).checked_add(&g.density.scale(c2))?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{total_derivative, Direction};
    use crate::expr::FuncKind;
    use num_traits::{One, Zero};

    fn ctx() -> Arc<FieldContext> {
        Arc::new(FieldContext::single_even_field())
    }

    fn v(c: &Arc<FieldContext>, name: &str, k: u16) -> Expression {
        Expression::named(c, name, &[k]).unwrap()
    }

    #[test]
    fn parities_of_sample_functionals() {
        let c = ctx();
        let f = Functional::new(&(&v(&c, "p", 0) * &v(&c, "q", 0)) * &v(&c, "q", 2));
        let g = Functional::new(
            &v(&c, "p", 1) * &Expression::func(FuncKind::Exp, &v(&c, "q", 1)).unwrap(),
        );
        let even = Functional::new(&v(&c, "q", 0) * &v(&c, "q", 2));
        assert_eq!(functional_parity(&f).unwrap(), Parity::Odd);
        assert_eq!(functional_parity(&g).unwrap(), Parity::Odd);
        assert_eq!(functional_parity(&even).unwrap(), Parity::Even);
        let mixed = Functional::new(&v(&c, "q", 0) + &v(&c, "p", 0));
        assert!(matches!(
            functional_parity(&mixed),
            Err(AlgebraError::NonHomogeneous(_))
        ));
    }

    #[test]
    fn equality_modulo_divergence() {
        let c = ctx();
        let d = Direction::new(&c, 0).unwrap();
        let div = Functional::new(total_derivative(&(&v(&c, "p", 0) * &v(&c, "q", 1)), d));
        assert!(functional_eq(&div, &Functional::zero(&c)).unwrap());
        let a = Functional::new(&v(&c, "p", 0) * &v(&c, "q", 2));
        let b = Functional::new(&v(&c, "p", 2) * &v(&c, "q", 0));
        assert!(functional_eq(&a, &b).unwrap());
        let e = Functional::new(Expression::func(FuncKind::Exp, &v(&c, "q", 1)).unwrap());
        assert!(!functional_eq(&e, &Functional::zero(&c)).unwrap());
    }

    #[test]
    fn scale_add_cases() {
        let c = ctx();
        let f = Functional::new(&v(&c, "p", 0) * &v(&c, "q", 2));
        let g = Functional::new(v(&c, "q", 1));
        let one = Rational::one();
        let zero = Rational::zero();
        assert!(scale_add(&one, &f, &-one.clone(), &f)
            .unwrap()
            .is_trivially_zero());
        assert_eq!(
            scale_add(&one, &f, &zero, &g).unwrap().density(),
            f.density()
        );
    }

    #[test]
    fn context_mismatch() {
        let a = Functional::zero(&ctx());
        let other = Arc::new(
            FieldContext::new(
                vec!["t".into()],
                vec![crate::expr::FieldDecl {
                    name: "u".into(),
                    parity: Parity::Odd,
                    antifield: "w".into(),
                }],
            )
            .unwrap(),
        );
        let b = Functional::zero(&other);
        assert_eq!(functional_eq(&a, &b), Err(AlgebraError::ContextMismatch));
    }
}
