//! The variational Schouten bracket, its Jacobi identity and the term-level
//! trace of how the identity balances.

mod ledger;
mod trace;

use std::sync::Arc;

use crate::calculus::{euler_poly, Side};
use crate::error::AlgebraError;
use crate::expr::{FieldContext, Owner, Parity, Poly};
use crate::functional::{functional_parity, Functional};
use crate::Rational;

pub use ledger::{eq1_sign, ledger_closed_form, reorder_sign_ledger, LedgerEntry};
pub use trace::{
    expand_trace, CancellationPair, CheckLevel, GroupCheck, LabelMatch, TermSide, TraceReport,
    TraceTerm, Verdict,
};

/// A bracket value together with the labels of the two arguments.
#[derive(Clone, Debug)]
pub struct BracketResult {
    pub value: Functional,
    pub provenance: (String, String),
}

/// `+1` for a field variation paired with an antifield covector, `-1` for
/// the reverse pairing.
pub(crate) fn coupling(w: Owner) -> i32 {
    if w.is_antifield() {
        -1
    } else {
        1
    }
}

pub(crate) fn rat(sign: i32) -> Rational {
    Rational::from_integer(sign.into())
}

pub(crate) fn sign_if(odd: bool) -> i32 {
    if odd {
        -1
    } else {
        1
    }
}

/// Bracket of two densities: `sum_w k_w E_R(f, w) E_L(g, w^dagger)`.
pub(crate) fn bracket_poly(f: &Poly, g: &Poly, ctx: &FieldContext) -> Poly {
    let dim = ctx.dim();
    let mut out = Poly::zero();
    if f.is_zero() || g.is_zero() {
        return out;
    }
    for w in ctx.owners() {
        let ef = euler_poly(f, w, Side::Right, dim);
        if ef.is_zero() {
            continue;
        }
        let eg = euler_poly(g, w.conjugate(), Side::Left, dim);
        if eg.is_zero() {
            continue;
        }
        out.add_scaled(&ef.mul(&eg), &rat(coupling(w)));
    }
    out
}

fn check_pair(f: &Functional, g: &Functional) -> Result<(Parity, Parity), AlgebraError> {
    if !f.density().same_context(g.density()) {
        return Err(AlgebraError::ContextMismatch);
    }
    Ok((functional_parity(f)?, functional_parity(g)?))
}

fn bracket_label(f: &Functional, g: &Functional) -> String {
    format!("[[{},{}]]", f.display_name(), g.display_name())
}

/// `[[F,G]]`. Both arguments must be parity-homogeneous.
pub fn schouten_bracket(f: &Functional, g: &Functional) -> Result<BracketResult, AlgebraError> {
    check_pair(f, g)?;
    let ctx: &Arc<FieldContext> = f.context();
    let density = bracket_poly(f.density().poly(), g.density().poly(), ctx);
    Ok(BracketResult {
        value: Functional::labeled(f.density().with_poly(density), bracket_label(f, g)),
        provenance: (f.display_name(), g.display_name()),
    })
}

/// `[[F,[[G,H]]]] - [[[[F,G]],H]] - (-1)^((|F|-1)(|G|-1)) [[G,[[F,H]]]]`.
pub fn jacobi_defect(
    f: &Functional,
    g: &Functional,
    h: &Functional,
) -> Result<Functional, AlgebraError> {
    let (pf, pg) = check_pair(f, g)?;
    check_pair(f, h)?;
    let gh = schouten_bracket(g, h)?.value;
    let fg = schouten_bracket(f, g)?.value;
    let fh = schouten_bracket(f, h)?.value;
    let lhs = schouten_bracket(f, &gh)?.value;
    let rhs1 = schouten_bracket(&fg, h)?.value;
    let rhs2 = schouten_bracket(g, &fh)?.value;
    let s = rat(eq1_sign(pf, pg));
    let mut d = lhs.density().poly().sub(rhs1.density().poly());
    d.add_scaled(rhs2.density().poly(), &-s);
    Ok(Functional::labeled(
        f.density().with_poly(d),
        format!(
            "Jacobi({},{},{})",
            f.display_name(),
            g.display_name(),
            h.display_name()
        ),
    ))
}

/// `[[F,G]] + (-1)^((|F|-1)(|G|-1)) [[G,F]]`, which vanishes as a functional.
pub fn graded_symmetry_defect(f: &Functional, g: &Functional) -> Result<Functional, AlgebraError> {
    let (pf, pg) = check_pair(f, g)?;
    let fg = schouten_bracket(f, g)?.value;
    let gf = schouten_bracket(g, f)?.value;
    let mut d = fg.density().poly().clone();
    d.add_scaled(gf.density().poly(), &rat(eq1_sign(pf, pg)));
    Ok(Functional::new(f.density().with_poly(d)))
}

/// Parity of a bracket with the given argument parities.
pub fn bracket_parity(f: Parity, g: Parity) -> Parity {
    f + g + Parity::Odd
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::is_exact;
    use crate::textio::parse_density;

    fn ctx() -> Arc<FieldContext> {
        Arc::new(FieldContext::single_even_field())
    }

    fn fun(c: &Arc<FieldContext>, s: &str) -> Functional {
        Functional::labeled(parse_density(s, c).unwrap(), s)
    }

    #[test]
    fn bracket_of_g_and_h() {
        let c = ctx();
        let g = fun(&c, "p[1]*exp(q[1])");
        let h = fun(&c, "p[2]*cos(q)");
        let got = schouten_bracket(&g, &h).unwrap();
        let expected = parse_density(
            "-(p[2]*exp(q[1]) + p[1]*exp(q[1])*q[2]) * (-cos(q)*q[1]^2 - sin(q)*q[2]) - exp(q[1])*q[2]*p[2]*sin(q)",
            &c,
        )
        .unwrap();
        assert_eq!(got.value.density(), &expected);
        assert_eq!(
            got.provenance,
            ("p[1]*exp(q[1])".to_string(), "p[2]*cos(q)".to_string())
        );
    }

    #[test]
    fn reference_jacobi_vanishes() {
        let c = ctx();
        let f = fun(&c, "p*q*q[2]");
        let g = fun(&c, "p[1]*exp(q[1])");
        let h = fun(&c, "p[2]*cos(q)");
        let d = jacobi_defect(&f, &g, &h).unwrap();
        assert!(is_exact(d.density()));
        assert!(is_exact(graded_symmetry_defect(&g, &h).unwrap().density()));
    }

    #[test]
    fn zero_and_mismatch() {
        let c = ctx();
        let f = fun(&c, "p*q*q[2]");
        assert!(schouten_bracket(&f, &Functional::zero(&c))
            .unwrap()
            .value
            .is_trivially_zero());
        let mixed = fun(&c, "p + q");
        assert!(matches!(
            schouten_bracket(&f, &mixed),
            Err(AlgebraError::NonHomogeneous(_))
        ));
    }
}
