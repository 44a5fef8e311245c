#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varschouten::harness::{random_functional, FuzzParams, ParityTarget};
use varschouten::{
    parse_density, Expression, FieldContext, FieldDecl, Functional, Parity, Rational,
};

pub fn single_field_ctx() -> Arc<FieldContext> {
    Arc::new(FieldContext::single_even_field())
}

/// Two independent variables, an odd field `u` (antifield `a`) and an even
/// field `v` (antifield `b`).
pub fn two_field_ctx() -> Arc<FieldContext> {
    Arc::new(
        FieldContext::new(
            vec!["x".into(), "y".into()],
            vec![
                FieldDecl {
                    name: "u".into(),
                    parity: Parity::Odd,
                    antifield: "a".into(),
                },
                FieldDecl {
                    name: "v".into(),
                    parity: Parity::Even,
                    antifield: "b".into(),
                },
            ],
        )
        .unwrap(),
    )
}

pub fn fun(ctx: &Arc<FieldContext>, text: &str) -> Functional {
    Functional::labeled(parse_density(text, ctx).unwrap(), text)
}

pub fn params(seed: u64, target: ParityTarget) -> FuzzParams {
    FuzzParams {
        seed,
        parity_target: target,
        ..FuzzParams::default()
    }
}

/// Random density; homogeneous unless `target` is `Any`, in which case it
/// is the sum of an even and an odd one.
pub fn random_density(
    ctx: &Arc<FieldContext>,
    seed: u64,
    index: u64,
    target: ParityTarget,
) -> Expression {
    match target {
        ParityTarget::Any => {
            let even =
                random_functional(&params(seed, ParityTarget::Even), ctx, index).into_density();
            let odd =
                random_functional(&params(seed, ParityTarget::Odd), ctx, index).into_density();
            &even + &odd
        }
        t => random_functional(&params(seed, t), ctx, index).into_density(),
    }
}

pub fn homogeneous(ctx: &Arc<FieldContext>, seed: u64, index: u64) -> Expression {
    random_functional(&params(seed, ParityTarget::Any), ctx, index).into_density()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let n: i64 = rng.gen_range(-7..=7);
    let d: i64 = rng.gen_range(1..=5);
    Rational::new(n.into(), d.into())
}

pub fn parity_of(e: &Expression) -> Parity {
    e.parity().homogeneous().expect("homogeneous density")
}

pub fn sign(odd: bool) -> Rational {
    Rational::from_integer(if odd { -1 } else { 1 }.into())
}
