mod common;

use std::path::PathBuf;
use std::sync::Arc;

use common::*;
use varschouten::expr::FuncKind;
use varschouten::harness::{random_functional, ParityTarget};
use varschouten::textio::{format_latex, format_plain, to_json, ParseErrorKind};
use varschouten::{
    format, parse_context, parse_density, schouten_bracket, Expression, FieldContext, OutputFormat,
};

fn nested(ctx: &Arc<FieldContext>, seed: u64, i: u64) -> Expression {
    let base = random_density(ctx, seed, i, ParityTarget::Any);
    let (arg, _) = base.split_by_parity();
    let kind = [FuncKind::Exp, FuncKind::Sin, FuncKind::Cos][i as usize % 3];
    match Expression::func(kind, &arg) {
        Ok(inner) => {
            let outer =
                Expression::func(FuncKind::Sin, &(&inner * &arg)).unwrap_or_else(|_| inner.clone());
            &(&base * &outer) + &inner.pow(2)
        }
        Err(_) => base,
    }
}

#[test]
fn plain_output_round_trips() {
    let mut checked = 0;
    for ctx in [single_field_ctx(), two_field_ctx()] {
        for i in 0..250 {
            let e = if i % 2 == 0 {
                random_density(&ctx, 61, i, ParityTarget::Any)
            } else {
                nested(&ctx, 62, i)
            };
            let text = format_plain(&e);
            let back = parse_density(&text, &ctx).unwrap_or_else(|err| panic!("{text}: {err}"));
            assert_eq!(back, e, "{text}");
            checked += 1;
        }
    }
    assert_eq!(checked, 500);
}

#[test]
fn json_is_deterministic() {
    let ctx = single_field_ctx();
    for i in 0..100 {
        let e = nested(&ctx, 63, i);
        let rebuilt = parse_density(&format_plain(&e), &ctx).unwrap();
        assert_eq!(to_json(&e).to_string(), to_json(&rebuilt).to_string());
        assert_eq!(
            format(&e, OutputFormat::Json),
            format(&e, OutputFormat::Json)
        );
    }
    let a = parse_density("q[1]*p + exp(q)*p[2] - 1/2*q*q*p", &ctx).unwrap();
    let b = parse_density("-(1/2)*p*q^2 + p[2]*exp(q) + p*q[1]", &ctx).unwrap();
    assert_eq!(to_json(&a), to_json(&b));
}

#[test]
fn json_schema_shape() {
    let ctx = single_field_ctx();
    let e = parse_density("-3/2*p[1]*q^2*exp(q[1])", &ctx).unwrap();
    let v = to_json(&e);
    let m = &v["monomials"][0];
    assert_eq!(m["coeff"], "-3/2");
    assert_eq!(m["even"][0][0], "q[0]");
    assert_eq!(m["even"][0][1], 2);
    assert_eq!(m["funcs"][0][0], "exp");
    assert_eq!(m["odd"][0], "p[1]");
    let arg = m["funcs"][0][1].as_str().unwrap();
    assert!(v["args"][arg].is_object());
}

#[test]
fn samples_render() {
    let ctx = single_field_ctx();
    let f = parse_density("p * q * q[2]", &ctx).unwrap();
    assert_eq!(parse_density(&format_plain(&f), &ctx).unwrap(), f);
    assert_eq!(format_plain(&Expression::zero(&ctx)), "0");
    let g = fun(&ctx, "p[1]*exp(q[1])");
    let h = fun(&ctx, "p[2]*cos(q)");
    let gh = schouten_bracket(&g, &h).unwrap().value;
    let tex = format_latex(gh.density());
    assert!(tex.contains("e^{q_{x}}"), "{tex}");
    assert!(tex.contains("\\cos"), "{tex}");
    assert!(format_latex(&f).contains("q^{\\dagger}"));
}

#[test]
fn parse_errors_are_specific() {
    let ctx = single_field_ctx();
    let kind = |s: &str| parse_density(s, &ctx).unwrap_err().kind;
    assert_eq!(kind("q * x"), ParseErrorKind::BaseCoordinate("x".into()));
    assert_eq!(kind("q * r"), ParseErrorKind::UnknownIdentifier("r".into()));
    assert_eq!(kind("q $ p"), ParseErrorKind::Lex('$'));
    assert!(matches!(
        kind("q[1,2]"),
        ParseErrorKind::MalformedMultiIndex(_)
    ));
    assert!(matches!(
        kind("q[]"),
        ParseErrorKind::MalformedMultiIndex(_)
    ));
    assert!(matches!(kind("exp(p)"), ParseErrorKind::Algebra(_)));
    assert_eq!(kind("3/0*q"), ParseErrorKind::ZeroDenominator);
    assert_eq!(kind("q^0"), ParseErrorKind::BadExponent);
    assert!(matches!(kind("q q"), ParseErrorKind::Unexpected { .. }));
    assert!(matches!(kind("(q"), ParseErrorKind::Unexpected { .. }));
    let err = parse_density("q +\n  x", &ctx).unwrap_err();
    assert_eq!((err.line, err.column), (2, 3));
}

#[test]
fn multi_index_and_context_files() {
    let spec = parse_context(
        "# two fields\nindep x y\nfield u odd antifield a\n\nfield v even antifield b\n",
    )
    .unwrap();
    let ctx = spec.build().unwrap();
    let e = parse_density("a[1,0]*u*v[0,2] - sin(v[1,1])", &ctx).unwrap();
    assert_eq!(parse_density(&format_plain(&e), &ctx).unwrap(), e);
    assert_eq!(parse_context(&spec.to_text()).unwrap(), spec);
    assert!(parse_context("field q heavy antifield p").is_err());
}

#[test]
fn pinned_odd_sample() {
    let ctx = single_field_ctx();
    let f = random_functional(&params(1, ParityTarget::Odd), &ctx, 0);
    assert_eq!(parity_of(f.density()), varschouten::Parity::Odd);
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/seed1_odd.txt");
    let got = format_plain(f.density()) + "\n";
    if std::env::var_os("BLESS").is_some() {
        std::fs::write(&path, &got).unwrap();
    }
    assert_eq!(std::fs::read_to_string(&path).unwrap(), got);
    assert_eq!(
        random_functional(&params(1, ParityTarget::Odd), &ctx, 0).density(),
        f.density()
    );
}
