use std::collections::HashMap;
use std::fmt::Write;

use num_traits::{One, Signed};
use serde_json::{json, Map, Value};

use crate::expr::{Expression, FieldContext, FuncKind, JetVar, Monomial, Poly};
use crate::Rational;

/// Output rendering for expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OutputFormat {
    Plain,
    Latex,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(OutputFormat::Plain),
            "latex" => Ok(OutputFormat::Latex),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!(
                "unknown format `{other}` (expected plain, latex or json)"
            )),
        }
    }
}

pub fn format(e: &Expression, style: OutputFormat) -> String {
    match style {
        OutputFormat::Plain => format_plain(e),
        OutputFormat::Latex => format_latex(e),
        OutputFormat::Json => serde_json::to_string(&to_json(e)).expect("json value"),
    }
}

pub fn format_plain(e: &Expression) -> String {
    plain_poly(e.poly(), e.context())
}

fn plain_var(v: &JetVar, ctx: &FieldContext) -> String {
    let name = ctx.name(v.owner());
    let order = v.order();
    if order.is_zero() {
        name.to_string()
    } else {
        let parts: Vec<String> = order.as_slice().iter().map(|k| k.to_string()).collect();
        format!("{name}[{}]", parts.join(","))
    }
}

fn plain_factors(m: &Monomial, ctx: &FieldContext) -> Vec<String> {
    let mut out = Vec::new();
    for (v, k) in m.even_part() {
        let s = plain_var(v, ctx);
        out.push(if *k == 1 { s } else { format!("{s}^{k}") });
    }
    for f in m.func_part() {
        let s = format!("{}({})", f.kind.name(), plain_poly(f.arg.poly(), ctx));
        out.push(if f.power == 1 {
            s
        } else {
            format!("{s}^{}", f.power)
        });
    }
    for v in m.odd_part() {
        out.push(plain_var(v, ctx));
    }
    out
}

fn plain_poly(p: &Poly, ctx: &FieldContext) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (m, c)) in p.terms().enumerate() {
        let negative = c.is_negative();
        match (i, negative) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        let abs = c.abs();
        let mut factors = plain_factors(m, ctx);
        if !abs.is_one() || factors.is_empty() {
            factors.insert(0, abs.to_string());
        }
        s.push_str(&factors.join("*"));
    }
    s
}

fn latex_name(v: &JetVar, ctx: &FieldContext) -> String {
    let owner = v.owner();
    let base = if owner.is_antifield() {
        format!("{}^{{\\dagger}}", ctx.name(owner.conjugate()))
    } else {
        ctx.name(owner).to_string()
    };
    if v.order().is_zero() {
        return base;
    }
    let mut sub = String::new();
    for (dir, &k) in v.order().as_slice().iter().enumerate() {
        let x = &ctx.independent_vars()[dir];
        if k <= 3 {
            for _ in 0..k {
                sub.push_str(x);
            }
        } else if k > 0 {
            let _ = write!(sub, "{x}^{{{k}}}");
        }
    }
    format!("{base}_{{{sub}}}")
}

fn latex_factors(m: &Monomial, ctx: &FieldContext) -> Vec<String> {
    let mut out = Vec::new();
    for (v, k) in m.even_part() {
        let s = latex_name(v, ctx);
        out.push(if *k == 1 {
            s
        } else {
            format!("{{{s}}}^{{{k}}}")
        });
    }
    for f in m.func_part() {
        let arg = latex_poly(f.arg.poly(), ctx);
        let s = match (f.kind, f.power) {
            (FuncKind::Exp, 1) => format!("e^{{{arg}}}"),
            (FuncKind::Exp, k) => format!("e^{{{k}\\left({arg}\\right)}}"),
            (kind, 1) => format!("\\{}\\left({arg}\\right)", kind.name()),
            (kind, k) => format!("\\{}^{{{k}}}\\left({arg}\\right)", kind.name()),
        };
        out.push(s);
    }
    for v in m.odd_part() {
        out.push(latex_name(v, ctx));
    }
    out
}

fn latex_rational(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom())
    }
}

fn latex_poly(p: &Poly, ctx: &FieldContext) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (m, c)) in p.terms().enumerate() {
        let negative = c.is_negative();
        match (i, negative) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        let abs = c.abs();
        let mut factors = latex_factors(m, ctx);
        if !abs.is_one() || factors.is_empty() {
            factors.insert(0, latex_rational(&abs));
        }
        s.push_str(&factors.join(" "));
    }
    s
}

pub fn format_latex(e: &Expression) -> String {
    latex_poly(e.poly(), e.context())
}

fn json_var(v: &JetVar, ctx: &FieldContext) -> String {
    let parts: Vec<String> = v.order().as_slice().iter().map(|k| k.to_string()).collect();
    format!("{}[{}]", ctx.name(v.owner()), parts.join(","))
}

struct ArgTable<'a> {
    ctx: &'a FieldContext,
    ids: HashMap<*const Poly, String>,
    entries: Map<String, Value>,
}

impl ArgTable<'_> {
    fn monomials(&mut self, p: &Poly) -> Value {
        let mut list = Vec::new();
        for (m, c) in p.terms() {
            let even: Vec<Value> = m
                .even_part()
                .iter()
                .map(|(v, k)| json!([json_var(v, self.ctx), k]))
                .collect();
            let funcs: Vec<Value> = m
                .func_part()
                .iter()
                .map(|f| json!([f.kind.name(), self.reference(f.arg.poly()), f.power]))
                .collect();
            let odd: Vec<Value> = m
                .odd_part()
                .iter()
                .map(|v| json!(json_var(v, self.ctx)))
                .collect();
            list.push(json!({
                "coeff": format!("{}/{}", c.numer(), c.denom()),
                "even": even,
                "funcs": funcs,
                "odd": odd,
            }));
        }
        Value::Array(list)
    }

    fn reference(&mut self, arg: &Poly) -> String {
        let key = arg as *const Poly;
        if let Some(id) = self.ids.get(&key) {
            return id.clone();
        }
        // Structurally equal arguments that were not shared still get one id.
        if let Some(existing) = self
            .ids
            .iter()
            .find(|(ptr, _)| unsafe_eq(**ptr, arg))
            .map(|(_, id)| id.clone())
        {
            return existing;
        }
        let id = format!("a{}", self.ids.len());
        self.ids.insert(key, id.clone());
        let body = self.monomials(arg);
        self.entries
            .insert(id.clone(), json!({ "monomials": body }));
        id
    }
}

fn unsafe_eq(ptr: *const Poly, arg: &Poly) -> bool {
    // Every key points into an argument reachable from the expression being
    // rendered, which outlives the table.
    unsafe { &*ptr == arg }
}

/// Machine-readable form: monomials plus a table of function arguments
/// referenced by id. Ids are assigned in canonical traversal order.
pub fn to_json(e: &Expression) -> Value {
    let mut table = ArgTable {
        ctx: e.context(),
        ids: HashMap::new(),
        entries: Map::new(),
    };
    let monomials = table.monomials(e.poly());
    json!({ "monomials": monomials, "args": Value::Object(table.entries) })
}
