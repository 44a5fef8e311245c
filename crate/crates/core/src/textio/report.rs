use std::fmt::Write;

use serde_json::{json, Value};

use super::format::{format_latex, format_plain, to_json, OutputFormat};
use crate::expr::Expression;
use crate::schouten::{CheckLevel, TermSide, TraceReport, TraceTerm, Verdict};

fn signed(s: i32) -> &'static str {
    if s < 0 {
        "-1"
    } else {
        "+1"
    }
}

fn level_name(l: CheckLevel) -> &'static str {
    match l {
        CheckLevel::Canonical => "canonical",
        CheckLevel::ModuloDivergence => "modulo divergence",
        CheckLevel::Failed => "FAILED",
    }
}

fn side_name(s: TermSide) -> &'static str {
    match s {
        TermSide::Lhs => "[[F,[[G,H]]]]",
        TermSide::Rhs1 => "[[[[F,G]],H]]",
        TermSide::Rhs2 => "[[G,[[F,H]]]]",
    }
}

fn orders_text(t: &TraceTerm) -> String {
    match &t.orders {
        Some((g, h)) => format!(" orders G{:?} H{:?}", g.as_slice(), h.as_slice()),
        None => String::new(),
    }
}

fn render_terms(out: &mut String, terms: &[TraceTerm], render: &dyn Fn(&Expression) -> String) {
    for t in terms {
        let ledger = t
            .ledger
            .map(|e| format!(" {{{}}} {}", e.index, signed(e.composite)))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "  <{}> δ²{}{}{} [{}]: {}",
            t.label,
            t.second_variation_of,
            ledger,
            orders_text(t),
            t.variations,
            render(&t.density)
        );
    }
}

fn render_text(r: &TraceReport, render: &dyn Fn(&Expression) -> String) -> String {
    let mut out = String::new();
    let [pf, pg, ph] = r.parities;
    let _ = writeln!(
        out,
        "parities |F|={} |G|={} |H|={}; sign of the second bracket {}",
        pf.bit(),
        pg.bit(),
        ph.bit(),
        signed(r.jacobi_sign)
    );
    out.push_str("sign ledger (written * reorder * jacobi = composite)\n");
    for e in &r.ledger {
        let _ = writeln!(
            out,
            "  {{{}}} {} * {} * {} = {}",
            e.index,
            signed(e.written),
            signed(e.reorder),
            signed(e.jacobi),
            signed(e.composite)
        );
    }
    for (side, terms) in [
        (TermSide::Lhs, &r.lhs_terms),
        (TermSide::Rhs1, &r.rhs1_terms),
        (TermSide::Rhs2, &r.rhs2_terms),
    ] {
        let _ = writeln!(out, "{} ({} terms)", side_name(side), terms.len());
        render_terms(&mut out, terms, render);
    }
    out.push_str("matches\n");
    for m in &r.matches {
        let _ = writeln!(
            out,
            "  <{}> lhs = {}: {}",
            m.label,
            side_name(m.rhs_side),
            level_name(m.level)
        );
    }
    out.push_str("cancellations\n");
    for p in &r.cancellations {
        let _ = writeln!(
            out,
            "  <{}> + <{}>: {}",
            p.label,
            p.label,
            level_name(p.level)
        );
    }
    out.push_str("second-variation groups of F\n");
    for g in &r.group_checks {
        let _ = writeln!(
            out,
            "  <{}> {{{}}} F:({},{}) pieces {:?}: rhs1 {}, rhs2 {}",
            g.coarse_label,
            g.ledger_index,
            g.f_variations.0,
            g.f_variations.1,
            g.pieces,
            level_name(g.rhs1),
            level_name(g.rhs2)
        );
    }
    let _ = writeln!(out, "lhs terms sum to [[F,[[G,H]]]]: {}", r.lhs_sum_exact);
    let _ = writeln!(
        out,
        "lhs free of second variations of F: {}",
        r.lhs_free_of_second_variations_of_f
    );
    let _ = writeln!(out, "jacobi defect: {}", level_name(r.defect_level));
    match &r.verdict {
        Verdict::Verified => out.push_str("verdict: verified\n"),
        Verdict::Unresolved { residue } => {
            let _ = writeln!(out, "verdict: unresolved, residue {}", render(residue));
        }
    }
    out
}

fn term_json(t: &TraceTerm) -> Value {
    json!({
        "label": t.label,
        "side": t.side,
        "second_variation_of": t.second_variation_of.to_string(),
        "variations": t.variations,
        "ledger": t.ledger,
        "orders": t.orders.as_ref().map(|(g, h)| json!([g.as_slice(), h.as_slice()])),
        "density": format_plain(&t.density),
        "expression": to_json(&t.density),
    })
}

pub fn trace_json(r: &TraceReport) -> Value {
    let verdict = match &r.verdict {
        Verdict::Verified => json!({ "status": "verified" }),
        Verdict::Unresolved { residue } => {
            json!({ "status": "unresolved", "residue": format_plain(residue) })
        }
    };
    json!({
        "parities": r.parities,
        "jacobi_sign": r.jacobi_sign,
        "ledger": r.ledger,
        "lhs_terms": r.lhs_terms.iter().map(term_json).collect::<Vec<_>>(),
        "rhs1_terms": r.rhs1_terms.iter().map(term_json).collect::<Vec<_>>(),
        "rhs2_terms": r.rhs2_terms.iter().map(term_json).collect::<Vec<_>>(),
        "matches": r.matches.iter().map(|m| json!({
            "label": m.label, "rhs_side": m.rhs_side, "level": m.level,
        })).collect::<Vec<_>>(),
        "cancellation_pairs": r.cancellations.iter().map(|p| json!({
            "labels": [p.label, p.label], "level": p.level,
        })).collect::<Vec<_>>(),
        "group_checks": r.group_checks.iter().map(|g| json!({
            "coarse_label": g.coarse_label,
            "ledger_index": g.ledger_index,
            "f_variations": [g.f_variations.0, g.f_variations.1],
            "pieces": g.pieces,
            "rhs1": g.rhs1,
            "rhs2": g.rhs2,
        })).collect::<Vec<_>>(),
        "lhs_sum_exact": r.lhs_sum_exact,
        "lhs_free_of_second_variations_of_f": r.lhs_free_of_second_variations_of_f,
        "defect": r.defect_level,
        "verdict": verdict,
    })
}

/// Renders a trace report as a table of labels, signs and check results.
pub fn format_trace(r: &TraceReport, style: OutputFormat) -> String {
    match style {
        OutputFormat::Plain => render_text(r, &format_plain),
        OutputFormat::Latex => render_text(r, &format_latex),
        OutputFormat::Json => serde_json::to_string_pretty(&trace_json(r)).expect("json value"),
    }
}
