use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::ledger::{eq1_sign, reorder_sign_ledger, LedgerEntry};
use super::{bracket_poly, coupling, rat, sign_if};
use crate::calculus::{alternating_horner, euler_poly, is_exact, Side};
use crate::error::AlgebraError;
use crate::expr::{Expression, FieldContext, MultiIndex, Owner, Parity, Poly};
use crate::functional::{functional_parity, Functional};

/// How a match or cancellation was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckLevel {
    /// The canonical densities agree term by term.
    Canonical,
    /// The densities differ by a nonzero total divergence.
    ModuloDivergence,
    Failed,
}

impl CheckLevel {
    pub fn holds(self) -> bool {
        self != CheckLevel::Failed
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermSide {
    /// `[[F,[[G,H]]]]`
    Lhs,
    /// `[[[[F,G]],H]]`
    Rhs1,
    /// `(-1)^((|F|-1)(|G|-1)) [[G,[[F,H]]]]`
    Rhs2,
}

/// One labeled summand of the expansion.
#[derive(Clone, Debug)]
pub struct TraceTerm {
    pub side: TermSide,
    pub label: u32,
    pub density: Expression,
    /// Which argument carries the second variation.
    pub second_variation_of: char,
    /// Owners by which `F`, `G` and `H` are varied, in that order. An entry
    /// is a pair for the argument that is varied twice.
    pub variations: String,
    /// For the second right-hand bracket, the row of the reordering ledger
    /// this summand belongs to.
    pub ledger: Option<LedgerEntry>,
    /// Derivative orders `(sigma_G, sigma_H)` of a refined second-variation
    /// piece of `F`.
    pub orders: Option<(MultiIndex, MultiIndex)>,
}

#[derive(Clone, Debug)]
pub struct LabelMatch {
    pub label: u32,
    pub rhs_side: TermSide,
    pub level: CheckLevel,
    pub difference: Expression,
}

/// Second-variation pieces of `F` from the two right-hand brackets that
/// cancel against each other.
#[derive(Clone, Debug)]
pub struct CancellationPair {
    pub label: u32,
    pub level: CheckLevel,
    pub sum: Expression,
}

/// Consistency of the refined pieces with the unrefined summand they come
/// from: both differ only by total divergences.
#[derive(Clone, Debug)]
pub struct GroupCheck {
    pub coarse_label: u32,
    pub ledger_index: u8,
    pub f_variations: (String, String),
    pub pieces: Vec<u32>,
    pub rhs1: CheckLevel,
    pub rhs2: CheckLevel,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Verified,
    Unresolved { residue: Expression },
}

impl Verdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, Verdict::Verified)
    }
}

#[derive(Clone, Debug)]
pub struct TraceReport {
    pub parities: [Parity; 3],
    pub jacobi_sign: i32,
    pub ledger: [LedgerEntry; 8],
    pub lhs_terms: Vec<TraceTerm>,
    pub rhs1_terms: Vec<TraceTerm>,
    pub rhs2_terms: Vec<TraceTerm>,
    pub matches: Vec<LabelMatch>,
    pub cancellations: Vec<CancellationPair>,
    pub group_checks: Vec<GroupCheck>,
    /// The eight left-hand summands add up to `[[F,[[G,H]]]]` exactly.
    pub lhs_sum_exact: bool,
    /// No left-hand summand varies `F` twice.
    pub lhs_free_of_second_variations_of_f: bool,
    pub defect_level: CheckLevel,
    pub verdict: Verdict,
}

struct Ctx<'a> {
    ctx: &'a Arc<FieldContext>,
    dim: usize,
}

impl Ctx<'_> {
    fn parity(&self, w: Owner) -> Parity {
        self.ctx.parity(w)
    }

    fn name(&self, w: Owner) -> &str {
        self.ctx.name(w)
    }

    fn expr(&self, p: Poly) -> Expression {
        Expression::from_poly(self.ctx, p)
    }

    fn level(&self, p: &Poly) -> CheckLevel {
        if p.is_zero() {
            CheckLevel::Canonical
        } else if is_exact(&self.expr(p.clone())) {
            CheckLevel::ModuloDivergence
        } else {
            CheckLevel::Failed
        }
    }

    /// `sum_tau (-D)^tau term(tau)` over the orders of `x` present in `src`.
    fn horner(
        &self,
        src: &Poly,
        x: Owner,
        mut term: impl FnMut(&Poly) -> Poly,
        side: Side,
    ) -> Poly {
        let mut entries = Vec::new();
        for tau in src.orders_of(x) {
            let v = self
                .ctx
                .jet_var(x, tau.as_slice())
                .expect("order from a density");
            let d = match side {
                Side::Left => src.partial_left(&v),
                Side::Right => src.partial_right(&v),
            };
            let t = term(&d);
            if !t.is_zero() {
                entries.push((tau, t));
            }
        }
        alternating_horner(entries, 0, self.dim)
    }

    fn d_pow(&self, p: &Poly, sigma: &MultiIndex) -> Poly {
        let mut p = p.clone();
        for (dir, &k) in sigma.as_slice().iter().enumerate() {
            for _ in 0..k {
                if p.is_zero() {
                    return p;
                }
                p = p.total_derivative(dir);
            }
        }
        p
    }

    fn partial(&self, p: &Poly, w: Owner, sigma: &MultiIndex, side: Side) -> Poly {
        let v = self
            .ctx
            .jet_var(w, sigma.as_slice())
            .expect("order from a density");
        match side {
            Side::Left => p.partial_left(&v),
            Side::Right => p.partial_right(&v),
        }
    }
}

fn anti(w: Owner) -> u32 {
    w.is_antifield() as u32
}

/// Coarse label of a second-variation group of `F`, keyed by the owners
/// paired with `G` and with `H`.
fn group_label(f_g: Owner, f_h: Owner) -> u32 {
    9 + anti(f_g) + 2 * anti(f_h)
}

#[derive(Default)]
struct PieceSlot {
    rhs1: Poly,
    rhs2: Poly,
}

type PieceKey = (u32, usize, usize, MultiIndex, MultiIndex);

/// Expands both sides of the Jacobi identity for `F`, `G`, `H` into labeled
/// summands and checks that they balance term by term.
pub fn expand_trace(
    f: &Functional,
    g: &Functional,
    h: &Functional,
) -> Result<TraceReport, AlgebraError> {
    if !f.density().same_context(g.density()) || !f.density().same_context(h.density()) {
        return Err(AlgebraError::ContextMismatch);
    }
    let pf = functional_parity(f)?;
    let pg = functional_parity(g)?;
    let ph = functional_parity(h)?;
    let c = Ctx {
        ctx: f.context(),
        dim: f.context().dim(),
    };
    let (fp, gp, hp) = (f.density().poly(), g.density().poly(), h.density().poly());
    let owners: Vec<Owner> = c.ctx.owners().collect();
    let euler_of = |p: &Poly, side: Side| -> BTreeMap<Owner, Poly> {
        owners
            .iter()
            .map(|&w| (w, euler_poly(p, w, side, c.dim)))
            .collect()
    };
    let er_f = euler_of(fp, Side::Right);
    let er_g = euler_of(gp, Side::Right);
    let el_g = euler_of(gp, Side::Left);
    let el_h = euler_of(hp, Side::Left);
    let s = eq1_sign(pf, pg);
    let ledger = reorder_sign_ledger(pf, pg);

    // Left-hand side: [[F,K]] with K = [[G,H]]; the variation of K is split
    // over its G and H factors.
    let mut lhs: BTreeMap<u32, (Poly, Vec<String>)> =
        (1..=8).map(|l| (l, Default::default())).collect();
    for &w in &owners {
        let ef = &er_f[&w];
        let u = w.conjugate();
        for &v in &owners {
            let a = &er_g[&v];
            let b = &el_h[&v.conjugate()];
            let k = rat(coupling(w) * coupling(v));
            let base = 1 + 4 * anti(w) + 2 * anti(v);
            let mut g_part = Poly::zero();
            let mut h_part = Poly::zero();
            if !ef.is_zero() && !a.is_zero() && !b.is_zero() {
                g_part = ef.mul(&c.horner(a, u, |d| d.mul(b), Side::Left)).scale(&k);
                let sg = rat(sign_if(c.parity(u).is_odd() && (pg + c.parity(v)).is_odd()));
                h_part = ef
                    .mul(&c.horner(b, u, |d| a.mul(d).scale(&sg), Side::Left))
                    .scale(&k);
            }
            let describe = |twice: &str| format!("F:{} {twice}", c.name(w));
            let slot = lhs.get_mut(&base).unwrap();
            slot.0.add_assign(&g_part);
            slot.1.push(describe(&format!(
                "G:({},{}) H:{}",
                c.name(u),
                c.name(v),
                c.name(v.conjugate())
            )));
            let slot = lhs.get_mut(&(base + 1)).unwrap();
            slot.0.add_assign(&h_part);
            slot.1.push(describe(&format!(
                "G:{} H:({},{})",
                c.name(v),
                c.name(v.conjugate()),
                c.name(u)
            )));
        }
    }
    let lhs_total = bracket_poly(fp, &bracket_poly(gp, hp, c.ctx), c.ctx);
    let mut lhs_sum = Poly::zero();
    for (p, _) in lhs.values() {
        lhs_sum.add_assign(p);
    }
    let lhs_sum_exact = lhs_sum == lhs_total;
    let lhs_terms: Vec<TraceTerm> = lhs
        .into_iter()
        .map(|(label, (p, notes))| TraceTerm {
            side: TermSide::Lhs,
            label,
            density: c.expr(p),
            second_variation_of: if label % 2 == 1 { 'G' } else { 'H' },
            variations: notes.join("; "),
            ledger: None,
            orders: None,
        })
        .collect();

    let mut pieces: BTreeMap<PieceKey, PieceSlot> = BTreeMap::new();
    let mut groups: BTreeMap<(Owner, Owner), (Poly, Poly)> = BTreeMap::new();

    // [[[[F,G]],H]]: outer pairing through v, inner through w.
    let mut rhs1_g: BTreeMap<u32, (Poly, Vec<String>)> = [1, 3, 5, 7]
        .iter()
        .map(|&l| (l, Default::default()))
        .collect();
    for &w in &owners {
        let a_w = &er_f[&w];
        let b_w = &el_g[&w.conjugate()];
        let pb = pg + c.parity(w) + Parity::Odd;
        for &v in &owners {
            let bh = &el_h[&v.conjugate()];
            let k = rat(coupling(v) * coupling(w));
            let label = 1 + 4 * anti(w) + 2 * anti(v);
            let slot = rhs1_g.get_mut(&label).unwrap();
            slot.1.push(format!(
                "F:{} G:({},{}) H:{}",
                c.name(w),
                c.name(w.conjugate()),
                c.name(v),
                c.name(v.conjugate())
            ));
            if a_w.is_zero() || b_w.is_zero() || bh.is_zero() {
                continue;
            }
            let g_part = c
                .horner(b_w, v, |d| a_w.mul(d), Side::Right)
                .mul(bh)
                .scale(&k);
            slot.0.add_assign(&g_part);

            let sv = rat(sign_if(c.parity(v).is_odd() && pb.is_odd()));
            let f_group = c
                .horner(a_w, v, |d| d.mul(b_w).scale(&sv), Side::Right)
                .mul(bh)
                .scale(&k);
            groups.entry((w, v)).or_default().0.add_assign(&f_group);

            let pbh = ph + c.parity(v) + Parity::Odd;
            let sp =
                rat(sign_if(c.parity(v).is_odd() && pb.is_odd())
                    * sign_if(pb.is_odd() && pbh.is_odd()));
            for sigma in fp.orders_of(w) {
                let f_s = c.partial(fp, w, &sigma, Side::Right);
                for tau in f_s.orders_of(v) {
                    let second = c.partial(&f_s, v, &tau, Side::Right);
                    let piece = second
                        .mul(&c.d_pow(bh, &tau))
                        .mul(&c.d_pow(b_w, &sigma))
                        .scale(&k)
                        .scale(&sp);
                    let key = (
                        group_label(w, v),
                        w.field_index(),
                        v.field_index(),
                        sigma.clone(),
                        tau,
                    );
                    pieces.entry(key).or_default().rhs1.add_assign(&piece);
                }
            }
        }
    }

    // (-1)^(...) [[G,[[F,H]]]]: outer pairing through u, inner through v.
    let mut rhs2_h: BTreeMap<u32, (Poly, Vec<String>, u8)> = BTreeMap::new();
    for &u in &owners {
        let a_u = &er_g[&u];
        let x = u.conjugate();
        for &v in &owners {
            let af = &er_f[&v];
            let bh = &el_h[&v.conjugate()];
            let k = rat(s * coupling(u) * coupling(v));
            let label = 2 + 4 * anti(v) + 2 * anti(u);
            let ledger_h = (2 + 4 * anti(u) + 2 * anti(v)) as u8;
            let slot = rhs2_h
                .entry(label)
                .or_insert_with(|| (Poly::zero(), Vec::new(), ledger_h));
            slot.1.push(format!(
                "F:{} G:{} H:({},{})",
                c.name(v),
                c.name(u),
                c.name(v.conjugate()),
                c.name(x)
            ));
            if a_u.is_zero() || af.is_zero() || bh.is_zero() {
                continue;
            }
            let sx = rat(sign_if(c.parity(x).is_odd() && (pf + c.parity(v)).is_odd()));
            let h_part = a_u
                .mul(&c.horner(bh, x, |d| af.mul(d).scale(&sx), Side::Left))
                .scale(&k);
            slot.0.add_assign(&h_part);

            let f_group = a_u
                .mul(&c.horner(af, x, |d| d.mul(bh), Side::Left))
                .scale(&k);
            groups.entry((x, v)).or_default().1.add_assign(&f_group);

            for sigma in fp.orders_of(v) {
                let f_s = c.partial(fp, v, &sigma, Side::Right);
                for tau in f_s.orders_of(x) {
                    let second = c.partial(&f_s, x, &tau, Side::Left);
                    let piece = c
                        .d_pow(a_u, &tau)
                        .mul(&second)
                        .mul(&c.d_pow(bh, &sigma))
                        .scale(&k);
                    let key = (
                        group_label(x, v),
                        x.field_index(),
                        v.field_index(),
                        tau,
                        sigma.clone(),
                    );
                    pieces.entry(key).or_default().rhs2.add_assign(&piece);
                }
            }
        }
    }

    // Number the nonzero pieces from 9 in key order.
    let mut rhs1_terms: Vec<TraceTerm> = rhs1_g
        .into_iter()
        .map(|(label, (p, notes))| TraceTerm {
            side: TermSide::Rhs1,
            label,
            density: c.expr(p),
            second_variation_of: 'G',
            variations: notes.join("; "),
            ledger: None,
            orders: None,
        })
        .collect();
    let mut rhs2_terms: Vec<TraceTerm> = rhs2_h
        .into_iter()
        .map(|(label, (p, notes, li))| TraceTerm {
            side: TermSide::Rhs2,
            label,
            density: c.expr(p),
            second_variation_of: 'H',
            variations: notes.join("; "),
            ledger: Some(ledger[li as usize - 1]),
            orders: None,
        })
        .collect();

    let owner_of = |kind: u32, index: usize, for_h: bool| -> Owner {
        let is_anti = if for_h {
            (kind - 9) & 2 != 0
        } else {
            (kind - 9) & 1 != 0
        };
        if is_anti {
            Owner::antifield(index)
        } else {
            Owner::field(index)
        }
    };
    let mut cancellations = Vec::new();
    let mut piece_labels: BTreeMap<(Owner, Owner), Vec<u32>> = BTreeMap::new();
    let mut piece_sums: BTreeMap<(Owner, Owner), (Poly, Poly)> = BTreeMap::new();
    let mut next = 9;
    for ((kind, gi, hi, sigma_g, sigma_h), slot) in pieces {
        if slot.rhs1.is_zero() && slot.rhs2.is_zero() {
            continue;
        }
        let f_g = owner_of(kind, gi, false);
        let f_h = owner_of(kind, hi, true);
        let label = next;
        next += 1;
        piece_labels.entry((f_g, f_h)).or_default().push(label);
        let sums = piece_sums.entry((f_g, f_h)).or_default();
        sums.0.add_assign(&slot.rhs1);
        sums.1.add_assign(&slot.rhs2);
        let variations = format!(
            "F:({},{}) G:{} H:{}",
            c.name(f_g),
            c.name(f_h),
            c.name(f_g.conjugate()),
            c.name(f_h.conjugate())
        );
        let u = f_g.conjugate();
        let ledger_f = (1 + 4 * anti(u) + 2 * anti(f_h)) as u8;
        let sum = slot.rhs1.add(&slot.rhs2);
        cancellations.push(CancellationPair {
            label,
            level: c.level(&sum),
            sum: c.expr(sum),
        });
        rhs1_terms.push(TraceTerm {
            side: TermSide::Rhs1,
            label,
            density: c.expr(slot.rhs1),
            second_variation_of: 'F',
            variations: variations.clone(),
            ledger: None,
            orders: Some((sigma_g.clone(), sigma_h.clone())),
        });
        rhs2_terms.push(TraceTerm {
            side: TermSide::Rhs2,
            label,
            density: c.expr(slot.rhs2),
            second_variation_of: 'F',
            variations,
            ledger: Some(ledger[ledger_f as usize - 1]),
            orders: Some((sigma_g, sigma_h)),
        });
    }

    let mut group_checks = Vec::new();
    for ((f_g, f_h), (coarse1, coarse2)) in groups {
        let (sum1, sum2) = piece_sums.remove(&(f_g, f_h)).unwrap_or_default();
        let u = f_g.conjugate();
        group_checks.push(GroupCheck {
            coarse_label: group_label(f_g, f_h),
            ledger_index: (1 + 4 * anti(u) + 2 * anti(f_h)) as u8,
            f_variations: (c.name(f_g).to_string(), c.name(f_h).to_string()),
            pieces: piece_labels.remove(&(f_g, f_h)).unwrap_or_default(),
            rhs1: c.level(&coarse1.sub(&sum1)),
            rhs2: c.level(&coarse2.sub(&sum2)),
        });
    }
    // Pieces whose coarse group vanished identically still have to add up
    // to nothing.
    for ((f_g, f_h), (sum1, sum2)) in piece_sums {
        let u = f_g.conjugate();
        group_checks.push(GroupCheck {
            coarse_label: group_label(f_g, f_h),
            ledger_index: (1 + 4 * anti(u) + 2 * anti(f_h)) as u8,
            f_variations: (c.name(f_g).to_string(), c.name(f_h).to_string()),
            pieces: piece_labels.remove(&(f_g, f_h)).unwrap_or_default(),
            rhs1: c.level(&sum1),
            rhs2: c.level(&sum2),
        });
    }
    group_checks.sort_by_key(|g| (g.coarse_label, g.pieces.first().copied()));

    let mut matches = Vec::new();
    for lt in &lhs_terms {
        let (side, pool) = if lt.label % 2 == 1 {
            (TermSide::Rhs1, &rhs1_terms)
        } else {
            (TermSide::Rhs2, &rhs2_terms)
        };
        let rt = pool
            .iter()
            .find(|t| t.label == lt.label)
            .expect("every low label exists");
        let diff = lt.density.poly().sub(rt.density.poly());
        matches.push(LabelMatch {
            label: lt.label,
            rhs_side: side,
            level: c.level(&diff),
            difference: c.expr(diff),
        });
    }

    let full_defect = {
        let fg = bracket_poly(fp, gp, c.ctx);
        let fh = bracket_poly(fp, hp, c.ctx);
        let mut d = lhs_total.sub(&bracket_poly(&fg, hp, c.ctx));
        d.add_scaled(&bracket_poly(gp, &fh, c.ctx), &rat(-s));
        d
    };
    let defect_level = c.level(&full_defect);

    let lhs_free = lhs_terms.iter().all(|t| t.second_variation_of != 'F');
    let all_hold = lhs_sum_exact
        && matches.iter().all(|m| m.level.holds())
        && cancellations.iter().all(|p| p.level.holds())
        && group_checks
            .iter()
            .all(|g| g.rhs1.holds() && g.rhs2.holds());
    let verdict = if all_hold {
        Verdict::Verified
    } else {
        let mut residue = Poly::zero();
        for m in matches.iter().filter(|m| !m.level.holds()) {
            residue.add_assign(m.difference.poly());
        }
        for p in cancellations.iter().filter(|p| !p.level.holds()) {
            residue.add_assign(p.sum.poly());
        }
        if residue.is_zero() {
            residue = full_defect.clone();
        }
        Verdict::Unresolved {
            residue: c.expr(residue),
        }
    };

    Ok(TraceReport {
        parities: [pf, pg, ph],
        jacobi_sign: s,
        ledger,
        lhs_terms,
        rhs1_terms,
        rhs2_terms,
        matches,
        cancellations,
        group_checks,
        lhs_sum_exact,
        lhs_free_of_second_variations_of_f: lhs_free,
        defect_level,
        verdict,
    })
}
