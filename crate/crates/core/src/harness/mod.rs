//! Seeded random densities and the Jacobi fuzz runner.

use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calculus::is_exact;
use crate::expr::{Expression, FieldContext, FuncKind, Parity, ParityOf};
use crate::functional::{functional_parity, Functional};
use crate::schouten::{bracket_parity, eq1_sign, graded_symmetry_defect, schouten_bracket};
use crate::textio::{format_plain, parse_context, ParseError};
use crate::{AlgebraError, Rational};

/// Exit status for a verified identity.
pub const EXIT_OK: i32 = 0;
/// Exit status for a nonzero defect or an unresolved trace.
pub const EXIT_DEFECT: i32 = 1;
/// Exit status for usage and parse errors.
pub const EXIT_USAGE: i32 = 2;

/// Environment variable that overrides the fuzz seed.
pub const SEED_ENV: &str = "VARSCHOUTEN_SEED";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Context {
        path: String,
        #[source]
        source: ParseError,
    },
    #[error("invalid fuzz parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Reads a context file; see [`crate::textio::parse_context`] for the format.
pub fn load_context(path: &Path) -> Result<Arc<FieldContext>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let spec = parse_context(&text).map_err(|source| HarnessError::Context {
        path: path.display().to_string(),
        source,
    })?;
    Ok(spec.build()?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParityTarget {
    Even,
    Odd,
    /// Each generated functional gets a random parity; it is still
    /// homogeneous.
    Any,
}

impl std::str::FromStr for ParityTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "even" => Ok(ParityTarget::Even),
            "odd" => Ok(ParityTarget::Odd),
            "any" => Ok(ParityTarget::Any),
            other => Err(format!(
                "parity target must be even, odd or any, got `{other}`"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzParams {
    pub seed: u64,
    pub count: usize,
    pub max_jet_order: u16,
    pub max_degree: u32,
    pub max_monomials: usize,
    pub allow_funcs: bool,
    pub parity_target: ParityTarget,
}

impl Default for FuzzParams {
    fn default() -> Self {
        FuzzParams {
            seed: 42,
            count: 100,
            max_jet_order: 2,
            max_degree: 3,
            max_monomials: 4,
            allow_funcs: true,
            parity_target: ParityTarget::Any,
        }
    }
}

impl FuzzParams {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.count == 0 || self.max_degree == 0 || self.max_monomials == 0 {
            return Err(HarnessError::Params(
                "count, max_degree and max_monomials must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn random_order(rng: &mut ChaCha8Rng, dim: usize, max_total: u16) -> Vec<u16> {
    let mut order = vec![0u16; dim];
    let total = rng.gen_range(0..=max_total);
    for _ in 0..total {
        order[rng.gen_range(0..dim)] += 1;
    }
    order
}

fn random_jet(
    rng: &mut ChaCha8Rng,
    ctx: &Arc<FieldContext>,
    parity: Option<Parity>,
    max_order: u16,
) -> Expression {
    let owners: Vec<_> = ctx
        .owners()
        .filter(|&w| parity.is_none_or(|p| ctx.parity(w) == p))
        .collect();
    let owner = *owners
        .choose(rng)
        .expect("every context has owners of both parities");
    let order = random_order(rng, ctx.dim(), max_order);
    Expression::jet(ctx, owner, &order).expect("order has context length")
}

fn random_coeff(rng: &mut ChaCha8Rng) -> Rational {
    let num: i64 = rng.gen_range(1..=5) * if rng.gen_bool(0.5) { 1 } else { -1 };
    let den: i64 = rng.gen_range(1..=3);
    Rational::new(num.into(), den.into())
}

fn random_monomial(
    rng: &mut ChaCha8Rng,
    params: &FuzzParams,
    ctx: &Arc<FieldContext>,
    parity: Parity,
) -> Expression {
    for _ in 0..16 {
        let degree = rng.gen_range(1..=params.max_degree);
        let mut factors: Vec<(Expression, Parity)> = (0..degree)
            .map(|_| {
                let p = if rng.gen_bool(0.5) {
                    Parity::Odd
                } else {
                    Parity::Even
                };
                (random_jet(rng, ctx, Some(p), params.max_jet_order), p)
            })
            .collect();
        let current = factors.iter().fold(Parity::Even, |acc, (_, p)| acc + *p);
        if current != parity {
            let last = factors.last_mut().expect("degree is positive");
            let flipped = last.1.flip();
            *last = (
                random_jet(rng, ctx, Some(flipped), params.max_jet_order),
                flipped,
            );
        }
        let mut m = Expression::constant(ctx, random_coeff(rng));
        for (f, _) in &factors {
            m = &m * f;
        }
        if params.allow_funcs && rng.gen_bool(0.5) {
            let kind = *[FuncKind::Exp, FuncKind::Sin, FuncKind::Cos]
                .choose(rng)
                .unwrap();
            let arg = random_jet(rng, ctx, Some(Parity::Even), params.max_jet_order);
            m = &m * &Expression::func(kind, &arg).expect("even jet argument");
        }
        if !m.is_zero() {
            return m;
        }
    }
    Expression::zero(ctx)
}

/// The `index`-th random functional for these parameters. The result only
/// depends on `(params, index)`.
pub fn random_functional(params: &FuzzParams, ctx: &Arc<FieldContext>, index: u64) -> Functional {
    let mut rng = rng_for(params.seed, index);
    let parity = match params.parity_target {
        ParityTarget::Even => Parity::Even,
        ParityTarget::Odd => Parity::Odd,
        ParityTarget::Any => {
            if rng.gen_bool(0.5) {
                Parity::Odd
            } else {
                Parity::Even
            }
        }
    };
    let count = rng.gen_range(1..=params.max_monomials);
    let mut density = Expression::zero(ctx);
    for _ in 0..count {
        density = &density + &random_monomial(&mut rng, params, ctx, parity);
    }
    Functional::new(density)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialFailure {
    pub index: usize,
    pub seed: u64,
    pub densities: [String; 3],
    pub residue: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FuzzReport {
    pub trials: usize,
    pub verified: usize,
    pub degenerate: usize,
    pub failures: Vec<TrialFailure>,
}

impl FuzzReport {
    pub fn all_verified(&self) -> bool {
        self.verified == self.trials
    }

    pub fn to_plain(&self) -> String {
        let mut out = format!("{}/{} verified\n", self.verified, self.trials);
        out.push_str(&format!(
            "{} degenerate (all brackets zero)\n",
            self.degenerate
        ));
        for f in &self.failures {
            out.push_str(&format!(
                "trial {} failed: F = {}, G = {}, H = {}; residue {}\n",
                f.index, f.densities[0], f.densities[1], f.densities[2], f.residue
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Outcome of one Jacobi trial.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub index: usize,
    pub functionals: [Functional; 3],
    pub degenerate: bool,
    /// First failing density, if any.
    pub residue: Option<Expression>,
}

/// The random triple used by trial `index`.
pub fn trial_triple(params: &FuzzParams, ctx: &Arc<FieldContext>, index: usize) -> [Functional; 3] {
    let base = 3 * index as u64;
    [0, 1, 2].map(|k| random_functional(params, ctx, base + k))
}

fn check_pair(a: &Functional, b: &Functional) -> Result<Option<Expression>, AlgebraError> {
    let ab = schouten_bracket(a, b)?.value;
    if !ab.is_trivially_zero() {
        let expected = bracket_parity(functional_parity(a)?, functional_parity(b)?);
        if ab.density().parity() != ParityOf::Homogeneous(expected) {
            return Ok(Some(ab.into_density()));
        }
    }
    let sym = graded_symmetry_defect(a, b)?;
    Ok((!is_exact(sym.density())).then(|| sym.into_density()))
}

/// Checks the Jacobi identity, graded antisymmetry and the shifted grading
/// on one triple.
pub fn run_trial(
    params: &FuzzParams,
    ctx: &Arc<FieldContext>,
    index: usize,
) -> Result<TrialOutcome, AlgebraError> {
    let [f, g, h] = trial_triple(params, ctx, index);
    let (pf, pg) = (functional_parity(&f)?, functional_parity(&g)?);
    let gh = schouten_bracket(&g, &h)?.value;
    let fg = schouten_bracket(&f, &g)?.value;
    let fh = schouten_bracket(&f, &h)?.value;
    let lhs = schouten_bracket(&f, &gh)?.value;
    let rhs1 = schouten_bracket(&fg, &h)?.value;
    let rhs2 = schouten_bracket(&g, &fh)?.value;
    let degenerate = [&gh, &fg, &fh, &lhs, &rhs1, &rhs2]
        .iter()
        .all(|b| b.is_trivially_zero());
    let s = Rational::from_integer(eq1_sign(pf, pg).into());
    let defect = lhs
        .density()
        .checked_sub(rhs1.density())?
        .checked_sub(&rhs2.density().scale(&s))?;
    let mut residue = (!is_exact(&defect)).then_some(defect);
    for (a, b) in [(&f, &g), (&g, &h), (&f, &h)] {
        if residue.is_none() {
            residue = check_pair(a, b)?;
        }
    }
    Ok(TrialOutcome {
        index,
        functionals: [f, g, h],
        degenerate,
        residue,
    })
}

/// Runs `params.count` trials in parallel and aggregates them in index
/// order, so the report is identical across runs.
pub fn run_fuzz(params: &FuzzParams, ctx: &Arc<FieldContext>) -> Result<FuzzReport, HarnessError> {
    params.validate()?;
    let mut outcomes = (0..params.count)
        .into_par_iter()
        .map(|i| run_trial(params, ctx, i))
        .collect::<Result<Vec<_>, _>>()?;
    outcomes.sort_by_key(|o| o.index);
    let mut report = FuzzReport {
        trials: outcomes.len(),
        verified: 0,
        degenerate: 0,
        failures: Vec::new(),
    };
    for o in outcomes {
        match o.residue {
            None => {
                report.verified += 1;
                if o.degenerate {
                    report.degenerate += 1;
                }
            }
            Some(r) => report.failures.push(TrialFailure {
                index: o.index,
                seed: params.seed,
                densities: o.functionals.map(|f| format_plain(f.density())),
                residue: format_plain(&r),
            }),
        }
    }
    Ok(report)
}
