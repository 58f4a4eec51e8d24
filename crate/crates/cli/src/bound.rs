//! `frechet bound`: evaluates one constant, bound or sample size.

use anyhow::{anyhow, Result};
use clap::{Args, ValueEnum};

use frechet::bounds::{
    alpha_constant, empirical_expectation_bound, empirical_tail_bound, expectation_constant,
    iterated_expectation_bound, iterated_tail_bound_cat0, lipschitz_constant,
    riemannian_tail_bound, sample_size_bernstein, sample_size_hoeffding, BoundQuery, FirstTerm,
    RiemannianCase, TailFlavor,
};
use frechet::Error;

use crate::io::significant;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Alpha,
    Lipschitz,
    #[value(name = "A")]
    A,
    EmpiricalExp,
    IteratedExp,
    TailSubgaussian,
    TailHoeffding,
    TailBernstein,
    IteratedTail,
    RiemannianTail,
    MHoeffding,
    MBernstein,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlavorArg {
    Subgaussian,
    Hoeffding,
    Bernstein,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    Unbounded,
    Bounded,
}

#[derive(Args)]
pub struct BoundArgs {
    #[arg(long, value_enum)]
    which: Which,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long = "K2")]
    k2: Option<f64>,
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Diameter for the sample sizes.
    #[arg(long = "D")]
    d: Option<f64>,
    /// Accuracy for the sample sizes.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long = "sigma-tilde2")]
    sigma_tilde2: Option<f64>,
    /// Use `Ã` instead of `A`.
    #[arg(long)]
    heteroskedastic: bool,
    /// Print the Hoeffding and Bernstein bias terms as `Ã σ/√n`.
    #[arg(long)]
    strict_paper: bool,
    /// Flavor of `iterated-tail`.
    #[arg(long, value_enum, default_value = "hoeffding")]
    flavor: FlavorArg,
    /// Case of `riemannian-tail`.
    #[arg(long, value_enum, default_value = "bounded")]
    case: CaseArg,
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("missing required flag --{flag}"))
}

/// Maps missing-field errors from the evaluators to flag names.
fn flagged(e: Error) -> anyhow::Error {
    match e {
        Error::MissingField(f) => anyhow!("missing required flag --{f}"),
        other => other.into(),
    }
}

impl BoundArgs {
    fn query(&self) -> Result<BoundQuery> {
        let mut q = BoundQuery::new(need(self.n, "n")?, need(self.kappa, "kappa")?)
            .heteroskedastic(self.heteroskedastic);
        q.epsilon = self.epsilon;
        q.sigma2 = self.sigma2;
        q.k2 = self.k2;
        q.r = self.r;
        q.delta = self.delta;
        Ok(q)
    }

    /// Epsilon, which only positive curvature needs.
    fn eps_for(&self, kappa: f64) -> Result<f64> {
        if kappa > 0.0 {
            need(self.epsilon, "epsilon")
        } else {
            Ok(self.epsilon.unwrap_or(f64::NAN))
        }
    }

    fn first_term(&self) -> FirstTerm {
        if self.strict_paper {
            FirstTerm::StrictPaper
        } else {
            FirstTerm::Radical
        }
    }
}

pub fn evaluate(a: &BoundArgs) -> Result<String> {
    let value = match a.which {
        Which::Alpha => {
            let k = need(a.kappa, "kappa")?;
            alpha_constant(k, a.eps_for(k)?)?
        }
        Which::Lipschitz => {
            let k = need(a.kappa, "kappa")?;
            lipschitz_constant(k, a.eps_for(k)?)?
        }
        Which::A => {
            let k = need(a.kappa, "kappa")?;
            expectation_constant(k, a.eps_for(k)?, a.heteroskedastic)?
        }
        Which::EmpiricalExp => empirical_expectation_bound(&a.query()?).map_err(flagged)?,
        Which::IteratedExp => iterated_expectation_bound(&a.query()?).map_err(flagged)?,
        Which::TailSubgaussian => {
            empirical_tail_bound(&a.query()?, TailFlavor::SubGaussian, a.first_term()).map_err(flagged)?
        }
        Which::TailHoeffding => {
            empirical_tail_bound(&a.query()?, TailFlavor::Hoeffding, a.first_term()).map_err(flagged)?
        }
        Which::TailBernstein => {
            empirical_tail_bound(&a.query()?, TailFlavor::Bernstein, a.first_term()).map_err(flagged)?
        }
        Which::IteratedTail => {
            let flavor = match a.flavor {
                FlavorArg::Subgaussian => TailFlavor::SubGaussian,
                FlavorArg::Hoeffding => TailFlavor::Hoeffding,
                FlavorArg::Bernstein => TailFlavor::Bernstein,
            };
            iterated_tail_bound_cat0(&a.query()?, flavor).map_err(flagged)?
        }
        Which::RiemannianTail => {
            let case = match a.case {
                CaseArg::Unbounded => RiemannianCase::Unbounded,
                CaseArg::Bounded => RiemannianCase::Bounded,
            };
            riemannian_tail_bound(&a.query()?, case).map_err(flagged)?
        }
        Which::MHoeffding => {
            let m = sample_size_hoeffding(need(a.d, "D")?, need(a.eps, "eps")?, need(a.delta, "delta")?)?;
            return Ok(m.to_string());
        }
        Which::MBernstein => {
            let m = sample_size_bernstein(
                need(a.sigma_tilde2, "sigma-tilde2")?,
                need(a.d, "D")?,
                need(a.eps, "eps")?,
                need(a.delta, "delta")?,
            )?;
            return Ok(m.to_string());
        }
    };
    Ok(significant(value, 12))
}

pub fn cmd_bound(a: &BoundArgs) -> Result<()> {
    println!("{}", evaluate(a)?);
    Ok(())
}
