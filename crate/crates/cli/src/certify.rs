use crate::{to_json, CliError, Outcome, OutputFormat, SpecArgs, EXIT_OK};
use clap::Args;
use std::fmt::Write;
use std::path::PathBuf;
use waring_core::hessian::observe_terracini;
use waring_core::linalg::{DEFAULT_PRIME, RETRY_PRIME};
use waring_core::{certify_at_k, certify_descend, rank_info, CertifyOptions, CertifyVerdict, PrimeField, ProblemSpec};

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Test a single rank instead of descending from g-1.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Prime modulus (< 2^63) for the exact computations.
    #[arg(long)]
    pub prime: Option<u64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
    pub format: OutputFormat,
}

pub fn certify_options(prime: Option<u64>) -> Result<CertifyOptions, CliError> {
    let Some(p) = prime else {
        return Ok(CertifyOptions::default());
    };
    PrimeField::new(p)?;
    let retry_prime = if p == RETRY_PRIME { DEFAULT_PRIME } else { RETRY_PRIME };
    Ok(CertifyOptions {
        prime: p,
        retry_prime,
        retry: true,
    })
}

/// One row in the table layout `r,n,degrees,g,k`.
pub fn table_row(spec: &ProblemSpec, g: usize, k: Option<usize>) -> String {
    let ds: Vec<String> = spec.degrees().iter().map(|d| d.to_string()).collect();
    let k = k.map(|k| k.to_string()).unwrap_or_default();
    format!("{},{},{},{},{}\n", spec.r(), spec.n(), ds.join("|"), g, k)
}

pub fn cmd_certify(args: &CertifyArgs) -> Result<Outcome, CliError> {
    let spec = args.spec.to_spec()?;
    let options = certify_options(args.prime)?;
    let info = rank_info(&spec);
    let g = info.generic_rank;
    let mut human = format!("{spec}  N={}  n+r={}\n", spec.ambient_dim(), spec.block_size());

    match args.k {
        Some(0) => Err(CliError::Config("--k must be at least 1".into())),
        Some(k) if k >= g => {
            let obs = observe_terracini(&spec, k, args.seed, &options)?;
            let ranks: Vec<String> = obs.ranks.iter().map(|(p, r)| format!("{r} (p={p})")).collect();
            if obs.defective {
                writeln!(
                    human,
                    "g={g}, terracini-deficient at k={k}: rank {} < {}",
                    ranks.join(", "),
                    obs.expected_dim
                )
                .unwrap();
            } else {
                writeln!(
                    human,
                    "g={g}, k={k} is not sub-generic: terracini rank {} reaches {}; Hessian criterion not applicable",
                    ranks.join(", "),
                    obs.expected_dim
                )
                .unwrap();
            }
            Ok(Outcome {
                human,
                json: to_json(&obs),
                csv: None,
                exit_code: EXIT_OK,
            })
        }
        Some(k) => {
            let cert = certify_at_k(&spec, k, args.seed, &options)?;
            match cert.verdict {
                CertifyVerdict::TerraciniDeficient => writeln!(
                    human,
                    "g={g}, terracini-deficient at k={k}: rank {} < {}",
                    cert.terracini_rank, cert.expected_rank
                ),
                CertifyVerdict::Certified => writeln!(
                    human,
                    "g={g}, certified k={k} (terracini {}/{}, hessian ranks {:?})",
                    cert.terracini_rank, cert.expected_rank, cert.hessian_ranks
                ),
                CertifyVerdict::ContactLocusPositive => writeln!(
                    human,
                    "g={g}, inconclusive at k={k}: contact-locus-positive (hessian ranks {:?}, need {})",
                    cert.hessian_ranks,
                    spec.block_size() - 1
                ),
            }
            .unwrap();
            let certified = cert.verdict.is_certified().then_some(k);
            Ok(Outcome {
                human,
                json: to_json(&cert),
                csv: Some(format!("r,n,degrees,g,k\n{}", table_row(&spec, g, certified))),
                exit_code: EXIT_OK,
            })
        }
        None => {
            let run = certify_descend(&spec, args.seed, &options)?;
            match run.max_certified {
                Some(k) => writeln!(human, "g={g}, certified k={k}").unwrap(),
                None => writeln!(human, "g={g}, no sub-generic k certified (inconclusive)").unwrap(),
            }
            for step in &run.trace {
                writeln!(
                    human,
                    "  k={:<3} {:<22} terracini {}/{}{}",
                    step.k,
                    step.verdict.to_string(),
                    step.terracini_rank,
                    step.expected_rank,
                    if step.retries > 0 { "  (re-checked with second prime)" } else { "" }
                )
                .unwrap();
            }
            Ok(Outcome {
                human,
                json: to_json(&run),
                csv: Some(format!("r,n,degrees,g,k\n{}", table_row(&spec, g, run.max_certified))),
                exit_code: EXIT_OK,
            })
        }
    }
}
