use anyon_circle::campaign::{self, Campaign, Case, CaseKind, CaseOutcome, Params};
use anyon_circle::Error;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "anyon-circle", version, about = "Verification harness for anyon fields on the covering of the circle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Directory for the case CSV; nothing is written when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FieldArgs {
    #[arg(long)]
    spin: f64,
    #[arg(long)]
    omega1: f64,
    #[arg(long, default_value_t = 0.0)]
    omega2: f64,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, default_value = "4,6,8,10")]
    cutoffs: String,
    /// fock or quasi-free
    #[arg(long, default_value = "quasi-free")]
    route: String,
    #[arg(long)]
    positive_lambda: bool,
    /// Largest unresolved blip coefficient accepted; unbounded by default for convergence studies.
    #[arg(long, default_value_t = f64::INFINITY)]
    tail_tolerance: f64,
    #[arg(long, default_value_t = 0.1)]
    threshold_factor: f64,
}

impl FieldArgs {
    fn params(&self) -> Vec<(&'static str, String)> {
        vec![
            ("spin", self.spin.to_string()),
            ("omega1", self.omega1.to_string()),
            ("omega2", self.omega2.to_string()),
            ("epsilon", self.eps.to_string()),
            ("cutoffs", self.cutoffs.clone()),
            ("route", self.route.clone()),
            ("positive_lambda", self.positive_lambda.to_string()),
            ("tail_tolerance", self.tail_tolerance.to_string()),
            ("threshold_factor", self.threshold_factor.to_string()),
        ]
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fourier coefficients and derivative of the smeared sawtooth.
    #[command(allow_negative_numbers = true)]
    Blip {
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 0.0)]
        omega: f64,
        #[arg(long, default_value = "8,16,32,64")]
        cutoffs: String,
        #[command(flatten)]
        common: Common,
    },
    /// Off-diagonal Hilbert-Schmidt norms: smooth blip against the raw sawtooth.
    #[command(allow_negative_numbers = true)]
    HsNorm {
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value = "8,16,32,64")]
        cutoffs: String,
        #[command(flatten)]
        common: Common,
    },
    /// Schwinger term of two blips by quadrature, trace and closed form.
    #[command(allow_negative_numbers = true)]
    Schwinger {
        /// Separation omega1 - omega2, with omega2 = 0.
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long, default_value_t = 0.3)]
        eps1: f64,
        #[arg(long, default_value_t = 0.3)]
        eps2: f64,
        /// Additional random admissible pairs.
        #[arg(long, default_value_t = 0)]
        random: usize,
        #[arg(long, default_value_t = 4096)]
        grid: usize,
        #[arg(long, default_value = "8,16,32,64")]
        cutoffs: String,
        #[command(flatten)]
        common: Common,
    },
    /// Vacuum image, charge grading, covariance and the two constructions of the shift implementer.
    #[command(allow_negative_numbers = true)]
    ImplementerCheck {
        #[arg(long, default_value_t = 4)]
        cutoff: usize,
        #[arg(long, default_value = "0.7,-2.1", allow_hyphen_values = true)]
        omegas: String,
        #[command(flatten)]
        common: Common,
    },
    /// Exchange phases of two anyon fields over a cutoff schedule.
    #[command(allow_negative_numbers = true)]
    Commutation {
        #[command(flatten)]
        fields: FieldArgs,
        /// Comma-separated winding numbers; defaults to the winding of omega1 - omega2.
        #[arg(long, allow_hyphen_values = true)]
        windings: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Exchange phase of the undressed fields and its dressing.
    #[command(allow_negative_numbers = true)]
    AuxCommutation {
        #[command(flatten)]
        fields: FieldArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Sector phases of U(2 pi) Phi U(2 pi)^* and the recurrence for S_q.
    #[command(allow_negative_numbers = true)]
    SpinStatistics {
        #[arg(long, default_value = "0,0.25,-0.5,0.5", allow_hyphen_values = true)]
        spins: String,
        #[arg(long, default_value_t = 6)]
        cutoff: usize,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 0.4)]
        omega: f64,
        #[command(flatten)]
        common: Common,
    },
    /// The bosonic s = 1/2 and fermionic s = 0 fields.
    #[command(allow_negative_numbers = true)]
    SpecialCases {
        #[arg(long, default_value_t = 0.3)]
        eps: f64,
        #[arg(long, default_value_t = std::f64::consts::PI)]
        separation: f64,
        #[arg(long, default_value = "4,6,8,10")]
        cutoffs: String,
        #[command(flatten)]
        common: Common,
    },
    /// Tensor fields on two cones, plus the LP against sampling on random cone pairs.
    #[command(allow_negative_numbers = true)]
    Cones {
        #[arg(long)]
        spin: f64,
        /// Vertices "x y; x y; ..."
        #[arg(long, default_value = "7 -7; 8 -7; 7.5 -6", allow_hyphen_values = true)]
        support1: String,
        #[arg(long, default_value_t = 2.3)]
        center1: f64,
        #[arg(long, default_value = "-0.5 9.5; 0.5 9.5; 0 10.5", allow_hyphen_values = true)]
        support2: String,
        #[arg(long, default_value_t = 0.0)]
        center2: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, allow_hyphen_values = true)]
        windings: Option<String>,
        #[arg(long, default_value = "4,6,8,10")]
        cutoffs: String,
        #[arg(long, default_value_t = 0)]
        random_pairs: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Runs every case of a configuration file.
    Report {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; falls back to ANYON_JOBS, then to the number of cores.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn single(kind: CaseKind, params: Vec<(&str, String)>, common: &Common) -> Result<bool, Error> {
    let id = kind.name();
    let p = Params::new(id, params.into_iter().map(|(k, v)| (k.to_string(), v)));
    let case = Case::parse(id, kind, p)?;
    let outcome = campaign::run_case(&case, common.seed, false);
    print_outcome(&outcome);
    if let Some(dir) = &common.out {
        campaign::write_atomic(&dir.join(format!("{id}.csv")), &campaign::format_csv(id, &outcome.rows))?;
    }
    Ok(outcome.passed())
}

fn print_outcome(o: &CaseOutcome) {
    println!("{:>4}  {:<44} {:>24} {:>24} {:>10}", "M", "params", "measured", "predicted", "error");
    for r in &o.rows {
        let params = r.params.iter().map(|(k, v)| format!("{k}={v:.4}")).collect::<Vec<_>>().join(" ");
        println!(
            "{:>4}  {:<44} {:>11.8} {:>+11.8}i {:>11.8} {:>+11.8}i {:>10.2e}",
            r.cutoff, params, r.measured.re, r.measured.im, r.predicted.re, r.predicted.im, r.abs_error
        );
    }
    for c in &o.checks {
        println!("{} {} (margin {:.2e}): {}", if c.passed { "PASS" } else { "FAIL" }, c.claim, c.margin, c.detail);
    }
    if let Some(e) = &o.error {
        println!("ERROR {}: {e}", o.case_id);
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    use Command::*;
    match cli.command {
        Blip { eps, omega, cutoffs, common } => single(
            CaseKind::Blip,
            vec![("epsilon", eps.to_string()), ("omega", omega.to_string()), ("cutoffs", cutoffs)],
            &common,
        ),
        HsNorm { eps, cutoffs, common } => {
            single(CaseKind::HsNorm, vec![("epsilon", eps.to_string()), ("cutoffs", cutoffs)], &common)
        }
        Schwinger { omega, eps1, eps2, random, grid, cutoffs, common } => {
            let mut p = vec![
                ("eps1", eps1.to_string()),
                ("eps2", eps2.to_string()),
                ("random", random.to_string()),
                ("grid", grid.to_string()),
                ("cutoffs", cutoffs),
            ];
            if let Some(w) = omega {
                p.push(("omega", w.to_string()));
            }
            single(CaseKind::Schwinger, p, &common)
        }
        ImplementerCheck { cutoff, omegas, common } => {
            single(CaseKind::ImplementerCheck, vec![("cutoff", cutoff.to_string()), ("omegas", omegas)], &common)
        }
        Commutation { fields, windings, common } => {
            let mut p = fields.params();
            if let Some(w) = windings {
                p.push(("windings", w));
            }
            single(CaseKind::Commutation, p, &common)
        }
        AuxCommutation { fields, common } => single(CaseKind::AuxCommutation, fields.params(), &common),
        SpinStatistics { spins, cutoff, eps, omega, common } => single(
            CaseKind::SpinStatistics,
            vec![("spins", spins), ("cutoff", cutoff.to_string()), ("epsilon", eps.to_string()), ("omega", omega.to_string())],
            &common,
        ),
        SpecialCases { eps, separation, cutoffs, common } => single(
            CaseKind::SpecialCases,
            vec![("epsilon", eps.to_string()), ("separation", separation.to_string()), ("cutoffs", cutoffs)],
            &common,
        ),
        Cones { spin, support1, center1, support2, center2, eps, windings, cutoffs, random_pairs, common } => {
            let mut p = vec![
                ("spin", spin.to_string()),
                ("support1", support1),
                ("center1", center1.to_string()),
                ("support2", support2),
                ("center2", center2.to_string()),
                ("epsilon", eps.to_string()),
                ("cutoffs", cutoffs),
                ("random_pairs", random_pairs.to_string()),
            ];
            if let Some(w) = windings {
                p.push(("windings", w));
            }
            single(CaseKind::Cones, p, &common)
        }
        Report { config, jobs } => {
            let campaign = Campaign::load(&config)?;
            let summary = campaign::run_campaign(&campaign, campaign::resolve_jobs(jobs)?)?;
            for case in &summary.cases {
                let status = if case.passed() { "PASS" } else { "FAIL" };
                println!("{status} {} ({})", case.case_id, case.kind.name());
                for c in case.checks.iter().filter(|c| !c.passed) {
                    println!("    {}: {}", c.claim, c.detail);
                }
                if let Some(e) = &case.error {
                    println!("    error: {e}");
                }
            }
            for c in &summary.claims {
                println!("{:<28} {} margin {:.2e}", c.id, c.status, c.margin);
            }
            println!("summary written to {}", campaign.output.join("summary.json").display());
            Ok(summary.passed)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Error::Config(_)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
