use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};

use slopp::io::{self, format_float, format_record};
use slopp::report::{Evaluation, RunReport};
use slopp::{
    evaluate, fully_factorized, learn_vtree, slopp as learn, Circuit, Dataset, Error, LearnConfig,
    Result, Vtree, VtreeMethod,
};

const REPORT_HELP: &str = "\
Reports:
  Every command except `vtree` and `support` prints a human-readable summary
  followed by one machine-readable line:

    report command=<cmd> [k=<k> d=<d> seed=<s> dedup=<bool> vtree=<src>]
           [eval=<set> records=<n> ll=<f> gamma=<n> consistent=<n> [baseline_ll=<f>]]
           nodes=<n> edges=<n> params=<n> inputs=<n> products=<n> sums=<n>

  ll is the summed natural-log likelihood over records with positive
  probability, gamma the number of records with probability zero. Floats have
  17 significant digits. Wall-clock time is printed to stderr only.

Exit status: 0 on success, 1 on errors (bad files, mismatched variables,
enumeration limit, invalid circuit for `check`), 2 on bad command-line flags.";

#[derive(Parser)]
#[command(
    name = "slopp",
    version,
    about = "Learn and evaluate PSDDs over binary data",
    after_long_help = REPORT_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a PSDD from a CSV of 0/1 records.
    Learn(LearnArgs),
    /// Log-likelihood and inconsistency count of a model on a dataset.
    Eval(EvalArgs),
    /// Validate a model's structure and parameters.
    Check(ModelArgs),
    /// Print every assignment with positive probability.
    Support(SupportArgs),
    /// Build a vtree for a dataset.
    Vtree(VtreeArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("vtree_source").required(true).args(["vtree", "vtree_method"])))]
struct LearnArgs {
    #[arg(long)]
    data: PathBuf,
    /// Vtree file to learn over.
    #[arg(long)]
    vtree: Option<PathBuf>,
    /// Build the vtree from the data instead: balanced, rightlinear, random or chowliu.
    #[arg(long)]
    vtree_method: Option<VtreeMethod>,
    /// Clusters per sum unit.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Do not cluster fewer records than this.
    #[arg(long, default_value_t = 20)]
    min_cluster: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Merge identical sub-circuits after learning.
    #[arg(long)]
    dedup: bool,
    /// Model output; the vtree is written next to it with extension `.vtree`.
    #[arg(long)]
    out: PathBuf,
    /// Evaluate on this dataset instead of the training data.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Also report a fully factorized model's log-likelihood on the same
    /// consistent records.
    #[arg(long)]
    baseline: bool,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    model: PathBuf,
    /// Vtree of the model; defaults to the model path with extension `.vtree`.
    #[arg(long)]
    vtree: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    data: PathBuf,
    /// Print each distinct record with its log-probability.
    #[arg(long)]
    per_record: bool,
}

#[derive(Args)]
struct SupportArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Refuse circuits over more variables than this.
    #[arg(long, default_value_t = slopp::inference::DEFAULT_ENUMERATION_LIMIT)]
    limit: usize,
}

#[derive(Args)]
struct VtreeArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "balanced")]
    method: VtreeMethod,
    /// Seed for the random method.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn vtree_path(model: &Path) -> Result<PathBuf> {
    let p = model.with_extension("vtree");
    if p == model {
        return Err(Error::Config(format!(
            "model path {} must not end in .vtree",
            model.display()
        )));
    }
    Ok(p)
}

fn load_model(args: &ModelArgs) -> Result<Circuit> {
    let vpath = match &args.vtree {
        Some(p) => p.clone(),
        None => vtree_path(&args.model)?,
    };
    let vtree = io::read_vtree(&vpath)?;
    io::read_psdd(&args.model, &vtree)
}

fn with_seed(method: VtreeMethod, seed: u64) -> VtreeMethod {
    match method {
        VtreeMethod::Random(_) => VtreeMethod::Random(seed),
        m => m,
    }
}

fn file_label(p: &Path) -> String {
    p.display().to_string()
}

fn cmd_learn(a: &LearnArgs) -> Result<()> {
    let config = LearnConfig {
        k: a.k,
        min_cluster: a.min_cluster,
        seed: a.seed,
        dedup: a.dedup,
        ..LearnConfig::default()
    };
    config.check()?;
    let vout = vtree_path(&a.out)?;
    let train = io::load_dataset(&a.data)?;
    let (vtree, source) = match (&a.vtree, a.vtree_method) {
        (Some(p), _) => (io::read_vtree(p)?, file_label(p)),
        (None, Some(m)) => (learn_vtree(&train, with_seed(m, a.seed))?, m.to_string()),
        (None, None) => unreachable!("clap requires a vtree source"),
    };

    let start = Instant::now();
    let circuit = learn(&train, &vtree, &config)?;
    eprintln!("learned in {:.3} s", start.elapsed().as_secs_f64());

    io::write_vtree(circuit.vtree(), &vout)?;
    io::write_psdd(&circuit, &a.out)?;

    let (label, eval_data) = match &a.test {
        Some(p) => ("test".to_string(), io::load_dataset(p)?),
        None => ("train".to_string(), train.clone()),
    };
    let mut report = RunReport::new("learn", circuit.size());
    report.learn = Some((config, source));
    report.evaluation = Some(evaluation(&circuit, &eval_data, label, a.baseline.then_some(&train))?);
    println!("{report}");
    Ok(())
}

/// Evaluates `circuit` and, given training data, a fully factorized model on
/// the records `circuit` finds consistent.
fn evaluation(
    circuit: &Circuit,
    data: &Dataset,
    label: String,
    baseline_train: Option<&Dataset>,
) -> Result<Evaluation> {
    let start = Instant::now();
    let ev = evaluate(circuit, data, baseline_train.is_some())?;
    let mut out = Evaluation::new(label, &ev);
    if let Some(train) = baseline_train {
        let base = fully_factorized(train)?;
        let base_ev = evaluate(&base, data, true)?;
        let ll = data
            .records()
            .iter()
            .zip(ev.per_record.as_deref().expect("requested"))
            .zip(base_ev.per_record.as_deref().expect("requested"))
            .filter(|((_, lp), _)| lp.is_finite())
            .map(|((r, _), b)| r.count as f64 * b)
            .sum();
        out.baseline_ll = Some(ll);
    }
    eprintln!("evaluated in {:.3} s", start.elapsed().as_secs_f64());
    Ok(out)
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let circuit = load_model(&a.model)?;
    let data = io::load_dataset(&a.data)?;
    if a.per_record {
        let ev = evaluate(&circuit, &data, true)?;
        for (r, lp) in data.records().iter().zip(ev.per_record.as_deref().expect("requested")) {
            println!("{} {} {}", format_record(&r.values), r.count, format_float(*lp));
        }
    }
    let mut report = RunReport::new("eval", circuit.size());
    report.evaluation = Some(evaluation(&circuit, &data, file_label(&a.data), None)?);
    println!("{report}");
    Ok(())
}

fn cmd_check(a: &ModelArgs) -> Result<bool> {
    let circuit = load_model(a)?;
    let validation = circuit.validate();
    let report = RunReport::new("check", circuit.size());
    if validation.is_valid() {
        println!("valid");
    } else {
        println!("{validation}");
    }
    println!("{report}");
    Ok(validation.is_valid())
}

fn cmd_support(a: &SupportArgs) -> Result<()> {
    let circuit = load_model(&a.model)?;
    let support = slopp::enumerate_support(&circuit, a.limit)?;
    for (x, p) in support {
        println!("{} {}", format_record(&x), format_float(p));
    }
    Ok(())
}

fn cmd_vtree(a: &VtreeArgs) -> Result<()> {
    let data = io::load_dataset(&a.data)?;
    let vtree: Vtree = learn_vtree(&data, with_seed(a.method, a.seed))?;
    io::write_vtree(&vtree, &a.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Learn(a) => cmd_learn(a).map(|()| true),
        Command::Eval(a) => cmd_eval(a).map(|()| true),
        Command::Check(a) => cmd_check(a),
        Command::Support(a) => cmd_support(a).map(|()| true),
        Command::Vtree(a) => cmd_vtree(a).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
