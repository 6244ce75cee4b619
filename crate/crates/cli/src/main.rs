//! lambda-lab: experiment CLI over the lambda-core library.
//!
//! One subcommand per experiment family; CSV (default) or JSON reports
//! on stdout or --output. Exit codes: 0 ok, 2 usage error, 3 resource
//! limit. Errors are emitted as a JSON object on stderr.

mod commands;
mod report;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, StreamSource};
use lambda_core::sieve::ScanOptions;
use report::{Format, Report};

/// Parses "1e6"-style magnitudes as well as plain integers.
fn parse_magnitude(s: &str) -> Result<u64, String> {
    if s.contains(['e', 'E']) {
        let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
        if !(v.is_finite() && v >= 0.0 && v <= 2f64.powi(53) && v.fract() == 0.0) {
            return Err(format!("{s} is not a nonnegative integer magnitude"));
        }
        Ok(v as u64)
    } else {
        s.parse().map_err(|_| format!("not an integer: {s}"))
    }
}

#[derive(Parser)]
#[command(
    name = "lambda-lab",
    about = "Carmichael-lambda distribution experiments: residue classes, Benford's law, Weyl sums, multiplicative orders, and exact tuple counts",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_parser = ["csv", "json"], default_value = "csv")]
    format: String,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<String>,

    /// Sieve segment size in entries (≥ 2^14).
    #[arg(long, global = true, value_parser = parse_magnitude)]
    segment_size: Option<u64>,

    /// Worker threads for segment scans; defaults to LAMBDA_LAB_WORKERS
    /// or the available parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Args)]
struct StreamArgs {
    /// Range limit for the λ(n) stream (default source).
    #[arg(long, value_parser = parse_magnitude)]
    x: Option<u64>,

    /// Use the multiplicative-order stream ℓ_a(n) over gcd(n, a) = 1.
    #[arg(long)]
    order_base: Option<i64>,

    /// Read values from a file, one positive integer per line.
    #[arg(long, conflicts_with_all = ["x", "order_base"])]
    input: Option<String>,
}

impl StreamArgs {
    fn resolve(&self) -> Result<StreamSource, CliError> {
        if let Some(path) = &self.input {
            return Ok(StreamSource::File { path: path.clone() });
        }
        let x = self
            .x
            .ok_or_else(|| CliError::Usage("--x is required unless --input is given".into()))?;
        match self.order_base {
            Some(a) => Ok(StreamSource::Orders { x, a }),
            None => Ok(StreamSource::Lambda { x }),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Emit (n, factorization, λ(n), φ(n)) for a range.
    Sieve {
        #[arg(long, value_parser = parse_magnitude, default_value = "1")]
        lo: u64,
        #[arg(long, value_parser = parse_magnitude)]
        hi: u64,
    },
    /// Residue-class histogram of λ(n) mod q over gcd(λ(n), q) = 1.
    Wud {
        #[arg(long, value_parser = parse_magnitude)]
        x: u64,
        #[arg(long)]
        q: u64,
    },
    /// λ(n) mod 3 split over gcd(λ(n), q) = 1 (3 | q required).
    Mod3 {
        #[arg(long, value_parser = parse_magnitude)]
        x: u64,
        #[arg(long)]
        q: u64,
    },
    /// Compare the mod-q class count against (2/φ(q))·(mod-3 count).
    Interlude {
        #[arg(long, value_parser = parse_magnitude)]
        x: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        a: u64,
    },
    /// Σ 1/p over p ≤ x with gcd(p−1, q) = 1 and s ∤ p−1.
    Mertens {
        #[arg(long, value_parser = parse_magnitude)]
        x: Option<u64>,
        #[arg(long, value_delimiter = ',', value_parser = parse_magnitude, conflicts_with = "x")]
        checkpoints: Option<Vec<u64>>,
        #[arg(long, default_value = "1")]
        q: u64,
        #[arg(long, default_value = "1")]
        s: u64,
    },
    /// N(x, q) with the (log x)^{1−α(q)} normalization per checkpoint.
    Growth {
        #[arg(long, value_delimiter = ',', value_parser = parse_magnitude)]
        checkpoints: Vec<u64>,
        #[arg(long)]
        q: u64,
    },
    /// Leading-block (Benford) table for a value stream.
    Benford {
        #[command(flatten)]
        stream: StreamArgs,
        #[arg(long, default_value = "10")]
        base: u32,
        #[arg(long, value_parser = parse_magnitude)]
        dmax: Option<u64>,
    },
    /// Weyl sum Σ v^{iθ} for a value stream.
    Weyl {
        #[command(flatten)]
        stream: StreamArgs,
        /// Weyl frequency index: θ = 2πk/ln(base).
        #[arg(long, default_value = "1")]
        k: u64,
        #[arg(long, default_value = "10")]
        base: f64,
        /// Explicit θ, overriding --k/--base.
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Count and reciprocal sum of primes with d | ℓ_a(p).
    Orders {
        #[arg(long, value_parser = parse_magnitude)]
        x: u64,
        #[arg(long)]
        a: i64,
        #[arg(long)]
        d: u64,
    },
    /// β_a(d) density estimates across checkpoints.
    Beta {
        #[arg(long, value_delimiter = ',', value_parser = parse_magnitude)]
        checkpoints: Vec<u64>,
        #[arg(long)]
        a: i64,
        #[arg(long)]
        d: u64,
    },
    /// Exact tuple counts mod q against φ₂(q)^J/φ(q).
    Tuples {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        j: u32,
        /// Admit 3 | q (raw counts only; exhibits the r ≡ 1 mod 3
        /// obstruction).
        #[arg(long)]
        allow_mod3: bool,
    },
    /// Exact y-smooth counts Ψ(x, y).
    Smooth {
        #[arg(long, value_parser = parse_magnitude)]
        x: Option<u64>,
        #[arg(long, value_delimiter = ',', value_parser = parse_magnitude, conflicts_with = "x")]
        checkpoints: Option<Vec<u64>>,
        #[arg(long, value_parser = parse_magnitude)]
        y: u64,
    },
    /// Structural identity rates over convenient n = mP ≤ x.
    Rates {
        #[arg(long, value_parser = parse_magnitude)]
        x: u64,
        #[arg(long, value_parser = parse_magnitude)]
        y: Option<u64>,
        #[arg(long, value_parser = parse_magnitude)]
        w: Option<u64>,
        /// Derive y and w from x via the single-scheme preset
        /// (y = x^{1/√log₃x} clamped to √x, w = log₂x).
        #[arg(long)]
        preset: bool,
        /// Also compute the ℓ_a rates for this base.
        #[arg(long)]
        order_base: Option<i64>,
    },
}

fn scan_options(cli: &Cli) -> Result<ScanOptions, CliError> {
    let mut opts = ScanOptions::default();
    if let Some(size) = cli.segment_size {
        opts.segment_size = size as usize;
    }
    match cli.workers {
        Some(w) if w >= 1 => opts.workers = w,
        Some(w) => return Err(CliError::Usage(format!("--workers {w} must be ≥ 1"))),
        None => {
            if let Ok(env) = std::env::var("LAMBDA_LAB_WORKERS") {
                let w: usize = env.parse().map_err(|_| {
                    CliError::Usage(format!("LAMBDA_LAB_WORKERS={env} is not a worker count"))
                })?;
                if w >= 1 {
                    opts.workers = w;
                }
            }
        }
    }
    Ok(opts)
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let opts = scan_options(cli)?;
    match &cli.command {
        Command::Sieve { lo, hi } => commands::sieve(*lo, *hi, &opts),
        Command::Wud { x, q } => commands::wud(*x, *q, &opts),
        Command::Mod3 { x, q } => commands::mod3(*x, *q, &opts),
        Command::Interlude { x, q, a } => commands::interlude(*x, *q, *a, &opts),
        Command::Mertens {
            x,
            checkpoints,
            q,
            s,
        } => {
            let cks = resolve_checkpoints(x, checkpoints)?;
            commands::mertens(&cks, *q, *s)
        }
        Command::Growth { checkpoints, q } => commands::growth(checkpoints, *q, &opts),
        Command::Benford { stream, base, dmax } => {
            let source = stream.resolve()?;
            let d_max = dmax.unwrap_or_else(|| {
                // Default: all blocks up to two digits in the base.
                ((*base as u64) * (*base as u64) - 1).min(99)
            });
            commands::benford(&source, *base, d_max, &opts)
        }
        Command::Weyl {
            stream,
            k,
            base,
            theta,
        } => {
            let source = stream.resolve()?;
            let theta = commands::resolve_theta(*theta, *k, *base)?;
            commands::weyl(&source, theta, &opts)
        }
        Command::Orders { x, a, d } => commands::orders(*x, *a, *d),
        Command::Beta { checkpoints, a, d } => commands::beta(checkpoints, *a, *d),
        Command::Tuples { q, j, allow_mod3 } => commands::tuples(*q, *j, *allow_mod3),
        Command::Smooth { x, checkpoints, y } => {
            let cks = resolve_checkpoints(x, checkpoints)?;
            commands::smooth(&cks, *y)
        }
        Command::Rates {
            x,
            y,
            w,
            preset,
            order_base,
        } => commands::rates(*x, *y, *w, *preset, *order_base, &opts),
    }
}

fn resolve_checkpoints(
    x: &Option<u64>,
    checkpoints: &Option<Vec<u64>>,
) -> Result<Vec<u64>, CliError> {
    match (x, checkpoints) {
        (Some(x), None) => Ok(vec![*x]),
        (None, Some(cks)) if !cks.is_empty() => Ok(cks.clone()),
        _ => Err(CliError::Usage(
            "provide --x or a nonempty --checkpoints list".into(),
        )),
    }
}

fn main() {
    let cli = Cli::parse();
    let format = match cli.format.as_str() {
        "json" => Format::Json,
        _ => Format::Csv,
    };
    match run(&cli) {
        Ok(report) => {
            let text = report.render(format);
            match &cli.output {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        emit_error(&CliError::Io(format!("cannot write {path}: {e}")));
                    }
                }
                None => print!("{text}"),
            }
        }
        Err(err) => emit_error(&err),
    }
}

fn emit_error(err: &CliError) -> ! {
    let obj = serde_json::json!({
        "error": { "kind": err.kind(), "message": err.message() }
    });
    eprintln!("{obj}");
    std::process::exit(err.exit_code());
}
