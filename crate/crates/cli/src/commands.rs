//! One builder per experiment subcommand. Each returns a [`Report`] or
//! a [`CliError`] that the top level maps to exit codes.

use std::io::BufRead;

use num::BigRational;

use lambda_core::benford::{benford_report, theta_k, weyl_sum, BenfordTable, WeylAccumulator};
use lambda_core::orders::{beta_estimate, for_each_order, order_structure_rates, OrderError};
use lambda_core::residue::{
    coprime_growth_report, discrepancy, gcd_identity_rate, interlude_ratio, mertens_sum,
    mod3_split, single_scheme_preset, wud_histogram, ResidueError,
};
use lambda_core::sieve::{
    count_smooth_checkpoints, scan_lambda, stream_records, ScanOptions, SegmentConfig, SieveError,
};
use lambda_core::tuples::{tuple_distribution_convolution, tuple_report, TupleError, TupleModulus};

use crate::report::{Cell, Report};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Resource(String),
    Io(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Resource(_) => "resource",
            CliError::Io(_) => "io",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Resource(m) | CliError::Io(m) => m,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Resource(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<SieveError> for CliError {
    fn from(e: SieveError) -> Self {
        if e.is_resource() {
            CliError::Resource(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<ResidueError> for CliError {
    fn from(e: ResidueError) -> Self {
        if e.is_resource() {
            CliError::Resource(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<OrderError> for CliError {
    fn from(e: OrderError) -> Self {
        if e.is_resource() {
            CliError::Resource(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<TupleError> for CliError {
    fn from(e: TupleError) -> Self {
        match e {
            TupleError::BudgetExceeded { .. } => CliError::Resource(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn ratio_cell(r: &BigRational) -> Cell {
    Cell::Ratio {
        num: r.numer().to_string(),
        den: r.denom().to_string(),
    }
}

pub fn sieve(lo: u64, hi: u64, opts: &ScanOptions) -> Result<Report, CliError> {
    let cfg = SegmentConfig::new(lo, hi).with_segment_size(opts.segment_size);
    let mut report = Report::new("sieve", vec!["n", "factorization", "lambda", "phi"]);
    report.param("lo", lo).param("hi", hi);
    for rec in stream_records(&cfg)? {
        let factor_text = if rec.factorization.pairs().is_empty() {
            "1".to_string()
        } else {
            rec.factorization
                .pairs()
                .iter()
                .map(|&(p, k)| {
                    if k == 1 {
                        p.to_string()
                    } else {
                        format!("{p}^{k}")
                    }
                })
                .collect::<Vec<_>>()
                .join("*")
        };
        report.push(vec![
            Cell::Uint(rec.n),
            Cell::Text(factor_text),
            Cell::Uint(rec.lambda),
            Cell::Uint(rec.phi),
        ]);
    }
    Ok(report)
}

pub fn wud(x: u64, q: u64, opts: &ScanOptions) -> Result<Report, CliError> {
    let hist = wud_histogram(x, q, opts)?;
    let (max_rel, tv) = discrepancy(&hist)
        .map_err(|e| CliError::Usage(format!("{e} (x = {x} produced no qualifying n)")))?;
    let mut report = Report::new(
        "wud",
        vec![
            "residue",
            "count",
            "total",
            "frequency",
            "expected_frequency",
            "max_rel_dev",
            "total_variation",
        ],
    );
    report.param("x", x).param("q", q);
    let classes: Vec<u64> = hist.coprime_classes().collect();
    let expected = 1.0 / classes.len() as f64;
    for a in classes {
        report.push(vec![
            Cell::Uint(a),
            Cell::Uint(hist.count(a)),
            Cell::Uint(hist.total()),
            Cell::Float(hist.count(a) as f64 / hist.total() as f64),
            Cell::Float(expected),
            Cell::Float(max_rel),
            Cell::Float(tv),
        ]);
    }
    Ok(report)
}

pub fn mod3(x: u64, q: u64, opts: &ScanOptions) -> Result<Report, CliError> {
    let (c1, c2) = mod3_split(x, q, opts)?;
    let total = c1 + c2;
    let deviation = if total > 0 {
        (c1 as f64 / total as f64 - 0.5).abs()
    } else {
        f64::NAN
    };
    let mut report = Report::new(
        "mod3",
        vec!["x", "q", "total", "count1", "count2", "deviation"],
    );
    report.param("x", x).param("q", q);
    report.push(vec![
        Cell::Uint(x),
        Cell::Uint(q),
        Cell::Uint(total),
        Cell::Uint(c1),
        Cell::Uint(c2),
        Cell::Float(deviation),
    ]);
    Ok(report)
}

pub fn interlude(x: u64, q: u64, a: u64, opts: &ScanOptions) -> Result<Report, CliError> {
    let counts = interlude_ratio(x, q, a, opts)?;
    let mut report = Report::new(
        "interlude",
        vec!["x", "q", "a", "lhs", "mod3_count", "rhs", "ratio"],
    );
    report.param("x", x).param("q", q).param("a", a);
    report.push(vec![
        Cell::Uint(x),
        Cell::Uint(q),
        Cell::Uint(a),
        Cell::Uint(counts.lhs),
        Cell::Uint(counts.mod3_count),
        Cell::Float(counts.rhs),
        Cell::Float(counts.ratio),
    ]);
    Ok(report)
}

pub fn mertens(checkpoints: &[u64], q: u64, s: u64) -> Result<Report, CliError> {
    let rep = mertens_sum(checkpoints, q, s)?;
    let mut report = Report::new(
        "mertens",
        vec!["x", "q", "s", "sum", "main_term", "residual"],
    );
    report.param("q", q).param("s", s);
    for ck in &rep.checkpoints {
        report.push(vec![
            Cell::Uint(ck.x),
            Cell::Uint(q),
            Cell::Uint(s),
            Cell::Float(ck.sum),
            Cell::Float(ck.main_term),
            Cell::Float(ck.residual),
        ]);
    }
    Ok(report)
}

pub fn growth(checkpoints: &[u64], q: u64, opts: &ScanOptions) -> Result<Report, CliError> {
    let rows = coprime_growth_report(q, checkpoints, opts)?;
    let mut report = Report::new("growth", vec!["x", "q", "count", "normalized"]);
    report.param("q", q);
    for row in rows {
        report.push(vec![
            Cell::Uint(row.x),
            Cell::Uint(q),
            Cell::Uint(row.count),
            Cell::Float(row.normalized),
        ]);
    }
    Ok(report)
}

/// Where benford/weyl read their value stream from.
pub enum StreamSource {
    /// λ(n) over n ≤ x.
    Lambda { x: u64 },
    /// ℓ_a(n) over n ≤ x with gcd(n, a) = 1.
    Orders { x: u64, a: i64 },
    /// One positive integer per line.
    File { path: String },
}

fn read_value_file(path: &str) -> Result<Vec<u64>, CliError> {
    let file =
        std::fs::File::open(path).map_err(|e| CliError::Io(format!("cannot open {path}: {e}")))?;
    let mut values = Vec::new();
    for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::Io(format!("read error in {path}: {e}")))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let v: u64 = trimmed.parse().map_err(|_| {
            CliError::Usage(format!(
                "{path}:{}: not a positive integer: {trimmed:?}",
                idx + 1
            ))
        })?;
        values.push(v);
    }
    Ok(values)
}

fn source_params(report: &mut Report, source: &StreamSource) {
    match source {
        StreamSource::Lambda { x } => {
            report.param("source", "lambda").param("x", *x);
        }
        StreamSource::Orders { x, a } => {
            report
                .param("source", "orders")
                .param("x", *x)
                .param("a", *a);
        }
        StreamSource::File { path } => {
            report.param("source", "file").param("input", path.as_str());
        }
    }
}

pub fn benford(
    source: &StreamSource,
    base: u32,
    d_max: u64,
    opts: &ScanOptions,
) -> Result<Report, CliError> {
    if base < 2 {
        return Err(CliError::Usage(format!("base {base} must be at least 2")));
    }
    if d_max < (base - 1) as u64 {
        return Err(CliError::Usage(format!(
            "dmax {d_max} must cover the first digits (≥ {})",
            base - 1
        )));
    }
    let table = match source {
        StreamSource::Lambda { x } => {
            let cfg = SegmentConfig::new(1, *x).with_segment_size(opts.segment_size);
            scan_lambda(
                &cfg,
                opts.workers,
                || BenfordTable::new(base, d_max),
                |t, e| t.push(e.lambda).expect("λ ≥ 1"),
                BenfordTable::merge,
            )?
        }
        StreamSource::Orders { x, a } => {
            let mut table = BenfordTable::new(base, d_max);
            for_each_order(*x, *a, |_, ord| table.push(ord).expect("order ≥ 1"))?;
            table
        }
        StreamSource::File { path } => {
            let values = read_value_file(path)?;
            benford_report(values, base, d_max).map_err(|e| CliError::Usage(e.to_string()))?
        }
    };
    if table.total() == 0 {
        return Err(CliError::Usage("empty stream".into()));
    }
    let tv = table.first_digit_total_variation();
    let mut report = Report::new(
        "benford",
        vec![
            "d",
            "count",
            "total",
            "frequency",
            "expected_frequency",
            "first_digit_tv",
        ],
    );
    report.param("base", base).param("dmax", d_max);
    source_params(&mut report, source);
    for d in 1..=d_max {
        report.push(vec![
            Cell::Uint(d),
            Cell::Uint(table.count(d)),
            Cell::Uint(table.total()),
            Cell::Float(table.frequency(d)),
            Cell::Float(table.expected(d)),
            Cell::Float(tv),
        ]);
    }
    Ok(report)
}

pub fn weyl(source: &StreamSource, theta: f64, opts: &ScanOptions) -> Result<Report, CliError> {
    let acc = match source {
        StreamSource::Lambda { x } => {
            let cfg = SegmentConfig::new(1, *x).with_segment_size(opts.segment_size);
            scan_lambda(
                &cfg,
                opts.workers,
                || WeylAccumulator::new(theta),
                |acc, e| acc.push(e.lambda).expect("λ ≥ 1"),
                WeylAccumulator::merge,
            )?
        }
        StreamSource::Orders { x, a } => {
            let mut acc = WeylAccumulator::new(theta);
            for_each_order(*x, *a, |_, ord| acc.push(ord).expect("order ≥ 1"))?;
            acc
        }
        StreamSource::File { path } => {
            let values = read_value_file(path)?;
            weyl_sum(values, theta).map_err(|e| CliError::Usage(e.to_string()))?
        }
    };
    if acc.count() == 0 {
        return Err(CliError::Usage("empty stream".into()));
    }
    let (re, im) = acc.sums();
    let mut report = Report::new(
        "weyl",
        vec!["theta", "count", "real", "imag", "magnitude", "normalized"],
    );
    source_params(&mut report, source);
    report.param("theta", theta);
    report.push(vec![
        Cell::Float(theta),
        Cell::Uint(acc.count()),
        Cell::Float(re),
        Cell::Float(im),
        Cell::Float(acc.magnitude()),
        Cell::Float(acc.normalized_magnitude()),
    ]);
    Ok(report)
}

pub fn orders(x: u64, a: i64, d: u64) -> Result<Report, CliError> {
    // Single pass for both the count and the reciprocal sum.
    let mut count = 0u64;
    let mut sum = lambda_core::kahan::KahanSum::new();
    if a.unsigned_abs() <= 1 {
        return Err(CliError::Usage(format!(
            "base a = {a} must satisfy |a| > 1"
        )));
    }
    if d == 0 {
        return Err(CliError::Usage("d must be positive".into()));
    }
    lambda_core::orders::for_each_prime_order(x, a, |p, ord| {
        if ord % d == 0 {
            count += 1;
            sum.add(1.0 / p as f64);
        }
    })?;
    let mut report = Report::new("orders", vec!["x", "a", "d", "count", "recip_sum"]);
    report.param("x", x).param("a", a).param("d", d);
    report.push(vec![
        Cell::Uint(x),
        Cell::Int(a),
        Cell::Uint(d),
        Cell::Uint(count),
        Cell::Float(sum.value()),
    ]);
    Ok(report)
}

pub fn beta(checkpoints: &[u64], a: i64, d: u64) -> Result<Report, CliError> {
    let rep = beta_estimate(a, d, checkpoints)?;
    let mut report = Report::new(
        "beta",
        vec![
            "x",
            "a",
            "d",
            "count",
            "prime_count",
            "beta_hat",
            "d_beta_hat",
            "recip_sum",
            "recip_slope",
        ],
    );
    report.param("a", a).param("d", d);
    for ck in &rep.checkpoints {
        report.push(vec![
            Cell::Uint(ck.x),
            Cell::Int(a),
            Cell::Uint(d),
            Cell::Uint(ck.count),
            Cell::Uint(ck.prime_count),
            Cell::Float(ck.beta_hat),
            Cell::Float(d as f64 * ck.beta_hat),
            Cell::Float(ck.recip_sum),
            Cell::Float(rep.recip_slope),
        ]);
    }
    Ok(report)
}

pub fn tuples(q: u64, j: u32, allow_mod3: bool) -> Result<Report, CliError> {
    if allow_mod3 && q % 3 == 0 {
        // Exploration mode: raw counts only; the error bounds require
        // gcd(q, 6) = 1.
        let m = TupleModulus::exploratory_odd(q)?;
        let dist = tuple_distribution_convolution(&m, j)?;
        let mut report = Report::new("tuples", vec!["r", "count"]);
        report.param("q", q).param("j", j).param("allow_mod3", true);
        for r in m.units() {
            report.push(vec![Cell::Uint(r), Cell::Count(dist[r as usize].clone())]);
        }
        return Ok(report);
    }
    let m = TupleModulus::coprime_to_six(q)?;
    if j == 1 {
        let dist = tuple_distribution_convolution(&m, 1)?;
        let mut report = Report::new("tuples", vec!["r", "count"]);
        report.param("q", q).param("j", j);
        for r in m.units() {
            report.push(vec![Cell::Uint(r), Cell::Count(dist[r as usize].clone())]);
        }
        return Ok(report);
    }
    let rep = tuple_report(&m, j)?;
    let envelope = rep.deviation_envelope();
    let mut report = Report::new(
        "tuples",
        vec!["r", "count", "main_term", "bound", "within_bound"],
    );
    report.param("q", q).param("j", j);
    report.param(
        "main_term",
        format!("{}/{}", rep.main_term.numer(), rep.main_term.denom()),
    );
    for (r, count) in &rep.counts {
        report.push(vec![
            Cell::Uint(*r),
            Cell::Count(count.clone()),
            ratio_cell(&rep.main_term),
            ratio_cell(&envelope),
            Cell::Bool(rep.residue_within_bounds(*r)),
        ]);
    }
    Ok(report)
}

pub fn smooth(checkpoints: &[u64], y: u64) -> Result<Report, CliError> {
    if y == 0 {
        return Err(CliError::Usage("y must be positive".into()));
    }
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(CliError::Usage(
            "checkpoints must be ascending and nonempty".into(),
        ));
    }
    let counts = count_smooth_checkpoints(checkpoints, y);
    let mut report = Report::new("smooth", vec!["x", "y", "count"]);
    report.param("y", y);
    for (&x, count) in checkpoints.iter().zip(counts) {
        report.push(vec![Cell::Uint(x), Cell::Uint(y), Cell::Uint(count)]);
    }
    Ok(report)
}

pub fn rates(
    x: u64,
    y: Option<u64>,
    w: Option<u64>,
    preset: bool,
    order_base: Option<i64>,
    opts: &ScanOptions,
) -> Result<Report, CliError> {
    let (y, w) = if preset {
        let params = single_scheme_preset(x);
        (y.unwrap_or(params.y), w.unwrap_or(params.w))
    } else {
        match (y, w) {
            (Some(y), Some(w)) => (y, w),
            _ => {
                return Err(CliError::Usage(
                    "rates needs --y and --w (or --preset to derive them from x)".into(),
                ))
            }
        }
    };
    let mut report = Report::new("rates", vec!["metric", "numerator", "denominator", "rate"]);
    report.param("x", x).param("y", y).param("w", w);
    let lam_rate = gcd_identity_rate(x, y, w, opts)?;
    report.push(vec![
        Cell::Text("gcd_identity".into()),
        Cell::Uint(lam_rate.numerator),
        Cell::Uint(lam_rate.denominator),
        Cell::Float(lam_rate.rate),
    ]);
    if let Some(a) = order_base {
        report.param("a", a);
        let order_rates = order_structure_rates(x, a, w, y)?;
        report.push(vec![
            Cell::Text("order_gcd_identity".into()),
            Cell::Uint(order_rates.gcd_identity),
            Cell::Uint(order_rates.sample),
            Cell::Float(order_rates.rate_gcd),
        ]);
        report.push(vec![
            Cell::Text("order_quotient_smooth".into()),
            Cell::Uint(order_rates.quotient_smooth),
            Cell::Uint(order_rates.sample),
            Cell::Float(order_rates.rate_smooth),
        ]);
    }
    Ok(report)
}

/// Resolves the Weyl θ from either an explicit value or (k, base).
pub fn resolve_theta(theta: Option<f64>, k: u64, base: f64) -> Result<f64, CliError> {
    if let Some(t) = theta {
        return Ok(t);
    }
    if k < 1 || base <= 1.0 {
        return Err(CliError::Usage(format!(
            "theta_k needs k ≥ 1 and base > 1 (got k = {k}, base = {base})"
        )));
    }
    Ok(theta_k(k, base))
}
