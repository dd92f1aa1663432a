//! `verify`: run the check suites over the curve catalog and write the
//! report bundle (JSON verdicts, CSV tables, SVG plots).

use clap::Parser;
use hofer_core::{energies_csv, energy_vs_a_svg, hbar_svg, monotonicity_csv, RunSpec};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

const SUITES: [&str; 5] = ["acs", "energy", "theorem3", "monotonicity", "all"];

#[derive(Parser, Debug)]
#[command(
    name = "verify",
    about = "Run energy and area checks for punctured curves on a cylindrical end"
)]
struct Args {
    /// Suite to run: acs, energy, theorem3, monotonicity, or all
    #[arg(long)]
    suite: Option<String>,
    /// Plain key=value configuration file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Seed for all sampled checks
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for report.json, CSV tables, and SVG plots
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict the catalog to the monomial family 1..=kmax (0 = empty)
    #[arg(long)]
    kmax: Option<usize>,
    /// Perturbed structure for the acs suite: quadratic or cubic
    #[arg(long)]
    phi: Option<String>,
    /// Strength of the perturbed structure
    #[arg(long)]
    beta: Option<f64>,
    /// Complex dimension of the model
    #[arg(long)]
    n: Option<usize>,
    /// Chart scale of the end
    #[arg(long)]
    epsilon: Option<f64>,
    /// Comma-separated radii for the area sweep
    #[arg(long)]
    radii: Option<String>,
}

const KNOWN_KEYS: [&str; 10] = [
    "suite", "jobs", "seed", "out", "kmax", "phi", "beta", "n", "epsilon", "radii",
];

fn parse_config(path: &PathBuf) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", lineno + 1))?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(format!("config line {}: unknown key '{key}'", lineno + 1));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parsed<T: std::str::FromStr>(
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, String> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|_| format!("config key '{key}': cannot parse '{raw}'")),
    }
}

struct Resolved {
    spec: RunSpec,
    jobs: usize,
    out: PathBuf,
}

fn resolve(args: &Args) -> Result<Resolved, String> {
    let config = match &args.config {
        Some(path) => parse_config(path)?,
        None => BTreeMap::new(),
    };
    let mut spec = RunSpec::default();
    // config first, then flags win
    if let Some(s) = parsed::<String>(&config, "suite")? {
        spec.suite = s;
    }
    if let Some(s) = &args.suite {
        spec.suite = s.clone();
    }
    if !SUITES.contains(&spec.suite.as_str()) {
        return Err(format!(
            "unknown suite '{}' (expected one of {})",
            spec.suite,
            SUITES.join(", ")
        ));
    }
    spec.n = parsed(&config, "n")?.or(args.n).unwrap_or(spec.n);
    spec.epsilon = parsed(&config, "epsilon")?
        .or(args.epsilon)
        .unwrap_or(spec.epsilon);
    spec.seed = parsed(&config, "seed")?.or(args.seed).unwrap_or(spec.seed);
    spec.kmax = args.kmax.or(parsed(&config, "kmax")?);
    let phi = args.phi.clone().or(parsed(&config, "phi")?);
    let beta = args.beta.or(parsed(&config, "beta")?);
    spec.phi = phi.map(|name| (name, beta.unwrap_or(0.4)));
    let radii_raw = args.radii.clone().or(parsed(&config, "radii")?);
    if let Some(raw) = radii_raw {
        let mut radii = Vec::new();
        for piece in raw.split(',') {
            let r: f64 = piece
                .trim()
                .parse()
                .map_err(|_| format!("radii: cannot parse '{piece}'"))?;
            if !(r > 0.0) {
                return Err(format!("radii: {r} is not positive"));
            }
            radii.push(r);
        }
        spec.radii = radii;
    }
    // a kmax-restricted run defaults to the chart radius only, matching the
    // closed-form family check
    if args.kmax.is_some() && args.radii.is_none() && !config.contains_key("radii") {
        spec.radii = vec![1.0];
    }
    let jobs = args.jobs.or(parsed(&config, "jobs")?).unwrap_or(0);
    let out = args
        .out
        .clone()
        .or(parsed::<String>(&config, "out")?.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(Resolved { spec, jobs, out })
}

fn run(args: &Args) -> Result<bool, String> {
    let resolved = resolve(args)?;
    if resolved.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(resolved.jobs)
            .build_global()
            .map_err(|e| format!("thread pool: {e}"))?;
    }
    let report = hofer_core::run(&resolved.spec).map_err(|e| format!("run failed: {e}"))?;
    let out = &resolved.out;
    std::fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    let write = |name: &str, body: String| -> Result<(), String> {
        std::fs::write(out.join(name), body)
            .map_err(|e| format!("cannot write {name}: {e}"))
    };
    write(
        "report.json",
        report.to_json().map_err(|e| e.to_string())? + "\n",
    )?;
    write("checks.csv", hofer_core::checks_csv(&report.checks))?;
    if !report.energies.is_empty() {
        write("energies.csv", energies_csv(&report.energies))?;
        let series: Vec<(String, Vec<(f64, f64)>)> = report
            .energies
            .iter()
            .map(|(id, r)| (id.clone(), vec![(0.0, r.e_omega + r.e_lambda), (r.a, r.e_total_a)]))
            .collect();
        write("energy_vs_a.svg", energy_vs_a_svg(&series))?;
    }
    if let Some(mono) = &report.monotonicity {
        write("monotonicity.csv", monotonicity_csv(mono))?;
        if mono.hbar_empirical.len() >= 2 {
            write("hbar_vs_r.svg", hbar_svg(mono))?;
        }
    }
    println!(
        "suite {}: {} ({} checks) -> {}",
        resolved.spec.suite,
        report.status,
        report.checks.len(),
        out.display()
    );
    for check in report.checks.iter().filter(|c| c.status == "fail") {
        eprintln!("FAIL {} [{}]", check.check, check.curve);
        for m in &check.values {
            eprintln!("  {} = {} (tolerance {})", m.name, m.value, m.tolerance);
        }
    }
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
