use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use deepcycle::emission::{
    dynamic_hourly_emission, fit_samples, generate_synthetic_samples, read_samples_csv, static_hourly_emission,
    write_samples_csv, DynamicEmissionParams, EmissionSample, StaticEmissionParams,
};
use deepcycle::milp::{read_mps, read_solution, solve_milp, write_mps, write_solution, SolverOptions};
use deepcycle::uc::{assemble, check_uc_solution, VariableIndex};
use serde_json::json;

use crate::config::{
    ensure_writable, load_case_input, parse_level, resolve_out, wind_label, FileConfig, SolverArgs, WindMode, BUNDLED,
};
use crate::manifest::{relative, InputHash, Manifest};
use crate::solve::{SolveArgs, SolvePlan};

#[derive(Debug, Clone, Default, clap::Args)]
pub struct FitArgs {
    /// Samples CSV with columns g_prev, g, g_next, emission.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output below which ramping samples enter the dynamic fit, MW.
    /// Defaults to half of `g_max`.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Rated output, MW. Defaults to the largest output in the samples.
    #[arg(long)]
    pub g_max: Option<f64>,
}

pub fn fit(args: &FitArgs, file: &FileConfig, config: Option<(&Path, &str)>) -> Result<bool> {
    let path = args
        .samples
        .clone()
        .or_else(|| file.samples.clone())
        .context("no samples file given (--samples)")?;
    let out = resolve_out(args.out.clone(), file);
    let bytes = std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
    let samples = read_samples_csv(bytes.as_slice()).with_context(|| format!("parsing {}", path.display()))?;
    if samples.is_empty() {
        bail!("{} holds no samples", path.display());
    }
    let observed = samples.iter().flat_map(|s| [s.g_prev, s.g, s.g_next]).fold(0.0, f64::max);
    let g_max = args.g_max.or(file.g_max).unwrap_or(observed);
    let threshold = args.threshold.or(file.threshold).unwrap_or(0.5 * g_max);
    ensure_writable(&out)?;

    let report = fit_samples(&samples, threshold, g_max)?;
    let report_path = out.join("fit_report.json");
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)? + "\n")?;

    let residual_path = out.join("residuals.csv");
    let dynamic = report.dynamic_fit.as_ref().map(|f| f.params);
    write_residuals(&residual_path, &samples, &report.static_fit.params, dynamic.as_ref())?;

    let s = &report.static_fit.params;
    println!("static  f0 = {:.4}  f1 = {:.4}  N1 = {:.4}  ({} samples)", s.f0, s.f1, s.n1, report.static_samples);
    match (&report.dynamic_fit, &report.dynamic_error) {
        (Some(d), _) => println!(
            "dynamic b = {:.4}  tau = {:.4}  N2 = {:.4}  ({} samples)",
            d.params.b, d.params.tau, d.params.n2, d.samples
        ),
        (None, Some(e)) => println!("dynamic fit failed: {e}"),
        (None, None) => {}
    }

    let mut inputs = vec![InputHash::new("samples", &path.to_string_lossy(), &bytes)];
    if let Some((p, text)) = config {
        inputs.push(InputHash::new("config", &p.to_string_lossy(), text.as_bytes()));
    }
    let mut manifest = Manifest::new("fit", inputs, json!({ "threshold_mw": threshold, "g_max_mw": g_max }));
    manifest.results = json!({
        "static": report.static_fit.params,
        "dynamic": dynamic,
        "dynamic_error": report.dynamic_error,
    });
    manifest.outputs = vec![relative(&out, &report_path), relative(&out, &residual_path)];
    manifest.write(&out.join("manifest.json"))?;
    Ok(true)
}

fn write_residuals(
    path: &Path,
    samples: &[EmissionSample],
    ps: &StaticEmissionParams,
    pd: Option<&DynamicEmissionParams>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["g_prev", "g", "g_next", "emission", "predicted", "residual", "model"])?;
    for s in samples {
        let (pred, model) = match pd {
            Some(pd) if !s.is_static() => (dynamic_hourly_emission(ps, pd, s.g_prev, s.g, s.g_next)?, "dynamic"),
            _ => (static_hourly_emission(ps, s.g)?, "static"),
        };
        w.write_record([
            s.g_prev.to_string(),
            s.g.to_string(),
            s.g_next.to_string(),
            s.emission.to_string(),
            pred.to_string(),
            (s.emission - pred).to_string(),
            model.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct SynthArgs {
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Noise standard deviation relative to the mean emission.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Rated output, MW.
    #[arg(long)]
    pub g_max: Option<f64>,
}

pub fn synth(args: &SynthArgs, file: &FileConfig, config: Option<(&Path, &str)>) -> Result<bool> {
    let count = args.count.or(file.count).unwrap_or(1000);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let noise = args.noise.or(file.noise).unwrap_or(0.02);
    let g_max = args.g_max.or(file.g_max).unwrap_or(600.0);
    if !(noise >= 0.0 && noise.is_finite()) {
        bail!("noise must be finite and >= 0");
    }
    if !(g_max > 0.0 && g_max.is_finite()) {
        bail!("g_max must be positive");
    }
    let ps = file.static_params.unwrap_or(StaticEmissionParams::REFERENCE);
    let pd = file.dynamic_params.unwrap_or(DynamicEmissionParams::REFERENCE);
    ps.check()?;
    pd.check()?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_writable(dir)?;
    }
    let samples = generate_synthetic_samples(&ps, &pd, g_max, count, noise, seed);
    let f = File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_samples_csv(BufWriter::new(f), &samples)?;

    let mut inputs = Vec::new();
    if let Some((p, text)) = config {
        inputs.push(InputHash::new("config", &p.to_string_lossy(), text.as_bytes()));
    }
    let mut manifest = Manifest::new(
        "synth",
        inputs,
        json!({ "count": count, "seed": seed, "noise": noise, "g_max_mw": g_max, "static": ps, "dynamic": pd }),
    );
    let written = std::fs::read(&args.out)?;
    manifest.results = json!({ "samples": samples.len(), "sha256": crate::manifest::sha256_hex(&written) });
    manifest.outputs = vec![args.out.to_string_lossy().into_owned()];
    let mut mpath = args.out.clone().into_os_string();
    mpath.push(".manifest.json");
    manifest.write(Path::new(&mpath))?;
    println!("wrote {} samples to {}", samples.len(), args.out.display());
    Ok(true)
}

pub fn export(args: &SolveArgs, file: &FileConfig) -> Result<bool> {
    let plan = SolvePlan::resolve(args, file)?;
    let input = load_case_input(&plan.case)?;
    ensure_writable(&plan.out)?;
    let mut counts = Vec::new();
    for &wind in &plan.wind {
        let case = if wind { input.case.clone() } else { input.case.without_wind() };
        let blocks = crate::solve::emission_blocks_for(&case, &plan)?;
        for level in &plan.levels {
            let (p, _) = assemble(&case, &blocks, level, &plan.assemble)?;
            let name = format!("{}_{}.mps", wind_label(wind), level.label);
            let path = plan.out.join(&name);
            std::fs::write(&path, write_mps(&p)).with_context(|| format!("writing {}", path.display()))?;
            let thermal = case.generators.iter().filter(|g| !g.is_wind()).count();
            let closed_form = VariableIndex::closed_form_count(
                case.network.buses.len(),
                case.generators.len(),
                thermal,
                case.coal_plants.len(),
                case.storages.len(),
                case.horizon,
                case.scenarios.len(),
            );
            println!("{name}: {} columns, {} rows, {} integer", p.num_cols(), p.num_rows(), p.integer_columns().len());
            counts.push(json!({
                "file": name,
                "wind": wind_label(wind),
                "label": level.label,
                "columns": p.num_cols(),
                "closed_form_columns": closed_form,
                "rows": p.num_rows(),
                "integer_columns": p.integer_columns().len(),
                "nonzeros": p.rows.iter().map(|r| r.coefs.len()).sum::<usize>(),
            }));
        }
    }
    let path = plan.out.join("counts.json");
    std::fs::write(&path, serde_json::to_string_pretty(&counts)? + "\n")?;
    Ok(true)
}

#[derive(Debug, Clone, clap::Args)]
pub struct ValidateArgs {
    /// Case JSON file, or `bundled`.
    #[arg(long)]
    pub case: Option<String>,
    /// Solution file to check against the assembled problem.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// Ramp-cost level the solution was computed for.
    #[arg(long, default_value = "zeros")]
    pub level: String,
    /// Wind setting the solution was computed for.
    #[arg(long, value_enum, default_value = "on")]
    pub wind: WindMode,
    #[arg(long)]
    pub carbon_price: Option<f64>,
    #[arg(long)]
    pub damage_mult: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Largest residual accepted.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

pub fn validate(args: &ValidateArgs, file: &FileConfig) -> Result<bool> {
    let spec = args.case.clone().or_else(|| file.case.clone()).unwrap_or_else(|| BUNDLED.into());
    let input = load_case_input(&spec)?;
    let c = &input.case;
    println!(
        "case {:?}: {} buses, {} lines, {} generators ({} coal), {} storages, {} slices, {} scenarios",
        c.name,
        c.network.buses.len(),
        c.network.lines.len(),
        c.generators.len(),
        c.coal_plants.len(),
        c.storages.len(),
        c.horizon,
        c.scenarios.len()
    );
    let Some(sol_path) = &args.solution else {
        println!("case is valid");
        return Ok(true);
    };
    let wind = match args.wind {
        WindMode::On => true,
        WindMode::Off => false,
        WindMode::Both => bail!("--wind must be on or off when checking a solution"),
    };
    let solve_args = SolveArgs {
        case: Some(spec),
        levels: vec![args.level.clone()],
        wind: Some(args.wind),
        carbon_price: args.carbon_price,
        damage_mult: args.damage_mult,
        tau: args.tau,
        out: Some(PathBuf::from(".")),
        jobs: Some(1),
        ..SolveArgs::default()
    };
    let plan = SolvePlan::resolve(&solve_args, file)?;
    let case = if wind { c.clone() } else { c.without_wind() };
    let blocks = crate::solve::emission_blocks_for(&case, &plan)?;
    let level = parse_level(&args.level)?;
    let (p, _) = assemble(&case, &blocks, &level, &plan.assemble)?;
    let text = std::fs::read_to_string(sol_path).with_context(|| format!("reading {}", sol_path.display()))?;
    let x = read_solution(&p, &text)?;
    let report = check_uc_solution(&p, &x, args.tol)?;
    for (name, v) in &report.families {
        println!("{name:<24} {v:.3e}");
    }
    println!("{:<24} {:.3e}", "integrality", report.max_integrality_violation);
    println!("{:<24} {:.6}", "objective", p.objective(&x));
    if report.passed {
        println!("solution is feasible within {:e}", args.tol);
    } else {
        println!("solution violates the model (max {:.3e})", report.max_violation());
    }
    Ok(report.passed)
}

#[derive(Debug, Clone, clap::Args)]
pub struct SolveMpsArgs {
    pub mps: PathBuf,
    pub sol: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

/// Solves an MPS file with the built-in engine and writes a solution file.
/// Used as a stand-in external solver.
pub fn solve_mps(args: &SolveMpsArgs) -> Result<bool> {
    let text = std::fs::read_to_string(&args.mps).with_context(|| format!("reading {}", args.mps.display()))?;
    let p = read_mps(&text)?;
    let mut opts: SolverOptions = args.solver.resolve(&FileConfig::default())?;
    opts.external_solver = None;
    let sol = solve_milp(&p, &opts)?;
    std::fs::write(&args.sol, write_solution(&p, &sol)).with_context(|| format!("writing {}", args.sol.display()))?;
    Ok(sol.has_solution())
}
