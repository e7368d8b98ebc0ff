//! `carnot`: catalog listing, scenario validation, differentiation, Jacobian
//! and area-formula checks, and the ℍ² counterexample.
//!
//! Exit codes: 0 success, 1 a mathematical check failed, 2 invalid scenario
//! semantics, 64 parse or usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use carnot::calculus::{pansu_diff, CalculusError, DiffConfig};
use carnot::graph::{linear_from_hom_tol, projection_residual, GraphFunction, HomogeneousHom};
use carnot::measure::{area_check, jacobian, AreaConfig, CoveringConfig, MeasureError, MeasureEstimate};
use carnot::report::{fmt_f64, fmt_list, Report};
use carnot::scenario::{parse_ladder, Scenario, ScenarioError};
use carnot::{catalog, counterexample, validate_algebra, CarnotGroup, Splitting};

const EXIT_VERIFY: u8 = 1;
const EXIT_SEMANTIC: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "carnot", version, about = "Calculus and area-formula checks on Carnot groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(clap::Args, Debug, Clone, Default)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    /// `2^-3..2^-12` or an explicit list such as `0.1,0.05,0.025`.
    #[arg(long)]
    ladder: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the built-in groups, or print one group file.
    Catalog {
        #[arg(long)]
        group: Option<String>,
    },
    /// Check a group or scenario file: algebra axioms, splitting, φ and domain.
    Validate {
        #[arg(long, conflicts_with = "group", required_unless_present = "group")]
        scenario: Option<PathBuf>,
        #[arg(long)]
        group: Option<PathBuf>,
    },
    /// The constant graph over a non-normal complement in ℍ².
    Counterexample {
        #[command(flatten)]
        o: Overrides,
    },
    /// Pansu differential of the graph map at the scenario's base point.
    Differentiate {
        #[arg(long)]
        scenario: PathBuf,
        /// W-coordinates, e.g. `"1/2 0"`.
        #[arg(long)]
        base_point: Option<String>,
        #[command(flatten)]
        o: Overrides,
    },
    /// Both sides of the area formula over the scenario's `area box`.
    AreaCheck {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
        /// Largest accepted relative discrepancy.
        #[arg(long, default_value_t = 0.05)]
        max_discrepancy: f64,
        #[command(flatten)]
        o: Overrides,
    },
    /// Jacobian of dΦ at the base point, or of the embedding of W when the
    /// scenario has no φ.
    Jacobian {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        base_point: Option<String>,
        #[command(flatten)]
        o: Overrides,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(m: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: m.into() }
    }
    fn semantic(m: impl Into<String>) -> Self {
        Failure { code: EXIT_SEMANTIC, message: m.into() }
    }
    fn verify(m: impl Into<String>) -> Self {
        Failure { code: EXIT_VERIFY, message: m.into() }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure { code: if e.is_parse() { EXIT_USAGE } else { EXIT_SEMANTIC }, message: e.to_string() }
    }
}

impl From<CalculusError> for Failure {
    fn from(e: CalculusError) -> Self {
        match e {
            CalculusError::NotDifferentiable(_) | CalculusError::TooFewSamples(_) => Failure::verify(e.to_string()),
            _ => Failure::semantic(e.to_string()),
        }
    }
}

impl From<MeasureError> for Failure {
    fn from(e: MeasureError) -> Self {
        match e {
            MeasureError::Calculus(c) => c.into(),
            MeasureError::DifferentiationFailures { .. } => Failure::verify(e.to_string()),
            _ => Failure::semantic(e.to_string()),
        }
    }
}

/// A finished report and whether its checks passed.
struct Outcome {
    report: Report,
    pass: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli.command).and_then(|o| emit(&o, cli.out.as_deref()).map(|()| o.pass)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn emit(o: &Outcome, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = o.report.to_string();
    text.push_str(&format!("status = {}\n", if o.pass { "pass" } else { "fail" }));
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cmd: &Command) -> Result<Outcome, Failure> {
    match cmd {
        Command::Catalog { group } => cmd_catalog(group.as_deref()),
        Command::Validate { scenario, group } => cmd_validate(scenario.as_deref().or(group.as_deref()).expect("clap")),
        Command::Counterexample { o } => cmd_counterexample(o),
        Command::Differentiate { scenario, base_point, o } => cmd_differentiate(scenario, base_point.as_deref(), o),
        Command::AreaCheck { scenario, samples, max_discrepancy, o } => {
            cmd_area(scenario, *samples, *max_discrepancy, o)
        }
        Command::Jacobian { scenario, base_point, o } => cmd_jacobian(scenario, base_point.as_deref(), o),
    }
}

fn cmd_catalog(group: Option<&str>) -> Result<Outcome, Failure> {
    let mut r = Report::new();
    match group {
        Some(name) => {
            let text = catalog::by_name(name).ok_or_else(|| Failure::semantic(format!("no catalog group `{name}`")))?;
            r.kv("group", name);
            let g = catalog::group(name);
            describe_group(&mut r, &g);
            r.table("file", &["text"], &text.lines().map(|l| vec![l.to_string()]).collect::<Vec<_>>());
        }
        None => {
            let rows: Vec<Vec<String>> = catalog::all()
                .iter()
                .map(|g| {
                    let dims: Vec<String> = g.algebra().layer_dims().iter().map(|d| d.to_string()).collect();
                    vec![
                        g.algebra().name().to_string(),
                        g.dim().to_string(),
                        g.step().to_string(),
                        g.homogeneous_dimension().to_string(),
                        dims.join(","),
                    ]
                })
                .collect();
            r.kv("groups", rows.len());
            r.table("catalog", &["name", "dim", "step", "Q", "layers"], &rows);
        }
    }
    Ok(Outcome { report: r, pass: true })
}

fn describe_group(r: &mut Report, g: &CarnotGroup) {
    let dims: Vec<String> = g.algebra().layer_dims().iter().map(|d| d.to_string()).collect();
    r.kv("dim", g.dim())
        .kv("step", g.step())
        .kv("layer_dims", dims.join(" "))
        .kv("homogeneous_dimension", g.homogeneous_dimension());
}

struct Loaded {
    scenario: Scenario,
    group: CarnotGroup,
    splitting: Option<Arc<Splitting>>,
    phi: Option<GraphFunction>,
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let scenario = Scenario::read(path)?;
    let (group, referenced) = scenario.resolve_group()?;
    let has_split = scenario.has_splitting() || referenced.as_ref().is_some_and(Scenario::has_splitting);
    let splitting = if has_split { Some(Arc::new(scenario.splitting(&group, referenced.as_ref())?)) } else { None };
    let phi = match &splitting {
        Some(s) if scenario.has_phi() || scenario.area_box().is_some() || scenario.base_point.is_some() => {
            Some(scenario.graph_function(s.clone())?)
        }
        _ => None,
    };
    Ok(Loaded { scenario, group, splitting, phi })
}

fn cmd_validate(path: &Path) -> Result<Outcome, Failure> {
    let l = load(path)?;
    let mut r = Report::new();
    r.kv("file", path.display()).kv("group", l.group.algebra().name());
    describe_group(&mut r, &l.group);
    let v = validate_algebra(l.group.algebra()).map_err(|e| Failure::semantic(e.to_string()))?;
    if !v.is_valid() {
        return Err(Failure::semantic(format!("{}: {v}", path.display())));
    }
    r.kv("algebra", "valid");
    if let Some(s) = &l.splitting {
        r.kv("splitting", "valid").kv("w_dim", s.w_dim()).kv("l_dim", s.l_dim()).kv("k", s.k()).kv("l_normal", s.is_normal());
    }
    if let Some(phi) = &l.phi {
        let m = phi.splitting().w_dim();
        if let Some(b) = l.scenario.area_box() {
            if b.len() != m {
                return Err(Failure::semantic(format!("area box has {} ranges, W has dimension {m}", b.len())));
            }
            let corners_inside = [b.iter().map(|r| r.0).collect::<Vec<_>>(), b.iter().map(|r| r.1).collect()]
                .iter()
                .all(|c| phi.contains_w_coords(c));
            if !corners_inside {
                return Err(Failure::semantic("area box is not inside the domain"));
            }
        }
        if let Some(a0) = &l.scenario.base_point {
            if a0.len() != m || !phi.contains_w_coords(a0) {
                return Err(Failure::semantic("base point is not a W-point of the domain"));
            }
        }
        r.kv("phi", "valid");
    }
    Ok(Outcome { report: r, pass: true })
}

fn ladder(o: &Overrides, scenario: Option<&Scenario>) -> Result<Option<Vec<f64>>, Failure> {
    match &o.ladder {
        Some(text) => parse_ladder(text).map(Some).map_err(|e| Failure::usage(format!("--ladder: {e}"))),
        None => Ok(scenario.and_then(|s| s.ladder.clone())),
    }
}

fn cmd_counterexample(o: &Overrides) -> Result<Outcome, Failure> {
    let eps = ladder(o, None)?.unwrap_or_else(counterexample::default_eps_ladder);
    if eps.len() < 2 || eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Failure::usage("--ladder needs at least two positive values"));
    }
    let seed = o.seed.unwrap_or(0);
    let rep = counterexample::run(&eps, 200, seed).map_err(|e| Failure::semantic(e.to_string()))?;
    let tol = o.tol.unwrap_or(1e-12);
    let values_ok = rep.max_error <= tol;
    let slope_ok = (rep.graph_slope - 0.5).abs() <= 0.05 && (rep.w_slope - 1.0).abs() <= 0.01;
    let mut r = Report::new();
    r.kv("group", "heisenberg2")
        .kv("w", "span{X2,X3,X4,X5}")
        .kv("l", "span{X1}")
        .kv("l_normal", false)
        .kv("phi", "1 0 0 0 0")
        .num("max_error", rep.max_error)
        .num("tol", tol)
        .kv("closed_form_match", values_ok)
        .num("graph_slope", rep.graph_slope)
        .num("w_slope", rep.w_slope)
        .num("lip_estimate", rep.lip.value)
        .kv("lip_pairs", rep.lip.pairs)
        .kv("seed", seed);
    let rows: Vec<Vec<String>> = rep
        .eps
        .iter()
        .zip(&rep.values)
        .zip(rep.graph_dist.iter().zip(&rep.w_norm))
        .map(|((e, v), (d, n))| vec![fmt_f64(*e), fmt_list(v), fmt_f64(*d), fmt_f64(*n)])
        .collect();
    r.table("scales", &["eps", "Phi(0,0,eps,0,0)", "hnorm(Phi(0)^-1*Phi)", "hnorm(w)"], &rows);
    Ok(Outcome { report: r, pass: values_ok && slope_ok })
}

fn parse_point(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            carnot::scalar::parse_rational(t)
                .map(|r| carnot::Scalar::to_f64(&r))
                .map_err(|e| Failure::usage(format!("--base-point: {e}")))
        })
        .collect()
}

fn diff_config(base: DiffConfig, o: &Overrides, sc: &Scenario) -> Result<DiffConfig, Failure> {
    let mut cfg = base;
    if let Some(l) = ladder(o, Some(sc))? {
        cfg = cfg.with_ladder(l);
    }
    if let Some(t) = o.tol.or(sc.tol) {
        cfg = cfg.with_tol(t);
    }
    Ok(cfg)
}

fn need_phi(l: &Loaded) -> Result<&GraphFunction, Failure> {
    l.phi.as_ref().ok_or_else(|| Failure::semantic("scenario needs a splitting and `phi poly:` lines"))
}

fn base_point(arg: Option<&str>, l: &Loaded) -> Result<Vec<f64>, Failure> {
    match arg {
        Some(t) => parse_point(t),
        None => l.scenario.base_point.clone().ok_or_else(|| Failure::semantic("no base point (`base_point =` or --base-point)")),
    }
}

fn matrix_rows(h: &HomogeneousHom) -> Vec<Vec<String>> {
    h.matrix_f64().iter().map(|row| row.iter().map(|&x| fmt_f64(x)).collect()).collect()
}

fn cmd_differentiate(path: &Path, bp: Option<&str>, o: &Overrides) -> Result<Outcome, Failure> {
    let l = load(path)?;
    let phi = need_phi(&l)?;
    let a0 = base_point(bp, &l)?;
    let cfg = diff_config(DiffConfig::default(), o, &l.scenario)?;
    let rep = pansu_diff(phi, &a0, &cfg)?;
    let proj = projection_residual(&rep.hom, phi.splitting());
    let pass = rep.converged && proj <= cfg.tol;
    let mut r = Report::new();
    r.kv("group", l.group.algebra().name())
        .nums("base_point", &a0)
        .kv("arithmetic", format!("{:?}", rep.arithmetic).to_lowercase())
        .kv("converged", rep.converged)
        .kv("monotone", rep.monotone)
        .num("tol", cfg.tol)
        .num("final_residual", rep.final_residual)
        .num("projection_residual", proj)
        .num("bracket_defect", rep.bracket_defect)
        .nums("residuals", &rep.residuals);
    let cauchy_col = |i: usize| if i >= 3 { fmt_f64(rep.cauchy[i - 3]) } else { "-".into() };
    let rows: Vec<Vec<String>> =
        rep.scales.iter().enumerate().map(|(i, &t)| vec![fmt_f64(t), fmt_f64(rep.residuals[i]), cauchy_col(i)]).collect();
    r.table("scales", &["t", "residual", "cauchy"], &rows);
    r.table("dPhi", &["rows = G coordinates, columns = W basis"], &matrix_rows(&rep.hom));
    if pass {
        let ell = linear_from_hom_tol(&rep.hom, phi.splitting_arc().clone(), cfg.tol).map_err(|e| Failure::verify(e.to_string()))?;
        let m = phi.splitting().w_dim();
        let rows: Vec<Vec<String>> = (0..m)
            .map(|j| {
                let e: Vec<f64> = (0..m).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
                vec![format!("w{}", j + 1), fmt_list(&phi.splitting().l_coords(&ell.ell(&e)))]
            })
            .collect();
        r.table("intrinsic_differential", &["basis", "l_coords"], &rows);
    }
    Ok(Outcome { report: r, pass })
}

fn covering_config(sc: &Scenario) -> CoveringConfig {
    let mut c = CoveringConfig::default();
    if let Some(d) = &sc.deltas {
        c.deltas = d.clone();
    }
    if let Some(b) = sc.ball_samples {
        c.ball_points = b;
    }
    c
}

fn estimate_row(name: &str, e: &MeasureEstimate) -> Vec<Vec<String>> {
    e.levels
        .iter()
        .map(|l| vec![name.to_string(), fmt_f64(l.delta), l.balls.to_string(), fmt_f64(l.value)])
        .collect()
}

fn cmd_area(path: &Path, samples: Option<usize>, max_disc: f64, o: &Overrides) -> Result<Outcome, Failure> {
    let l = load(path)?;
    let phi = need_phi(&l)?;
    let sc = &l.scenario;
    let v = sc.area_box().ok_or_else(|| Failure::semantic("scenario has no `area box:`"))?.to_vec();
    let base = AreaConfig::default();
    let mut cfg = AreaConfig { covering: covering_config(sc), diff: diff_config(base.diff.clone(), o, sc)?, ..base };
    if let Some(n) = samples.or(sc.samples) {
        cfg.samples = n;
    }
    if let Some(n) = sc.lhs_samples {
        cfg.lhs_points = n;
    }
    cfg.seed = o.seed.or(sc.seed).unwrap_or(0);
    let rep = area_check(phi, &v, &cfg)?;
    let pass = rep.rel_discrepancy <= max_disc;
    let mut r = Report::new();
    r.kv("group", l.group.algebra().name())
        .kv("k", rep.k)
        .kv("area_box", v.iter().map(|(a, b)| format!("{}..{}", fmt_f64(*a), fmt_f64(*b))).collect::<Vec<_>>().join(" "))
        .num("lhs", rep.lhs.value)
        .num("lhs_err", rep.lhs.error)
        .num("rhs", rep.rhs)
        .num("rhs_err", rep.rhs_err)
        .num("rel_discrepancy", rep.rel_discrepancy)
        .num("max_discrepancy", max_disc)
        .num("domain_content", rep.domain_content.value)
        .num("mean_jacobian", rep.mean_jacobian)
        .num("jacobian_std_err", rep.jacobian_std_err)
        .kv("samples", rep.samples)
        .kv("failures", rep.failures)
        .kv("seed", rep.seed);
    if l.group.algebra().is_abelian() {
        if let Ok(oracle) = carnot::classical_area_oracle(phi, &v) {
            r.num("classical_oracle", oracle.value);
        }
    }
    let mut rows = estimate_row("lhs", &rep.lhs);
    rows.extend(estimate_row("domain", &rep.domain_content));
    r.table("coverings", &["set", "delta", "balls", "content"], &rows);
    Ok(Outcome { report: r, pass })
}

fn cmd_jacobian(path: &Path, bp: Option<&str>, o: &Overrides) -> Result<Outcome, Failure> {
    let l = load(path)?;
    let s = l.splitting.as_ref().ok_or_else(|| Failure::semantic("scenario needs `subgroup W` and `subgroup L`"))?;
    let mut r = Report::new();
    r.kv("group", l.group.algebra().name()).kv("k", s.k());
    let hom = match (&l.phi, bp.is_some() || l.scenario.base_point.is_some()) {
        (Some(phi), true) => {
            let a0 = base_point(bp, &l)?;
            let cfg = diff_config(DiffConfig::default(), o, &l.scenario)?;
            let rep = pansu_diff(phi, &a0, &cfg)?;
            if !rep.converged {
                return Err(Failure::verify("the differential did not converge"));
            }
            r.kv("map", "dPhi").nums("base_point", &a0);
            rep.hom
        }
        _ => {
            r.kv("map", "embedding");
            HomogeneousHom::embedding(&l.group, s.w())
        }
    };
    let j = jacobian(&hom, &covering_config(&l.scenario))?;
    r.num("jacobian", j.value.value)
        .num("jacobian_err", j.value.error)
        .num("numerator", j.numerator.value)
        .num("denominator", j.denominator.value);
    let mut rows = estimate_row("image", &j.numerator);
    rows.extend(estimate_row("ball", &j.denominator));
    r.table("coverings", &["set", "delta", "balls", "content"], &rows);
    r.table("map", &["rows = G coordinates, columns = W basis"], &matrix_rows(&hom));
    Ok(Outcome { report: r, pass: j.value.value.is_finite() })
}
