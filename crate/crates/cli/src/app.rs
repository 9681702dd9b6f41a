use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use quelab_core::eigenforms::Eigenform;
use quelab_core::massmeasure::{
    rect_mass, siegel_mass, sym2_l_value, vertical_mass, MassProfile, Rectangle, SiegelDomain, DEFAULT_QUAD_TOL,
    DEFAULT_Y_SPLIT,
};
use quelab_core::verify::{dec, fx, Lab, ScenarioReport, Verdict};
use serde_json::{json, Map, Value};

use crate::cache::Cache;
use crate::config::{check_precision, RunConfig, RunError, Scenario, ScenarioParams, UsageError};
use crate::emit::{self, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "QUELAB_CACHE_DIR";
const DEFAULT_CACHE_DIR: &str = ".quelab-cache";
const DIGITS: usize = 30;

#[derive(Parser, Debug)]
#[command(name = "quelab", version, about = "Mass equidistribution experiments for level-one Hecke eigenforms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Working precision in bits (at least 128).
    #[arg(long, default_value_t = crate::config::DEFAULT_PRECISION_BITS)]
    precision: u32,
    /// Cache directory; falls back to $QUELAB_CACHE_DIR, then .quelab-cache.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Compute everything without reading or writing the cache.
    #[arg(long)]
    no_cache: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Height splitting quadrature from the Parseval strip.
    #[arg(long = "Y", default_value_t = DEFAULT_Y_SPLIT)]
    y_split: f64,
    #[arg(long, default_value_t = DEFAULT_QUAD_TOL)]
    quad_tol: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print normalized eigenform coefficients lambda(n).
    Eigenforms {
        #[arg(long)]
        weight: u32,
        #[arg(long)]
        ncoeffs: usize,
        /// Significant digits printed per coefficient.
        #[arg(long, default_value_t = DIGITS)]
        digits: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Petersson norm and symmetric-square value of one form.
    Norm {
        #[arg(long)]
        weight: u32,
        #[arg(long)]
        index: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Normalized mass of a region.
    Mass {
        #[command(subcommand)]
        region: MassRegion,
    },
    /// Run one verification scenario.
    Verify {
        #[arg(value_enum)]
        scenario: Scenario,
        #[command(flatten)]
        params: ScenarioParams,
        /// Also write plot data (x,y CSV) here.
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Record wall-clock time in runtime_s.
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run the scenarios listed in a TOML config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum MassRegion {
    /// Rectangle (a, b) x (t1, t2); t2 defaults to infinity.
    Rect {
        #[arg(long)]
        weight: u32,
        #[arg(long)]
        index: usize,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long)]
        t1: f64,
        #[arg(long)]
        t2: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Siegel set (a, b) x (t, infinity) in log space.
    Siegel {
        #[arg(long)]
        weight: u32,
        #[arg(long)]
        index: usize,
        #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        b: f64,
        #[arg(long)]
        t: f64,
        #[command(flatten)]
        common: Common,
    },
}

fn cache_dir(flag: Option<&Path>, configured: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
        .or_else(|| configured.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
}

fn set_threads(n: Option<usize>) {
    if let Some(n) = n {
        // Fails only if the pool already exists, e.g. across in-process calls.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn make_lab(precision: u32, dir: Option<PathBuf>, y_split: f64, quad_tol: f64) -> Result<Lab, RunError> {
    check_precision(precision)?;
    if !(y_split >= 1.0) || !(quad_tol > 0.0) {
        return Err(UsageError("need Y >= 1 and quad-tol > 0".into()).into());
    }
    let mut lab = match dir {
        Some(d) => Lab::with_provider(precision, Box::new(Arc::new(Cache::open(d)?))),
        None => Lab::new(precision),
    };
    lab.y_split = y_split;
    lab.quad_tol = quad_tol;
    Ok(lab)
}

impl Common {
    fn lab(&self) -> Result<Lab, RunError> {
        set_threads(self.threads);
        let dir = (!self.no_cache).then(|| cache_dir(self.cache_dir.as_deref(), None));
        make_lab(self.precision, dir, self.y_split, self.quad_tol)
    }

    fn write(&self, bytes: &[u8], out: &mut dyn Write) -> Result<(), RunError> {
        match &self.out {
            Some(p) => fs::write(p, bytes)?,
            None => out.write_all(bytes)?,
        }
        Ok(())
    }
}

/// A single keyed record as JSON or a one-row CSV.
fn record(fields: Vec<(&str, Value)>, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let o: Map<String, Value> = fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
            let mut s = serde_json::to_string_pretty(&Value::Object(o)).expect("json");
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(fields.iter().map(|f| f.0)).expect("csv");
            w.write_record(fields.iter().map(|f| match &f.1 {
                Value::String(s) => s.clone(),
                v => v.to_string(),
            }))
            .expect("csv");
            w.into_inner().expect("csv")
        }
    }
}

fn pick_form(lab: &Lab, k: u32, index: usize, t_min: f64) -> Result<(Eigenform, MassProfile), RunError> {
    let (basis, profiles) = lab.profiles(k, lab.mass_ncoeffs(k, t_min)?)?;
    let f = basis
        .form(index)
        .ok_or_else(|| UsageError(format!("weight {k} has {} forms, index {index} is out of range", basis.dim())))?;
    Ok((f.clone(), profiles[index - 1].clone()))
}

fn eigenforms(k: u32, n: usize, digits: usize, common: &Common, out: &mut dyn Write) -> Result<i32, RunError> {
    let basis = common.lab()?.basis(k, n)?;
    let bytes = match common.format {
        Format::Json => {
            let forms: Vec<Value> = basis
                .forms()
                .iter()
                .map(|f| {
                    json!({
                        "index": f.index(),
                        "t2_eigenvalue": dec(f.t2_eigenvalue(), digits),
                        "lambda": f.lambdas()[..n].iter().map(|l| dec(l, digits)).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let v = json!({
                "weight": k,
                "dim": basis.dim(),
                "ncoeffs": n,
                "precision_bits": basis.precision_bits(),
                "charpoly": basis.charpoly().coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "forms": forms,
            });
            let mut s = serde_json::to_string_pretty(&v).expect("json");
            s.push('\n');
            s.into_bytes()
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(["k", "index", "n", "lambda"]).expect("csv");
            for f in basis.forms() {
                for (i, l) in f.lambdas()[..n].iter().enumerate() {
                    w.write_record([k.to_string(), f.index().to_string(), (i + 1).to_string(), dec(l, digits)])
                        .expect("csv");
                }
            }
            w.into_inner().expect("csv")
        }
    };
    common.write(&bytes, out)?;
    Ok(EXIT_OK)
}

fn norm(k: u32, index: usize, common: &Common, out: &mut dyn Write) -> Result<i32, RunError> {
    let lab = common.lab()?;
    let (f, p) = pick_form(&lab, k, index, common.y_split)?;
    let s = sym2_l_value(&f, &p.log_norm_sq)?;
    let bytes = record(
        vec![
            ("weight", json!(k)),
            ("index", json!(index)),
            ("y_split", json!(common.y_split)),
            ("quad_tol", json!(common.quad_tol)),
            ("norm_sq", json!(dec(&p.log_norm_sq.to_float()?, DIGITS))),
            ("log_norm_sq", json!(dec(p.log_norm_sq.logmag(), DIGITS))),
            ("sym2_L", json!(dec(&s.l, DIGITS))),
            ("sym2_R", json!(dec(&s.r, DIGITS))),
        ],
        common.format,
    );
    common.write(&bytes, out)?;
    Ok(EXIT_OK)
}

fn mass(region: &MassRegion, out: &mut dyn Write) -> Result<i32, RunError> {
    match region {
        MassRegion::Rect {
            weight,
            index,
            a,
            b,
            t1,
            t2,
            common,
        } => {
            let lab = common.lab()?;
            let rect = Rectangle::new(*a, *b, *t1, *t2)?;
            let (f, p) = pick_form(&lab, *weight, *index, *t1)?;
            let m = rect_mass(&f, &rect, &p)?;
            let mut fields = vec![
                ("weight", json!(weight)),
                ("index", json!(index)),
                ("a", json!(a)),
                ("b", json!(b)),
                ("t1", json!(t1)),
                ("t2", json!(t2)),
                ("mass", json!(dec(&m.value.to_float()?, DIGITS))),
                ("error_bound", json!(dec(&m.error.to_float()?, 6))),
                ("n_star", json!(m.n_star)),
            ];
            if t2.is_none() {
                let v = vertical_mass(&f, *t1, &p)?;
                fields.push(("vertical_mass", json!(dec(&v.value.to_float()?, DIGITS))));
            }
            common.write(&record(fields, common.format), out)?;
        }
        MassRegion::Siegel {
            weight,
            index,
            a,
            b,
            t,
            common,
        } => {
            let lab = common.lab()?;
            let dom = SiegelDomain::new(*a, *b, *t)?;
            let (f, p) = pick_form(&lab, *weight, *index, *t)?;
            let s = siegel_mass(&f, &dom, &p)?;
            let fields = vec![
                ("weight", json!(weight)),
                ("index", json!(index)),
                ("a", json!(a)),
                ("b", json!(b)),
                ("t", json!(t)),
                ("log_mu", json!(fx(s.log_mu))),
                ("log_bound", json!(fx(s.log_bound))),
                ("slack", json!(fx(s.slack))),
                ("in_hypothesis", json!(s.in_hypothesis)),
            ];
            common.write(&record(fields, common.format), out)?;
        }
    }
    Ok(EXIT_OK)
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Fail => EXIT_FAIL,
        Verdict::Pass | Verdict::TrendOnly => EXIT_OK,
    }
}

fn timed(scenario: Scenario, params: &ScenarioParams, lab: &Lab, timing: bool) -> Result<ScenarioReport, RunError> {
    let start = Instant::now();
    let mut r = params.run(scenario, lab)?;
    if timing {
        r.runtime_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(r)
}

fn verify(
    scenario: Scenario,
    params: &ScenarioParams,
    plot: Option<&Path>,
    timing: bool,
    common: &Common,
    out: &mut dyn Write,
) -> Result<i32, RunError> {
    let lab = common.lab()?;
    let report = timed(scenario, params, &lab, timing)?;
    common.write(&emit::emit(&report, common.format), out)?;
    if let Some(p) = plot {
        fs::write(p, emit::plot_csv(&report))?;
    }
    Ok(verdict_code(report.verdict))
}

fn sweep(config: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, RunError> {
    let text = fs::read_to_string(config)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", config.display())))?;
    let c = RunConfig::parse(&text)?;
    set_threads(c.threads);
    let dir = cache_dir(None, c.cache_dir.as_deref());
    let lab = make_lab(c.precision_bits, Some(dir), c.y_split, c.quad_tol)?;
    fs::create_dir_all(&c.out_dir)?;
    let mut code = EXIT_OK;
    for s in &c.scenario {
        let stem = s.stem();
        match timed(s.kind, &s.params, &lab, c.timing) {
            Ok(report) => {
                let path = c.out_dir.join(format!("{stem}.{}", c.format.extension()));
                fs::write(&path, emit::emit(&report, c.format))?;
                fs::write(c.out_dir.join(format!("{stem}.plot.csv")), emit::plot_csv(&report))?;
                writeln!(out, "{stem}\t{}\t{}", report.verdict.as_str(), path.display())?;
                code = code.max(verdict_code(report.verdict));
            }
            Err(e) => {
                writeln!(err, "{stem}: {e}")?;
                writeln!(out, "{stem}\tERROR")?;
                code = code.max(exit_code(&e));
            }
        }
    }
    Ok(code)
}

fn exit_code(e: &RunError) -> i32 {
    match e {
        RunError::Usage(_) => EXIT_USAGE,
        RunError::Numeric(_) | RunError::Io(_) => EXIT_NUMERIC,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Eigenforms {
            weight,
            ncoeffs,
            digits,
            common,
        } => eigenforms(*weight, *ncoeffs, *digits, common, out),
        Command::Norm { weight, index, common } => norm(*weight, *index, common, out),
        Command::Mass { region } => mass(region, out),
        Command::Verify {
            scenario,
            params,
            plot,
            timing,
            common,
        } => verify(*scenario, params, plot.as_deref(), *timing, common, out),
        Command::Sweep { config } => sweep(config, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "quelab: {e}");
            exit_code(&e)
        }
    }
}
