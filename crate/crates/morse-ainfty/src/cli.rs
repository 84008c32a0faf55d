//! Batch front end. Every report is JSON with a top-level `"schema"` field;
//! rationals are written as `"p/q"` strings.

use crate::ainfty::{coeff_json, convert_convention, verify_structure, AInftyStructure, AlgebraError, Report};
use crate::continuation::{verify_continuation, BaseKind, CylinderSetup};
use crate::morse::{build_complex, check_d_squared, MorseComplexData, MorseError, Variant};
use crate::plflow::geom::{fmt_q, parse_q};
use crate::plflow::{
    assemble_structure, complex_data, engine_with, is_unimodular_2x2, product_pairing, AssembleOptions, Engine, FlowError, MeshJson,
    PLFunction, PLSurface, VertexKind, Q,
};
use crate::signs::{Convention, PrefactorStrategy};
use crate::trees::{catalan, enumerate_generic};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const SCHEMA: &str = "morse-ainfty/1";

#[derive(Debug, Parser)]
#[command(name = "morse-ainfty", version, about = "Exact Morse complexes and A-infinity operations on surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generic trees with `d` leaves.
    Trees {
        #[arg(long)]
        d: usize,
    },
    /// Morse homology of a mesh or of bundled complex data.
    Homology {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "N")]
        variant: Variant,
        #[command(flatten)]
        run: RunOpts,
    },
    /// The product `m_2` of a mesh and its pairing on degree-one classes.
    Products {
        #[arg(long)]
        mesh: PathBuf,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Checks the A-infinity relations of a mesh or a stored structure.
    VerifyAinfty {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Continuation morphism between the structures of two seeds.
    Continuation {
        #[arg(long)]
        setup: PathBuf,
        /// Overrides `maxd` of the setup file.
        #[arg(long)]
        maxd: Option<usize>,
    },
    /// Rewrites a stored structure in the other sign convention.
    ConvertConvention {
        #[arg(long)]
        structure: PathBuf,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Input {
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    #[arg(long)]
    pub complex: Option<PathBuf>,
    #[arg(long)]
    pub structure: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunOpts {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub maxd: usize,
    #[arg(long, default_value = "Keller")]
    pub convention: Convention,
    #[arg(long, default_value = "Trivial")]
    pub prefactor: PrefactorStrategy,
    /// Relative size of the value perturbation used on reseeds.
    #[arg(long, default_value = "1/4")]
    pub epsilon: String,
    /// Reseeds allowed after a degenerate attempt.
    #[arg(long, default_value_t = 5)]
    pub max_retries: usize,
}

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Degenerate(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Other(_) => 1,
            CliError::Degenerate(_) => 3,
            CliError::Parse(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Degenerate(_) => "degenerate",
            CliError::Other(_) => "error",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Parse(m) | CliError::Degenerate(m) | CliError::Other(m) => m,
        }
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::Degenerate(_) | FlowError::PerturbationFailed(_) => CliError::Degenerate(e.to_string()),
            FlowError::Parse(_) => CliError::Parse(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        match e {
            AlgebraError::Malformed(_) | AlgebraError::ArityMismatch(_) => CliError::Parse(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<MorseError> for CliError {
    fn from(e: MorseError) -> Self {
        match e {
            MorseError::InvalidPoint(_) | MorseError::GradingViolation(_) => CliError::Parse(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

/// A finished command: the report body and whether its checks passed.
pub struct Outcome {
    pub body: String,
    pub passed: bool,
}

impl Outcome {
    fn json(mut v: Value, passed: bool) -> Self {
        if let Value::Object(m) = &mut v {
            m.insert("schema".into(), json!(SCHEMA));
        }
        Outcome { body: serde_json::to_string_pretty(&v).expect("reports serialize") + "\n", passed }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn load_mesh(path: &Path) -> Result<(PLSurface, PLFunction), CliError> {
    let m: MeshJson = serde_json::from_str(&read(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let s = PLSurface::from_json(&m)?;
    let values = m.values.as_ref().ok_or_else(|| CliError::Parse(format!("{}: mesh has no values", path.display())))?;
    let f = PLFunction::from_json(&s, values)?;
    Ok((s, f))
}

fn epsilon(run: &RunOpts) -> Result<Q, CliError> {
    parse_q(&run.epsilon)
        .filter(|e| *e > Q::default())
        .ok_or_else(|| CliError::Parse(format!("epsilon {} is not a positive rational", run.epsilon)))
}

fn options(run: &RunOpts, maxd: usize) -> Result<AssembleOptions, CliError> {
    if maxd == 0 {
        return Err(CliError::Parse("maxd must be at least 1".into()));
    }
    let mut o = AssembleOptions::new(run.seed, maxd);
    o.strategy = run.prefactor;
    o.convention = run.convention;
    o.epsilon = epsilon(run)?;
    o.max_retries = run.max_retries;
    Ok(o)
}

/// Flow data of the first admissible attempt.
fn engine_retry(s: &PLSurface, f: &PLFunction, opts: &AssembleOptions) -> Result<(Engine, usize, Vec<String>), CliError> {
    let mut failures = Vec::new();
    for attempt in 0..=opts.max_retries {
        match engine_with(s, f, opts.seed, attempt as u64, opts.epsilon.clone()) {
            Ok(e) => return Ok((e, attempt, failures)),
            Err(FlowError::Degenerate(m)) => failures.push(m),
            Err(e) => return Err(e.into()),
        }
    }
    Err(CliError::Degenerate(format!("no admissible decoration: {}", failures.join("; "))))
}

fn report_json(r: &Report) -> Value {
    json!({
        "checked": r.checked,
        "ok": r.ok(),
        "violations": r.violations,
    })
}

fn trees(d: usize) -> Result<Outcome, CliError> {
    let ts = enumerate_generic(d).map_err(|e| CliError::Parse(e.to_string()))?;
    let passed = ts.len() as u128 == catalan(d - 1);
    let list: Vec<Value> = ts.iter().map(|t| serde_json::to_value(t.to_json()).expect("trees serialize")).collect();
    Ok(Outcome::json(json!({"command": "trees", "d": d, "count": ts.len(), "trees": list}), passed))
}

fn homology_report(data: &MorseComplexData, variant: Variant) -> Result<(Value, bool), CliError> {
    let c = build_complex(data, variant)?;
    let d2 = check_d_squared(&c);
    let h = c.homology()?;
    let v = json!({
        "variant": format!("{variant:?}"),
        "generators": c.generators.iter().map(|(n, k)| json!({"name": n, "degree": k})).collect::<Vec<_>>(),
        "d_squared_zero": d2,
        "betti": h.iter().map(|g| g.betti).collect::<Vec<_>>(),
        "torsion": h.iter().map(|g| &g.torsion).collect::<Vec<_>>(),
    });
    Ok((v, d2))
}

fn homology(input: &Input, variant: Variant, run: &RunOpts, format: Format) -> Result<Outcome, CliError> {
    if let Some(p) = &input.complex {
        let data: MorseComplexData =
            serde_json::from_value(read_json(p)?).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?;
        let (mut v, ok) = homology_report(&data, variant)?;
        v["command"] = json!("homology");
        v["source"] = json!("complex");
        return Ok(Outcome::json(v, ok));
    }
    let Some(p) = &input.mesh else {
        return Err(CliError::Parse("homology takes --mesh or --complex".into()));
    };
    let (s, f) = load_mesh(p)?;
    let opts = options(run, 1)?;
    let (e, attempt, failures) = engine_retry(&s, &f, &opts)?;
    if format == Format::Svg {
        return Ok(Outcome { body: svg(&e), passed: true });
    }
    let (mut v, ok) = homology_report(&complex_data(&e), variant)?;
    v["command"] = json!("homology");
    v["source"] = json!("mesh");
    v["attempt"] = json!(attempt);
    v["failures"] = json!(failures);
    Ok(Outcome::json(v, ok))
}

fn products(mesh: &Path, run: &RunOpts, format: Format) -> Result<Outcome, CliError> {
    let (s, f) = load_mesh(mesh)?;
    let a = assemble_structure(&s, &f, &options(run, 2)?)?;
    if format == Format::Svg {
        return Ok(Outcome { body: svg(&a.engine), passed: true });
    }
    let st = &a.structure;
    let pairing = product_pairing(st);
    let ones = st.basis.in_degree(1);
    let unimodular = pairing.len() == 2 && is_unimodular_2x2(&pairing);
    let v = json!({
        "command": "products",
        "seed": run.seed,
        "attempt": a.attempt,
        "failures": a.failures,
        "m2": st.to_json()["ops"]["2"],
        "pairing": {
            "rows": ones.iter().map(|&i| st.basis.name(i)).collect::<Vec<_>>(),
            "cols": ones.iter().map(|&i| st.basis.name(i)).collect::<Vec<_>>(),
            "matrix": pairing.iter().map(|r| r.iter().map(|c| c.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        },
        "unimodular": unimodular,
    });
    Ok(Outcome::json(v, true))
}

fn verify_ainfty(input: &Input, run: &RunOpts, format: Format) -> Result<Outcome, CliError> {
    if let Some(p) = &input.structure {
        let s = AInftyStructure::from_json(&read_json(p)?)?;
        let maxd = run.maxd.min(s.maxd);
        let r = verify_structure(&s, maxd)?;
        let v = json!({"command": "verify-ainfty", "source": "structure", "maxd": maxd, "report": report_json(&r)});
        return Ok(Outcome::json(v, r.ok()));
    }
    let Some(p) = &input.mesh else {
        return Err(CliError::Parse("verify-ainfty takes --mesh or --structure".into()));
    };
    let (s, f) = load_mesh(p)?;
    let a = assemble_structure(&s, &f, &options(run, run.maxd)?)?;
    if format == Format::Svg {
        return Ok(Outcome { body: svg(&a.engine), passed: true });
    }
    let r = verify_structure(&a.structure, run.maxd)?;
    let v = json!({
        "command": "verify-ainfty",
        "source": "mesh",
        "seed": run.seed,
        "maxd": run.maxd,
        "prefactor": run.prefactor.to_string(),
        "attempt": a.attempt,
        "failures": a.failures,
        "structure": a.structure.to_json(),
        "report": report_json(&r),
    });
    Ok(Outcome::json(v, r.ok()))
}

/// Setup file: `{base, values, seedA, seedB, maxd}` with values as rationals.
fn parse_setup(v: &Value) -> Result<(CylinderSetup, usize), CliError> {
    let bad = |m: &str| CliError::Parse(format!("continuation setup: {m}"));
    let base = match v.get("base").and_then(Value::as_str) {
        Some("circle") => BaseKind::Circle,
        Some("interval") => BaseKind::Interval,
        _ => return Err(bad("base must be \"circle\" or \"interval\"")),
    };
    let values = v
        .get("values")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("values"))?
        .iter()
        .map(|x| match x {
            Value::String(s) => parse_q(s),
            Value::Number(n) => n.as_i64().map(|i| Q::from_integer(i.into())),
            _ => None,
        })
        .collect::<Option<Vec<Q>>>()
        .ok_or_else(|| bad("values must be rationals"))?;
    let seed = |k: &str| v.get(k).and_then(Value::as_u64).ok_or_else(|| bad(k));
    let maxd = v.get("maxd").and_then(Value::as_u64).unwrap_or(2) as usize;
    Ok((CylinderSetup { base, values, seed_a: seed("seedA")?, seed_b: seed("seedB")? }, maxd))
}

fn continuation(path: &Path, maxd: Option<usize>) -> Result<Outcome, CliError> {
    let (setup, file_maxd) = parse_setup(&read_json(path)?)?;
    let maxd = maxd.unwrap_or(file_maxd);
    if maxd == 0 {
        return Err(CliError::Parse("maxd must be at least 1".into()));
    }
    let rep = verify_continuation(&setup, maxd)?;
    let r = &rep.result;
    let mut maps = serde_json::Map::new();
    for (d, m) in &r.morphism.maps {
        let entries: Vec<Value> = m
            .iter()
            .map(|(t, v)| {
                json!({
                    "in": r.source.names(t),
                    "out": v.iter().map(|(k, c)| json!({"gen": r.target.basis.name(*k), "coeff": coeff_json(c)})).collect::<Vec<_>>(),
                })
            })
            .collect();
        maps.insert(d.to_string(), Value::Array(entries));
    }
    let v = json!({
        "command": "continuation",
        "maxd": maxd,
        "seeds": [setup.seed_a, setup.seed_b],
        "shifts": [fmt_q(&r.shifts.0), fmt_q(&r.shifts.1)],
        "attempt": r.attempt(),
        "failures": r.failures,
        "source": r.source.to_json(),
        "target": r.target.to_json(),
        "f": maps,
        "traces": r.traces,
        "report": report_json(&rep.morphism),
        "quasi_isomorphism": rep.quasi_isomorphism,
        "degrees_ok": rep.degrees_ok,
        "type_c_empty": rep.type_c_empty,
    });
    Ok(Outcome::json(v, rep.ok()))
}

fn convert(path: &Path) -> Result<Outcome, CliError> {
    let s = AInftyStructure::from_json(&read_json(path)?)?;
    let t = convert_convention(&s);
    let before = verify_structure(&s, s.maxd)?;
    let after = verify_structure(&t, t.maxd)?;
    let v = json!({
        "command": "convert-convention",
        "from": s.convention.to_string(),
        "to": t.convention.to_string(),
        "structure": t.to_json(),
        "input_report": report_json(&before),
        "output_report": report_json(&after),
    });
    Ok(Outcome::json(v, before.ok() == after.ok()))
}

/// Mesh, separatrices and critical vertices; coordinates are rounded for
/// display only.
pub fn svg(e: &Engine) -> String {
    let s = &e.surface;
    let scale = 60.0;
    let fx = |q: &Q| -> f64 {
        let n: f64 = q.numer().to_string().parse().unwrap_or(0.0);
        let d: f64 = q.denom().to_string().parse().unwrap_or(1.0);
        n / d
    };
    let pts = s.charts.iter().flatten();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in pts {
        x0 = x0.min(fx(&p.x));
        y0 = y0.min(fx(&p.y));
        x1 = x1.max(fx(&p.x));
        y1 = y1.max(fx(&p.y));
    }
    if s.charts.is_empty() {
        (x0, y0, x1, y1) = (0.0, 0.0, 1.0, 1.0);
    }
    let map = |p: &crate::plflow::Pt| ((fx(&p.x) - x0 + 0.5) * scale, (y1 - fx(&p.y) + 0.5) * scale);
    let (w, h) = ((x1 - x0 + 1.0) * scale, (y1 - y0 + 1.0) * scale);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#);
    for c in &s.charts {
        let path: Vec<String> = c.iter().map(|p| map(p)).map(|(a, b)| format!("{a:.2},{b:.2}")).collect();
        let _ = writeln!(out, r##"<polygon points="{}" fill="none" stroke="#bbb" stroke-width="0.5"/>"##, path.join(" "));
    }
    for sep in e.separatrices.values() {
        for (poly, colour) in [(&sep.stable, "#2060c0"), (&sep.unstable, "#c03020")] {
            let path: Vec<String> = poly.iter().map(|p| map(p)).map(|(a, b)| format!("{a:.2},{b:.2}")).collect();
            let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#, path.join(" "));
        }
    }
    for (v, k) in &e.critical {
        let (a, b) = map(&s.vertices[*v]);
        let colour = match k {
            VertexKind::Min => "#208020",
            VertexKind::Max => "#c03020",
            _ => "#2060c0",
        };
        let _ = writeln!(out, r#"<circle cx="{a:.2}" cy="{b:.2}" r="4" fill="{colour}"><title>{}</title></circle>"#, s.names[*v]);
    }
    out.push_str("</svg>\n");
    out
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let needs_mesh = |input: &Input| input.mesh.is_some();
    match &cli.command {
        Command::Homology { input, .. } | Command::VerifyAinfty { input, .. } if cli.format == Format::Svg && !needs_mesh(input) => {
            Err(CliError::Other("svg output needs a mesh".into()))
        }
        Command::Trees { .. } | Command::Continuation { .. } | Command::ConvertConvention { .. } if cli.format == Format::Svg => {
            Err(CliError::Other("svg output needs a mesh".into()))
        }
        Command::Trees { d } => trees(*d),
        Command::Homology { input, variant, run } => homology(input, *variant, run, cli.format),
        Command::Products { mesh, run } => products(mesh, run, cli.format),
        Command::VerifyAinfty { input, run } => verify_ainfty(input, run, cli.format),
        Command::Continuation { setup, maxd } => continuation(setup, *maxd),
        Command::ConvertConvention { structure } => convert(structure),
    }
}

/// Caps rayon's pool from `MORSE_AINFTY_THREADS`.
fn configure_threads() {
    if let Some(n) = std::env::var("MORSE_AINFTY_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Runs the command line and returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let (body, code) = match run(&cli) {
        Ok(o) => {
            let code = if o.passed { 0 } else { 2 };
            (o.body, code)
        }
        Err(e) => {
            let o = Outcome::json(json!({"error": {"kind": e.kind(), "message": e.message()}}), false);
            (o.body, e.exit_code())
        }
    };
    let written = match &cli.out {
        Some(p) => std::fs::write(p, &body).map_err(|e| e.to_string()),
        None => {
            print!("{body}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("cannot write report: {e}");
        return 1;
    }
    code
}
