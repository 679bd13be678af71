use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pseudogeo::catalog;
use pseudogeo::degeneracy::{self, scan_s0, Case, DegenerateReport, ProjectiveDirection, Tolerances};
use pseudogeo::export::{self, Portrait, PortraitStyle};
use pseudogeo::families::{self, FamilyConfig, FamilySpec};
use pseudogeo::geoflow::{integrate_geodesic, integrate_natural, GeodesicCurve, IntegratorOptions, ProjectiveJet};
use pseudogeo::metric::{parse_spec, Bbox, MetricField};
use pseudogeo::suites::{self, SuiteConfig, SuiteReport};
use pseudogeo::{Exec, GeoError};

/// stdout writes that stop quietly on a closed pipe
macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout().lock(), $($t)*);
    }};
}

/// Geodesics of signature-changing metrics on surfaces.
#[derive(Parser)]
#[command(name = "pseudogeo", version)]
struct Cli {
    /// Worker threads for integrations (1 runs sequentially).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the built-in metrics, or show one of them.
    Catalog {
        name: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Classify a degenerate point, or every point along S0.
    Classify {
        #[command(flatten)]
        metric: MetricArgs,
        /// Point x,y on S0.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "scan")]
        point: Option<String>,
        /// Move --point onto S0 first.
        #[arg(long)]
        snap: bool,
        /// Walk S0 inside the bbox and report case transitions.
        #[arg(long)]
        scan: bool,
        /// Arc-length step of the scan.
        #[arg(long, default_value_t = 0.02)]
        step: f64,
        #[arg(long)]
        json: bool,
    },
    /// Integrate one geodesic and print its CSV trace.
    Integrate {
        #[command(flatten)]
        metric: MetricArgs,
        /// Initial jet x,y,p with p = dy/dx (`inf` for vertical).
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        /// The third value of --from is dx/dy instead.
        #[arg(long)]
        pbar: bool,
        /// Parameter length.
        #[arg(long = "len", default_value_t = 10.0)]
        len: f64,
        /// Opposite orientation of the field.
        #[arg(long)]
        reverse: bool,
        /// Natural-parameter system instead (columns t,x,y,vx,vy,E).
        #[arg(long)]
        natural: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Render geodesics to SVG, with one CSV per curve.
    Portrait {
        #[command(flatten)]
        metric: MetricArgs,
        /// Family through a degenerate point instead of a seeded grid.
        #[arg(long)]
        family: bool,
        /// Degenerate point for --family (default: the origin, or the first S0 point found).
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        /// Curves in grid mode, members per side in family mode.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Parameter length of grid curves.
        #[arg(long = "len", default_value_t = 20.0)]
        len: f64,
        #[arg(long, default_value = "portrait.svg")]
        out: PathBuf,
    },
    /// Run an invariant suite (or `all`); exit 3 if an assertion fails.
    Check {
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        json: bool,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct MetricArgs {
    /// catalog:<name>[(param)], an inline `a=..; b=..; c=..` spec, or @file.toml
    #[arg(long, allow_hyphen_values = true)]
    metric: String,
    /// Parameter of catalog:dd.
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<f64>,
    /// Parameter of catalog:c1c3.
    #[arg(long, allow_hyphen_values = true)]
    y1: Option<f64>,
    /// Working box xmin,xmax,ymin,ymax.
    #[arg(long, allow_hyphen_values = true)]
    bbox: Option<String>,
}

/// Bad input from the user (exit code 1).
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

/// A `check` that ran but did not pass (exit code 3).
#[derive(Debug)]
struct AssertionFailed;

impl std::fmt::Display for AssertionFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("assertions failed")
    }
}

impl std::error::Error for AssertionFailed {}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<AssertionFailed>().is_some() {
        return 3;
    }
    if e.downcast_ref::<Usage>().is_some() {
        return 1;
    }
    match e.downcast_ref::<GeoError>() {
        Some(GeoError::Parse { .. } | GeoError::UnknownIdent { .. }) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if e.downcast_ref::<AssertionFailed>().is_none() {
                eprintln!("error: {:#}", e);
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let exec = match cli.jobs {
        Some(0) => return Err(usage("--jobs must be at least 1")),
        Some(1) => Exec::Sequential,
        Some(n) => {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("starting worker pool")?;
            Exec::Parallel
        }
        None => Exec::Parallel,
    };
    let opts = IntegratorOptions::from_env().map_err(|e| usage(format!("PSEUDOGEO_TOL: {}", e)))?;
    match cli.cmd {
        Cmd::Catalog { name, json } => cmd_catalog(name.as_deref(), json),
        Cmd::Classify { metric, point, snap, scan, step, json } => {
            let m = load_metric(&metric)?;
            cmd_classify(&m, point.as_deref(), snap, scan, step, json)
        }
        Cmd::Integrate { metric, from, pbar, len, reverse, natural, out, json } => {
            let m = load_metric(&metric)?;
            cmd_integrate(&m, &from, pbar, len, reverse, natural, out.as_deref(), json, &opts)
        }
        Cmd::Portrait { metric, family, point, count, seed, len, out } => {
            let m = load_metric(&metric)?;
            let cfg = FamilyConfig { exec, opts, ..FamilyConfig::default() };
            cmd_portrait(&m, family, point.as_deref(), count, seed, len, &out, &cfg)
        }
        Cmd::Check { suite, seed, json, out } => cmd_check(&suite, SuiteConfig { seed, exec, opts }, json, out.as_deref()),
    }
}

// ---------------------------------------------------------------- inputs

fn parse_floats(s: &str, n: usize, what: &str) -> anyhow::Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| {
            let t = t.trim();
            match t {
                "inf" | "+inf" | "-inf" => Ok(f64::INFINITY),
                "pi" => Ok(PI),
                _ => t.parse::<f64>(),
            }
        })
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("{} expects {} comma-separated numbers, got '{}'", what, n, s)))?;
    if v.len() != n {
        return Err(usage(format!("{} expects {} comma-separated numbers, got '{}'", what, n, s)));
    }
    Ok(v)
}

fn parse_bbox(s: &str) -> anyhow::Result<Bbox> {
    let v = parse_floats(s, 4, "--bbox")?;
    Bbox::new(v[0], v[1], v[2], v[3]).map_err(|e| usage(e.to_string()))
}

fn load_metric(a: &MetricArgs) -> anyhow::Result<MetricField> {
    let spec = a.metric.trim();
    let mut m = if let Some(name) = spec.strip_prefix("catalog:") {
        let base = name.split('(').next().unwrap_or("").trim();
        let param = match base {
            "dd" => a.eps,
            "c1c3" => a.y1,
            _ => None,
        };
        catalog::lookup(name, param).map_err(|e| usage(e.to_string()))?
    } else if let Some(file) = spec.strip_prefix('@') {
        metric_from_file(Path::new(file))?
    } else {
        parse_spec(spec)?.into_metric()
    };
    if let Some(b) = &a.bbox {
        m = m.with_bbox(parse_bbox(b)?);
    }
    Ok(m)
}

/// TOML with string keys a, b, c (or X, Y, Z) and an optional bbox array.
fn metric_from_file(path: &Path) -> anyhow::Result<MetricField> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let table: toml::Table = text.parse().map_err(|e| usage(format!("{}: {}", path.display(), e)))?;
    let mut parts = Vec::new();
    let mut bbox = None;
    for (k, v) in &table {
        match (k.as_str(), v) {
            ("bbox", toml::Value::Array(arr)) => {
                let nums: Option<Vec<f64>> = arr
                    .iter()
                    .map(|x| x.as_float().or_else(|| x.as_integer().map(|i| i as f64)))
                    .collect();
                match nums.as_deref() {
                    Some([a, b, c, d]) => bbox = Some(Bbox::new(*a, *b, *c, *d).map_err(|e| usage(e.to_string()))?),
                    _ => return Err(usage(format!("{}: bbox must be four numbers", path.display()))),
                }
            }
            ("a" | "b" | "c" | "X" | "Y" | "Z", _) => {
                let expr = match v {
                    toml::Value::String(s) => s.clone(),
                    toml::Value::Integer(i) => i.to_string(),
                    toml::Value::Float(f) => format!("{:?}", f),
                    _ => return Err(usage(format!("{}: key '{}' must be an expression string", path.display(), k))),
                };
                parts.push(format!("{}={}", k, expr));
            }
            _ => return Err(usage(format!("{}: unknown key '{}'", path.display(), k))),
        }
    }
    let mut m = parse_spec(&parts.join("; "))?.into_metric();
    m.name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("file").to_string();
    if let Some(b) = bbox {
        m = m.with_bbox(b);
    }
    Ok(m)
}

fn print_json<T: serde::Serialize + ?Sized>(v: &T) -> anyhow::Result<()> {
    outln!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

// --------------------------------------------------------------- catalog

fn cmd_catalog(name: Option<&str>, json: bool) -> anyhow::Result<()> {
    let entries: Vec<&catalog::CatalogEntry> = match name {
        Some(n) => {
            let e = catalog::ENTRIES
                .iter()
                .find(|e| e.name == n)
                .ok_or_else(|| usage(format!("unknown catalog metric '{}'", n)))?;
            vec![e]
        }
        None => catalog::ENTRIES.iter().collect(),
    };
    if json {
        let docs: Vec<serde_json::Value> = entries
            .iter()
            .map(|e| {
                let m = catalog::lookup(e.name, None).expect("catalog entry resolves");
                serde_json::json!({
                    "name": e.name,
                    "params": e.params,
                    "definition": e.definition,
                    "notes": e.notes,
                    "metric": m.spec_text(),
                    "bbox": m.bbox,
                })
            })
            .collect();
        return print_json(&docs);
    }
    for e in entries {
        let params = if e.params.is_empty() { String::new() } else { format!("  [{}]", e.params) };
        outln!("{}{}", e.name, params);
        outln!("    {}", e.definition);
        outln!("    {}", e.notes);
        if name.is_some() {
            let m = catalog::lookup(e.name, None)?;
            if e.name == "mink-sphere" {
                outln!("    embedding: {}", catalog::sphere_embedding().spec_text());
                outln!("    induced:   {}", m.spec_text());
            } else {
                outln!("    metric:    {}", m.spec_text());
            }
            let b = m.bbox;
            outln!("    bbox:      [{}, {}] x [{}, {}]", b.xmin, b.xmax, b.ymin, b.ymax);
        }
    }
    Ok(())
}

// -------------------------------------------------------------- classify

fn fmt_dir(d: &ProjectiveDirection) -> String {
    match d.chart {
        degeneracy::Chart::P => format!("p = {:.6}", d.value),
        degeneracy::Chart::PBAR if d.value == 0.0 => "p = inf".to_string(),
        degeneracy::Chart::PBAR => format!("pbar = {:.6}", d.value),
    }
}

fn print_report(m: &MetricField, r: &DegenerateReport) {
    outln!("metric    {}", m.name);
    outln!("q         ({:.9}, {:.9})", r.q[0], r.q[1]);
    outln!("Delta     {:.3e}   grad ({:.6}, {:.6})", r.delta, r.grad_delta[0], r.grad_delta[1]);
    outln!("p0        {}   tangent to S0: {}", fmt_dir(&r.p0), r.tangent);
    let mu = r.m.mu;
    outln!("M         mu = ({:.6}, {:.6}, {:.6}, {:.6})", mu[0], mu[1], mu[2], mu[3]);
    for root in &r.roots {
        outln!(
            "  root    {:<22} multiplicity {}{}",
            fmt_dir(&root.dir),
            root.multiplicity,
            if root.is_isotropic { "  isotropic" } else { "" }
        );
    }
    outln!("case      {}", r.case);
    let s = r.isotropic_spectrum;
    outln!("X pair    {:.6}{:+.6}i, {:.6}{:+.6}i", s[0].re, s[0].im, s[1].re, s[1].im);
    for w in &r.warnings {
        outln!("warning   {}", w);
    }
}

fn cmd_classify(m: &MetricField, point: Option<&str>, snap: bool, scan: bool, step: f64, json: bool) -> anyhow::Result<()> {
    let tol = Tolerances::default();
    if scan {
        if !(step > 0.0) {
            return Err(usage("--step must be positive"));
        }
        let pts = scan_s0(m, step, &tol)?;
        if json {
            return print_json(&pts);
        }
        // runs of equal case per component
        let mut runs: Vec<(usize, String, [f64; 2], [f64; 2], usize)> = Vec::new();
        for p in &pts {
            let label = match (&p.case, &p.error) {
                (Some(c), _) => c.label().to_string(),
                (None, Some(e)) => format!("error: {}", e),
                (None, None) => "?".into(),
            };
            match runs.last_mut() {
                Some(r) if r.0 == p.component && r.1 == label => {
                    r.3 = p.q;
                    r.4 += 1;
                }
                _ => runs.push((p.component, label, p.q, p.q, 1)),
            }
        }
        outln!("{:<10} {:<10} {:>26} {:>26} {:>7}", "component", "case", "from", "to", "points");
        for (c, label, a, b, n) in &runs {
            outln!(
                "{:<10} {:<10} {:>26} {:>26} {:>7}",
                c,
                label,
                format!("({:.5}, {:.5})", a[0], a[1]),
                format!("({:.5}, {:.5})", b[0], b[1]),
                n
            );
        }
        let c2 = pts.iter().any(|p| p.case == Some(Case::C2));
        if c2 {
            outln!("warning: C2 genericity is not checked");
        }
        return Ok(());
    }
    let p = match point {
        Some(s) => parse_floats(s, 2, "--point")?,
        None => return Err(usage("classify needs --point x,y or --scan")),
    };
    let mut q = [p[0], p[1]];
    if snap {
        q = degeneracy::find_s0_point(m, q)?;
    }
    let r = degeneracy::classify(m, q, &tol)?;
    if json {
        return print_json(&r);
    }
    print_report(m, &r);
    Ok(())
}

// ------------------------------------------------------------- integrate

#[allow(clippy::too_many_arguments)]
fn cmd_integrate(
    m: &MetricField,
    from: &str,
    pbar: bool,
    len: f64,
    reverse: bool,
    natural: bool,
    out: Option<&Path>,
    json: bool,
    opts: &IntegratorOptions,
) -> anyhow::Result<()> {
    let v = parse_floats(from, 3, "--from")?;
    let dir = if pbar {
        ProjectiveDirection::pbar(v[2])
    } else if v[2].is_infinite() {
        ProjectiveDirection::infinity()
    } else {
        ProjectiveDirection::p(v[2])
    };
    let span = if reverse { -len.abs() } else { len.abs() };
    if natural {
        let u = dir.unit();
        let c = integrate_natural(m, [v[0], v[1]], u, span, opts)?;
        let mut s = String::from("t,x,y,vx,vy,E\n");
        for p in &c.samples {
            s.push_str(&format!("{:?},{:?},{:?},{:?},{:?},{:?}\n", p.t, p.x, p.y, p.vx, p.vy, p.energy));
        }
        s.push_str(&format!("# termination: {}\n", c.termination.label()));
        return emit(out, &s);
    }
    let c = integrate_geodesic(m, &ProjectiveJet::new(v[0], v[1], dir.canonical()), span, opts)?;
    if json {
        return emit(out, &serde_json::to_string_pretty(&c)?);
    }
    emit(out, &export::curve_csv(&c, opts.event_tol))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => out!("{}", text),
    }
    Ok(())
}

// -------------------------------------------------------------- portrait

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn default_point(m: &MetricField) -> anyhow::Result<[f64; 2]> {
    if m.delta(0.0, 0.0).map(|d| d.abs() < 1e-12).unwrap_or(false) && m.bbox.contains(0.0, 0.0) {
        return Ok([0.0, 0.0]);
    }
    let pts = scan_s0(m, 0.05, &Tolerances::default())?;
    pts.first().map(|p| p.q).ok_or_else(|| anyhow!("no S0 point in the bbox"))
}

#[allow(clippy::too_many_arguments)]
fn cmd_portrait(
    m: &MetricField,
    family: bool,
    point: Option<&str>,
    count: Option<usize>,
    seed: u64,
    len: f64,
    out: &Path,
    cfg: &FamilyConfig,
) -> anyhow::Result<()> {
    let mut portrait = Portrait::new(format!("{} geodesics", m.name), PortraitStyle::new(m.bbox));
    portrait.add_discriminant(m);
    let dir = export::traces_dir(out);
    let mut curves: Vec<GeodesicCurve> = Vec::new();
    if family {
        let q = match point {
            Some(s) => {
                let v = parse_floats(s, 2, "--point")?;
                [v[0], v[1]]
            }
            None => default_point(m)?,
        };
        portrait.add_mark(q);
        let n = count.unwrap_or(7).max(1);
        let spec = family_for(m, q, n, cfg)?;
        for w in &spec.warnings {
            eprintln!("warning: {}", w);
        }
        for mem in &spec.members {
            portrait.add_curve(&mem.curve);
        }
        let json = out.with_extension("json");
        let paths = export::write_family(&json, &spec, cfg.opts.event_tol)?;
        eprintln!("{} members, family JSON {}, traces in {}", spec.members.len(), json.display(), paths.first().and_then(|p| p.parent()).unwrap_or(&dir).display());
    } else {
        let n = count.unwrap_or(40);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = m.bbox;
        let seeds: Vec<ProjectiveJet> = (0..n)
            .map(|_| {
                let th: f64 = rng.gen_range(0.0..PI);
                ProjectiveJet::new(rng.gen_range(b.xmin..b.xmax), rng.gen_range(b.ymin..b.ymax), ProjectiveDirection::from_vector(th.cos(), th.sin()))
            })
            .collect();
        let mut o = cfg.opts;
        o.sample_gap = Some(0.005 * b.width().max(b.height()));
        let res = pseudogeo::exec::map(cfg.exec, &seeds, |j| -> pseudogeo::Result<GeodesicCurve> {
            let fwd = integrate_geodesic(m, j, len, &o)?;
            let bwd = integrate_geodesic(m, j, -len, &o)?;
            Ok(GeodesicCurve::join(&bwd, &fwd))
        });
        for r in res {
            let c = r?;
            portrait.add_curve(&c);
            curves.push(c);
        }
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        for (i, c) in curves.iter().enumerate() {
            export::write_curve_csv(&dir.join(format!("curve_{:03}.csv", i)), c, cfg.opts.event_tol)?;
        }
        eprintln!("{} curves, traces in {}", curves.len(), dir.display());
    }
    fs::write(out, portrait.render()).with_context(|| format!("writing {}", out.display()))?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn family_for(m: &MetricField, q: [f64; 2], n: usize, cfg: &FamilyConfig) -> anyhow::Result<FamilySpec> {
    if m.name == "clairaut" {
        // explicit foliation p² = y − αy², seeded on a few verticals
        let alphas = linspace(-2.0, 2.0, n.max(2) | 1);
        let mut members = Vec::new();
        for x0 in linspace(-1.5, 1.5, 4) {
            members.extend(families::clairaut_family(m, &alphas, 0.3, x0, cfg)?);
        }
        let rep = degeneracy::classify(m, q, &Tolerances::default())?;
        return Ok(FamilySpec {
            metric: m.name.clone(),
            q,
            direction: rep.p0,
            case: rep.case,
            members,
            parabolas: vec![],
            riemannian_probe: None,
            warnings: rep.warnings,
        });
    }
    let rep = degeneracy::classify(m, q, &Tolerances::default())?;
    if rep.case.is_c() {
        let mut alphas = linspace(-2.0, 2.0, n.max(2) | 1);
        alphas.retain(|a| a.abs() > 1e-12);
        alphas.push(0.0);
        let mut spec = families::family_case_c_isotropic(m, q, &alphas, cfg)?;
        for root in rep.nonisotropic_simple_roots() {
            match families::geodesic_case_c_nonisotropic(m, q, &root, &cfg.opts) {
                Ok(pair) => {
                    for c in pair {
                        spec.members.push(families::Member {
                            params: vec![],
                            side: families::Side::Lorentzian,
                            role: families::Role::Explicit,
                            seed: ProjectiveJet::new(q[0], q[1], root),
                            causal_type: c.causal_type,
                            termination: c.termination,
                            inner_distance: 0.0,
                            inner_dir_error: c.first().dir.distance(&root),
                            curve: c,
                            fit: None,
                            alpha: None,
                        });
                    }
                }
                Err(e) => spec.warnings.push(format!("non-isotropic root {}: {}", fmt_dir(&root), e)),
            }
        }
        Ok(spec)
    } else {
        let c = FamilyConfig { count: n, ..*cfg };
        Ok(families::family_case_d(m, q, &c)?)
    }
}

// ----------------------------------------------------------------- check

fn cmd_check(suite: &str, cfg: SuiteConfig, json: bool, out: Option<&Path>) -> anyhow::Result<()> {
    let names: Vec<&str> = if suite == "all" {
        suites::SUITES.iter().map(|s| s.0).collect()
    } else if suites::SUITES.iter().any(|s| s.0 == suite) {
        vec![suite]
    } else {
        let known: Vec<&str> = suites::SUITES.iter().map(|s| s.0).collect();
        bail!(Usage(format!("unknown suite '{}' (known: {}, all)", suite, known.join(", "))));
    };
    let mut reports: Vec<SuiteReport> = Vec::new();
    for n in names {
        let r = suites::run(n, &cfg)?;
        if !json {
            for c in &r.checks {
                outln!(
                    "{} {:<11} {}  [{:.3e} vs {:.1e}]{}",
                    if c.passed { "PASS" } else { "FAIL" },
                    r.suite,
                    c.name,
                    c.value,
                    c.bound,
                    if c.detail.is_empty() { String::new() } else { format!("  {}", c.detail) }
                );
            }
        }
        reports.push(r);
    }
    let doc = serde_json::to_string_pretty(&reports)?;
    if json {
        outln!("{}", doc);
    }
    if let Some(p) = out {
        fs::write(p, &doc).with_context(|| format!("writing {}", p.display()))?;
    }
    if reports.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(anyhow::Error::new(AssertionFailed))
    }
}
