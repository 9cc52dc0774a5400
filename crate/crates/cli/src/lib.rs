//! Job parsing, dispatch and report rendering for the `keller` binary.

use std::fmt::Write as _;
use std::path::PathBuf;

use keller_core::constructions::{
    char_p_counterexample, complete_to_sl, find_d_unimodular_extension, g_composition_example,
    invariance_probe_with, quasi_druzkowski_witness, restrict_scalars,
    self_composition_is_zero_on_residue,
};
use keller_core::hensel::{fiber_points_with, hensel_lift, lift_univariate_root_with};
use keller_core::jacobian::is_keller;
use keller_core::poly::PolyMap;
use keller_core::ring::{Elem, Ring, DEFAULT_BUDGET};
use keller_core::text::{parse_document, Expr};
use keller_core::unimodular::{check_unimodular_with, degree_bound_predicate, ScanOptions};
use num_bigint::BigInt;
use serde_json::{Map, Value};

pub type Report = Map<String, Value>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] keller_core::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Check,
    Lift,
    Fiber,
    Construct,
    Restrict,
    Probe,
    Bound,
}

impl Command {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "check" => Command::Check,
            "lift" => Command::Lift,
            "fiber" => Command::Fiber,
            "construct" => Command::Construct,
            "restrict" => Command::Restrict,
            "probe" => Command::Probe,
            "bound" => Command::Bound,
            other => return Err(CliError::Usage(format!("unknown command `{other}`"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Lift => "lift",
            Command::Fiber => "fiber",
            Command::Construct => "construct",
            Command::Restrict => "restrict",
            Command::Probe => "probe",
            Command::Bound => "bound",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    CharP,
    GExample,
    QuasiDruzkowski,
    Extension,
    SlCompletion,
}

impl Construction {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "char-p" => Construction::CharP,
            "g-example" => Construction::GExample,
            "quasi-druzkowski" => Construction::QuasiDruzkowski,
            "extension" => Construction::Extension,
            "sl-completion" => Construction::SlCompletion,
            other => return Err(CliError::Usage(format!("unknown construction `{other}`"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Construction::CharP => "char-p",
            Construction::GExample => "g-example",
            Construction::QuasiDruzkowski => "quasi-druzkowski",
            Construction::Extension => "extension",
            Construction::SlCompletion => "sl-completion",
        }
    }
}

/// Command options with their defaults.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Options {
    /// `--point`; no default.
    pub point: Option<Vec<i64>>,
    /// `--trials`, default 20.
    pub trials: u32,
    /// `--seed`, default 0.
    pub seed: u64,
    /// `--budget`, default 10^7 points.
    pub budget: u64,
    /// `--out`; standard output when absent.
    pub out: Option<PathBuf>,
    /// `--json`; an aligned table otherwise.
    pub json: bool,
    /// `--construction`, required by `construct`.
    pub construction: Option<Construction>,
    /// `--matrix "a,b;c,d"`, for the quasi-Druzkowski construction.
    pub matrix: Option<Vec<Vec<i64>>>,
    /// `--degree`, for the extension construction and `bound`.
    pub degree: Option<u64>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            point: None,
            trials: 20,
            seed: 0,
            budget: DEFAULT_BUDGET,
            out: None,
            json: false,
            construction: None,
            matrix: None,
            degree: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct JobSpec {
    pub ring: Ring,
    pub dim: Option<usize>,
    pub exprs: Vec<Expr>,
    pub map: Option<PolyMap>,
    pub command: Command,
    pub options: Options,
}

/// Parse and validate an input document. The command defaults to `check`.
pub fn parse_input(text: &str) -> Result<JobSpec> {
    let doc = parse_document(text)?;
    Ok(JobSpec {
        ring: doc.ring,
        dim: doc.dim,
        exprs: doc.exprs,
        map: doc.map,
        command: Command::Check,
        options: Options::default(),
    })
}

pub fn parse_point(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad point coordinate `{}`", t.trim())))
        })
        .collect()
}

pub fn parse_matrix(s: &str) -> Result<Vec<Vec<i64>>> {
    s.split(';').map(parse_point).collect()
}

impl JobSpec {
    fn map(&self) -> Result<&PolyMap> {
        self.map.as_ref().ok_or_else(|| {
            CliError::Usage(format!("`{}` needs a map with all components", self.command.name()))
        })
    }

    fn dim(&self) -> Result<usize> {
        self.dim
            .ok_or_else(|| CliError::Usage("the document needs a `map n=<int>` line".into()))
    }

    fn point(&self, n: usize) -> Result<Option<Vec<Elem>>> {
        let Some(p) = &self.options.point else {
            return Ok(None);
        };
        if p.len() != n {
            return Err(keller_core::Error::ArityMismatch {
                expected: n,
                found: p.len(),
            }
            .into());
        }
        Ok(Some(p.iter().map(|&v| self.ring.from_i64(v)).collect()))
    }

    fn scan(&self) -> ScanOptions {
        ScanOptions {
            budget: self.options.budget,
            partitions: 0,
        }
    }
}

/// Run the job and build a flat report. Keys are sorted.
pub fn run_job(spec: &JobSpec) -> Result<Report> {
    let mut r = Report::new();
    r.insert("command".into(), spec.command.name().into());
    r.insert("ring".into(), spec.ring.to_string().into());
    match spec.command {
        Command::Check => {
            let f = spec.map()?;
            r.extend(check_unimodular_with(f, spec.scan()).to_document());
        }
        Command::Lift => lift(spec, &mut r)?,
        Command::Fiber => {
            let f = spec.map()?;
            let c = spec
                .point(f.dim())?
                .unwrap_or_else(|| vec![spec.ring.zero(); f.dim()]);
            let pts = fiber_points_with(f, &c, true, spec.options.budget)?;
            r.insert("digest".into(), f.digest().into());
            r.insert("target".into(), spec.ring.format_point(&c).into());
            r.insert("fiber_size".into(), pts.len().into());
            let listed: Vec<String> = pts.iter().map(|p| spec.ring.format_point(p)).collect();
            r.insert("fiber".into(), listed.join(" ").into());
        }
        Command::Construct => construct(spec, &mut r)?,
        Command::Restrict => {
            let f = spec.map()?;
            let g = restrict_scalars(f)?;
            r.insert("source_digest".into(), f.digest().into());
            r.insert("source_keller".into(), is_keller(f)?.into());
            r.insert("restricted_ring".into(), g.ring().to_string().into());
            r.insert("restricted_dim".into(), g.dim().into());
            r.insert("restricted_digest".into(), g.digest().into());
            r.insert("restricted_keller".into(), is_keller(&g).ok().into());
            r.insert("restricted_map".into(), g.to_string().into());
        }
        Command::Probe => {
            let f = spec.map()?;
            let rep = invariance_probe_with(f, spec.options.trials, spec.options.seed, spec.options.budget)?;
            r.extend(rep.to_document());
        }
        Command::Bound => {
            let n = spec.dim()?;
            let d = match (spec.options.degree, &spec.map) {
                (Some(d), _) => d,
                (None, Some(f)) => f.map_stat_d() as u64,
                (None, None) => {
                    return Err(CliError::Usage("`bound` needs a map or --degree".into()))
                }
            };
            let b = degree_bound_predicate(spec.ring.p(), n as u64, d)?;
            r.insert("p".into(), spec.ring.p().into());
            r.insert("n".into(), n.into());
            r.insert("d".into(), d.into());
            r.insert("rhs".into(), b.rhs_display().into());
            r.insert("holds".into(), b.holds.into());
        }
    }
    Ok(r)
}

fn lift(spec: &JobSpec, r: &mut Report) -> Result<()> {
    let prec = spec.ring.precision();
    if let Some(f) = &spec.map {
        if let Some(alpha) = spec.point(f.dim())? {
            let res = hensel_lift(f, &alpha, prec)?;
            r.insert("alpha".into(), spec.ring.format_point(&alpha).into());
            r.insert("beta".into(), res.ring.format_point(&res.beta).into());
            r.insert("m".into(), res.m.into());
            r.insert("iterations".into(), res.iterations.into());
            r.insert("uniqueness_exponent".into(), res.uniqueness_exponent.into());
            let prog: Vec<String> = res.progress.iter().map(u32::to_string).collect();
            r.insert("progress".into(), prog.join(",").into());
            return Ok(());
        }
    }
    let first = spec
        .exprs
        .first()
        .ok_or_else(|| CliError::Usage("`lift` needs F1 or a --point".into()))?;
    let coeffs = first.to_integer_univariate()?;
    let res = lift_univariate_root_with(&coeffs, spec.ring.p(), prec, spec.options.budget)?;
    r.insert("polynomial".into(), int_poly_text(&coeffs).into());
    r.insert("discriminant".into(), res.discriminant.to_string().into());
    r.insert("extension".into(), res.ring.to_string().into());
    r.insert("residue_degree".into(), res.residue_degree.into());
    r.insert("root".into(), res.ring.format_elem(&res.root).into());
    r.insert(
        "root_residue".into(),
        res.ring
            .residue_field_of()
            .format_elem(&res.ring.reduce(&res.root))
            .into(),
    );
    Ok(())
}

fn int_poly_text(c: &[BigInt]) -> String {
    let mut s = String::new();
    for (i, a) in c.iter().enumerate().rev() {
        if a.sign() == num_bigint::Sign::NoSign {
            continue;
        }
        let neg = a.sign() == num_bigint::Sign::Minus;
        match (s.is_empty(), neg) {
            (true, true) => s.push('-'),
            (false, true) => s.push_str(" - "),
            (false, false) => s.push_str(" + "),
            (true, false) => {}
        }
        let mag = a.magnitude();
        let unit = *mag == 1u32.into();
        match i {
            0 => write!(s, "{mag}"),
            _ if unit => Ok(()),
            _ => write!(s, "{mag}*"),
        }
        .expect("writing to a string");
        match i {
            0 => {}
            1 => s.push_str("X1"),
            _ => write!(s, "X1^{i}").expect("writing to a string"),
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

fn construct(spec: &JobSpec, r: &mut Report) -> Result<()> {
    let which = spec
        .options
        .construction
        .ok_or_else(|| CliError::Usage("`construct` needs --construction".into()))?;
    r.insert("construction".into(), which.name().into());
    match which {
        Construction::CharP | Construction::GExample => {
            let n = spec.dim()?;
            let f = if which == Construction::CharP {
                char_p_counterexample(&spec.ring, n)?
            } else {
                g_composition_example(&spec.ring, n)?
            };
            let rep = check_unimodular_with(&f, spec.scan());
            r.extend(rep.to_document());
            r.insert("unimodular".into(), (rep.verdict.name() == "unimodular").into());
            r.insert("map".into(), f.to_string().into());
            if which == Construction::GExample {
                let z = self_composition_is_zero_on_residue(&f, spec.options.budget)?;
                r.insert("self_composition_residue_zero".into(), z.into());
            }
        }
        Construction::QuasiDruzkowski => {
            let m = spec
                .options
                .matrix
                .as_ref()
                .ok_or_else(|| CliError::Usage("quasi-druzkowski needs --matrix".into()))?;
            let b: Vec<Vec<BigInt>> = m
                .iter()
                .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
                .collect();
            let w = quasi_druzkowski_witness(&b, spec.ring.p(), spec.ring.precision())?;
            let ring = w.map.ring().clone();
            let u: Vec<String> = w.u.iter().map(BigInt::to_string).collect();
            r.insert("ring".into(), ring.to_string().into());
            r.insert("u".into(), format!("({})", u.join(",")).into());
            r.insert("pivot".into(), (w.pivot + 1).into());
            r.insert("point".into(), ring.format_point(&w.point).into());
            r.insert("value".into(), ring.format_point(&w.value).into());
            r.insert("unit_component".into(), (w.unit_component + 1).into());
            r.insert("map".into(), w.map.to_string().into());
            r.insert("digest".into(), w.map.digest().into());
        }
        Construction::Extension => {
            let d = spec
                .options
                .degree
                .ok_or_else(|| CliError::Usage("extension needs --degree".into()))?;
            let e = find_d_unimodular_extension(spec.ring.p(), d, spec.ring.precision())?;
            r.insert("d".into(), d.into());
            r.insert("extension".into(), e.ring.to_string().into());
            r.insert("residue_degree".into(), e.degree.into());
            r.insert("residue_field_size".into(), e.ring.q().into());
            r.insert("certificate".into(), format!("{} < {}", e.lhs, e.rhs).into());
            r.insert("certificate_holds".into(), e.holds().into());
        }
        Construction::SlCompletion => {
            let v = spec
                .point(spec.options.point.as_ref().map_or(0, Vec::len))?
                .ok_or_else(|| CliError::Usage("sl-completion needs --point".into()))?;
            let a = complete_to_sl(&spec.ring, &v)?;
            let rows: Vec<String> = a
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|x| spec.ring.format_elem(x))
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect();
            r.insert("vector".into(), spec.ring.format_point(&v).into());
            r.insert("matrix".into(), rows.join(";").into());
        }
    }
    Ok(())
}

/// Report for a failed job: the error message and its kind.
pub fn error_report(spec_command: Option<Command>, err: &CliError) -> Report {
    let mut r = Report::new();
    if let Some(c) = spec_command {
        r.insert("command".into(), c.name().into());
    }
    let kind = match err {
        CliError::Core(e) => core_error_kind(e),
        CliError::Usage(_) => "usage",
        CliError::Io(_) => "io",
    };
    r.insert("error".into(), err.to_string().into());
    r.insert("error_kind".into(), kind.into());
    r
}

fn core_error_kind(e: &keller_core::Error) -> &'static str {
    use keller_core::Error as E;
    match e {
        E::Parse { .. } => "parse",
        E::Validation(_) | E::InvalidInput(_) => "validation",
        E::BudgetExceeded { .. } => "budget-exceeded",
        E::PreconditionFailed(_) | E::PrecisionTooLow { .. } => "precondition",
        E::TheoremViolation(_) => "theorem-violation",
        _ => "computation",
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn render_json(r: &Report) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("maps of plain values serialize");
    s.push('\n');
    s
}

/// Two aligned columns, one key per line.
pub fn render_table(r: &Report) -> String {
    let width = r.keys().map(String::len).max().unwrap_or(0);
    let mut s = String::new();
    for (k, v) in r {
        let text = match v {
            Value::String(t) => t.clone(),
            Value::Null => "-".into(),
            other => other.to_string(),
        };
        let mut lines = text.lines();
        writeln!(s, "{k:width$}  {}", lines.next().unwrap_or("")).expect("string write");
        for l in lines {
            writeln!(s, "{:width$}  {l}", "").expect("string write");
        }
    }
    s
}

pub fn render(r: &Report, json: bool) -> String {
    if json {
        render_json(r)
    } else {
        render_table(r)
    }
}
