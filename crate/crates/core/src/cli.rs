//! Command-line front end: argument parsing, command implementations,
//! canonical JSON reports and exit codes.
//!
//! | code | meaning |
//! |---|---|
//! | 0 | success |
//! | 1 | internal failure |
//! | 2 | invalid input or usage |
//! | 3 | precision shortfall |
//! | 4 | truncation-stabilization audit failed |
//! | 5 | a diagram edge failed |
//! | 6 | lifts lie in different fibers |
//! | 7 | the 2-cocycle does not restrict to a coboundary |
//!
//! Reports are deterministic functions of the inputs, the seed and the
//! version; wall-clock timing is included only with `--timing`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::action::{ActionError, LocalAction};
use crate::deform::{obstruction_cocycle, ArtinianRing, DeformError, DerivationSpace, Lift, RelativeContext, SmallExtension};
use crate::groups::{cohomology, hs_map, inflate, restrict, Cochain, CocycleSolver, GModule, GroupError, QuotientGroup, Subgroup};
use crate::io::{fixture_action, to_canonical, ActionFile, CochainFile, GroupFile, IoError, LiftFile, ModuleFile, CORPUS};
use crate::maps::{check_boundary_diagram, check_fibered_image, check_induction_square, check_restriction_bijection, DiagramReport, MapsError, Tower};
use crate::series::SeriesError;

/// Version of the report layout.
pub const REPORT_SCHEMA: u32 = 1;

/// Exit code for success.
pub const EXIT_OK: i32 = 0;
/// Exit code for internal failures.
pub const EXIT_INTERNAL: i32 = 1;
/// Exit code for invalid inputs and usage errors.
pub const EXIT_INVALID: i32 = 2;
/// Exit code for precision shortfalls.
pub const EXIT_PRECISION: i32 = 3;
/// Exit code for a failed truncation-stabilization audit.
pub const EXIT_STABILIZATION: i32 = 4;
/// Exit code for a failed diagram edge.
pub const EXIT_FAILED_EDGE: i32 = 5;
/// Exit code for lifts in different fibers.
pub const EXIT_FIBER: i32 = 6;
/// Exit code for a 2-cocycle whose restriction is not a coboundary.
pub const EXIT_NOT_COBOUNDARY: i32 = 7;

/// Equivariant deformation cohomology of local actions on k[[t]].
#[derive(Debug, Parser)]
#[command(name = "equideform", version, about)]
pub struct Cli {
    /// The command.
    #[command(subcommand)]
    pub command: Command,
    /// Options shared by all commands.
    #[command(flatten)]
    pub global: GlobalArgs,
}

/// Options shared by all commands.
#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Truncate input actions to `t^PREC` (must not exceed the file precision).
    #[arg(long, global = true, env = "EQUIDEFORM_PREC")]
    pub prec: Option<i64>,
    /// Derivation-module truncation M (default 2·(different + |G|)).
    #[arg(long, global = true)]
    pub trunc: Option<i64>,
    /// Seed of every randomized choice and audit.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Random trials per diagram edge.
    #[arg(long, global = true, default_value_t = 100)]
    pub trials: usize,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    #[serde(skip)]
    pub format: Format,
    /// Include wall-clock timing (makes reports non-reproducible).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub timing: bool,
}

/// Report formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Pretty-printed JSON.
    Json,
}

/// Diagrams checked by `check`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    /// Restriction and induction against the invariant pushforward.
    Induction,
    /// The γ/σ/∂ diagram with the transgression.
    Boundary,
    /// The image of `(res, ind)` as a fiber product.
    Fibered,
    /// Restriction onto the invariants for a prime-to-p quotient.
    Bijection,
}

/// Commands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ramification filtration, conductor and different of an action.
    Ramify {
        /// Action file.
        action: PathBuf,
    },
    /// `H^degree(N, 𝔡)` with a basis and the stabilization audit.
    Cohomology {
        /// Action file.
        action: PathBuf,
        /// Degree 0, 1 or 2.
        #[arg(long, default_value_t = 1)]
        degree: usize,
        /// Generators of the subgroup (comma-separated element indices; default: the whole group).
        #[arg(long)]
        subgroup: Option<String>,
    },
    /// Verify a commutative diagram on random cocycles.
    Check {
        /// Action file.
        action: PathBuf,
        /// The diagram.
        #[arg(long, value_enum)]
        which: Which,
        /// Generators of the normal subgroup (default: the first ramification group).
        #[arg(long)]
        subgroup: Option<String>,
    },
    /// Obstruction to lifting along a small extension, or the relative
    /// obstruction of a pair of lifts of the subgroup and the quotient.
    Obstruct {
        /// Lift file of the action over A.
        lift: PathBuf,
        /// The ring A′ as `{"vars": r, "ideal": [[exps], …]}`, inline or a file.
        #[arg(long)]
        extension: String,
        /// Lift files over A′ of the subgroup and of the quotient action.
        #[arg(long, num_args = 2, value_names = ["SUBGROUP_LIFT", "QUOTIENT_LIFT"])]
        relative: Option<Vec<PathBuf>>,
        /// Generators of the normal subgroup; must match the subgroup lift's elements.
        #[arg(long, requires = "relative")]
        subgroup: Option<String>,
    },
    /// The cocycles `ξ_q` of a 2-cocycle restricting to a coboundary.
    Hsmap {
        /// Group file (with the subgroup).
        group: PathBuf,
        /// Module file.
        module: PathBuf,
        /// Cocycle file.
        cocycle: PathBuf,
        /// Also verify the kernel law and independence of the choice of f.
        #[arg(long)]
        audit: bool,
        /// Generators of the normal subgroup (default: the group file's subgroup).
        #[arg(long)]
        subgroup: Option<String>,
    },
    /// Emit the action of `G/N` on the invariants as an action file.
    Quotient {
        /// Action file.
        action: PathBuf,
        /// Generators of the normal subgroup (default: the first ramification group).
        #[arg(long)]
        subgroup: Option<String>,
    },
    /// List the bundled fixtures, or write them to a directory.
    Corpus {
        /// Directory to write the fixture files into.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

/// A failure with its exit code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CliError {
    /// Exit code.
    pub code: i32,
    /// Short category.
    pub kind: &'static str,
    /// Human-readable message.
    pub message: String,
    /// Structured details (for instance both dimensions of a failed audit).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl CliError {
    fn new(code: i32, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            kind,
            message: message.into(),
            details: None,
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self::new(EXIT_INVALID, "invalid", message)
    }

    fn precision(message: impl Into<String>) -> Self {
        Self::new(EXIT_PRECISION, "precision", message)
    }
}

impl From<MapsError> for CliError {
    fn from(e: MapsError) -> Self {
        if e.is_precision() {
            return CliError::precision(e.to_string());
        }
        match &e {
            MapsError::Stabilization { exact, truncated, .. } => CliError {
                code: EXIT_STABILIZATION,
                kind: "stabilization",
                message: e.to_string(),
                details: Some(json!({ "exact": exact, "truncated": truncated })),
            },
            MapsError::Invalid(_) | MapsError::NotInvariant | MapsError::NotCocycle(_) => CliError::invalid(e.to_string()),
            MapsError::Action(a) => a.clone().into(),
            MapsError::Group(g) => g.clone().into(),
            _ => CliError::new(EXIT_INTERNAL, "internal", e.to_string()),
        }
    }
}

impl From<ActionError> for CliError {
    fn from(e: ActionError) -> Self {
        match e {
            ActionError::Precision(_) | ActionError::Series(SeriesError::Precision(_)) => CliError::precision(e.to_string()),
            _ => CliError::invalid(e.to_string()),
        }
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> Self {
        CliError::invalid(e.to_string())
    }
}

impl From<DeformError> for CliError {
    fn from(e: DeformError) -> Self {
        if e.is_precision() {
            return CliError::precision(e.to_string());
        }
        match e {
            DeformError::FiberMismatch(_) => CliError::new(EXIT_FIBER, "fiber-mismatch", e.to_string()),
            DeformError::RestrictionNotCoboundary => CliError::new(EXIT_NOT_COBOUNDARY, "not-coboundary", e.to_string()),
            DeformError::Maps(m) => m.into(),
            _ => CliError::invalid(e.to_string()),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Action(a) => a.into(),
            IoError::Deform(d) => d.into(),
            other => CliError::invalid(other.to_string()),
        }
    }
}

/// Settings recorded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Seed.
    pub seed: u64,
    /// Trials per edge.
    pub trials: usize,
    /// Precision override.
    pub prec: Option<i64>,
    /// Truncation override.
    pub trunc: Option<i64>,
}

/// A command report.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    /// Layout version.
    pub schema: u32,
    /// Tool name.
    pub tool: &'static str,
    /// Tool version.
    pub version: &'static str,
    /// Command name.
    pub command: &'static str,
    /// SHA-256 of the input files, in argument order.
    pub input_digest: String,
    /// Settings.
    pub config: RunConfig,
    /// Command results (absent on failure).
    #[serde(skip_serializing_if = "Value::is_null")]
    pub results: Value,
    /// The failure, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<CliError>,
    /// Wall-clock milliseconds, with `--timing`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

/// The outcome of a command: results and exit code, or a failure.
struct Outcome {
    results: Value,
    code: i32,
}

impl Outcome {
    fn ok(results: Value) -> Result<Self, CliError> {
        Ok(Self { results, code: EXIT_OK })
    }
}

struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    fn new() -> Self {
        Self { hasher: Sha256::new() }
    }

    fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
        self.absorb(text.as_bytes());
        Ok(text)
    }

    fn absorb(&mut self, bytes: &[u8]) {
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
    }

    fn digest(self) -> String {
        self.hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::invalid(format!("{what}: {e}")))
}

fn load_action(inputs: &mut Inputs, path: &Path, g: &GlobalArgs) -> Result<LocalAction, CliError> {
    let file: ActionFile = parse_json(&inputs.read(path)?, "action file")?;
    let a = file.action()?;
    match g.prec {
        Some(p) if p > a.prec() => Err(CliError::precision(format!("requested precision {p} exceeds the file precision {}", a.prec()))),
        Some(p) if p < 2 => Err(CliError::invalid(format!("precision {p} is too small"))),
        Some(p) => Ok(a.truncate(p)),
        None => Ok(a),
    }
}

fn parse_subgroup(a: &crate::groups::FiniteGroup, spec: &str) -> Result<Subgroup, CliError> {
    let gens = spec
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| CliError::invalid(format!("bad element index {s:?} in --subgroup"))))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(&g) = gens.iter().find(|&&g| g >= a.order()) {
        return Err(CliError::invalid(format!("element {g} out of range for a group of order {}", a.order())));
    }
    Ok(Subgroup::generated_by(a, &gens))
}

/// The requested subgroup, or the first ramification group.
fn subgroup_or_inertia(a: &LocalAction, spec: Option<&str>) -> Result<Subgroup, CliError> {
    match spec {
        Some(s) => parse_subgroup(a.group(), s),
        None => {
            let r = a.ramification()?;
            Ok(r.filtration.get(1).cloned().unwrap_or_else(|| Subgroup::trivial(a.group())))
        }
    }
}

fn normal(a: &crate::groups::FiniteGroup, n: &Subgroup) -> Result<(), CliError> {
    if n.is_normal(a) {
        Ok(())
    } else {
        Err(CliError::invalid(format!("the subgroup {:?} is not normal", n.elements())))
    }
}

fn tower(a: &LocalAction, n: &Subgroup, g: &GlobalArgs) -> Result<Tower, CliError> {
    normal(a.group(), n)?;
    Ok(Tower::new(a, n, g.trunc)?)
}

/// The exit code of a verification whose verdict is `passed`.
pub fn verdict_code(passed: bool) -> i32 {
    if passed {
        EXIT_OK
    } else {
        EXIT_FAILED_EDGE
    }
}

/// Runs a parsed command line; returns the report and the exit code.
pub fn execute(cli: &Cli) -> (Report, i32) {
    let start = Instant::now();
    let mut inputs = Inputs::new();
    let g = &cli.global;
    let (name, outcome) = match &cli.command {
        Command::Ramify { action } => ("ramify", ramify(&mut inputs, action, g)),
        Command::Cohomology { action, degree, subgroup } => ("cohomology", cmd_cohomology(&mut inputs, action, *degree, subgroup.as_deref(), g)),
        Command::Check { action, which, subgroup } => ("check", check(&mut inputs, action, *which, subgroup.as_deref(), g)),
        Command::Obstruct {
            lift,
            extension,
            relative,
            subgroup,
        } => ("obstruct", obstruct(&mut inputs, lift, extension, relative.as_deref(), subgroup.as_deref(), g)),
        Command::Hsmap {
            group,
            module,
            cocycle,
            audit,
            subgroup,
        } => ("hsmap", hsmap(&mut inputs, group, module, cocycle, *audit, subgroup.as_deref(), g)),
        Command::Quotient { action, subgroup } => ("quotient", quotient(&mut inputs, action, subgroup.as_deref(), g)),
        Command::Corpus { write } => ("corpus", corpus(write.as_deref())),
    };
    let (results, error, code) = match outcome {
        Ok(o) => (o.results, None, o.code),
        Err(e) => {
            let code = e.code;
            (Value::Null, Some(e), code)
        }
    };
    let report = Report {
        schema: REPORT_SCHEMA,
        tool: "equideform",
        version: env!("CARGO_PKG_VERSION"),
        command: name,
        input_digest: inputs.digest(),
        config: RunConfig {
            seed: g.seed,
            trials: g.trials,
            prec: g.prec,
            trunc: g.trunc,
        },
        results,
        error,
        timing_ms: g.timing.then(|| start.elapsed().as_millis() as u64),
    };
    (report, code)
}

/// Parses `args` (including the program name), runs the command and
/// writes the report; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (report, code) = execute(&cli);
    let text = match to_canonical(&report) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("equideform: cannot serialize the report: {e}");
            return EXIT_INTERNAL;
        }
    };
    if let Some(err) = &report.error {
        eprintln!("equideform: {}", err.message);
    }
    match &cli.global.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("equideform: cannot write {}: {e}", path.display());
                return EXIT_INVALID;
            }
        }
        None => print!("{text}"),
    }
    code
}

fn ramify(inputs: &mut Inputs, path: &Path, g: &GlobalArgs) -> Result<Outcome, CliError> {
    let a = load_action(inputs, path, g)?;
    let r = a.ramification()?;
    let sizes: Vec<usize> = r.filtration.iter().map(|s| s.order()).collect();
    let named: serde_json::Map<String, Value> = sizes.iter().enumerate().map(|(i, &s)| (format!("G{i}"), json!(s))).collect();
    Outcome::ok(json!({
        "group": a.group().name(),
        "order": a.group().order(),
        "p": a.field().p(),
        "prec": a.prec(),
        "filtration": named,
        "filtration_normal": r.normal,
        "conductor": r.conductor,
        "different": r.different_order,
        "different_derivative": r.derivative_order,
        "different_consistent": r.different_consistent(),
        "weakly_ramified": r.weakly_ramified(),
    }))
}

fn cohomology_dim(space: &DerivationSpace, degree: usize) -> Result<Option<usize>, CliError> {
    Ok(match degree {
        0 => Some(cohomology(space.cohomology().coarse_module(), 0)?.dim()),
        1 => Some(space.cohomology().dim()),
        _ => space.h2()?.map(|h| h.dim()),
    })
}

fn cmd_cohomology(inputs: &mut Inputs, path: &Path, degree: usize, sub: Option<&str>, g: &GlobalArgs) -> Result<Outcome, CliError> {
    if degree > 2 {
        return Err(CliError::invalid(format!("degree {degree} is not one of 0, 1, 2")));
    }
    let a = load_action(inputs, path, g)?;
    let n = match sub {
        Some(s) => parse_subgroup(a.group(), s)?,
        None => Subgroup::whole(a.group()),
    };
    let an = a.restrict(&n);
    let space = DerivationSpace::new(&an, g.trunc)?;
    let m = space.levels().m;
    let m_audit = (3 * m + 1) / 2;
    let audit = DerivationSpace::new(&an, Some(m_audit))?;
    let dim = cohomology_dim(&space, degree)?;
    let dim_audit = cohomology_dim(&audit, degree)?;
    let basis: Vec<Value> = if degree == 1 {
        let frame = space.frame();
        let coh = space.cohomology();
        let gens = an.group().generators();
        (0..coh.dim())
            .map(|j| {
                let x: Vec<u64> = (0..coh.dim()).map(|i| u64::from(i == j)).collect();
                let der = frame.derivations(&coh.cocycle(&x))?;
                Ok(gens.iter().map(|&s| (s.to_string(), json!(format!("({}) d/dt", der[s].to_text("t"))))).collect::<serde_json::Map<_, _>>().into())
            })
            .collect::<Result<_, CliError>>()?
    } else {
        Vec::new()
    };
    let stable = dim.is_some() && dim == dim_audit;
    let results = json!({
        "group": a.group().name(),
        "subgroup": n.elements(),
        "subgroup_order": n.order(),
        "degree": degree,
        "dimension": dim,
        "truncation": m,
        "audit": {
            "truncation": m_audit,
            "dimension": dim_audit,
            "stable": stable,
            "evaluated": dim.is_some() && dim_audit.is_some(),
        },
        "basis": basis,
    });
    if dim.is_none() || dim_audit.is_none() {
        // degree two beyond the dense limit: reported, not decided
        return Outcome::ok(results);
    }
    if !stable {
        let mut e = CliError::new(
            EXIT_STABILIZATION,
            "stabilization",
            format!("dimension {} at truncation {m} but {} at {m_audit}", dim.unwrap_or(0), dim_audit.unwrap_or(0)),
        );
        e.details = Some(results);
        return Err(e);
    }
    Outcome::ok(results)
}

fn check(inputs: &mut Inputs, path: &Path, which: Which, sub: Option<&str>, g: &GlobalArgs) -> Result<Outcome, CliError> {
    let a = load_action(inputs, path, g)?;
    let n = subgroup_or_inertia(&a, sub)?;
    let t = tower(&a, &n, g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let report: DiagramReport = match which {
        Which::Induction => check_induction_square(&t, g.trials, &mut rng)?,
        Which::Boundary => check_boundary_diagram(&t, g.trials, &mut rng)?,
        Which::Fibered => check_fibered_image(&t, &mut rng)?,
        Which::Bijection => check_restriction_bijection(&t)?,
    };
    let code = verdict_code(report.passed);
    Ok(Outcome {
        results: json!({ "which": which, "subgroup": n.elements(), "report": report }),
        code,
    })
}

fn load_lift(inputs: &mut Inputs, path: &Path) -> Result<Lift, CliError> {
    let file: LiftFile = parse_json(&inputs.read(path)?, "lift file")?;
    Ok(file.lift()?)
}

fn parse_ring(inputs: &mut Inputs, spec: &str, field: crate::linalg::PrimeField) -> Result<ArtinianRing, CliError> {
    let text = if spec.trim_start().starts_with('{') {
        inputs.absorb(spec.as_bytes());
        spec.to_string()
    } else {
        inputs.read(Path::new(spec))?
    };
    let spec: crate::deform::RingSpec = parse_json(&text, "ring")?;
    Ok(ArtinianRing::from_spec(field, &spec)?)
}

/// Re-indexes a lift of a subgroup (or quotient) action read from a file
/// onto `target`, matching elements by their reduced series.
fn reindex(l: &Lift, target: &LocalAction) -> Result<Lift, CliError> {
    let n = target.group().order();
    if l.base().group().order() != n {
        return Err(CliError::invalid(format!("a lift of a group of order {} where order {n} is expected", l.base().group().order())));
    }
    let prec = l.prec().min(target.prec());
    let mut series = Vec::with_capacity(n);
    for j in 0..n {
        let want = target.series(j).truncate(prec);
        let i = (0..n)
            .find(|&i| l.base().series(i).truncate(prec).agrees_with(&want))
            .ok_or_else(|| CliError::invalid(format!("no element of the lift file reduces to element {j} of the expected action")))?;
        series.push(l.series(i).truncate(prec));
    }
    Ok(Lift::new(&target.truncate(prec), l.ring(), series)?)
}

fn components_json(o: &crate::deform::Obstruction) -> Value {
    json!({ "from": o.from, "to": o.to, "vanishes": o.vanishes(), "components": o.components })
}

fn obstruct(inputs: &mut Inputs, path: &Path, ext: &str, relative: Option<&[PathBuf]>, sub: Option<&str>, g: &GlobalArgs) -> Result<Outcome, CliError> {
    let kappa = load_lift(inputs, path)?;
    let big = parse_ring(inputs, ext, kappa.ring().field())?;
    let e = SmallExtension::new(&big, kappa.ring())?;
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let Some(rel) = relative else {
        let space = DerivationSpace::new(kappa.base(), g.trunc)?;
        let zero_fill = obstruction_cocycle(&kappa, &e, &space, None)?;
        let r1 = obstruction_cocycle(&kappa, &e, &space, Some(&mut rng))?;
        let r2 = obstruction_cocycle(&kappa, &e, &space, Some(&mut rng))?;
        let stable = zero_fill.components == r1.components && r1.components == r2.components;
        return Outcome::ok(json!({
            "kind": "absolute",
            "obstruction": components_json(&zero_fill),
            "truncation": space.levels().m,
            "audit": { "reevaluations": 2, "stable": stable },
        }));
    };
    let kn_file = load_lift(inputs, &rel[0])?;
    let kq_file = load_lift(inputs, &rel[1])?;
    let a = kappa.base().clone();
    let grp = a.group();
    // the subgroup is read off the elements of the subgroup lift
    let prec = kn_file.prec().min(a.prec());
    let mut elements = Vec::new();
    for i in 0..kn_file.base().group().order() {
        let s = kn_file.base().series(i).truncate(prec);
        let j = (0..grp.order())
            .find(|&j| a.series(j).truncate(prec).agrees_with(&s))
            .ok_or_else(|| CliError::invalid(format!("element {i} of the subgroup lift is not an element of the action")))?;
        elements.push(j);
    }
    elements.sort_unstable();
    let n = Subgroup::new(grp, &elements)?;
    if let Some(s) = sub {
        if parse_subgroup(grp, s)?.elements() != n.elements() {
            return Err(CliError::invalid("--subgroup differs from the elements of the subgroup lift"));
        }
    }
    let t = tower(&a, &n, g)?;
    let ctx = RelativeContext::new(&t)?;
    let kn = reindex(&kn_file, &t.action().restrict(&n))?;
    let kq = reindex(&kq_file, t.quotient_action())?;
    let first = ctx.relative_obstruction(&kappa, &kn, &kq, &e, Some(&mut rng))?;
    let second = ctx.relative_obstruction(&kappa, &kn, &kq, &e, Some(&mut rng))?;
    let plain = ctx.relative_obstruction(&kappa, &kn, &kq, &e, None)?;
    let key = |o: &crate::deform::RelativeObstruction| o.components.iter().map(|c| c.obstruction.clone()).collect::<Vec<_>>();
    let stable = key(&first) == key(&second) && key(&first) == key(&plain);
    let completion = if plain.vanishes() {
        match ctx.complete_lift(&kappa, &kn, &kq, &e, Some(&mut rng))? {
            Some(l) => serde_json::to_value(LiftFile::from_lift(&l)).map_err(|e| CliError::new(EXIT_INTERNAL, "internal", e.to_string()))?,
            None => return Err(CliError::new(EXIT_INTERNAL, "internal", "the obstruction vanishes but no completion was found")),
        }
    } else {
        Value::Null
    };
    Outcome::ok(json!({
        "kind": "relative",
        "subgroup": n.elements(),
        "truncation": t.levels().m,
        "from": e.big().name(),
        "to": e.small().name(),
        "obstruction": plain,
        "vanishes": plain.vanishes(),
        "audit": { "reevaluations": 2, "stable": stable },
        "completion": completion,
    }))
}

/// Module, subgroup and quotient of an `hsmap` invocation.
struct HsInput {
    module: GModule,
    n: Subgroup,
    q: QuotientGroup,
    eta: Cochain,
}

fn hs_inputs(inputs: &mut Inputs, group: &Path, module: &Path, cocycle: &Path, sub: Option<&str>) -> Result<HsInput, CliError> {
    let gf: GroupFile = parse_json(&inputs.read(group)?, "group file")?;
    let mf: ModuleFile = parse_json(&inputs.read(module)?, "module file")?;
    let cf: CochainFile = parse_json(&inputs.read(cocycle)?, "cocycle file")?;
    let grp = gf.group()?;
    let m = mf.module()?;
    if m.group().table() != grp.table() {
        return Err(CliError::invalid("the module is over a different group table"));
    }
    let n = match sub {
        Some(s) => parse_subgroup(&grp, s)?,
        None => gf
            .subgroup(&grp)?
            .ok_or_else(|| CliError::invalid("the group file names no subgroup; pass --subgroup"))?,
    };
    normal(&grp, &n)?;
    let q = QuotientGroup::new(&grp, &n)?;
    let eta = cf.cochain(&m)?;
    if eta.degree() != 2 {
        return Err(CliError::invalid(format!("a 2-cocycle is required, got degree {}", eta.degree())));
    }
    if !crate::groups::is_cocycle(&m, &eta)? {
        return Err(CliError::invalid("the cochain is not a 2-cocycle"));
    }
    Ok(HsInput { module: m, n, q, eta })
}

fn class_of_xis(h: &HsInput, xis: &[Cochain]) -> Result<(Vec<u64>, usize), CliError> {
    let mn = h.module.restrict(&h.n);
    let h1n = cohomology(&mn, 1)?;
    let qm = crate::groups::h1_as_quotient_module(&h.module, &h.n, &h.q, &h1n)?;
    let coords = xis.iter().map(|xi| h1n.coords(xi)).collect::<Result<Vec<_>, _>>()?;
    let c = Cochain::from_fn(1, h.q.order(), h1n.dim(), |a| coords[a[0]].clone());
    let h1q = cohomology(&qm, 1)?;
    Ok((h1q.coords(&c)?, h1q.dim()))
}

fn hsmap(inputs: &mut Inputs, group: &Path, module: &Path, cocycle: &Path, audit: bool, sub: Option<&str>, g: &GlobalArgs) -> Result<Outcome, CliError> {
    let h = hs_inputs(inputs, group, module, cocycle, sub)?;
    let mn = h.module.restrict(&h.n);
    let eta_n = restrict(&h.eta, &h.n);
    let solver = CocycleSolver::new(&mn);
    let f = solver
        .solve_coboundary(|x, y| eta_n.value(&[x, y]).to_vec())
        .filter(|f| crate::groups::coboundary(&mn, f).map(|b| b == eta_n).unwrap_or(false))
        .ok_or_else(|| CliError::new(EXIT_NOT_COBOUNDARY, "not-coboundary", "the restriction of the cocycle to the subgroup is not a coboundary"))?;
    let xis = hs_map(&h.module, &h.n, &h.q, &h.eta, &f)?;
    let (class, dim) = class_of_xis(&h, &xis)?;
    let table: Vec<Value> = xis
        .iter()
        .enumerate()
        .map(|(c, xi)| {
            json!({
                "coset": c,
                "representative": h.q.section(c),
                "values": (0..h.n.order()).map(|s| xi.value(&[s]).to_vec()).collect::<Vec<_>>(),
            })
        })
        .collect();
    let vanishes = class.iter().all(|&x| x == 0);
    let mut results = json!({
        "subgroup": h.n.elements(),
        "f": (0..h.n.order()).map(|s| f.value(&[s]).to_vec()).collect::<Vec<_>>(),
        "xi": table,
        "class": class,
        "class_space_dim": dim,
        "vanishes": vanishes,
    });
    if audit {
        let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
        let mut f_independent = true;
        let p = h.module.field().p();
        for _ in 0..g.trials.max(1) {
            let mut f2 = f.clone();
            for z in solver.z1_basis() {
                f2 = f2.add_scaled(h.module.field(), rand::RngCore::next_u64(&mut rng) % p, &z);
            }
            let xis2 = hs_map(&h.module, &h.n, &h.q, &h.eta, &f2)?;
            f_independent &= class_of_xis(&h, &xis2)?.0 == class;
        }
        let all_cocycles = xis.iter().all(|xi| crate::groups::is_cocycle(&mn, xi).unwrap_or(false));
        let inflated = in_image_of_inflation(&h)?;
        results["audit"] = json!({
            "xi_are_cocycles": all_cocycles,
            "independent_of_f": f_independent,
            "in_image_of_inflation": inflated,
            "kernel_law": vanishes == inflated,
            "passed": all_cocycles && f_independent && vanishes == inflated,
        });
        let passed = results["audit"]["passed"].as_bool().unwrap_or(false);
        return Ok(Outcome {
            results,
            code: verdict_code(passed),
        });
    }
    Outcome::ok(results)
}

/// Whether `[η]` lies in the image of inflation from `H²(G/N, M^N)`.
fn in_image_of_inflation(h: &HsInput) -> Result<bool, CliError> {
    let (inv, emb) = h.module.invariant_module(&h.n, &h.q)?;
    let h2q = cohomology(&inv, 2)?;
    let h2 = cohomology(&h.module, 2)?;
    let order = h.module.group().order();
    let field = h.module.field();
    let images = h2q
        .reps()
        .iter()
        .map(|r| h2.coords(&inflate(r, &h.q, order, &emb)))
        .collect::<Result<Vec<_>, _>>()?;
    let target = h2.coords(&h.eta)?;
    let span = crate::linalg::Subspace::from_vectors(field, h2.dim(), &images).map_err(|e| CliError::new(EXIT_INTERNAL, "internal", e.to_string()))?;
    Ok(span.contains(&target))
}

fn quotient(inputs: &mut Inputs, path: &Path, sub: Option<&str>, g: &GlobalArgs) -> Result<Outcome, CliError> {
    let a = load_action(inputs, path, g)?;
    let n = subgroup_or_inertia(&a, sub)?;
    normal(a.group(), &n)?;
    let (_, qa) = a.quotient_action(&n)?;
    let file = ActionFile::from_action(&qa);
    Outcome::ok(json!({
        "subgroup": n.elements(),
        "quotient_order": qa.group().order(),
        "action": file,
    }))
}

fn corpus(write: Option<&Path>) -> Result<Outcome, CliError> {
    if let Some(dir) = write {
        for f in CORPUS {
            let path = dir.join(f.path);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| CliError::invalid(format!("cannot create {}: {e}", parent.display())))?;
            }
            std::fs::write(&path, f.contents).map_err(|e| CliError::invalid(format!("cannot write {}: {e}", path.display())))?;
        }
    }
    let list: Vec<Value> = CORPUS
        .iter()
        .map(|f| {
            json!({
                "name": f.name,
                "kind": f.kind,
                "path": f.path,
                "description": f.description,
                "builder": fixture_action(f.name, 2).is_some(),
            })
        })
        .collect();
    Outcome::ok(json!({ "fixtures": list, "written": write.is_some() }))
}
