//! Command line front end.
//!
//! Exit codes:
//!
//! | code | meaning                                              |
//! |------|------------------------------------------------------|
//! | 0    | success                                              |
//! | 1    | usage or parse error                                 |
//! | 2    | the input fails validation                           |
//! | 3    | precondition violated (e.g. `normalize` with m ≠ k)  |
//! | 4    | I/O error                                            |
//!
//! Reports are pretty JSON on stdout; diagnostics go to stderr.

mod document;

use std::ffi::OsString;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use document::{parse_input, InputDocument, Location, ParseError, FORMAT_VERSION};

use crate::classify;
use crate::freeness::{
    self, CircleSubgroup, FreenessCertificate, FreenessError, DEFAULT_FREE_DIM_BOUND,
};
use crate::lattice::IntegerMatrix;
use crate::polytope::{BlockKind, FaceSelector};
use crate::weights::{self, Mode, WeightedOrbitSpace, WeightsError};

pub const TOOL_NAME: &str = "sphere-quotient";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum ExitStatus {
    Success = 0,
    Usage = 1,
    ValidationFailure = 2,
    Precondition = 3,
    Io = 4,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        self as u8
    }
}

/// What a run would print, and how it exits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub status: ExitStatus,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn failure(status: ExitStatus, message: impl std::fmt::Display) -> Self {
        Outcome {
            status,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = TOOL_NAME, version, about = "Classify torus actions over products of simplices and suspensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the weights against the primitivity, generation and vertex rules
    Validate(Common),
    /// Rewrite square unimodular weights as the identity
    Normalize(Common),
    /// Full classification report
    Classify(WithBound),
    /// Free rank with a certificate
    FreeRank(Common),
    /// Free dimension at a coefficient bound
    FreeDim(WithBound),
    /// The diagonal circles of a normalized input
    Circles(Common),
    /// Faces of the orbit polytope with their codimension and facets
    Faces(Common),
    /// Every freely acting circle with entries bounded by --max-norm
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Input document, or `-` for standard input
    input: PathBuf,
    /// Override the validation mode given in the document
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Args, Debug)]
struct WithBound {
    #[command(flatten)]
    common: Common,
    /// Coefficient bound for the free dimension search
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    bound: Option<u32>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 2)]
    max_norm: u32,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Manifold,
    Orbifold,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Manifold => Mode::Manifold,
            ModeArg::Orbifold => Mode::Orbifold,
        }
    }
}

#[derive(Serialize)]
struct ReportDocument<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    format_version: &'static str,
    command: &'a str,
    input_digest: String,
    mode: Mode,
    status: &'static str,
    result: T,
}

#[derive(Serialize)]
struct NormalizeResult<'a> {
    /// `weights · v = I`.
    v: &'a IntegerMatrix,
    v_inverse: &'a IntegerMatrix,
    normalized_weights: &'a IntegerMatrix,
}

#[derive(Serialize)]
struct RankResult {
    value: usize,
    certificate: FreenessCertificate,
}

#[derive(Serialize)]
struct FreeDimResult {
    value: usize,
    bound: u32,
    exhaustive: bool,
    certificate: FreenessCertificate,
}

#[derive(Serialize)]
struct CirclesResult {
    circles: Vec<CircleSubgroup>,
    acts_freely: Vec<bool>,
    jointly_saturated: bool,
}

#[derive(Serialize)]
struct OracleResult {
    max_norm: u32,
    circles: Vec<CircleSubgroup>,
}

#[derive(Serialize)]
struct FaceEntry {
    face: FaceSelector,
    name: String,
    codim: usize,
    facets: Vec<usize>,
}

#[derive(Serialize)]
struct BlockSummary {
    #[serde(rename = "type")]
    kind: BlockKind,
    dim: usize,
    facets: Vec<String>,
}

#[derive(Serialize)]
struct FacesResult {
    dim: usize,
    facet_count: usize,
    blocks: Vec<BlockSummary>,
    faces: Vec<FaceEntry>,
    opposing_pairs: Vec<(FaceSelector, FaceSelector)>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome {
                        status: ExitStatus::Success,
                        stdout: text,
                        stderr: String::new(),
                    }
                }
                _ => Outcome {
                    status: ExitStatus::Usage,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    run(cli.command)
}

fn read_input(path: &Path) -> std::io::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
    }
}

struct Context {
    name: &'static str,
    doc: InputDocument,
    space: WeightedOrbitSpace,
    mode: Mode,
}

impl Context {
    fn emit<T: Serialize>(&self, status: ExitStatus, result: T) -> Outcome {
        let report = ReportDocument {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            format_version: FORMAT_VERSION,
            command: self.name,
            input_digest: self.doc.digest(),
            mode: self.mode,
            status: match status {
                ExitStatus::Success => "ok",
                _ => "validation_failed",
            },
            result,
        };
        let mut stdout = serde_json::to_string_pretty(&report).expect("report serialization");
        stdout.push('\n');
        let stderr = match status {
            ExitStatus::ValidationFailure => {
                format!("{}: input fails {} validation\n", self.name, self.mode)
            }
            _ => String::new(),
        };
        Outcome {
            status,
            stdout,
            stderr,
        }
    }

    fn validated(&self) -> Result<(), Outcome> {
        let report = weights::validate(&self.space, self.mode);
        if report.passed {
            Ok(())
        } else {
            Err(self.emit(ExitStatus::ValidationFailure, report))
        }
    }

    fn freeness_failure(&self, e: FreenessError) -> Outcome {
        let status = match &e {
            FreenessError::Weights(WeightsError::Invalid { .. }) => ExitStatus::ValidationFailure,
            _ => ExitStatus::Precondition,
        };
        Outcome::failure(status, format!("{}: {e}", self.name))
    }
}

fn run(command: Command) -> Outcome {
    let (name, common) = match &command {
        Command::Validate(c) => ("validate", c),
        Command::Normalize(c) => ("normalize", c),
        Command::Classify(a) => ("classify", &a.common),
        Command::FreeRank(c) => ("free-rank", c),
        Command::FreeDim(a) => ("free-dim", &a.common),
        Command::Circles(c) => ("circles", c),
        Command::Faces(c) => ("faces", c),
        Command::Oracle(a) => ("oracle", &a.common),
    };
    let text = match read_input(&common.input) {
        Ok(t) => t,
        Err(e) => {
            return Outcome::failure(
                ExitStatus::Io,
                format!("cannot read {}: {e}", common.input.display()),
            )
        }
    };
    let doc = match parse_input(&text) {
        Ok(d) => d,
        Err(e) => {
            return Outcome::failure(
                ExitStatus::Usage,
                format!("{}: {e}", common.input.display()),
            )
        }
    };
    let mode = common.mode.map(Mode::from).or(doc.mode).unwrap_or_default();
    let space = doc.space();
    let ctx = Context {
        name,
        doc,
        space,
        mode,
    };
    let bound_or_default = |b: Option<u32>| {
        b.or(ctx.doc.free_dim_bound)
            .unwrap_or(DEFAULT_FREE_DIM_BOUND)
    };

    match command {
        Command::Validate(_) => {
            let report = weights::validate(&ctx.space, mode);
            let status = if report.passed {
                ExitStatus::Success
            } else {
                ExitStatus::ValidationFailure
            };
            ctx.emit(status, report)
        }
        Command::Normalize(_) => normalize(&ctx),
        Command::Classify(a) => {
            match classify::classify(&ctx.space, mode, bound_or_default(a.bound)) {
                Ok(report) => {
                    let status = if report.classification.is_some() {
                        ExitStatus::Success
                    } else {
                        ExitStatus::ValidationFailure
                    };
                    ctx.emit(status, report)
                }
                Err(e) => ctx.freeness_failure(e),
            }
        }
        Command::FreeRank(_) => {
            if let Err(out) = ctx.validated() {
                return out;
            }
            match freeness::free_rank(&ctx.space) {
                Ok((value, certificate)) => {
                    ctx.emit(ExitStatus::Success, RankResult { value, certificate })
                }
                Err(e) => ctx.freeness_failure(e),
            }
        }
        Command::FreeDim(a) => {
            if let Err(out) = ctx.validated() {
                return out;
            }
            let bound = bound_or_default(a.bound);
            match freeness::free_dimension(&ctx.space, bound) {
                Ok((value, certificate)) => ctx.emit(
                    ExitStatus::Success,
                    FreeDimResult {
                        value,
                        bound,
                        exhaustive: certificate.exhaustive,
                        certificate,
                    },
                ),
                Err(e) => ctx.freeness_failure(e),
            }
        }
        Command::Circles(_) => circles(&ctx),
        Command::Faces(_) => ctx.emit(ExitStatus::Success, faces(&ctx.space)),
        Command::Oracle(a) => {
            if let Err(out) = ctx.validated() {
                return out;
            }
            let circles = freeness::oracle_enumerate_free_circles(&ctx.space, a.max_norm);
            ctx.emit(
                ExitStatus::Success,
                OracleResult {
                    max_norm: a.max_norm,
                    circles,
                },
            )
        }
    }
}

fn normalize(ctx: &Context) -> Outcome {
    if ctx.space.facet_count() != ctx.space.torus_rank() {
        return Outcome::failure(
            ExitStatus::Precondition,
            format!(
                "normalize: needs as many facets as the torus rank, got m = {} and k = {}",
                ctx.space.facet_count(),
                ctx.space.torus_rank()
            ),
        );
    }
    let report = weights::validate(&ctx.space, Mode::Manifold);
    if !report.passed {
        return ctx.emit(ExitStatus::ValidationFailure, report);
    }
    match weights::normalize(&ctx.space) {
        Ok((normalized, change)) => ctx.emit(
            ExitStatus::Success,
            NormalizeResult {
                v: change.matrix(),
                v_inverse: change.inverse().matrix(),
                normalized_weights: normalized.weights(),
            },
        ),
        Err(e) => Outcome::failure(ExitStatus::Precondition, format!("normalize: {e}")),
    }
}

fn circles(ctx: &Context) -> Outcome {
    if let Err(out) = ctx.validated() {
        return out;
    }
    let circles = match freeness::lemma_free_circles(&ctx.space) {
        Ok(c) => c,
        Err(FreenessError::NotNormalized) => {
            return Outcome::failure(
                ExitStatus::Precondition,
                "circles: weights must be the identity matrix; run `normalize` first",
            )
        }
        Err(e) => return ctx.freeness_failure(e),
    };
    let mut acts_freely = Vec::with_capacity(circles.len());
    for c in &circles {
        match freeness::acts_freely(&ctx.space, c) {
            Ok(b) => acts_freely.push(b),
            Err(e) => return ctx.freeness_failure(e),
        }
    }
    let stacked = IntegerMatrix::from_rows(
        ctx.space.torus_rank(),
        circles.iter().map(|c| c.weight().to_vec()).collect(),
    )
    .expect("circle lengths match the torus rank");
    let jointly_saturated = crate::lattice::is_saturated(&stacked).unwrap_or(false);
    ctx.emit(
        ExitStatus::Success,
        CirclesResult {
            circles,
            acts_freely,
            jointly_saturated,
        },
    )
}

fn faces(w: &WeightedOrbitSpace) -> FacesResult {
    let p = w.polytope();
    let blocks = p
        .blocks()
        .iter()
        .enumerate()
        .map(|(i, b)| BlockSummary {
            kind: b.kind(),
            dim: b.dim(),
            facets: p.facet_range(i).map(|f| p.facet_label(f)).collect(),
        })
        .collect();
    let faces = p
        .faces()
        .into_iter()
        .map(|face| FaceEntry {
            name: face.to_string(),
            codim: p.codim(&face).expect("enumerated faces are valid"),
            facets: p
                .facets_containing(&face)
                .expect("enumerated faces are valid"),
            face,
        })
        .collect();
    FacesResult {
        dim: p.dim(),
        facet_count: p.facet_count(),
        blocks,
        faces,
        opposing_pairs: p.opposing_pairs(),
    }
}
