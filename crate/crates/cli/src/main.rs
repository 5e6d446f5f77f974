use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gal_core::artifact::{artifact_fingerprint, basis_of_degree};
use gal_core::graded::GradingReport;
use gal_core::isoclass::decide_with_fingerprints;
use gal_core::{
    build, census, default_field, verify_artifact, verify_witness, Artifact, Elem, Error, FinAbGroup, Fingerprint,
    Kind, ParamSpec, RootField,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "gal", version, about = "Graded matrix and Lie algebras over prime fields")]
struct Cli {
    /// Prime for the coefficient field (default: smallest suitable prime).
    #[arg(long, global = true)]
    prime: Option<u64>,
    /// Largest matrix size accepted.
    #[arg(long, global = true, default_value_t = 32)]
    max_n: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a model and write its artifact.
    Construct(ConstructArgs),
    /// Check an artifact against the grading axioms.
    Verify {
        file: PathBuf,
        /// Expect the refined Type II decomposition to fail as an associative grading.
        #[arg(long)]
        associative: bool,
    },
    /// Print the basis matrices of one degree.
    Basis {
        file: PathBuf,
        /// Degree as comma-separated coordinates.
        #[arg(long)]
        degree: String,
    },
    /// Decide graded isomorphism of two models (parameter or artifact files).
    DecideIso { a: PathBuf, b: PathBuf },
    /// Print isomorphism invariants of a model.
    Fingerprint { file: PathBuf },
    /// Enumerate all parameter tuples up to a size and bucket them into classes.
    Sweep {
        /// Invariant factors of the group, comma separated (empty for the trivial group).
        #[arg(long, default_value = "")]
        group: String,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n_bound: usize,
        /// Write the census as JSON instead of a table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConstructArgs {
    /// assoc, assoc-antiauto, assoc-involution, sl-I, sl-II, so or sp.
    kind: Option<String>,
    /// JSON parameter file; inline flags are ignored when given.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value = "")]
    group: String,
    /// Generators of T (of H for sl-II), e.g. "1,0;0,1".
    #[arg(long, default_value = "")]
    t: String,
    /// Gram exponents of beta on the canonical generators, e.g. "0,1;1,0".
    #[arg(long)]
    beta: Option<String>,
    #[arg(long, required_unless_present = "params")]
    kappa: Option<String>,
    #[arg(long)]
    g0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<i8>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    #[arg(long)]
    h: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mu0: Option<i64>,
    /// Store every basis matrix in the artifact.
    #[arg(long)]
    matrices: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    /// Parse or parameter problem: exit 2.
    Input(String),
    /// Mathematical violation: exit 1.
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::VerificationFailure(_) | Error::SplittingViolation(_) | Error::Internal(_) => {
                Failure::Violation(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| input(format!("cannot parse {x:?} in {s:?}"))))
        .collect()
}

fn rows<T: std::str::FromStr>(s: &str) -> Result<Vec<Vec<T>>, Failure> {
    s.split(';').filter(|r| !r.trim().is_empty()).map(list).collect()
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, s: &str) -> Outcome {
    fs::write(path, s).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn field_for(group: &[u32], prime: Option<u64>) -> Result<RootField, Failure> {
    Ok(default_field(&FinAbGroup::new(group)?, prime)?)
}

/// Builds the artifact for a parameter spec.
fn construct_artifact(spec: &ParamSpec, cli: &Cli, matrices: bool) -> Result<Artifact, Failure> {
    let field = field_for(&spec.group, cli.prime)?;
    let p = gal_core::ParamTuple::from_spec(spec, &field)?;
    if p.n() > cli.max_n {
        return Err(input(format!("n = {} exceeds --max-n {}", p.n(), cli.max_n)));
    }
    let real = build(&p, &field)?;
    Ok(Artifact::from_realization(&p, &real, &field, matrices))
}

/// Reads an artifact, or a parameter file which is then constructed.
fn load(path: &Path, cli: &Cli) -> Result<Artifact, Failure> {
    let s = read(path)?;
    let v: serde_json::Value = serde_json::from_str(&s).map_err(|e| input(format!("{}: {e}", path.display())))?;
    if v.get("header").is_some() {
        let a = Artifact::from_json(&s)?;
        if cli.prime.is_some_and(|p| p != a.header.p) {
            return Err(input(format!("--prime differs from the artifact field p = {}", a.header.p)));
        }
        Ok(a)
    } else {
        let spec: ParamSpec = serde_json::from_value(v).map_err(|e| input(format!("{}: {e}", path.display())))?;
        construct_artifact(&spec, cli, false)
    }
}

fn coords(g: &FinAbGroup, e: Elem) -> String {
    let c: Vec<String> = g.coords(e).iter().map(u32::to_string).collect();
    format!("({})", c.join(","))
}

fn dims_line(g: &FinAbGroup, dims: &[(Elem, usize)]) -> String {
    dims.iter().map(|&(e, d)| format!("{}: {d}", coords(g, e))).collect::<Vec<_>>().join(", ")
}

fn fingerprint_json(g: &FinAbGroup, f: &Fingerprint) -> serde_json::Value {
    let c = |e: &Elem| g.coords(*e);
    json!({
        "support": f.support.iter().map(c).collect::<Vec<_>>(),
        "dims": f.dims.iter().map(|(e, d)| json!([c(e), d])).collect::<Vec<_>>(),
        "support_subgroup": f.support_subgroup.iter().map(c).collect::<Vec<_>>(),
        "identity_blocks": f.identity_blocks,
    })
}

/// Group grading the associative ambient (`G/<h>` for Type II models).
fn ambient_group(a: &Artifact) -> Result<FinAbGroup, Failure> {
    Ok(FinAbGroup::new(a.header.quotient.as_ref().unwrap_or(&a.header.group))?)
}

/// Group grading the model itself: Lie components are always graded by `G`.
fn model_group(a: &Artifact) -> Result<FinAbGroup, Failure> {
    if a.lie.is_some() {
        Ok(FinAbGroup::new(&a.header.group)?)
    } else {
        ambient_group(a)
    }
}

fn print_report(name: &str, g: &FinAbGroup, r: &GradingReport) {
    println!("{name}: dimension {}, components {}", r.total_dim, dims_line(g, &r.dims));
    if let Some(d) = &r.direct_sum_failure {
        println!("  sum not direct: dimensions add to {} but span {}", d.sum_of_dims, d.dim_of_sum);
    }
    for v in &r.violations {
        println!("  violation ({}, {}, x{} * y{})", coords(g, v.g), coords(g, v.h), v.x, v.y);
    }
}

fn cmd_construct(args: &ConstructArgs, cli: &Cli) -> Outcome {
    let spec = match &args.params {
        Some(path) => {
            let spec: ParamSpec =
                serde_json::from_str(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
            if let Some(k) = &args.kind {
                if Kind::parse(k)? != spec.kind {
                    return Err(input(format!("kind {k} differs from the parameter file")));
                }
            }
            spec
        }
        None => {
            let kind = Kind::parse(args.kind.as_deref().ok_or_else(|| input("construct needs a kind or --params"))?)?;
            ParamSpec {
                kind,
                group: list(&args.group)?,
                t: rows(&args.t)?,
                beta: args.beta.as_deref().map(rows).transpose()?,
                kappa: list(args.kappa.as_deref().unwrap_or_default())?,
                g0: args.g0.as_deref().map(list).transpose()?,
                delta: args.delta,
                mu: args.mu.as_deref().map(list).transpose()?,
                h: args.h.as_deref().map(list).transpose()?,
                mu0: args.mu0,
            }
        }
    };
    let a = construct_artifact(&spec, cli, args.matrices)?;
    let g = model_group(&a)?;
    let mut summary = format!("kind {}, n = {}\n", a.params.kind.name(), a.n);
    match &a.lie {
        Some(l) => {
            let dims: Vec<(Elem, usize)> = l
                .components
                .iter()
                .map(|c| Ok((g.from_coords(&c.degree.iter().map(|&x| x as i64).collect::<Vec<_>>())?, c.basis.len())))
                .collect::<Result<_, Error>>()?;
            summary += &format!("Lie dimension {}\ncomponents {}\n", l.dim, dims_line(&g, &dims));
        }
        None => {
            let mut dims: std::collections::BTreeMap<Elem, usize> = Default::default();
            for e in &a.basis {
                *dims.entry(g.from_coords(&e.degree.iter().map(|&x| x as i64).collect::<Vec<_>>())?).or_default() += 1;
            }
            summary += &format!("components {}\n", dims_line(&g, &dims.into_iter().collect::<Vec<_>>()));
        }
    }
    let text = a.to_json() + "\n";
    match &args.out {
        Some(path) => {
            write(path, &text)?;
            print!("{summary}");
        }
        None => {
            print!("{text}");
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn cmd_verify(path: &Path, associative: bool, cli: &Cli) -> Outcome {
    let a = load(path, cli)?;
    let (ga, gm) = (ambient_group(&a)?, model_group(&a)?);
    let rep = verify_artifact(&a, associative)?;
    print_report("associative ambient", &ga, &rep.ambient);
    if let Some(r) = &rep.lie {
        print_report("Lie", &gm, r);
    }
    if let Some(r) = &rep.refined_lie {
        print_report("refined Lie", &gm, r);
    }
    if let Some(r) = &rep.refined_associative {
        print_report("refined associative", &gm, r);
    }
    for i in &rep.issues {
        println!("issue: {i}");
    }
    if associative {
        println!(
            "{}",
            if rep.ok {
                "refined decomposition is not an associative grading, as expected"
            } else {
                "refined decomposition unexpectedly closes under the associative product"
            }
        );
    }
    if rep.ok {
        println!("ok");
        Ok(())
    } else {
        Err(Failure::Violation("verification failed".into()))
    }
}

fn cmd_basis(path: &Path, degree: &str, cli: &Cli) -> Outcome {
    let a = load(path, cli)?;
    let d: Vec<u32> = list(degree)?;
    if d.len() != model_group(&a)?.factors().len() {
        return Err(input(format!("degree {degree:?} has the wrong number of coordinates")));
    }
    let b = basis_of_degree(&a, &d)?;
    println!("{}", serde_json::to_string(&json!({ "degree": d, "dim": b.len(), "basis": b })).expect("json"));
    Ok(())
}

fn cmd_decide(pa: &Path, pb: &Path, cli: &Cli) -> Outcome {
    let (a, b) = (load(pa, cli)?, load(pb, cli)?);
    if a.header != b.header {
        return Err(input("the two models live over different groups or fields"));
    }
    let field = a.field()?;
    let (p, q) = (a.params()?, b.params()?);
    let d = decide_with_fingerprints(&p, &q, &field)?;
    println!("{}", serde_json::to_string_pretty(&d).expect("json"));
    if d.is_equivalent() {
        verify_witness(&p, &q, &d, &field)?;
        println!("witness verified");
    }
    Ok(())
}

fn cmd_fingerprint(path: &Path, cli: &Cli) -> Outcome {
    let a = load(path, cli)?;
    let f = artifact_fingerprint(&a)?;
    println!("{}", serde_json::to_string_pretty(&fingerprint_json(&model_group(&a)?, &f)).expect("json"));
    Ok(())
}

fn cmd_sweep(group: &str, kind: &str, n_bound: usize, out: Option<&Path>, cli: &Cli) -> Outcome {
    if n_bound > cli.max_n {
        return Err(input(format!("n-bound {n_bound} exceeds --max-n {}", cli.max_n)));
    }
    let factors: Vec<u32> = list(group)?;
    let g = FinAbGroup::new(&factors)?;
    let field = default_field(&g, cli.prime)?;
    let c = census(&g, Kind::parse(kind)?, n_bound, &field)?;
    if let Some(path) = out {
        return write(path, &(serde_json::to_string_pretty(&c).expect("json") + "\n"));
    }
    println!("group {:?} kind {} n-bound {}", c.group, c.kind.name(), c.max_n);
    println!("tuples {} classes {}", c.tuples, c.classes.len());
    for (i, cl) in c.classes.iter().enumerate() {
        println!(
            "n {} class {} size {}: {}",
            cl.n,
            i + 1,
            cl.size,
            serde_json::to_string(&cl.representative).expect("json")
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match &cli.cmd {
        Cmd::Construct(args) => cmd_construct(args, &cli),
        Cmd::Verify { file, associative } => cmd_verify(file, *associative, &cli),
        Cmd::Basis { file, degree } => cmd_basis(file, degree, &cli),
        Cmd::DecideIso { a, b } => cmd_decide(a, b, &cli),
        Cmd::Fingerprint { file } => cmd_fingerprint(file, &cli),
        Cmd::Sweep { group, kind, n_bound, out } => cmd_sweep(group, kind, *n_bound, out.as_deref(), &cli),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
