use std::io::{Read, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ramify::expr::{parse_map, parse_point, parse_points};
use ramify::fgt::{
    base_verdicts, bend, check_general_covering, check_missed_fiber, check_rh, check_tc,
    classify_covering, ell_bound_consequences, enumerate_admissible, no_extension_two_missed,
    obstruct_three_missed, Bounds, Classification, EndClass, FgtRecord, DEFAULT_NODE_BUDGET,
};
use ramify::lifting::{
    local_lift, passport_lift_feasibility, EndOverValue, Feasibility, SheetPolicy,
};
use ramify::monodromy::{
    monodromy_rep, regularity_probe, surjectivity_criterion, MonodromyOptions,
};
use ramify::picard::{check_converse, AnyPicard, PicardConfig, TargetedPicard};
use ramify::{Approx, Error, Exact, Passport, RationalMap, Scalar, SpherePoint};

#[derive(Parser)]
#[command(
    name = "ramify",
    version,
    about = "Branched coverings of the Riemann sphere"
)]
struct Cli {
    /// Seed for every random sample drawn by a command.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Scalar backend for map and point input.
    #[arg(
        long,
        global = true,
        value_enum,
        env = "RAMIFY_BACKEND",
        default_value = "exact"
    )]
    backend: Backend,
    /// `json` prints one compact line; `text` indents.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Exact,
    Approx,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Passport over a set of values, critical points and the
    /// Riemann–Hurwitz sum of a rational map.
    AnalyzeMap {
        /// Rational expression in z, e.g. '(z-1)^3*(z+3)/z'.
        #[arg(long)]
        map: String,
        /// Values separated by ';', e.g. '0;16;inf'.
        #[arg(long)]
        over: String,
    },
    /// The degree-4 covering branched over {0, w, ∞}, or normalised to be
    /// branched over three given points.
    ConstructPicard {
        #[arg(long, conflicts_with = "targets", required_unless_present = "targets")]
        w: Option<String>,
        /// Three points separated by ';'.
        #[arg(long)]
        targets: Option<String>,
    },
    /// Monodromy permutations about each puncture by path tracking.
    Monodromy {
        #[arg(long)]
        map: String,
        /// Punctures separated by ';'; must include every branch value.
        #[arg(long)]
        punctures: String,
        /// Finite regular base value; chosen automatically when omitted.
        #[arg(long)]
        base: Option<String>,
        /// Loop radius as a fraction of the distance to the nearest other
        /// special value.
        #[arg(long, default_value_t = 0.2)]
        radius_factor: f64,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        /// Random regular values sampled to confirm the covering is
        /// unbranched off the punctures.
        #[arg(long, default_value_t = 50)]
        probe_trials: usize,
    },
    /// Local lifting criterion, or lift feasibility against a passport.
    CheckLift(CheckLiftArgs),
    /// Integer bookkeeping for surfaces of finite geometric type.
    #[command(subcommand)]
    Fgt(FgtCommand),
}

#[derive(Args)]
struct CheckLiftArgs {
    #[arg(long = "beta-f", requires = "beta_big_f", conflicts_with_all = ["passport", "ends"])]
    beta_f: Option<u64>,
    #[arg(long = "beta-F", id = "beta_big_f", requires = "beta_f")]
    beta_big_f: Option<u64>,
    /// Passport JSON file ('-' for stdin).
    #[arg(long, requires = "ends", required_unless_present = "beta_f")]
    passport: Option<String>,
    /// JSON list of {"value": point, "beta": b}.
    #[arg(long, requires = "passport")]
    ends: Option<String>,
    /// Only ramified preimages are available.
    #[arg(long)]
    force_ramified: bool,
}

#[derive(Subcommand)]
enum FgtCommand {
    /// Base identities and their consequences for one record.
    Check { file: String },
    /// All records within the bounds satisfying the base identities, one
    /// per line.
    Enumerate {
        #[arg(long)]
        g_max: u64,
        #[arg(long)]
        n_max: u64,
        #[arg(long)]
        m_max: u64,
        #[arg(long)]
        b_max: u64,
        /// Keep only records with the given number of omitted values, e.g.
        /// 'l=3'.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Classification when the Gauss map is an unbranched covering.
    Classify { file: String },
    /// Lift a record omitting three values and report the contradiction.
    Obstruct { file: String },
    /// Move the ends of one value class to a fresh value.
    Bend {
        file: String,
        /// Class such as 'missed:1', 'regular' or 'regular:a'.
        #[arg(long)]
        from: String,
        /// Fresh value id.
        #[arg(long)]
        to: String,
    },
    /// Continuous-extension check for a record omitting two values.
    NoExtension {
        file: String,
        /// Fresh id of the auxiliary attained value.
        #[arg(long, default_value = "w")]
        w: String,
    },
}

/// A report and whether its verdict holds.
type Outcome = (Value, bool);

fn usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse(_)
            | Error::InvalidInput(_)
            | Error::InvalidRecord(_)
            | Error::DegenerateW
            | Error::DegenerateTriple
            | Error::DegenerateMobius
            | Error::ZeroDenominator
            | Error::ConstantMap
            | Error::DegreeTooLarge(_)
            | Error::MalformedPassport(_)
            | Error::UnknownValue(_)
            | Error::UnknownValueClass(_)
            | Error::PreconditionViolated(_)
            | Error::BoundsTooLarge(_)
    )
}

fn read_input(path: &str) -> Result<String, Error> {
    let mut s = String::new();
    let res = if path == "-" {
        std::io::stdin().read_to_string(&mut s).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| s = t)
    };
    res.map_err(|e| Error::InvalidInput(format!("{path}: {e}")))?;
    Ok(s)
}

fn read_record(path: &str) -> Result<FgtRecord, Error> {
    FgtRecord::from_json_str(&read_input(path)?)
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("reports serialize")
}

fn analyze<S: Scalar>(map: &str, over: &str) -> Result<Outcome, Error> {
    let f: RationalMap<S> = parse_map(map)?;
    let values = parse_points::<S>(over)?;
    let passport = f.passport_over(&values)?;
    let critical = f.critical_points()?;
    let sum: usize = critical.iter().map(|c| c.beta).sum();
    let expected = 2 * f.degree() - 2;
    let crit_json: Vec<Value> = critical
        .iter()
        .map(|c| json!({ "point": c.location.to_json(), "beta": c.beta }))
        .collect();
    Ok((
        json!({
            "backend": S::NAME,
            "map": f.to_json(),
            "degree": f.degree(),
            "passport": to_value(&passport),
            "critical_points": crit_json,
            "rh": { "sum_beta": sum, "expected": expected, "holds": sum == expected },
            "surjectivity_criterion": surjectivity_criterion(&passport),
        }),
        sum == expected,
    ))
}

fn picard_with_converse<S: Scalar>(c: &PicardConfig<S>) -> Result<Value, Error> {
    let converse = check_converse(&c.passport, &c.targets, &[])?;
    let mut v = c.to_json();
    v["total_beta"] = json!(c.total_beta()?);
    v["converse"] = to_value(&converse);
    v["verified"] = json!(true);
    Ok(v)
}

fn construct_picard(
    backend: Backend,
    w: Option<&str>,
    targets: Option<&str>,
) -> Result<Outcome, Error> {
    if let Some(w) = w {
        let w: SpherePoint<Exact> = parse_point(w)?;
        let v = match backend {
            Backend::Exact => match AnyPicard::construct(&w)? {
                AnyPicard::Exact(c) => picard_with_converse(&c)?,
                AnyPicard::Approx(c) => picard_with_converse(&c)?,
            },
            Backend::Approx => {
                picard_with_converse(&PicardConfig::<Approx>::construct(&w.to_approx())?)?
            }
        };
        return Ok((v, true));
    }
    let targets = targets.expect("clap requires --w or --targets");
    fn build<S: Scalar>(t: &str) -> Result<Value, Error> {
        let pts = parse_points::<S>(t)?;
        let arr: [SpherePoint<S>; 3] = pts.try_into().map_err(|p: Vec<_>| {
            Error::InvalidInput(format!("expected 3 targets, got {}", p.len()))
        })?;
        let t = TargetedPicard::construct(&arr)?;
        let mut v = t.to_json();
        v["verified"] = json!(true);
        Ok(v)
    }
    let v = match backend {
        Backend::Exact => build::<Exact>(targets)?,
        Backend::Approx => build::<Approx>(targets)?,
    };
    Ok((v, true))
}

#[allow(clippy::too_many_arguments)]
fn monodromy(
    map: &str,
    punctures: &str,
    base: Option<&str>,
    radius_factor: f64,
    samples: usize,
    probe_trials: usize,
    seed: u64,
) -> Result<Outcome, Error> {
    let f: RationalMap<Exact> = parse_map(map)?;
    let approx = f.to_approx();
    let pts: Vec<SpherePoint<Approx>> = parse_points::<Exact>(punctures)?
        .iter()
        .map(SpherePoint::to_approx)
        .collect();
    let base = match base {
        Some(b) => match parse_point::<Exact>(b)?.to_approx() {
            SpherePoint::Finite(c) => Some(c),
            SpherePoint::Infinity => {
                return Err(Error::InvalidInput("the base must be finite".into()))
            }
        },
        None => None,
    };
    let options = MonodromyOptions {
        radius_factor,
        samples,
        ..MonodromyOptions::default()
    };
    let rep = monodromy_rep(&approx, &pts, base, &options)?;
    let passport = approx.passport_over(&pts)?;
    let probe = regularity_probe(&approx, &pts, probe_trials, seed)?;
    let ok = rep.product_is_identity && rep.transitive && probe.regular;
    let mut v = to_value(&rep);
    v["surjectivity_criterion"] = json!(surjectivity_criterion(&passport));
    v["regularity_probe"] = to_value(&probe);
    Ok((v, ok))
}

fn check_lift<S: Scalar>(args: &CheckLiftArgs) -> Result<Outcome, Error> {
    if let (Some(small), Some(big)) = (args.beta_f, args.beta_big_f) {
        let lift = local_lift(small, big);
        return Ok((
            json!({ "beta_f": small, "beta_F": big, "liftable": lift.is_some(), "lift": lift }),
            lift.is_some(),
        ));
    }
    let (Some(p), Some(e)) = (&args.passport, &args.ends) else {
        return Err(Error::InvalidInput(
            "give --beta-f and --beta-F, or --passport and --ends".into(),
        ));
    };
    let passport: Passport<S> = serde_json::from_str(&read_input(p)?)
        .map_err(|e| Error::MalformedPassport(e.to_string()))?;
    let ends: Vec<EndOverValue<S>> = serde_json::from_str(&read_input(e)?)
        .map_err(|e| Error::InvalidInput(format!("ends: {e}")))?;
    let policy = if args.force_ramified {
        SheetPolicy::ForceRamified
    } else {
        SheetPolicy::Any
    };
    let report = passport_lift_feasibility(&passport, &ends, policy)?;
    let ok = report.verdict == Feasibility::Feasible;
    Ok((to_value(&report), ok))
}

fn fgt(cmd: &FgtCommand) -> Result<Outcome, Error> {
    match cmd {
        FgtCommand::Check { file } => {
            let r = read_record(file)?;
            let verdicts = base_verdicts(&r);
            let holds = verdicts == [true; 3];
            let consequences = if holds {
                to_value(&ell_bound_consequences(&r)?)
            } else {
                Value::Null
            };
            Ok((
                json!({
                    "rh": to_value(&check_rh(&r)),
                    "tc": to_value(&check_tc(&r)),
                    "missed_fiber": to_value(&check_missed_fiber(&r)),
                    "consequences": consequences,
                    "general": to_value(&check_general_covering(&r)),
                    "verdict": holds,
                }),
                holds,
            ))
        }
        FgtCommand::Enumerate {
            g_max,
            n_max,
            m_max,
            b_max,
            filter,
            budget,
        } => {
            let ell = match filter.as_deref() {
                None => None,
                Some(f) => {
                    let (key, val) = f.split_once('=').ok_or_else(|| {
                        Error::InvalidInput(format!("filter {f:?} is not key=value"))
                    })?;
                    if !matches!(key.trim(), "l" | "ell") {
                        return Err(Error::InvalidInput(format!("unknown filter key {key:?}")));
                    }
                    Some(
                        val.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::InvalidInput(format!("filter value {val:?}")))?,
                    )
                }
            };
            let bounds = Bounds {
                g_max: *g_max,
                n_max: *n_max,
                m_max: *m_max,
                b_max: *b_max,
            };
            let records = enumerate_admissible(&bounds, *budget)?;
            let kept: Vec<Value> = records
                .iter()
                .filter(|r| ell.is_none_or(|l| r.ell() == l))
                .map(to_value)
                .collect();
            Ok((Value::Array(kept), true))
        }
        FgtCommand::Classify { file } => {
            let c = classify_covering(&read_record(file)?)?;
            let ok = !matches!(c, Classification::Infeasible { .. });
            Ok((to_value(&c), ok))
        }
        FgtCommand::Obstruct { file } => {
            let o = obstruct_three_missed(&read_record(file)?)?;
            let ok = !o.record_passes;
            Ok((to_value(&o), ok))
        }
        FgtCommand::Bend { file, from, to } => {
            let from: EndClass = from.parse()?;
            Ok((to_value(&bend(&read_record(file)?, &from, to)?), true))
        }
        FgtCommand::NoExtension { file, w } => {
            let o = no_extension_two_missed(&read_record(file)?, w)?;
            let ok = !o.record_passes;
            Ok((to_value(&o), ok))
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::AnalyzeMap { map, over } => match cli.backend {
            Backend::Exact => analyze::<Exact>(map, over),
            Backend::Approx => analyze::<Approx>(map, over),
        },
        Command::ConstructPicard { w, targets } => {
            construct_picard(cli.backend, w.as_deref(), targets.as_deref())
        }
        Command::Monodromy {
            map,
            punctures,
            base,
            radius_factor,
            samples,
            probe_trials,
        } => monodromy(
            map,
            punctures,
            base.as_deref(),
            *radius_factor,
            *samples,
            *probe_trials,
            cli.seed,
        ),
        Command::CheckLift(args) => match cli.backend {
            Backend::Exact => check_lift::<Exact>(args),
            Backend::Approx => check_lift::<Approx>(args),
        },
        Command::Fgt(cmd) => fgt(cmd),
    }
}

fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string(v).expect("reports serialize"),
        Format::Text => serde_json::to_string_pretty(v).expect("reports serialize"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((value, ok)) => {
            let streamed = matches!(cli.command, Command::Fgt(FgtCommand::Enumerate { .. }));
            let mut out = std::io::stdout().lock();
            // a closed pipe is not an error for the caller
            let _ = match (&value, streamed) {
                (Value::Array(items), true) => items
                    .iter()
                    .try_for_each(|item| writeln!(out, "{}", render(item, Format::Json))),
                _ => writeln!(out, "{}", render(&value, cli.format)),
            };
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if usage_error(&e) { 2 } else { 1 })
        }
    }
}
