//! Command-line surface: `incompat <subcommand> [--seed N] [--output PATH] [--format csv|json]`.

use std::f64::consts::FRAC_PI_2;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::criteria::{bound_library, jordan_compatible, jordan_tau_lower, noise_content_compatible, JORDAN_TOL};
use crate::error::{Error, Result};
use crate::harness::{run_experiment, ExperimentConfig, Relation};
use crate::measurement::{pauli_basis, MeasurementSet};
use crate::sampling::{
    haar_unitary, random_basis_measurement, random_induced_povm, random_projection, random_subspace, SeededRng,
};
use crate::sdp::{tau_dichotomic, tau_general, witness_search, BISECTION_TOL};
use crate::spectra::{haar_projection_moment, induced_thresholds, kesten_mckay, nu_kc, SpectralLaw};
use crate::{angles, measurement};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_TARGET: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "incompat", version, about = "Compatibility degrees, witnesses and random-measurement experiments")]
struct Cli {
    /// Seed for random sampling (experiments use the seed in their config unless this is given)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write output here instead of standard output (experiments: report base path)
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a random object and print it as JSON
    Sample {
        #[command(subcommand)]
        what: SampleKind,
        #[arg(long, global = true, default_value_t = 0)]
        stream: u64,
    },
    /// Compatibility degree of a measurement set
    Tau {
        /// Pauli-type observables, e.g. `g=3`
        #[arg(long, conflicts_with = "input")]
        pauli: Option<String>,
        /// MeasurementSet JSON file
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = BISECTION_TOL)]
        tol: f64,
    },
    /// Optimal incompatibility witness of a measurement set
    Witness {
        #[arg(long)]
        input: PathBuf,
    },
    /// Closed-form bounds and sufficient criteria for a measurement set
    Criteria {
        #[arg(long)]
        input: PathBuf,
    },
    /// Histogram of principal angles between Haar-random subspaces
    Angles {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Defaults to alpha
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 30)]
        bins: usize,
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
    /// Tabulate reference spectral laws and threshold curves
    Spectra {
        #[command(subcommand)]
        what: SpectraKind,
    },
    /// Run an experiment from a JSON config
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum SampleKind {
    Unitary {
        #[arg(long)]
        d: usize,
    },
    /// Two-outcome POVM {P, I − P} from a Haar projection
    Projection {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        rank: usize,
    },
    Basis {
        #[arg(long)]
        d: usize,
    },
    Induced {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Debug, Subcommand)]
enum SpectraKind {
    KestenMckay {
        #[arg(long)]
        g: usize,
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
    NuKc {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
    Thresholds {
        #[arg(long, default_value_t = 20)]
        k_max: usize,
        #[arg(long, default_value_t = 2)]
        g: usize,
    },
    Moments {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 10)]
        p_max: u32,
    },
}

struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(headers: Vec<&'static str>) -> Self {
        Table { headers, rows: Vec::new() }
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.headers).expect("in-memory writer");
                for row in &self.rows {
                    let cells = row.iter().map(|v| match v {
                        Value::String(t) => t.clone(),
                        other => other.to_string(),
                    });
                    w.write_record(cells).expect("in-memory writer");
                }
                String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 cells")
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        Value::Object(
                            self.headers.iter().map(|h| h.to_string()).zip(r.iter().cloned()).collect::<Map<_, _>>(),
                        )
                    })
                    .collect();
                serde_json::to_string_pretty(&rows).expect("plain values") + "\n"
            }
        }
    }
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_set(path: &Path) -> Result<MeasurementSet> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serialisable") + "\n"
}

fn parse_pauli(spec: &str) -> Result<usize> {
    let g = spec.strip_prefix("g=").unwrap_or(spec);
    g.parse().map_err(|_| Error::ConfigInvalid(format!("--pauli expects g=<integer>, got {spec}")))
}

fn law_table(law: &SpectralLaw, lo: f64, hi: f64, grid: usize) -> Table {
    let mut t = Table::new(vec!["x", "density", "cdf"]);
    let n = grid.max(2) - 1;
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    for i in 0..=n {
        // symmetric about the midpoint by construction
        let x = mid + half * (2.0 * i as f64 - n as f64) / n as f64;
        t.rows.push(vec![json!(x), json!(law.density(x)), json!(law.cdf(x))]);
    }
    t
}

fn run(cli: Cli) -> Result<i32> {
    let out = &cli.output;
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Sample { what, stream } => {
            let mut rng = SeededRng::new(seed, stream);
            let text = match what {
                SampleKind::Unitary { d } => {
                    let u = haar_unitary(d, &mut rng);
                    let rows: Vec<Vec<[f64; 2]>> =
                        (0..d).map(|i| (0..d).map(|j| [u[(i, j)].re, u[(i, j)].im]).collect()).collect();
                    to_json(&json!({ "dim": d, "unitary": rows }))
                }
                SampleKind::Projection { d, rank } => {
                    let p = random_projection(d, rank, &mut rng)?.into_matrix();
                    let q = crate::linalg::identity(d) - &p;
                    to_json(&measurement::povm_from_matrices(&[p, q])?)
                }
                SampleKind::Basis { d } => to_json(&random_basis_measurement(d, &mut rng)),
                SampleKind::Induced { d, k, n } => to_json(&random_induced_povm(d, k, n, &mut rng)?),
            };
            emit(out, &text)?;
        }
        Command::Tau { pauli, input, tol } => {
            let bracket = match (pauli, input) {
                (Some(spec), _) => tau_dichotomic(&pauli_basis(parse_pauli(&spec)?))?,
                (None, Some(path)) => {
                    let set = read_set(&path)?;
                    if set.is_dichotomic() {
                        tau_dichotomic(&set.observables()?)?
                    } else {
                        tau_general(&set, tol)?
                    }
                }
                (None, None) => return Err(Error::ConfigInvalid("tau needs --pauli or --input".into())),
            };
            let text = match cli.format {
                Format::Json => to_json(&json!({ "bracket": bracket })),
                Format::Csv if (bracket.upper - bracket.lower).abs() < 1e-9 => format!("{:.5}\n", bracket.lower),
                Format::Csv => format!("{:.5},{:.5}\n", bracket.lower, bracket.upper),
            };
            emit(out, &text)?;
        }
        Command::Witness { input } => {
            let set = read_set(&input)?;
            let cert = witness_search(&set)?;
            let upper = (1.0 / cert.pairing).min(1.0);
            let bracket = json!({ "upper": upper, "upper_source": "witness_pairing", "certifies_incompatibility": cert.certifies() });
            emit(out, &to_json(&json!({ "bracket": bracket, "certificate": cert })))?;
        }
        Command::Criteria { input } => {
            let set = read_set(&input)?;
            let mut t = Table::new(vec!["value", "kind", "source", "applicability", "tight"]);
            let mut bounds = bound_library(set.dim(), set.g(), &set.outcome_counts());
            if set.g() == 2 && set.is_dichotomic() {
                let p: Vec<_> = set.povms().iter().map(|m| m.effect(0).clone()).collect();
                if set.povms().iter().all(|m| measurement::is_projective(m, 1e-8)) {
                    bounds.push(jordan_tau_lower(&p[0], &p[1], JORDAN_TOL)?);
                }
            }
            for b in &bounds {
                t.rows.push(vec![
                    json!(b.value),
                    json!(format!("{:?}", b.kind)),
                    json!(format!("{:?}", b.source)),
                    json!(b.applicability),
                    json!(b.tight),
                ]);
            }
            let verdict = |v: bool| json!(if v { 1.0 } else { 0.0 });
            t.rows.push(vec![
                verdict(noise_content_compatible(&set)),
                json!("Verdict"),
                json!("NoiseContent"),
                json!("compatible if 1"),
                json!(false),
            ]);
            if set.g() == 2 {
                let j = jordan_compatible(&set.povms()[0], &set.povms()[1])?;
                t.rows.push(vec![
                    verdict(j),
                    json!("Verdict"),
                    json!("JordanProduct"),
                    json!("compatible if 1"),
                    json!(false),
                ]);
            }
            emit(out, &t.render(cli.format))?;
        }
        Command::Angles { d, alpha, beta, bins, trials } => {
            let beta = beta.unwrap_or(alpha);
            if bins == 0 || !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
                return Err(Error::ConfigInvalid("need bins >= 1 and alpha, beta in [0,1]".into()));
            }
            let mut rng = SeededRng::new(seed, 0);
            let mut counts = vec![0u64; bins];
            for _ in 0..trials {
                let e = random_subspace(d, (alpha * d as f64).floor() as usize, &mut rng)?;
                let f = random_subspace(d, (beta * d as f64).floor() as usize, &mut rng)?;
                for th in angles::principal_angles(&e, &f)?.angles {
                    let b = ((th / FRAC_PI_2) * bins as f64).floor() as usize;
                    counts[b.min(bins - 1)] += 1;
                }
            }
            let mut t = Table::new(vec!["bin", "count"]);
            for (i, c) in counts.iter().enumerate() {
                t.rows.push(vec![json!((i as f64 + 0.5) * FRAC_PI_2 / bins as f64), json!(c)]);
            }
            emit(out, &t.render(cli.format))?;
        }
        Command::Spectra { what } => {
            let t = match what {
                SpectraKind::KestenMckay { g, grid } => {
                    let law = kesten_mckay(g)?;
                    let (lo, hi) = law.support();
                    law_table(&law, lo, hi, grid)
                }
                SpectraKind::NuKc { k, c, grid } => law_table(&nu_kc(k, c)?, 0.0, 1.0, grid),
                SpectraKind::Thresholds { k_max, g } => {
                    let mut t = Table::new(vec!["k", "g", "witness_c", "jordan_c_g2", "noise_c_g2", "noise_c_g"]);
                    for k in 2..=k_max {
                        let th = induced_thresholds(k, g)?;
                        t.rows.push(vec![
                            json!(k),
                            json!(g),
                            json!(th.witness_c),
                            json!(th.jordan_c_g2),
                            json!(th.noise_c_g2),
                            json!(th.noise_c_g),
                        ]);
                    }
                    t
                }
                SpectraKind::Moments { d, p_max } => {
                    let mut t = Table::new(vec!["d", "p", "exact"]);
                    for p in 0..=p_max {
                        t.rows.push(vec![json!(d), json!(p), json!(haar_projection_moment(d, p)?)]);
                    }
                    t
                }
            };
            emit(out, &t.render(cli.format))?;
        }
        Command::Experiment { config } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(p) = out {
                cfg.output_path = Some(p.display().to_string());
            }
            let report = run_experiment(&cfg)?;
            for c in &report.checks {
                let rel = match c.relation {
                    Relation::AtMost => "<=",
                    Relation::AtLeast => ">=",
                };
                println!("{} {} {} {} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, rel, c.target);
            }
            println!(
                "records {} excluded {} wall_clock {:.2}s",
                report.records.len(),
                report.excluded,
                report.wall_clock_secs
            );
            if !report.passed {
                return Ok(EXIT_TARGET);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parses `argv` (including the program name) and runs the command; returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::SolverFailure(_) => EXIT_SOLVER,
                _ => EXIT_USAGE,
            }
        }
    }
}
