//! Command-line front end: runs the solvers and classifiers on graph/
//! exhaustion files and writes structured reports plus CSV data series.
//!
//! Exit codes: 0 success, 1 input or solver error, 2 inconclusive verdict
//! where one was required (only with --strict).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use pmod_core::ends::{
    build_ends, classify_space, is_hyperbolic_sequence, well_separated, ClassifyConfig,
    HyperbolicityVerdict, Verdict,
};
use pmod_core::energy::{capacity, solve_with, DirichletProblem, SolveOptions};
use pmod_core::exhaustion::Chain;
use pmod_core::graph::{NodeId, NodeSet};
use pmod_core::io;
use pmod_core::liouville::{
    classify_weighted_line, construct_finite_energy_harmonic, decide_o_hbd, lattice_check,
    LineWeight,
};
use pmod_core::modulus::{modulus_connect, verify_mod_eq_cap};
use pmod_core::scenarios::{build_scenario, bump_sum_energy, Scenario};
use pmod_core::{Error, Result};

#[derive(Parser)]
#[command(name = "pmod", version, about = "p-modulus, p-capacity and end classification on weighted graphs")]
struct Cli {
    /// Output directory for reports and data series.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Suppress the timestamp header line in report files.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Exit with code 2 when a required verdict is inconclusive.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PairArgs {
    /// Graph document (JSON: nodes [{id, pos?}], edges [{u, v, len, mu}]).
    #[arg(long)]
    graph: PathBuf,
    /// Node-set document for E (JSON array of ids).
    #[arg(long = "E")]
    e: PathBuf,
    /// Node-set document for F.
    #[arg(long = "F")]
    f: PathBuf,
    #[arg(long, short)]
    p: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct ExhaustionArgs {
    /// Exhaustion document: {scenario: {...}} or {base, radii, graphs}.
    #[arg(long)]
    exhaustion: PathBuf,
    #[arg(long, short)]
    p: f64,
    /// Radius indices to evaluate, e.g. 1,2,3,4.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
    levels: Vec<u32>,
    #[arg(long, default_value_t = 1e-6)]
    mod_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    solve_tol: f64,
    #[arg(long, default_value_t = 1e-3)]
    delta_hyp: f64,
    #[arg(long, default_value_t = 1e-6)]
    delta_par: f64,
    #[arg(long, default_value_t = 1e-3)]
    inner_tol: f64,
}

impl ExhaustionArgs {
    fn config(&self) -> ClassifyConfig {
        let mut cfg = ClassifyConfig::new(self.p).with_schedule(self.levels.clone());
        cfg.mod_tol = self.mod_tol;
        cfg.solve_tol = self.solve_tol;
        cfg.thresholds.delta_hyp = self.delta_hyp;
        cfg.thresholds.delta_par = self.delta_par;
        cfg.thresholds.inner_tol = self.inner_tol;
        cfg
    }

    fn scenario(&self) -> Result<Scenario> {
        io::read_exhaustion(&self.exhaustion)
    }
}

#[derive(Subcommand)]
enum Command {
    /// p-modulus of the connecting curve family Gamma(E, F).
    Modulus(PairArgs),
    /// Dirichlet p-capacity of the pair (E, F).
    Capacity(PairArgs),
    /// p-harmonic Dirichlet solve with a boundary spec.
    Harmonic {
        #[arg(long)]
        graph: PathBuf,
        /// Boundary document: array of {node, value}.
        #[arg(long)]
        boundary: PathBuf,
        #[arg(long, short)]
        p: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Also write the per-sweep iteration log (CSV: sweep, energy, residual).
        #[arg(long)]
        log: bool,
    },
    /// Numerical check of Mod_p(Gamma(E,F)) = cap_p(E,F).
    VerifyDuality(PairArgs),
    /// Build the ends of an exhaustion and classify each one.
    Ends {
        #[command(flatten)]
        ex: ExhaustionArgs,
        #[arg(long, default_value_t = 3)]
        depth: u32,
    },
    /// Classify the whole space as p-hyperbolic or p-parabolic.
    ClassifySpace {
        #[command(flatten)]
        ex: ExhaustionArgs,
    },
    /// Classify a user-supplied chain (hyperbolic-sequence check).
    Sequence {
        #[command(flatten)]
        ex: ExhaustionArgs,
        /// Chain document: JSON array of node-id arrays (one per index), or
        /// the label of a scenario-designated chain.
        #[arg(long)]
        chain: String,
    },
    /// Well-separation check for two chains.
    Separated {
        #[command(flatten)]
        ex: ExhaustionArgs,
        #[arg(long)]
        chain_a: String,
        #[arg(long)]
        chain_b: String,
        /// Truncation levels for the stabilization sequence.
        #[arg(long, value_delimiter = ',', default_value = "2,3,5,7")]
        trunc: Vec<u32>,
        #[arg(long, default_value_t = 0.02)]
        sep_tol: f64,
    },
    /// Construct the bounded finite-energy p-harmonic witness from a
    /// well-separated hyperbolic pair.
    Construct {
        #[command(flatten)]
        ex: ExhaustionArgs,
        #[arg(long)]
        chain_a: String,
        #[arg(long)]
        chain_b: String,
        #[arg(long, value_delimiter = ',', default_value = "2,3,5,7")]
        trunc: Vec<u32>,
        #[arg(long, default_value_t = 0.02)]
        sep_tol: f64,
    },
    /// Liouville-class decision procedure over the built ends.
    Decide {
        #[command(flatten)]
        ex: ExhaustionArgs,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long, value_delimiter = ',', default_value = "2,3,5,7")]
        trunc: Vec<u32>,
        #[arg(long, default_value_t = 0.02)]
        sep_tol: f64,
    },
    /// Exact classification of the weighted real line from declared tails.
    LineClassify {
        /// Left-tail exponent: w(x) = |x|^alpha for x <= -cut.
        #[arg(long)]
        alpha: f64,
        /// Right-tail exponent (default 0: flat).
        #[arg(long, default_value_t = 0.0)]
        alpha_pos: f64,
        #[arg(long, default_value_t = 1.0)]
        cut: f64,
        #[arg(long, short)]
        p: f64,
    },
    /// Build a scenario and dump its truncation graph(s).
    Scenario {
        /// Scenario spec document: {name, ...params}.
        #[arg(long)]
        spec: PathBuf,
        /// Truncation level to dump.
        #[arg(long, default_value_t = 1)]
        level: u32,
    },
    /// Discrete vs analytic energy of the bump-sum example.
    BumpEnergy {
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, short)]
        p: f64,
        #[arg(long, default_value_t = 3)]
        bumps: i32,
        #[arg(long, default_value_t = 0.05)]
        h: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap would exit 2; the contract reserves 2 for inconclusive
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Inconclusive) => {
            if cli.strict {
                eprintln!("verdict inconclusive (strict mode)");
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

enum Outcome {
    Done,
    Inconclusive,
}

struct Reporter<'a> {
    out: &'a Path,
    timestamp: bool,
}

impl<'a> Reporter<'a> {
    fn write<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        std::fs::create_dir_all(self.out)?;
        let path = self.out.join(name);
        let mut text = String::new();
        if self.timestamp {
            let now = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            text.push_str(&format!("# generated at unix {now}\n"));
        }
        text.push_str(&serde_json::to_string_pretty(value)?);
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }

    fn path(&self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(self.out)?;
        Ok(self.out.join(name))
    }
}

fn load_pair(args: &PairArgs) -> Result<(Arc<pmod_core::MetricGraph>, NodeSet, NodeSet)> {
    let g = Arc::new(io::read_graph(&args.graph)?);
    let e = io::read_node_set(&args.e)?;
    let f = io::read_node_set(&args.f)?;
    Ok((g, e, f))
}

/// Chains may be referenced by scenario label or by a JSON file of per-index
/// node-id arrays.
fn resolve_chain(scenario: &Scenario, name: &str) -> Result<Chain> {
    if let Some(c) = scenario.chains.iter().find(|c| c.label() == name) {
        return Ok(c.clone());
    }
    let path = Path::new(name);
    if path.exists() {
        let text = std::fs::read_to_string(path)?;
        let sets: Vec<Vec<u64>> = serde_json::from_str(&text)?;
        let sets: Vec<NodeSet> = sets
            .into_iter()
            .map(|ids| ids.into_iter().map(NodeId).collect())
            .collect();
        return Ok(Chain::from_sets(name.to_string(), sets));
    }
    Err(Error::Malformed(format!(
        "chain '{name}' is neither a designated scenario chain nor a file"
    )))
}

fn verdict_series(v: &HyperbolicityVerdict) -> Vec<Vec<f64>> {
    v.samples
        .iter()
        .map(|s| vec![s.n as f64, s.radius, s.level as f64, s.value])
        .collect()
}

fn print_verdict(v: &HyperbolicityVerdict) {
    println!("{}: {}", v.target, v.verdict);
    println!("  n    radius  level  a_n");
    for s in &v.samples {
        println!("  {:<4} {:<7} {:<6} {:.9e}", s.n, s.radius, s.level, s.value);
    }
    println!(
        "  extrapolated limit {:.6e} (model {})",
        v.extrapolated,
        v.chosen.map(|m| m.to_string()).unwrap_or_else(|| "none".into())
    );
    for n in &v.notes {
        println!("  note: {n}");
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    let rep = Reporter {
        out: &cli.out,
        timestamp: !cli.no_timestamp,
    };
    match &cli.command {
        Command::Modulus(args) => {
            let (g, e, f) = load_pair(args)?;
            let m = modulus_connect(&g, &e, &f, args.p, args.tol)?;
            #[derive(Serialize)]
            struct ModReport<'a> {
                p: f64,
                tol: f64,
                value: f64,
                dual_bound: f64,
                relgap: f64,
                min_path_length: f64,
                rounds: u32,
                active_paths: &'a [Vec<NodeId>],
            }
            rep.write(
                "modulus.json",
                &ModReport {
                    p: args.p,
                    tol: args.tol,
                    value: m.value,
                    dual_bound: m.dual_bound,
                    relgap: m.relgap,
                    min_path_length: m.min_path_length,
                    rounds: m.rounds,
                    active_paths: &m.active_paths,
                },
            )?;
            io::write_density_csv(&rep.path("density.csv")?, &g, &m.density.rho)?;
            io::write_paths(&rep.path("active_paths.txt")?, &m.active_paths)?;
            println!("{:.12e}", m.value);
            Ok(Outcome::Done)
        }
        Command::Capacity(args) => {
            let (g, e, f) = load_pair(args)?;
            let cap = capacity(&g, &e, &f, args.p, args.tol)?;
            #[derive(Serialize)]
            struct CapReport {
                p: f64,
                tol: f64,
                value: f64,
            }
            rep.write(
                "capacity.json",
                &CapReport {
                    p: args.p,
                    tol: args.tol,
                    value: cap.value,
                },
            )?;
            let rows: Vec<Vec<f64>> = g
                .ids()
                .iter()
                .map(|&id| vec![id.0 as f64, cap.witness.value(id).unwrap()])
                .collect();
            io::write_csv(&rep.path("witness.csv")?, "node,u", &rows)?;
            println!("{:.12e}", cap.value);
            Ok(Outcome::Done)
        }
        Command::Harmonic {
            graph,
            boundary,
            p,
            tol,
            log,
        } => {
            let g = Arc::new(io::read_graph(graph)?);
            let b = io::read_boundary(boundary)?;
            let prob = DirichletProblem::new(b, *p, *tol);
            let opts = SolveOptions {
                record_log: *log,
                ..Default::default()
            };
            let sol = solve_with(&g, &prob, &opts)?;
            #[derive(Serialize)]
            struct HarmReport {
                p: f64,
                tol: f64,
                energy: f64,
                residual: f64,
                sweeps: u32,
            }
            rep.write(
                "harmonic.json",
                &HarmReport {
                    p: *p,
                    tol: *tol,
                    energy: sol.energy,
                    residual: sol.residual,
                    sweeps: sol.sweeps,
                },
            )?;
            let rows: Vec<Vec<f64>> = g
                .ids()
                .iter()
                .map(|&id| vec![id.0 as f64, sol.field.value(id).unwrap()])
                .collect();
            io::write_csv(&rep.path("field.csv")?, "node,u", &rows)?;
            if *log {
                let rows: Vec<Vec<f64>> = sol
                    .log
                    .iter()
                    .map(|r| vec![r.sweep as f64, r.energy, r.residual])
                    .collect();
                io::write_csv(&rep.path("iterations.csv")?, "sweep,energy,residual", &rows)?;
            }
            println!("energy {:.12e} (residual {:.3e}, {} sweeps)", sol.energy, sol.residual, sol.sweeps);
            Ok(Outcome::Done)
        }
        Command::VerifyDuality(args) => {
            let (g, e, f) = load_pair(args)?;
            let d = verify_mod_eq_cap(&g, &e, &f, args.p, args.tol)?;
            rep.write("duality.json", &d)?;
            println!(
                "mod {:.12e}  cap {:.12e}  relgap {:.3e}  witness admissible: {}",
                d.modulus, d.capacity, d.relgap, d.witness_admissible
            );
            Ok(Outcome::Done)
        }
        Command::Ends { ex, depth } => {
            let scenario = ex.scenario()?;
            let cfg = ex.config();
            let ends = build_ends(&scenario.exhaustion, *depth)?;
            println!("{} end(s) at depth {depth}", ends.len());
            let mut verdicts = Vec::new();
            let mut inconclusive = false;
            for end in &ends {
                let v = is_hyperbolic_sequence(&scenario.exhaustion, end, &cfg)?;
                print_verdict(&v);
                inconclusive |= v.verdict == Verdict::Inconclusive;
                verdicts.push(v);
            }
            rep.write("ends.json", &verdicts)?;
            for v in &verdicts {
                io::write_csv(
                    &rep.path(&format!("a_n_{}.csv", v.target))?,
                    "n,radius,level,a_n",
                    &verdict_series(v),
                )?;
            }
            let series: Vec<(&str, Vec<(f64, f64)>)> = verdicts
                .iter()
                .map(|v| {
                    (
                        v.target.as_str(),
                        v.samples.iter().map(|s| (s.radius, s.value)).collect(),
                    )
                })
                .collect();
            io::write_decay_svg(&rep.path("a_n.svg")?, &series)?;
            Ok(if inconclusive {
                Outcome::Inconclusive
            } else {
                Outcome::Done
            })
        }
        Command::ClassifySpace { ex } => {
            let scenario = ex.scenario()?;
            let cfg = ex.config();
            let v = classify_space(&scenario.exhaustion, &cfg)?;
            print_verdict(&v);
            rep.write("space.json", &v)?;
            io::write_csv(&rep.path("a_n_space.csv")?, "n,radius,level,a_n", &verdict_series(&v))?;
            io::write_decay_svg(
                &rep.path("a_n_space.svg")?,
                &[("space", v.samples.iter().map(|s| (s.radius, s.value)).collect())],
            )?;
            Ok(if v.verdict == Verdict::Inconclusive {
                Outcome::Inconclusive
            } else {
                Outcome::Done
            })
        }
        Command::Sequence { ex, chain } => {
            let scenario = ex.scenario()?;
            let cfg = ex.config();
            let c = resolve_chain(&scenario, chain)?;
            let v = is_hyperbolic_sequence(&scenario.exhaustion, &c, &cfg)?;
            print_verdict(&v);
            rep.write("sequence.json", &v)?;
            io::write_csv(&rep.path("a_n_sequence.csv")?, "n,radius,level,a_n", &verdict_series(&v))?;
            Ok(if v.verdict == Verdict::Inconclusive {
                Outcome::Inconclusive
            } else {
                Outcome::Done
            })
        }
        Command::Separated {
            ex,
            chain_a,
            chain_b,
            trunc,
            sep_tol,
        } => {
            let scenario = ex.scenario()?;
            let a = resolve_chain(&scenario, chain_a)?;
            let b = resolve_chain(&scenario, chain_b)?;
            let r = well_separated(&scenario.exhaustion, &a, &b, ex.p, trunc, *sep_tol)?;
            rep.write("separated.json", &r)?;
            println!(
                "separated: {} (Mod(F_1,G_1) -> {:.6e}, growth slope {:.3})",
                r.separated, r.final_value, r.growth_slope
            );
            Ok(Outcome::Done)
        }
        Command::Construct {
            ex,
            chain_a,
            chain_b,
            trunc,
            sep_tol,
        } => {
            let scenario = ex.scenario()?;
            let cfg = ex.config();
            let a = resolve_chain(&scenario, chain_a)?;
            let b = resolve_chain(&scenario, chain_b)?;
            let con = construct_finite_energy_harmonic(
                &scenario.exhaustion,
                &a,
                &b,
                &cfg,
                trunc,
                *sep_tol,
            )?;
            #[derive(Serialize)]
            struct ConReport<'a> {
                steps: &'a [pmod_core::liouville::ConstructionStep],
                cap_f1_g1: f64,
                lim_cap_estimate: f64,
                final_oscillation: f64,
                stabilized: bool,
            }
            rep.write(
                "construct.json",
                &ConReport {
                    steps: &con.steps,
                    cap_f1_g1: con.cap_f1_g1,
                    lim_cap_estimate: con.lim_cap_estimate,
                    final_oscillation: con.final_oscillation,
                    stabilized: con.stabilized,
                },
            )?;
            if let Some(last) = con.fields.last() {
                let g = last.graph();
                let rows: Vec<Vec<f64>> = g
                    .ids()
                    .iter()
                    .map(|&id| vec![id.0 as f64, last.value(id).unwrap()])
                    .collect();
                io::write_csv(&rep.path("witness_field.csv")?, "node,u", &rows)?;
            }
            println!(
                "constructed witness: oscillation {:.4}, energies within [{:.6e}, {:.6e}]",
                con.final_oscillation, con.lim_cap_estimate, con.cap_f1_g1
            );
            Ok(Outcome::Done)
        }
        Command::Decide {
            ex,
            depth,
            trunc,
            sep_tol,
        } => {
            let scenario = ex.scenario()?;
            let cfg = ex.config();
            let mut candidates = build_ends(&scenario.exhaustion, *depth)?;
            candidates.extend(scenario.chains.iter().cloned());
            let d = decide_o_hbd(&scenario.exhaustion, &candidates, &cfg, trunc, *sep_tol)?;
            let violations = lattice_check(&d.report);
            rep.write("decision.json", &d.report)?;
            println!("class                membership");
            for (c, m) in &d.report.memberships {
                println!("{:<20} {}", c.name(), m);
            }
            for e in &d.report.evidence {
                println!("evidence: {e}");
            }
            if !violations.is_empty() {
                for v in &violations {
                    println!("lattice violation: {v}");
                }
                return Err(Error::Malformed("lattice violations in report".into()));
            }
            let unknown = d
                .report
                .memberships
                .iter()
                .all(|(_, m)| *m == pmod_core::liouville::Membership::Unknown);
            Ok(if unknown { Outcome::Inconclusive } else { Outcome::Done })
        }
        Command::LineClassify {
            alpha,
            alpha_pos,
            cut,
            p,
        } => {
            let w = LineWeight {
                alpha_neg: *alpha,
                alpha_pos: *alpha_pos,
                cut: *cut,
            };
            let cl = classify_weighted_line(&w, *p)?;
            rep.write("line_classification.json", &cl)?;
            let side = |hyp: bool| if hyp { "hyperbolic" } else { "parabolic" };
            println!(
                "end -inf: {}; end +inf: {}; classes: {}",
                side(cl.end_neg_hyperbolic),
                side(cl.end_pos_hyperbolic),
                cl.summary
            );
            Ok(Outcome::Done)
        }
        Command::Scenario { spec, level } => {
            let s = io::read_scenario_spec(spec)?;
            let scenario = build_scenario(&s)?;
            let g = scenario.exhaustion.graph(*level)?;
            let path = rep.path(&format!("scenario_level_{level}.graph.json"))?;
            io::write_graph(&path, &g)?;
            println!(
                "level {level}: {} nodes, {} edges -> {}",
                g.node_count(),
                g.edge_count(),
                path.display()
            );
            Ok(Outcome::Done)
        }
        Command::BumpEnergy { n, p, bumps, h } => {
            let r = bump_sum_energy(*n, *p, *bumps, *h)?;
            rep.write("bump_energy.json", &r)?;
            println!(
                "discrete {:.9e}  analytic {:.9e}  relative error {:.3e}",
                r.discrete_energy, r.analytic_partial_sum, r.relative_error
            );
            Ok(Outcome::Done)
        }
    }
}
