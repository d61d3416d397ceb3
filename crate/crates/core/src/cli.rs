//! Command-line front end. `run_with` is the testable entry point; the binary
//! only forwards `std::env::args`.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::embedding::Cell;
use crate::error::{Error, Result};
use crate::fisher::FisherGraph;
use crate::gibbs::GibbsCorrelator;
use crate::ising::{dual_parameter, CouplingAssignment};
use crate::isoradial::{load_graph, LatticeKind, PeriodicIsoradialGraph};
use crate::kasteleyn::{boltzmann_probability, orient, partition_function, KasteleynOrientation};
use crate::laplacian::{identity_report, laplacian, Identity, SUITE_SEED};
use crate::oracle::{
    crsf_polynomial, enumerate_crsf, enumerate_matchings, even_subgraph_sum, ising_partition,
    null_homologous_even_subgraph_sum, EnumerationBudget,
};
use crate::report::{Provenance, RunReport, Table};
use crate::spectral::{
    amoeba_samples, characteristic_polynomial, free_energy, grid_scan, interpolation_residual,
    zero_at_one_one_tol, TorusSymbol, INTERPOLATION_TOL,
};

#[derive(Parser, Debug)]
#[command(name = "isoising", version, about = "Critical Z-invariant Ising model on periodic isoradial graphs")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for parallel grid evaluations.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct GraphArg {
    /// `square`, `triangular`, `honeycomb`, `generic`, or a JSON file.
    #[arg(long, default_value = "square")]
    graph: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum What {
    Matchings,
    Spins,
    Contours,
    Crsf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Geometry summary: angles, rhombi, faces, torus sizes.
    Lattice {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Coupling constants J(θ, k).
    Coupling {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long, default_value_t = 0.0)]
        k: f64,
        /// Evaluate a single half-angle instead of the graph's edges.
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Pfaffian partition function of the n×n torus.
    Partition {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Seam position `x:y`.
        #[arg(long)]
        seam: Option<String>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Boltzmann probability of Fisher edges on the n×n torus.
    Prob {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Comma separated `idx` or `idx@x:y`.
        #[arg(long)]
        edges: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Characteristic polynomial and its zero at (1,1).
    Spectral {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Samples of the amoeba of the spectral curve.
    Amoeba {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 3.0)]
        radius: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Free energy per fundamental domain.
    FreeEnergy {
        #[command(flatten)]
        g: GraphArg,
        /// Also compare with −log Z_n / n² for these n.
        #[arg(long)]
        n_list: Option<String>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Gibbs edge probabilities against finite tori.
    Correlate {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long)]
        edges: String,
        #[arg(long, default_value = "2,4,8")]
        n_list: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Laplacian and double-graph identities.
    Verify {
        #[command(flatten)]
        g: GraphArg,
        /// `all` or a comma separated subset of `i..vii`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Exhaustive enumerations.
    Oracle {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long, value_enum)]
        what: What,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        k: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

/// Resolves `--graph`.
pub fn resolve_graph(name: &str) -> Result<PeriodicIsoradialGraph> {
    if name == "generic" {
        return Ok(PeriodicIsoradialGraph::generic_hexagonal());
    }
    if let Ok(kind) = name.parse::<LatticeKind>() {
        return Ok(PeriodicIsoradialGraph::standard_lattice(kind));
    }
    load_graph(&std::fs::read_to_string(name)?)
}

/// Parses `3,5@1:-1` into `[(3, (0,0)), (5, (1,-1))]`.
pub fn parse_edges(s: &str) -> Result<Vec<(usize, Cell)>> {
    let bad = || Error::Domain(format!("cannot parse edge list `{s}`"));
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (idx, cell) = match t.trim().split_once('@') {
                Some((i, c)) => (i, parse_cell(c).ok_or_else(bad)?),
                None => (t.trim(), [0, 0]),
            };
            Ok((idx.parse().map_err(|_| bad())?, cell))
        })
        .collect()
}

fn parse_cell(s: &str) -> Option<Cell> {
    let (x, y) = s.split_once(':')?;
    Some([x.trim().parse().ok()?, y.trim().parse().ok()?])
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Domain(format!("cannot parse list `{s}`"))))
        .collect()
}

struct Outcome {
    report: RunReport,
    ok: bool,
}

fn model(g: &PeriodicIsoradialGraph) -> Result<(FisherGraph, KasteleynOrientation)> {
    let f = FisherGraph::new(g);
    let o = orient(&f, &EnumerationBudget::default())?;
    Ok((f, o))
}

fn start(cmd: &str, graph: &str) -> Result<(PeriodicIsoradialGraph, RunReport)> {
    let g = resolve_graph(graph)?;
    let canonical = serde_json::to_string(&g.to_spec())?;
    let mut r = RunReport::new(cmd, &canonical);
    r.parameter("graph", graph);
    Ok((g, r))
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn execute(cmd: &Command) -> Result<Outcome> {
    let budget = EnumerationBudget::default();
    let mut ok = true;
    let report = match cmd {
        Command::Lattice { g, n } => {
            let (g, mut r) = start("lattice", &g.graph)?;
            r.parameter("n", n);
            let tg = g.quotient(*n)?;
            let f = FisherGraph::new(&g);
            r.result("vertices", g.vertex_count())
                .result("edges", g.edge_count())
                .result("faces", g.face_count())
                .result("thetas", g.thetas())
                .result("basis", g.basis())
                .result("torus_vertices", tg.vertex_count())
                .result("torus_edges", tg.edge_count())
                .result("fisher_vertices", f.vertex_count())
                .result("fisher_edges", f.edge_count());
            let mut t = Table::new(&["edge", "u", "v", "dx", "dy", "theta"]);
            for (i, e) in g.edges().iter().enumerate() {
                t.push(vec![
                    json!(i),
                    json!(g.ids()[e.u]),
                    json!(g.ids()[e.v]),
                    json!(e.offset[0]),
                    json!(e.offset[1]),
                    json!(g.theta(i)),
                ]);
            }
            r.set_table(t);
            r
        }
        Command::Coupling { g, k, theta } => {
            let (g, mut r) = start("coupling", &g.graph)?;
            r.parameter("k", k);
            let ks = dual_parameter(*k)?;
            r.result("dual_parameter", [ks.re, ks.im]);
            let mut t = Table::new(&["edge", "theta", "coupling"]);
            match theta {
                Some(th) => {
                    r.parameter("theta", th);
                    let j = crate::ising::coupling(*th, *k)?;
                    r.result("coupling", j);
                    t.push(vec![json!(Value::Null), json!(th), json!(j)]);
                }
                None => {
                    let a = CouplingAssignment::new(&g, *k)?;
                    r.result("couplings", &a.couplings);
                    for (i, j) in a.couplings.iter().enumerate() {
                        t.push(vec![json!(i), json!(g.theta(i)), json!(j)]);
                    }
                }
            }
            r.set_table(t);
            r
        }
        Command::Partition { g, n, seam, tol } => {
            let (g, mut r) = start("partition", &g.graph)?;
            let seam = match seam {
                Some(s) => parse_cell(s).ok_or_else(|| Error::Domain(format!("bad seam `{s}`")))?,
                None => [0, 0],
            };
            r.parameter("n", n).parameter("seam", seam);
            let (f, o) = model(&g)?;
            let tg = f.quotient_with_seam(*n, seam)?;
            let pr = partition_function(&f, &o, &tg)?;
            let js = CouplingAssignment::critical(&g);
            let log_sinh: f64 = js.couplings.iter().map(|j| j.sinh().ln()).sum::<f64>() * (n * n) as f64;
            r.result("z", pr.z)
                .result("log_z", pr.log_z)
                .result("log_z_ising", pr.log_z + log_sinh)
                .result("pfaffians", pr.pfaffians)
                .result("log_abs_pfaffians", pr.log_abs_pfaffians)
                .result("sign_pattern", pr.sign_pattern);
            if tg.vertex_count() <= budget.max_matching_vertices {
                let edges: Vec<(usize, usize, f64)> =
                    tg.edges().iter().map(|e| (e.u, e.v, f.weights()[e.base])).collect();
                let m = enumerate_matchings(tg.vertex_count(), &edges, &budget)?;
                r.result("oracle_z", m.weighted_sum).result("oracle_matchings", m.count);
                ok &= r.residual("z_vs_oracle", relative(pr.z, m.weighted_sum), *tol, Provenance::Oracle);
            }
            r
        }
        Command::Prob { g, n, edges, tol } => {
            let (g, mut r) = start("prob", &g.graph)?;
            let es = parse_edges(edges)?;
            r.parameter("n", n).parameter("edges", &es);
            let (f, o) = model(&g)?;
            let tg = f.quotient(*n)?;
            let p = boltzmann_probability(&f, &o, &tg, &es)?;
            r.result("probability", p);
            if es.len() == 1 && tg.vertex_count() <= budget.max_matching_vertices {
                let list: Vec<(usize, usize, f64)> =
                    tg.edges().iter().map(|e| (e.u, e.v, f.weights()[e.base])).collect();
                let m = enumerate_matchings(tg.vertex_count(), &list, &budget)?;
                let q = m.marginals[tg.edge_index(es[0].0, es[0].1)];
                r.result("oracle_probability", q);
                ok &= r.residual("probability_vs_oracle", (p - q).abs(), *tol, Provenance::Oracle);
            }
            r
        }
        Command::Spectral { g, grid, tol } => {
            let (g, mut r) = start("spectral", &g.graph)?;
            r.parameter("grid", grid);
            let (f, o) = model(&g)?;
            let s = TorusSymbol::kasteleyn(&f, &o);
            let p = characteristic_polynomial(&s)?;
            let zr = zero_at_one_one_tol(&p, *tol);
            let scan = grid_scan(&p, *grid);
            r.result("terms", p.len())
                .result("newton_polygon", p.newton_polygon()?)
                .result("zero", &zr)
                .result("grid_scan", &scan);
            ok &= r.residual(
                "interpolation",
                interpolation_residual(&s, &p, 100, 7),
                INTERPOLATION_TOL,
                Provenance::Computed,
            );
            r.tolerance("zero", *tol);
            ok &= zr.double_zero && scan.minimum_adjacent;
            let mut t = Table::new(&["x", "y", "re", "im"]);
            for c in p.coefficients() {
                t.push(vec![json!(c.x), json!(c.y), json!(c.re), json!(c.im)]);
            }
            r.set_table(t);
            r
        }
        Command::Amoeba { g, samples, radius, seed } => {
            let (g, mut r) = start("amoeba", &g.graph)?;
            r.parameter("samples", samples).parameter("radius", radius).parameter("seed", seed);
            let (f, o) = model(&g)?;
            let p = characteristic_polynomial(&TorusSymbol::kasteleyn(&f, &o))?;
            let pts = amoeba_samples(&p, *samples, *radius, *seed)?;
            r.result("points", pts.len());
            let mut t = Table::new(&["log_abs_z", "log_abs_w"]);
            for q in pts {
                t.push(vec![json!(q[0]), json!(q[1])]);
            }
            r.set_table(t);
            r
        }
        Command::FreeEnergy { g, n_list, tol } => {
            let (g, mut r) = start("free-energy", &g.graph)?;
            let (f, o) = model(&g)?;
            let p = characteristic_polynomial(&TorusSymbol::kasteleyn(&f, &o))?;
            let fe = free_energy(&p)?;
            r.result("free_energy", fe.value).result("ladder", &fe.ladder);
            ok &= r.residual("quadrature", fe.error_estimate, *tol, Provenance::Computed);
            if let Some(list) = n_list {
                let ns = parse_list(list)?;
                r.parameter("n_list", &ns);
                let mut t = Table::new(&["n", "finite", "gap"]);
                for n in ns {
                    let pr = partition_function(&f, &o, &f.quotient(n)?)?;
                    let finite = -pr.log_z / (n * n) as f64;
                    t.push(vec![json!(n), json!(finite), json!((finite - fe.value).abs())]);
                }
                r.set_table(t);
            }
            r
        }
        Command::Correlate { g, edges, n_list, tol } => {
            let (g, mut r) = start("correlate", &g.graph)?;
            let es = parse_edges(edges)?;
            let ns = parse_list(n_list)?;
            r.parameter("edges", &es).parameter("n_list", &ns);
            let (f, o) = model(&g)?;
            let gc = GibbsCorrelator::new(f, o).with_tolerance(*tol);
            let rep = gc.convergence_report(&es, &ns)?;
            r.result("p_inf", rep.p_inf).tolerance("inverse_coefficients", *tol);
            let mut t = Table::new(&["n", "p_n", "gap"]);
            for row in &rep.rows {
                t.push(vec![json!(row.n), json!(row.p_n), json!(row.gap)]);
            }
            r.result("rows", &rep.rows);
            r.set_table(t);
            r
        }
        Command::Verify { g, suite, samples, tol } => {
            let (g, mut r) = start("verify", &g.graph)?;
            let which: Vec<Identity> = if suite == "all" {
                Identity::ALL.to_vec()
            } else {
                suite.split(',').map(|s| s.trim().parse()).collect::<Result<_>>()?
            };
            r.parameter("suite", suite).parameter("samples", samples);
            let rep = identity_report(&g, &which, *samples, SUITE_SEED)?;
            for item in &rep.items {
                ok &= r.residual(item.which.label(), item.residual, *tol, Provenance::Computed);
            }
            r.result("constant", rep.constant)
                .result("conjugate_deviation", rep.conjugate_deviation)
                .result("dual_ratio", rep.dual_ratio);
            r
        }
        Command::Oracle { g, what, n, k, tol } => {
            let (g, mut r) = start("oracle", &g.graph)?;
            r.parameter("what", format!("{what:?}").to_lowercase()).parameter("n", n).parameter("k", k);
            let tg = g.quotient(*n)?;
            let pairs: Vec<(usize, usize)> = tg.edges().iter().map(|e| (e.u, e.v)).collect();
            let js = CouplingAssignment::new(&g, *k)?;
            let j_n: Vec<f64> = tg.edges().iter().map(|e| js.couplings[e.base]).collect();
            match what {
                What::Matchings => {
                    let (f, o) = model(&g)?;
                    let ft = f.quotient(*n)?;
                    let edges: Vec<(usize, usize, f64)> =
                        ft.edges().iter().map(|e| (e.u, e.v, f.weights()[e.base])).collect();
                    let m = enumerate_matchings(ft.vertex_count(), &edges, &budget)?;
                    let pr = partition_function(&f, &o, &ft)?;
                    r.result("count", m.count).result("weighted_sum", m.weighted_sum).result("pfaffian_z", pr.z);
                    ok &= r.residual("pfaffian_vs_oracle", relative(pr.z, m.weighted_sum), *tol, Provenance::Oracle);
                }
                What::Spins => {
                    let z = ising_partition(tg.vertex_count(), &pairs, &j_n, &budget)?;
                    r.result("z", z);
                    if *k == 0.0 {
                        let (f, o) = model(&g)?;
                        let pr = partition_function(&f, &o, &f.quotient(*n)?)?;
                        let pre: f64 = j_n.iter().map(|j| j.sinh().ln()).sum();
                        let fisher = (pre + pr.log_z).exp();
                        r.result("fisher_z", fisher);
                        ok &= r.residual("fisher_vs_spins", relative(fisher, z), *tol, Provenance::Oracle);
                    }
                }
                What::Contours => {
                    let x: Vec<f64> = j_n.iter().map(|j| j.tanh()).collect();
                    let s = even_subgraph_sum(tg.vertex_count(), &pairs, &x, &budget)?;
                    let high = s * 2f64.powi(tg.vertex_count() as i32) * j_n.iter().map(|j| j.cosh()).product::<f64>();
                    let dual = g.dual()?.quotient(*n)?;
                    let y: Vec<f64> = dual.edges().iter().map(|e| (-2.0 * js.couplings[e.base]).exp()).collect();
                    let low = 2.0
                        * j_n.iter().map(|j| j.exp()).product::<f64>()
                        * null_homologous_even_subgraph_sum(&dual, &y, &budget)?;
                    r.result("high_temperature_z", high).result("low_temperature_z", low);
                    if tg.vertex_count() <= budget.max_spins {
                        let z = ising_partition(tg.vertex_count(), &pairs, &j_n, &budget)?;
                        r.result("spin_z", z);
                        ok &= r.residual("high_vs_spins", relative(high, z), *tol, Provenance::Oracle);
                        ok &= r.residual("low_vs_spins", relative(low, z), *tol, Provenance::Oracle);
                    }
                }
                What::Crsf => {
                    let forests = enumerate_crsf(&g, &budget)?;
                    let poly = crsf_polynomial(&g, &budget)?;
                    let pd = laplacian(&g).polynomial()?;
                    r.result("forests", forests.len()).result("polynomial", poly.coefficients());
                    ok &= r.residual("crsf_vs_laplacian", poly.sub(&pd).max_abs(), *tol, Provenance::Oracle);
                }
            }
            r
        }
    };
    Ok(Outcome { report, ok })
}

fn is_usage(e: &Error) -> bool {
    matches!(e, Error::Schema(_) | Error::Domain(_) | Error::Io(_) | Error::Json(_))
}

/// Runs the CLI. Exit code 0 on success, 1 when a check fails or the
/// computation errors, 2 on usage errors.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| execute(&cli.command)),
            Err(e) => Err(Error::Domain(e.to_string())),
        },
        None => execute(&cli.command),
    };
    match result {
        Ok(mut o) => {
            o.report.finish();
            let written = match cli.format {
                Format::Json => o.report.to_json().and_then(|s| Ok(writeln!(out, "{s}")?)),
                Format::Csv => o.report.write_csv(out),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: {e}");
                return 1;
            }
            if o.ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if is_usage(&e) {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_lists() {
        assert_eq!(parse_edges("3").unwrap(), vec![(3, [0, 0])]);
        assert_eq!(parse_edges("3,5@1:-1").unwrap(), vec![(3, [0, 0]), (5, [1, -1])]);
        assert!(parse_edges("x").is_err());
        assert!(parse_edges("1@2").is_err());
    }
}
