use std::fs;
use std::io::Write;
use std::path::Path;

use trickle_core::metrics::{
    compare, degree_class_means, export_surface, fairness, FairnessReport, Source,
};
use trickle_core::model::{solve_fixed_point, ModelSolution, SolverConfig};
use trickle_core::redundancy::{assign_k, Policy};
use trickle_core::simulator::{run_steady_state, SimulationResult, TrickleParams};
use trickle_core::topology::{
    bundled_random_topology, generate_grid, generate_random_udg, Topology,
};

use crate::args::{
    Cli, Command, CompareArgs, GenKind, ReproduceArgs, SimulateArgs, SolveArgs, TableArg,
};
use crate::error::CliError;
use crate::manifest::{
    sha256_hex, sibling, LabeledReport, ManifestWriter, RunManifest, TopologyRef,
};

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen { kind } => gen(kind),
        Command::Solve(a) => solve(a),
        Command::Simulate(a) => simulate(a),
        Command::Compare(a) => compare_cmd(a),
        Command::Reproduce(a) => reproduce(a),
    }
}

fn read_topology(path: &Path) -> Result<(Topology, TopologyRef), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::file(path, e))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::file(path, e))?;
    let topology = Topology::from_json(text).map_err(|e| CliError::file(path, e))?;
    let r = TopologyRef {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    };
    Ok((topology, r))
}

fn write_with<F>(path: &Path, f: F) -> Result<(), CliError>
where
    F: FnOnce(fs::File) -> Result<(), CliError>,
{
    let file = fs::File::create(path).map_err(|e| CliError::file(path, e))?;
    f(file).map_err(|e| match e {
        CliError::Io(msg) => CliError::file(path, msg),
        other => other,
    })
}

fn describe(topology: &Topology) -> String {
    format!(
        "{} nodes, {} edges, mean degree {:.3}, max degree {}",
        topology.len(),
        topology.edge_count(),
        topology.mean_degree(),
        topology.max_degree()
    )
}

fn gen(kind: GenKind) -> Result<(), CliError> {
    let (topology, output) = match kind {
        GenKind::Grid {
            rows,
            cols,
            spacing,
            range,
            output,
        } => (generate_grid(rows, cols, spacing, range)?, output),
        GenKind::Random {
            n,
            side,
            range,
            seed,
            output,
        } => (generate_random_udg(n, side, range, seed)?, output),
    };
    match output {
        Some(path) => {
            let mut text = topology.to_json()?;
            text.push('\n');
            fs::write(&path, text).map_err(|e| CliError::file(&path, e))?;
            println!("{}: {}", path.display(), describe(&topology));
        }
        None => {
            println!("{}", topology.to_json()?);
            eprintln!("{}", describe(&topology));
        }
    }
    Ok(())
}

fn print_class_means(topology: &Topology, probabilities: &[f64]) {
    println!("  mean by degree");
    for (degree, mean) in degree_class_means(topology, probabilities) {
        println!("    {degree:>3}  {mean:.4}");
    }
}

fn solve(args: SolveArgs) -> Result<(), CliError> {
    let (topology, topo_ref) = read_topology(&args.topo)?;
    let policy = args.policy.policy()?;
    let config = args.solver.config();
    let mut manifest = RunManifest::new("solve");
    manifest.topology = Some(topo_ref);
    manifest.policies = vec![policy];
    manifest.solver = Some(config);
    let mut writer = ManifestWriter::start(sibling(&args.output, ".manifest.json"), manifest)?;
    let outcome = solve_body(&topology, policy, &config, &args.output, &mut writer);
    writer.finish(outcome)
}

fn solve_body(
    topology: &Topology,
    policy: Policy,
    config: &SolverConfig,
    output: &Path,
    writer: &mut ManifestWriter,
) -> Result<(), CliError> {
    let k = assign_k(topology, policy)?;
    let solution = solve_fixed_point(topology, &k, config)?;
    solution
        .save_json(output)
        .map_err(|e| CliError::file(output, e))?;
    writer.record_output(output);
    let csv_path = sibling(output, ".csv");
    write_with(&csv_path, |f| Ok(solution.write_csv(f)?))?;
    writer.record_output(&csv_path);

    let report = fairness(&solution.p_tx(), Source::Model)?;
    writer.manifest.reports.push(LabeledReport {
        label: policy.to_string(),
        report: report.clone(),
    });
    println!("policy {policy}, {}", describe(topology));
    println!("{report}");
    println!("  iterations        {:>10}", solution.iterations);
    println!("  residual          {:>10.2e}", solution.residual);
    print_class_means(topology, &solution.p_tx());
    check_converged(&solution, &policy.to_string())
}

fn check_converged(solution: &ModelSolution, label: &str) -> Result<(), CliError> {
    if solution.converged {
        Ok(())
    } else {
        Err(CliError::NonConvergence {
            label: label.to_string(),
            residual: solution.residual,
            iterations: solution.iterations,
        })
    }
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let (topology, topo_ref) = read_topology(&args.topo)?;
    let policy = args.policy.policy()?;
    let params = args.sim.params();
    let mut manifest = RunManifest::new("simulate");
    manifest.topology = Some(topo_ref);
    manifest.policies = vec![policy];
    manifest.simulator = Some(params);
    let mut writer = ManifestWriter::start(sibling(&args.output, ".manifest.json"), manifest)?;
    let outcome = simulate_body(&topology, policy, &params, &args.output, &mut writer);
    writer.finish(outcome)
}

fn simulate_body(
    topology: &Topology,
    policy: Policy,
    params: &TrickleParams,
    output: &Path,
    writer: &mut ManifestWriter,
) -> Result<(), CliError> {
    let k = assign_k(topology, policy)?;
    let result = run_steady_state(topology, &k, params)?;
    result
        .save_json(output)
        .map_err(|e| CliError::file(output, e))?;
    writer.record_output(output);
    let csv_path = sibling(output, ".csv");
    write_with(&csv_path, |f| Ok(result.write_csv(f)?))?;
    writer.record_output(&csv_path);

    let report = fairness(&result.mean_p(), Source::Simulation)?;
    writer.manifest.reports.push(LabeledReport {
        label: policy.to_string(),
        report: report.clone(),
    });
    println!(
        "policy {policy}, {} runs x {} intervals of {} s, seed {}",
        params.runs, params.measured_intervals, params.interval_length, params.base_seed
    );
    println!("{report}");
    let widest = result
        .per_node
        .iter()
        .filter_map(|n| n.ci95)
        .fold(None, |acc: Option<f64>, c| {
            Some(acc.map_or(c, |a| a.max(c)))
        });
    match widest {
        Some(c) => println!("  widest 95% CI     {c:>10.4}"),
        None => println!("  95% CI undefined with a single run"),
    }
    print_class_means(topology, &result.mean_p());
    Ok(())
}

fn compare_cmd(args: CompareArgs) -> Result<(), CliError> {
    let model =
        ModelSolution::load_json(&args.model).map_err(|e| CliError::file(&args.model, e))?;
    let sim = SimulationResult::load_json(&args.sim).map_err(|e| CliError::file(&args.sim, e))?;
    let comparison = compare(&model, &sim)?;
    write_with(&args.output, |f| Ok(comparison.write_csv(f)?))?;
    println!("{}", comparison.model);
    println!("{}", comparison.simulation);
    println!(
        "variance: model {:.5}, simulation {:.5}",
        comparison.model.variance, comparison.simulation.variance
    );
    if let (Some(m), Some(s)) = (
        comparison.model.sample_variance,
        comparison.simulation.sample_variance,
    ) {
        println!("sample variance: model {m:.5}, simulation {s:.5}");
    }
    println!(
        "max |p_model - p_sim| = {:.4} over {} nodes",
        comparison.max_abs_diff,
        comparison.rows.len()
    );
    Ok(())
}

struct Scenario {
    topology: Topology,
    configs: Vec<(String, Policy)>,
}

fn scenario(table: TableArg) -> Result<Scenario, CliError> {
    let fixed = |k: u32| (format!("k{k}"), Policy::Fixed { k });
    Ok(match table {
        TableArg::Grid => Scenario {
            topology: generate_grid(7, 7, 1.0, std::f64::consts::SQRT_2)?,
            configs: (1..=6).map(fixed).collect(),
        },
        TableArg::Random => Scenario {
            topology: bundled_random_topology(),
            configs: (1..=6).map(fixed).collect(),
        },
        TableArg::Heuristic => Scenario {
            topology: generate_grid(7, 7, 1.0, std::f64::consts::SQRT_2)?,
            configs: [2, 0]
                .into_iter()
                .map(|offset| {
                    (
                        format!("heuristic_s3_o{offset}"),
                        Policy::Heuristic { step: 3, offset },
                    )
                })
                .collect(),
        },
    })
}

fn prepare_out_dir(dir: &Path, force: bool) -> Result<(), CliError> {
    if dir.exists() {
        let mut entries = fs::read_dir(dir).map_err(|e| CliError::file(dir, e))?;
        if entries.next().is_some() && !force {
            return Err(CliError::Usage(format!(
                "{} exists and is not empty; pass --force to write into it",
                dir.display()
            )));
        }
    }
    fs::create_dir_all(dir).map_err(|e| CliError::file(dir, e))
}

struct Row {
    label: String,
    policy: Policy,
    model: FairnessReport,
    simulation: FairnessReport,
    max_abs_diff: f64,
}

fn reproduce(args: ReproduceArgs) -> Result<(), CliError> {
    let scenario = scenario(args.table)?;
    prepare_out_dir(&args.out, args.force)?;

    let topo_path = args.out.join("topology.json");
    let mut text = scenario.topology.to_json()?;
    text.push('\n');
    fs::write(&topo_path, &text).map_err(|e| CliError::file(&topo_path, e))?;

    let config = args.solver.config();
    let params = args.sim.params();
    let mut manifest = RunManifest::new("reproduce");
    manifest.topology = Some(TopologyRef {
        path: topo_path.display().to_string(),
        sha256: sha256_hex(text.as_bytes()),
    });
    manifest.policies = scenario.configs.iter().map(|(_, p)| *p).collect();
    manifest.solver = Some(config);
    manifest.simulator = Some(params);
    let mut writer = ManifestWriter::start(args.out.join("manifest.json"), manifest)?;
    writer.record_output(&topo_path);
    let outcome = reproduce_body(&scenario, &config, &params, &args.out, &mut writer);
    writer.finish(outcome)
}

fn reproduce_body(
    scenario: &Scenario,
    config: &SolverConfig,
    params: &TrickleParams,
    out: &Path,
    writer: &mut ManifestWriter,
) -> Result<(), CliError> {
    let topology = &scenario.topology;
    let mut rows = Vec::new();
    let mut stalled = Vec::new();
    for (label, policy) in &scenario.configs {
        let dir = out.join(label);
        fs::create_dir_all(&dir).map_err(|e| CliError::file(&dir, e))?;
        let k = assign_k(topology, *policy)?;

        let solution = solve_fixed_point(topology, &k, config)?;
        if !solution.converged {
            stalled.push(check_converged(&solution, label).unwrap_err());
        }
        let path = dir.join("solution.json");
        solution
            .save_json(&path)
            .map_err(|e| CliError::file(&path, e))?;
        writer.record_output(&path);
        let path = dir.join("solution.csv");
        write_with(&path, |f| Ok(solution.write_csv(f)?))?;
        writer.record_output(&path);
        if topology.has_positions() {
            let path = dir.join("surface.csv");
            export_surface(topology, &solution.p_tx(), &path)
                .map_err(|e| CliError::file(&path, e))?;
            writer.record_output(&path);
        }

        let result = run_steady_state(topology, &k, params)?;
        let path = dir.join("simulation.json");
        result
            .save_json(&path)
            .map_err(|e| CliError::file(&path, e))?;
        writer.record_output(&path);
        let path = dir.join("simulation.csv");
        write_with(&path, |f| Ok(result.write_csv(f)?))?;
        writer.record_output(&path);

        let comparison = compare(&solution, &result)?;
        let path = dir.join("comparison.csv");
        write_with(&path, |f| Ok(comparison.write_csv(f)?))?;
        writer.record_output(&path);

        for (source, report) in [
            ("model", &comparison.model),
            ("simulation", &comparison.simulation),
        ] {
            writer.manifest.reports.push(LabeledReport {
                label: format!("{label}/{source}"),
                report: report.clone(),
            });
        }
        rows.push(Row {
            label: label.clone(),
            policy: *policy,
            model: comparison.model,
            simulation: comparison.simulation,
            max_abs_diff: comparison.max_abs_diff,
        });
        writer.write()?;
    }

    let path = out.join("table.csv");
    write_with(&path, |f| write_rollup(f, &rows))?;
    writer.record_output(&path);
    print_rollup(&rows);
    match stalled.into_iter().next() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn write_rollup(out: impl Write, rows: &[Row]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "config",
        "policy",
        "source",
        "max_p",
        "min_p",
        "mean_p",
        "variance",
        "sample_variance",
        "message_count",
        "max_abs_diff",
    ])?;
    for row in rows {
        for r in [&row.model, &row.simulation] {
            let source = match r.source {
                Source::Model => "model",
                Source::Simulation => "simulation",
            };
            w.write_record([
                row.label.clone(),
                row.policy.to_string(),
                source.to_string(),
                r.max_p.to_string(),
                r.min_p.to_string(),
                r.mean_p.to_string(),
                r.variance.to_string(),
                r.sample_variance.map(|v| v.to_string()).unwrap_or_default(),
                r.message_count.to_string(),
                row.max_abs_diff.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn print_rollup(rows: &[Row]) {
    type Stat = fn(&FairnessReport) -> f64;
    let stats: [(&str, Stat, usize); 4] = [
        ("max", |r| r.max_p, 3),
        ("min", |r| r.min_p, 3),
        ("variance", |r| r.sample_variance.unwrap_or(r.variance), 5),
        ("messages", |r| r.message_count, 3),
    ];
    let width = rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max(9);
    print!("{:<20}", "");
    for row in rows {
        print!("  {:>width$}", row.label);
    }
    println!();
    for (source, pick) in [("model", 0), ("simulation", 1)] {
        for (name, stat, digits) in &stats {
            print!("{:<20}", format!("{source} {name}"));
            for row in rows {
                let r = if pick == 0 {
                    &row.model
                } else {
                    &row.simulation
                };
                print!("  {:>width$.digits$}", stat(r));
            }
            println!();
        }
    }
    print!("{:<20}", "max |model - sim|");
    for row in rows {
        print!("  {:>width$.3}", row.max_abs_diff);
    }
    println!();
}
