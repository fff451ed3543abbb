use std::path::Path;

use branching_kms::catalog;
use branching_kms::io::{self, path_to_json};
use branching_kms::{
    check_harmonic, ergodic_experiment, extend_down, realize_link, verify_realization, FlowSpec,
    GradedGraph, LinkEngine, PathSampler, Scalar, SpectrumStyle, Violation,
};
use serde_json::{json, Value};

use crate::{
    read_json, CatalogName, CliError, CliResult, Command, Direction, Format, Global,
    HarmonicAction, Output,
};

fn scalar_arg<S: Scalar>(flag: &str, text: &str) -> CliResult<S> {
    S::parse_text(text).ok_or_else(|| CliError::parse(format!("--{flag}: not a number: {text}")))
}

fn beta_arg<S: Scalar>(g: &Global) -> CliResult<Option<S>> {
    g.beta.as_deref().map(|b| scalar_arg("beta", b)).transpose()
}

fn tol_arg<S: Scalar>(g: &Global) -> CliResult<S> {
    match g.tol.as_deref() {
        Some(t) => scalar_arg("tol", t),
        None => Ok(S::default_tol()),
    }
}

fn load_flow<S: Scalar>(g: &Global) -> CliResult<FlowSpec<S>> {
    let doc = read_json(g.input.as_deref())?;
    Ok(io::flow_from_json(&doc, beta_arg(g)?)?)
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io_err = |e: csv::Error| CliError::new(crate::Kind::Io, e.to_string());
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.write_record(r).map_err(io_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::new(crate::Kind::Io, e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("cells are UTF-8"))
}

fn edge_text(g: &GradedGraph, e: branching_kms::EdgeId) -> String {
    format!(
        "{}->{}",
        g.vertex_key(g.source(e)),
        g.vertex_key(g.target(e))
    )
}

fn violation_json(g: &GradedGraph, v: &Violation) -> Value {
    match v {
        Violation::RootNotSingleton { count } => {
            json!({"axiom": v.axiom(), "kind": "root-not-singleton", "count": count})
        }
        Violation::DuplicateEdge { first, second } => json!({
            "axiom": v.axiom(),
            "kind": "duplicate-edge",
            "edges": [edge_text(g, *first), edge_text(g, *second)],
        }),
        Violation::NotASource(z) => {
            json!({"axiom": v.axiom(), "kind": "not-a-source", "vertex": g.vertex_key(*z)})
        }
        Violation::NotATarget(z) => {
            json!({"axiom": v.axiom(), "kind": "not-a-target", "vertex": g.vertex_key(*z)})
        }
        Violation::ZeroMultiplicity(e) => {
            json!({"axiom": v.axiom(), "kind": "zero-multiplicity", "edge": edge_text(g, *e)})
        }
    }
}

pub(crate) fn execute<S: Scalar>(g: &Global, cmd: &Command) -> CliResult<Output> {
    match cmd {
        Command::Validate => validate::<S>(g),
        Command::Partition => {
            let flow = load_flow::<S>(g)?;
            let t = flow.vertex_partition()?;
            Ok(Output::ok(json_text(&io::partition_to_json(
                &t,
                flow.graph(),
            ))))
        }
        Command::Link {
            upper,
            lower,
            format,
        } => {
            let flow = load_flow::<S>(g)?;
            let lower = match lower {
                Some(l) => *l,
                None => upper
                    .checked_sub(1)
                    .ok_or_else(|| CliError::validation("--upper 0 has no level below"))?,
            };
            let engine = LinkEngine::new(&flow)?;
            let k = engine.matrix(*upper, lower)?;
            let text = match format {
                Format::Csv => {
                    let (header, rows) = io::link_to_table(&k, flow.graph());
                    csv_text(&header, &rows)?
                }
                Format::Json => json_text(&io::link_to_json(&k, flow.graph())),
            };
            Ok(Output::ok(text))
        }
        Command::Harmonic { action } => harmonic::<S>(g, action),
        Command::Sample {
            system,
            depth,
            count,
            direction,
        } => {
            let flow = load_flow::<S>(g)?;
            let engine = LinkEngine::new(&flow)?;
            let nu = io::system_from_json::<S>(&read_json(Some(system))?, flow.graph())?;
            let mut sampler = PathSampler::new(g.seed);
            let mut text = String::new();
            for _ in 0..*count {
                let p = match direction {
                    Direction::Down => sampler.sample_down(&engine, &nu, *depth)?,
                    Direction::Up => sampler.sample_up(&engine, &nu, *depth)?,
                };
                text.push_str(&path_to_json(&p, flow.graph()).to_string());
                text.push('\n');
            }
            Ok(Output::ok(text))
        }
        Command::Converge {
            path,
            system,
            depth,
            targets,
        } => converge::<S>(g, path.as_deref(), system.as_deref(), *depth, targets),
        Command::Realize { style, linkspec } => {
            let source = linkspec.as_deref().or(g.input.as_deref());
            let k = io::link_spec_from_json::<S>(&read_json(source)?)?;
            let beta = beta_arg::<S>(g)?.ok_or_else(|| CliError::parse("realize needs --beta"))?;
            let style = parse_style::<S>(style)?;
            let flow = realize_link(&k, &beta, &style)?;
            let report = verify_realization(&flow, &k, &tol_arg::<S>(g)?)?;
            let mut out = Output::ok(json_text(&io::flow_to_json(&flow)));
            if !report.passed() {
                out.failure = Some(CliError::validation(format!(
                    "realized link misses the prescription by {}",
                    report.max_link_defect
                )));
            }
            Ok(out)
        }
        Command::Catalog { name, depth, q, p } => {
            let beta = beta_arg::<S>(g)?;
            let doc = match name {
                CatalogName::Pascal => {
                    io::flow_to_json(&catalog::pascal_flow(*depth, beta.unwrap_or_else(S::zero))?)
                }
                CatalogName::Young => {
                    io::flow_to_json(&catalog::young_flow(*depth, beta.unwrap_or_else(S::zero))?)
                }
                CatalogName::QPascal => {
                    let q = q
                        .as_deref()
                        .ok_or_else(|| CliError::parse("q_pascal needs --q"))?;
                    let q = scalar_arg::<S>("q", q)?;
                    io::flow_to_json(&catalog::q_pascal(*depth, q, beta.unwrap_or_else(S::one))?)
                }
                CatalogName::Bernoulli => {
                    let p = p
                        .as_deref()
                        .ok_or_else(|| CliError::parse("bernoulli needs --p"))?;
                    let nu = catalog::bernoulli_system(*depth, scalar_arg::<S>("p", p)?)?;
                    io::system_to_json(&nu, &catalog::pascal(*depth)?)
                }
                CatalogName::Plancherel => {
                    let nu = catalog::plancherel_system::<S>(*depth)?;
                    io::system_to_json(&nu, &catalog::young(*depth)?)
                }
            };
            Ok(Output::ok(json_text(&doc)))
        }
    }
}

fn validate<S: Scalar>(g: &Global) -> CliResult<Output> {
    let doc = read_json(g.input.as_deref())?;
    let graph = io::graph_from_json(&doc)?;
    let report = graph.validate();
    let violations: Vec<Value> = report
        .violations
        .iter()
        .map(|v| violation_json(&graph, v))
        .collect();
    let valid = report.is_valid();
    let mut out = Output::ok(json_text(
        &json!({"valid": valid, "violations": violations}),
    ));
    if !valid {
        out.failure = Some(CliError::validation(format!(
            "{} axiom violation(s)",
            report.violations.len()
        )));
        return Ok(out);
    }
    // thermal data must fit the graph and be evaluable in the chosen mode
    let flow = io::flow_from_json::<S>(&doc, beta_arg(g)?)?;
    flow.vertex_partition()?;
    Ok(out)
}

fn harmonic<S: Scalar>(g: &Global, action: &HarmonicAction) -> CliResult<Output> {
    let flow = load_flow::<S>(g)?;
    let engine = LinkEngine::new(&flow)?;
    let graph = flow.graph();
    match action {
        HarmonicAction::Check { system } => {
            let nu = io::system_from_json::<S>(&read_json(Some(system))?, graph)?;
            let report = check_harmonic(&engine, &nu, &tol_arg::<S>(g)?)?;
            let defects = nu.invariant_defects(&engine);
            let mut residuals = serde_json::Map::new();
            for (n, row) in report.residuals.iter().enumerate() {
                for z in graph.vertices(n) {
                    residuals.insert(graph.vertex_key(z), io::scalar_to_json(&row[z.index]));
                }
            }
            let doc = json!({
                "passed": report.passed,
                "max_residual": io::scalar_to_json(&report.max_residual),
                "worst": report.worst.map(|z| graph.vertex_key(z)),
                "root_defect": io::scalar_to_json(&defects.root),
                "level_mass_defect": io::scalar_to_json(&defects.level_mass),
                "infinite_mass": defects.infinite_mass.iter().map(|&z| graph.vertex_key(z)).collect::<Vec<_>>(),
                "residuals": residuals,
            });
            let mut out = Output::ok(json_text(&doc));
            if !report.passed {
                out.failure = Some(CliError::validation(format!(
                    "not harmonic: residual {} at {}",
                    report.max_residual,
                    report
                        .worst
                        .map(|z| graph.vertex_key(z))
                        .unwrap_or_default()
                )));
            }
            Ok(out)
        }
        HarmonicAction::Extend { measure } => {
            let mu = io::measure_from_json::<S>(&read_json(Some(measure))?, graph)?;
            let nu = extend_down(&engine, &mu)?;
            Ok(Output::ok(json_text(&io::system_to_json(&nu, graph))))
        }
    }
}

fn converge<S: Scalar>(
    g: &Global,
    path: Option<&Path>,
    system: Option<&Path>,
    depth: Option<usize>,
    targets: &[String],
) -> CliResult<Output> {
    let flow = load_flow::<S>(g)?;
    let engine = LinkEngine::new(&flow)?;
    let graph = flow.graph();
    let nu = system
        .map(|p| -> CliResult<_> { Ok(io::system_from_json::<S>(&read_json(Some(p))?, graph)?) })
        .transpose()?;
    let vertices = match (path, &nu, depth) {
        (Some(p), _, _) => io::path_from_json(&read_json(Some(p))?, graph)?,
        (None, Some(nu), Some(d)) => PathSampler::new(g.seed).sample_up(&engine, nu, d)?.vertices,
        _ => {
            return Err(CliError::parse(
                "converge needs --path, or --system with --depth",
            ))
        }
    };
    let targets = if targets.is_empty() {
        if graph.depth() == 0 {
            return Err(CliError::validation("graph has no level 1"));
        }
        graph.vertices(1).collect()
    } else {
        targets
            .iter()
            .map(|t| io::vertex_from_key(graph, t))
            .collect::<branching_kms::Result<Vec<_>>>()?
    };
    let table = ergodic_experiment(&engine, nu.as_ref(), &targets, &vertices)?;
    let (header, rows) = io::ergodic_to_table(&table, graph);
    Ok(Output::ok(csv_text(&header, &rows)?))
}

fn parse_style<S: Scalar>(text: &str) -> CliResult<SpectrumStyle<S>> {
    match text.split_once(':') {
        None if text == "uniform" => Ok(SpectrumStyle::Uniform),
        Some(("geometric", r)) => Ok(SpectrumStyle::Geometric(scalar_arg("style", r)?)),
        _ => Err(CliError::parse(format!(
            "--style: expected uniform or geometric:R, got {text}"
        ))),
    }
}
