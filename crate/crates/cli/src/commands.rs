//! Subcommand implementations.

use std::fs;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::Value;

use ddehopf::ddeint::{validate_grid, IntegrateOptions, ValidateOptions, ValidationReport};
use ddehopf::expansion::{expand_with, ExpansionOptions, ExpansionResult, OrderReport};
use ddehopf::model::{BuiltinModel, DdeSystem, ModelConfig};
use ddehopf::reconstruct::{bifurcation_diagram, reconstruct, residual, DiagramPoint};
use ddehopf::find_hopf;

use crate::output::{emit, json, num, opt_num, sibling, Table};
use crate::svg::{self, Panel, Series};
use crate::{Command, Format, ModelArgs, OutputArgs, SeriesArgs};

/// The model could not be assembled from the command line and parameter file.
#[derive(Debug, thiserror::Error)]
#[error("model setup: {0:#}")]
pub struct ModelSetupError(anyhow::Error);

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Hopf { model, out } => hopf(&load_model(&model)?, &out),
        Command::Expand { model, series, out } => expand(&load_model(&model)?, &series, &out),
        Command::Solve { model, series, lambda, samples, out } => {
            solve(&load_model(&model)?, &series, lambda, samples, &out)
        }
        Command::Diagram { model, series, lambda_grid, threshold, out } => {
            diagram(&load_model(&model)?, &series, &lambda_grid.values(), threshold, &out)
        }
        Command::Residual { model, series, delays, each_order, samples, out } => {
            residuals(&load_model(&model)?, &series, &delays.values(), each_order, samples, &out)
        }
        Command::Validate { model, series, delays, each_order, rtol, atol, out } => {
            let options = ValidateOptions { integrate: IntegrateOptions { rtol, atol }, ..Default::default() };
            validations(&load_model(&model)?, &series, &delays.values(), each_order, &options, &out)
        }
    }
}

/// Built-in defaults, then the parameter file, then command-line flags.
fn load_model(args: &ModelArgs) -> Result<BuiltinModel> {
    build_config(args).map_err(|e| ModelSetupError(e).into())
}

fn build_config(args: &ModelArgs) -> Result<BuiltinModel> {
    let file = match &args.params {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Some(ModelConfig::from_json(&text).with_context(|| format!("parsing {}", path.display()))?)
        }
        None => None,
    };
    let name = match (&args.model, &file) {
        (Some(m), _) => m.to_ascii_lowercase(),
        (None, Some(f)) => f.model.to_ascii_lowercase(),
        (None, None) => bail!("no model given; pass --model or a --params file"),
    };
    let mut config = ModelConfig::named(&name);
    if let Some(mut f) = file {
        f.model = f.model.to_ascii_lowercase();
        config = config.overlay(&f)?;
    }
    let mut flags = ModelConfig::named(&name);
    for kv in &args.param {
        let (k, v) = kv.split_once('=').with_context(|| format!("--param '{kv}' is not KEY=VALUE"))?;
        let v: f64 = v.trim().parse().with_context(|| format!("--param {k}: '{v}' is not a number"))?;
        flags.params.insert(k.trim().to_string(), Value::from(v));
    }
    flags.hopf_hint.omega = args.hint_omega;
    flags.hopf_hint.lambda = args.hint_lambda;
    Ok(config.overlay(&flags)?.build()?)
}

fn expansion(model: &BuiltinModel, series: &SeriesArgs) -> Result<ExpansionResult> {
    let options = ExpansionOptions { z0_scale: series.z0_scale.into(), ..Default::default() };
    Ok(expand_with(model, series.order, &options)?)
}

fn format_or(out: &OutputArgs, default: Format, allowed: &[Format]) -> Result<Format> {
    let f = out.format.unwrap_or(default);
    if !allowed.contains(&f) {
        bail!("format {f:?} is not available here (choose from {allowed:?})");
    }
    Ok(f)
}

fn time_header(model: &BuiltinModel, name: &str) -> String {
    format!("{name} [{}]", model.time_unit())
}

#[derive(Serialize)]
struct HopfOutput {
    model: String,
    params: Value,
    time_unit: String,
    state_labels: Vec<String>,
    omega0: f64,
    lambda0: f64,
    lambda_hat0: f64,
    period0: f64,
    equilibrium: Vec<f64>,
    residual: f64,
    iterations: usize,
}

fn hopf(model: &BuiltinModel, out: &OutputArgs) -> Result<()> {
    let hp = find_hopf(model)?;
    let doc = HopfOutput {
        model: model.name().to_string(),
        params: model.params_json(),
        time_unit: model.time_unit().to_string(),
        state_labels: model.state_labels(),
        omega0: hp.omega0,
        lambda0: hp.lambda0,
        lambda_hat0: hp.lambda_hat0,
        period0: hp.period(),
        equilibrium: hp.equilibrium.clone(),
        residual: hp.residual,
        iterations: hp.iterations,
    };
    let text = match format_or(out, Format::Json, &[Format::Json, Format::Csv])? {
        Format::Json => json(&doc)?,
        _ => {
            let unit = model.time_unit();
            let mut header = vec![
                format!("omega0 [rad/{unit}]"),
                time_header(model, "lambda0"),
                "lambda_hat0 [rad]".to_string(),
                time_header(model, "period0"),
            ];
            header.extend(model.state_labels().iter().map(|l| format!("equilibrium {l}")));
            let mut t = Table::new(header);
            let mut row = vec![num(hp.omega0), num(hp.lambda0), num(hp.lambda_hat0), num(hp.period())];
            row.extend(hp.equilibrium.iter().copied().map(num));
            t.push(row);
            t.to_csv()?
        }
    };
    emit(out.out.as_deref(), &text)
}

#[derive(Serialize)]
struct FourierTerm {
    order: usize,
    harmonic: usize,
    component: String,
    cos: f64,
    sin: f64,
}

#[derive(Serialize)]
struct ExpandOutput<'a> {
    model: String,
    params: Value,
    order: usize,
    omega0: f64,
    lambda0: f64,
    conventions: ddehopf::expansion::Conventions,
    lambda_hats: &'a [f64],
    t_hats: &'a [f64],
    reports: &'a [OrderReport],
    fourier: Vec<FourierTerm>,
}

fn fourier_terms(model: &BuiltinModel, exp: &ExpansionResult) -> Vec<FourierTerm> {
    let labels = model.state_labels();
    let mut terms = Vec::new();
    for (j, z) in exp.z.iter().enumerate() {
        for k in 0..=z.degree() {
            for (c, label) in labels.iter().enumerate() {
                let (cos, sin) = z.coef(c, k);
                terms.push(FourierTerm { order: j, harmonic: k, component: label.clone(), cos, sin });
            }
        }
    }
    terms
}

fn expand(model: &BuiltinModel, series: &SeriesArgs, out: &OutputArgs) -> Result<()> {
    let exp = expansion(model, series)?;
    match format_or(out, Format::Csv, &[Format::Csv, Format::Json])? {
        Format::Json => {
            let doc = ExpandOutput {
                model: model.name().to_string(),
                params: model.params_json(),
                order: exp.order,
                omega0: exp.omega0,
                lambda0: exp.lambda0,
                conventions: exp.conventions,
                lambda_hats: &exp.lambda_hats,
                t_hats: &exp.t_hats,
                reports: &exp.reports,
                fourier: fourier_terms(model, &exp),
            };
            emit(out.out.as_deref(), &json(&doc)?)
        }
        _ => {
            let mut header = vec!["coefficient".to_string(), "unit".to_string()];
            header.extend((0..=exp.order).map(|j| format!("o{j}")));
            let mut table = Table::new(header);
            for (name, values) in [("lambda_hat", &exp.lambda_hats), ("t_hat", &exp.t_hats)] {
                let mut row = vec![name.to_string(), "rad".to_string()];
                row.extend(values.iter().copied().map(num));
                table.push(row);
            }
            emit(out.out.as_deref(), &table.to_csv()?)?;
            // The Fourier table is a second artifact and needs a file to go to.
            if let Some(path) = &out.out {
                let mut f = Table::new(["order", "harmonic", "component", "cos [state units]", "sin [state units]"]);
                for t in fourier_terms(model, &exp) {
                    f.push(vec![t.order.to_string(), t.harmonic.to_string(), t.component, num(t.cos), num(t.sin)]);
                }
                emit(Some(&sibling(path, "fourier")), &f.to_csv()?)?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SolveOutput {
    model: String,
    lambda: f64,
    order: usize,
    eps: f64,
    period: f64,
    residual: f64,
    equilibrium: Vec<f64>,
    state_labels: Vec<String>,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
}

fn solve(model: &BuiltinModel, series: &SeriesArgs, lambda: f64, samples: usize, out: &OutputArgs) -> Result<()> {
    let exp = expansion(model, series)?;
    let orbit = reconstruct(model, &exp, lambda)?;
    let r = residual(model, &orbit, ddehopf::reconstruct::DEFAULT_RESIDUAL_SAMPLES)?;
    let times: Vec<f64> = (0..=samples).map(|i| orbit.period * i as f64 / samples as f64).collect();
    let states: Vec<Vec<f64>> = times.iter().map(|&t| orbit.eval(t)).collect();
    let labels = model.state_labels();
    let text = match format_or(out, Format::Csv, &[Format::Csv, Format::Json, Format::Svg])? {
        Format::Json => json(&SolveOutput {
            model: model.name().to_string(),
            lambda,
            order: orbit.order,
            eps: orbit.eps,
            period: orbit.period,
            residual: r,
            equilibrium: orbit.equilibrium.clone(),
            state_labels: labels,
            times,
            states,
        })?,
        Format::Svg => {
            let panels: Vec<Panel> = labels
                .iter()
                .enumerate()
                .map(|(c, label)| Panel {
                    y_label: label.clone(),
                    series: vec![Series {
                        label: format!("N = {}", orbit.order),
                        points: times.iter().zip(&states).map(|(&t, x)| (t, x[c])).collect(),
                        dashed: false,
                    }],
                    markers: vec![],
                })
                .collect();
            let title = format!("{} orbit, λ = {lambda}, ε = {:.6}, residual {:.3e}", model.name(), orbit.eps, r);
            svg::render(&title, &time_header(model, "t"), &panels)
        }
        Format::Csv => {
            let mut header = vec![time_header(model, "t")];
            header.extend(labels);
            let mut t = Table::new(header);
            for (time, x) in times.iter().zip(&states) {
                let mut row = vec![num(*time)];
                row.extend(x.iter().copied().map(num));
                t.push(row);
            }
            t.to_csv()?
        }
    };
    emit(out.out.as_deref(), &text)
}

#[derive(Serialize)]
struct DiagramOutput<'a> {
    model: String,
    order: usize,
    lambda0: f64,
    threshold: f64,
    state_labels: Vec<String>,
    points: &'a [DiagramPoint],
}

fn branch(p: &DiagramPoint) -> &'static str {
    match (p.equilibrium_branch, &p.error) {
        (true, _) => "equilibrium",
        (false, None) => "periodic",
        (false, Some(_)) => "failed",
    }
}

fn diagram(model: &BuiltinModel, series: &SeriesArgs, grid: &[f64], threshold: f64, out: &OutputArgs) -> Result<()> {
    let exp = expansion(model, series)?;
    let points = bifurcation_diagram(model, &exp, grid, threshold);
    let labels = model.state_labels();
    let text = match format_or(out, Format::Csv, &[Format::Csv, Format::Json, Format::Svg])? {
        Format::Json => json(&DiagramOutput {
            model: model.name().to_string(),
            order: exp.order,
            lambda0: exp.lambda0,
            threshold,
            state_labels: labels,
            points: &points,
        })?,
        Format::Svg => {
            let ok: Vec<&DiagramPoint> = points.iter().filter(|p| p.error.is_none()).collect();
            let panels: Vec<Panel> = labels
                .iter()
                .enumerate()
                .map(|(c, label)| {
                    let line = |name: &str, pick: fn(&DiagramPoint) -> &[f64], extrapolated: bool| Series {
                        label: format!("{name}{}", if extrapolated { " (extrapolated)" } else { "" }),
                        points: ok
                            .iter()
                            .filter(|p| p.extrapolated == extrapolated)
                            .map(|p| (p.lambda, pick(p)[c]))
                            .collect(),
                        dashed: extrapolated,
                    };
                    let mut s = vec![line("max", |p| &p.max, false), line("min", |p| &p.min, false)];
                    if ok.iter().any(|p| p.extrapolated) {
                        s.push(line("max", |p| &p.max, true));
                        s.push(line("min", |p| &p.min, true));
                    }
                    Panel { y_label: label.clone(), series: s, markers: vec![exp.lambda0] }
                })
                .collect();
            let title = format!("{} bifurcation diagram, N = {}, λ₀ = {:.6}", model.name(), exp.order, exp.lambda0);
            svg::render(&title, &time_header(model, "λ"), &panels)
        }
        Format::Csv => {
            let mut header = vec![
                time_header(model, "lambda"),
                "branch".into(),
                "eps".into(),
                "r_r".into(),
                "extrapolated".into(),
            ];
            for l in &labels {
                header.push(format!("min {l}"));
                header.push(format!("max {l}"));
            }
            header.push("error".into());
            let mut t = Table::new(header);
            for p in &points {
                let mut row =
                    vec![num(p.lambda), branch(p).into(), opt_num(p.eps), opt_num(p.residual), p.extrapolated.to_string()];
                for c in 0..labels.len() {
                    row.push(opt_num(p.min.get(c).copied()));
                    row.push(opt_num(p.max.get(c).copied()));
                }
                row.push(p.error.clone().unwrap_or_default());
                t.push(row);
            }
            t.to_csv()?
        }
    };
    emit(out.out.as_deref(), &text)
}

/// Orders 2..=N with `each_order`, otherwise N alone. Order 1 carries no
/// amplitude information.
fn orders(exp: &ExpansionResult, each_order: bool) -> Vec<usize> {
    if each_order {
        (2..=exp.order).collect()
    } else {
        vec![exp.order]
    }
}

#[derive(Serialize)]
struct ResidualRow {
    lambda: f64,
    order: usize,
    eps: f64,
    period: f64,
    r_r: f64,
}

fn residuals(
    model: &BuiltinModel,
    series: &SeriesArgs,
    delays: &[f64],
    each_order: bool,
    samples: usize,
    out: &OutputArgs,
) -> Result<()> {
    let full = expansion(model, series)?;
    let mut rows = Vec::new();
    for n in orders(&full, each_order) {
        let exp = full.truncated(n)?;
        for &lambda in delays {
            let orbit = reconstruct(model, &exp, lambda).with_context(|| format!("order {n}, λ = {lambda}"))?;
            let r_r = residual(model, &orbit, samples).with_context(|| format!("order {n}, λ = {lambda}"))?;
            rows.push(ResidualRow { lambda, order: n, eps: orbit.eps, period: orbit.period, r_r });
        }
    }
    let text = match format_or(out, Format::Csv, &[Format::Csv, Format::Json])? {
        Format::Json => json(&rows)?,
        _ => {
            let mut t = Table::new([time_header(model, "lambda"), "order".into(), "eps".into(), time_header(model, "period"), "r_r".into()]);
            for r in &rows {
                t.push(vec![num(r.lambda), r.order.to_string(), num(r.eps), num(r.period), num(r.r_r)]);
            }
            t.to_csv()?
        }
    };
    emit(out.out.as_deref(), &text)
}

fn validations(
    model: &BuiltinModel,
    series: &SeriesArgs,
    delays: &[f64],
    each_order: bool,
    options: &ValidateOptions,
    out: &OutputArgs,
) -> Result<()> {
    let full = expansion(model, series)?;
    let mut rows: Vec<ValidationReport> = Vec::new();
    for n in orders(&full, each_order) {
        let exp = full.truncated(n)?;
        for (lambda, r) in delays.iter().zip(validate_grid(model, &exp, delays, options)) {
            rows.push(r.with_context(|| format!("order {n}, λ = {lambda}"))?);
        }
    }
    let text = match format_or(out, Format::Csv, &[Format::Csv, Format::Json])? {
        Format::Json => json(&rows)?,
        _ => {
            let mut t = Table::new([
                time_header(model, "lambda"),
                "order".into(),
                "eps".into(),
                "r_r".into(),
                "e_r".into(),
                time_header(model, "period_expansion"),
                time_header(model, "period_numeric"),
                time_header(model, "t0"),
            ]);
            for r in &rows {
                t.push(vec![
                    num(r.lambda),
                    r.order.to_string(),
                    num(r.eps),
                    num(r.r_r),
                    num(r.e_r),
                    num(r.period_expansion),
                    num(r.period_numeric),
                    num(r.t0),
                ]);
            }
            t.to_csv()?
        }
    };
    emit(out.out.as_deref(), &text)
}
