use std::fmt::Write as _;

use bbnf_core::billiard::{find_bouncing_ball, fit_birkhoff, Table as BilliardTable};
use bbnf_core::classical::{forward_form, forward_map, invert, Branch};
use bbnf_core::domain::{classify, linear_poincare, Axis, DomainJet, DomainSpec};
use bbnf_core::qnf::{linearize, normal_form, solve_straightening, JetSpec, SymbolJet};
use bbnf_core::wave::{default_width, detect_lengths, dirichlet_eigs, spectrum_below, time_grid, wave_trace, Spectrum, SymClass};
use bbnf_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{RunConfig, Task};
use crate::report::{fmt_f64, Report, Table};

#[derive(Debug)]
pub enum Failure {
    /// Bad input: exit code 2.
    Validation(String),
    /// The computation itself failed: exit code 1.
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) => Failure::Validation(e.to_string()),
            e => Failure::Numerical(e.to_string()),
        }
    }
}

type Outcome = Result<Report, Failure>;

pub fn run(cfg: &RunConfig) -> Outcome {
    match cfg.task {
        Task::Classify => run_classify(cfg),
        Task::Nf => run_nf(cfg),
        Task::Invert => run_invert(cfg),
        Task::Qnf => run_qnf(cfg),
        Task::Spectrum => run_spectrum(cfg),
        Task::Wavetrace => run_wavetrace(cfg),
        Task::Oracle => run_oracle(cfg),
    }
}

fn domain(cfg: &RunConfig) -> &DomainSpec {
    cfg.domain.as_ref().expect("validated")
}

/// Jet of the domain with at least `order + 1` coefficients; missing ones are zero.
fn jet(cfg: &RunConfig) -> Result<DomainJet, Failure> {
    let mut j = domain(cfg).jet(cfg.order)?;
    if j.coeffs.len() <= cfg.order {
        j.coeffs.resize(cfg.order + 1, 0.0);
    }
    Ok(j)
}

fn floats(v: &[f64]) -> Vec<String> {
    v.iter().map(|&x| fmt_f64(x)).collect()
}

fn run_classify(cfg: &RunConfig) -> Outcome {
    let j = jet(cfg)?;
    let class = classify(&j);
    let trace = linear_poincare(&j).trace();
    let mut result = serde_json::to_value(class).expect("serializable");
    result["trace"] = json!(trace);
    result["a_param"] = json!(j.a_param());
    let mut summary = format!("bouncing-ball orbit is {} (trace {trace:.12})", class.name());
    if let Some(v) = class.invariant() {
        let _ = write!(summary, ", invariant {v:.15}");
    }
    Ok(Report { result, tables: vec![], summary })
}

fn run_nf(cfg: &RunConfig) -> Outcome {
    let j = jet(cfg)?;
    let form = forward_form(&j, cfg.order)?;
    let result = json!({
        "class": form.class,
        "b": form.b,
        "residual": form.residual,
        "jet": j,
    });
    let rows = form.b.iter().enumerate().map(|(k, &b)| vec![k.to_string(), fmt_f64(b)]).collect();
    let summary = format!("b = {:?}", form.b);
    Ok(Report { result, tables: vec![Table { name: "nf", header: cols(&["k", "b"]), rows }], summary })
}

fn max_rel_error(got: &[f64], want: &[f64]) -> f64 {
    got.iter().zip(want).map(|(g, w)| ((g - w) / w.abs().max(f64::MIN_POSITIVE)).abs()).fold(0.0, f64::max)
}

fn run_invert(cfg: &RunConfig) -> Outcome {
    let inv = &cfg.invert;
    let mut result = json!({});
    let mut summary = String::new();
    let mut tables = Vec::new();
    if !inv.b.is_empty() {
        let j = invert(&inv.b, inv.branch, inv.scale)?;
        let back = forward_map(&j, inv.b.len() - 1)?;
        let err = max_rel_error(&back, &inv.b);
        result["jet"] = json!(j);
        result["forward_check"] = json!({ "b": back, "max_rel_error": err });
        let _ = write!(summary, "a = {:?} (forward check {err:.1e})", j.coeffs);
    }
    if inv.sweep > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut rows = Vec::new();
        let mut worst: f64 = 0.0;
        for i in 0..inv.sweep {
            let mut coeffs = vec![rng.gen_range(-0.45..-0.05)];
            coeffs.extend((0..cfg.order).map(|_| rng.gen_range(-0.2..0.2)));
            let j = DomainJet::new(coeffs);
            let b = forward_map(&j, cfg.order)?;
            let back = invert(&b, Branch::Elliptic, 1.0)?;
            let err = max_rel_error(&back.coeffs, &j.coeffs);
            worst = worst.max(err);
            let mut row = vec![i.to_string(), fmt_f64(err)];
            row.extend(floats(&j.coeffs));
            rows.push(row);
        }
        result["sweep"] = json!({ "count": inv.sweep, "order": cfg.order, "max_rel_error": worst, "pass": worst < inv.tol });
        tables.push(Table { name: "sweep", header: sweep_header(cfg.order), rows });
        if !summary.is_empty() {
            summary.push('\n');
        }
        let _ = write!(summary, "round trip over {} random jets: max relative error {worst:.1e}", inv.sweep);
        if !(worst < inv.tol) {
            return Err(Failure::Numerical(format!("{summary} exceeds tol {:e}", inv.tol)));
        }
    }
    Ok(Report { result, tables, summary })
}

fn sweep_header(order: usize) -> Vec<String> {
    let mut h = cols(&["index", "max_rel_error"]);
    h.extend((0..=order).map(|k| format!("a{k}")));
    h
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn run_qnf(cfg: &RunConfig) -> Outcome {
    let path = cfg.qnf.jet.as_ref().expect("validated");
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let spec: JetSpec = serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let nodes = cfg.qnf.nodes;
    let (jet, straightening) = match spec.radii {
        Some([ra, rb]) => {
            let data = solve_straightening(ra, rb, spec.length, spec.case, nodes)?;
            let raw = SymbolJet::from_terms(spec.case, data.alpha, spec.length, nodes, &spec.terms)?;
            let info = json!({
                "s0": data.s0,
                "ell": data.ell,
                "alpha": data.alpha,
                "alpha_quadrature": data.alpha_quadrature(),
                "ode_residual": data.ode_residual(),
            });
            (linearize(&data, &raw)?, Some(info))
        }
        None => (SymbolJet::from_spec(&spec, nodes)?, None),
    };
    let nf = normal_form(&jet, cfg.order)?;
    let mut result = serde_json::to_value(&nf).expect("serializable");
    result["max_boundary_residual"] = json!(nf.max_boundary_residual());
    result["max_remainder"] = json!(nf.max_remainder());
    if let Some(s) = straightening {
        result["straightening"] = s;
    }
    let mut rows = Vec::new();
    for (j, f) in nf.f.iter().enumerate() {
        for (a, c) in f.iter().enumerate() {
            rows.push(vec![(j + 1).to_string(), a.to_string(), fmt_f64(*c)]);
        }
    }
    let summary = format!(
        "alpha = {:.15}, f = {:?}, max boundary residual {:.1e}",
        nf.alpha,
        nf.f,
        nf.max_boundary_residual()
    );
    Ok(Report { result, tables: vec![Table { name: "qnf", header: cols(&["j", "power", "coefficient"]), rows }], summary })
}

fn spectrum(cfg: &RunConfig) -> Result<Spectrum, Failure> {
    let curve = domain(cfg).curve()?;
    let s = &cfg.spectrum;
    Ok(match s.count {
        Some(n) => {
            let mut all = Vec::new();
            for class in SymClass::ALL {
                all.extend(dirichlet_eigs(&curve, class, n, &s.mps)?.eigenvalues);
            }
            Spectrum::new(all)
        }
        None => spectrum_below(&curve, s.k_max, &s.mps)?,
    })
}

fn spectrum_table(spec: &Spectrum) -> Table {
    let rows = spec
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, e)| vec![(i + 1).to_string(), fmt_f64(e.lambda), fmt_f64(e.k), e.class.label().to_string(), fmt_f64(e.residual)])
        .collect();
    Table { name: "spectrum", header: cols(&["index", "lambda", "k", "class", "residual"]), rows }
}

fn spectrum_summary(spec: &Spectrum) -> Value {
    json!({
        "count": spec.len(),
        "lambda_min": spec.eigenvalues.first().map(|e| e.lambda),
        "lambda_max": spec.eigenvalues.last().map(|e| e.lambda),
        "max_residual": spec.max_residual(),
    })
}

fn run_spectrum(cfg: &RunConfig) -> Outcome {
    let spec = spectrum(cfg)?;
    let summary = format!("{} eigenvalues, max tension {:.1e}", spec.len(), spec.max_residual());
    Ok(Report { result: spectrum_summary(&spec), tables: vec![spectrum_table(&spec)], summary })
}

fn run_wavetrace(cfg: &RunConfig) -> Outcome {
    let spec = spectrum(cfg)?;
    let w = &cfg.wavetrace;
    let width = w.width.unwrap_or_else(|| default_width(&spec));
    let tr = wave_trace(&spec, width, &time_grid(w.t_max, w.dt));
    let peaks = detect_lengths(&tr, w.threshold);
    let rows = (0..tr.t.len()).map(|i| floats(&[tr.t[i], tr.trace[i], tr.envelope[i]])).collect();
    let mut summary = format!("{} eigenvalues, W = {width:.4}; peaks at", spec.len());
    for p in &peaks {
        let _ = write!(summary, " {:.4}{}", p.t, if p.isolated { "" } else { " (not isolated)" });
    }
    let result = json!({
        "spectrum": spectrum_summary(&spec),
        "width": width,
        "center": tr.center,
        "peaks": peaks,
    });
    let trace = Table { name: "trace", header: cols(&["t", "trace", "envelope"]), rows };
    Ok(Report { result, tables: vec![spectrum_table(&spec), trace], summary })
}

fn run_oracle(cfg: &RunConfig) -> Outcome {
    let j = jet(cfg)?;
    let series = forward_map(&j, cfg.order)?;
    let table = BilliardTable::new(domain(cfg).curve()?);
    let orbit = find_bouncing_ball(&table, Axis::Vertical)?;
    let fit = fit_birkhoff(&table, &orbit, &cfg.oracle.radii, &cfg.oracle.fit)?;
    let n = series.len().min(fit.b.len());
    let mut rows = Vec::new();
    let mut cmp = Vec::new();
    let mut summary = String::from("k  series                 billiard               rel. error");
    for k in 0..n {
        let rel = ((fit.b[k] - series[k]) / series[k]).abs();
        rows.push(vec![k.to_string(), fmt_f64(series[k]), fmt_f64(fit.b[k]), fmt_f64(rel)]);
        cmp.push(json!({ "k": k, "series": series[k], "billiard": fit.b[k], "rel_error": rel }));
        let _ = write!(summary, "\n{k}  {:<22.15e} {:<22.15e} {rel:.2e}", series[k], fit.b[k]);
    }
    let fits = fit
        .samples
        .iter()
        .map(|s| floats(&[s.radius, s.action, s.rotation, s.rotation_half, s.fitted]))
        .collect();
    let points = orbit.points.iter().map(|p| floats(p)).collect();
    let result = json!({
        "comparison": cmp,
        "alpha": fit.alpha,
        "fit_residual": fit.residual,
        "orbit_length": orbit.length,
    });
    Ok(Report {
        result,
        tables: vec![
            Table { name: "oracle", header: cols(&["k", "series_b", "billiard_b", "rel_error"]), rows },
            Table { name: "fits", header: cols(&["radius", "action", "rotation", "rotation_half", "fitted"]), rows: fits },
            Table { name: "orbit", header: cols(&["x", "y"]), rows: points },
        ],
        summary,
    })
}
