use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use kappabound::analytic::{divergence_curve, half_order_bracket, AnalyticModel};
use kappabound::classify::{cross_validate, ClassifierKind, ClassifierSpec};
use kappabound::confusion::{rates as rate_summary, ConfusionCounts, RateSummary};
use kappabound::datagen::{generate as draw, GenSpec, GENERATOR};
use kappabound::dataset::DatasetTable;
use kappabound::estimator::{estimate as run_estimate, DivergenceEstimate, EstimatorConfig};
use kappabound::ingest::{greedy_select, load_csv, GreedyOptions, SchemaSpec};
use kappabound::sweep::{
    balance_point, default_grid, fit_rate_points, kappa_limit, predict_kappa_curve, sweep as run_sweep,
    verdict, verdict_for_cdr, write_kappa_curve, write_sweep_table, FitOptions, RatePoint, SweepRun, Verdict,
};

use crate::report::Run;
use crate::{
    AnalyzeArgs, ClassifierArgs, CurveArgs, EstimateArgs, EstimatorArgs, FitArgs, GenArgs, ModelArgs,
    ModelKind, RatesArgs, SelectArgs, SweepArgs,
};

const EVALUATION: &str = "stratified k-fold cross-validation, priors from the training folds";

fn model_from(args: &ModelArgs) -> Result<AnalyticModel> {
    let leaf = match args.model {
        ModelKind::Gaussian => AnalyticModel::gaussian(args.mean1, args.sd1, args.mean2, args.sd2)?,
        ModelKind::Exponential => AnalyticModel::exponential(args.alpha, args.beta)?,
    };
    if args.dim == 0 {
        bail!("--dim must be at least 1");
    }
    Ok(if args.dim == 1 {
        leaf
    } else {
        AnalyticModel::replicate(leaf, args.dim)?
    })
}

struct Source<'a> {
    dataset: &'a Path,
    schema: Option<&'a Path>,
    class_column: Option<&'a str>,
    class1_label: Option<&'a str>,
    delimiter: Option<char>,
}

fn load(src: Source<'_>, run: &mut Run) -> Result<DatasetTable> {
    let mut schema = match src.schema {
        Some(path) => {
            run.add_input(path)?;
            SchemaSpec::from_toml_file(path).with_context(|| format!("schema {}", path.display()))?
        }
        None => SchemaSpec::new("class", "1"),
    };
    if let Some(c) = src.class_column {
        schema.class_column = c.to_string();
    }
    if let Some(l) = src.class1_label {
        schema.class1_label = l.to_string();
    }
    if let Some(d) = src.delimiter {
        schema.delimiter = d;
    }
    run.add_input(src.dataset)?;
    let loaded =
        load_csv(src.dataset, &schema).with_context(|| format!("loading {}", src.dataset.display()))?;
    if loaded.rows_dropped > 0 {
        run.warn(format!(
            "dropped {} of {} rows with missing values",
            loaded.rows_dropped, loaded.rows_read
        ));
    }
    Ok(loaded.table)
}

fn load_data(d: &crate::DataArgs, run: &mut Run) -> Result<DatasetTable> {
    load(
        Source {
            dataset: &d.dataset,
            schema: d.schema.as_deref(),
            class_column: d.class_column.as_deref(),
            class1_label: d.class1_label.as_deref(),
            delimiter: d.delimiter,
        },
        run,
    )
}

fn estimator_config(args: &EstimatorArgs, seed: u64) -> EstimatorConfig {
    EstimatorConfig {
        bins: args.bins,
        k: args.k,
        repeats: args.repeats,
        seed,
        ..EstimatorConfig::default()
    }
}

fn classifier_spec(args: &ClassifierArgs, seed: u64, table: &DatasetTable) -> Result<ClassifierSpec> {
    let kind = if args.classifier == "auto" {
        ClassifierKind::default_for(table)
    } else {
        args.classifier.parse()?
    };
    Ok(ClassifierSpec {
        folds: args.folds,
        seed,
        l2_strength: args.l2,
        smoothing_alpha: args.smoothing,
        ..ClassifierSpec::new(kind)
    })
}

fn parse_grid(grid: Option<&str>) -> Result<Vec<f64>> {
    let Some(text) = grid else {
        return Ok(default_grid());
    };
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, h): (f64, f64, f64) =
                (start.trim().parse()?, stop.trim().parse()?, step.trim().parse()?);
            if h.is_nan() || h <= 0.0 || b < a {
                bail!("grid range {text:?} needs start <= stop and a positive step");
            }
            let n = ((b - a) / h + 1e-9).floor() as usize;
            (0..=n)
                .map(|i| a + i as f64 * h)
                .map(|x| (x * 1e12).round() / 1e12)
                .collect()
        }
        [_] => text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| anyhow!("grid value {s:?}: {e}"))
            })
            .collect::<Result<Vec<_>>>()?,
        _ => bail!("grid must be a list `a,b,c` or a range `start:stop:step`"),
    };
    if values.is_empty() {
        bail!("empty grid");
    }
    Ok(values)
}

fn divergence_json(e: &DivergenceEstimate) -> Value {
    json!({
        "n1": e.n1,
        "n2": e.n2,
        "dim": e.dim,
        "bins": e.bins,
        "repeats": e.repeats,
        "neighbor_order": e.config.k,
        "cdi12_bits": e.cdi12,
        "cdi21_bits": e.cdi21,
        "cdr_bits": e.cdr,
        "cdr_defined": e.cdr.is_some(),
        "se12_bits": e.se12,
        "se21_bits": e.se21,
        "t_r": e.cdr.map(|_| e.cdi12 / (e.cdi12 + e.cdi21)),
        "kappa_limit": e.cdr.map(kappa_limit),
    })
}

fn divergence_text(e: &DivergenceEstimate, out: &mut String) {
    let _ = writeln!(out, "CDI(1,2)      {:.4} ± {:.4} bits", e.cdi12, e.se12);
    let _ = writeln!(out, "CDI(2,1)      {:.4} ± {:.4} bits", e.cdi21, e.se21);
    match e.cdr {
        Some(cdr) => {
            let _ = writeln!(out, "CDR           {cdr:.4} bits");
            let _ = writeln!(out, "kappa limit   {:.4}", kappa_limit(cdr));
        }
        None => {
            let _ = writeln!(out, "CDR           undefined (a CDI is not positive)");
        }
    }
    let _ = writeln!(
        out,
        "estimator     {} bins, {} replicates, k = {}",
        e.bins, e.repeats, e.config.k
    );
}

fn rates_json(c: &ConfusionCounts, r: &RateSummary) -> Value {
    json!({
        "counts": {
            "n1_true": c.n1_true,
            "n1_leak": c.n1_leak,
            "n2_leak": c.n2_leak,
            "n2_true": c.n2_true,
        },
        "n": r.n,
        "f1": r.f1,
        "kappa": r.kappa,
        "k_bits": r.k,
        "k12_bits": r.k12,
        "k21_bits": r.k21,
        "k_w_bits": r.k_w,
        "k_max_bits": r.k_max,
        "capped12": r.capped12,
        "capped21": r.capped21,
        "capped_k": r.capped_k,
    })
}

fn flag(capped: bool) -> &'static str {
    if capped {
        " (capped)"
    } else {
        ""
    }
}

fn rates_text(c: &ConfusionCounts, r: &RateSummary, out: &mut String) {
    let _ = writeln!(
        out,
        "confusion     [{} {}; {} {}]  (rows: true class)",
        c.n1_true, c.n1_leak, c.n2_leak, c.n2_true
    );
    let _ = writeln!(out, "f1            {:.4}", r.f1);
    let _ = writeln!(out, "kappa         {:.4}", r.kappa);
    let _ = writeln!(out, "K             {:.4} bits{}", r.k, flag(r.capped_k));
    let _ = writeln!(out, "K12           {:.4} bits{}", r.k12, flag(r.capped12));
    let _ = writeln!(out, "K21           {:.4} bits{}", r.k21, flag(r.capped21));
    let _ = writeln!(out, "K_W           {:.4} bits", r.k_w);
    let _ = writeln!(out, "K_max         {:.4} bits", r.k_max);
}

fn verdict_json(v: &Verdict) -> Value {
    json!({
        "status": v.status.as_str(),
        "kappa_observed": v.kappa_observed,
        "kappa_limit": v.kappa_limit,
        "gap": v.gap,
        "tolerance": v.tolerance,
    })
}

fn verdict_text(v: &Verdict, out: &mut String) {
    match v.gap {
        Some(gap) => {
            let _ = writeln!(
                out,
                "verdict       {} (gap {gap:+.4}, tolerance {})",
                v.status.as_str(),
                v.tolerance
            );
        }
        None => {
            let _ = writeln!(out, "verdict       {} (CDR undefined)", v.status.as_str());
        }
    }
}

fn table_header(t: &DatasetTable, out: &mut String) {
    let _ = writeln!(
        out,
        "dataset       {} (N1 = {}, N2 = {}, f1 = {:.4}, d = {})",
        t.name,
        t.n1(),
        t.n2(),
        t.f1(),
        t.dim()
    );
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

pub fn gen(a: &GenArgs) -> Result<()> {
    let run = Run::new("gen", a, a.seed)?;
    let spec = GenSpec {
        model: model_from(&a.model)?,
        n1: a.n1,
        n2: a.n2,
        seed: run.seed,
    };
    let table = draw(&spec)?;
    let mut w = create(&a.out)?;
    table.write_csv(&mut w, ',')?;
    drop(w);
    let manifest_path = a.out.with_extension("manifest.json");
    let result = json!({
        "dataset": a.out,
        "sha256": crate::report::digest(&a.out)?.sha256,
        "model": spec.model,
        "generator": GENERATOR,
        "n1": table.n1(),
        "n2": table.n2(),
        "n": table.n_rows(),
        "f1": table.f1(),
        "dim": table.dim(),
    });
    let mut text = String::new();
    table_header(&table, &mut text);
    let _ = writeln!(text, "written       {}", a.out.display());
    let _ = writeln!(text, "manifest      {}", manifest_path.display());
    run.emit(result, &text, Some(&manifest_path), a.json)
}

pub fn estimate(a: &EstimateArgs) -> Result<()> {
    let mut run = Run::new("estimate", a, a.seed)?;
    let table = load_data(&a.data, &mut run)?;
    let e = run_estimate(&table, &estimator_config(&a.estimator, run.seed))?;
    let mut text = String::new();
    table_header(&table, &mut text);
    divergence_text(&e, &mut text);
    run.emit(divergence_json(&e), &text, a.output.out.as_deref(), a.output.json)
}

pub fn analyze(a: &AnalyzeArgs) -> Result<()> {
    let mut run = Run::new("analyze", a, a.seed)?;
    let table = load_data(&a.data, &mut run)?;
    let spec = classifier_spec(&a.classifier, run.seed, &table)?;
    let cv = cross_validate(&table, &spec)?;
    for w in &cv.warnings {
        run.warn(w.clone());
    }
    let r = rate_summary(&cv.counts)?;
    let e = run_estimate(&table, &estimator_config(&a.estimator, run.seed))?;
    let v = verdict(r.kappa, &e, a.tolerance);
    let result = json!({
        "protocol": {
            "classifier": spec.kind.name(),
            "folds": cv.folds,
            "evaluation": EVALUATION,
        },
        "rates": rates_json(&cv.counts, &r),
        "divergence": divergence_json(&e),
        "verdict": verdict_json(&v),
    });
    let mut text = String::new();
    table_header(&table, &mut text);
    let _ = writeln!(text, "classifier    {} ({}-fold)", spec.kind.name(), cv.folds);
    rates_text(&cv.counts, &r, &mut text);
    divergence_text(&e, &mut text);
    verdict_text(&v, &mut text);
    run.emit(result, &text, a.output.out.as_deref(), a.output.json)
}

fn sweep_json(s: &SweepRun) -> Value {
    json!({
        "native_f1": s.native_f1,
        "points": s.points.iter().map(|p| json!({
            "f1_target": p.f1_target,
            "f1": p.f1,
            "folds": p.folds,
            "rates": rates_json(&p.counts, &p.rates),
            "divergence": divergence_json(&p.divergence),
        })).collect::<Vec<_>>(),
        "skipped": s.skipped,
    })
}

fn sweep_text(s: &SweepRun, out: &mut String) {
    let _ = writeln!(
        out,
        "{:>7} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "f1", "kappa", "K12", "K21", "CDI12", "CDI21"
    );
    for p in &s.points {
        let _ = writeln!(
            out,
            "{:>7.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            p.f1, p.rates.kappa, p.rates.k12, p.rates.k21, p.divergence.cdi12, p.divergence.cdi21
        );
    }
    for k in &s.skipped {
        let _ = writeln!(out, "skipped f1 = {}: {}", k.f1_target, k.reason);
    }
}

fn do_sweep(
    table: &DatasetTable,
    cls: &ClassifierArgs,
    est: &EstimatorArgs,
    grid: Option<&str>,
    run: &mut Run,
) -> Result<(SweepRun, ClassifierSpec)> {
    let spec = classifier_spec(cls, run.seed, table)?;
    let s = run_sweep(
        table,
        &parse_grid(grid)?,
        &spec,
        &estimator_config(est, run.seed),
        run.seed,
    )?;
    for w in &s.warnings {
        run.warn(w.clone());
    }
    for k in &s.skipped {
        run.warn(format!("skipped f1 = {}: {}", k.f1_target, k.reason));
    }
    Ok((s, spec))
}

pub fn sweep(a: &SweepArgs) -> Result<()> {
    let mut run = Run::new("sweep", a, a.seed)?;
    let table = load_data(&a.data, &mut run)?;
    let (s, spec) = do_sweep(&table, &a.classifier, &a.estimator, a.grid.as_deref(), &mut run)?;
    if let Some(path) = &a.table {
        write_sweep_table(&s.points, create(path)?, ',')?;
    }
    let mut result = sweep_json(&s);
    result["protocol"] =
        json!({"classifier": spec.kind.name(), "folds": spec.folds, "evaluation": EVALUATION});
    let mut text = String::new();
    table_header(&table, &mut text);
    sweep_text(&s, &mut text);
    run.emit(result, &text, a.output.out.as_deref(), a.output.json)
}

fn read_sweep_table(path: &Path) -> Result<Vec<RatePoint>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let header = rdr.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("sweep table lacks column {name:?}"))
    };
    let (f1, k12, k21) = (col("f1")?, col("k12")?, col("k21")?);
    let (c12, c21) = (col("capped12").ok(), col("capped21").ok());
    let mut points = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |j: usize| -> Result<f64> {
            rec[j]
                .parse()
                .map_err(|e| anyhow!("row {}: {:?}: {e}", i + 2, &rec[j]))
        };
        let capped = |j: Option<usize>| j.is_some_and(|j| &rec[j] == "true");
        points.push(RatePoint {
            f1: num(f1)?,
            k12: num(k12)?,
            k21: num(k21)?,
            capped12: capped(c12),
            capped21: capped(c21),
        });
    }
    Ok(points)
}

fn parse_pair(text: &str) -> Result<(f64, f64)> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| anyhow!("anchors {text:?}: {e}"))?;
    match v.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => bail!("anchors must be `CDI12,CDI21`"),
    }
}

pub fn fit(a: &FitArgs) -> Result<()> {
    // A saved sweep table involves no randomness, so a missing seed is not worth a warning.
    let seed = if a.from_sweep.is_some() {
        a.seed.or(Some(0))
    } else {
        a.seed
    };
    let mut run = Run::new("fit", a, seed)?;
    let mut result = json!({});
    let mut text = String::new();
    let mut anchors = a.anchors.as_deref().map(parse_pair).transpose()?;
    let points = match (&a.dataset, &a.from_sweep) {
        (_, Some(path)) => {
            run.add_input(path)?;
            read_sweep_table(path)?
        }
        (Some(dataset), None) => {
            let table = load(
                Source {
                    dataset,
                    schema: a.schema.as_deref(),
                    class_column: a.class_column.as_deref(),
                    class1_label: a.class1_label.as_deref(),
                    delimiter: a.delimiter,
                },
                &mut run,
            )?;
            let (s, spec) = do_sweep(&table, &a.classifier, &a.estimator, a.grid.as_deref(), &mut run)?;
            if let Some(path) = &a.table {
                write_sweep_table(&s.points, create(path)?, ',')?;
            }
            if a.anchor_native {
                let native = s
                    .points
                    .iter()
                    .find(|p| (p.f1_target - s.native_f1).abs() < 1e-9)
                    .ok_or_else(|| anyhow!("native fraction missing from the sweep"))?;
                anchors = Some((native.divergence.cdi12, native.divergence.cdi21));
            }
            table_header(&table, &mut text);
            sweep_text(&s, &mut text);
            result["sweep"] = sweep_json(&s);
            result["protocol"] =
                json!({"classifier": spec.kind.name(), "folds": spec.folds, "evaluation": EVALUATION});
            s.points.iter().map(RatePoint::from).collect()
        }
        (None, None) => bail!("give a dataset or --from-sweep"),
    };
    let options = FitOptions {
        window: (a.window[0], a.window[1]),
        anchors,
    };
    let f = fit_rate_points(&points, &options)?;
    let bp = balance_point(&f);
    let grid: Vec<f64> = (0..=100).map(|i| f64::from(i) / 100.0).collect();
    let curve = predict_kappa_curve(&f, &grid);
    if let Some(path) = &a.kappa_table {
        write_kappa_curve(&curve, create(path)?, ',')?;
    }
    result["fit"] = json!({
        "delta1_bits": f.delta1,
        "d21_bits": f.d21_fit,
        "delta2_bits": f.delta2,
        "d12_bits": f.d12_fit,
        "se_delta1_bits": f.se_delta1,
        "se_d21_bits": f.se_d21,
        "se_delta2_bits": f.se_delta2,
        "se_d12_bits": f.se_d12,
        "residual_rms_bits": f.residual_rms,
        "points12": f.points12,
        "points21": f.points21,
        "constrained": f.constrained,
        "window": [options.window.0, options.window.1],
        "anchors_bits": options.anchors.map(|(x, y)| [x, y]),
        "weighting": "ordinary least squares",
    });
    result["balance"] = json!({
        "f_b": bp.f_b,
        "exact_crossing": bp.exact,
        "crossing": bp.crossing,
        "t_r": f.t_r,
    });
    let _ = writeln!(text, "Delta1        {:.4} ± {:.4} bits", f.delta1, f.se_delta1);
    let _ = writeln!(text, "D(2,1)        {:.4} ± {:.4} bits", f.d21_fit, f.se_d21);
    let _ = writeln!(text, "Delta2        {:.4} ± {:.4} bits", f.delta2, f.se_delta2);
    let _ = writeln!(text, "D(1,2)        {:.4} ± {:.4} bits", f.d12_fit, f.se_d12);
    let _ = writeln!(text, "residual rms  {:.4} bits", f.residual_rms);
    let crossing = match bp.exact {
        Some(x) if bp.crossing => format!("{x:.4}"),
        Some(x) => format!("{x:.4}, outside [0, 1]"),
        None => "none, lines parallel".to_string(),
    };
    let _ = writeln!(
        text,
        "balance f_B   {:.4} (exact crossing {crossing}); t_R = {:.4}",
        bp.f_b, f.t_r
    );
    run.emit(result, &text, a.output.out.as_deref(), a.output.json)
}

pub fn select(a: &SelectArgs) -> Result<()> {
    let mut run = Run::new("select", a, a.seed)?;
    let table = load_data(&a.data, &mut run)?;
    let options = GreedyOptions {
        max_vars: a.max_vars.unwrap_or(usize::MAX),
        epsilon: a.epsilon,
    };
    let sel = greedy_select(&table, &estimator_config(&a.estimator, run.seed), &options)?;
    for w in &sel.warnings {
        run.warn(w.clone());
    }
    let result = json!({
        "steps": sel.steps.iter().map(|s| json!({"variable": s.variable, "index": s.index, "cdr_bits": s.cdr})).collect::<Vec<_>>(),
        "invocations": sel.invocations,
        "rejected_cdr_bits": sel.rejected_cdr,
        "epsilon_bits": a.epsilon,
    });
    let mut text = String::new();
    table_header(&table, &mut text);
    for (i, s) in sel.steps.iter().enumerate() {
        let _ = writeln!(text, "{:>3}. {:<30} CDR {:.4} bits", i + 1, s.variable, s.cdr);
    }
    let _ = writeln!(text, "estimator runs {}", sel.invocations);
    run.emit(result, &text, a.output.out.as_deref(), a.output.json)
}

pub fn curve(a: &CurveArgs) -> Result<()> {
    let run = Run::new("curve", a, Some(0))?;
    let model = model_from(&a.model)?;
    let c = divergence_curve(&model, a.points)?;
    if let Some(path) = &a.table {
        c.write_table(create(path)?, ',')?;
    }
    let bracket = half_order_bracket(c.d12, c.d21, c.a_coef, c.b_coef);
    let result = json!({
        "model": model,
        "d12_bits": c.d12,
        "d21_bits": c.d21,
        "resistor_average_bits": c.r,
        "t_r": c.t_r,
        "chernoff_information_bits": c.chernoff_info,
        "t_c": c.t_c,
        "bhattacharyya_bits": c.bhattacharyya,
        "a_bits": c.a_coef,
        "b_bits": c.b_coef,
        "half_order_bracket": bracket,
        "points": a.points,
    });
    let mut text = String::new();
    let _ = writeln!(text, "D(P||Q)       {:.6} bits", c.d12);
    let _ = writeln!(text, "D(Q||P)       {:.6} bits", c.d21);
    let _ = writeln!(text, "R(P,Q)        {:.6} bits (t_R = {:.4})", c.r, c.t_r);
    let _ = writeln!(
        text,
        "C(P,Q)        {:.6} bits (t_C = {:.4})",
        c.chernoff_info, c.t_c
    );
    let _ = writeln!(text, "B(P,Q)        {:.6} bits", c.bhattacharyya);
    let _ = writeln!(text, "A, B          {:.5}, {:.5} bits", c.a_coef, c.b_coef);
    let _ = writeln!(text, "D_1/2 / R     {bracket:.5} (second-order estimate)");
    run.emit(result, &text, a.output.out.as_deref(), a.output.json)
}

pub fn rates(a: &RatesArgs) -> Result<()> {
    let run = Run::new("rates", a, Some(0))?;
    let counts: ConfusionCounts = a.matrix.parse()?;
    let r = rate_summary(&counts)?;
    let mut result = json!({ "rates": rates_json(&counts, &r) });
    let mut text = String::new();
    rates_text(&counts, &r, &mut text);
    if a.cdr.is_some() {
        let v = verdict_for_cdr(r.kappa, a.cdr, a.tolerance);
        let mut vj = verdict_json(&v);
        vj["cdr_bits"] = json!(a.cdr);
        result["verdict"] = vj;
        if let Some(limit) = v.kappa_limit {
            let _ = writeln!(text, "kappa limit   {limit:.4}");
        }
        verdict_text(&v, &mut text);
    }
    run.emit(result, &text, a.output.out.as_deref(), a.output.json)
}
