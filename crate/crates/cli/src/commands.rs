use std::io::{self, Read, Write};
use std::path::Path;

use serde_json::{json, Value};

use exchange_lab::dynamics::run_pulse_interference;
use exchange_lab::protocols::{
    experiment_full_controlled_swap, experiment_half_swap_interference, experiment_ring_rotation,
    EvaluationMode, ExperimentResult, RingConfig,
};
use exchange_lab::reference::ReferenceRequest;
use exchange_lab::verify::{run_verify, VerifyConfig};

use crate::config::{Experiment, Format, RunConfig};
use crate::CliError;

fn execute(cfg: &RunConfig) -> Result<ExperimentResult, CliError> {
    let result = match cfg.experiment {
        Experiment::FullSwap => experiment_full_controlled_swap(cfg.layout.clone(), cfg.mode)?,
        Experiment::HalfSwap => experiment_half_swap_interference(cfg.layout.clone(), cfg.mode)?,
        Experiment::Ring => {
            let ring = RingConfig::new(cfg.n, cfg.turn, cfg.layout.clone())?;
            experiment_ring_rotation(&ring, cfg.mode)?
        }
        Experiment::Pulse => {
            let (s0, s1, initial) = cfg.pulses.as_ref().expect("validated pulse config");
            run_pulse_interference(cfg.layout.clone(), s0, s1, *initial)?
        }
    };
    match (cfg.shots, cfg.seed) {
        (Some(shots), Some(seed)) => Ok(result.with_shots(shots, seed)?),
        (_, Some(seed)) => Ok(ExperimentResult { seed: Some(seed), ..result }),
        _ => Ok(result),
    }
}

fn write_out(text: &str) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::BadInput(format!("cannot write output: {e}")))
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| CliError::BadInput(format!("csv: {e}"));
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.write_record(r).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::BadInput(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn opt(v: Option<impl ToString>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let r = execute(cfg)?;
    let text = match cfg.format {
        Format::Json => r.to_json_string() + "\n",
        Format::Csv => {
            let doc = r.to_json();
            let counts = r.counts;
            csv_text(
                &[
                    "experiment", "phase_rad", "visibility", "x_plus", "y_plus", "branch0_final",
                    "branch1_final", "shots", "x_plus_count", "y_plus_count", "seed", "version",
                ],
                &[vec![
                    r.experiment.clone(),
                    opt(r.phase),
                    r.visibility.to_string(),
                    r.x_plus_probability().to_string(),
                    r.y_plus_probability().to_string(),
                    doc["branch_final"][0].as_str().unwrap_or_default().to_string(),
                    doc["branch_final"][1].as_str().unwrap_or_default().to_string(),
                    opt(counts.map(|c| c.shots)),
                    opt(counts.map(|c| c.x_plus)),
                    opt(counts.map(|c| c.y_plus)),
                    opt(r.seed),
                    r.version.to_string(),
                ]],
            )?
        }
    };
    write_out(&text)?;
    if r.valid {
        Ok(())
    } else {
        Err(CliError::InvalidResult)
    }
}

pub fn verify(modes: usize, trials: usize, seed: u64, format: Option<Format>) -> Result<(), CliError> {
    let report = run_verify(VerifyConfig { modes, trials, seed })?;
    let text = match format {
        None => report.summary(),
        Some(Format::Json) => {
            serde_json::to_string_pretty(&serde_json::to_value(&report).expect("plain data")).expect("JSON")
                + "\n"
        }
        Some(Format::Csv) => {
            let c = &report.cross_check;
            let mut rows = vec![vec![
                "cross-check".to_string(),
                c.passed.to_string(),
                format!("M={} trials={} seed={} max deviation {:e}", c.modes, c.trials, c.seed, c.max_deviation),
            ]];
            rows.extend(report.checks.iter().map(|k| vec![k.name.clone(), k.passed.to_string(), k.detail.clone()]));
            csv_text(&["check", "passed", "detail"], &rows)?
        }
    };
    write_out(&text)?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}

pub fn attribute(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.mode == EvaluationMode::Literal {
        return Err(CliError::BadInput(
            "attribute needs sequential evaluation; a literal operator product has no per-hop locality".into(),
        ));
    }
    let r = execute(cfg)?;
    let mut rows = Vec::new();
    for (label, ledger) in r.branch_labels.iter().zip(&r.ledgers) {
        for e in ledger.entries() {
            let (from, to) = e.op.endpoints().expect("sequential ledgers hold hops and pulses only");
            rows.push(json!({
                "branch": label,
                "step": e.step,
                "from": from.value(),
                "to": to.value(),
                "interval_parity": e.interval_parity,
                "sign": e.sign.to_i8(),
                "wrap": e.wrap,
            }));
        }
    }
    let products: Vec<Value> = r
        .branch_labels
        .iter()
        .zip(&r.ledgers)
        .map(|(label, l)| json!({ "branch": label, "sign_product": l.product().to_i8() }))
        .collect();
    let text = match cfg.format {
        Format::Json => {
            let doc = json!({
                "experiment": r.experiment,
                "params": r.params,
                "rows": rows,
                "footer": {
                    "products": products,
                    "relative_sign": r.ledger_relative_sign().to_i8(),
                    "phase_rad": r.phase,
                },
                "version": r.version,
            });
            serde_json::to_string_pretty(&doc).expect("JSON") + "\n"
        }
        Format::Csv => {
            let cell = |v: &Value| match v {
                Value::String(s) => s.clone(),
                Value::Null => String::new(),
                other => other.to_string(),
            };
            let cols = ["branch", "step", "from", "to", "interval_parity", "sign", "wrap", "phase_rad"];
            let mut table: Vec<Vec<String>> =
                rows.iter().map(|row| cols.iter().map(|c| cell(&row[*c])).collect()).collect();
            for p in &products {
                table.push(vec![
                    cell(&p["branch"]),
                    "product".into(),
                    String::new(),
                    String::new(),
                    String::new(),
                    cell(&p["sign_product"]),
                    String::new(),
                    String::new(),
                ]);
            }
            table.push(vec![
                "relative".into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                r.ledger_relative_sign().to_i8().to_string(),
                String::new(),
                opt(r.phase),
            ]);
            csv_text(&cols, &table)?
        }
    };
    write_out(&text)?;
    if r.valid {
        Ok(())
    } else {
        Err(CliError::InvalidResult)
    }
}

pub fn reference(input: Option<&Path>, demo: bool) -> Result<(), CliError> {
    let request = if demo {
        ReferenceRequest::demo()
    } else {
        let text = match input {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| CliError::BadInput(format!("cannot read {}: {e}", p.display())))?,
            None => {
                let mut s = String::new();
                io::stdin()
                    .read_to_string(&mut s)
                    .map_err(|e| CliError::BadInput(format!("cannot read stdin: {e}")))?;
                s
            }
        };
        serde_json::from_str(&text).map_err(|e| CliError::BadInput(format!("reference request: {e}")))?
    };
    let response = request.evaluate()?;
    let doc = serde_json::to_value(&response).expect("plain data");
    write_out(&(serde_json::to_string_pretty(&doc).expect("JSON") + "\n"))
}
