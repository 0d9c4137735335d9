use std::io::Write;

use hcr::dataset::format_value;
use hcr::likelihood::{find_negative_witness_from, refine};
use hcr::model_file::save_model;
use hcr::{HcrError, Model64, RefineConfig};

use crate::error::CliError;
use crate::{io, RefineArgs};

const WITNESS_BUDGET: usize = 4096;

pub fn run(args: RefineArgs) -> Result<(), CliError> {
    let model = io::read_model(&args.model)?;
    let (_, data, _) = io::read_table(&args.table)?;
    let unit = io::model_dataset(&model, &data)?;
    let config = RefineConfig {
        steps: args.steps,
        step_size: args.rate,
        ridge: args.ridge,
        positivity_margin: args.epsilon,
        ..RefineConfig::default()
    };
    let outcome = match refine(&model, &unit, &config) {
        Ok(o) => o,
        Err(e @ (HcrError::NonPositiveDensity { .. } | HcrError::BacktrackExhausted { .. })) => {
            return Err(positivity_failure(&model, e, args.seed));
        }
        Err(e) => return Err(e.into()),
    };
    if outcome.stalled {
        eprintln!(
            "stopped after {} steps: no admissible step improved the objective",
            outcome.trace.len() - 1
        );
    }
    save_model(&outcome.model, &args.out)?;
    let mut out = io::output(args.trace.as_deref())?;
    writeln!(out, "step,objective,log_likelihood,step_size")?;
    for t in &outcome.trace {
        writeln!(
            out,
            "{},{},{},{}",
            t.step,
            format_value(t.objective),
            format_value(t.log_likelihood),
            format_value(t.step_size)
        )?;
    }
    out.flush()?;
    Ok(())
}

fn positivity_failure(model: &Model64, error: HcrError, seed: u64) -> CliError {
    let mut message = match error {
        HcrError::NonPositiveDensity { records } => {
            let rows: Vec<String> = records
                .iter()
                .take(20)
                .map(|r| (r + 1).to_string())
                .collect();
            format!(
                "the starting model has nonpositive density at rows {}",
                rows.join(",")
            )
        }
        e => e.to_string(),
    };
    match find_negative_witness_from(model, WITNESS_BUDGET, seed) {
        Some(w) => {
            let density = model.evaluate(&w).unwrap_or(f64::NAN);
            let point: Vec<String> = w.iter().map(|&v| format_value(v)).collect();
            message.push_str(&format!(
                "; negative density {} at ({})",
                format_value(density),
                point.join(",")
            ));
        }
        None => message.push_str(&format!(
            "; no negative point among {WITNESS_BUDGET} probes"
        )),
    }
    CliError::Numeric(message)
}
