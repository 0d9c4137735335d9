use std::io::Write;

use hcr::dataset::format_value;

use crate::error::CliError;
use crate::{io, DensityArgs};

enum Query {
    Point(Vec<f64>),
    Slice {
        known: Vec<Option<f64>>,
        free: usize,
    },
}

fn parse_point(raw: &str, dim: usize) -> Result<Query, CliError> {
    let cells: Vec<&str> = raw.split(',').map(str::trim).collect();
    if cells.len() != dim {
        return Err(CliError::Usage(format!(
            "--point has {} entries, the model has {dim} coordinates",
            cells.len()
        )));
    }
    let mut known = Vec::with_capacity(dim);
    let mut free = None;
    for (i, c) in cells.iter().enumerate() {
        if *c == "?" {
            if free.replace(i).is_some() {
                return Err(CliError::Usage(
                    "--point may contain at most one `?` (use impute for joint queries)".into(),
                ));
            }
            known.push(None);
            continue;
        }
        match c.parse::<f64>() {
            Ok(v) if (0.0..=1.0).contains(&v) => known.push(Some(v)),
            _ => {
                return Err(CliError::Usage(format!(
                    "--point entry {c:?} is not a number in [0, 1] or `?`"
                )))
            }
        }
    }
    Ok(match free {
        Some(free) => Query::Slice { known, free },
        None => Query::Point(known.into_iter().flatten().collect()),
    })
}

pub fn run(args: DensityArgs) -> Result<(), CliError> {
    let model = io::read_model(&args.model)?;
    let query = parse_point(&args.point, model.dim())?;
    let mut out = io::output(args.out.as_deref())?;
    match query {
        Query::Point(x) => {
            let x: Vec<f64> = x
                .iter()
                .zip(model.spec().families())
                .map(|(&v, f)| f.snap(v))
                .collect();
            writeln!(out, "{}", format_value(model.evaluate(&x)?))?;
        }
        Query::Slice { known, free } => {
            if args.grid < 2 {
                return Err(CliError::Usage("--grid needs at least 2 points".into()));
            }
            let known: Vec<Option<f64>> = known
                .iter()
                .zip(model.spec().families())
                .map(|(v, f)| v.map(|v| f.snap(v)))
                .collect();
            let slice = model.conditional_slice(&known, free)?;
            writeln!(out, "{},density", model.names()[free])?;
            for (x, rho) in slice.table(args.grid) {
                writeln!(out, "{},{}", format_value(x), format_value(rho))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
