use std::fs;

use hcr::model_file::save_model;
use hcr::{fit, BasisSpec, Family1D, FamilyKind, Schema};

use crate::error::CliError;
use crate::{io, report, FamilyArg, FitArgs};

pub fn run(args: FitArgs) -> Result<(), CliError> {
    let (_, data, _) = io::read_table(&args.table)?;
    let schema = match &args.schema {
        Some(p) => Schema::parse(
            &fs::read_to_string(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        )?,
        None => Schema::default(),
    };
    schema.check_columns(data.names())?;
    let transforms = io::fit_transforms(&schema, &data)?;
    let d = data.dim();

    let orders = match &args.orders {
        Some(raw) => parse_orders(raw)?,
        None => vec![2; d.min(2)],
    };
    if orders.len() > d {
        return Err(CliError::Usage(format!(
            "--orders lists {} levels but the table has {d} columns",
            orders.len()
        )));
    }
    let top = orders.iter().copied().max().unwrap_or(0).max(1);
    let families = data
        .names()
        .iter()
        .zip(&transforms)
        .map(|(name, t)| {
            let kind = match (schema.family_kind(name, t), args.family) {
                (FamilyKind::LegendreRescaled, FamilyArg::Trig) => FamilyKind::Trig,
                (k, _) => k,
            };
            let max = match kind {
                FamilyKind::DiscreteOrthonormal { levels } => levels - 1,
                _ => top,
            };
            Family1D::new(kind, max)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let unit = data.transformed(&transforms).map_err(|e| {
        CliError::Data(format!(
            "{e} (columns without a schema transform must already lie in [0, 1])"
        ))
    })?;
    let spec = match &args.subsets {
        Some(raw) => BasisSpec::build_sparse(
            families,
            &parse_subsets(raw, d)?,
            orders.first().copied().unwrap_or(0),
        )?,
        None => {
            let mut levels = vec![0; d + 1];
            levels[1..=orders.len()].copy_from_slice(&orders);
            BasisSpec::build_full(families, &levels)?
        }
    };

    let mut model = fit(&spec, &unit)?.with_coordinates(data.names().to_vec(), transforms)?;
    if let Some(threshold) = args.prune {
        let (pruned, removed) = model.prune(threshold);
        eprintln!(
            "pruned {} coefficients below {threshold} standard errors",
            removed.removed.len()
        );
        model = pruned;
    }
    for (name, &present) in data.names().iter().zip(&data.presence_counts()) {
        if present == 0 {
            eprintln!(
                "warning: column {name:?} has no observed values; its terms carry no evidence"
            );
        }
    }
    if model.is_uniform() {
        eprintln!("warning: uniform model (no basis functions beyond the constant)");
    }
    save_model(&model, &args.out)?;
    print!("{}", report::summary(&model, data.len()));
    Ok(())
}

pub fn parse_orders(raw: &str) -> Result<Vec<usize>, CliError> {
    raw.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("--orders: cannot parse {p:?}")))
        })
        .collect()
}

/// `1;2;1,2` into 0-based subsets.
fn parse_subsets(raw: &str, d: usize) -> Result<Vec<Vec<usize>>, CliError> {
    raw.split(';')
        .map(|group| {
            group
                .split(',')
                .map(|c| match c.trim().parse::<usize>() {
                    Ok(i) if (1..=d).contains(&i) => Ok(i - 1),
                    _ => Err(CliError::Usage(format!(
                        "--subsets: {c:?} is not a coordinate in 1..={d}"
                    ))),
                })
                .collect()
        })
        .collect()
}
