use std::fs::{self, File};

use hcr::dataset::{format_value, RawTable};
use hcr::model_file::{read_transforms, write_transforms};
use hcr::{Schema, Transform};

use crate::error::CliError;
use crate::{io, Direction, TransformArgs};

pub fn run(args: TransformArgs) -> Result<(), CliError> {
    let (raw, data, options) = io::read_table(&args.table)?;
    let out_rows: Vec<Vec<String>> = match args.direction {
        Direction::Forward => {
            let schema = match &args.schema {
                Some(p) => Schema::parse(&fs::read_to_string(p)?)?,
                None => Schema::default(),
            };
            schema.check_columns(data.names())?;
            let transforms = io::fit_transforms(&schema, &data)?;
            let file = File::create(&args.transforms)
                .map_err(|e| CliError::Data(format!("{}: {e}", args.transforms.display())))?;
            write_transforms(data.names(), &transforms, file)?;
            map_cells(&raw, &data, &transforms, |t, v| {
                t.apply(v).map(format_value)
            })?
        }
        Direction::Backward => {
            let file = File::open(&args.transforms)
                .map_err(|e| CliError::Data(format!("{}: {e}", args.transforms.display())))?;
            let (names, transforms) = read_transforms::<f64, _>(file)?;
            if names != data.names() {
                return Err(CliError::Data(format!(
                    "transform columns {names:?} do not match the table header {:?}",
                    data.names()
                )));
            }
            map_cells(&raw, &data, &transforms, |t, v| {
                t.invert(v).map(io::format_cell)
            })?
        }
    };
    let table = RawTable {
        headers: raw.headers.clone(),
        rows: out_rows,
    };
    table.write(io::output(args.out.as_deref())?, options.delimiter)?;
    Ok(())
}

/// Rewrites present cells; missing cells keep their original token.
fn map_cells(
    raw: &RawTable,
    data: &hcr::Dataset64,
    transforms: &[Transform<f64>],
    f: impl Fn(&Transform<f64>, f64) -> hcr::Result<String>,
) -> Result<Vec<Vec<String>>, CliError> {
    raw.rows
        .iter()
        .zip(data.records())
        .enumerate()
        .map(|(k, (row, record))| {
            row.iter()
                .zip(record.values())
                .zip(transforms)
                .enumerate()
                .map(|(i, ((cell, v), t))| match v {
                    None => Ok(cell.clone()),
                    Some(v) => f(t, *v).map_err(|e| {
                        CliError::Data(format!("row {}, column {:?}: {e}", k + 1, data.names()[i]))
                    }),
                })
                .collect()
        })
        .collect()
}
