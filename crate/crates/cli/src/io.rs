use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use hcr::dataset::RawTable;
use hcr::model_file::load_model;
use hcr::{Dataset64, HcrError, Model64, Record, Schema, TableOptions, Transform};

use crate::error::CliError;
use crate::TableFlags;

pub fn table_options(flags: &TableFlags) -> Result<TableOptions, CliError> {
    let delimiter = match flags.delimiter.as_str() {
        "tab" | "\\t" | "\t" => b'\t',
        d if d.len() == 1 => d.as_bytes()[0],
        d => {
            return Err(CliError::Usage(format!(
                "--delimiter must be one character, got {d:?}"
            )))
        }
    };
    let missing_tokens = flags
        .missing_tokens
        .split(',')
        .map(|t| t.trim().to_string())
        .collect();
    Ok(TableOptions {
        delimiter,
        missing_tokens,
    })
}

pub fn read_table(flags: &TableFlags) -> Result<(RawTable, Dataset64, TableOptions), CliError> {
    let options = table_options(flags)?;
    let raw = RawTable::read_path(&flags.input, options.delimiter)?;
    let data = raw.to_dataset(&options)?;
    Ok((raw, data, options))
}

pub fn read_model(path: &Path) -> Result<Model64, CliError> {
    load_model(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Buffered writer on the file, or on standard output when `path` is `None`.
pub fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Column of `table` holding each model coordinate, matched by name.
pub fn column_map(model: &Model64, headers: &[String]) -> Result<Vec<usize>, CliError> {
    model
        .names()
        .iter()
        .map(|name| {
            headers.iter().position(|h| h == name).ok_or_else(|| {
                CliError::Data(format!(
                    "the table has no column {name:?} required by the model"
                ))
            })
        })
        .collect()
}

/// Reorders `data` into the model's coordinates and maps them to `[0, 1]`.
pub fn model_dataset(model: &Model64, data: &Dataset64) -> Result<Dataset64, CliError> {
    let columns = column_map(model, data.names())?;
    let records = data
        .records()
        .iter()
        .map(|r| Record::new(columns.iter().map(|&c| r.get(c)).collect()))
        .collect();
    let ordered = Dataset64::new(model.names().to_vec(), records)?;
    ordered
        .transformed(model.transforms())
        .map_err(CliError::from)
}

/// Shortest decimal that reads back as the same `f64`.
pub fn format_cell(v: f64) -> String {
    format!("{v}")
}

/// Per-column transforms; a column that cannot be fitted is a data error.
pub fn fit_transforms(
    schema: &Schema<f64>,
    data: &Dataset64,
) -> Result<Vec<Transform<f64>>, CliError> {
    schema.fit_transforms(data).map_err(|e| match e {
        HcrError::InvalidConfig(m) => CliError::Data(m),
        e => e.into(),
    })
}
