use hcr::dataset::RawTable;
use hcr::{HcrError, ImputeNote, ImputePolicy, Record};

use crate::error::CliError;
use crate::{io, ImputeArgs, PolicyArg};

pub const WEIGHT_COLUMN: &str = "__hcr_weight";
pub const NOTE_COLUMN: &str = "__hcr_note";
pub const VARIANCE_PREFIX: &str = "__hcr_var_";

struct OutRow {
    cells: Vec<String>,
    weight: f64,
    note: String,
    variances: Vec<Option<f64>>,
}

pub fn run(args: ImputeArgs) -> Result<(), CliError> {
    let options = io::table_options(&args.table)?;
    let raw = RawTable::read_path(&args.table.input, options.delimiter)?;
    let model = io::read_model(&args.model)?;
    let columns = io::column_map(&model, &raw.headers)?;
    let policy = match args.policy {
        PolicyArg::Expected => ImputePolicy::Expected,
        PolicyArg::TopMode => ImputePolicy::TopMode,
        PolicyArg::ClusterSplit => ImputePolicy::ClusterSplit,
    };
    let names = model.names();
    let transforms = model.transforms();

    let mut out = Vec::with_capacity(raw.rows.len());
    for (k, row) in raw.rows.iter().enumerate() {
        let mut unit = Vec::with_capacity(columns.len());
        for (i, &c) in columns.iter().enumerate() {
            let cell = &row[c];
            let bad = |what: String| {
                CliError::Data(format!("row {}, column {:?}: {what}", k + 1, names[i]))
            };
            if options.is_missing(cell) {
                unit.push(None);
                continue;
            }
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| bad(format!("cannot parse {cell:?}")))?;
            if v.is_nan() {
                unit.push(None);
                continue;
            }
            unit.push(Some(
                transforms[i].apply(v).map_err(|e| bad(e.to_string()))?,
            ));
        }
        let record = Record::new(unit);
        if record.is_complete() {
            out.push(OutRow {
                cells: row.clone(),
                weight: 1.0,
                note: String::new(),
                variances: vec![None; columns.len()],
            });
            continue;
        }
        match model.impute(&record, policy) {
            Ok(completions) => {
                for c in completions {
                    let mut cells = row.clone();
                    for i in record.missing() {
                        let value = transforms[i].invert(c.values[i])?;
                        cells[columns[i]] = io::format_cell(value);
                    }
                    let note = c
                        .notes
                        .iter()
                        .map(|n| note_text(n, names))
                        .collect::<Vec<_>>()
                        .join(";");
                    out.push(OutRow {
                        cells,
                        weight: c.weight,
                        note,
                        variances: c.variances,
                    });
                }
            }
            Err(HcrError::NonPositiveMass { .. }) => out.push(OutRow {
                cells: row.clone(),
                weight: 1.0,
                note: "nonpositive-mass".into(),
                variances: vec![None; columns.len()],
            }),
            Err(e) => return Err(CliError::Data(format!("row {}: {e}", k + 1))),
        }
    }

    let with_weight = matches!(policy, ImputePolicy::ClusterSplit);
    let with_note = out.iter().any(|r| !r.note.is_empty());
    let mut headers = raw.headers.clone();
    if with_weight {
        headers.push(WEIGHT_COLUMN.into());
    }
    if with_note {
        headers.push(NOTE_COLUMN.into());
    }
    if args.report {
        headers.extend(names.iter().map(|n| format!("{VARIANCE_PREFIX}{n}")));
    }
    let rows = out
        .into_iter()
        .map(|r| {
            let mut cells = r.cells;
            if with_weight {
                cells.push(io::format_cell(r.weight));
            }
            if with_note {
                cells.push(r.note);
            }
            if args.report {
                cells.extend(
                    r.variances
                        .iter()
                        .map(|v| v.map(io::format_cell).unwrap_or_default()),
                );
            }
            cells
        })
        .collect();
    let table = RawTable { headers, rows };
    table.write(io::output(args.out.as_deref())?, options.delimiter)?;
    Ok(())
}

fn note_text(note: &ImputeNote, names: &[String]) -> String {
    match note {
        ImputeNote::NegativeRegion(i) => format!("negative-region({})", names[*i]),
        ImputeNote::ClippedMean(i) => format!("clipped-mean({})", names[*i]),
        ImputeNote::ModeTie(i) => format!("mode-tie({})", names[*i]),
    }
}
