//! Line-oriented text format for models and transform tables. Fields are
//! separated by tabs, drawn as spaces below.
//!
//! ```text
//! hcr-model
//! format_version  1
//! dimension  2
//! level_orders  0,2,2
//! coordinate  1  x1  legendre  2  identity
//! coordinate  2  x2  legendre  2  rescale:1.0000000000000000e0:5.0000000000000000e0
//! term  0,0  1.0000000000000000e0  6  -  ok
//! term  1,0  ...
//! ```
//!
//! Numbers carry 17 significant digits, so save → load → save is
//! byte-identical. Lines with an unknown leading keyword are skipped.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::basis1d::{Family1D, FamilyKind};
use crate::dataset::{format_value, EmpiricalCdf, Transform};
use crate::error::{HcrError, Result};
use crate::model::{EvidenceFlag, Model, Term};
use crate::tensor_basis::{BasisSpec, MultiIndex};
use crate::Scalar;

pub const MODEL_MAGIC: &str = "hcr-model";
pub const TRANSFORMS_MAGIC: &str = "hcr-transforms";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_model<T: Scalar, W: Write>(model: &Model<T>, mut out: W) -> Result<()> {
    out.write_all(model_to_string(model)?.as_bytes())?;
    Ok(())
}

pub fn model_to_string<T: Scalar>(model: &Model<T>) -> Result<String> {
    let spec = model.spec();
    let mut s = String::new();
    s.push_str(MODEL_MAGIC);
    s.push('\n');
    s.push_str(&format!("format_version\t{FORMAT_VERSION}\n"));
    s.push_str(&format!("dimension\t{}\n", model.dim()));
    let levels = match spec.level_orders() {
        Some(l) => join(l.iter()),
        None => "-".to_string(),
    };
    s.push_str(&format!("level_orders\t{levels}\n"));
    for (i, (name, family)) in model.names().iter().zip(spec.families()).enumerate() {
        check_name(name)?;
        s.push_str(&format!(
            "coordinate\t{}\t{}\t{}\t{}\t{}\n",
            i + 1,
            name,
            family_code(family.kind()),
            family.max_order(),
            transform_code(&model.transforms()[i])
        ));
    }
    for t in model.terms() {
        let uncertainty = t.uncertainty.map_or_else(|| "-".to_string(), format_value);
        s.push_str(&format!(
            "term\t{}\t{}\t{}\t{}\t{}\n",
            join(t.index.orders().iter()),
            format_value(t.coefficient),
            model.evidence_for(&t.index.support()),
            uncertainty,
            flag_code(model.flag(t))
        ));
    }
    Ok(s)
}

pub fn save_model<T: Scalar>(model: &Model<T>, path: &Path) -> Result<()> {
    fs::write(path, model_to_string(model)?)?;
    Ok(())
}

pub fn load_model<T: Scalar>(path: &Path) -> Result<Model<T>> {
    read_model(fs::File::open(path)?)
}

type CoordinateLine<T> = (String, Family1D<T>, Transform<T>);

pub fn read_model<T: Scalar, R: Read>(input: R) -> Result<Model<T>> {
    let mut lines = Lines::new(input, MODEL_MAGIC)?;
    let mut dim: Option<usize> = None;
    let mut level_orders: Option<Option<Vec<usize>>> = None;
    let mut coords: Vec<Option<CoordinateLine<T>>> = Vec::new();
    let mut terms: Vec<(MultiIndex, T, usize, Option<T>)> = Vec::new();

    while let Some((no, fields)) = lines.next_record()? {
        let err = |message: String| HcrError::ModelFormat { line: no, message };
        match fields[0].as_str() {
            "dimension" => {
                let d: usize = field(&fields, 1, no)?;
                if d == 0 {
                    return Err(err("dimension must be positive".into()));
                }
                dim = Some(d);
                coords = vec![None; d];
            }
            "level_orders" => {
                let raw = text(&fields, 1, no)?;
                level_orders = Some(if raw == "-" {
                    None
                } else {
                    Some(parse_list(raw, no)?)
                });
            }
            "coordinate" => {
                let d = dim.ok_or_else(|| err("coordinate before dimension".into()))?;
                let i: usize = field(&fields, 1, no)?;
                if i == 0 || i > d {
                    return Err(err(format!("coordinate {i} outside 1..={d}")));
                }
                let name = text(&fields, 2, no)?.to_string();
                let kind = parse_family(text(&fields, 3, no)?).map_err(&err)?;
                let max: usize = field(&fields, 4, no)?;
                let family = Family1D::new(kind, max).map_err(|e| err(e.to_string()))?;
                let transform = parse_transform(text(&fields, 5, no)?).map_err(&err)?;
                if coords[i - 1].replace((name, family, transform)).is_some() {
                    return Err(err(format!("coordinate {i} listed twice")));
                }
            }
            "term" => {
                let orders = parse_list(text(&fields, 1, no)?, no)?;
                let coefficient: T = field(&fields, 2, no)?;
                let evidence: usize = field(&fields, 3, no)?;
                let uncertainty = match text(&fields, 4, no)? {
                    "-" => None,
                    _ => Some(field(&fields, 4, no)?),
                };
                text(&fields, 5, no)?;
                terms.push((MultiIndex::new(orders), coefficient, evidence, uncertainty));
            }
            _ => {}
        }
    }

    let at_end = |message: &str| HcrError::ModelFormat {
        line: lines.line,
        message: message.into(),
    };
    let d = dim.ok_or_else(|| at_end("missing dimension"))?;
    let level_orders = level_orders.ok_or_else(|| at_end("missing level_orders"))?;
    let mut names = Vec::with_capacity(d);
    let mut families = Vec::with_capacity(d);
    let mut transforms = Vec::with_capacity(d);
    for (i, c) in coords.into_iter().enumerate() {
        let (n, f, t) = c.ok_or_else(|| at_end(&format!("coordinate {} missing", i + 1)))?;
        names.push(n);
        families.push(f);
        transforms.push(t);
    }
    if !terms.windows(2).all(|w| w[0].0 < w[1].0) {
        return Err(at_end("terms are not in canonical order"));
    }
    let spec = BasisSpec::from_indices(families, terms.iter().map(|t| t.0.clone()), level_orders)
        .map_err(|e| at_end(&e.to_string()))?;
    if spec.len() != terms.len() {
        return Err(at_end("the constant term is missing"));
    }
    let mut evidence = BTreeMap::new();
    let mut model_terms = Vec::with_capacity(terms.len());
    for (index, coefficient, count, uncertainty) in terms {
        if let Some(prev) = evidence.insert(index.support(), count) {
            if prev != count {
                return Err(at_end(&format!(
                    "conflicting evidence counts for the support of {index}"
                )));
            }
        }
        if index.is_constant() && coefficient != T::one() {
            return Err(at_end("the constant coefficient must be 1"));
        }
        model_terms.push(Term {
            index,
            coefficient,
            uncertainty,
        });
    }
    Model::from_parts(spec, model_terms, evidence)
        .with_coordinates(names, transforms)
        .map_err(|e| at_end(&e.to_string()))
}

/// Writes a per-column transform table.
pub fn write_transforms<T: Scalar, W: Write>(
    names: &[String],
    transforms: &[Transform<T>],
    mut out: W,
) -> Result<()> {
    if names.len() != transforms.len() {
        return Err(HcrError::DimensionMismatch {
            expected: names.len(),
            found: transforms.len(),
        });
    }
    let mut s = format!("{TRANSFORMS_MAGIC}\nformat_version\t{FORMAT_VERSION}\n");
    for (name, t) in names.iter().zip(transforms) {
        check_name(name)?;
        s.push_str(&format!("column\t{name}\t{}\n", transform_code(t)));
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn read_transforms<T: Scalar, R: Read>(input: R) -> Result<(Vec<String>, Vec<Transform<T>>)> {
    let mut lines = Lines::new(input, TRANSFORMS_MAGIC)?;
    let mut names = Vec::new();
    let mut transforms = Vec::new();
    while let Some((no, fields)) = lines.next_record()? {
        if fields[0] == "column" {
            names.push(text(&fields, 1, no)?.to_string());
            let t = parse_transform(text(&fields, 2, no)?)
                .map_err(|message| HcrError::ModelFormat { line: no, message })?;
            transforms.push(t);
        }
    }
    Ok((names, transforms))
}

struct Lines<R> {
    reader: BufReader<R>,
    line: usize,
}

impl<R: Read> Lines<R> {
    fn new(input: R, magic: &str) -> Result<Self> {
        let mut me = Self {
            reader: BufReader::new(input),
            line: 0,
        };
        let first = me.raw()?.unwrap_or_default();
        if first != magic {
            return Err(HcrError::ModelFormat {
                line: 1,
                message: format!("expected header {magic:?}"),
            });
        }
        let (no, fields) = me.next_record()?.ok_or(HcrError::ModelFormat {
            line: 2,
            message: "missing format_version".into(),
        })?;
        let version: u32 = if fields[0] == "format_version" {
            field(&fields, 1, no)?
        } else {
            0
        };
        if version == 0 {
            return Err(HcrError::ModelFormat {
                line: no,
                message: "missing format_version".into(),
            });
        }
        if version > FORMAT_VERSION {
            return Err(HcrError::ModelFormat {
                line: no,
                message: format!("format_version {version} is newer than {FORMAT_VERSION}"),
            });
        }
        Ok(me)
    }

    fn raw(&mut self) -> Result<Option<String>> {
        let mut buf = String::new();
        if self.reader.read_line(&mut buf)? == 0 {
            return Ok(None);
        }
        self.line += 1;
        Ok(Some(buf.trim_end_matches(['\n', '\r']).to_string()))
    }

    fn next_record(&mut self) -> Result<Option<(usize, Vec<String>)>> {
        while let Some(l) = self.raw()? {
            if l.trim().is_empty() || l.starts_with('#') {
                continue;
            }
            return Ok(Some((
                self.line,
                l.split('\t').map(str::to_string).collect(),
            )));
        }
        Ok(None)
    }
}

fn text(fields: &[String], i: usize, line: usize) -> Result<&str> {
    fields
        .get(i)
        .map(String::as_str)
        .ok_or_else(|| HcrError::ModelFormat {
            line,
            message: format!("expected at least {} fields", i + 1),
        })
}

fn field<V: FromStr>(fields: &[String], i: usize, line: usize) -> Result<V> {
    let raw = text(fields, i, line)?;
    raw.parse().map_err(|_| HcrError::ModelFormat {
        line,
        message: format!("cannot parse {raw:?}"),
    })
}

fn parse_list(raw: &str, line: usize) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|p| {
            p.parse().map_err(|_| HcrError::ModelFormat {
                line,
                message: format!("bad list {raw:?}"),
            })
        })
        .collect()
}

fn join<V: ToString>(items: impl Iterator<Item = V>) -> String {
    items.map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name.contains(['\t', '\n', '\r']) {
        return Err(HcrError::InvalidConfig(format!(
            "column name {name:?} cannot be stored"
        )));
    }
    Ok(())
}

fn family_code(kind: FamilyKind) -> String {
    match kind {
        FamilyKind::LegendreRescaled => "legendre".into(),
        FamilyKind::Trig => "trig".into(),
        FamilyKind::DiscreteOrthonormal { levels } => format!("discrete:{levels}"),
    }
}

fn parse_family(raw: &str) -> std::result::Result<FamilyKind, String> {
    match raw.split_once(':') {
        None if raw == "legendre" => Ok(FamilyKind::LegendreRescaled),
        None if raw == "trig" => Ok(FamilyKind::Trig),
        Some(("discrete", v)) => v
            .parse()
            .map(|levels| FamilyKind::DiscreteOrthonormal { levels })
            .map_err(|_| format!("bad level count {v:?}")),
        _ => Err(format!("unknown family {raw:?}")),
    }
}

fn flag_code(flag: EvidenceFlag) -> &'static str {
    match flag {
        EvidenceFlag::Ok => "ok",
        EvidenceFlag::NoEvidence => "no-evidence",
        EvidenceFlag::SingleRecord => "single-record",
    }
}

fn values<T: Scalar>(v: &[T]) -> String {
    v.iter()
        .map(|&x| format_value(x))
        .collect::<Vec<_>>()
        .join(",")
}

pub(crate) fn transform_code<T: Scalar>(t: &Transform<T>) -> String {
    match t {
        Transform::Identity => "identity".into(),
        Transform::Rescale { min, max, strict } => {
            let kind = if *strict { "rescale-strict" } else { "rescale" };
            format!("{kind}:{}:{}", format_value(*min), format_value(*max))
        }
        Transform::Logistic => "logistic".into(),
        Transform::EmpiricalCdf(c) => {
            format!(
                "cdf:{}:{}:{}",
                c.sample_size(),
                values(c.support()),
                values(c.positions())
            )
        }
        Transform::Categorical { levels } => format!("categorical:{}", values(levels)),
    }
}

pub(crate) fn parse_transform<T: Scalar>(raw: &str) -> std::result::Result<Transform<T>, String> {
    let parts: Vec<&str> = raw.split(':').collect();
    let num = |s: &str| s.parse::<T>().map_err(|_| format!("bad number {s:?}"));
    let nums = |s: &str| {
        s.split(',')
            .map(num)
            .collect::<std::result::Result<Vec<T>, String>>()
    };
    match parts.as_slice() {
        ["identity"] => Ok(Transform::Identity),
        ["logistic"] => Ok(Transform::Logistic),
        [kind @ ("rescale" | "rescale-strict"), min, max] => {
            let (min, max) = (num(min)?, num(max)?);
            if !(max > min) {
                return Err("rescale needs min < max".into());
            }
            Ok(Transform::Rescale {
                min,
                max,
                strict: *kind == "rescale-strict",
            })
        }
        ["cdf", n, support, positions] => {
            let n = n.parse().map_err(|_| format!("bad sample size {n:?}"))?;
            EmpiricalCdf::from_parts(nums(support)?, nums(positions)?, n)
                .map(Transform::EmpiricalCdf)
                .map_err(|e| e.to_string())
        }
        ["categorical", levels] => {
            let levels = nums(levels)?;
            if levels.len() < 2 || !levels.windows(2).all(|w| w[0] < w[1]) {
                return Err("categorical levels must increase strictly".into());
            }
            Ok(Transform::Categorical { levels })
        }
        _ => Err(format!("unknown transform {raw:?}")),
    }
}
