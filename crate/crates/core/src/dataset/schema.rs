//! Column schema: one `name: key=value, ...` line per coordinate.
//!
//! ```text
//! # income is heavy-tailed, smoker is yes/no
//! income: continuous, transform=cdf
//! age: transform=rescale, min=0, max=120
//! smoker: discrete, levels=0|1
//! angle: family=trig
//! ```
//!
//! Bare words are shorthands: `continuous`, `discrete`, a transform name
//! (`none`, `rescale`, `rescale-strict`, `logistic`, `cdf`) or a family name
//! (`legendre`, `trig`). Columns not listed are continuous, untransformed and
//! Legendre.

use super::{default_family, Dataset, EmpiricalCdf, Transform};
use crate::basis1d::FamilyKind;
use crate::error::{HcrError, Result};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnKind<T> {
    Continuous,
    /// Category values; inferred from the data when `None`.
    Discrete {
        levels: Option<Vec<T>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransformChoice<T> {
    None,
    Rescale {
        min: Option<T>,
        max: Option<T>,
        strict: bool,
    },
    Logistic,
    Cdf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSpec<T> {
    pub name: String,
    pub kind: ColumnKind<T>,
    pub transform: TransformChoice<T>,
    pub trig: bool,
}

impl<T> ColumnSpec<T> {
    pub fn default_for(name: &str) -> Self {
        Self {
            name: name.to_string(),
            kind: ColumnKind::Continuous,
            transform: TransformChoice::None,
            trig: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schema<T> {
    columns: Vec<ColumnSpec<T>>,
}

impl<T: Scalar> Schema<T> {
    pub fn parse(text: &str) -> Result<Self> {
        let mut columns: Vec<ColumnSpec<T>> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| HcrError::Schema {
                line: n + 1,
                message,
            };
            let (name, rest) = line
                .split_once(':')
                .ok_or_else(|| err("expected `name: key=value, ...`".into()))?;
            let name = name.trim();
            if name.is_empty() {
                return Err(err("empty column name".into()));
            }
            if columns.iter().any(|c| c.name == name) {
                return Err(err(format!("column {name:?} declared twice")));
            }
            let mut spec = ColumnSpec::default_for(name);
            let (mut min, mut max) = (None, None);
            let mut rescale = None;
            for token in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let (key, value) = match token.split_once('=') {
                    Some((k, v)) => (k.trim(), v.trim()),
                    None => match token {
                        "continuous" | "discrete" => ("kind", token),
                        "legendre" | "trig" => ("family", token),
                        _ => ("transform", token),
                    },
                };
                let number = |v: &str| {
                    v.parse::<T>()
                        .map_err(|_| err(format!("{key}: cannot parse {v:?}")))
                };
                match key {
                    "kind" => {
                        spec.kind = match value {
                            "continuous" => ColumnKind::Continuous,
                            "discrete" => match spec.kind {
                                ColumnKind::Discrete { .. } => spec.kind.clone(),
                                ColumnKind::Continuous => ColumnKind::Discrete { levels: None },
                            },
                            _ => return Err(err(format!("unknown kind {value:?}"))),
                        }
                    }
                    "levels" => {
                        let levels = value
                            .split('|')
                            .map(|v| number(v.trim()))
                            .collect::<Result<Vec<T>>>()?;
                        spec.kind = ColumnKind::Discrete {
                            levels: Some(levels),
                        };
                    }
                    "transform" => {
                        spec.transform = match value {
                            "none" | "identity" => TransformChoice::None,
                            "rescale" => {
                                rescale = Some(false);
                                TransformChoice::None
                            }
                            "rescale-strict" => {
                                rescale = Some(true);
                                TransformChoice::None
                            }
                            "logistic" => TransformChoice::Logistic,
                            "cdf" => TransformChoice::Cdf,
                            _ => return Err(err(format!("unknown transform {value:?}"))),
                        }
                    }
                    "family" => {
                        spec.trig = match value {
                            "legendre" => false,
                            "trig" => true,
                            _ => return Err(err(format!("unknown family {value:?}"))),
                        }
                    }
                    "min" => min = Some(number(value)?),
                    "max" => max = Some(number(value)?),
                    _ => return Err(err(format!("unknown key {key:?}"))),
                }
            }
            if let Some(strict) = rescale {
                spec.transform = TransformChoice::Rescale { min, max, strict };
            } else if min.is_some() || max.is_some() {
                return Err(err("min/max only apply to transform=rescale".into()));
            }
            if let ColumnKind::Discrete {
                levels: Some(levels),
            } = &spec.kind
            {
                if levels.len() < 2 {
                    return Err(err("a discrete column needs at least 2 levels".into()));
                }
            }
            columns.push(spec);
        }
        Ok(Self { columns })
    }

    pub fn columns(&self) -> &[ColumnSpec<T>] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> ColumnSpec<T> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .cloned()
            .unwrap_or_else(|| ColumnSpec::default_for(name))
    }

    /// Every schema column must name a table column.
    pub fn check_columns(&self, names: &[String]) -> Result<()> {
        for c in &self.columns {
            if !names.iter().any(|n| n == &c.name) {
                return Err(HcrError::Schema {
                    line: 0,
                    message: format!("column {:?} is not in the table", c.name),
                });
            }
        }
        Ok(())
    }

    /// Fits one transform per table column. A column with no present values
    /// gets `Identity` (there is nothing to fit).
    pub fn fit_transforms(&self, data: &Dataset<T>) -> Result<Vec<Transform<T>>> {
        self.check_columns(data.names())?;
        data.names()
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let spec = self.column(name);
                let values = data.column(i);
                if values.is_empty() {
                    return Ok(Transform::Identity);
                }
                match (&spec.kind, &spec.transform) {
                    (
                        ColumnKind::Discrete {
                            levels: Some(levels),
                        },
                        _,
                    ) => Transform::categorical_from(levels),
                    (ColumnKind::Discrete { levels: None }, _) => {
                        Transform::categorical_from(&values)
                    }
                    (_, TransformChoice::None) => Ok(Transform::Identity),
                    (_, TransformChoice::Logistic) => Ok(Transform::Logistic),
                    (_, TransformChoice::Cdf) => {
                        Ok(Transform::EmpiricalCdf(EmpiricalCdf::fit(&values)?))
                    }
                    (_, TransformChoice::Rescale { min, max, strict }) => {
                        let fitted = Transform::rescale_from(&values, *strict);
                        match (min, max, fitted) {
                            (Some(lo), Some(hi), _) => {
                                if !(hi > lo) {
                                    return Err(HcrError::InvalidConfig(format!(
                                        "column {name:?}: rescale max must exceed min"
                                    )));
                                }
                                Ok(Transform::Rescale {
                                    min: *lo,
                                    max: *hi,
                                    strict: *strict,
                                })
                            }
                            (
                                lo,
                                hi,
                                Ok(Transform::Rescale {
                                    min: dmin,
                                    max: dmax,
                                    ..
                                }),
                            ) => Ok(Transform::Rescale {
                                min: lo.unwrap_or(dmin),
                                max: hi.unwrap_or(dmax),
                                strict: *strict,
                            }),
                            (_, _, other) => other,
                        }
                    }
                }
                .map_err(|e| match e {
                    HcrError::ConstantCoordinate => HcrError::InvalidConfig(format!(
                        "column {name:?} has fewer than 2 distinct values"
                    )),
                    e => e,
                })
            })
            .collect()
    }

    /// 1-D family kind for a column, given its fitted transform.
    pub fn family_kind(&self, name: &str, transform: &Transform<T>) -> FamilyKind {
        let spec = self.column(name);
        match transform {
            Transform::Categorical { levels } => default_family(&spec.kind, levels.len()),
            _ if spec.trig => FamilyKind::Trig,
            _ => FamilyKind::LegendreRescaled,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_shorthand_and_keys() {
        let s = Schema::<f64>::parse(
            "# header\nincome: continuous, transform=cdf\nage: rescale, min=0, max=120\n\
             smoker: discrete, levels=0|1\nangle: trig\nz: logistic  # trailing\n",
        )
        .unwrap();
        assert_eq!(s.columns().len(), 5);
        assert_eq!(s.column("income").transform, TransformChoice::Cdf);
        assert_eq!(
            s.column("age").transform,
            TransformChoice::Rescale {
                min: Some(0.0),
                max: Some(120.0),
                strict: false
            }
        );
        assert_eq!(
            s.column("smoker").kind,
            ColumnKind::Discrete {
                levels: Some(vec![0.0, 1.0])
            }
        );
        assert!(s.column("angle").trig);
        assert_eq!(s.column("z").transform, TransformChoice::Logistic);
        assert_eq!(s.column("unlisted"), ColumnSpec::default_for("unlisted"));
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(
            Schema::<f64>::parse("a continuous"),
            Err(HcrError::Schema { line: 1, .. })
        ));
        assert!(Schema::<f64>::parse("a: wobbly").is_err());
        assert!(Schema::<f64>::parse("a: min=3").is_err());
        assert!(Schema::<f64>::parse("a: cdf\na: cdf").is_err());
        assert!(Schema::<f64>::parse("a: levels=1").is_err());
    }

    #[test]
    fn fits_per_column() {
        let data = Dataset::from_rows(vec![
            vec![Some(1.0), Some(0.0), Some(0.2), None],
            vec![Some(3.0), Some(1.0), Some(0.4), None],
            vec![Some(2.0), None, Some(0.9), None],
        ])
        .unwrap();
        let s = Schema::<f64>::parse("x1: cdf\nx2: discrete").unwrap();
        let t = s.fit_transforms(&data).unwrap();
        assert!(matches!(t[0], Transform::EmpiricalCdf(_)));
        assert_eq!(
            t[1],
            Transform::Categorical {
                levels: vec![0.0, 1.0]
            }
        );
        assert_eq!(t[2], Transform::Identity);
        assert_eq!(t[3], Transform::Identity);
        assert_eq!(
            s.family_kind("x2", &t[1]),
            FamilyKind::DiscreteOrthonormal { levels: 2 }
        );
        let bad = Schema::<f64>::parse("nope: cdf").unwrap();
        assert!(bad.fit_transforms(&data).is_err());
        let constant = Dataset::from_rows(vec![vec![Some(5.0)], vec![Some(5.0)]]).unwrap();
        assert!(Schema::<f64>::parse("x1: cdf")
            .unwrap()
            .fit_transforms(&constant)
            .is_err());
    }
}
