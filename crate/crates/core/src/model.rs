//! Patients, actions, and the encoded design vector.
//!
//! An encoded instance is laid out as `[bias, patient features, physician
//! indicators, facility indicators]`: the bias is always 1, patient features
//! follow schema order, and each indicator block carries exactly one 1 for
//! the assigned physician (and facility, when facilities are modeled).

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column names with fixed meaning in dataset files; never patient features.
pub const RESERVED_COLUMNS: [&str; 4] = ["patient_id", "action_p", "action_f", "outcome"];

/// Ordered, uniquely named feature columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    columns: Vec<String>,
    index: HashMap<String, usize>,
}

impl Schema {
    pub fn new<S: Into<String>>(columns: Vec<S>) -> Result<Self> {
        let columns: Vec<String> = columns.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(columns.len());
        for (i, name) in columns.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate column name '{name}'")));
            }
        }
        Ok(Self { columns, index })
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

/// One patient: an opaque identifier plus feature values in schema order.
#[derive(Debug, Clone, PartialEq)]
pub struct PatientContext {
    pub id: String,
    pub features: Vec<f64>,
}

impl PatientContext {
    pub fn new(id: impl Into<String>, features: Vec<f64>) -> Self {
        Self { id: id.into(), features }
    }
}

/// Assignment of a physician (1-based) and, when facilities are modeled,
/// a facility (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub physician: usize,
    pub facility: Option<usize>,
}

impl Action {
    pub fn new(physician: usize, facility: Option<usize>) -> Self {
        Self { physician, facility }
    }
}

/// The set of assignable actions: `physicians >= 1`, `facilities >= 0`.
/// With no facilities an action is a bare physician; otherwise every
/// (physician, facility) pair is assignable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSpace {
    physicians: usize,
    facilities: usize,
}

impl ActionSpace {
    pub fn new(physicians: usize, facilities: usize) -> Result<Self> {
        if physicians == 0 {
            return Err(Error::Domain("action space needs at least one physician".into()));
        }
        Ok(Self { physicians, facilities })
    }

    pub fn physicians(&self) -> usize {
        self.physicians
    }

    pub fn facilities(&self) -> usize {
        self.facilities
    }

    /// Width of the indicator section of an encoded instance.
    pub fn indicator_len(&self) -> usize {
        self.physicians + self.facilities
    }

    pub fn num_actions(&self) -> usize {
        self.physicians * self.facilities.max(1)
    }

    /// Full encoded dimension for contexts with `num_features` columns.
    pub fn dimension(&self, num_features: usize) -> usize {
        1 + num_features + self.indicator_len()
    }

    /// Canonical enumeration: physician-major, facility-minor.
    pub fn actions(&self) -> Vec<Action> {
        let mut out = Vec::with_capacity(self.num_actions());
        for p in 1..=self.physicians {
            if self.facilities == 0 {
                out.push(Action::new(p, None));
            } else {
                for f in 1..=self.facilities {
                    out.push(Action::new(p, Some(f)));
                }
            }
        }
        out
    }

    /// Position of `action` in the canonical enumeration.
    pub fn action_index(&self, action: Action) -> Result<usize> {
        self.validate(action)?;
        let base = (action.physician - 1) * self.facilities.max(1);
        Ok(base + action.facility.map_or(0, |f| f - 1))
    }

    pub fn validate(&self, action: Action) -> Result<()> {
        if action.physician == 0 || action.physician > self.physicians {
            return Err(Error::Domain(format!(
                "physician index {} outside 1..={}",
                action.physician, self.physicians
            )));
        }
        match (self.facilities, action.facility) {
            (0, None) => Ok(()),
            (0, Some(f)) => Err(Error::Domain(format!(
                "facility index {f} given but the action space has no facilities"
            ))),
            (_, None) => Err(Error::Domain(
                "facility index required when facilities are modeled".into(),
            )),
            (l, Some(f)) if f == 0 || f > l => Err(Error::Domain(format!(
                "facility index {f} outside 1..={l}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Binary outcome of one treatment, recorded as a sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Success,
    Failure,
}

impl Outcome {
    /// +1 for success, -1 for failure.
    pub fn sign(self) -> f64 {
        match self {
            Outcome::Success => 1.0,
            Outcome::Failure => -1.0,
        }
    }

    /// Accepts the +1/-1 and 1/0 encodings.
    pub fn from_value(v: f64) -> Result<Self> {
        if v == 1.0 {
            Ok(Outcome::Success)
        } else if v == -1.0 || v == 0.0 {
            Ok(Outcome::Failure)
        } else {
            Err(Error::Domain(format!("outcome must be +1, -1, or 0; got {v}")))
        }
    }
}

/// Design vector for one (patient, action) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedInstance {
    phi: Vec<f64>,
}

impl EncodedInstance {
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

impl AsRef<[f64]> for EncodedInstance {
    fn as_ref(&self) -> &[f64] {
        &self.phi
    }
}

/// One fully or partially observed treatment record.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub context: PatientContext,
    pub action: Action,
    pub outcome: Outcome,
}

/// A dataset row: context always present, assignment and outcome optional so
/// context-only files (for replay) load through the same path.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub context: PatientContext,
    pub action: Option<Action>,
    pub outcome: Option<Outcome>,
}

/// Rows plus the feature schema they share.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: Schema,
    pub rows: Vec<DatasetRow>,
}

/// Build a context from a raw `column -> value` row. Columns absent from the
/// row default to 0; columns absent from the schema are a schema error.
pub fn encode_patient(
    id: impl Into<String>,
    raw_row: &HashMap<String, String>,
    schema: &Schema,
) -> Result<PatientContext> {
    let mut features = vec![0.0; schema.len()];
    for (name, value) in raw_row {
        let Some(pos) = schema.position(name) else {
            return Err(Error::Schema(format!("unknown column '{name}'")));
        };
        features[pos] = parse_number(name, value)?;
    }
    Ok(PatientContext::new(id, features))
}

/// Indicator block for an action: physician one-hot, then facility one-hot.
pub fn encode_action(action: Action, space: &ActionSpace) -> Result<Vec<f64>> {
    space.validate(action)?;
    let mut block = vec![0.0; space.indicator_len()];
    block[action.physician - 1] = 1.0;
    if let Some(f) = action.facility {
        block[space.physicians() + f - 1] = 1.0;
    }
    Ok(block)
}

/// Full design vector: bias, context features, indicator block.
pub fn assemble(
    context: &PatientContext,
    action: Action,
    space: &ActionSpace,
) -> Result<EncodedInstance> {
    let block = encode_action(action, space)?;
    let mut phi = Vec::with_capacity(1 + context.features.len() + block.len());
    phi.push(1.0);
    phi.extend_from_slice(&context.features);
    phi.extend_from_slice(&block);
    Ok(EncodedInstance { phi })
}

impl Dataset {
    /// Read a dataset from CSV. The header must contain `patient_id`; the
    /// optional `action_p`, `action_f`, and `outcome` columns may be empty on
    /// any row (context-only rows). All remaining columns are features, in
    /// header order.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = csv.headers()?.clone();
        let mut id_col = None;
        let mut p_col = None;
        let mut f_col = None;
        let mut y_col = None;
        let mut feature_cols: Vec<(usize, String)> = Vec::new();
        for (i, name) in headers.iter().enumerate() {
            match name {
                "patient_id" => id_col = Some(i),
                "action_p" => p_col = Some(i),
                "action_f" => f_col = Some(i),
                "outcome" => y_col = Some(i),
                _ => feature_cols.push((i, name.to_string())),
            }
        }
        let Some(id_col) = id_col else {
            return Err(Error::Schema("dataset is missing a 'patient_id' column".into()));
        };
        let schema = Schema::new(feature_cols.iter().map(|(_, n)| n.clone()).collect())?;

        let mut rows = Vec::new();
        for (line, record) in csv.records().enumerate() {
            let record = record?;
            let mut features = Vec::with_capacity(feature_cols.len());
            for (i, name) in &feature_cols {
                features.push(parse_number(name, field(&record, *i))?);
            }
            let context = PatientContext::new(field(&record, id_col), features);

            let physician = parse_optional_index("action_p", p_col.map(|i| field(&record, i)))?;
            let facility = parse_optional_index("action_f", f_col.map(|i| field(&record, i)))?;
            let action = match (physician, facility) {
                (Some(p), f) => Some(Action::new(p, f)),
                (None, Some(_)) => {
                    return Err(Error::Parse(format!(
                        "row {}: action_f given without action_p",
                        line + 1
                    )))
                }
                (None, None) => None,
            };

            let outcome = match y_col.map(|i| field(&record, i)) {
                None | Some("") => None,
                Some(raw) => Some(Outcome::from_value(parse_number("outcome", raw)?)?),
            };

            rows.push(DatasetRow { context, action, outcome });
        }
        Ok(Self { schema, rows })
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_csv_reader(file)
    }

    pub fn contexts(&self) -> impl Iterator<Item = &PatientContext> {
        self.rows.iter().map(|r| &r.context)
    }

    /// Z-score every non-binary column using this dataset's own mean and
    /// standard deviation. Columns whose values all lie in {0, 1} are left on
    /// their raw scale, as are constant columns (their deviation is zero).
    pub fn standardized(&self) -> Dataset {
        let n = self.rows.len();
        let mut out = self.clone();
        if n == 0 {
            return out;
        }
        for col in 0..self.schema.len() {
            let values: Vec<f64> = self.rows.iter().map(|r| r.context.features[col]).collect();
            if values.iter().all(|&v| v == 0.0 || v == 1.0) {
                continue;
            }
            let m = crate::num::mean(&values);
            let sd = crate::num::sample_sd(&values);
            if sd == 0.0 {
                continue;
            }
            for (row, v) in out.rows.iter_mut().zip(&values) {
                row.context.features[col] = (v - m) / sd;
            }
        }
        out
    }
}

fn field<'a>(record: &'a csv::StringRecord, i: usize) -> &'a str {
    record.get(i).unwrap_or("").trim()
}

fn parse_number(name: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .map_err(|_| Error::Parse(format!("column '{name}': expected a number, got '{raw}'")))
}

fn parse_optional_index(name: &str, raw: Option<&str>) -> Result<Option<usize>> {
    match raw {
        None | Some("") => Ok(None),
        Some(s) => s
            .parse::<usize>()
            .ok()
            .filter(|&v| v >= 1)
            .map(Some)
            .ok_or_else(|| {
                Error::Parse(format!("column '{name}': expected a positive integer, got '{s}'"))
            }),
    }
}
