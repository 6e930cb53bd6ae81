//! Flat sectioned key-value experiment configuration.
//!
//! The format is hand-editable and diff-friendly:
//!
//! ```text
//! # lines starting with '#' are comments
//! [experiment]
//! num_patients = 212
//! num_physicians = 20
//! replications = 500
//! seed = 7
//!
//! [model]
//! prior_lambda = 1.0
//! sigma_truth = 1.0
//!
//! [policy]
//! kind = kg          # kg | thompson | exploit | explore
//! tau = horizon      # 'horizon' or a non-negative number
//! eta = 0.5
//!
//! [features]
//! num_features = 31
//! density = 0.1
//! ```
//!
//! Every parse error carries the offending line number, key, and the
//! expected domain.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::policy::{PolicyConfig, PolicyKind, Tau};
use crate::sim::{Assignment, ContextSpec, ExperimentConfig};

const SECTIONS: [&str; 4] = ["experiment", "model", "policy", "features"];

/// Section name -> key -> (line number, raw value).
type RawSections = BTreeMap<String, BTreeMap<String, (usize, String)>>;

fn parse_sections(text: &str) -> Result<RawSections> {
    let mut sections: RawSections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw_line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| {
                Error::Config(format!("line {lineno}: unterminated section header '{line}'"))
            })?;
            if !SECTIONS.contains(&name) {
                return Err(Error::Config(format!(
                    "line {lineno}: unknown section [{name}] (expected one of {})",
                    SECTIONS.map(|s| format!("[{s}]")).join(", ")
                )));
            }
            if sections.contains_key(name) {
                return Err(Error::Config(format!(
                    "line {lineno}: section [{name}] appears twice"
                )));
            }
            sections.insert(name.to_string(), BTreeMap::new());
            current = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {lineno}: expected 'key = value', got '{line}'"
            )));
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {lineno}: empty key")));
        }
        let Some(section) = &current else {
            return Err(Error::Config(format!(
                "line {lineno}: key '{key}' appears before any [section] header"
            )));
        };
        let entries = sections.get_mut(section).expect("section was inserted");
        if entries.contains_key(key) {
            return Err(Error::Config(format!(
                "line {lineno}: duplicate key '{key}' in section [{section}]"
            )));
        }
        entries.insert(key.to_string(), (lineno, value.to_string()));
    }
    Ok(sections)
}

/// Tracks which keys a section consumed so leftovers can be reported with
/// their line numbers.
struct SectionReader<'a> {
    name: &'a str,
    entries: Option<&'a BTreeMap<String, (usize, String)>>,
    consumed: Vec<&'a str>,
}

impl<'a> SectionReader<'a> {
    fn new(sections: &'a RawSections, name: &'a str) -> Self {
        Self { name, entries: sections.get(name), consumed: Vec::new() }
    }

    fn raw(&mut self, key: &'a str) -> Option<(usize, &'a str)> {
        self.consumed.push(key);
        self.entries
            .and_then(|e| e.get(key))
            .map(|(line, value)| (*line, value.as_str()))
    }

    fn value<T: FromStr>(&mut self, key: &'a str, domain: &str) -> Result<Option<T>> {
        let section = self.name;
        match self.raw(key) {
            None => Ok(None),
            Some((line, raw)) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::Config(format!(
                    "line {line}: {section}.{key} expects {domain}, got '{raw}'"
                ))
            }),
        }
    }

    fn required<T: FromStr>(&mut self, key: &'a str, domain: &str) -> Result<T> {
        self.value(key, domain)?.ok_or_else(|| {
            Error::Config(format!(
                "missing required key '{key}' in section [{}]",
                self.name
            ))
        })
    }

    fn path(&mut self, key: &'a str) -> Option<(usize, PathBuf)> {
        self.raw(key).map(|(line, raw)| (line, PathBuf::from(raw)))
    }

    fn finish(self) -> Result<()> {
        let Some(entries) = self.entries else { return Ok(()) };
        for (key, (line, _)) in entries {
            if !self.consumed.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "line {line}: unknown key '{key}' in section [{}]",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// Parse and validate an experiment configuration.
pub fn experiment_from_str(text: &str) -> Result<ExperimentConfig> {
    let sections = parse_sections(text)?;

    let mut experiment = SectionReader::new(&sections, "experiment");
    let num_patients = experiment.required("num_patients", "a positive integer")?;
    let num_physicians = experiment.required("num_physicians", "a positive integer")?;
    let num_facilities = experiment
        .value("num_facilities", "a non-negative integer")?
        .unwrap_or(0);
    let replications = experiment.required("replications", "a positive integer")?;
    let seed = experiment.required("seed", "a 64-bit unsigned integer")?;
    let shared_truth = experiment
        .value("shared_truth", "true or false")?
        .unwrap_or(false);
    experiment.finish()?;

    let mut model = SectionReader::new(&sections, "model");
    let prior_lambda = model.value("prior_lambda", "a positive number")?.unwrap_or(1.0);
    let sigma_truth = model.value("sigma_truth", "a non-negative number")?.unwrap_or(1.0);
    let truth_path = model.path("truth_file").map(|(_, p)| p);
    model.finish()?;

    let mut policy = SectionReader::new(&sections, "policy");
    let kind = match policy.raw("kind") {
        None => PolicyKind::KnowledgeGradient,
        Some((line, raw)) => PolicyKind::parse(raw).map_err(|_| {
            Error::Config(format!(
                "line {line}: policy.kind expects kg, thompson, exploit, or explore, got '{raw}'"
            ))
        })?,
    };
    let tau = match policy.raw("tau") {
        None => Tau::HorizonRemaining,
        Some((_, "horizon")) => Tau::HorizonRemaining,
        Some((line, raw)) => {
            let t: f64 = raw.parse().map_err(|_| {
                Error::Config(format!(
                    "line {line}: policy.tau expects 'horizon' or a non-negative number, got '{raw}'"
                ))
            })?;
            Tau::Fixed(t)
        }
    };
    let eta = policy.value("eta", "a positive number")?.unwrap_or(1.0);
    let assignment = match policy.raw("assignment") {
        None | Some((_, "policy")) => Assignment::Policy,
        Some((_, "oracle")) => Assignment::Oracle,
        Some((line, raw)) => {
            return Err(Error::Config(format!(
                "line {line}: policy.assignment expects policy or oracle, got '{raw}'"
            )))
        }
    };
    policy.finish()?;

    let mut features = SectionReader::new(&sections, "features");
    let num_features = features.value("num_features", "a non-negative integer")?;
    let density = features.value("density", "a number in [0, 1]")?;
    let context_file = features.path("context_file");
    features.finish()?;
    let contexts = match (context_file, num_features, density) {
        (Some((line, _)), Some(_), _) | (Some((line, _)), _, Some(_)) => {
            return Err(Error::Config(format!(
                "line {line}: features.context_file conflicts with num_features/density"
            )))
        }
        (Some((_, path)), None, None) => ContextSpec::Csv { path },
        (None, nf, d) => ContextSpec::Synthetic {
            num_features: nf.unwrap_or(0),
            density: d.unwrap_or(0.0),
        },
    };

    let config = ExperimentConfig {
        num_patients,
        num_physicians,
        num_facilities,
        contexts,
        sigma_truth,
        truth_path,
        prior_lambda,
        policy: PolicyConfig { kind, tau, eta },
        replications,
        seed,
        shared_truth,
        assignment,
    };
    config.validate()?;
    Ok(config)
}

/// Parse a configuration file from disk.
pub fn experiment_from_path(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    experiment_from_str(&text)
}
