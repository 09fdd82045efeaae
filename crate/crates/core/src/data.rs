//! Input-output datasets and their CSV representation.
//!
//! The CSV header is `dmu,in:<name>,...,out:<name>,...`. Columns may appear
//! in any order after the first; the prefix decides the role. Entries must
//! be nonnegative, and every DMU needs at least one positive input and one
//! positive output.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub names: Vec<String>,
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    /// `inputs[j]` is the input vector of DMU `j`.
    pub inputs: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

impl Dataset {
    /// Builds and validates a dataset from per-DMU rows.
    pub fn new(
        names: Vec<String>,
        input_names: Vec<String>,
        output_names: Vec<String>,
        inputs: Vec<Vec<f64>>,
        outputs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let ds = Dataset {
            names,
            input_names,
            output_names,
            inputs,
            outputs,
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Dataset with generated names `DMU1..`, `x1..`, `y1..`.
    pub fn from_vectors(inputs: Vec<Vec<f64>>, outputs: Vec<Vec<f64>>) -> Result<Self> {
        let m = inputs.first().map_or(0, Vec::len);
        let s = outputs.first().map_or(0, Vec::len);
        Dataset::new(
            (1..=inputs.len()).map(|j| format!("DMU{j}")).collect(),
            (1..=m).map(|i| format!("x{i}")).collect(),
            (1..=s).map(|r| format!("y{r}")).collect(),
            inputs,
            outputs,
        )
    }

    pub fn num_dmus(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.input_names.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.output_names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn validate(&self) -> Result<()> {
        let n = self.names.len();
        if n == 0 {
            return Err(Error::InvalidData("dataset has no DMUs".into()));
        }
        if self.inputs.len() != n || self.outputs.len() != n {
            return Err(Error::InvalidData(format!(
                "{n} names but {} input rows and {} output rows",
                self.inputs.len(),
                self.outputs.len()
            )));
        }
        let (m, s) = (self.num_inputs(), self.num_outputs());
        if m == 0 || s == 0 {
            return Err(Error::InvalidData(
                "need at least one input and one output column".into(),
            ));
        }
        for j in 0..n {
            let name = &self.names[j];
            if self.inputs[j].len() != m || self.outputs[j].len() != s {
                return Err(Error::InvalidData(format!("DMU {name} has the wrong arity")));
            }
            let cells = self.inputs[j]
                .iter()
                .zip(&self.input_names)
                .chain(self.outputs[j].iter().zip(&self.output_names));
            for (v, col) in cells {
                if !v.is_finite() || *v < 0.0 {
                    return Err(Error::InvalidData(format!(
                        "DMU {name}, column {col}: entry {v} must be finite and nonnegative"
                    )));
                }
            }
            if self.inputs[j].iter().all(|v| *v == 0.0) {
                return Err(Error::InvalidData(format!(
                    "DMU {name} has an all-zero input vector; inputs must lie in R^m_+ \\ {{0}}"
                )));
            }
            if self.outputs[j].iter().all(|v| *v == 0.0) {
                return Err(Error::InvalidData(format!(
                    "DMU {name} has an all-zero output vector; outputs must lie in R^s_+ \\ {{0}}"
                )));
            }
        }
        Ok(())
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::InvalidData(format!("cannot read header: {e}")))?
            .clone();
        if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
            return Err(Error::InvalidData("empty file".into()));
        }

        enum Role {
            Input,
            Output,
        }
        let mut roles = Vec::new();
        let mut input_names = Vec::new();
        let mut output_names = Vec::new();
        for col in header.iter().skip(1) {
            if let Some(name) = col.strip_prefix("in:") {
                roles.push(Role::Input);
                input_names.push(name.to_string());
            } else if let Some(name) = col.strip_prefix("out:") {
                roles.push(Role::Output);
                output_names.push(name.to_string());
            } else {
                return Err(Error::InvalidData(format!(
                    "column '{col}' must be prefixed with 'in:' or 'out:'"
                )));
            }
        }

        let mut names = Vec::new();
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::InvalidData(format!("row {}: {e}", line + 1)))?;
            if record.len() != header.len() {
                return Err(Error::InvalidData(format!(
                    "row {} has {} fields, expected {}",
                    line + 1,
                    record.len(),
                    header.len()
                )));
            }
            let mut x = Vec::with_capacity(input_names.len());
            let mut y = Vec::with_capacity(output_names.len());
            for ((field, role), col) in record.iter().skip(1).zip(&roles).zip(header.iter().skip(1)) {
                let v: f64 = field.parse().map_err(|_| {
                    Error::InvalidData(format!(
                        "row {} ({}), column {col}: '{field}' is not a number",
                        line + 1,
                        &record[0]
                    ))
                })?;
                match role {
                    Role::Input => x.push(v),
                    Role::Output => y.push(v),
                }
            }
            names.push(record[0].to_string());
            inputs.push(x);
            outputs.push(y);
        }
        Dataset::new(names, input_names, output_names, inputs, outputs)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::InvalidData(format!("{}: {e}", path.display())))?;
        Dataset::from_csv_reader(file)
    }
}
