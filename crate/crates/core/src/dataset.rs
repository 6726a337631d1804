//! Labelled two-class table of continuous and discrete variables.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::format_sig;

/// Name of the class column in written tables.
pub const CLASS_COLUMN: &str = "class";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableKind {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VariableKind,
    /// Category dictionary of a discrete variable; values are stored as the
    /// index into this list.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl Variable {
    pub fn continuous(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: VariableKind::Continuous,
            categories: Vec::new(),
        }
    }

    pub fn discrete(name: impl Into<String>, categories: Vec<String>) -> Self {
        Self {
            name: name.into(),
            kind: VariableKind::Discrete,
            categories,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    One,
    Two,
}

impl ClassLabel {
    pub fn other(self) -> Self {
        match self {
            ClassLabel::One => ClassLabel::Two,
            ClassLabel::Two => ClassLabel::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            ClassLabel::One => 0,
            ClassLabel::Two => 1,
        }
    }
}

/// Column-major table; `columns[j][i]` is variable `j` of row `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetTable {
    pub name: String,
    pub variables: Vec<Variable>,
    pub columns: Vec<Vec<f64>>,
    pub labels: Vec<ClassLabel>,
    pub class_names: [String; 2],
}

impl DatasetTable {
    pub fn new(
        name: impl Into<String>,
        variables: Vec<Variable>,
        columns: Vec<Vec<f64>>,
        labels: Vec<ClassLabel>,
        class_names: [String; 2],
    ) -> Result<Self> {
        let t = Self {
            name: name.into(),
            variables,
            columns,
            labels,
            class_names,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.variables.len() != self.columns.len() {
            return Err(Error::Schema(format!(
                "{} variables but {} columns",
                self.variables.len(),
                self.columns.len()
            )));
        }
        let n = self.labels.len();
        for (v, col) in self.variables.iter().zip(&self.columns) {
            if col.len() != n {
                return Err(Error::Schema(format!(
                    "column {} has {} values for {} rows",
                    v.name,
                    col.len(),
                    n
                )));
            }
            if v.kind == VariableKind::Discrete {
                let k = v.categories.len() as f64;
                if let Some(bad) = col.iter().find(|x| !(x.fract() == 0.0 && **x >= 0.0 && **x < k)) {
                    return Err(Error::Schema(format!(
                        "discrete column {} holds {bad}, outside its {} categories",
                        v.name,
                        v.categories.len()
                    )));
                }
            } else if let Some(bad) = col.iter().find(|x| !x.is_finite()) {
                return Err(Error::Schema(format!("column {} holds non-finite {bad}", v.name)));
            }
        }
        if self.n1() == 0 || self.n2() == 0 {
            return Err(Error::InsufficientData(format!(
                "both classes must be present (N1 = {}, N2 = {})",
                self.n1(),
                self.n2()
            )));
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn count(&self, label: ClassLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn n1(&self) -> usize {
        self.count(ClassLabel::One)
    }

    pub fn n2(&self) -> usize {
        self.count(ClassLabel::Two)
    }

    pub fn f1(&self) -> f64 {
        self.n1() as f64 / self.n_rows() as f64
    }

    /// Row indices of one class, in table order.
    pub fn class_rows(&self, label: ClassLabel) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| self.labels[i] == label).collect()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Keeps the given rows, in the given order, unmodified.
    pub fn select_rows(&self, rows: &[usize]) -> DatasetTable {
        DatasetTable {
            name: self.name.clone(),
            variables: self.variables.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&i| c[i]).collect())
                .collect(),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
        }
    }

    /// Keeps the given variables, in the given order.
    pub fn select_variables(&self, vars: &[usize]) -> DatasetTable {
        DatasetTable {
            name: self.name.clone(),
            variables: vars.iter().map(|&j| self.variables[j].clone()).collect(),
            columns: vars.iter().map(|&j| self.columns[j].clone()).collect(),
            labels: self.labels.clone(),
            class_names: self.class_names.clone(),
        }
    }

    /// Exchanges the roles of the two classes; rows keep their order.
    pub fn swap_classes(&self) -> DatasetTable {
        DatasetTable {
            labels: self.labels.iter().map(|l| l.other()).collect(),
            class_names: [self.class_names[1].clone(), self.class_names[0].clone()],
            ..self.clone()
        }
    }

    /// Writes the table with a header row and a trailing class column, in the
    /// format [`crate::ingest::load_csv`] reads. Continuous values are written
    /// with 17 significant digits so a reload is bit-identical.
    pub fn write_csv<W: Write>(&self, mut out: W, delimiter: char) -> std::io::Result<()> {
        let d = delimiter.to_string();
        let mut header: Vec<&str> = self.variables.iter().map(|v| v.name.as_str()).collect();
        header.push(CLASS_COLUMN);
        writeln!(out, "{}", header.join(&d))?;
        let mut fields = Vec::with_capacity(self.dim() + 1);
        for i in 0..self.n_rows() {
            fields.clear();
            for (v, c) in self.variables.iter().zip(&self.columns) {
                fields.push(match v.kind {
                    VariableKind::Continuous => format_sig(c[i], 17),
                    VariableKind::Discrete => v.categories[c[i] as usize].clone(),
                });
            }
            fields.push(self.class_names[self.labels[i].index()].clone());
            writeln!(out, "{}", fields.join(&d))?;
        }
        Ok(())
    }
}
