//! Loading delimited text tables into [`DatasetTable`], and greedy variable
//! selection by resistor-average distance.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{ClassLabel, DatasetTable, Variable, VariableKind};
use crate::error::{Error, Result};
use crate::estimator::{estimate, EstimatorConfig};

/// Cell values treated as missing.
pub const MISSING_TOKENS: [&str; 6] = ["", "?", "NA", "na", "NaN", "nan"];

/// Integer-valued columns with at most this many distinct values are inferred
/// to be discrete.
pub const MAX_INFERRED_LEVELS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    #[default]
    DropRow,
}

/// How to read a table. Usually written as a small TOML file:
///
/// ```toml
/// class_column = "diagnosis"
/// class1_label = "M"
/// ignore = ["id"]
///
/// [kinds]
/// smoothness_mean = "continuous"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaSpec {
    pub class_column: String,
    pub class1_label: String,
    /// When absent, class 2 is whatever single other label appears.
    #[serde(default)]
    pub class2_label: Option<String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default)]
    pub ignore: Vec<String>,
    /// Explicit kinds; other columns are inferred.
    #[serde(default)]
    pub kinds: BTreeMap<String, VariableKind>,
    #[serde(default)]
    pub missing_policy: MissingPolicy,
}

fn default_delimiter() -> char {
    ','
}

impl SchemaSpec {
    pub fn new(class_column: impl Into<String>, class1_label: impl Into<String>) -> Self {
        Self {
            class_column: class_column.into(),
            class1_label: class1_label.into(),
            class2_label: None,
            delimiter: ',',
            ignore: Vec::new(),
            kinds: BTreeMap::new(),
            missing_policy: MissingPolicy::DropRow,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedTable {
    pub table: DatasetTable,
    /// Data rows read, including dropped ones.
    pub rows_read: usize,
    pub rows_dropped: usize,
}

pub fn load_csv(path: impl AsRef<Path>, schema: &SchemaSpec) -> Result<LoadedTable> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(std::fs::File::open(path)?, name, schema)
}

fn is_missing(cell: &str) -> bool {
    MISSING_TOKENS.contains(&cell)
}

/// Reads a header-first delimited table.
pub fn read_csv<R: Read>(reader: R, name: impl Into<String>, schema: &SchemaSpec) -> Result<LoadedTable> {
    if !schema.delimiter.is_ascii() {
        return Err(Error::Schema("delimiter must be an ASCII character".into()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter as u8)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let class_idx = header
        .iter()
        .position(|h| *h == schema.class_column)
        .ok_or_else(|| Error::Schema(format!("class column {:?} not in header", schema.class_column)))?;
    for listed in schema.ignore.iter().chain(schema.kinds.keys()) {
        if !header.contains(listed) {
            return Err(Error::Schema(format!(
                "column {listed:?} named in the schema is not in the header"
            )));
        }
    }
    // unnamed columns (e.g. from a trailing delimiter) are skipped
    let var_idx: Vec<usize> = (0..header.len())
        .filter(|&j| j != class_idx && !header[j].is_empty() && !schema.ignore.contains(&header[j]))
        .collect();
    if var_idx.is_empty() {
        return Err(Error::Schema("no variable columns left".into()));
    }

    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut class_cells: Vec<(usize, String)> = Vec::new();
    let mut rows_read = 0;
    let mut rows_dropped = 0;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        rows_read += 1;
        if record.len() != header.len() {
            return Err(Error::Load {
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let class = &record[class_idx];
        if is_missing(class) || var_idx.iter().any(|&j| is_missing(&record[j])) {
            rows_dropped += 1;
            continue;
        }
        class_cells.push((line, class.to_owned()));
        cells.push(var_idx.iter().map(|&j| record[j].to_owned()).collect());
    }

    let labels = assign_labels(&class_cells, schema)?;
    let class2 = schema.class2_label.clone().unwrap_or_else(|| {
        class_cells
            .iter()
            .map(|(_, c)| c)
            .find(|c| **c != schema.class1_label)
            .cloned()
            .unwrap_or_default()
    });

    let mut variables = Vec::with_capacity(var_idx.len());
    let mut columns = Vec::with_capacity(var_idx.len());
    for (k, &j) in var_idx.iter().enumerate() {
        let col_name = &header[j];
        let raw: Vec<&str> = cells.iter().map(|r| r[k].as_str()).collect();
        let (variable, values) =
            type_column(col_name, &raw, schema.kinds.get(col_name).copied(), &class_cells)?;
        variables.push(variable);
        columns.push(values);
    }
    let table = DatasetTable::new(
        name,
        variables,
        columns,
        labels,
        [schema.class1_label.clone(), class2],
    )?;
    Ok(LoadedTable {
        table,
        rows_read,
        rows_dropped,
    })
}

fn assign_labels(class_cells: &[(usize, String)], schema: &SchemaSpec) -> Result<Vec<ClassLabel>> {
    let mut other: Option<&str> = schema.class2_label.as_deref();
    let mut labels = Vec::with_capacity(class_cells.len());
    for (line, c) in class_cells {
        if *c == schema.class1_label {
            labels.push(ClassLabel::One);
            continue;
        }
        match other {
            None => other = Some(c),
            Some(o) if o == c => {}
            Some(o) => {
                return Err(Error::Load {
                    line: *line,
                    message: format!(
                        "unknown class label {c:?} (classes are {:?} and {o:?})",
                        schema.class1_label
                    ),
                })
            }
        }
        labels.push(ClassLabel::Two);
    }
    for (label, want) in [
        (ClassLabel::One, Some(schema.class1_label.as_str())),
        (ClassLabel::Two, other),
    ] {
        if !labels.contains(&label) {
            return Err(Error::Load {
                line: 0,
                message: format!(
                    "class {} ({}) has no complete rows",
                    label.index() + 1,
                    want.map_or("second label".to_string(), |w| format!("{w:?}"))
                ),
            });
        }
    }
    Ok(labels)
}

fn type_column(
    name: &str,
    raw: &[&str],
    declared: Option<VariableKind>,
    rows: &[(usize, String)],
) -> Result<(Variable, Vec<f64>)> {
    let parsed: Vec<Option<f64>> = raw
        .iter()
        .map(|s| s.parse::<f64>().ok().filter(|x| x.is_finite()))
        .collect();
    let all_numeric = parsed.iter().all(Option::is_some);
    let kind = declared.unwrap_or_else(|| {
        if !all_numeric {
            return VariableKind::Discrete;
        }
        let integral = parsed.iter().all(|x| x.is_some_and(|v| v.fract() == 0.0));
        let distinct: BTreeSet<u64> = parsed.iter().map(|x| x.unwrap_or(0.0).to_bits()).collect();
        if integral && distinct.len() <= MAX_INFERRED_LEVELS {
            VariableKind::Discrete
        } else {
            VariableKind::Continuous
        }
    });
    match kind {
        VariableKind::Continuous => {
            if let Some(i) = parsed.iter().position(Option::is_none) {
                return Err(Error::Load {
                    line: rows[i].0,
                    message: format!("non-numeric value {:?} in continuous column {name:?}", raw[i]),
                });
            }
            Ok((
                Variable::continuous(name),
                parsed.into_iter().map(Option::unwrap).collect(),
            ))
        }
        VariableKind::Discrete => {
            let mut cats: Vec<&str> = raw.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
            if all_numeric {
                cats.sort_by(|a, b| {
                    let (x, y) = (a.parse::<f64>().unwrap(), b.parse::<f64>().unwrap());
                    x.total_cmp(&y).then(a.cmp(b))
                });
            }
            let index: BTreeMap<&str, usize> = cats.iter().enumerate().map(|(i, c)| (*c, i)).collect();
            let values = raw.iter().map(|c| index[c] as f64).collect();
            let categories = cats.into_iter().map(str::to_owned).collect();
            Ok((Variable::discrete(name, categories), values))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreedyOptions {
    pub max_vars: usize,
    /// Smallest CDR increase (bits) that admits another variable.
    pub epsilon: f64,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        Self {
            max_vars: usize::MAX,
            epsilon: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub variable: String,
    /// Column index in the input table.
    pub index: usize,
    /// CDR of the selected set after this step.
    pub cdr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub steps: Vec<SelectionStep>,
    /// Estimator runs performed.
    pub invocations: usize,
    /// Best CDR of the candidate that was rejected, if the search stopped on
    /// the epsilon rule.
    pub rejected_cdr: Option<f64>,
    pub warnings: Vec<String>,
}

/// Forward selection: start from the single variable with the largest CDR,
/// then repeatedly add whichever unused variable raises CDR the most, while
/// the gain exceeds `epsilon`. An undefined CDR counts as 0. Ties go to the
/// earlier-declared variable.
pub fn greedy_select(
    dataset: &DatasetTable,
    config: &EstimatorConfig,
    options: &GreedyOptions,
) -> Result<Selection> {
    dataset.validate()?;
    config.validate()?;
    let p = dataset.dim();
    let max_vars = options.max_vars.min(p);
    if max_vars == 0 {
        return Err(Error::invalid("max_vars must be at least 1"));
    }
    let mut chosen: Vec<usize> = Vec::new();
    let mut steps = Vec::new();
    let mut invocations = 0;
    let mut warnings = Vec::new();
    let mut rejected_cdr = None;
    let mut current = f64::NEG_INFINITY;

    while chosen.len() < max_vars {
        let candidates: Vec<usize> = (0..p).filter(|j| !chosen.contains(j)).collect();
        let results = crate::par_map(candidates.len(), |c| {
            let mut vars = chosen.clone();
            vars.push(candidates[c]);
            estimate(&dataset.select_variables(&vars), config)
        });
        invocations += candidates.len();
        let mut best: Option<(usize, f64)> = None;
        for (&j, r) in candidates.iter().zip(results) {
            match r {
                Ok(e) => {
                    let score = e.cdr.unwrap_or(0.0);
                    if best.is_none_or(|(_, b)| score > b) {
                        best = Some((j, score));
                    }
                }
                Err(e) => warnings.push(format!("skipped {}: {e}", dataset.variables[j].name)),
            }
        }
        let Some((j, score)) = best else { break };
        if !chosen.is_empty() && score - current <= options.epsilon {
            rejected_cdr = Some(score);
            break;
        }
        chosen.push(j);
        current = score;
        steps.push(SelectionStep {
            variable: dataset.variables[j].name.clone(),
            index: j,
            cdr: score,
        });
    }
    if steps.is_empty() {
        return Err(Error::InsufficientData("no variable could be estimated".into()));
    }
    Ok(Selection {
        steps,
        invocations,
        rejected_cdr,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> SchemaSpec {
        SchemaSpec::new("y", "M")
    }

    #[test]
    fn loads_and_infers_kinds() {
        let text = "id,a,b,c,y\n1,0.5,3,red,M\n2,1.5,1,blue,B\n3,2.25,3,red,B\n4,?,1,red,M\n5,7.0,2,blue,M\n";
        let mut s = schema();
        s.ignore.push("id".into());
        let t = read_csv(text.as_bytes(), "x", &s).unwrap();
        assert_eq!((t.rows_read, t.rows_dropped), (5, 1));
        let tab = t.table;
        assert_eq!((tab.n1(), tab.n2()), (2, 2));
        assert_eq!(tab.class_names, ["M".to_string(), "B".to_string()]);
        let kinds: Vec<VariableKind> = tab.variables.iter().map(|v| v.kind).collect();
        assert_eq!(
            kinds,
            [
                VariableKind::Continuous,
                VariableKind::Discrete,
                VariableKind::Discrete
            ]
        );
        assert_eq!(tab.variables[1].categories, ["1", "2", "3"]);
        assert_eq!(tab.columns[1], [2.0, 0.0, 2.0, 1.0]);
        assert_eq!(tab.variables[2].categories, ["blue", "red"]);
    }

    #[test]
    fn unnamed_trailing_column_is_skipped() {
        let text = "x,y,\n1.5,M,\n2.5,B,\n";
        let t = read_csv(text.as_bytes(), "x", &schema()).unwrap();
        assert_eq!((t.table.dim(), t.rows_dropped), (1, 0));
    }

    #[test]
    fn missing_class_value_drops_row() {
        let text = "x,y\n1.5,M\n2.5,\n3.5,B\n4.5,B\n";
        let t = read_csv(text.as_bytes(), "x", &schema()).unwrap();
        assert_eq!(t.rows_dropped, 1);
        assert_eq!(t.table.n_rows(), 3);
    }

    #[test]
    fn load_errors() {
        let three_labels = "x,y\n1.5,M\n2.5,B\n3.5,C\n";
        assert!(matches!(
            read_csv(three_labels.as_bytes(), "x", &schema()),
            Err(Error::Load { line: 4, .. })
        ));
        let mut s = schema();
        s.kinds.insert("x".into(), VariableKind::Continuous);
        let text = "x,y\n1.5,M\nbig,B\n";
        assert!(matches!(
            read_csv(text.as_bytes(), "x", &s),
            Err(Error::Load { line: 3, .. })
        ));
        let one_class = "x,y\n1.5,M\n2.5,M\n";
        assert!(read_csv(one_class.as_bytes(), "x", &schema()).is_err());
        assert!(matches!(
            read_csv("x,z\n1,M\n".as_bytes(), "x", &schema()),
            Err(Error::Schema(_))
        ));
        let mut s = schema();
        s.class2_label = Some("B".into());
        assert!(read_csv("x,y\n1.5,M\n2.5,Q\n".as_bytes(), "x", &s).is_err());
    }

    #[test]
    fn schema_from_toml() {
        let s = SchemaSpec::from_toml(
            "class_column = \"diagnosis\"\nclass1_label = \"M\"\nignore = [\"id\"]\n[kinds]\nage = \"discrete\"\n",
        )
        .unwrap();
        assert_eq!(s.kinds["age"], VariableKind::Discrete);
        assert_eq!(s.delimiter, ',');
        assert!(SchemaSpec::from_toml("class_column = 3").is_err());
    }

    #[test]
    fn round_trip_through_csv() {
        let text = "a,b,y\n0.1,x,M\n-2.5e-7,y,B\n3.0000000000000004,x,B\n";
        let t = read_csv(text.as_bytes(), "x", &schema()).unwrap().table;
        let mut buf = Vec::new();
        t.write_csv(&mut buf, ',').unwrap();
        let mut s = schema();
        s.class_column = "class".into();
        let back = read_csv(buf.as_slice(), "x", &s).unwrap().table;
        assert_eq!(back.columns, t.columns);
        assert_eq!(back.variables, t.variables);
        assert_eq!(back.labels, t.labels);
    }
}
