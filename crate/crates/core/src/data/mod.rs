//! CSV ingestion through a schema descriptor, deterministic splits, label
//! noise and quadratic feature maps.

pub mod german;

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{DiscreteJoint, JointPoint, SampleSet};
use crate::error::{Error, Result};
use crate::plugin::LabelChannel;

/// Environment variable naming the directory that holds fetched datasets.
pub const DATA_DIR_ENV: &str = "FAIRFRONT_DATA_DIR";

/// Cell values treated as missing.
pub const MISSING: [&str; 2] = ["", "?"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Comparison {
    Gt,
    Ge,
    Lt,
    Le,
}

/// How a raw cell becomes a binary label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LabelRule {
    /// Cells must read `0` or `1`.
    Binary,
    /// `1` when the cell equals the given string.
    Equals(String),
    /// `1` when the numeric cell satisfies the comparison.
    Threshold(Comparison, f64),
}

impl LabelRule {
    /// Parses `binary`, `eq:<value>`, `gt:<x>`, `ge:<x>`, `lt:<x>` or `le:<x>`.
    pub fn parse(rule: &str) -> Result<Self> {
        let rule = rule.trim();
        if rule == "binary" {
            return Ok(LabelRule::Binary);
        }
        let (op, arg) = rule
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("label rule `{rule}` has no `op:` prefix")))?;
        let number = || {
            arg.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("label rule `{rule}` needs a number")))
        };
        Ok(match op {
            "eq" => LabelRule::Equals(arg.to_string()),
            "gt" => LabelRule::Threshold(Comparison::Gt, number()?),
            "ge" => LabelRule::Threshold(Comparison::Ge, number()?),
            "lt" => LabelRule::Threshold(Comparison::Lt, number()?),
            "le" => LabelRule::Threshold(Comparison::Le, number()?),
            _ => return Err(Error::Config(format!("unknown label rule `{rule}`"))),
        })
    }

    fn apply(&self, cell: &str, column: &str) -> Result<u8> {
        match self {
            LabelRule::Binary => match cell.trim() {
                "0" => Ok(0),
                "1" => Ok(1),
                other => Err(Error::NonBinaryLabel {
                    column: column.to_string(),
                    msg: format!("value `{other}` is neither 0 nor 1"),
                }),
            },
            LabelRule::Equals(v) => Ok(u8::from(cell.trim() == v)),
            LabelRule::Threshold(op, t) => {
                let x: f64 = cell.trim().parse().map_err(|_| Error::NonBinaryLabel {
                    column: column.to_string(),
                    msg: format!("threshold rule needs a number, found `{cell}`"),
                })?;
                Ok(u8::from(match op {
                    Comparison::Gt => x > *t,
                    Comparison::Ge => x >= *t,
                    Comparison::Lt => x < *t,
                    Comparison::Le => x <= *t,
                }))
            }
        }
    }
}

/// Flat key-value description of a CSV file.
///
/// ```toml
/// target_column = "class"
/// target_rule = "eq:1"
/// sensitive_column = "age"
/// sensitive_rule = "gt:25"
/// feature_columns = ["duration", "credit_amount"]
/// categorical_columns = ["purpose"]
/// ```
///
/// Numeric features come first in the listed order, then one indicator per
/// non-baseline level of each categorical column. Levels are sorted and the
/// first is dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaDescriptor {
    pub target_column: String,
    #[serde(default = "binary_rule")]
    pub target_rule: String,
    pub sensitive_column: String,
    #[serde(default = "binary_rule")]
    pub sensitive_rule: String,
    #[serde(default)]
    pub feature_columns: Vec<String>,
    #[serde(default)]
    pub categorical_columns: Vec<String>,
    #[serde(default)]
    pub weight_column: Option<String>,
}

fn binary_rule() -> String {
    "binary".into()
}

impl SchemaDescriptor {
    /// Numeric features plus binary `y` and `ybar` columns, the layout
    /// produced by [`write_csv`].
    pub fn plain(feature_columns: Vec<String>) -> Self {
        SchemaDescriptor {
            target_column: "y".into(),
            target_rule: binary_rule(),
            sensitive_column: "ybar".into(),
            sensitive_rule: binary_rule(),
            feature_columns,
            categorical_columns: Vec::new(),
            weight_column: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let schema: SchemaDescriptor =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        LabelRule::parse(&self.target_rule)?;
        LabelRule::parse(&self.sensitive_rule)?;
        let mut seen = HashSet::new();
        for name in self.columns() {
            if !seen.insert(name) {
                return Err(Error::SchemaMismatch(format!(
                    "column `{name}` is named more than once"
                )));
            }
        }
        Ok(())
    }

    fn columns(&self) -> impl Iterator<Item = &str> {
        [&self.target_column, &self.sensitive_column]
            .into_iter()
            .chain(&self.feature_columns)
            .chain(&self.categorical_columns)
            .chain(&self.weight_column)
            .map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LoadReport {
    pub rows_read: usize,
    /// Rows skipped because a used column was missing.
    pub rows_dropped: usize,
}

pub fn load_csv(path: impl AsRef<Path>, schema: &SchemaDescriptor) -> Result<SampleSet> {
    load_csv_with_report(path, schema).map(|(s, _)| s)
}

pub fn load_csv_with_report(
    path: impl AsRef<Path>,
    schema: &SchemaDescriptor,
) -> Result<(SampleSet, LoadReport)> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema)
}

/// Reads a headed CSV. Data rows are numbered from 1 in errors.
pub fn read_csv(reader: impl Read, schema: &SchemaDescriptor) -> Result<(SampleSet, LoadReport)> {
    schema.validate()?;
    let target_rule = LabelRule::parse(&schema.target_rule)?;
    let sensitive_rule = LabelRule::parse(&schema.sensitive_rule)?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    let index = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::SchemaMismatch(format!("column `{name}` not in header")))
    };
    let target_idx = index(&schema.target_column)?;
    let sensitive_idx = index(&schema.sensitive_column)?;
    let numeric_idx = schema
        .feature_columns
        .iter()
        .map(|c| index(c))
        .collect::<Result<Vec<_>>>()?;
    let categorical_idx = schema
        .categorical_columns
        .iter()
        .map(|c| index(c))
        .collect::<Result<Vec<_>>>()?;
    let weight_idx = schema.weight_column.as_deref().map(index).transpose()?;
    let used: Vec<usize> = [target_idx, sensitive_idx]
        .into_iter()
        .chain(numeric_idx.iter().copied())
        .chain(categorical_idx.iter().copied())
        .chain(weight_idx)
        .collect();

    let mut report = LoadReport::default();
    let mut numeric = Vec::new();
    let mut categories: Vec<Vec<String>> = Vec::new();
    let mut y = Vec::new();
    let mut ybar = Vec::new();
    let mut weights = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let row = r + 1;
        let record = record?;
        report.rows_read += 1;
        let cell = |i: usize| record.get(i).unwrap_or("").trim();
        if used.iter().any(|&i| MISSING.contains(&cell(i))) {
            report.rows_dropped += 1;
            continue;
        }
        let parse = |i: usize, name: &str| {
            cell(i).parse::<f64>().map_err(|_| Error::Parse {
                row,
                column: name.to_string(),
                msg: format!("`{}` is not a number", cell(i)),
            })
        };
        numeric.push(
            numeric_idx
                .iter()
                .zip(&schema.feature_columns)
                .map(|(&i, name)| parse(i, name))
                .collect::<Result<Vec<f64>>>()?,
        );
        categories.push(categorical_idx.iter().map(|&i| cell(i).to_string()).collect());
        y.push(target_rule.apply(cell(target_idx), &schema.target_column)?);
        ybar.push(sensitive_rule.apply(cell(sensitive_idx), &schema.sensitive_column)?);
        if let (Some(i), Some(name)) = (weight_idx, &schema.weight_column) {
            weights.push(parse(i, name)?);
        }
    }

    let mut names = schema.feature_columns.clone();
    let mut x = numeric;
    for (j, column) in schema.categorical_columns.iter().enumerate() {
        let levels: BTreeSet<&str> = categories.iter().map(|c| c[j].as_str()).collect();
        let kept: Vec<String> = levels.into_iter().skip(1).map(String::from).collect();
        names.extend(kept.iter().map(|l| format!("{column}={l}")));
        for (row, cats) in x.iter_mut().zip(&categories) {
            row.extend(kept.iter().map(|l| if *l == cats[j] { 1.0 } else { 0.0 }));
        }
    }
    let weights = schema.weight_column.as_ref().map(|_| weights);
    let sample = SampleSet::new(names, x, y, ybar, weights)?;
    Ok((sample, report))
}

/// Writes features, then `y`, `ybar` and `weight` when present. Floats use
/// the shortest representation that parses back to the same value.
pub fn write_csv_to(writer: impl Write, sample: &SampleSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = sample.feature_names.iter().map(String::as_str).collect();
    header.extend(["y", "ybar"]);
    if sample.weights.is_some() {
        header.push("weight");
    }
    w.write_record(&header)?;
    for i in 0..sample.len() {
        let mut rec: Vec<String> = sample.x[i].iter().map(|v| v.to_string()).collect();
        rec.push(sample.y[i].to_string());
        rec.push(sample.ybar[i].to_string());
        if let Some(ws) = &sample.weights {
            rec.push(ws[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn write_csv(path: impl AsRef<Path>, sample: &SampleSet) -> Result<()> {
    let mut buf = Vec::new();
    write_csv_to(&mut buf, sample)?;
    write_atomic(path, &buf)
}

/// The schema that reads back a file written by [`write_csv`].
pub fn schema_for(sample: &SampleSet) -> SchemaDescriptor {
    SchemaDescriptor {
        weight_column: sample.weights.as_ref().map(|_| "weight".into()),
        ..SchemaDescriptor::plain(sample.feature_names.clone())
    }
}

/// Writes to a sibling temporary file, then renames over `path`.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 2.0 / 3.0,
            seed: 0,
        }
    }
}

/// Shuffles row indices with the seed and takes the first
/// `ceil(n * train_fraction)` for training, keeping both parts nonempty.
pub fn split(sample: &SampleSet, spec: SplitSpec) -> Result<(SampleSet, SampleSet)> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::TooSmall(n));
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train_fraction {} is outside (0, 1)",
            spec.train_fraction
        )));
    }
    let n_train = ((n as f64 * spec.train_fraction - 1e-9).ceil() as usize).clamp(1, n - 1);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let (train, test) = idx.split_at(n_train);
    Ok((sample.select(train), sample.select(test)))
}

/// Flips each label of the channel independently with probability `rate`.
/// For [`LabelChannel::YbarGivenY1`] only the sensitive labels of rows with
/// `y = 1` are candidates.
pub fn inject_label_noise(
    sample: &SampleSet,
    channel: LabelChannel,
    rate: f64,
    seed: u64,
) -> Result<SampleSet> {
    if !(0.0..=0.5).contains(&rate) {
        return Err(Error::InvalidParameter(format!(
            "noise rate {rate} is outside [0, 1/2]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = sample.clone();
    let (rows, _) = channel.rows(sample);
    for i in rows {
        if rng.gen::<f64>() < rate {
            let label = match channel {
                LabelChannel::Y => &mut out.y[i],
                _ => &mut out.ybar[i],
            };
            *label = 1 - *label;
        }
    }
    Ok(out)
}

/// Appends every square, then every pairwise product `x_j x_k` with `j < k`.
pub fn quadratic_features(sample: &SampleSet) -> SampleSet {
    let d = sample.dim();
    let mut out = sample.clone();
    let names = &sample.feature_names;
    out.feature_names
        .extend(names.iter().map(|n| format!("{n}^2")));
    for j in 0..d {
        for k in j + 1..d {
            out.feature_names.push(format!("{}*{}", names[j], names[k]));
        }
    }
    for row in &mut out.x {
        let base = row.clone();
        row.extend(base.iter().map(|v| v * v));
        for j in 0..d {
            for k in j + 1..d {
                row.push(base[j] * base[k]);
            }
        }
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
struct JointRow {
    mass: f64,
    eta: f64,
    eta_dp: f64,
    eta_eo: f64,
}

/// Reads `mass,eta,eta_dp,eta_eo` rows.
pub fn read_joint_csv(reader: impl Read) -> Result<DiscreteJoint> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    for col in ["mass", "eta", "eta_dp", "eta_eo"] {
        if !header.iter().any(|h| h == col) {
            return Err(Error::SchemaMismatch(format!("column `{col}` not in header")));
        }
    }
    let mut points = Vec::new();
    for (r, row) in rdr.deserialize::<JointRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            row: r + 1,
            column: "mass,eta,eta_dp,eta_eo".into(),
            msg: e.to_string(),
        })?;
        points.push(JointPoint {
            mass: row.mass,
            eta: row.eta,
            eta_dp: row.eta_dp,
            eta_eo: row.eta_eo,
        });
    }
    DiscreteJoint::new(points)
}

pub fn load_joint_csv(path: impl AsRef<Path>) -> Result<DiscreteJoint> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_joint_csv(file)
}

pub fn write_joint_csv_to(writer: impl Write, dist: &DiscreteJoint) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in dist.points() {
        w.serialize(JointRow {
            mass: p.mass,
            eta: p.eta,
            eta_dp: p.eta_dp,
            eta_eo: p.eta_eo,
        })?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::sample_rotated_gaussians;
    use proptest::prelude::*;

    fn schema() -> SchemaDescriptor {
        SchemaDescriptor::from_toml_str(
            r#"
            target_column = "label"
            target_rule = "eq:good"
            sensitive_column = "age"
            sensitive_rule = "gt:25"
            feature_columns = ["income"]
            categorical_columns = ["colour"]
            "#,
        )
        .unwrap()
    }

    #[test]
    fn three_row_file_matches_hand_enumeration() {
        let text = "income,colour,age,label\n1.5,red,30,good\n-2,blue,25,bad\n0,green,40,good\n";
        let (s, report) = read_csv(text.as_bytes(), &schema()).unwrap();
        assert_eq!(report, LoadReport { rows_read: 3, rows_dropped: 0 });
        // Levels sorted: blue, green, red; blue is dropped.
        assert_eq!(s.feature_names, ["income", "colour=green", "colour=red"]);
        assert_eq!(
            s.x,
            vec![vec![1.5, 0.0, 1.0], vec![-2.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]
        );
        assert_eq!(s.y, [1, 0, 1]);
        assert_eq!(s.ybar, [1, 0, 1]);
        assert!(s.weights.is_none());
    }

    #[test]
    fn missing_column_is_schema_mismatch() {
        let text = "income,age,label\n1,30,good\n";
        assert!(matches!(
            read_csv(text.as_bytes(), &schema()),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn bad_cell_reports_row_and_column() {
        let text = "income,colour,age,label\n1,red,30,good\nabc,red,30,good\n";
        match read_csv(text.as_bytes(), &schema()) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "income");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_binary_label_is_rejected() {
        let text = "x,y,ybar\n1,2,0\n";
        let s = SchemaDescriptor::plain(vec!["x".into()]);
        assert!(matches!(
            read_csv(text.as_bytes(), &s),
            Err(Error::NonBinaryLabel { .. })
        ));
    }

    #[test]
    fn missing_cells_drop_rows() {
        let text = "income,colour,age,label\n1,red,30,good\n?,red,30,good\n2,,30,bad\n3,red,20,bad\n";
        let (s, report) = read_csv(text.as_bytes(), &schema()).unwrap();
        assert_eq!(report, LoadReport { rows_read: 4, rows_dropped: 2 });
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn overlapping_columns_are_rejected() {
        let r = SchemaDescriptor::from_toml_str(
            "target_column = \"a\"\nsensitive_column = \"b\"\nfeature_columns = [\"a\"]\n",
        );
        assert!(matches!(r, Err(Error::SchemaMismatch(_))));
        let r = SchemaDescriptor::from_toml_str(
            "target_column = \"a\"\nsensitive_column = \"b\"\nsensitive_rule = \"between:3\"\n",
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let s = sample_rotated_gaussians(3, 0.5, 1).unwrap();
        let (a, b) = split(&s, SplitSpec::default()).unwrap();
        assert_eq!((a.len(), b.len()), (2, 1));
        let s = sample_rotated_gaussians(100, 0.5, 1).unwrap();
        let spec = SplitSpec { train_fraction: 0.5, seed: 9 };
        assert_eq!(split(&s, spec).unwrap(), split(&s, spec).unwrap());
        let one = sample_rotated_gaussians(1, 0.5, 1).unwrap();
        assert!(matches!(split(&one, spec), Err(Error::TooSmall(1))));
    }

    #[test]
    fn noise_rate_zero_is_identity_and_half_flips_half() {
        let s = sample_rotated_gaussians(10_000, 0.5, 2).unwrap();
        assert_eq!(inject_label_noise(&s, LabelChannel::Y, 0.0, 5).unwrap(), s);
        let noisy = inject_label_noise(&s, LabelChannel::Y, 0.5, 5).unwrap();
        let flipped = s.y.iter().zip(&noisy.y).filter(|(a, b)| a != b).count();
        assert!((flipped as f64 / 1e4 - 0.5).abs() <= 0.015);
        assert_eq!(noisy.ybar, s.ybar);
        assert_eq!(noisy, inject_label_noise(&s, LabelChannel::Y, 0.5, 5).unwrap());
        assert!(inject_label_noise(&s, LabelChannel::Y, 0.6, 5).is_err());
    }

    #[test]
    fn conditional_noise_only_touches_positive_rows() {
        let s = sample_rotated_gaussians(2000, 0.5, 3).unwrap();
        let noisy = inject_label_noise(&s, LabelChannel::YbarGivenY1, 0.5, 1).unwrap();
        assert_eq!(noisy.y, s.y);
        for i in 0..s.len() {
            if s.y[i] == 0 {
                assert_eq!(noisy.ybar[i], s.ybar[i]);
            }
        }
        assert_ne!(noisy.ybar, s.ybar);
    }

    #[test]
    fn quadratic_columns() {
        let s = SampleSet::new(
            vec!["a".into(), "b".into()],
            vec![vec![2.0, 3.0], vec![-1.0, 0.5]],
            vec![0, 1],
            vec![1, 0],
            None,
        )
        .unwrap();
        let q = quadratic_features(&s);
        assert_eq!(q.feature_names, ["a", "b", "a^2", "b^2", "a*b"]);
        assert_eq!(q.x, vec![vec![2.0, 3.0, 4.0, 9.0, 6.0], vec![-1.0, 0.5, 1.0, 0.25, -0.5]]);
        let one = SampleSet::new(vec!["a".into()], vec![vec![3.0]], vec![0], vec![0], None).unwrap();
        assert_eq!(quadratic_features(&one).x, vec![vec![3.0, 9.0]]);
    }

    #[test]
    fn joint_csv_round_trip() {
        let d = crate::distributions::tests::three_point();
        let mut buf = Vec::new();
        write_joint_csv_to(&mut buf, &d).unwrap();
        assert!(buf.starts_with(b"mass,eta,eta_dp,eta_eo\n"));
        assert_eq!(read_joint_csv(buf.as_slice()).unwrap(), d);
    }

    #[test]
    fn atomic_write_leaves_no_temporary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("out.csv");
        write_atomic(&path, b"a\n").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"a\n");
        assert_eq!(fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    proptest! {
        #[test]
        fn csv_round_trip(
            rows in prop::collection::vec(
                (prop::collection::vec(-1e6f64..1e6, 3), 0u8..2, 0u8..2, 0.0f64..5.0), 1..20),
            weighted in any::<bool>(),
        ) {
            let names = vec!["a".to_string(), "b".into(), "c".into()];
            let x = rows.iter().map(|r| r.0.clone()).collect();
            let y = rows.iter().map(|r| r.1).collect();
            let ybar = rows.iter().map(|r| r.2).collect();
            let w = weighted.then(|| rows.iter().map(|r| r.3).collect());
            let s = SampleSet::new(names, x, y, ybar, w).unwrap();
            let mut buf = Vec::new();
            write_csv_to(&mut buf, &s).unwrap();
            let (back, _) = read_csv(buf.as_slice(), &schema_for(&s)).unwrap();
            prop_assert_eq!(back.y, s.y);
            prop_assert_eq!(back.ybar, s.ybar);
            for (r, q) in back.x.iter().zip(&s.x) {
                for (u, v) in r.iter().zip(q) {
                    prop_assert!((u - v).abs() <= 1e-15 * v.abs().max(1e-300));
                }
            }
        }

        #[test]
        fn split_is_partition(n in 2usize..200, frac in 0.01f64..0.99, seed in any::<u64>()) {
            let names = vec!["id".to_string()];
            let x = (0..n).map(|i| vec![i as f64]).collect();
            let s = SampleSet::new(names, x, vec![0; n], vec![0; n], None).unwrap();
            let (a, b) = split(&s, SplitSpec { train_fraction: frac, seed }).unwrap();
            prop_assert!(!a.is_empty() && !b.is_empty());
            let mut ids: Vec<usize> = a.x.iter().chain(&b.x).map(|r| r[0] as usize).collect();
            ids.sort_unstable();
            prop_assert_eq!(ids, (0..n).collect::<Vec<_>>());
        }

        #[test]
        fn noise_changes_only_its_channel(seed in any::<u64>(), rate in 0.0f64..0.5) {
            let s = sample_rotated_gaussians(50, 0.3, 4).unwrap();
            let t = inject_label_noise(&s, LabelChannel::Ybar, rate, seed).unwrap();
            prop_assert_eq!(&t.y, &s.y);
            prop_assert_eq!(&t.x, &s.x);
        }
    }
}
