//! Reading metrics CSVs and log directories.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use slim_core::binarizer::{FeatureSpec, RawColumn, RawTable};
use slim_core::logs::{split_timestamp, LogFeatureFrame, TemplateBase, TimestampFormat};
use slim_core::SlimError;

use crate::config::ColumnRoles;
use crate::CliError;

pub const LOG_COLUMNS: [&str; 3] = ["log_total", "log_unmatched", "log_distinct_new"];

/// A metrics CSV split into feature columns and role columns.
#[derive(Clone, Debug)]
pub struct MetricsTable {
    pub table: RawTable,
    pub specs: Vec<FeatureSpec>,
    pub services: Vec<String>,
    /// `None` for normal rows; empty when the CSV has no fault column.
    pub fault_labels: Vec<Option<String>>,
    /// Epoch seconds, when a timestamp column is present and parseable.
    pub timestamps: Vec<Option<i64>>,
}

fn is_missing(cell: &str) -> bool {
    matches!(cell.to_ascii_lowercase().as_str(), "" | "na" | "nan" | "null" | "none")
}

fn is_normal_label(cell: &str) -> bool {
    matches!(cell.to_ascii_lowercase().as_str(), "" | "normal" | "none" | "ok")
}

fn is_true(cell: &str) -> bool {
    matches!(cell.to_ascii_lowercase().as_str(), "1" | "true" | "yes")
}

/// Epoch seconds from an integer, a decimal number, or an ISO-8601 /
/// custom-format timestamp.
pub fn parse_timestamp(cell: &str, format: &TimestampFormat) -> Option<i64> {
    let cell = cell.trim();
    if let Ok(v) = cell.parse::<i64>() {
        return Some(v);
    }
    if let Ok(v) = cell.parse::<f64>() {
        return v.is_finite().then(|| v.floor() as i64);
    }
    split_timestamp(cell, format).map(|(t, _)| t)
}

/// Reads a metrics CSV. With `require_faults`, the fault-type column must
/// be present.
pub fn read_metrics_csv(
    path: &Path,
    roles: &ColumnRoles,
    bins: usize,
    require_faults: bool,
    ts_format: &TimestampFormat,
) -> Result<MetricsTable, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let schema = |msg: String| CliError::Core(SlimError::Schema(format!("{}: {msg}", path.display())));

    let service_col = find(&roles.service).ok_or_else(|| schema(format!("missing service column `{}`", roles.service)))?;
    let fault_col = find(&roles.fault_type);
    if require_faults && fault_col.is_none() {
        return Err(schema(format!("missing fault-type column `{}`", roles.fault_type)));
    }
    let label_col = match &roles.label {
        Some(l) => Some(find(l).ok_or_else(|| schema(format!("missing label column `{l}`")))?),
        None => None,
    };
    let ts_col = find(&roles.timestamp);
    let role_cols: Vec<usize> = [Some(service_col), fault_col, label_col, ts_col].into_iter().flatten().collect();
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|c| !role_cols.contains(c) && !roles.ignore.contains(&headers[*c]))
        .collect();
    for c in &roles.categorical {
        if find(c).is_none() {
            return Err(schema(format!("declared categorical column `{c}` not found")));
        }
    }

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); feature_cols.len()];
    let (mut services, mut faults, mut timestamps) = (Vec::new(), Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record?;
        let get = |c: usize| record.get(c).unwrap_or("").trim();
        services.push(get(service_col).to_string());
        if let Some(fc) = fault_col {
            let raw = get(fc);
            let positive = label_col.is_none_or(|lc| is_true(get(lc)));
            faults.push((positive && !is_normal_label(raw)).then(|| raw.to_string()));
        }
        timestamps.push(ts_col.and_then(|tc| parse_timestamp(get(tc), ts_format)));
        for (k, &c) in feature_cols.iter().enumerate() {
            cells[k].push(get(c).to_string());
        }
    }

    let mut columns = Vec::with_capacity(feature_cols.len());
    let mut specs = Vec::with_capacity(feature_cols.len());
    for (k, &c) in feature_cols.iter().enumerate() {
        let name = headers[c].clone();
        let values = std::mem::take(&mut cells[k]);
        if roles.categorical.contains(&name) {
            columns.push(RawColumn::categorical(&name, values.into_iter().map(|v| (!is_missing(&v)).then_some(v)).collect()));
            specs.push(FeatureSpec::categorical(name));
        } else {
            let mut parsed = Vec::with_capacity(values.len());
            for (row, v) in values.iter().enumerate() {
                if is_missing(v) {
                    parsed.push(None);
                } else {
                    let x: f64 = v.parse().map_err(|_| {
                        schema(format!("column `{name}` row {} value `{v}` is not numeric (declare it categorical)", row + 1))
                    })?;
                    parsed.push(Some(x));
                }
            }
            columns.push(RawColumn::numeric(&name, parsed));
            specs.push(FeatureSpec::numeric(name, bins));
        }
    }
    let table = RawTable::new(columns)?;
    Ok(MetricsTable { table, specs, services, fault_labels: faults, timestamps })
}

impl MetricsTable {
    pub fn rows(&self) -> usize {
        self.services.len()
    }

    /// Appends the three log novelty columns, looked up by row timestamp.
    /// Rows outside the frame or without a timestamp get zeros.
    pub fn join_logs(&mut self, frame: &LogFeatureFrame, bins: usize) -> Result<(), CliError> {
        let mut cols = self.table.columns().to_vec();
        let counts: Vec<[f64; 3]> = self
            .timestamps
            .iter()
            .map(|t| {
                t.and_then(|t| frame.counts_at(t))
                    .map_or([0.0; 3], |c| [c.total as f64, c.unmatched as f64, c.distinct_new as f64])
            })
            .collect();
        for (k, name) in LOG_COLUMNS.iter().enumerate() {
            if cols.iter().any(|c| c.name == *name) {
                return Err(CliError::Core(SlimError::Schema(format!("column `{name}` already present"))));
            }
            cols.push(RawColumn::numeric(*name, counts.iter().map(|c| Some(c[k])).collect()));
            self.specs.push(FeatureSpec::numeric(*name, bins));
        }
        self.table = RawTable::new(cols)?;
        Ok(())
    }
}

/// Regular files in a directory, sorted by name.
pub fn list_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// All lines of all files in a directory, files in name order.
pub fn read_log_lines(dir: &Path) -> Result<Vec<String>, CliError> {
    let mut lines = Vec::new();
    for f in list_files(dir)? {
        let bytes = std::fs::read(&f).map_err(|e| CliError::io(&f, e))?;
        lines.extend(String::from_utf8_lossy(&bytes).lines().map(str::to_string));
    }
    Ok(lines)
}

/// `normal/` and `online/` under a log directory. A directory without
/// either subdirectory is treated as online logs only.
pub fn log_dirs(root: &Path) -> (Option<PathBuf>, PathBuf) {
    let normal = root.join("normal");
    let online = root.join("online");
    let normal = normal.is_dir().then_some(normal);
    let online = if online.is_dir() { online } else { root.to_path_buf() };
    (normal, online)
}

/// Builds the template base from normal logs, dropping timestamp prefixes
/// where present.
pub fn build_template_base(
    normal: Option<&Path>,
    depth: usize,
    sim: f64,
    ts_format: &TimestampFormat,
) -> Result<TemplateBase, CliError> {
    let lines = match normal {
        Some(dir) => read_log_lines(dir)?,
        None => Vec::new(),
    };
    let messages = lines.iter().map(|l| split_timestamp(l, ts_format).map_or(l.as_str(), |(_, m)| m));
    Ok(TemplateBase::build(messages, depth, sim)?)
}

/// SHA-256 over the given files' names and bytes, in order.
pub fn hash_files(paths: &[PathBuf]) -> Result<String, CliError> {
    let mut hasher = Sha256::new();
    for p in paths {
        let bytes = std::fs::read(p).map_err(|e| CliError::io(p, e))?;
        if let Some(name) = p.file_name() {
            hasher.update(name.to_string_lossy().as_bytes());
        }
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p).unwrap().write_all(text.as_bytes()).unwrap();
        p
    }

    #[test]
    fn reads_roles_and_features() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "m.csv",
            "timestamp,service,fault_type,cpu,state\n60,a,normal,1.5,run\n120,b,cpu_hog,NA,wait\n",
        );
        let roles = ColumnRoles { categorical: vec!["state".into()], ..Default::default() };
        let m = read_metrics_csv(&p, &roles, 10, true, &TimestampFormat::Iso8601).unwrap();
        assert_eq!(m.services, vec!["a", "b"]);
        assert_eq!(m.fault_labels, vec![None, Some("cpu_hog".to_string())]);
        assert_eq!(m.timestamps, vec![Some(60), Some(120)]);
        assert_eq!(m.specs.len(), 2);
        assert_eq!(m.table.column("cpu").unwrap().values, slim_core::binarizer::RawValues::Numeric(vec![Some(1.5), None]));
    }

    #[test]
    fn non_numeric_cell_is_a_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "m.csv", "service,fault_type,cpu\na,,high\n");
        let err = read_metrics_csv(&p, &ColumnRoles::default(), 10, true, &TimestampFormat::Iso8601).unwrap_err();
        assert_eq!(err.category(), "schema");
    }

    #[test]
    fn missing_fault_column_only_matters_for_training() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "m.csv", "service,cpu\na,1\n");
        let roles = ColumnRoles::default();
        assert!(read_metrics_csv(&p, &roles, 10, true, &TimestampFormat::Iso8601).is_err());
        assert!(read_metrics_csv(&p, &roles, 10, false, &TimestampFormat::Iso8601).is_ok());
    }

    #[test]
    fn label_column_gates_fault_type() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "m.csv", "service,fault_type,is_fault,cpu\na,cpu,0,1\na,cpu,1,2\n");
        let roles = ColumnRoles { label: Some("is_fault".into()), ..Default::default() };
        let m = read_metrics_csv(&p, &roles, 10, true, &TimestampFormat::Iso8601).unwrap();
        assert_eq!(m.fault_labels, vec![None, Some("cpu".to_string())]);
    }

    #[test]
    fn timestamps_in_several_forms() {
        let iso = TimestampFormat::Iso8601;
        assert_eq!(parse_timestamp("90", &iso), Some(90));
        assert_eq!(parse_timestamp("90.7", &iso), Some(90));
        assert_eq!(parse_timestamp("1970-01-01T00:01:30Z", &iso), Some(90));
        assert_eq!(parse_timestamp("soon", &iso), None);
    }

    #[test]
    fn hash_depends_on_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", "x\n1\n");
        let h1 = hash_files(std::slice::from_ref(&a)).unwrap();
        assert_eq!(h1, hash_files(std::slice::from_ref(&a)).unwrap());
        write(dir.path(), "a.csv", "x\n2\n");
        assert_ne!(h1, hash_files(&[a]).unwrap());
    }
}
