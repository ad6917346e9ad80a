//! Sample groups, datasets, and the on-disk CSV container formats.
//!
//! Two group containers are understood:
//!
//! * a directory holding one headerless CSV per group (file stem = group id),
//!   optionally with a `labels.csv` (`id,label`, with header);
//! * a single headerless CSV whose first column is the group id and whose
//!   remaining columns are coordinates.
//!
//! Groups are always kept sorted by id so every matrix row/column index
//! downstream refers to the same order regardless of filesystem enumeration.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::estimators::{DivergenceMatrix, Provenance};

/// File names inside a group directory that hold metadata rather than a group.
pub const RESERVED_FILES: [&str; 3] = ["labels.csv", "params.csv", "flags.csv"];

/// Row-major matrix of sample points: `len()` rows of `dim()` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Points {
    data: Vec<f64>,
    dim: usize,
}

impl Points {
    pub fn new(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Contract("point dimension must be positive".into()));
        }
        if data.len() % dim != 0 {
            return Err(Error::Contract(format!(
                "{} values cannot be split into rows of {dim}",
                data.len()
            )));
        }
        Ok(Points { data, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::Contract("no rows given".into()))?;
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::Contract(format!(
                    "row {i} has {} coordinates, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Points::new(data, dim)
    }

    /// One-dimensional sample from a list of scalars.
    pub fn from_scalars(values: &[f64]) -> Self {
        Points {
            data: values.to_vec(),
            dim: 1,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Drops exact duplicate rows, keeping the first occurrence of each.
    pub fn dedup(&self) -> Points {
        let mut seen = HashSet::with_capacity(self.len());
        let mut data = Vec::with_capacity(self.data.len());
        for row in self.rows() {
            // -0.0 and 0.0 compare equal, so normalise before hashing bits
            let key: Vec<u64> = row.iter().map(|v| (v + 0.0).to_bits()).collect();
            if seen.insert(key) {
                data.extend_from_slice(row);
            }
        }
        Points {
            data,
            dim: self.dim,
        }
    }
}

/// One bag of i.i.d. points standing in for an unknown distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    id: String,
    points: Points,
    label: Option<String>,
}

impl Group {
    pub fn new(id: impl Into<String>, points: Points, label: Option<String>) -> Result<Self> {
        let id = id.into();
        if points.is_empty() {
            return Err(Error::EmptyGroup(id));
        }
        if let Some(pos) = points.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                group: id,
                row: pos / points.dim() + 1,
                column: pos % points.dim() + 1,
            });
        }
        Ok(Group { id, points, label })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn with_label(mut self, label: Option<String>) -> Self {
        self.label = label;
        self
    }

    pub fn dedup(&self) -> Group {
        Group {
            id: self.id.clone(),
            points: self.points.dedup(),
            label: self.label.clone(),
        }
    }
}

/// An id-sorted collection of groups sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    groups: Vec<Group>,
    dim: usize,
}

impl Dataset {
    /// Sorts `groups` by id and checks the shared-dimension and unique-id rules.
    /// The dimension is taken from the first group as given.
    pub fn new(mut groups: Vec<Group>) -> Result<Self> {
        let dim = groups
            .first()
            .map(Group::dim)
            .ok_or_else(|| Error::Contract("a dataset needs at least one group".into()))?;
        for g in &groups {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch {
                    group: g.id.clone(),
                    expected: dim,
                    found: g.dim(),
                });
            }
        }
        groups.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = groups.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::DuplicateId(w[0].id.clone()));
        }
        Ok(Dataset { groups, dim })
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn group(&self, i: usize) -> &Group {
        &self.groups[i]
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> Vec<String> {
        self.groups.iter().map(|g| g.id.clone()).collect()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.groups.binary_search_by(|g| g.id.as_str().cmp(id)).ok()
    }

    /// All labels, failing if any group is unlabeled.
    pub fn labels(&self) -> Result<Vec<String>> {
        self.groups
            .iter()
            .map(|g| {
                g.label.clone().ok_or_else(|| {
                    Error::Contract(format!("group `{}` has no label", g.id))
                })
            })
            .collect()
    }

    /// Attaches labels from an id → label map; groups absent from the map keep
    /// their current label.
    pub fn with_labels(mut self, labels: &BTreeMap<String, String>) -> Self {
        for g in &mut self.groups {
            if let Some(l) = labels.get(&g.id) {
                g.label = Some(l.clone());
            }
        }
        self
    }

    /// Sub-dataset with the groups at `indices` (kept in id order).
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        Dataset::new(indices.iter().map(|&i| self.groups[i].clone()).collect())
    }

    pub fn dedup(&self) -> Dataset {
        Dataset {
            groups: self.groups.iter().map(Group::dedup).collect(),
            dim: self.dim,
        }
    }
}

/// Loads a group container: a directory of per-group CSVs, or a single CSV
/// with an id column.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if meta.is_dir() {
        load_directory(path)
    } else {
        load_single_file(path)
    }
}

fn load_directory(dir: &Path) -> Result<Dataset> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "csv"))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            !RESERVED_FILES.contains(&name)
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Contract(format!(
            "no group files found in {}",
            dir.display()
        )));
    }

    let mut dim = None;
    let mut groups = Vec::with_capacity(files.len());
    for file in &files {
        let id = file
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Contract(format!("non UTF-8 file name {}", file.display())))?
            .to_string();
        let mut data = Vec::new();
        let mut rows = 0usize;
        for (r, record) in read_records(file)?.into_iter().enumerate() {
            let expected = *dim.get_or_insert(record.len());
            if record.len() != expected {
                return Err(Error::DimensionMismatch {
                    group: id,
                    expected,
                    found: record.len(),
                });
            }
            for (c, cell) in record.iter().enumerate() {
                data.push(parse_cell(file, r + 1, c + 1, cell)?);
            }
            rows += 1;
        }
        if rows == 0 {
            return Err(Error::EmptyGroup(id));
        }
        let points = Points::new(data, dim.unwrap_or(1))?;
        groups.push(Group::new(id, points, None)?);
    }

    let labels_path = dir.join("labels.csv");
    let mut ds = Dataset::new(groups)?;
    if labels_path.is_file() {
        ds = ds.with_labels(&load_labels(&labels_path)?);
    }
    Ok(ds)
}

fn load_single_file(file: &Path) -> Result<Dataset> {
    let mut by_id: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut dim = None;
    for (r, record) in read_records(file)?.into_iter().enumerate() {
        let id = record.first().cloned().unwrap_or_default();
        let coords = record.len().saturating_sub(1);
        let expected = *dim.get_or_insert(coords);
        if coords != expected || coords == 0 {
            return Err(Error::DimensionMismatch {
                group: id,
                expected,
                found: coords,
            });
        }
        let buf = by_id.entry(id).or_default();
        for (c, cell) in record.iter().enumerate().skip(1) {
            buf.push(parse_cell(file, r + 1, c + 1, cell)?);
        }
    }
    let dim = dim.ok_or_else(|| Error::EmptyGroup(file.display().to_string()))?;
    let groups = by_id
        .into_iter()
        .map(|(id, data)| Group::new(id, Points::new(data, dim)?, None))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(groups)
}

fn read_records(file: &Path) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(file)
        .map_err(|e| csv_error(file, e))?;
    reader
        .records()
        .map(|rec| {
            rec.map(|r| r.iter().map(str::to_string).collect())
                .map_err(|e| csv_error(file, e))
        })
        .collect()
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let row = err.position().map(|p| p.line() as usize).unwrap_or(0);
    match err.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Parse {
            path: path.to_path_buf(),
            row,
            column: 0,
            message: format!("{other:?}"),
        },
    }
}

fn parse_cell(path: &Path, row: usize, column: usize, cell: &str) -> Result<f64> {
    let value: f64 = cell.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        row,
        column,
        message: format!("`{cell}` is not a number"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            row,
            column,
            message: format!("`{cell}` is not finite"),
        });
    }
    Ok(value)
}

/// Reads a headed two-or-more column CSV keyed by its first column.
pub fn load_keyed_table(path: impl AsRef<Path>) -> Result<BTreeMap<String, Vec<String>>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut out = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let mut cells = rec.iter().map(str::to_string);
        if let Some(id) = cells.next() {
            out.insert(id, cells.collect());
        }
    }
    Ok(out)
}

/// Reads an `id,label` file (with header).
pub fn load_labels(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let path = path.as_ref();
    load_keyed_table(path)?
        .into_iter()
        .map(|(id, rest)| match rest.into_iter().next() {
            Some(label) => Ok((id, label)),
            None => Err(Error::Parse {
                path: path.to_path_buf(),
                row: 0,
                column: 2,
                message: format!("missing label for `{id}`"),
            }),
        })
        .collect()
}

/// Writes a dataset as a directory of per-group CSVs, plus `labels.csv` when
/// any group is labeled. Values are written with round-trip precision.
pub fn save_dataset(ds: &Dataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for g in ds.groups() {
        if g.id.is_empty() || g.id.contains(['/', '\\']) || RESERVED_FILES.contains(&format!("{}.csv", g.id).as_str()) {
            return Err(Error::Contract(format!(
                "group id `{}` cannot be used as a file name",
                g.id
            )));
        }
        let path = dir.join(format!("{}.csv", g.id));
        let mut out = String::with_capacity(g.len() * g.dim() * 20);
        for row in g.points.rows() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
    }
    if ds.groups().iter().any(|g| g.label.is_some()) {
        let rows: Vec<Vec<String>> = ds
            .groups()
            .iter()
            .filter_map(|g| g.label.as_ref().map(|l| vec![g.id.clone(), l.clone()]))
            .collect();
        write_table(dir.join("labels.csv"), &["id", "label"], &rows)?;
    }
    Ok(())
}

/// Writes a headed CSV table with standard quoting.
pub fn write_table<S: AsRef<str>>(
    path: impl AsRef<Path>,
    header: &[&str],
    rows: &[Vec<S>],
) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|c| c.as_ref()))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Formats a value with 9 significant digits, `%.9g` style.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Writes a divergence matrix with a header row and header column of ids.
pub fn save_matrix(m: &DivergenceMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header = vec![String::new()];
    header.extend(m.ids().iter().cloned());
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (i, id) in m.ids().iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend((0..m.len()).map(|j| format_sig9(m.values()[(i, j)])));
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a matrix written by [`save_matrix`].
pub fn load_matrix(path: impl AsRef<Path>) -> Result<DivergenceMatrix> {
    let path = path.as_ref();
    let records = read_records(path)?;
    let (header, body) = records
        .split_first()
        .ok_or_else(|| Error::Contract(format!("{} is empty", path.display())))?;
    let ids: Vec<String> = header.iter().skip(1).cloned().collect();
    let n = ids.len();
    if body.len() != n {
        return Err(Error::Contract(format!(
            "{}: {n} column ids but {} rows",
            path.display(),
            body.len()
        )));
    }
    let mut values = DMatrix::zeros(n, n);
    for (i, rec) in body.iter().enumerate() {
        if rec.len() != n + 1 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row: i + 2,
                column: rec.len(),
                message: format!("expected {} cells", n + 1),
            });
        }
        if rec[0] != ids[i] {
            return Err(Error::Contract(format!(
                "{}: row id `{}` does not match column id `{}`",
                path.display(),
                rec[0],
                ids[i]
            )));
        }
        for j in 0..n {
            values[(i, j)] = parse_cell(path, i + 2, j + 2, &rec[j + 1])?;
        }
    }
    DivergenceMatrix::new(ids, values, Provenance::File)
}
