//! Loaders for the two UCI Parkinson speech files and the generic subject CSV.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::warn;
use mrcst_core::{group_samples, Label, RawSample, SubjectSegment, TransformedDataset};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("input file not found: {0}")]
    NotFound(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}: file contains no data rows")]
    Empty(String),
    #[error("line {line}: {msg}")]
    Line { line: u64, msg: String },
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error(transparent)]
    Grouping(#[from] mrcst_core::Error),
}

type Result<T> = std::result::Result<T, LoadError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    /// Headerless; id, 26 features, optional UPDRS, class.
    Sakar,
    /// Header row, `name` + `status` columns.
    MaxLittle,
    Csv,
}

impl DatasetFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetFormat::Sakar => "sakar",
            DatasetFormat::MaxLittle => "maxlittle",
            DatasetFormat::Csv => "csv",
        }
    }
}

pub fn load(path: &Path, format: DatasetFormat) -> Result<Vec<SubjectSegment>> {
    let text = read(path)?;
    let name = path.display().to_string();
    match format {
        DatasetFormat::Sakar => parse_sakar(&text, &name),
        DatasetFormat::MaxLittle => parse_maxlittle(&text, &name),
        DatasetFormat::Csv => parse_generic_csv(&text, &name),
    }
}

pub fn load_sakar(path: &Path) -> Result<Vec<SubjectSegment>> {
    load(path, DatasetFormat::Sakar)
}

pub fn load_maxlittle(path: &Path) -> Result<Vec<SubjectSegment>> {
    load(path, DatasetFormat::MaxLittle)
}

pub fn load_generic_csv(path: &Path) -> Result<Vec<SubjectSegment>> {
    load(path, DatasetFormat::Csv)
}

fn read(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(LoadError::NotFound(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Non-blank records with their 1-based line numbers.
fn records(text: &str) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| LoadError::Line {
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line());
        out.push((line, rec));
    }
    Ok(out)
}

fn number(field: &str, line: u64, column: usize) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(LoadError::Line {
            line,
            msg: format!("column {}: `{field}` is not a finite number", column + 1),
        }),
    }
}

fn label(field: &str, line: u64) -> Result<Label> {
    let bad = || LoadError::Line {
        line,
        msg: format!("label `{field}` is not 0 or 1"),
    };
    let v: f64 = field.parse().map_err(|_| bad())?;
    match v {
        0.0 => Ok(Label::Healthy),
        1.0 => Ok(Label::Parkinson),
        _ => Err(bad()),
    }
}

fn check_width(rec: &csv::StringRecord, line: u64, expected: usize) -> Result<()> {
    if rec.len() != expected {
        return Err(LoadError::Line {
            line,
            msg: format!("expected {expected} columns, found {}", rec.len()),
        });
    }
    Ok(())
}

/// Headerless Sakar layout. 28 columns (id, 26 features, class) or the
/// 29-column UCI file that also carries UPDRS before the class; UPDRS is dropped.
pub fn parse_sakar(text: &str, name: &str) -> Result<Vec<SubjectSegment>> {
    let recs = records(text)?;
    let Some((first_line, first)) = recs.first() else {
        return Err(LoadError::Empty(name.to_string()));
    };
    let width = first.len();
    if width != 28 && width != 29 {
        return Err(LoadError::Line {
            line: *first_line,
            msg: format!("expected 28 or 29 columns, found {width}"),
        });
    }
    let mut samples = Vec::with_capacity(recs.len());
    for (line, rec) in &recs {
        check_width(rec, *line, width)?;
        let features = (1..27).map(|j| number(&rec[j], *line, j)).collect::<Result<Vec<_>>>()?;
        samples.push(RawSample {
            subject_id: rec[0].to_string(),
            features,
            label: label(&rec[width - 1], *line)?,
        });
    }
    let segments = group_samples(samples)?;
    let uneven = segments.iter().any(|s| s.n_rows() != 26);
    if segments.len() != 40 || uneven {
        warn!(
            "{name}: {} subjects, {} rows; canonical Sakar file has 40 subjects of 26 rows",
            segments.len(),
            recs.len()
        );
    }
    Ok(segments)
}

/// Subject key of a MaxLittle recording name: everything before the final `_`.
pub fn maxlittle_subject(name: &str) -> &str {
    name.rsplit_once('_').map_or(name, |(prefix, _)| prefix)
}

/// MaxLittle layout: header row, recording `name` first, `status` label,
/// every other column a feature.
pub fn parse_maxlittle(text: &str, name: &str) -> Result<Vec<SubjectSegment>> {
    let recs = records(text)?;
    let Some(((_, header), rows)) = recs.split_first() else {
        return Err(LoadError::Empty(name.to_string()));
    };
    if rows.is_empty() {
        return Err(LoadError::Empty(name.to_string()));
    }
    let status = header
        .iter()
        .position(|h| h.eq_ignore_ascii_case("status"))
        .ok_or(LoadError::MissingColumn("status"))?;
    let feature_cols: Vec<usize> = (1..header.len()).filter(|&j| j != status).collect();
    let mut samples = Vec::with_capacity(rows.len());
    for (line, rec) in rows {
        check_width(rec, *line, header.len())?;
        let features = feature_cols
            .iter()
            .map(|&j| number(&rec[j], *line, j))
            .collect::<Result<Vec<_>>>()?;
        samples.push(RawSample {
            subject_id: maxlittle_subject(&rec[0]).to_string(),
            features,
            label: label(&rec[status], *line)?,
        });
    }
    let segments = group_samples(samples)?;
    if segments.len() != 31 || segments.iter().any(|s| !(6..=7).contains(&s.n_rows())) {
        warn!(
            "{name}: {} subjects, {} rows; canonical MaxLittle file has 31 subjects of 6-7 rows",
            segments.len(),
            rows.len()
        );
    }
    Ok(segments)
}

/// Subject id first, label in the `label` column when a header names one,
/// otherwise last; all other columns are features.
pub fn parse_generic_csv(text: &str, name: &str) -> Result<Vec<SubjectSegment>> {
    let recs = records(text)?;
    let Some((_, first)) = recs.first() else {
        return Err(LoadError::Empty(name.to_string()));
    };
    let has_header = first.iter().skip(1).any(|f| f.parse::<f64>().is_err());
    let (label_col, rows) = if has_header {
        let col = first
            .iter()
            .position(|h| h.eq_ignore_ascii_case("label"))
            .unwrap_or(first.len() - 1);
        (col, &recs[1..])
    } else {
        (first.len() - 1, &recs[..])
    };
    let Some((_, row0)) = rows.first() else {
        return Err(LoadError::Empty(name.to_string()));
    };
    let width = row0.len();
    if width < 3 || label_col == 0 || label_col >= width {
        return Err(LoadError::Line {
            line: rows[0].0,
            msg: format!("need a subject id, at least one feature and a label; found {width} columns"),
        });
    }
    let mut samples = Vec::with_capacity(rows.len());
    for (line, rec) in rows {
        check_width(rec, *line, width)?;
        let features = (1..width)
            .filter(|&j| j != label_col)
            .map(|j| number(&rec[j], *line, j))
            .collect::<Result<Vec<_>>>()?;
        samples.push(RawSample {
            subject_id: rec[0].to_string(),
            features,
            label: label(&rec[label_col], *line)?,
        });
    }
    Ok(group_samples(samples)?)
}

/// Writes `subject_id,label,f1..fN` with shortest round-trip floats and LF endings.
pub fn write_generic_csv<W: Write>(mut w: W, data: &TransformedDataset) -> std::io::Result<()> {
    let n = data.segments.first().map_or(0, SubjectSegment::n_features);
    let mut line = String::from("subject_id,label");
    for j in 1..=n {
        line.push_str(&format!(",f{j}"));
    }
    writeln!(w, "{line}")?;
    for (id, label, row) in data.samples() {
        line.clear();
        line.push_str(id);
        line.push(',');
        line.push_str(&label.as_u8().to_string());
        for v in row {
            line.push(',');
            line.push_str(&format!("{v:?}"));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn write_generic_csv_file(path: &Path, data: &TransformedDataset) -> std::io::Result<()> {
    let file = fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_generic_csv(&mut w, data)?;
    w.flush()
}
