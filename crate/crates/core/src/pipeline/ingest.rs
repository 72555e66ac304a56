//! CSV panel ingestion: wide format (member rows, timestamp columns, leading
//! label columns) split across a cause file and an effect file, or long
//! format (member, timestamp, x, y) in a single file. The format is
//! auto-detected from the header.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::float::Float;
use crate::granger::{Panel, SeriesPair};

/// Wide-format source: one file per variable, with shared member keys.
#[derive(Debug, Clone)]
pub struct WidePanelSource {
    pub cause_path: PathBuf,
    pub effect_path: PathBuf,
    /// Names of the leading label columns; all other columns are timestamps.
    pub label_columns: Vec<String>,
}

/// Input description for [`ingest_panel_csv`].
#[derive(Debug, Clone)]
pub enum PanelSource {
    Wide(WidePanelSource),
    Long(PathBuf),
}

/// Ingestion output: the panel, the timestamp names and the members dropped
/// for missing values.
#[derive(Debug)]
pub struct IngestedPanel<F> {
    pub panel: Panel<F>,
    pub timestamps: Vec<String>,
    pub dropped_missing: Vec<String>,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source: e,
    }
}

fn parse_err(path: &Path, location: impl Into<String>, detail: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        location: location.into(),
        detail: detail.into(),
    }
}

fn read_records(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => io_err(path, std::io::Error::other(e.to_string())),
            _ => parse_err(path, "header", e.to_string()),
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(path, "header", e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut records = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(path, format!("row {}", i + 2), e.to_string()))?;
        records.push(record);
    }
    Ok((headers, records))
}

fn parse_cell<F: Float>(raw: &str) -> Option<F> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return None;
    }
    match trimmed.parse::<f64>() {
        Ok(v) if v.is_finite() => Some(F::cast(v)),
        _ => None,
    }
}

/// One wide file parsed into key -> optional series.
struct WideTable {
    timestamps: Vec<String>,
    /// Member key -> per-timestamp values (None where missing/unparseable).
    rows: Vec<(String, Vec<Option<f64>>)>,
}

fn read_wide_table(path: &Path, label_columns: &[String]) -> Result<WideTable> {
    let (headers, records) = read_records(path)?;
    let mut label_idx = Vec::with_capacity(label_columns.len());
    for name in label_columns {
        let idx = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(path, "header", format!("label column '{name}' not found")))?;
        label_idx.push(idx);
    }
    let value_idx: Vec<usize> = (0..headers.len())
        .filter(|i| !label_idx.contains(i))
        .collect();
    if value_idx.is_empty() {
        return Err(parse_err(path, "header", "no timestamp columns"));
    }
    let timestamps: Vec<String> = value_idx.iter().map(|&i| headers[i].clone()).collect();

    let mut rows = Vec::with_capacity(records.len());
    let mut seen = std::collections::BTreeSet::new();
    for (r, record) in records.iter().enumerate() {
        if record.len() != headers.len() {
            return Err(parse_err(
                path,
                format!("row {}", r + 2),
                format!("{} fields, expected {}", record.len(), headers.len()),
            ));
        }
        let key = label_idx
            .iter()
            .map(|&i| record[i].trim().to_string())
            .collect::<Vec<_>>()
            .join("|");
        if !seen.insert(key.clone()) {
            return Err(parse_err(
                path,
                format!("row {}", r + 2),
                format!("duplicate member key '{key}'"),
            ));
        }
        let values: Vec<Option<f64>> = value_idx.iter().map(|&i| parse_cell(&record[i])).collect();
        rows.push((key, values));
    }
    Ok(WideTable { timestamps, rows })
}

fn ingest_wide<F: Float>(source: &WidePanelSource) -> Result<IngestedPanel<F>> {
    let cause = read_wide_table(&source.cause_path, &source.label_columns)?;
    let effect = read_wide_table(&source.effect_path, &source.label_columns)?;

    if cause.timestamps != effect.timestamps {
        return Err(Error::Join {
            detail: "cause and effect files have different timestamp columns".into(),
        });
    }

    let effect_map: BTreeMap<&str, &Vec<Option<f64>>> = effect
        .rows
        .iter()
        .map(|(k, v)| (k.as_str(), v))
        .collect();
    let cause_keys: std::collections::BTreeSet<&str> =
        cause.rows.iter().map(|(k, _)| k.as_str()).collect();
    let mut unmatched: Vec<String> = cause
        .rows
        .iter()
        .filter(|(k, _)| !effect_map.contains_key(k.as_str()))
        .map(|(k, _)| format!("{k} (cause only)"))
        .collect();
    unmatched.extend(
        effect
            .rows
            .iter()
            .filter(|(k, _)| !cause_keys.contains(k.as_str()))
            .map(|(k, _)| format!("{k} (effect only)")),
    );
    if !unmatched.is_empty() {
        return Err(Error::Join {
            detail: format!("unmatched member keys: {}", unmatched.join(", ")),
        });
    }

    let mut members = Vec::new();
    let mut labels = Vec::new();
    let mut dropped = Vec::new();
    for (key, x_vals) in &cause.rows {
        let y_vals = effect_map[key.as_str()];
        if x_vals.iter().any(Option::is_none) || y_vals.iter().any(Option::is_none) {
            dropped.push(key.clone());
            continue;
        }
        let x: Vec<F> = x_vals.iter().map(|v| F::cast(v.unwrap())).collect();
        let y: Vec<F> = y_vals.iter().map(|v| F::cast(v.unwrap())).collect();
        members.push(SeriesPair::new(x, y)?);
        labels.push(key.clone());
    }
    if members.is_empty() {
        return Err(Error::EmptyPanel);
    }
    Ok(IngestedPanel {
        panel: Panel::new(members, labels)?,
        timestamps: cause.timestamps,
        dropped_missing: dropped,
    })
}

fn ingest_long<F: Float>(path: &Path) -> Result<IngestedPanel<F>> {
    let (headers, records) = read_records(path)?;
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| parse_err(path, "header", format!("column '{name}' not found")))
    };
    let member_idx = find("member")?;
    let time_idx = find("timestamp")?;
    let x_idx = find("x")?;
    let y_idx = find("y")?;

    // Members in order of first appearance, rows in file order.
    type MemberRows = (Vec<String>, Vec<Option<f64>>, Vec<Option<f64>>);
    let mut order: Vec<String> = Vec::new();
    let mut per_member: BTreeMap<String, MemberRows> = BTreeMap::new();
    for (r, record) in records.iter().enumerate() {
        let location = format!("row {}", r + 2);
        if record.len() != headers.len() {
            return Err(parse_err(
                path,
                location,
                format!("{} fields, expected {}", record.len(), headers.len()),
            ));
        }
        let member = record[member_idx].trim().to_string();
        if member.is_empty() {
            return Err(parse_err(path, location, "empty member key"));
        }
        if !per_member.contains_key(&member) {
            order.push(member.clone());
        }
        let entry = per_member.entry(member).or_default();
        entry.0.push(record[time_idx].trim().to_string());
        entry.1.push(parse_cell(&record[x_idx]));
        entry.2.push(parse_cell(&record[y_idx]));
    }
    if order.is_empty() {
        return Err(Error::EmptyPanel);
    }

    let reference_times = per_member[&order[0]].0.clone();
    for key in &order {
        if per_member[key].0 != reference_times {
            return Err(Error::Join {
                detail: format!("member '{key}' has a different timestamp sequence"),
            });
        }
    }

    let mut members = Vec::new();
    let mut labels = Vec::new();
    let mut dropped = Vec::new();
    for key in &order {
        let (_, xs, ys) = &per_member[key];
        if xs.iter().any(Option::is_none) || ys.iter().any(Option::is_none) {
            dropped.push(key.clone());
            continue;
        }
        let x: Vec<F> = xs.iter().map(|v| F::cast(v.unwrap())).collect();
        let y: Vec<F> = ys.iter().map(|v| F::cast(v.unwrap())).collect();
        members.push(SeriesPair::new(x, y)?);
        labels.push(key.clone());
    }
    if members.is_empty() {
        return Err(Error::EmptyPanel);
    }
    Ok(IngestedPanel {
        panel: Panel::new(members, labels)?,
        timestamps: reference_times,
        dropped_missing: dropped,
    })
}

/// Returns true when the file header names the long-format columns.
pub fn is_long_format(path: &Path) -> Result<bool> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| parse_err(path, "header", e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, "header", e.to_string()))?;
    let names: Vec<String> = headers
        .iter()
        .map(|h| h.trim().to_ascii_lowercase())
        .collect();
    Ok(["member", "timestamp", "x", "y"]
        .iter()
        .all(|n| names.iter().any(|h| h == n)))
}

/// Reads a panel from CSV. Members with any missing value in either variable
/// are dropped and recorded.
pub fn ingest_panel_csv<F: Float>(source: &PanelSource) -> Result<IngestedPanel<F>> {
    match source {
        PanelSource::Wide(wide) => ingest_wide(wide),
        PanelSource::Long(path) => ingest_long(path),
    }
}

/// Writes a panel in long format (member, timestamp, x, y).
pub fn write_long_csv<F: Float>(
    panel: &Panel<F>,
    timestamps: Option<&[String]>,
    path: &Path,
) -> Result<()> {
    let t = panel.n_timestamps();
    if let Some(ts) = timestamps {
        if ts.len() != t {
            return Err(Error::DimensionMismatch {
                detail: format!("{} timestamp names for {t} observations", ts.len()),
            });
        }
    }
    let mut file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    writeln!(file, "member,timestamp,x,y").map_err(|e| io_err(path, e))?;
    for (member, label) in panel.members().iter().zip(panel.labels()) {
        for s in 0..t {
            let stamp = match timestamps {
                Some(ts) => ts[s].clone(),
                None => s.to_string(),
            };
            writeln!(
                file,
                "{label},{stamp},{},{}",
                member.x()[s],
                member.y()[s]
            )
            .map_err(|e| io_err(path, e))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_file(dir: &tempfile::TempDir, name: &str, content: &str) -> PathBuf {
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    fn wide_source(dir: &tempfile::TempDir, cause: &str, effect: &str) -> PanelSource {
        PanelSource::Wide(WidePanelSource {
            cause_path: write_file(dir, "cause.csv", cause),
            effect_path: write_file(dir, "effect.csv", effect),
            label_columns: vec!["region".into(), "country".into()],
        })
    }

    #[test]
    fn wide_member_with_missing_cell_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let cause = "region,country,1/1/21,1/2/21,1/3/21\n\
                     a,AA,1,2,3\n\
                     b,BB,4,,6\n\
                     c,CC,7,8,9\n";
        let effect = "region,country,1/1/21,1/2/21,1/3/21\n\
                      a,AA,2,3,4\n\
                      b,BB,5,6,7\n\
                      c,CC,8,9,10\n";
        let source = wide_source(&dir, cause, effect);
        let out = ingest_panel_csv::<f64>(&source).unwrap();
        assert_eq!(out.panel.n_members(), 2);
        assert_eq!(out.dropped_missing, vec!["b|BB".to_string()]);
        assert_eq!(out.timestamps, vec!["1/1/21", "1/2/21", "1/3/21"]);
        assert_eq!(out.panel.labels(), &["a|AA".to_string(), "c|CC".to_string()]);
    }

    #[test]
    fn identical_files_give_equal_series() {
        let dir = tempfile::tempdir().unwrap();
        let content = "region,country,t1,t2,t3\na,AA,1,2,3\nb,BB,4,5,6\n";
        let source = wide_source(&dir, content, content);
        let out = ingest_panel_csv::<f64>(&source).unwrap();
        for member in out.panel.members() {
            assert_eq!(member.x(), member.y());
        }
    }

    #[test]
    fn unmatched_keys_fail_the_join() {
        let dir = tempfile::tempdir().unwrap();
        let cause = "region,country,t1,t2\na,AA,1,2\nb,BB,3,4\n";
        let effect = "region,country,t1,t2\na,AA,1,2\nz,ZZ,3,4\n";
        let source = wide_source(&dir, cause, effect);
        match ingest_panel_csv::<f64>(&source) {
            Err(Error::Join { detail }) => {
                assert!(detail.contains("b|BB"));
                assert!(detail.contains("z|ZZ"));
            }
            other => panic!("expected Join error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_member_keys_are_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let cause = "region,country,t1,t2\na,AA,1,2\na,AA,3,4\n";
        let source = wide_source(&dir, cause, cause);
        match ingest_panel_csv::<f64>(&source) {
            Err(Error::Parse { location, detail, .. }) => {
                assert_eq!(location, "row 3");
                assert!(detail.contains("a|AA"));
            }
            other => panic!("expected Parse error, got {other:?}"),
        }
    }

    #[test]
    fn mismatched_timestamp_columns_fail_the_join() {
        let dir = tempfile::tempdir().unwrap();
        let cause = "region,country,t1,t2\na,AA,1,2\n";
        let effect = "region,country,t1,t3\na,AA,1,2\n";
        let source = wide_source(&dir, cause, effect);
        assert!(matches!(
            ingest_panel_csv::<f64>(&source),
            Err(Error::Join { .. })
        ));
    }

    #[test]
    fn missing_label_column_is_a_parse_error_with_location() {
        let dir = tempfile::tempdir().unwrap();
        let cause = "name,t1,t2\na,1,2\n";
        let source = wide_source(&dir, cause, cause);
        match ingest_panel_csv::<f64>(&source) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "header"),
            other => panic!("expected Parse error, got {other:?}"),
        }
    }

    #[test]
    fn long_format_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let content = "member,timestamp,x,y\n\
                       m1,0,1.0,2.0\nm1,1,1.5,2.5\nm1,2,1.2,2.2\n\
                       m2,0,0.1,0.2\nm2,1,0.3,0.4\nm2,2,0.5,0.6\n";
        let path = write_file(&dir, "long.csv", content);
        assert!(is_long_format(&path).unwrap());
        let out = ingest_panel_csv::<f64>(&PanelSource::Long(path)).unwrap();
        assert_eq!(out.panel.n_members(), 2);
        assert_eq!(out.panel.n_timestamps(), 3);
        assert_eq!(out.timestamps, vec!["0", "1", "2"]);

        let back = dir.path().join("back.csv");
        write_long_csv(&out.panel, Some(&out.timestamps), &back).unwrap();
        let again = ingest_panel_csv::<f64>(&PanelSource::Long(back)).unwrap();
        assert_eq!(out.panel, again.panel);
    }

    #[test]
    fn long_member_with_unparseable_cell_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let content = "member,timestamp,x,y\n\
                       m1,0,1.0,2.0\nm1,1,oops,2.5\n\
                       m2,0,0.1,0.2\nm2,1,0.3,0.4\n";
        let path = write_file(&dir, "long.csv", content);
        let out = ingest_panel_csv::<f64>(&PanelSource::Long(path)).unwrap();
        assert_eq!(out.panel.n_members(), 1);
        assert_eq!(out.dropped_missing, vec!["m1".to_string()]);
    }

    #[test]
    fn long_with_inconsistent_timestamps_fails_the_join() {
        let dir = tempfile::tempdir().unwrap();
        let content = "member,timestamp,x,y\n\
                       m1,0,1.0,2.0\nm1,1,1.5,2.5\n\
                       m2,0,0.1,0.2\nm2,5,0.3,0.4\n";
        let path = write_file(&dir, "long.csv", content);
        assert!(matches!(
            ingest_panel_csv::<f64>(&PanelSource::Long(path)),
            Err(Error::Join { .. })
        ));
    }

    #[test]
    fn wide_header_is_not_long_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "wide.csv", "region,country,t1,t2\na,AA,1,2\n");
        assert!(!is_long_format(&path).unwrap());
    }
}
