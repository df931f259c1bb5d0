//! CSV and JSON ingestion and emission.
//!
//! Loss tables: header `sample_id,<label_1>,...,<label_M>`; the column order
//! is the grid order. Trajectories: header
//! `sample_id,conf_1..conf_T,early_1..early_T,full_pred,true_label,imputed_label`
//! with empty cells for absent labels, or a JSON array of records.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::etsc::{EtscSample, Label};
use crate::ppi::SemiSupervisedLosses;
use crate::rcps::{LossTable, ParameterGrid};

fn parse_f64(cell: &str, row: usize, column: &str) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|_| {
        Error::Parse(format!(
            "row {row}, column `{column}`: `{cell}` is not a number"
        ))
    })
}

fn parse_label(cell: &str, row: usize, column: &str) -> Result<Label> {
    cell.trim().parse::<Label>().map_err(|_| {
        Error::Parse(format!(
            "row {row}, column `{column}`: `{cell}` is not a label"
        ))
    })
}

/// Reads a loss table from CSV text.
pub fn read_loss_table_from<R: Read>(reader: R) -> Result<LossTable> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv.headers()?.clone();
    if headers.get(0) != Some("sample_id") {
        return Err(Error::Parse("first column must be `sample_id`".into()));
    }
    if headers.len() < 2 {
        return Err(Error::Parse("loss table has no grid columns".into()));
    }
    let labels: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
    let grid = ParameterGrid::from_labels(labels.clone())?;
    let mut ids = Vec::new();
    let mut columns = vec![Vec::new(); labels.len()];
    for (row, record) in csv.records().enumerate() {
        let record = record?;
        ids.push(record[0].to_owned());
        for (c, label) in labels.iter().enumerate() {
            columns[c].push(parse_f64(&record[c + 1], row + 1, label)?);
        }
    }
    LossTable::new(grid, ids, columns)
}

pub fn read_loss_table(path: impl AsRef<Path>) -> Result<LossTable> {
    read_loss_table_from(File::open(path)?)
}

pub fn write_loss_table_to<W: Write>(table: &LossTable, writer: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    let mut header = vec!["sample_id"];
    header.extend(table.grid().labels());
    csv.write_record(&header)?;
    for (row, id) in table.sample_ids().iter().enumerate() {
        let mut record = vec![id.clone()];
        record.extend(table.columns().iter().map(|c| c[row].to_string()));
        csv.write_record(&record)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_loss_table(table: &LossTable, path: impl AsRef<Path>) -> Result<()> {
    write_loss_table_to(table, File::create(path)?)
}

/// Reorders `imputed` rows to follow `reference`; both must hold the same
/// ids exactly once.
fn align_rows(reference: &LossTable, imputed: &LossTable) -> Result<LossTable> {
    if reference.n_samples() != imputed.n_samples() {
        return Err(Error::Shape(format!(
            "{} labeled true rows but {} labeled imputed rows",
            reference.n_samples(),
            imputed.n_samples()
        )));
    }
    let mut position = HashMap::new();
    for (row, id) in imputed.sample_ids().iter().enumerate() {
        if position.insert(id.as_str(), row).is_some() {
            return Err(Error::Shape(format!("duplicate sample id `{id}`")));
        }
    }
    let rows = reference
        .sample_ids()
        .iter()
        .map(|id| {
            position
                .get(id.as_str())
                .copied()
                .ok_or_else(|| Error::Shape(format!("sample id `{id}` has no imputed row")))
        })
        .collect::<Result<Vec<_>>>()?;
    imputed.select_rows(&rows)
}

/// Loads the three loss tables, joining the labeled pair on `sample_id`.
pub fn read_semi_supervised(
    labeled_true: impl AsRef<Path>,
    labeled_imputed: impl AsRef<Path>,
    unlabeled_imputed: impl AsRef<Path>,
) -> Result<SemiSupervisedLosses> {
    let l = read_loss_table(labeled_true)?;
    let lt = align_rows(&l, &read_loss_table(labeled_imputed)?)?;
    SemiSupervisedLosses::new(l, lt, read_loss_table(unlabeled_imputed)?)
}

/// Reads trajectories from CSV text.
pub fn read_etsc_csv_from<R: Read>(reader: R) -> Result<Vec<EtscSample>> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let id_col =
        find("sample_id").ok_or_else(|| Error::Parse("missing `sample_id` column".into()))?;
    let mut t_max = 0;
    while find(&format!("conf_{}", t_max + 1)).is_some() {
        t_max += 1;
    }
    if t_max == 0 {
        return Err(Error::Parse("missing `conf_1` column".into()));
    }
    let conf_cols = (1..=t_max)
        .map(|t| find(&format!("conf_{t}")))
        .collect::<Option<Vec<_>>>();
    let early_cols = (1..=t_max)
        .map(|t| find(&format!("early_{t}")))
        .collect::<Option<Vec<_>>>();
    let (conf_cols, early_cols) = match (conf_cols, early_cols) {
        (Some(c), Some(e)) => (c, e),
        _ => {
            return Err(Error::Parse(format!(
                "expected conf_1..conf_{t_max} and early_1..early_{t_max}"
            )))
        }
    };
    let full_col =
        find("full_pred").ok_or_else(|| Error::Parse("missing `full_pred` column".into()))?;
    let true_col = find("true_label");
    let imputed_col = find("imputed_label");

    let optional = |record: &csv::StringRecord,
                    col: Option<usize>,
                    row: usize,
                    name: &str|
     -> Result<Option<Label>> {
        match col.and_then(|c| record.get(c)).map(str::trim) {
            None | Some("") => Ok(None),
            Some(cell) => parse_label(cell, row, name).map(Some),
        }
    };

    let mut out = Vec::new();
    for (idx, record) in csv.records().enumerate() {
        let record = record?;
        let row = idx + 1;
        let confidence = conf_cols
            .iter()
            .map(|&c| parse_f64(&record[c], row, &headers[c]))
            .collect::<Result<Vec<_>>>()?;
        let early_pred = early_cols
            .iter()
            .map(|&c| parse_label(&record[c], row, &headers[c]))
            .collect::<Result<Vec<_>>>()?;
        out.push(EtscSample::new(
            record[id_col].to_owned(),
            confidence,
            early_pred,
            parse_label(&record[full_col], row, "full_pred")?,
            optional(&record, true_col, row, "true_label")?,
            optional(&record, imputed_col, row, "imputed_label")?,
        )?);
    }
    if out.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(out)
}

pub fn write_etsc_csv_to<W: Write>(samples: &[EtscSample], writer: W) -> Result<()> {
    let t_max = samples.first().map_or(0, EtscSample::t_max);
    let mut csv = csv::Writer::from_writer(writer);
    let mut header = vec!["sample_id".to_owned()];
    header.extend((1..=t_max).map(|t| format!("conf_{t}")));
    header.extend((1..=t_max).map(|t| format!("early_{t}")));
    header.extend(["full_pred", "true_label", "imputed_label"].map(str::to_owned));
    csv.write_record(&header)?;
    let label = |l: Option<Label>| l.map(|v| v.to_string()).unwrap_or_default();
    for s in samples {
        let mut record = vec![s.sample_id.clone()];
        record.extend(s.confidence.iter().map(f64::to_string));
        record.extend(s.early_pred.iter().map(Label::to_string));
        record.push(s.full_pred.to_string());
        record.push(label(s.true_label));
        record.push(label(s.imputed_label));
        csv.write_record(&record)?;
    }
    csv.flush()?;
    Ok(())
}

/// Reads trajectories from `.json` (array of records) or CSV.
pub fn read_etsc(path: impl AsRef<Path>) -> Result<Vec<EtscSample>> {
    let path = path.as_ref();
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let samples = if is_json {
        let samples: Vec<EtscSample> = serde_json::from_reader(File::open(path)?)?;
        for s in &samples {
            s.validate()?;
        }
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        samples
    } else {
        read_etsc_csv_from(File::open(path)?)?
    };
    Ok(samples)
}

pub fn write_etsc(samples: &[EtscSample], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        write_json(samples, path)
    } else {
        write_etsc_csv_to(samples, File::create(path)?)
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut file = File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Lowercase hex SHA-256 of the JSON form of `value`.
pub fn json_hash<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

/// Reads a column of numbers: one value per record, optional header line.
pub fn read_values_from<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut values = Vec::new();
    for (row, record) in csv.records().enumerate() {
        let record = record?;
        let Some(cell) = record.get(record.len().saturating_sub(1)) else {
            continue;
        };
        match cell.trim().parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if row == 0 => {}
            Err(_) => return Err(Error::Parse(format!("row {row}: `{cell}` is not a number"))),
        }
    }
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(values)
}

pub fn read_values(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    read_values_from(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_with_and_without_header() {
        assert_eq!(
            read_values_from("w\n0.5\n1\n".as_bytes()).unwrap(),
            vec![0.5, 1.0]
        );
        assert_eq!(
            read_values_from("0\n0.25\n".as_bytes()).unwrap(),
            vec![0.0, 0.25]
        );
        assert!(read_values_from("w\n".as_bytes()).is_err());
        assert!(read_values_from("1\nx\n".as_bytes()).is_err());
    }

    #[test]
    fn loss_table_round_trip() {
        let text = "sample_id,0.1,0.2\na,1,0\nb,0,0.5\n";
        let table = read_loss_table_from(text.as_bytes()).unwrap();
        assert_eq!(table.grid().label(1), Some("0.2"));
        assert_eq!(table.grid().points()[0].value, Some(0.1));
        assert_eq!(table.column(1).unwrap(), &[0.0, 0.5]);
        let mut buf = Vec::new();
        write_loss_table_to(&table, &mut buf).unwrap();
        assert_eq!(read_loss_table_from(buf.as_slice()).unwrap(), table);
    }

    #[test]
    fn loss_table_errors() {
        assert!(matches!(
            read_loss_table_from("id,q\n".as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            read_loss_table_from("sample_id,q\na,x\n".as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            read_loss_table_from("sample_id,q\na,1.5\n".as_bytes()),
            Err(Error::OutOfSupport { .. })
        ));
        assert!(read_loss_table_from("sample_id,q\na,1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn labeled_join_reorders_and_rejects_mismatch() {
        let l = read_loss_table_from("sample_id,q\na,1\nb,0\n".as_bytes()).unwrap();
        let lt = read_loss_table_from("sample_id,q\nb,1\na,0\n".as_bytes()).unwrap();
        let aligned = align_rows(&l, &lt).unwrap();
        assert_eq!(aligned.sample_ids(), l.sample_ids());
        assert_eq!(aligned.column(0).unwrap(), &[0.0, 1.0]);
        let other = read_loss_table_from("sample_id,q\nb,1\nc,0\n".as_bytes()).unwrap();
        assert!(matches!(align_rows(&l, &other), Err(Error::Shape(_))));
    }

    #[test]
    fn etsc_csv_round_trip() {
        let text = "sample_id,conf_1,conf_2,early_1,early_2,full_pred,true_label,imputed_label\n\
                    a,0.2,0.9,0,1,1,1,\n\
                    b,0.7,0.8,2,2,2,,2\n";
        let samples = read_etsc_csv_from(text.as_bytes()).unwrap();
        assert_eq!(samples[0].true_label, Some(1));
        assert_eq!(samples[0].imputed_label, None);
        assert_eq!(samples[1].true_label, None);
        assert_eq!(samples[1].early_pred, vec![2, 2]);
        let mut buf = Vec::new();
        write_etsc_csv_to(&samples, &mut buf).unwrap();
        assert_eq!(read_etsc_csv_from(buf.as_slice()).unwrap(), samples);
    }

    #[test]
    fn etsc_csv_requires_matching_columns() {
        let text = "sample_id,conf_1,conf_2,early_1,full_pred\na,0.1,0.2,0,0\n";
        assert!(matches!(
            read_etsc_csv_from(text.as_bytes()),
            Err(Error::Parse(_))
        ));
    }
}
