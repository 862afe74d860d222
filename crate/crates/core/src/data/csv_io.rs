use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{MultiPopulationData, PopulationDataset};
use crate::error::{Error, Result};

/// Reads a headered CSV file. Every column other than the population and
/// target columns is a numeric feature.
pub fn load_csv(
    path: impl AsRef<Path>,
    population_column: &str,
    target_column: &str,
) -> Result<MultiPopulationData> {
    let file = std::fs::File::open(path)?;
    read_csv(file, population_column, target_column)
}

pub fn read_csv<R: Read>(
    reader: R,
    population_column: &str,
    target_column: &str,
) -> Result<MultiPopulationData> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("column `{name}` not found in header")))
    };
    let pop_idx = find(population_column)?;
    let target_idx = find(target_column)?;
    if pop_idx == target_idx {
        return Err(Error::Schema(
            "population and target columns must differ".into(),
        ));
    }
    let feature_idx: Vec<usize> = (0..headers.len())
        .filter(|&i| i != pop_idx && i != target_idx)
        .collect();
    if feature_idx.is_empty() {
        return Err(Error::Schema("no feature columns".into()));
    }
    let feature_names: Vec<String> = feature_idx
        .iter()
        .map(|&i| headers[i].trim().to_string())
        .collect();

    // population id -> (flat row-major features, targets), in order of first appearance
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, (Vec<f64>, Vec<f64>)> = HashMap::new();

    for (row0, record) in rdr.records().enumerate() {
        let row = row0 + 1;
        let record = record?;
        let parse = |col: usize| -> Result<f64> {
            let raw = record.get(col).unwrap_or("").trim();
            let v: f64 = raw.parse().map_err(|_| Error::Ingestion {
                row,
                column: headers[col].to_string(),
                reason: format!("`{raw}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Ingestion {
                    row,
                    column: headers[col].to_string(),
                    reason: format!("non-finite value `{raw}`"),
                });
            }
            Ok(v)
        };
        let pop = record.get(pop_idx).unwrap_or("").trim().to_string();
        if pop.is_empty() {
            return Err(Error::Ingestion {
                row,
                column: population_column.to_string(),
                reason: "empty population id".into(),
            });
        }
        let target = parse(target_idx)?;
        let entry = groups.entry(pop.clone()).or_insert_with(|| {
            order.push(pop);
            (Vec::new(), Vec::new())
        });
        for &c in &feature_idx {
            entry.0.push(parse(c)?);
        }
        entry.1.push(target);
    }
    if order.is_empty() {
        return Err(Error::invalid_data("CSV contains no data rows"));
    }

    let m = feature_names.len();
    let populations = order
        .into_iter()
        .map(|id| {
            let (xs, ys) = groups.remove(&id).expect("group recorded");
            let n = ys.len();
            let x = Array2::from_shape_vec((n, m), xs).expect("row-major buffer");
            PopulationDataset::new(id, x, Array1::from(ys))
        })
        .collect::<Result<Vec<_>>>()?;
    MultiPopulationData::new(feature_names, target_column, populations)
}

/// Writes `population,<features...>,<target>` rows.
pub fn write_csv<W: Write>(data: &MultiPopulationData, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["population".to_string()];
    header.extend(data.feature_names.iter().cloned());
    header.push(data.target_name.clone());
    wtr.write_record(&header)?;
    for p in &data.populations {
        for (row, y) in p.x.rows().into_iter().zip(p.y.iter()) {
            let mut rec = Vec::with_capacity(row.len() + 2);
            rec.push(p.id.clone());
            rec.extend(row.iter().map(|v| v.to_string()));
            rec.push(y.to_string());
            wtr.write_record(&rec)?;
        }
    }
    wtr.flush()?;
    Ok(())
}
