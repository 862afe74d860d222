use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    /// Losses at the alpha the epoch started from.
    pub per_population_losses: Vec<f64>,
    pub aggregate: f64,
    pub regularizer: f64,
    pub total: f64,
    /// Alpha after this epoch's update; thinned.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub population_ids: Vec<String>,
    pub initial_alpha: Vec<f64>,
    pub epochs: Vec<EpochRecord>,
}

impl OptimizationTrace {
    pub fn new(population_ids: Vec<String>, initial_alpha: Vec<f64>) -> Self {
        Self {
            population_ids,
            initial_alpha,
            epochs: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, rec: EpochRecord) {
        debug_assert!(self.epochs.last().is_none_or(|l| l.epoch < rec.epoch));
        self.epochs.push(rec);
    }

    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    /// Every stored alpha snapshot, the initial one first.
    pub fn snapshots(&self) -> impl Iterator<Item = &[f64]> {
        std::iter::once(self.initial_alpha.as_slice())
            .chain(self.epochs.iter().filter_map(|e| e.alpha.as_deref()))
    }

    /// `[seed,]epoch,lr,loss_<pop>...,aggregate,regularizer,total`
    pub fn write_csv<W: Write>(&self, writer: W, seed: Option<u64>) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        self.write_rows(&mut wtr, seed, true)?;
        wtr.flush()?;
        Ok(())
    }

    pub(crate) fn write_rows<W: Write>(
        &self,
        wtr: &mut csv::Writer<W>,
        seed: Option<u64>,
        header: bool,
    ) -> Result<()> {
        if header {
            let mut h: Vec<String> = Vec::new();
            if seed.is_some() {
                h.push("seed".into());
            }
            h.extend(["epoch".to_string(), "lr".to_string()]);
            h.extend(self.population_ids.iter().map(|p| format!("loss_{p}")));
            h.extend(["aggregate", "regularizer", "total"].map(String::from));
            wtr.write_record(&h)?;
        }
        for e in &self.epochs {
            let mut r: Vec<String> = Vec::new();
            if let Some(s) = seed {
                r.push(s.to_string());
            }
            r.push(e.epoch.to_string());
            r.push(e.lr.to_string());
            r.extend(e.per_population_losses.iter().map(|v| v.to_string()));
            r.extend([e.aggregate, e.regularizer, e.total].map(|v| v.to_string()));
            wtr.write_record(&r)?;
        }
        Ok(())
    }
}

/// Writes several seeds' traces into one CSV with a leading `seed` column.
pub fn write_traces_csv<'a, W, I>(writer: W, traces: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (u64, &'a OptimizationTrace)>,
{
    let mut wtr = csv::Writer::from_writer(writer);
    for (i, (seed, t)) in traces.into_iter().enumerate() {
        t.write_rows(&mut wtr, Some(seed), i == 0)?;
    }
    wtr.flush()?;
    Ok(())
}
