//! Per-grid-point statistics over independent runs.

use std::io;

use indexmap::IndexSet;

use crate::species::SpeciesKey;
use crate::trace::{format_time, Trace};

/// Mean and sample standard deviation of every species at every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub runs: usize,
    /// Union of the runs' species, in first-observation order (run by run).
    pub species: Vec<SpeciesKey>,
    pub times: Vec<f64>,
    /// `mean[i][j]`: grid point `i`, species `j`.
    pub mean: Vec<Vec<f64>>,
    pub sd: Vec<Vec<f64>>,
}

impl EnsembleStats {
    /// All traces must share one sampling grid. Species a run never saw
    /// count as zero in that run.
    pub fn from_traces(traces: &[Trace]) -> EnsembleStats {
        assert!(!traces.is_empty(), "empty ensemble");
        let times: Vec<f64> = traces[0].records.iter().map(|r| r.time).collect();
        assert!(
            traces.iter().all(|t| t.records.len() == times.len()),
            "traces sampled on different grids"
        );
        let species: IndexSet<SpeciesKey> = traces
            .iter()
            .flat_map(|t| t.species.iter().cloned())
            .collect();
        let columns: Vec<Vec<Option<usize>>> = traces
            .iter()
            .map(|t| species.iter().map(|k| t.species.iter().position(|s| s == k)).collect())
            .collect();

        let n = traces.len() as f64;
        let mut mean = vec![vec![0.0; species.len()]; times.len()];
        let mut sd = vec![vec![0.0; species.len()]; times.len()];
        for i in 0..times.len() {
            for j in 0..species.len() {
                let value = |r: usize| columns[r][j].map_or(0.0, |c| traces[r].population(i, c) as f64);
                let m = (0..traces.len()).map(value).sum::<f64>() / n;
                let ss: f64 = (0..traces.len()).map(|r| (value(r) - m).powi(2)).sum();
                mean[i][j] = m;
                sd[i][j] = if traces.len() > 1 { (ss / (n - 1.0)).sqrt() } else { 0.0 };
            }
        }
        EnsembleStats {
            runs: traces.len(),
            species: species.into_iter().collect(),
            times,
            mean,
            sd,
        }
    }

    pub fn species_index(&self, species: &str) -> Option<usize> {
        self.species.iter().position(|k| k.as_str() == species)
    }

    /// Header `time,<species>.mean,<species>.sd,...`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["time".to_string()];
        for k in &self.species {
            header.push(format!("{k}.mean"));
            header.push(format!("{k}.sd"));
        }
        w.write_record(&header)?;
        for (i, &t) in self.times.iter().enumerate() {
            let mut row = vec![format_time(t)];
            for j in 0..self.species.len() {
                row.push(self.mean[i][j].to_string());
                row.push(self.sd[i][j].to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::TraceRecord;

    #[test]
    fn union_of_species_and_sample_sd() {
        let a = Trace {
            species: vec!["A".into()],
            records: vec![TraceRecord { time: 0.0, populations: vec![2] }],
        };
        let b = Trace {
            species: vec!["A".into(), "B".into()],
            records: vec![TraceRecord { time: 0.0, populations: vec![4, 6] }],
        };
        let s = EnsembleStats::from_traces(&[a, b]);
        assert_eq!(s.species, vec![SpeciesKey::from("A"), SpeciesKey::from("B")]);
        assert_eq!(s.mean[0], vec![3.0, 3.0]);
        assert!((s.sd[0][0] - 2f64.sqrt()).abs() < 1e-12);
        assert!((s.sd[0][1] - 18f64.sqrt()).abs() < 1e-12);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("time,A.mean,A.sd,B.mean,B.sd\n0,3,"));
    }
}
