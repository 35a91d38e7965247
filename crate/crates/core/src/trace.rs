//! Sampled trajectories and their CSV form.

use std::io;

use crate::species::SpeciesKey;

/// Populations at one grid point. `populations[i]` belongs to the `i`-th
/// species of the owning [`Trace`]; species first observed after this record
/// was taken are absent and read as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub time: f64,
    pub populations: Vec<u64>,
}

/// A trajectory sampled on a regular time grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    /// Every species observed during the run, in first-observation order.
    pub species: Vec<SpeciesKey>,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn population(&self, record: usize, species: usize) -> u64 {
        self.records[record]
            .populations
            .get(species)
            .copied()
            .unwrap_or(0)
    }

    pub fn species_index(&self, species: &str) -> Option<usize> {
        self.species.iter().position(|k| k.as_str() == species)
    }

    /// Column of one species across all records.
    pub fn column(&self, species: &str) -> Option<Vec<u64>> {
        let j = self.species_index(species)?;
        Some((0..self.records.len()).map(|i| self.population(i, j)).collect())
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["time".to_string()];
        header.extend(self.species.iter().map(|k| k.to_string()));
        w.write_record(&header)?;
        for (i, record) in self.records.iter().enumerate() {
            let mut row = vec![format_time(record.time)];
            row.extend((0..self.species.len()).map(|j| self.population(i, j).to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Grid times are printed with nine decimals, trailing zeros trimmed, so
/// accumulated floating point noise does not leak into the output.
pub fn format_time(t: f64) -> String {
    format_decimal(t, 9)
}

pub(crate) fn format_decimal(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    if !s.contains('.') {
        return s;
    }
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_backfills_late_species_and_quotes_names() {
        let trace = Trace {
            species: vec!["A".into(), "W(a,b)".into()],
            records: vec![
                TraceRecord {
                    time: 0.0,
                    populations: vec![3],
                },
                TraceRecord {
                    time: 0.1 + 0.2,
                    populations: vec![2, 1],
                },
            ],
        };
        assert_eq!(
            trace.to_csv_string(),
            "time,A,\"W(a,b)\"\n0,3,0\n0.3,2,1\n"
        );
        assert_eq!(trace.column("W(a,b)"), Some(vec![0, 1]));
    }

    #[test]
    fn decimal_formatting_trims() {
        assert_eq!(format_time(2.5), "2.5");
        assert_eq!(format_time(10.0), "10");
        assert_eq!(format_time(1e-12), "0");
    }
}
