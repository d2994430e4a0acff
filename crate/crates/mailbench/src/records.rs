use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

/// Nash gaps below this are rounding noise around an exact equilibrium.
pub const GAP_FLOOR: f64 = -1e-9;

pub const CSV_HEADER: [&str; 6] = ["env", "algorithm", "seed", "expert_queries", "nash_gap", "wall_ms"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub env: String,
    pub algorithm: String,
    pub seed: u64,
    pub expert_queries: u64,
    pub nash_gap: f64,
    /// Empty unless timing was requested.
    pub wall_ms: Option<u64>,
}

pub fn write_csv<W: Write>(out: W, records: &[ExperimentRecord]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> csv::Result<Vec<ExperimentRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers()?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>()),
        )));
    }
    rd.deserialize().collect()
}

/// Mean and sample standard deviation of one `(env, algorithm, queries)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub env: String,
    pub algorithm: String,
    pub expert_queries: u64,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub master_seed: u64,
    pub n_seeds: usize,
    pub cells: Vec<SummaryCell>,
    /// Experiment-specific scalars, such as warm-up query counts that are
    /// kept off the budget axis.
    pub extras: BTreeMap<String, f64>,
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Groups records by `(env, algorithm, expert_queries)` keeping first-seen
/// order of env and algorithm and ascending queries.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryCell> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut groups: BTreeMap<(usize, u64), Vec<f64>> = BTreeMap::new();
    for r in records {
        let key = (r.env.clone(), r.algorithm.clone());
        let idx = match order.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                order.push(key);
                order.len() - 1
            }
        };
        groups.entry((idx, r.expert_queries)).or_default().push(r.nash_gap);
    }
    groups
        .into_iter()
        .map(|((idx, q), gaps)| {
            let (mean, std) = mean_std(&gaps);
            SummaryCell {
                env: order[idx].0.clone(),
                algorithm: order[idx].1.clone(),
                expert_queries: q,
                n: gaps.len(),
                mean,
                std,
            }
        })
        .collect()
}
