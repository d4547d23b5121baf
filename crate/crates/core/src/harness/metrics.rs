//! CSV rows emitted by the harness. Column sets and order are fixed;
//! floats use the shortest decimal that round-trips.

use std::io::Write;

use crate::error::Result;

/// Gaps and on-path values of one replicate at one checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub replicate: usize,
    pub checkpoint: usize,
    pub gaps: Vec<f64>,
    pub values: Vec<f64>,
}

impl MetricRow {
    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn metrics_header(num_agents: usize) -> Vec<String> {
    let mut h = vec!["replicate".to_string(), "checkpoint".into(), "max_gap".into()];
    h.extend((0..num_agents).map(|i| format!("gap_agent{i}")));
    h.extend((0..num_agents).map(|i| format!("value_agent{i}")));
    h
}

pub fn write_metrics<W: Write>(rows: &[MetricRow], num_agents: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(metrics_header(num_agents))?;
    for r in rows {
        let mut rec = vec![r.replicate.to_string(), r.checkpoint.to_string(), r.max_gap().to_string()];
        rec.extend(r.gaps.iter().map(f64::to_string));
        rec.extend(r.values.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a file written by [`write_metrics`].
pub fn read_metrics<R: std::io::Read>(input: R) -> Result<Vec<MetricRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let n = (rdr.headers()?.len() - 3) / 2;
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |field: &str| crate::error::Error::Parse {
            location: format!("metrics line {}", line + 2),
            message: format!("bad field `{field}`"),
        };
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(&rec[i]));
        rows.push(MetricRow {
            replicate: rec[0].parse().map_err(|_| bad(&rec[0]))?,
            checkpoint: rec[1].parse().map_err(|_| bad(&rec[1]))?,
            gaps: (3..3 + n).map(num).collect::<Result<_>>()?,
            values: (3 + n..3 + 2 * n).map(num).collect::<Result<_>>()?,
        });
    }
    Ok(rows)
}

/// Wall-clock seconds per checkpoint, kept apart so metrics stay reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub replicate: usize,
    pub checkpoint: usize,
    pub train_seconds: f64,
    pub eval_seconds: f64,
}

pub fn write_timing<W: Write>(rows: &[TimingRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["replicate", "checkpoint", "train_seconds", "eval_seconds"])?;
    for r in rows {
        w.write_record([
            r.replicate.to_string(),
            r.checkpoint.to_string(),
            r.train_seconds.to_string(),
            r.eval_seconds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// How often an agent's optimistic initial value stayed above the
/// pointer-aware best-response value, over episodes `1..=episodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimismRow {
    pub replicate: usize,
    pub agent: usize,
    pub episodes: usize,
    pub violations: usize,
    /// Smallest `V̄_1^k(s_1) − V^⋆_{k,1}(s_1)` seen.
    pub min_margin: f64,
}

pub fn write_optimism<W: Write>(rows: &[OptimismRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["replicate", "agent", "episodes", "violations", "min_margin"])?;
    for r in rows {
        w.write_record([
            r.replicate.to_string(),
            r.agent.to_string(),
            r.episodes.to_string(),
            r.violations.to_string(),
            r.min_margin.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_golden_file() {
        let rows = vec![
            MetricRow {
                replicate: 0,
                checkpoint: 10,
                gaps: vec![0.25, 0.1],
                values: vec![1.0, 0.7000000000000001],
            },
            MetricRow {
                replicate: 1,
                checkpoint: 10,
                gaps: vec![-0.0, 1e-20],
                values: vec![0.5, 2.0],
            },
        ];
        let mut buf = Vec::new();
        write_metrics(&rows, 2, &mut buf).unwrap();
        let golden = "replicate,checkpoint,max_gap,gap_agent0,gap_agent1,value_agent0,value_agent1\n\
                      0,10,0.25,0.25,0.1,1,0.7000000000000001\n\
                      1,10,0.00000000000000000001,-0,0.00000000000000000001,0.5,2\n";
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), golden);
        assert_eq!(read_metrics(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn side_tables_have_fixed_headers() {
        let mut buf = Vec::new();
        write_timing(&[], &mut buf).unwrap();
        assert_eq!(buf, b"replicate,checkpoint,train_seconds,eval_seconds\n");
        buf.clear();
        write_optimism(&[], &mut buf).unwrap();
        assert_eq!(buf, b"replicate,agent,episodes,violations,min_margin\n");
    }
}
